#include "mimetic/params.hpp"

#include <cmath>

#include "mimetic/errors.hpp"

namespace mimetic {

Params::Params(const nlohmann::json& j, std::string context) : j_(j), ctx_(std::move(context)) {
  if (j_.is_null()) j_ = nlohmann::json::object();
  if (!j_.is_object()) fail(ErrorKind::Config, ctx_ + ": expected a JSON object");
}

void Params::bad(const std::string& key, const std::string& why) const {
  fail(ErrorKind::Config, ctx_ + "." + key + ": " + why);
}

bool Params::has(const std::string& key) const { return j_.contains(key) && !j_.at(key).is_null(); }

const nlohmann::json* Params::get(const std::string& key) {
  used_.insert(key);
  if (!has(key)) return nullptr;
  return &j_.at(key);
}

double Params::number(const std::string& key, double def) {
  const auto* v = get(key);
  if (!v) return def;
  if (!v->is_number()) bad(key, "expected a number");
  const double x = v->get<double>();
  if (!std::isfinite(x)) bad(key, "not finite");
  return x;
}

double Params::number(const std::string& key) {
  if (!has(key)) bad(key, "required");
  return number(key, 0.0);
}

int Params::integer(const std::string& key, int def) {
  const auto* v = get(key);
  if (!v) return def;
  if (!v->is_number_integer()) bad(key, "expected an integer");
  return v->get<int>();
}

int Params::integer(const std::string& key) {
  if (!has(key)) bad(key, "required");
  return integer(key, 0);
}

bool Params::flag(const std::string& key, bool def) {
  const auto* v = get(key);
  if (!v) return def;
  if (!v->is_boolean()) bad(key, "expected true or false");
  return v->get<bool>();
}

std::string Params::text(const std::string& key, const std::string& def) {
  const auto* v = get(key);
  if (!v) return def;
  if (!v->is_string()) bad(key, "expected a string");
  return v->get<std::string>();
}

std::vector<double> Params::numbers(const std::string& key, const std::vector<double>& def) {
  const auto* v = get(key);
  if (!v) return def;
  if (!v->is_array()) bad(key, "expected an array of numbers");
  std::vector<double> out;
  for (const auto& x : *v) {
    if (!x.is_number()) bad(key, "expected an array of numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

nlohmann::json Params::object(const std::string& key) {
  const auto* v = get(key);
  if (!v) return nlohmann::json::object();
  if (!v->is_object()) bad(key, "expected an object");
  return *v;
}

void Params::finish() const {
  for (auto it = j_.begin(); it != j_.end(); ++it)
    if (!used_.count(it.key())) fail(ErrorKind::Config, ctx_ + ": unknown key '" + it.key() + "'");
}

}  // namespace mimetic
