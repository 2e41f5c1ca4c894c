#pragma once

#include <set>
#include <string>
#include <vector>

#include "json.hpp"

namespace mimetic {

// Strict reader for one JSON object: typed getters with defaults, and a
// final check that rejects keys nobody asked for.  All failures are
// configuration errors.
class Params {
 public:
  Params(const nlohmann::json& j, std::string context);

  bool has(const std::string& key) const;
  double number(const std::string& key, double def);
  double number(const std::string& key);  // required
  int integer(const std::string& key, int def);
  int integer(const std::string& key);
  bool flag(const std::string& key, bool def);
  std::string text(const std::string& key, const std::string& def);
  std::vector<double> numbers(const std::string& key, const std::vector<double>& def);
  // Nested object, empty if absent.
  nlohmann::json object(const std::string& key);

  void finish() const;

 private:
  const nlohmann::json* get(const std::string& key);
  [[noreturn]] void bad(const std::string& key, const std::string& why) const;

  nlohmann::json j_;
  std::string ctx_;
  std::set<std::string> used_;
};

}  // namespace mimetic
