#pragma once

#include <stdexcept>
#include <string>

namespace mimetic {

// Categories double as CLI exit codes.
enum class ErrorKind {
  Config = 2,
  InvalidArgument = 3,
  Domain = 4,
  Solver = 5,
  Format = 6,
  Divergence = 7,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace mimetic
