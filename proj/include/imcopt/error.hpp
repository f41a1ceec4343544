#pragma once

#include <stdexcept>
#include <string>

namespace imcopt {

// Error categories map 1:1 onto CLI exit codes (see README).
enum class ErrorKind {
  parse,       // malformed input file / document
  validation,  // well-formed input violating a domain invariant
  infeasible,  // optimization problem has no feasible point
  oracle,      // accuracy-oracle protocol failure
  resource,    // solver/search resource cap exceeded
  usage,       // bad command invocation
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

inline int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::parse:
    case ErrorKind::validation: return 2;
    case ErrorKind::infeasible: return 3;
    case ErrorKind::oracle: return 4;
    case ErrorKind::resource: return 5;
    case ErrorKind::usage: return 1;
  }
  return 1;
}

}  // namespace imcopt
