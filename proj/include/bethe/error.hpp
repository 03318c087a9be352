#pragma once

#include <stdexcept>
#include <string>

namespace bethe {

enum class ErrorKind {
  invalid_argument,
  pole,              // coincident spectral parameters or denominator zero
  dimension,         // Fock space exceeds the configured bound
  sector,            // truncation too small for the requested sector
  convergence,       // Newton did not reach tolerance
  singular,          // singular Jacobian / degenerate configuration
  limit,             // a limit at u = infinity does not exist
  validation,        // a constructed object failed its defining check
  config,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace bethe
