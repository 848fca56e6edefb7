#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cocycle {

enum class ErrorKind {
  validation,      // malformed normal form, non-orthogonal matrix, schema violation
  domain,          // a required element lies outside the sampled ball
  resource,        // element budget exceeded
  parameter,       // out-of-range numeric argument
  integrability,   // divergent Levy density
  construction,    // a constructive induction stalled
  invalid_input,   // precondition verdict failed (e.g. kernel not CND)
  not_amenable,    // Folner machinery requested on a free group
  not_positive_definite,
  net,             // smoothing net does not cover
  inconclusive,    // budget exhausted before stabilisation
  precondition,
};

std::string_view to_string(ErrorKind kind);

/// Every library failure is reported through this type; the kind drives the
/// CLI exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace cocycle
