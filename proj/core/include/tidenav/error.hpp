#pragma once

#include <stdexcept>
#include <string>

namespace tidenav {

/// Precondition or input-domain violation (bad parameters, empty sets, out-of-range indices).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A solver failed to reach its accuracy contract. The message carries the residual report.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace tidenav
