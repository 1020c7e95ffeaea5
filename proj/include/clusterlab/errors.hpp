#pragma once

#include <stdexcept>
#include <string>

namespace clusterlab {

/// Input outside the mathematical domain of an operation (bad parameters,
/// parity constraints, malformed operator strings).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Requested problem exceeds a configured size cap.
class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Vector or operator sizes do not agree.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An iterative method stopped before reaching its tolerance. Carries the
/// best estimate found so callers can decide whether it is usable.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double best_estimate)
      : std::runtime_error(what), best_estimate_(best_estimate) {}

  double best_estimate() const noexcept { return best_estimate_; }

 private:
  double best_estimate_;
};

}  // namespace clusterlab
