#pragma once

#include <stdexcept>
#include <string>

namespace lieddp {

/// Principal matrix logarithm is ambiguous: the rotation angle is within
/// tolerance of pi, where both branches are valid. Callers that cannot
/// perturb should use the clamped logarithm instead.
class BranchAmbiguityError : public std::domain_error {
 public:
  explicit BranchAmbiguityError(const std::string& what)
      : std::domain_error(what) {}
};

/// Euler-angle extraction requested too close to the gimbal-lock
/// singularity (|pitch| near 90 degrees).
class GimbalLockError : public std::domain_error {
 public:
  explicit GimbalLockError(const std::string& what)
      : std::domain_error(what) {}
};

/// A rollout produced a non-finite or unbounded state. Carries the step
/// index at which integration was aborted.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, int step)
      : std::runtime_error(what), step_(step) {}

  int step() const { return step_; }

 private:
  int step_;
};

}  // namespace lieddp
