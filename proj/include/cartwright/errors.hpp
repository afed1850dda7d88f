#pragma once

#include <stdexcept>
#include <string>

namespace cartwright {

// Input outside an operation's mathematical domain.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// A numerical procedure did not reach its tolerance within budget.
class AccuracyError : public std::runtime_error {
 public:
  AccuracyError(const std::string& what, double last, double previous)
      : std::runtime_error(what), last_(last), previous_(previous) {}
  explicit AccuracyError(const std::string& what)
      : AccuracyError(what, 0.0, 0.0) {}

  double last_estimate() const noexcept { return last_; }
  double previous_estimate() const noexcept { return previous_; }

 private:
  double last_;
  double previous_;
};

// A weight failed to be strictly decreasing where it must be.
class MonotonicityError : public std::runtime_error {
 public:
  MonotonicityError(const std::string& what, double at)
      : std::runtime_error(what), at_(at) {}
  double location() const noexcept { return at_; }

 private:
  double at_;
};

// A derived object (surface, patched weight, cascade member) could not be built.
class ConstructionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Monotone root search found no sign change on its interval.
class BracketError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A hard invariant was measured to fail.
class InvariantViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input data violates an operation's hypothesis; carries where.
class InputRejection : public std::runtime_error {
 public:
  InputRejection(const std::string& what, double phi, double y)
      : std::runtime_error(what), phi_(phi), y_(y) {}
  double phi() const noexcept { return phi_; }
  double y() const noexcept { return y_; }

 private:
  double phi_;
  double y_;
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace cartwright
