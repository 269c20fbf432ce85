#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace iqtd {

/// Raised when an argument violates a documented precondition.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The generator is too short for the dependence margin an evolution plan needs.
class CapacityError : public std::runtime_error {
 public:
  CapacityError(std::size_t needed, std::size_t available)
      : std::runtime_error("generator size " + std::to_string(available) +
                           " is too small; evolution plan needs size " +
                           std::to_string(needed)),
        needed_(needed),
        available_(available) {}

  std::size_t needed() const noexcept { return needed_; }
  std::size_t available() const noexcept { return available_; }

 private:
  std::size_t needed_;
  std::size_t available_;
};

/// A periodic point was requested at a frequency outside the admissible disk.
class InadmissiblePeriod : public InvalidInput {
 public:
  InadmissiblePeriod(double requested, double minimal)
      : InvalidInput("period " + std::to_string(requested) +
                     " puts i*omega outside the admissible disk; minimal admissible period is " +
                     std::to_string(minimal)),
        requested_(requested),
        minimal_(minimal) {}

  double requested_period() const noexcept { return requested_; }
  double minimal_period() const noexcept { return minimal_; }

 private:
  double requested_;
  double minimal_;
};

}  // namespace iqtd
