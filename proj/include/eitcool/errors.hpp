#pragma once

#include <stdexcept>
#include <string>

namespace eitcool {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input violates a documented precondition or type invariant.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Solver did not reach its stopping criterion.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

class StepSizeUnderflow : public ConvergenceError {
 public:
  StepSizeUnderflow(double t_reached, double step)
      : ConvergenceError("step size underflow at t = " + std::to_string(t_reached) +
                         " s (h = " + std::to_string(step) + " s)"),
        t_reached_(t_reached) {}
  double time_reached() const { return t_reached_; }

 private:
  double t_reached_;
};

}  // namespace eitcool
