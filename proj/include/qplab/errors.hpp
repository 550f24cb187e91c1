#pragma once

#include <stdexcept>
#include <string>

namespace qplab {

// Base class for every failure the laboratory can signal. Subclasses match
// the failure modes named in the module contracts so callers can catch them
// individually.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// A caller violated a stated precondition (degenerate interval, K <= 0, ...).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// Evaluation requested outside the certified analyticity strip.
class DomainError : public Error {
 public:
  using Error::Error;
};

// The adaptive step controller could not meet tolerance above the minimum step.
class StepFailure : public Error {
 public:
  using Error::Error;
};

// Avalanche-Principle hypotheses failed for too many phases.
class ApHypothesisFailure : public Error {
 public:
  using Error::Error;
};

// A positivity floor (gamma) was not met by the Lyapunov estimate.
class PositivityError : public Error {
 public:
  using Error::Error;
};

// |v_a(b)| fell below the near-eigenvalue threshold; Green's function ill-defined.
class WronskianNearZero : public Error {
 public:
  using Error::Error;
};

// The norm lower bound required by the decay-window search does not hold.
class HypothesisFailure : public Error {
 public:
  using Error::Error;
};

// A sampled verification bound failed; message carries the worst sample.
class VerificationFailure : public Error {
 public:
  using Error::Error;
};

// Eigenvalue bisection bracket has no sign change.
class NoSignChange : public Error {
 public:
  using Error::Error;
};

// Doubling the contour quadrature changed coefficients beyond tolerance.
class QuadratureUnresolved : public Error {
 public:
  using Error::Error;
};

// Sampled surrogate deviation exceeded the configured budget.
class SurrogateInaccurate : public Error {
 public:
  using Error::Error;
};

// A lattice enumeration would exceed the point budget.
class BudgetExceeded : public Error {
 public:
  using Error::Error;
};

// A CSV lacked a column the plot kind declares.
class MissingColumn : public Error {
 public:
  using Error::Error;
};

// Experiment configuration failed schema validation; message names the field.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace qplab
