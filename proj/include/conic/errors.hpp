#pragma once

#include <stdexcept>
#include <string>

namespace conic {

/// Malformed input: dimension mismatch, broken tree, unreadable file.
class StructuralError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numeric parameter outside its admissible range.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a cross-check between two independent computations fails
/// beyond tolerance. Never swallowed: it means a result cannot be trusted.
class InternalInconsistency : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Numerical tolerances shared by the engines.
struct Tolerances {
  double feasibility = 1e-9;       // absolute, on LP constraints
  double duality_gap = 1e-8;       // relative, primal vs dual objective
  double margin_threshold = 1e-7;  // strict vs boundary price systems
};

}  // namespace conic
