#pragma once

#include <stdexcept>
#include <string>

// Error taxonomy shared across the library.  The CLI maps these onto process
// exit codes: ConfigError -> 2, PreconditionError and its children -> 3,
// UnsupportedInitialData -> 4, anything else -> 5.

namespace ulap {

// Malformed or inconsistent experiment input (schema, values, geometry that
// fails validation at build time).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// A mathematical precondition does not hold for the requested computation.
class PreconditionError : public std::runtime_error {
 public:
  explicit PreconditionError(const std::string& what) : std::runtime_error(what) {}
};

// Geometric series over the group fails its convergence condition.
class DivergenceError : public PreconditionError {
 public:
  explicit DivergenceError(const std::string& what) : PreconditionError(what) {}
};

// A Moebius pole sits inside a disc that was assumed pole-free.
class PoleError : public PreconditionError {
 public:
  explicit PoleError(const std::string& what) : PreconditionError(what) {}
};

// The differential form has (or may have) a zero or pole on a disc that must
// carry a constant absolute value.
class FormVanishesError : public PreconditionError {
 public:
  explicit FormVanishesError(const std::string& what) : PreconditionError(what) {}
};

// Tree construction asked for an impossible refinement.
class DepthError : public PreconditionError {
 public:
  explicit DepthError(const std::string& what) : PreconditionError(what) {}
};

// Two points that must be distinct coincide (zero ultrametric distance).
class ZeroDistanceError : public PreconditionError {
 public:
  explicit ZeroDistanceError(const std::string& what) : PreconditionError(what) {}
};

// A tree vertex violates a structural assumption (no children, bad masses).
class DegenerateVertexError : public PreconditionError {
 public:
  explicit DegenerateVertexError(const std::string& what) : PreconditionError(what) {}
};

// Word enumeration exceeded its budget.
class BudgetError : public PreconditionError {
 public:
  explicit BudgetError(const std::string& what) : PreconditionError(what) {}
};

// An eigenvalue probe disagreed between two sample points; the partition is
// too coarse for the requested computation.
class XDependenceError : public PreconditionError {
 public:
  explicit XDependenceError(const std::string& what) : PreconditionError(what) {}
};

// A jump chain cannot leave the requested initial state.
class AbsorbingStateError : public PreconditionError {
 public:
  explicit AbsorbingStateError(const std::string& what) : PreconditionError(what) {}
};

// Negative time passed to a forward evolution.
class NegativeTimeError : public PreconditionError {
 public:
  explicit NegativeTimeError(const std::string& what) : PreconditionError(what) {}
};

// Initial data of a boundary value problem is not supported inside the region.
class UnsupportedInitialData : public std::runtime_error {
 public:
  explicit UnsupportedInitialData(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace ulap
