#pragma once

#include <stdexcept>
#include <string>

namespace fcgcg {

struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// F or K produced a non-finite value.
struct NonFiniteObjective : SolverError {
  using SolverError::SolverError;
};

// Inner coefficient solve did not reach the requested KKT residual.
struct SubproblemFailure : SolverError {
  using SolverError::SolverError;
};

// Inner iteration cap hit before reaching tolerance.
struct BudgetExceeded : SolverError {
  using SolverError::SolverError;
};

struct EigenFailure : SolverError {
  using SolverError::SolverError;
};

struct BoundaryTooClose : SolverError {
  using SolverError::SolverError;
};

struct InsufficientData : SolverError {
  using SolverError::SolverError;
};

struct ConfigInvalid : SolverError {
  using SolverError::SolverError;
};

struct IoError : SolverError {
  using SolverError::SolverError;
};

}  // namespace fcgcg
