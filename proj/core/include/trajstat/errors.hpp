#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace trajstat {

// Exit-code mapping used by the CLI: ValidationError/ParseError -> 1,
// numerical-assumption failures -> 2, I/O problems -> 3.

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SingularSolve : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EigensolverFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Uniqueness assumption on the dominant eigenvalue violated (gap below
// threshold). Surfaced, never silently broken.
struct DegenerateDominant : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NonPositiveEigenvector : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TailMassExceeded : std::runtime_error {
  TailMassExceeded(const std::string& what, int suggested)
      : std::runtime_error(what), suggested_K_max(suggested) {}
  int suggested_K_max;
};

struct QuadratureOverflow : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NonConvexInput : std::runtime_error {
  NonConvexInput(const std::string& what, std::vector<int> idx)
      : std::runtime_error(what), offending_indices(std::move(idx)) {}
  std::vector<int> offending_indices;
};

// No further jump will ever occur from the current conditional state.
struct DarkState : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InsufficientAcceptance : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace trajstat
