#pragma once

#include <stdexcept>
#include <string>

namespace pssmp {

/// Invalid argument or model parameter.
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

/// Query outside the simulated range. Carries the largest admissible value.
struct RangeError : std::out_of_range {
  double limit;
  RangeError(const std::string& what, double lim)
      : std::out_of_range(what), limit(lim) {}
};

/// Caller misuse: bad grid, empty sample, unsupported representation.
struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Quadrature, root finding or iteration failure.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Degeneracy { None, ZeroAlmostSurely, InfiniteAlmostSurely, DiracAtOneInfinity, DiracAtOrigin, ExponentialLaw };

inline const char* to_string(Degeneracy d) {
  switch (d) {
    case Degeneracy::None: return "none";
    case Degeneracy::ZeroAlmostSurely: return "V=0 a.s.";
    case Degeneracy::InfiniteAlmostSurely: return "V=+inf a.s.";
    case Degeneracy::DiracAtOneInfinity: return "Dirac mass at (1,inf)";
    case Degeneracy::DiracAtOrigin: return "Dirac mass at (0,0)";
    case Degeneracy::ExponentialLaw: return "Exponential(1) law";
  }
  return "unknown";
}

/// Raised when a law collapses to a point mass and has no density.
struct DegenerateLawError : std::domain_error {
  Degeneracy flag;
  DegenerateLawError(const std::string& what, Degeneracy f)
      : std::domain_error(what + " (" + to_string(f) + ")"), flag(f) {}
};

}  // namespace pssmp
