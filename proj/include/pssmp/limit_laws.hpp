#pragma once

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "numerics.hpp"
#include "rng.hpp"
#include "subordinator.hpp"

namespace pssmp {

/// Law of V with log(X(T)/T^{1/alpha})/log T -> V.
struct LimitLawVSpec {
  double alpha;
  double beta;

  LimitLawVSpec(double a, double b) : alpha(a), beta(b) {
    if (!(a > 0)) throw DomainError("LimitLawV: alpha must be positive");
    if (!(b >= 0 && b <= 1)) throw DomainError("LimitLawV: beta must lie in [0,1]");
  }

  Degeneracy degeneracy() const {
    if (beta == 1) return Degeneracy::ZeroAlmostSurely;
    if (beta == 0) return Degeneracy::InfiniteAlmostSurely;
    return Degeneracy::None;
  }
};

namespace detail {
inline void require_open_beta(double alpha, double beta) {
  LimitLawVSpec s(alpha, beta);
  if (s.degeneracy() != Degeneracy::None) throw DegenerateLawError("V has no density", s.degeneracy());
}
}  // namespace detail

inline double v_density(double alpha, double beta, double v) {
  detail::require_open_beta(alpha, beta);
  if (!(v > 0)) return 0.0;
  return std::pow(alpha, 1.0 - beta) * std::pow(2.0, beta) * std::sin(beta * num::pi) / num::pi *
         std::pow(v, -beta) / (2.0 + alpha * v);
}

inline double v_cdf(double alpha, double beta, double v) {
  detail::require_open_beta(alpha, beta);
  if (!(v > 0)) return 0.0;
  if (std::isinf(v)) return 1.0;
  double den = 2.0 + alpha * v;
  return num::ibeta(1.0 - beta, beta, alpha * v / den, 2.0 / den);
}

/// CDF of U/(alpha(1-U)), the limit law of (overshoot at level y)/(alpha y).
inline double overshoot_v_cdf(double alpha, double beta, double v) {
  detail::require_open_beta(alpha, beta);
  if (!(v > 0)) return 0.0;
  if (std::isinf(v)) return 1.0;
  double den = 1.0 + alpha * v;
  return num::ibeta(1.0 - beta, beta, alpha * v / den, 1.0 / den);
}

/// Beta(1-beta, beta), the generalized arcsine law.
inline double sample_generalized_arcsine(double beta, Engine& rng) {
  std::gamma_distribution<double> g1(1.0 - beta, 1.0), g2(beta, 1.0);
  for (;;) {
    double a = g1(rng), b = g2(rng);
    if (a + b > 0) return a / (a + b);
  }
}

inline double arcsine_density(double beta, double u) {
  if (!(u > 0 && u < 1)) return 0.0;
  return std::sin(beta * num::pi) / num::pi * std::pow(u, -beta) * std::pow(1.0 - u, beta - 1.0);
}

inline double arcsine_cdf(double beta, double u) {
  if (u <= 0) return 0.0;
  if (u >= 1) return 1.0;
  return num::ibeta(1.0 - beta, beta, u, 1.0 - u);
}

inline double v_from_u(double alpha, double u) { return 2.0 * u / (alpha * (1.0 - u)); }

inline double v_sampler(double alpha, double beta, Engine& rng) {
  detail::require_open_beta(alpha, beta);
  for (;;) {
    double u = sample_generalized_arcsine(beta, rng);
    if (u < 1.0) return v_from_u(alpha, u);
  }
}

/// n! / Gamma(1 + n beta).
inline double ml_moment(double beta, int n) {
  if (!(beta >= 0 && beta <= 1)) throw DomainError("ml_moment: beta must lie in [0,1]");
  if (n < 0) throw DomainError("ml_moment: n must be nonnegative");
  return std::exp(std::lgamma(n + 1.0) - std::lgamma(1.0 + n * beta));
}

/// S^{-beta} for S unit positive stable of index beta.
inline double ml_sampler(double beta, Engine& rng) {
  if (beta == 0) throw DegenerateLawError("Mittag-Leffler(0) is the Exponential(1) law", Degeneracy::ExponentialLaw);
  if (!(beta > 0 && beta <= 1)) throw DomainError("ml_sampler: beta must lie in (0,1]");
  if (beta == 1) return 1.0;
  for (;;) {
    double x = std::pow(sample_positive_stable(beta, rng), -beta);
    if (x > 0 && std::isfinite(x)) return x;
  }
}

inline void require_dynkin_lamperti(double beta) {
  if (beta == 0) throw DegenerateLawError("limiting age/overshoot law", Degeneracy::DiracAtOneInfinity);
  if (beta == 1) throw DegenerateLawError("limiting age/overshoot law", Degeneracy::DiracAtOrigin);
  if (!(beta > 0 && beta < 1)) throw DomainError("Dynkin-Lamperti: beta must lie in [0,1]");
}

/// Joint density of the limiting scaled (age, overshoot).
inline double dynkin_lamperti_density(double beta, double u, double w) {
  require_dynkin_lamperti(beta);
  if (!(u > 0 && u < 1 && w > 0)) return 0.0;
  return beta * std::sin(beta * num::pi) / num::pi * std::pow(1.0 - u, beta - 1.0) * std::pow(u + w, -1.0 - beta);
}

/// P(U in [u0,u1], W in [w0,w1]) under the Dynkin-Lamperti law; w1 may be +inf.
inline double dynkin_lamperti_cell_mass(double beta, double u0, double u1, double w0, double w1) {
  require_dynkin_lamperti(beta);
  // integrating out w leaves (sin(beta pi)/pi)(1-u)^{beta-1}[(u+w0)^{-beta} - (u+w1)^{-beta}]
  auto g = [&](double u) {
    double hi = std::pow(u + w0, -beta);
    double lo = std::isinf(w1) ? 0.0 : std::pow(u + w1, -beta);
    return std::sin(beta * num::pi) / num::pi * std::pow(1.0 - u, beta - 1.0) * (hi - lo);
  };
  boost::math::quadrature::tanh_sinh<double> integrator;
  return integrator.integrate(g, u0, u1, 1e-10);
}

/// (U, O) with density p_beta: U ~ Beta(1-beta, beta), then P(O > w | U = u) = (u/(u+w))^beta.
inline std::pair<double, double> dynkin_lamperti_sampler(double beta, Engine& rng) {
  require_dynkin_lamperti(beta);
  double u = sample_generalized_arcsine(beta, rng);
  double o = u * std::expm1(-std::log(uniform_open(rng)) / beta);
  return {u, o};
}

/// g(t) = LL(t) / phi^{-1}(LL(t)/t), LL = log log.
inline double growth_g(const SubordinatorSpec& spec, double t) {
  if (!(t > std::exp(std::exp(1.0)))) throw DomainError("growth_g: t must exceed e^e");
  double ll = std::log(std::log(t));
  return ll / phi_inverse(spec, ll / t);
}

inline double lil_constant(double beta) {
  if (!(beta > 0 && beta < 1)) throw DomainError("lil_constant: beta must lie in (0,1)");
  return beta * std::pow(1.0 - beta, (1.0 - beta) / beta);
}

enum class Verdict { Converges, Diverges, Inconclusive };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Converges: return "Converges";
    case Verdict::Diverges: return "Diverges";
    case Verdict::Inconclusive: return "Inconclusive";
  }
  return "?";
}

/// f(t) = t^gamma * (log t)^log_power.
struct PowerLogFunction {
  double gamma;
  double log_power = 0;
  double operator()(double t) const { return std::pow(t, gamma) * std::pow(std::log(t), log_power); }
};

struct IntegralTestResult {
  Verdict verdict;
  std::vector<double> times;      ///< doubling endpoints T0 2^k
  std::vector<double> pieces;     ///< int over [T_k, 2T_k]
  std::vector<double> partial;    ///< int over [T0, T_{k+1}]
  std::vector<double> exponents;  ///< fitted integrand exponents between consecutive pieces
  double min_increase_ratio;      ///< min over the schedule of f(t)/f(2t)
};

/// Classifies int^inf phi(1/f(g(t))) dt over the schedule T0 2^k, k < doublings.
inline IntegralTestResult integral_test(const SubordinatorSpec& spec, const std::function<double(double)>& f,
                                        double t0 = 16.0, int doublings = 60, int window = 5,
                                        double lower = -1.05, double upper = -0.95) {
  if (!(t0 > std::exp(std::exp(1.0)))) throw UsageError("integral_test: T0 must exceed e^e");
  if (doublings < window + 2) throw UsageError("integral_test: schedule too short");
  IntegralTestResult r;
  r.min_increase_ratio = num::inf;
  double prev_f = -num::inf;
  for (int k = 0; k <= doublings; ++k) {
    double t = std::ldexp(t0, k);
    double g = growth_g(spec, t);
    double fg = f(g);
    if (!(fg > prev_f)) throw UsageError("integral_test: f o g is not increasing on the schedule");
    prev_f = fg;
    double ft = f(t), f2t = f(2 * t);
    if (!(f2t >= ft)) throw UsageError("integral_test: f is not increasing on the schedule");
    r.min_increase_ratio = std::min(r.min_increase_ratio, ft / f2t);
    r.times.push_back(t);
  }
  if (!(r.min_increase_ratio > 0)) throw UsageError("integral_test: f lacks positive increase");
  auto integrand = [&](double u) {
    double t = std::exp(u);
    return t * phi(spec, 1.0 / f(growth_g(spec, t)));
  };
  double acc = 0;
  for (int k = 0; k < doublings; ++k) {
    double a = std::log(r.times[k]), b = std::log(r.times[k + 1]);
    double piece = boost::math::quadrature::gauss<double, 20>::integrate(integrand, a, b);
    r.pieces.push_back(piece);
    acc += piece;
    r.partial.push_back(acc);
  }
  for (int k = 0; k + 1 < doublings; ++k) r.exponents.push_back(std::log2(r.pieces[k + 1] / r.pieces[k]) - 1.0);
  bool all_below = true, all_above = true;
  for (std::size_t i = r.exponents.size() - window; i < r.exponents.size(); ++i) {
    all_below = all_below && r.exponents[i] < lower;
    all_above = all_above && r.exponents[i] > upper;
  }
  r.verdict = all_below ? Verdict::Converges : all_above ? Verdict::Diverges : Verdict::Inconclusive;
  return r;
}

}  // namespace pssmp
