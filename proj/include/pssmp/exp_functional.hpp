#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "errors.hpp"
#include "numerics.hpp"
#include "rng.hpp"
#include "subordinator.hpp"

namespace pssmp {

/// value = int_0^H e^{-alpha xi} + e^{-alpha xi_H} E(I), so E(value) = E(I) exactly;
/// tail_bound = e^{-alpha xi_H} / phi(alpha) is the expected residual.
struct ExpFunctionalSample {
  double value;
  double truncation_horizon;
  double tail_bound;
};

namespace detail {
/// int_0^len exp(-alpha (a + d u)) du.
inline double decaying_segment(double a, double d, double len, double alpha) {
  double z = alpha * d * len;
  double base = std::exp(-alpha * a);
  if (z < 1e-10) return base * len * (1.0 - 0.5 * z);
  return base * (-std::expm1(-z)) / (alpha * d);
}
}  // namespace detail

/// Default grid step for infinite-activity kinds: keeps phi(alpha) * h at 0.05.
inline double default_expfun_step(const SubordinatorSpec& spec, double alpha) { return 0.05 / phi(spec, alpha); }

/// One draw of I = int_0^inf exp(-alpha xi_s) ds. step <= 0 selects the default. Grid cells start at
/// step * first_cell and double up to step, so small values of I are not cut off by the grid.
inline ExpFunctionalSample sample_I(const SubordinatorSpec& spec, double alpha, double eps, Engine& rng,
                                    double step = 0, double first_cell = 1e-6) {
  if (!(alpha > 0)) throw DomainError("sample_I: alpha must be positive");
  if (!(eps > 0)) throw UsageError("sample_I: eps must be positive");
  double phi_a = phi(spec, alpha);
  if (!(phi_a > 0)) throw DomainError("sample_I: phi(alpha) must be positive");
  const double mean_i = 1.0 / phi_a;
  const double d = spec.drift();
  const std::size_t block = 32;
  const std::size_t max_blocks = 1000000;
  double acc = 0, xi = 0, t = 0;

  auto done = [&] { return std::exp(-alpha * xi) * mean_i <= eps; };

  if (spec.finite_activity()) {
    const auto* cp = std::get_if<CompoundPoisson>(&spec.kind());
    for (std::size_t b = 0; b < max_blocks; ++b) {
      for (std::size_t i = 0; i < block; ++i) {
        double len = cp ? standard_exponential(rng) / cp->rate : 1.0;
        acc += detail::decaying_segment(xi, d, len, alpha);
        xi += d * len;
        t += len;
        if (cp) xi += cp->jumps.sample(rng);
      }
      if (done()) {
        double tail = std::exp(-alpha * xi) * mean_i;
        return {acc + tail, t, tail};
      }
    }
  } else {
    double h_max = step > 0 ? step : default_expfun_step(spec, alpha);
    double h = std::min(1.0, std::max(first_cell, 0.0)) * h_max;
    if (!(h > 0)) h = h_max;
    for (std::size_t b = 0; b < max_blocks; ++b) {
      for (std::size_t i = 0; i < block; ++i, h = std::min(2.0 * h, h_max)) {
        double next = xi + sample_increment(spec, h, rng);
        // drift runs through the cell, the rest of the increment jumps at a uniform time inside it
        double w = uniform_open(rng) * h;
        double mid = std::max(next - d * (h - w), xi + d * w);
        acc += detail::decaying_segment(xi, d, w, alpha) + detail::decaying_segment(mid, d, h - w, alpha);
        xi = next;
        t += h;
      }
      if (done()) {
        double tail = std::exp(-alpha * xi) * mean_i;
        return {acc + tail, t, tail};
      }
    }
  }
  throw NumericError("sample_I: tail bound not reached within 1e6 blocks");
}

/// E(R^n) = prod_{k=1}^n phi(alpha k).
inline double r_phi_moment(const SubordinatorSpec& spec, double alpha, int n) {
  if (n < 0) throw DomainError("r_phi_moment: n must be nonnegative");
  double p = 1.0;
  for (int k = 1; k <= n; ++k) p *= phi(spec, alpha * k);
  return p;
}

/// E(I^n) = n! / prod_{k=1}^n phi(alpha k).
inline double i_moment(const SubordinatorSpec& spec, double alpha, int n) {
  if (n < 1) throw DomainError("i_moment: n must be at least 1");
  double p = r_phi_moment(spec, alpha, n);
  if (!(p > 0)) throw DegenerateLawError("i_moment: phi(alpha k) vanishes", Degeneracy::InfiniteAlmostSurely);
  return std::tgamma(n + 1.0) / p;
}

struct Estimate {
  double value;
  double stderr_;
};

/// mu(f) = E(f((1/I)^{1/alpha}) / I) / (alpha m).
inline Estimate mu_functional(const SubordinatorSpec& spec, double alpha, const std::function<double(double)>& f,
                              std::size_t n, Engine& rng, double eps = 1e-10) {
  double m = mean(spec);
  if (!std::isfinite(m)) throw DomainError("mu_functional: spec has infinite mean");
  if (n < 2) throw UsageError("mu_functional: need at least 2 samples");
  double s = 0, s2 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double I = sample_I(spec, alpha, eps, rng).value;
    double y = f(std::pow(1.0 / I, 1.0 / alpha)) / I / (alpha * m);
    s += y;
    s2 += y * y;
  }
  double mu = s / n;
  double var = std::max(0.0, (s2 / n - mu * mu) * n / (n - 1.0));
  return {mu, std::sqrt(var / n)};
}

enum class TailTarget { R_phi, I_phi };

struct LeftTailAsymptotic {
  double harmonic_estimate;  ///< asymptotic of E(1{Z > s} / Z)
  double tail_bound_form;    ///< the function P(Z < s) is little-o of
};

/// Left-tail asymptotics at s = e^{-log_inv_s}.
inline LeftTailAsymptotic left_tail_asymptotic_log(const SubordinatorSpec& spec, double alpha, double log_inv_s,
                                                   TailTarget target) {
  if (!(log_inv_s > std::exp(1.0))) throw DomainError("left_tail_asymptotic: s must lie in (0, e^{-e})");
  double beta = spec.rv_index();
  double ph = phi(spec, 1.0 / log_inv_s);
  double log_s = -log_inv_s;
  if (target == TailTarget::R_phi) {
    double h = 1.0 / (std::pow(alpha, beta) * std::tgamma(1.0 + beta) * ph);
    return {h, std::exp(log_s + std::log(h))};
  }
  if (!has_conjugate_subordinator(spec))
    throw UsageError("left_tail_asymptotic: I target needs lambda/phi(lambda) to be a Laplace exponent");
  double h = std::pow(alpha, beta) * log_inv_s * ph / std::tgamma(2.0 - beta);
  return {h, std::exp(log_s + std::log(h))};
}

inline LeftTailAsymptotic left_tail_asymptotic(const SubordinatorSpec& spec, double alpha, double s, TailTarget target) {
  if (!(s > 0)) throw DomainError("left_tail_asymptotic: s must be positive");
  return left_tail_asymptotic_log(spec, alpha, -std::log(s), target);
}

}  // namespace pssmp
