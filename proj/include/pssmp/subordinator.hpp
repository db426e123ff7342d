#pragma once

#include <boost/math/quadrature/exp_sinh.hpp>

#include <cmath>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "errors.hpp"
#include "numerics.hpp"
#include "rng.hpp"

namespace pssmp {

struct PointMass {
  double x0;
};
/// P(J > x) = (1 + x)^{-beta}.
struct ParetoLogTail {
  double beta;
};
struct ExponentialJump {
  double rate;
};

/// Jump-size law of a compound Poisson subordinator.
class JumpLaw {
 public:
  using Kind = std::variant<PointMass, ParetoLogTail, ExponentialJump>;

  JumpLaw(Kind k) : kind_(k) { validate(); }  // NOLINT(google-explicit-constructor)

  static JumpLaw point_mass(double x0) { return JumpLaw(PointMass{x0}); }
  static JumpLaw pareto_log_tail(double beta) { return JumpLaw(ParetoLogTail{beta}); }
  static JumpLaw exponential(double rate) { return JumpLaw(ExponentialJump{rate}); }

  const Kind& kind() const { return kind_; }
  std::string name() const;

  double survival(double x) const {
    if (x < 0) return 1.0;
    return std::visit(
        [x](const auto& k) -> double {
          using K = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<K, PointMass>) return x < k.x0 ? 1.0 : 0.0;
          else if constexpr (std::is_same_v<K, ParetoLogTail>) return std::pow(1.0 + x, -k.beta);
          else return std::exp(-k.rate * x);
        },
        kind_);
  }

  double sample(Engine& rng) const {
    return std::visit(
        [&rng](const auto& k) -> double {
          using K = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<K, PointMass>) return k.x0;
          else if constexpr (std::is_same_v<K, ParetoLogTail>)
            return std::expm1(-std::log(uniform_open(rng)) / k.beta);
          else return standard_exponential(rng) / k.rate;
        },
        kind_);
  }

  /// E(1 - exp(-lambda J)).
  double laplace_complement(double lambda) const;

  double mean() const {
    return std::visit(
        [](const auto& k) -> double {
          using K = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<K, PointMass>) return k.x0;
          else if constexpr (std::is_same_v<K, ParetoLogTail>) return num::inf;
          else return 1.0 / k.rate;
        },
        kind_);
  }

  /// Index of regular variation of the survival function at infinity (0 if lighter).
  double tail_index() const {
    if (auto* p = std::get_if<ParetoLogTail>(&kind_)) return p->beta;
    return 1.0;
  }

 private:
  void validate() const;
  Kind kind_;
};

struct Stable {
  double beta;
  double scale = 1.0;
};
struct Gamma {
  double shape;
  double rate;
};
/// phi(l) = scale * ((l + theta)^delta - theta^delta).
struct TemperedStable {
  double delta;
  double theta;
  double scale = 1.0;
};
struct CompoundPoisson {
  double rate;
  JumpLaw jumps;
};
struct DriftOnly {};

/// Subordinator given by its drift and Levy measure.
class SubordinatorSpec {
 public:
  using Kind = std::variant<Stable, Gamma, TemperedStable, CompoundPoisson, DriftOnly>;

  SubordinatorSpec(Kind k, double drift = 0.0, std::optional<double> declared_rv_index = std::nullopt)
      : kind_(std::move(k)), drift_(drift), declared_(declared_rv_index) {
    validate();
  }

  static SubordinatorSpec stable(double beta, double scale = 1.0) { return {Stable{beta, scale}}; }
  static SubordinatorSpec gamma(double shape, double rate) { return {Gamma{shape, rate}}; }
  static SubordinatorSpec tempered_stable(double delta, double theta, double scale = 1.0) {
    return {TemperedStable{delta, theta, scale}};
  }
  static SubordinatorSpec compound_poisson(double rate, JumpLaw law, double drift = 0.0) {
    return {CompoundPoisson{rate, std::move(law)}, drift};
  }
  static SubordinatorSpec drift_only(double d) { return {DriftOnly{}, d}; }

  const Kind& kind() const { return kind_; }
  double drift() const { return drift_; }
  const std::optional<double>& declared_rv_index_field() const { return declared_; }
  std::string kind_name() const;

  /// Regular-variation index of phi at 0, as claimed by the model.
  double rv_index() const;

  /// True when paths are exactly representable by finitely many jumps plus drift.
  bool finite_activity() const {
    return std::holds_alternative<CompoundPoisson>(kind_) || std::holds_alternative<DriftOnly>(kind_);
  }

 private:
  void validate() const;
  Kind kind_;
  double drift_;
  std::optional<double> declared_;
};

// ---------------------------------------------------------------------------

inline std::string JumpLaw::name() const {
  return std::visit(
      [](const auto& k) -> std::string {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, PointMass>) return "PointMass";
        else if constexpr (std::is_same_v<K, ParetoLogTail>) return "ParetoLogTail";
        else return "Exponential";
      },
      kind_);
}

inline void JumpLaw::validate() const {
  std::visit(
      [](const auto& k) {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, PointMass>) {
          if (!(k.x0 > 0) || !std::isfinite(k.x0)) throw DomainError("PointMass: x0 must be positive");
        } else if constexpr (std::is_same_v<K, ParetoLogTail>) {
          if (!(k.beta > 0 && k.beta < 1)) throw DomainError("ParetoLogTail: beta must lie in (0,1)");
        } else {
          if (!(k.rate > 0) || !std::isfinite(k.rate)) throw DomainError("Exponential: rate must be positive");
        }
      },
      kind_);
}

inline double JumpLaw::laplace_complement(double lambda) const {
  if (lambda < 0) throw DomainError("laplace_complement: negative lambda");
  if (lambda == 0) return 0.0;
  if (auto* p = std::get_if<PointMass>(&kind_)) return -std::expm1(-lambda * p->x0);
  if (auto* e = std::get_if<ExponentialJump>(&kind_)) return lambda / (lambda + e->rate);
  if (std::isinf(lambda)) return 1.0;
  // E(1 - e^{-lJ}) = int_0^inf e^{-y} P(J > y/l) dy
  double beta = std::get<ParetoLogTail>(kind_).beta;
  auto g = [&](double y) { return std::exp(-y - beta * std::log1p(y / lambda)); };
  boost::math::quadrature::exp_sinh<double> integrator;
  double err = 0, l1 = 0;
  double v = integrator.integrate(g, 0.0, num::inf, 1e-13, &err, &l1);
  if (!std::isfinite(v) || err > 1e-8 * std::max(v, 1e-300))
    throw NumericError("ParetoLogTail laplace_complement: quadrature error " + std::to_string(err) +
                       " at lambda=" + std::to_string(lambda));
  return v;
}

inline std::string SubordinatorSpec::kind_name() const {
  return std::visit(
      [](const auto& k) -> std::string {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, Stable>) return "Stable";
        else if constexpr (std::is_same_v<K, Gamma>) return "Gamma";
        else if constexpr (std::is_same_v<K, TemperedStable>) return "TemperedStable";
        else if constexpr (std::is_same_v<K, CompoundPoisson>) return "CompoundPoisson";
        else return "DriftOnly";
      },
      kind_);
}

inline void SubordinatorSpec::validate() const {
  if (!(drift_ >= 0) || !std::isfinite(drift_)) throw DomainError("drift must be a nonnegative real");
  if (declared_ && !(*declared_ >= 0 && *declared_ <= 1))
    throw DomainError("declared_rv_index must lie in [0,1]");
  auto pos = [](double v, const char* what) {
    if (!(v > 0) || !std::isfinite(v)) throw DomainError(std::string(what) + " must be positive");
  };
  std::visit(
      [&](const auto& k) {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, Stable>) {
          if (!(k.beta > 0 && k.beta < 1)) throw DomainError("Stable: beta must lie in (0,1)");
          pos(k.scale, "Stable: scale");
        } else if constexpr (std::is_same_v<K, Gamma>) {
          pos(k.shape, "Gamma: shape");
          pos(k.rate, "Gamma: rate");
        } else if constexpr (std::is_same_v<K, TemperedStable>) {
          if (!(k.delta > 0 && k.delta < 1)) throw DomainError("TemperedStable: delta must lie in (0,1)");
          if (!(k.theta >= 0) || !std::isfinite(k.theta)) throw DomainError("TemperedStable: theta must be >= 0");
          pos(k.scale, "TemperedStable: scale");
        } else if constexpr (std::is_same_v<K, CompoundPoisson>) {
          pos(k.rate, "CompoundPoisson: rate");
        } else {
          if (!(drift_ > 0)) throw DomainError("DriftOnly: drift must be positive");
        }
      },
      kind_);
}

inline double SubordinatorSpec::rv_index() const {
  if (declared_) return *declared_;
  return std::visit(
      [this](const auto& k) -> double {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, Stable>) return k.beta;
        else if constexpr (std::is_same_v<K, TemperedStable>) return k.theta > 0 ? 1.0 : k.delta;
        else if constexpr (std::is_same_v<K, CompoundPoisson>) return drift_ > 0 ? 1.0 : k.jumps.tail_index();
        else return 1.0;
      },
      kind_);
}

// ---------------------------------------------------------------------------

/// Laplace exponent phi(lambda) = d*lambda + int (1 - e^{-lambda x}) Pi(dx).
inline double phi(const SubordinatorSpec& spec, double lambda) {
  if (!(lambda >= 0)) throw DomainError("phi: lambda must be nonnegative");
  if (lambda == 0) return 0.0;
  double d = spec.drift();
  double lin = d > 0 ? d * lambda : 0.0;
  return lin + std::visit(
                   [lambda](const auto& k) -> double {
                     using K = std::decay_t<decltype(k)>;
                     if constexpr (std::is_same_v<K, Stable>) return k.scale * std::pow(lambda, k.beta);
                     else if constexpr (std::is_same_v<K, Gamma>) return k.shape * std::log1p(lambda / k.rate);
                     else if constexpr (std::is_same_v<K, TemperedStable>) {
                       if (k.theta == 0) return k.scale * std::pow(lambda, k.delta);
                       // (l+t)^d - t^d = t^d * expm1(d*log1p(l/t))
                       return k.scale * std::pow(k.theta, k.delta) *
                              std::expm1(k.delta * std::log1p(lambda / k.theta));
                     } else if constexpr (std::is_same_v<K, CompoundPoisson>)
                       return k.rate * k.jumps.laplace_complement(lambda);
                     else return 0.0;
                   },
                   spec.kind());
}

/// sup of phi over [0, inf).
inline double phi_sup(const SubordinatorSpec& spec) {
  if (spec.drift() > 0) return num::inf;
  if (auto* cp = std::get_if<CompoundPoisson>(&spec.kind())) return cp->rate;
  return num::inf;
}

/// Right-continuous inverse inf{lambda : phi(lambda) > y}.
inline double phi_inverse(const SubordinatorSpec& spec, double y) {
  if (!(y >= 0)) throw DomainError("phi_inverse: y must be nonnegative");
  if (y == 0) return 0.0;
  double sup = phi_sup(spec);
  if (!(y < sup)) throw RangeError("phi_inverse: y is not below sup phi", sup);
  if (spec.drift() == 0) {
    if (auto* s = std::get_if<Stable>(&spec.kind())) return std::pow(y / s->scale, 1.0 / s->beta);
    if (auto* g = std::get_if<Gamma>(&spec.kind())) return g->rate * std::expm1(y / g->shape);
  }
  if (std::holds_alternative<DriftOnly>(spec.kind())) return y / spec.drift();
  auto f = [&](double l) { return phi(spec, l); };
  double lo = 1.0, hi = 1.0;
  while (f(hi) <= y) {
    hi *= 2.0;
    if (hi > 1e300) throw NumericError("phi_inverse: no bracket");
  }
  while (f(lo) > y) {
    lo *= 0.5;
    if (lo < 1e-300) return 0.0;
  }
  if (lo == hi) lo = hi * 0.5;
  return num::bisect_increasing_log(f, y, lo, hi, 1e-12);
}

/// Unit positive stable variable, E exp(-l S) = exp(-l^beta), by the
/// angle/exponential transform.
inline double sample_positive_stable(double beta, Engine& rng) {
  if (beta == 1.0) return 1.0;
  double u = num::pi * uniform_open(rng);
  double e = standard_exponential(rng);
  double log_s = std::log(std::sin(beta * u)) - std::log(std::sin(u)) / beta +
                 (1.0 - beta) / beta * (std::log(std::sin((1.0 - beta) * u)) - std::log(e));
  return std::exp(log_s);
}

/// One draw of xi_{t+dt} - xi_t.
inline double sample_increment(const SubordinatorSpec& spec, double dt, Engine& rng) {
  if (!(dt > 0)) throw UsageError("sample_increment: dt must be positive");
  double jump = std::visit(
      [&](const auto& k) -> double {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, Stable>) {
          return std::pow(k.scale * dt, 1.0 / k.beta) * sample_positive_stable(k.beta, rng);
        } else if constexpr (std::is_same_v<K, Gamma>) {
          std::gamma_distribution<double> g(k.shape * dt, 1.0 / k.rate);
          return g(rng);
        } else if constexpr (std::is_same_v<K, TemperedStable>) {
          // split so that each acceptance probability exp(-c h theta^delta) stays above e^{-1}
          double mass = k.scale * dt * std::pow(k.theta, k.delta);
          int pieces = k.theta > 0 ? std::max(1, static_cast<int>(std::ceil(mass))) : 1;
          double h = dt / pieces;
          double sc = std::pow(k.scale * h, 1.0 / k.delta);
          double total = 0;
          for (int p = 0; p < pieces; ++p) {
            for (;;) {
              double x = sc * sample_positive_stable(k.delta, rng);
              if (k.theta == 0 || uniform_open(rng) <= std::exp(-k.theta * x)) {
                total += x;
                break;
              }
            }
          }
          return total;
        } else if constexpr (std::is_same_v<K, CompoundPoisson>) {
          std::poisson_distribution<long long> pois(k.rate * dt);
          long long n = pois(rng);
          double s = 0;
          for (long long i = 0; i < n; ++i) s += k.jumps.sample(rng);
          return s;
        } else {
          return 0.0;
        }
      },
      spec.kind());
  return jump + spec.drift() * dt;
}

/// m = E(xi_1) = phi'(0+).
inline double mean(const SubordinatorSpec& spec) {
  if (spec.rv_index() < 1) return num::inf;
  double d = spec.drift();
  return d + std::visit(
                 [](const auto& k) -> double {
                   using K = std::decay_t<decltype(k)>;
                   if constexpr (std::is_same_v<K, Stable>) return num::inf;
                   else if constexpr (std::is_same_v<K, Gamma>) return k.shape / k.rate;
                   else if constexpr (std::is_same_v<K, TemperedStable>)
                     return k.theta > 0 ? k.scale * k.delta * std::pow(k.theta, k.delta - 1.0) : num::inf;
                   else if constexpr (std::is_same_v<K, CompoundPoisson>) return k.rate * k.jumps.mean();
                   else return 0.0;
                 },
                 spec.kind());
}

/// Least-squares slope of log phi against log lambda.
inline double estimate_rv_index(const SubordinatorSpec& spec, const std::vector<double>& lambda_grid) {
  if (lambda_grid.size() < 4) throw UsageError("estimate_rv_index: grid needs at least 4 points");
  double sx = 0, sy = 0;
  std::size_t n = lambda_grid.size();
  std::vector<double> xs(n), ys(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(lambda_grid[i] > 0)) throw UsageError("estimate_rv_index: grid points must be positive");
    xs[i] = std::log(lambda_grid[i]);
    ys[i] = std::log(phi(spec, lambda_grid[i]));
    sx += xs[i];
    sy += ys[i];
  }
  double mx = sx / n, my = sy / n, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  return sxy / sxx;
}

/// Logarithmic grid 10^{from}, 10^{from-1}, ..., 10^{to} (from > to).
inline std::vector<double> decade_grid(int from, int to) {
  std::vector<double> g;
  for (int e = from; e >= to; --e) g.push_back(std::pow(10.0, e));
  return g;
}

/// Known cases where lambda/phi(lambda) is itself a Laplace exponent.
inline bool has_conjugate_subordinator(const SubordinatorSpec& spec) {
  return std::holds_alternative<Stable>(spec.kind()) && spec.drift() == 0;
}

}  // namespace pssmp
