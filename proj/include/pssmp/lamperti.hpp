#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"
#include "numerics.hpp"
#include "path.hpp"
#include "subordinator.hpp"

namespace pssmp {

namespace detail {

inline double softplus(double z) { return z > 30 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

/// u in [0, len] with int_0^u exp(c*b*v) dv = exp(log_r).
inline double segment_inverse(double b, double c, double log_r) {
  double cb = c * b;
  if (cb == 0) return std::exp(log_r);
  double z = std::log(cb) + log_r;
  if (z < -30) return std::exp(log_r) * (1.0 - 0.5 * std::exp(z));
  return softplus(z) / cb;
}

/// log1p(expm1(q) * r) / expm1(q) for q >= 0, r in [0,1].
inline double log1p_ratio(double q, double r) {
  if (r <= 0) return 0.0;
  if (q < 1e-8) return r * (1.0 - 0.5 * q * r);
  double lq = num::log_expm1(q);
  return std::exp(std::log(softplus(lq + std::log(r))) - lq);
}

}  // namespace detail

/// Piece of the Lamperti image between two jumps of X (in logs).
struct XSegment {
  double log_t_start;
  double log_t_end;
  double log_x_start;
  double log_x_end;
};

/// Sampled trajectory t -> X(t), piecewise with X^alpha linear in t.
struct XTrajectory {
  double alpha = 1;
  double x0 = 1;
  bool from_grid = false;
  std::vector<XSegment> segments;
};

struct LampertiSample {
  double t;
  double x;
  double tau;
  double log_c;
};

/// X(t) = x0 * exp(xi_{tau(t / x0^alpha)}), tau the inverse of C_s = int_0^s exp(alpha xi_u) du.
class PssmpPath {
 public:
  PssmpPath(SubordinatorPath base, double alpha, double x0 = 1.0)
      : base_(std::move(base)), alpha_(alpha), x0_(x0), log_x0_(std::log(x0)) {
    if (!(alpha > 0)) throw DomainError("PssmpPath: alpha must be positive");
    if (!(x0 > 0)) throw DomainError("PssmpPath: x0 must be positive");
    const auto& seg = base_.segments();
    log_c_start_.resize(seg.size());
    double acc = -num::inf;
    for (std::size_t i = 0; i < seg.size(); ++i) {
      log_c_start_[i] = acc;
      acc = num::log_add_exp(acc, num::log_segment_integral(seg[i].level, seg[i].slope, seg[i].length, alpha_));
    }
    log_c_end_ = acc;
  }

  double alpha() const { return alpha_; }
  double x0() const { return x0_; }
  const SubordinatorPath& base() const { return base_; }

  /// log C at the base horizon.
  double log_clock_horizon() const { return log_c_end_; }

  double log_clock(double s) const {
    std::size_t k = base_.segment_index(s);
    const Segment& g = base_.segments()[k];
    return num::log_add_exp(log_c_start_[k], num::log_segment_integral(g.level, g.slope, s - g.start, alpha_));
  }

  double clock(double s) const { return std::exp(log_clock(s)); }

  /// tau(e^{log_t}) in base time.
  double tau_log(double log_t) const {
    if (log_t == -num::inf) return 0.0;
    if (log_t > log_c_end_)
      throw RangeError("inverse clock: t exceeds C at the horizon", std::exp(log_c_end_));
    auto it = std::upper_bound(log_c_start_.begin(), log_c_start_.end(), log_t);
    std::size_t k = static_cast<std::size_t>(it - log_c_start_.begin()) - 1;
    const Segment& g = base_.segments()[k];
    double log_r = num::log_sub_exp(log_t, log_c_start_[k]) - alpha_ * g.level;
    double u = detail::segment_inverse(g.slope, alpha_, log_r);
    return g.start + std::clamp(u, 0.0, g.length);
  }

  double tau(double t) const {
    if (t < 0) throw DomainError("inverse clock: negative time");
    return tau_log(std::log(t));
  }

  /// xi_{tau(e^{log_t})}.
  double xi_at_log_clock(double log_t) const { return base_.value_at(tau_log(log_t)); }

  /// log X(t) for t = e^{log_t} in process time.
  double log_x_at_log_time(double log_t) const {
    return log_x0_ + xi_at_log_clock(log_t - alpha_ * log_x0_);
  }

  double log_x(double t) const {
    if (t < 0) throw DomainError("X: negative time");
    if (t == 0) return log_x0_;
    return log_x_at_log_time(std::log(t));
  }

  double x(double t) const { return std::exp(log_x(t)); }

  /// int_0^t X_s^{-alpha} ds, by the identity with tau(t / x0^alpha).
  double clock_integral(double t) const {
    if (t == 0) return 0.0;
    return tau_log(std::log(t) - alpha_ * log_x0_);
  }

  XTrajectory trajectory() const {
    XTrajectory tr;
    tr.alpha = alpha_;
    tr.x0 = x0_;
    tr.from_grid = !base_.is_jump_drift();
    const auto& seg = base_.segments();
    double shift = alpha_ * log_x0_;
    for (std::size_t i = 0; i < seg.size(); ++i) {
      if (seg[i].length <= 0) continue;
      double lt1 = i + 1 < seg.size() ? log_c_start_[i + 1] : log_c_end_;
      tr.segments.push_back({log_c_start_[i] + shift, lt1 + shift, log_x0_ + seg[i].level, log_x0_ + seg[i].end_value()});
    }
    return tr;
  }

 private:
  SubordinatorPath base_;
  double alpha_;
  double x0_;
  double log_x0_;
  std::vector<double> log_c_start_;
  double log_c_end_;
};

inline double clock_C(const SubordinatorPath& path, double alpha, double s) {
  return PssmpPath(path, alpha).clock(s);
}

inline double inverse_clock_tau(const SubordinatorPath& path, double alpha, double t) {
  return PssmpPath(path, alpha).tau(t);
}

inline std::vector<LampertiSample> lamperti_forward(const PssmpPath& p, const std::vector<double>& t_query) {
  std::vector<LampertiSample> out;
  out.reserve(t_query.size());
  double shift = p.alpha() * std::log(p.x0());
  for (double t : t_query) {
    if (t < 0) throw DomainError("lamperti_forward: negative time");
    double lc = t > 0 ? std::log(t) - shift : -num::inf;
    double tau = p.tau_log(lc);
    out.push_back({t, p.x0() * std::exp(p.base().value_at(tau)), tau, lc});
  }
  return out;
}

inline std::vector<LampertiSample> lamperti_forward(const SubordinatorPath& path, double alpha, double x0,
                                                    const std::vector<double>& t_query) {
  return lamperti_forward(PssmpPath(path, alpha, x0), t_query);
}

inline std::string lamperti_csv(const std::vector<LampertiSample>& rows) {
  std::ostringstream os;
  os.precision(17);
  os << "t,X,tau,logC\n";
  for (const auto& r : rows) os << r.t << ',' << r.x << ',' << r.tau << ',' << r.log_c << '\n';
  return os.str();
}

/// Mass int X^{-alpha} dt over one trajectory segment.
inline double x_segment_clock(const XSegment& s, double alpha) {
  if (!(s.log_t_end > s.log_t_start)) return 0.0;
  double q = alpha * (s.log_x_end - s.log_x_start);
  double base = std::exp(num::log_sub_exp(s.log_t_end, s.log_t_start) - alpha * s.log_x_start);
  return base * std::exp(-num::log_expm1_ratio(q));
}

/// Recovers xi from X by xi_s = log(X(gamma_s)/x0), gamma the inverse of int X^{-alpha}.
inline SubordinatorPath lamperti_inverse(const XTrajectory& tr) {
  if (tr.from_grid) throw UsageError("lamperti_inverse: grid-based trajectories are not supported");
  if (tr.segments.empty()) throw UsageError("lamperti_inverse: empty trajectory");
  std::vector<double> times, sizes;
  double s = 0, weighted_slope = 0, total_len = 0;
  for (std::size_t i = 0; i < tr.segments.size(); ++i) {
    const XSegment& g = tr.segments[i];
    if (i > 0) {
      double jump = g.log_x_start - tr.segments[i - 1].log_x_end;
      if (jump > 0) {
        times.push_back(s);
        sizes.push_back(jump);
      }
    }
    double len = x_segment_clock(g, tr.alpha);
    if (len > 0) {
      weighted_slope += (g.log_x_end - g.log_x_start);
      total_len += len;
    }
    s += len;
  }
  double drift = total_len > 0 ? weighted_slope / total_len : 0.0;
  if (std::abs(drift) < 1e-300) drift = 0.0;
  return SubordinatorPath::jump_drift(std::max(drift, 0.0), std::move(times), std::move(sizes), s);
}

/// int_0^t X_s^{-alpha} ds summed over trajectory segments.
inline double clock_integral_direct(const XTrajectory& tr, double t) {
  if (t <= 0) return 0.0;
  double lt = std::log(t);
  double acc = 0;
  for (const auto& g : tr.segments) {
    if (lt >= g.log_t_end) {
      acc += x_segment_clock(g, tr.alpha);
      continue;
    }
    if (lt > g.log_t_start) {
      double q = tr.alpha * (g.log_x_end - g.log_x_start);
      double full = std::exp(num::log_sub_exp(g.log_t_end, g.log_t_start));
      double part = g.log_t_start == -num::inf ? t : std::exp(num::log_sub_exp(lt, g.log_t_start));
      double r = std::min(1.0, part / full);
      acc += full * std::exp(-tr.alpha * g.log_x_start) * detail::log1p_ratio(q, r);
    }
    return acc;
  }
  if (!tr.segments.empty() && lt > tr.segments.back().log_t_end)
    throw RangeError("clock_integral: t beyond trajectory", std::exp(tr.segments.back().log_t_end));
  return acc;
}

/// (1/log t) int_{t_start}^t f(s^{-1/alpha} X(s)) ds/s, trapezoid in log s with 400 nodes per decade.
inline double ergodic_average(const PssmpPath& p, const std::function<double(double)>& f, double t,
                              double t_start = 1.0) {
  if (!(t > t_start) || !(t_start > 0)) throw UsageError("ergodic_average: need 0 < t_start < t");
  double a = std::log(t_start), b = std::log(t);
  auto n = static_cast<std::size_t>(std::ceil(400.0 * (b - a) / std::log(10.0)));
  n = std::max<std::size_t>(n, 1);
  double h = (b - a) / static_cast<double>(n);
  double sum = 0;
  for (std::size_t i = 0; i <= n; ++i) {
    double u = a + h * static_cast<double>(i);
    double y = std::exp(p.log_x_at_log_time(u) - u / p.alpha());
    double w = (i == 0 || i == n) ? 0.5 : 1.0;
    sum += w * f(y);
  }
  return sum * h / b;
}

/// Simulates a base path whose clock reaches at least e^{log_target}, doubling the horizon.
inline SubordinatorPath simulate_until_clock(const SubordinatorSpec& spec, double alpha, double log_target,
                                             double step, Engine& rng, double initial_horizon = 1.0) {
  PathSimulator sim(spec, step, rng);
  double h = std::min(initial_horizon, std::exp(log_target));
  if (!spec.finite_activity()) h = std::max(h, step);
  for (int it = 0; it < 200; ++it) {
    sim.extend_to(h);
    SubordinatorPath path = sim.path();
    PssmpPath p(path, alpha);
    if (p.log_clock_horizon() >= log_target) return path;
    h *= 2.0;
  }
  throw NumericError("simulate_until_clock: clock target not reached");
}

/// n draws of phi^{-1}(1/t) * log X(t) with X(0) = 1.
inline std::vector<double> short_time_samples(const SubordinatorSpec& spec, double alpha, double t_small,
                                              std::size_t n, Engine& rng) {
  double beta = spec.rv_index();
  if (!(beta > 0 && beta < 1)) throw UsageError("short_time_samples: spec must have regular-variation index in (0,1)");
  if (!(t_small > 0 && t_small <= 1e-3)) throw UsageError("short_time_samples: t_small must lie in (0, 1e-3]");
  double h_t = phi_inverse(spec, 1.0 / t_small);
  double step = t_small / 1000.0;
  std::vector<double> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    // C(t) >= t, but only barely when xi is tiny; the margin keeps tau(t) inside the horizon
    SubordinatorPath path = simulate_path(spec, 2.0 * t_small, step, rng);
    PssmpPath p(std::move(path), alpha);
    out.push_back(h_t * p.log_x(t_small));
  }
  return out;
}

}  // namespace pssmp
