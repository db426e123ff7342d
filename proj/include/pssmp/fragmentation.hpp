#pragma once

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <queue>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "errors.hpp"
#include "exp_functional.hpp"
#include "mc_stats.hpp"
#include "numerics.hpp"
#include "rng.hpp"
#include "subordinator.hpp"

namespace pssmp {

/// log U and log(1 - U) of one split, kept separately so that neither child underflows.
struct SplitDraw {
  double log_u;
  double log_1mu;
};

struct DeterministicSplit {
  double u;
};
struct UniformSplit {};
/// -log U distributed as the given jump law.
struct LogTailSplit {
  JumpLaw neg_log_u;
};
struct CustomSplit {
  std::function<double(Engine&)> sampler;
};

/// Law of the left fraction U of a binary split x -> (Ux, (1-U)x).
class BinarySplitLaw {
 public:
  using Kind = std::variant<DeterministicSplit, UniformSplit, LogTailSplit, CustomSplit>;

  BinarySplitLaw(Kind k) : kind_(std::move(k)) {  // NOLINT(google-explicit-constructor)
    if (auto* d = std::get_if<DeterministicSplit>(&kind_))
      if (!(d->u > 0 && d->u < 1)) throw DomainError("DeterministicSplit: u must lie in (0,1)");
  }

  static BinarySplitLaw half() { return BinarySplitLaw(DeterministicSplit{0.5}); }
  static BinarySplitLaw uniform() { return BinarySplitLaw(UniformSplit{}); }
  static BinarySplitLaw log_tail(JumpLaw j) { return BinarySplitLaw(LogTailSplit{std::move(j)}); }

  const Kind& kind() const { return kind_; }

  bool symmetric() const {
    if (auto* d = std::get_if<DeterministicSplit>(&kind_)) return d->u == 0.5;
    return std::holds_alternative<UniformSplit>(kind_);
  }

  SplitDraw sample(Engine& rng) const {
    if (auto* d = std::get_if<DeterministicSplit>(&kind_)) return {std::log(d->u), std::log1p(-d->u)};
    if (std::holds_alternative<UniformSplit>(kind_)) {
      double u = uniform_open(rng);
      return {std::log(u), std::log1p(-u)};
    }
    if (auto* l = std::get_if<LogTailSplit>(&kind_)) {
      double j = l->neg_log_u.sample(rng);
      return {-j, std::log(-std::expm1(-j))};
    }
    for (;;) {
      double u = std::get<CustomSplit>(kind_).sampler(rng);
      if (u > 0 && u < 1) return {std::log(u), std::log1p(-u)};
    }
  }

  /// P(-log U > x).
  double neg_log_survival(double x) const {
    if (auto* d = std::get_if<DeterministicSplit>(&kind_)) return -std::log(d->u) > x ? 1.0 : 0.0;
    if (std::holds_alternative<UniformSplit>(kind_)) return x < 0 ? 1.0 : std::exp(-x);
    if (auto* l = std::get_if<LogTailSplit>(&kind_)) return l->neg_log_u.survival(x);
    throw UsageError("neg_log_survival: not available for a custom split law");
  }

  /// Law of -log U as a jump law, when it has one.
  JumpLaw neg_log_jump_law() const {
    if (auto* d = std::get_if<DeterministicSplit>(&kind_)) return JumpLaw::point_mass(-std::log(d->u));
    if (std::holds_alternative<UniformSplit>(kind_)) return JumpLaw::exponential(1.0);
    if (auto* l = std::get_if<LogTailSplit>(&kind_)) return l->neg_log_u;
    throw UsageError("neg_log_jump_law: not available for a custom split law");
  }

 private:
  Kind kind_;
};

struct Snapshot {
  double time;
  std::vector<double> log_sizes;
  double total_mass;
  std::size_t frozen;

  std::vector<double> sizes() const {
    std::vector<double> s(log_sizes.size());
    for (std::size_t i = 0; i < s.size(); ++i) s[i] = std::exp(log_sizes[i]);
    return s;
  }
};

struct FragmentationConfig {
  double alpha = 1.0;
  double t_max = 1.0;
  std::vector<double> snapshot_times;
  double size_floor = std::exp(-80.0);
  std::size_t particle_cap = 10000000;
};

struct FragmentationTruncated : NumericError {
  double achieved_time;
  std::vector<Snapshot> snapshots;
  FragmentationTruncated(double t, std::vector<Snapshot> s)
      : NumericError("fragmentation: particle cap exceeded at t=" + std::to_string(t)),
        achieved_time(t),
        snapshots(std::move(s)) {}
};

inline double neumaier_sum(const std::vector<double>& xs) {
  double s = 0, c = 0;
  for (double x : xs) {
    double t = s + x;
    c += std::abs(s) >= std::abs(x) ? (s - t) + x : (x - t) + s;
    s = t;
  }
  return s + c;
}

/// Population of a binary conservative fragmentation with clock rate x^alpha.
class FragmentationState {
 public:
  FragmentationState(double alpha, BinarySplitLaw law, double size_floor, std::size_t cap, Engine& rng)
      : alpha_(alpha), law_(std::move(law)), log_floor_(size_floor > 0 ? std::log(size_floor) : -num::inf),
        cap_(cap), rng_(&rng) {
    if (!(alpha > 0)) throw DomainError("fragmentation: alpha must be positive");
    if (!(size_floor >= 0)) throw DomainError("fragmentation: size_floor must be nonnegative");
    log_sizes_.push_back(0.0);
    schedule(0);
  }

  double time() const { return time_; }
  std::size_t count() const { return log_sizes_.size(); }
  std::size_t events() const { return events_; }
  std::size_t frozen() const { return frozen_; }
  const std::vector<double>& log_sizes() const { return log_sizes_; }

  double total_mass() const {
    std::vector<double> s(log_sizes_.size());
    for (std::size_t i = 0; i < s.size(); ++i) s[i] = std::exp(log_sizes_[i]);
    return neumaier_sum(s);
  }

  Snapshot snapshot() const { return {time_, log_sizes_, total_mass(), frozen_}; }

  /// Processes every split with time <= t. Returns false if the cap stopped it.
  bool advance_to(double t) {
    while (!queue_.empty() && queue_.top().first <= t) {
      if (log_sizes_.size() >= cap_) return false;
      auto [when, id] = queue_.top();
      queue_.pop();
      time_ = when;
      SplitDraw d = law_.sample(*rng_);
      double lx = log_sizes_[id];
      log_sizes_[id] = lx + d.log_u;
      log_sizes_.push_back(lx + d.log_1mu);
      ++events_;
      schedule(id);
      schedule(log_sizes_.size() - 1);
    }
    time_ = t;
    return true;
  }

 private:
  void schedule(std::size_t id) {
    double lx = log_sizes_[id];
    if (lx < log_floor_) {
      ++frozen_;
      return;
    }
    double wait = standard_exponential(*rng_) * std::exp(-alpha_ * lx);
    if (std::isfinite(wait)) queue_.push({time_ + wait, id});
  }

  using Event = std::pair<double, std::size_t>;
  double alpha_;
  BinarySplitLaw law_;
  double log_floor_;
  std::size_t cap_;
  Engine* rng_;
  double time_ = 0;
  std::size_t events_ = 0, frozen_ = 0;
  std::vector<double> log_sizes_;
  std::priority_queue<Event, std::vector<Event>, std::greater<Event>> queue_;
};

struct FragmentationRun {
  std::vector<Snapshot> snapshots;
  std::size_t events;
};

/// Event-driven run with snapshots at the requested times (and at t_max).
inline FragmentationRun simulate_fragmentation(const FragmentationConfig& cfg, const BinarySplitLaw& law, Engine& rng) {
  if (!(cfg.t_max > 0)) throw UsageError("fragmentation: t_max must be positive");
  std::vector<double> times = cfg.snapshot_times;
  for (double t : times)
    if (!(t >= 0 && t <= cfg.t_max)) throw UsageError("fragmentation: snapshot time outside [0, t_max]");
  std::sort(times.begin(), times.end());
  if (times.empty() || times.back() < cfg.t_max) times.push_back(cfg.t_max);
  FragmentationState st(cfg.alpha, law, cfg.size_floor, cfg.particle_cap, rng);
  FragmentationRun run;
  for (double t : times) {
    if (!st.advance_to(t)) {
      run.snapshots.push_back(st.snapshot());
      throw FragmentationTruncated(st.time(), std::move(run.snapshots));
    }
    run.snapshots.push_back(st.snapshot());
  }
  run.events = st.events();
  return run;
}

inline std::string snapshots_csv(const std::vector<Snapshot>& snaps) {
  std::ostringstream os;
  os.precision(17);
  os << "t,size\n";
  for (const auto& s : snaps)
    for (double l : s.log_sizes) os << s.time << ',' << std::exp(l) << '\n';
  return os.str();
}

enum class TagMode { LeftMost, SizeBiased };

/// Line of descent of one fragment; sizes kept as -log l.
struct TaggedTrace {
  std::vector<double> times;
  std::vector<double> neg_log_sizes;

  double neg_log_size_at(double t) const {
    auto it = std::upper_bound(times.begin(), times.end(), t);
    return neg_log_sizes[static_cast<std::size_t>(it - times.begin()) - 1];
  }
  std::vector<double> jump_sizes() const {
    std::vector<double> j;
    for (std::size_t i = 1; i < neg_log_sizes.size(); ++i) j.push_back(neg_log_sizes[i] - neg_log_sizes[i - 1]);
    return j;
  }
};

inline TaggedTrace tagged_fragment(double alpha, const BinarySplitLaw& law, double t_max, Engine& rng, TagMode mode,
                                   std::size_t max_events = 100000000) {
  if (!(alpha > 0)) throw DomainError("tagged_fragment: alpha must be positive");
  TaggedTrace tr;
  tr.times.push_back(0.0);
  tr.neg_log_sizes.push_back(0.0);
  double t = 0, z = 0;
  for (std::size_t e = 0; e < max_events; ++e) {
    double wait = standard_exponential(rng) * std::exp(alpha * z);
    if (!(t + wait <= t_max)) return tr;
    t += wait;
    SplitDraw d = law.sample(rng);
    double step = -d.log_u;
    if (mode == TagMode::SizeBiased && !(uniform_open(rng) < std::exp(d.log_u))) step = -d.log_1mu;
    z += step;
    tr.times.push_back(t);
    tr.neg_log_sizes.push_back(z);
  }
  throw NumericError("tagged_fragment: event limit reached");
}

namespace detail {
template <class G>
double expect_over_jump(const JumpLaw& j, G&& g) {
  if (auto* p = std::get_if<PointMass>(&j.kind())) return g(p->x0);
  double beta_or_rate;
  std::function<double(double)> dens;
  if (auto* e = std::get_if<ExponentialJump>(&j.kind())) {
    beta_or_rate = e->rate;
    dens = [r = beta_or_rate](double x) { return r * std::exp(-r * x); };
  } else {
    beta_or_rate = std::get<ParetoLogTail>(j.kind()).beta;
    dens = [b = beta_or_rate](double x) { return b * std::pow(1.0 + x, -b - 1.0); };
  }
  boost::math::quadrature::exp_sinh<double> integrator;
  return integrator.integrate([&](double x) { return g(x) * dens(x); }, 0.0, num::inf, 1e-12);
}
}  // namespace detail

/// Phi(q) = E(1 - U^{q+1} - (1-U)^{q+1}).
inline Estimate phi_fragmentation(const BinarySplitLaw& law, double q, std::size_t mc_samples = 1000000,
                                  std::uint64_t mc_seed = 0) {
  if (!(q > 0)) throw DomainError("phi_fragmentation: q must be positive");
  auto g = [q](double u) { return 1.0 - std::pow(u, q + 1.0) - std::pow(1.0 - u, q + 1.0); };
  if (auto* d = std::get_if<DeterministicSplit>(&law.kind())) return {g(d->u), 0.0};
  if (std::holds_alternative<UniformSplit>(law.kind())) return {q / (q + 2.0), 0.0};
  if (auto* l = std::get_if<LogTailSplit>(&law.kind())) {
    // in terms of j = -log U
    auto gj = [q](double j) {
      return -std::expm1(-(q + 1.0) * j) - std::exp((q + 1.0) * std::log(-std::expm1(-j)));
    };
    return {detail::expect_over_jump(l->neg_log_u, gj), 0.0};
  }
  Engine rng(mc_seed);
  std::vector<double> ys(mc_samples);
  for (auto& y : ys) {
    SplitDraw d = law.sample(rng);
    y = g(std::exp(d.log_u));
  }
  auto m = moment_estimate(ys, 1);
  return {m.mean, m.stderr_};
}

/// Pi]x, inf[ = E(U 1{U < e^{-x}} + (1-U) 1{1-U < e^{-x}}).
inline Estimate levy_tail_from_nu(const BinarySplitLaw& law, double x, std::size_t mc_samples = 1000000,
                                  std::uint64_t mc_seed = 0) {
  if (!(x > 0)) throw DomainError("levy_tail_from_nu: x must be positive");
  double c = std::exp(-x);
  auto g = [c](double u) { return (u < c ? u : 0.0) + (1.0 - u < c ? 1.0 - u : 0.0); };
  if (auto* d = std::get_if<DeterministicSplit>(&law.kind())) return {g(d->u), 0.0};
  if (std::holds_alternative<UniformSplit>(law.kind())) return {c * c, 0.0};
  if (auto* l = std::get_if<LogTailSplit>(&law.kind())) {
    // U < e^{-x} iff j > x; 1-U < e^{-x} iff j < j* = -log(1 - e^{-x})
    double jstar = -std::log(-std::expm1(-x));
    auto gj = [x, jstar](double j) {
      double v = 0;
      if (j > x) v += std::exp(-j);
      if (j < jstar) v += -std::expm1(-j);
      return v;
    };
    const JumpLaw& jl = l->neg_log_u;
    if (std::holds_alternative<PointMass>(jl.kind())) return {detail::expect_over_jump(jl, gj), 0.0};
    // split the integration at the discontinuities
    std::function<double(double)> dens;
    if (auto* e = std::get_if<ExponentialJump>(&jl.kind()))
      dens = [r = e->rate](double t) { return r * std::exp(-r * t); };
    else
      dens = [b = std::get<ParetoLogTail>(jl.kind()).beta](double t) { return b * std::pow(1.0 + t, -b - 1.0); };
    boost::math::quadrature::tanh_sinh<double> ts;
    boost::math::quadrature::exp_sinh<double> es;
    double upper = es.integrate([&](double t) { return std::exp(-t) * dens(t); }, x, num::inf, 1e-12);
    double lower = ts.integrate([&](double t) { return -std::expm1(-t) * dens(t); }, 0.0, jstar, 1e-12);
    return {upper + lower, 0.0};
  }
  Engine rng(mc_seed);
  std::vector<double> ys(mc_samples);
  for (auto& y : ys) y = g(std::exp(law.sample(rng).log_u));
  auto m = moment_estimate(ys, 1);
  return {m.mean, m.stderr_};
}

/// rho_t: atoms log Y_i / log t with weights Y_i.
inline std::pair<std::vector<double>, std::vector<double>> empirical_rho(const Snapshot& s, double t) {
  if (!(t > 1)) throw DomainError("empirical_rho: t must exceed 1");
  double lt = std::log(t);
  std::vector<double> atoms(s.log_sizes.size()), weights(s.log_sizes.size());
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    atoms[i] = s.log_sizes[i] / lt;
    weights[i] = std::exp(s.log_sizes[i]);
  }
  return {atoms, weights};
}

inline std::string rho_csv(const std::pair<std::vector<double>, std::vector<double>>& rho) {
  std::ostringstream os;
  os.precision(17);
  os << "atom,weight\n";
  for (std::size_t i = 0; i < rho.first.size(); ++i) os << rho.first[i] << ',' << rho.second[i] << '\n';
  return os.str();
}

}  // namespace pssmp
