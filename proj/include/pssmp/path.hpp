#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "errors.hpp"
#include "numerics.hpp"
#include "rng.hpp"
#include "subordinator.hpp"

namespace pssmp {

/// Piece of a path on which xi(start + u) = level + slope * u, 0 <= u < length.
struct Segment {
  double start;
  double length;
  double level;
  double slope;
  double end() const { return start + length; }
  double end_value() const { return level + slope * length; }
  double value(double t) const { return level + slope * (t - start); }
};

struct JumpDriftRep {
  double drift = 0;
  std::vector<double> jump_times;
  std::vector<double> jump_sizes;
};

/// Grid of exact values at multiples of `step`. Between nodes the path has
/// slope `drift` and the remaining increment is a single jump at the cell midpoint.
struct GridRep {
  double step = 0;
  double drift = 0;
  std::vector<double> values;
};

/// Nondecreasing path started at 0 on [0, horizon].
class SubordinatorPath {
 public:
  static SubordinatorPath jump_drift(double drift, std::vector<double> times, std::vector<double> sizes,
                                     double horizon) {
    if (times.size() != sizes.size()) throw UsageError("jump_drift: times and sizes differ in length");
    if (!(drift >= 0)) throw DomainError("jump_drift: negative drift");
    if (!(horizon > 0)) throw UsageError("jump_drift: horizon must be positive");
    for (std::size_t i = 0; i < times.size(); ++i) {
      if (!(sizes[i] > 0)) throw DomainError("jump_drift: jump sizes must be positive");
      if (!(times[i] > 0 && times[i] <= horizon)) throw DomainError("jump_drift: jump time outside (0, horizon]");
      if (i > 0 && !(times[i] > times[i - 1])) throw DomainError("jump_drift: jump times must increase strictly");
    }
    SubordinatorPath p;
    p.rep_ = JumpDriftRep{drift, std::move(times), std::move(sizes)};
    p.horizon_ = horizon;
    p.build();
    return p;
  }

  static SubordinatorPath grid(double step, std::vector<double> values, double horizon, double drift = 0) {
    if (!(step > 0)) throw UsageError("grid: step must be positive");
    if (values.empty() || values[0] != 0.0) throw DomainError("grid: values must start at 0");
    for (std::size_t i = 1; i < values.size(); ++i)
      if (!(values[i] >= values[i - 1])) throw DomainError("grid: values must be nondecreasing");
    if (values.size() != grid_length(horizon, step)) throw UsageError("grid: length must be floor(horizon/step)+1");
    SubordinatorPath p;
    p.rep_ = GridRep{step, drift, std::move(values)};
    p.horizon_ = horizon;
    p.build();
    return p;
  }

  static std::size_t grid_length(double horizon, double step) {
    return static_cast<std::size_t>(std::floor(horizon / step * (1 + 1e-12))) + 1;
  }

  double horizon() const { return horizon_; }
  bool is_jump_drift() const { return std::holds_alternative<JumpDriftRep>(rep_); }
  const JumpDriftRep& jump_drift_rep() const { return std::get<JumpDriftRep>(rep_); }
  const GridRep& grid_rep() const { return std::get<GridRep>(rep_); }
  const std::vector<Segment>& segments() const { return segments_; }

  /// Index of the segment containing t (segments are right-open).
  std::size_t segment_index(double t) const {
    if (t < 0 || t > horizon_) throw RangeError("path query outside [0, horizon]", horizon_);
    auto it = std::upper_bound(starts_.begin(), starts_.end(), t);
    return static_cast<std::size_t>(it - starts_.begin()) - 1;
  }

  double value_at(double t) const { return segments_[segment_index(t)].value(t); }

  double left_limit(double t) const {
    std::size_t k = segment_index(t);
    if (k > 0 && segments_[k].start == t) return segments_[k - 1].end_value();
    return segments_[k].value(t);
  }

  double terminal_value() const { return segments_.back().end_value(); }

  /// Grid path with `factor` times the step, sharing node values.
  SubordinatorPath coarsened(std::size_t factor) const {
    const auto& g = grid_rep();
    std::vector<double> v;
    for (std::size_t i = 0; i < g.values.size(); i += factor) v.push_back(g.values[i]);
    double h = g.step * static_cast<double>(factor);
    double hz = h * static_cast<double>(v.size() - 1);
    return grid(h, std::move(v), hz, g.drift);
  }

  std::string to_csv() const {
    std::ostringstream os;
    os.precision(17);
    if (is_jump_drift()) {
      const auto& r = jump_drift_rep();
      os << "jump_time,jump_size,drift\n";
      for (std::size_t i = 0; i < r.jump_times.size(); ++i)
        os << r.jump_times[i] << ',' << r.jump_sizes[i] << ',' << r.drift << '\n';
    } else {
      const auto& r = grid_rep();
      os << "t,xi\n";
      for (std::size_t i = 0; i < r.values.size(); ++i) os << r.step * static_cast<double>(i) << ',' << r.values[i] << '\n';
    }
    return os.str();
  }

 private:
  SubordinatorPath() = default;

  void build() {
    segments_.clear();
    if (auto* jd = std::get_if<JumpDriftRep>(&rep_)) {
      double start = 0, cum = 0;
      for (std::size_t i = 0; i < jd->jump_times.size(); ++i) {
        double t = jd->jump_times[i];
        segments_.push_back({start, t - start, cum + jd->drift * start, jd->drift});
        cum += jd->jump_sizes[i];
        start = t;
      }
      segments_.push_back({start, horizon_ - start, cum + jd->drift * start, jd->drift});
    } else {
      const auto& g = std::get<GridRep>(rep_);
      double h = g.step, d = g.drift;
      segments_.reserve(2 * g.values.size());
      for (std::size_t k = 0; k + 1 < g.values.size(); ++k) {
        double t0 = h * static_cast<double>(k);
        double a = g.values[k];
        double b = std::max(g.values[k + 1] - 0.5 * d * h, a + 0.5 * d * h);
        segments_.push_back({t0, 0.5 * h, a, d});
        segments_.push_back({t0 + 0.5 * h, h * static_cast<double>(k + 1) - (t0 + 0.5 * h), b, d});
      }
      double tn = h * static_cast<double>(g.values.size() - 1);
      segments_.push_back({tn, std::max(0.0, horizon_ - tn), g.values.back(), d});
    }
    starts_.resize(segments_.size());
    for (std::size_t i = 0; i < segments_.size(); ++i) starts_[i] = segments_[i].start;
  }

  std::variant<JumpDriftRep, GridRep> rep_;
  double horizon_ = 0;
  std::vector<Segment> segments_;
  std::vector<double> starts_;
};

/// Grows a simulated path in place; continuing an extension consumes the same
/// random stream as simulating the longer horizon at once.
class PathSimulator {
 public:
  PathSimulator(SubordinatorSpec spec, double step, Engine& rng) : spec_(std::move(spec)), step_(step), rng_(&rng) {
    if (!spec_.finite_activity() && !(step_ > 0)) throw UsageError("simulate_path: step must be positive");
    values_.push_back(0.0);
    if (auto* cp = std::get_if<CompoundPoisson>(&spec_.kind())) next_jump_ = standard_exponential(*rng_) / cp->rate;
  }

  void extend_to(double horizon) {
    if (!(horizon > horizon_)) return;
    if (spec_.finite_activity()) {
      if (auto* cp = std::get_if<CompoundPoisson>(&spec_.kind())) {
        while (next_jump_ <= horizon) {
          times_.push_back(next_jump_);
          sizes_.push_back(cp->jumps.sample(*rng_));
          next_jump_ += standard_exponential(*rng_) / cp->rate;
        }
      }
    } else {
      std::size_t n = SubordinatorPath::grid_length(horizon, step_);
      values_.reserve(n);
      while (values_.size() < n) values_.push_back(values_.back() + sample_increment(spec_, step_, *rng_));
    }
    horizon_ = horizon;
  }

  double horizon() const { return horizon_; }

  SubordinatorPath path() const {
    if (spec_.finite_activity()) return SubordinatorPath::jump_drift(spec_.drift(), times_, sizes_, horizon_);
    return SubordinatorPath::grid(step_, values_, horizon_, spec_.drift());
  }

 private:
  SubordinatorSpec spec_;
  double step_;
  Engine* rng_;
  double horizon_ = 0;
  double next_jump_ = num::inf;
  std::vector<double> times_, sizes_, values_;
};

/// step <= 0 selects horizon/1000 for grid kinds.
inline SubordinatorPath simulate_path(const SubordinatorSpec& spec, double horizon, double step, Engine& rng) {
  if (!(horizon > 0)) throw UsageError("simulate_path: horizon must be positive");
  if (!spec.finite_activity() && step == 0) step = horizon / 1000.0;
  if (!spec.finite_activity() && !(step > 0)) throw UsageError("simulate_path: step must be positive");
  PathSimulator sim(spec, step, rng);
  sim.extend_to(horizon);
  return sim.path();
}

/// Exact values of xi at increasing times, from independent increments.
inline std::vector<double> sample_at_times(const SubordinatorSpec& spec, const std::vector<double>& times, Engine& rng) {
  std::vector<double> out;
  out.reserve(times.size());
  double prev = 0, x = 0;
  for (double t : times) {
    if (!(t > prev)) throw UsageError("sample_at_times: times must increase from 0");
    x += sample_increment(spec, t - prev, rng);
    out.push_back(x);
    prev = t;
  }
  return out;
}

struct PassageRecord {
  double level;
  double passage_time;
  double age;
  double overshoot;
  double xi_before;
  double xi_after;
  bool passed;
};

/// L = inf{s : xi_s > b}, with age b - xi_{L-} and overshoot xi_L - b.
inline PassageRecord first_passage(const SubordinatorPath& path, double b) {
  if (!(b > 0)) throw UsageError("first_passage: level must be positive");
  const auto& seg = path.segments();
  auto it = std::partition_point(seg.begin(), seg.end(), [b](const Segment& s) { return !(s.end_value() > b); });
  if (it == seg.end()) return {b, num::inf, num::inf, num::inf, path.terminal_value(), num::inf, false};
  std::size_t k = static_cast<std::size_t>(it - seg.begin());
  const Segment& s = seg[k];
  double before = k > 0 ? seg[k - 1].end_value() : 0.0;
  if (s.level > b || (s.level == b && before < b))
    return {b, s.start, b - before, s.level - b, before, s.level, true};
  double L = s.start + (b - s.level) / s.slope;
  return {b, L, 0.0, 0.0, b, b, true};
}

struct RatioTrace {
  std::vector<double> times;
  std::vector<double> ratio;
  std::vector<double> running_inf;
  std::vector<double> running_sup;
};

inline std::vector<double> doubling_times(double t0, std::size_t count) {
  std::vector<double> t(count);
  for (std::size_t k = 0; k < count; ++k) t[k] = std::ldexp(t0, static_cast<int>(k));
  return t;
}

/// Running inf/sup of values[k] / denominator(times[k]).
inline RatioTrace running_ratio_stats(const std::vector<double>& times, const std::vector<double>& values,
                                      const std::function<double(double)>& denominator) {
  if (times.size() != values.size()) throw UsageError("running_ratio_stats: size mismatch");
  RatioTrace r;
  double lo = num::inf, hi = -num::inf;
  for (std::size_t k = 0; k < times.size(); ++k) {
    double d = denominator(times[k]);
    if (!(d > 0)) continue;
    double q = values[k] / d;
    lo = std::min(lo, q);
    hi = std::max(hi, q);
    r.times.push_back(times[k]);
    r.ratio.push_back(q);
    r.running_inf.push_back(lo);
    r.running_sup.push_back(hi);
  }
  return r;
}

}  // namespace pssmp
