#pragma once

#include <boost/math/distributions/chi_squared.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "numerics.hpp"

namespace pssmp {

/// Sorted atoms with normalized weights.
class EmpiricalDistribution {
 public:
  static EmpiricalDistribution from_samples(std::vector<double> xs) {
    if (xs.empty()) throw UsageError("EmpiricalDistribution: empty sample");
    std::sort(xs.begin(), xs.end());
    EmpiricalDistribution e;
    e.n_ = xs.size();
    e.atoms_ = std::move(xs);
    e.cum_.resize(e.n_);
    for (std::size_t i = 0; i < e.n_; ++i) e.cum_[i] = static_cast<double>(i + 1) / static_cast<double>(e.n_);
    e.weights_.assign(e.n_, 1.0 / static_cast<double>(e.n_));
    return e;
  }

  static EmpiricalDistribution weighted(const std::vector<double>& xs, const std::vector<double>& ws) {
    if (xs.empty()) throw UsageError("EmpiricalDistribution: empty sample");
    if (xs.size() != ws.size()) throw UsageError("EmpiricalDistribution: atom/weight size mismatch");
    std::vector<std::size_t> idx(xs.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return xs[a] < xs[b]; });
    double total = 0;
    for (double w : ws) {
      if (!(w >= 0)) throw UsageError("EmpiricalDistribution: negative weight");
      total += w;
    }
    if (!(total > 0)) throw UsageError("EmpiricalDistribution: zero total weight");
    EmpiricalDistribution e;
    e.n_ = xs.size();
    e.atoms_.resize(e.n_);
    e.weights_.resize(e.n_);
    e.cum_.resize(e.n_);
    double c = 0;
    for (std::size_t i = 0; i < e.n_; ++i) {
      e.atoms_[i] = xs[idx[i]];
      e.weights_[i] = ws[idx[i]] / total;
      c += e.weights_[i];
      e.cum_[i] = c;
    }
    e.cum_.back() = 1.0;
    return e;
  }

  const std::vector<double>& atoms() const { return atoms_; }
  const std::vector<double>& weights() const { return weights_; }
  std::size_t size() const { return n_; }

  /// P(X <= x).
  double cdf(double x) const {
    auto it = std::upper_bound(atoms_.begin(), atoms_.end(), x);
    if (it == atoms_.begin()) return 0.0;
    return cum_[static_cast<std::size_t>(it - atoms_.begin()) - 1];
  }

  double quantile(double p) const {
    auto it = std::lower_bound(cum_.begin(), cum_.end(), p);
    if (it == cum_.end()) return atoms_.back();
    return atoms_[static_cast<std::size_t>(it - cum_.begin())];
  }

  /// Upper CDF step values at each distinct atom, with the value just below it.
  template <class Fn>
  void for_each_step(Fn&& fn) const {
    double below = 0;
    for (std::size_t i = 0; i < n_; ++i) {
      if (i + 1 < n_ && atoms_[i + 1] == atoms_[i]) continue;
      fn(atoms_[i], below, cum_[i]);
      below = cum_[i];
    }
  }

 private:
  std::vector<double> atoms_, weights_, cum_;
  std::size_t n_ = 0;
};

/// sup_x |F_emp(x) - cdf(x)| using both one-sided limits at every atom.
inline double ks_distance(const EmpiricalDistribution& emp, const std::function<double(double)>& cdf) {
  if (emp.size() == 0) throw UsageError("ks_distance: empty sample");
  double d = 0;
  emp.for_each_step([&](double x, double below, double at) {
    double f = cdf(x);
    d = std::max({d, std::abs(at - f), std::abs(f - below)});
  });
  return d;
}

/// Two-sample sup distance between empirical CDFs.
inline double ks_two_sample(const EmpiricalDistribution& a, const EmpiricalDistribution& b) {
  std::vector<double> pts = a.atoms();
  pts.insert(pts.end(), b.atoms().begin(), b.atoms().end());
  std::sort(pts.begin(), pts.end());
  double d = 0;
  for (double x : pts) d = std::max(d, std::abs(a.cdf(x) - b.cdf(x)));
  return d;
}

/// Asymptotic one-sample KS critical value at the given significance.
inline double ks_critical_value(std::size_t n, double significance = 0.01) {
  return num::kolmogorov_quantile(significance) / std::sqrt(static_cast<double>(n));
}

inline double ks_two_sample_critical_value(std::size_t n, std::size_t m, double significance = 0.01) {
  double ne = static_cast<double>(n) * static_cast<double>(m) / static_cast<double>(n + m);
  return num::kolmogorov_quantile(significance) / std::sqrt(ne);
}

struct MomentEstimate {
  double mean;
  double stderr_;
  bool degenerate;  ///< zero sample variance
};

/// Mean of x^n with its CLT standard error.
inline MomentEstimate moment_estimate(const std::vector<double>& xs, int n) {
  if (xs.empty()) throw UsageError("moment_estimate: empty sample");
  double s = 0;
  for (double x : xs) s += std::pow(x, n);
  double m = s / static_cast<double>(xs.size());
  double ss = 0;
  for (double x : xs) {
    double d = std::pow(x, n) - m;
    ss += d * d;
  }
  double var = xs.size() > 1 ? ss / static_cast<double>(xs.size() - 1) : 0.0;
  double se = std::sqrt(var / static_cast<double>(xs.size()));
  return {m, se, se == 0.0};
}

/// Rectangular bins over a transformed square; edges in the original coordinates.
struct Bins2D {
  std::vector<double> x_edges;
  std::vector<double> y_edges;
};

struct Chi2Result {
  double statistic;
  int dof;
  int groups;
  double critical_99;
};

/// Chi-square of binned 2-D counts against cell probabilities. Cells are taken
/// in row-major order and merged greedily until each group expects >= min_expected.
inline Chi2Result binned_chi2(const std::vector<std::pair<double, double>>& samples, const Bins2D& bins,
                              const std::function<double(double, double, double, double)>& cell_mass,
                              double min_expected = 5.0) {
  if (samples.empty()) throw UsageError("binned_chi2: empty sample");
  std::size_t nx = bins.x_edges.size() - 1, ny = bins.y_edges.size() - 1;
  if (nx < 1 || ny < 1) throw UsageError("binned_chi2: need at least one bin per axis");
  std::vector<double> observed(nx * ny, 0.0);
  auto locate = [](const std::vector<double>& e, double v) -> long {
    if (v < e.front() || v >= e.back()) return -1;
    return static_cast<long>(std::upper_bound(e.begin(), e.end(), v) - e.begin()) - 1;
  };
  double n_in = 0;
  for (auto [x, y] : samples) {
    long i = locate(bins.x_edges, x), j = locate(bins.y_edges, y);
    if (i < 0 || j < 0) continue;
    observed[static_cast<std::size_t>(i) * ny + static_cast<std::size_t>(j)] += 1;
    n_in += 1;
  }
  double n = static_cast<double>(samples.size());
  std::vector<double> expected(nx * ny);
  for (std::size_t i = 0; i < nx; ++i)
    for (std::size_t j = 0; j < ny; ++j)
      expected[i * ny + j] =
          n * cell_mass(bins.x_edges[i], bins.x_edges[i + 1], bins.y_edges[j], bins.y_edges[j + 1]);
  std::vector<double> go, ge;
  double o = 0, e = 0;
  for (std::size_t c = 0; c < observed.size(); ++c) {
    o += observed[c];
    e += expected[c];
    if (e >= min_expected) {
      go.push_back(o);
      ge.push_back(e);
      o = e = 0;
    }
  }
  // samples outside the binned region form one more group
  o += n - n_in;
  double e_total = std::accumulate(expected.begin(), expected.end(), 0.0);
  e += std::max(0.0, n - e_total);
  if (e >= min_expected || go.empty()) {
    go.push_back(o);
    ge.push_back(e);
  } else {
    go.back() += o;
    ge.back() += e;
  }
  double stat = 0;
  for (std::size_t g = 0; g < go.size(); ++g)
    if (ge[g] > 0) stat += (go[g] - ge[g]) * (go[g] - ge[g]) / ge[g];
  int groups = static_cast<int>(go.size());
  int dof = std::max(1, groups - 1);
  boost::math::chi_squared_distribution<double> chi(dof);
  return {stat, dof, groups, boost::math::quantile(chi, 0.99)};
}

}  // namespace pssmp
