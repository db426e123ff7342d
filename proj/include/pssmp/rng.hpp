#pragma once

#include <cmath>
#include <cstdint>
#include <exception>
#include <algorithm>
#include <random>
#include <thread>
#include <vector>

namespace pssmp {

using Engine = std::mt19937_64;

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Derives one independent engine per (replicate index, tag) from a master seed.
/// Streams depend only on the triple, never on the order they are requested in.
class SeedPlan {
 public:
  explicit SeedPlan(std::uint64_t master = 0) : master_(master) {}

  std::uint64_t master() const { return master_; }

  std::uint64_t derive(std::uint64_t index, std::uint64_t tag = 0) const {
    return splitmix64(splitmix64(splitmix64(master_) ^ tag) + index);
  }

  Engine stream(std::uint64_t index, std::uint64_t tag = 0) const {
    std::uint64_t s = derive(index, tag);
    std::seed_seq seq{static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(s >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(tag)};
    return Engine(seq);
  }

  /// A sub-plan, for experiments that need several independent families.
  SeedPlan child(std::uint64_t tag) const { return SeedPlan(derive(~tag, tag)); }

 private:
  std::uint64_t master_;
};

/// Uniform on the open interval (0,1).
inline double uniform_open(Engine& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

inline double standard_exponential(Engine& rng) { return -std::log(uniform_open(rng)); }

/// Runs fn(i) for i in [0, n) on up to `jobs` threads and returns results by index.
template <class T, class Fn>
std::vector<T> parallel_map(std::size_t n, unsigned jobs, Fn&& fn) {
  std::vector<T> out(n);
  if (jobs <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) out[i] = fn(i);
    return out;
  }
  jobs = static_cast<unsigned>(std::min<std::size_t>(jobs, n));
  std::vector<std::exception_ptr> failures(jobs);
  std::vector<std::size_t> failed_at(jobs, n);
  std::vector<std::thread> pool;
  pool.reserve(jobs);
  for (unsigned w = 0; w < jobs; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += jobs) {
        try {
          out[i] = fn(i);
        } catch (...) {
          failures[w] = std::current_exception();
          failed_at[w] = i;
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  // rethrow the failure with the smallest index so errors do not depend on scheduling
  std::size_t best = n;
  std::exception_ptr first;
  for (unsigned w = 0; w < jobs; ++w)
    if (failures[w] && failed_at[w] < best) best = failed_at[w], first = failures[w];
  if (first) std::rethrow_exception(first);
  return out;
}

}  // namespace pssmp
