// Distribution specifications and reproducible random streams.
//
// Each simulation component (arrivals per queue, service, each switchover
// direction) owns its own stream, keyed by (master_seed, stream_id), so that
// changing one distribution leaves the other components' sample paths intact.

#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace polling {

enum class DistKind { Exponential, Deterministic, Erlang, Uniform };

inline const char* dist_kind_name(DistKind k) {
  switch (k) {
    case DistKind::Exponential: return "exponential";
    case DistKind::Deterministic: return "deterministic";
    case DistKind::Erlang: return "erlang";
    case DistKind::Uniform: return "uniform";
  }
  return "?";
}

struct DistributionSpec {
  DistKind kind = DistKind::Exponential;
  double mean = 1.0;
  int shape = 1;               // erlang
  double lo = 0.0, hi = 0.0;   // uniform

  static DistributionSpec exponential(double mean) {
    DistributionSpec s{DistKind::Exponential, mean};
    s.throw_if_invalid();
    return s;
  }
  static DistributionSpec deterministic(double mean) {
    DistributionSpec s{DistKind::Deterministic, mean};
    s.throw_if_invalid();
    return s;
  }
  static DistributionSpec erlang(int shape, double mean) {
    DistributionSpec s{DistKind::Erlang, mean, shape};
    s.throw_if_invalid();
    return s;
  }
  static DistributionSpec uniform(double lo, double hi) {
    DistributionSpec s{DistKind::Uniform, (lo + hi) / 2.0, 1, lo, hi};
    s.throw_if_invalid();
    return s;
  }

  std::vector<std::string> validate() const {
    std::vector<std::string> errors;
    if (!(mean > 0.0)) errors.push_back("mean must be > 0");
    if (kind == DistKind::Erlang && shape < 1) errors.push_back("erlang shape must be >= 1");
    if (kind == DistKind::Uniform) {
      if (!(lo >= 0.0 && lo < hi)) errors.push_back("uniform requires 0 <= lo < hi");
      if (std::abs((lo + hi) / 2.0 - mean) > 1e-12 * std::max(1.0, mean))
        errors.push_back("uniform mean must equal (lo+hi)/2");
    }
    return errors;
  }
  void throw_if_invalid() const {
    auto errors = validate();
    if (!errors.empty()) throw std::invalid_argument("distribution: " + errors.front());
  }

  double second_moment() const {
    switch (kind) {
      case DistKind::Exponential: return 2.0 * mean * mean;
      case DistKind::Deterministic: return mean * mean;
      case DistKind::Erlang: return mean * mean * (shape + 1.0) / shape;
      case DistKind::Uniform: return (lo * lo + lo * hi + hi * hi) / 3.0;
    }
    return 0.0;
  }
};

// Analytic first and second raw moments.
inline std::pair<double, double> moments(const DistributionSpec& spec) {
  return {spec.mean, spec.second_moment()};
}

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}
}  // namespace detail

// PCG32 with the stream selected by the increment, seeded from
// (master_seed, stream_id). Identical keys give bit-identical sequences;
// distinct stream ids select distinct, statistically independent sequences.
class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::uint64_t stream_id) {
    const std::uint64_t initstate =
        detail::splitmix64(master_seed) ^ detail::splitmix64(stream_id * 0xDA942042E4DD58B5ULL);
    const std::uint64_t initseq = detail::splitmix64(stream_id ^ (master_seed << 1));
    inc_ = (initseq << 1) | 1u;
    state_ = 0;
    next_u32();
    state_ += initstate;
    next_u32();
  }

  std::uint32_t next_u32() {
    const std::uint64_t old = state_;
    state_ = old * 6364136223846793005ULL + inc_;
    const std::uint32_t xorshifted = static_cast<std::uint32_t>(((old >> 18) ^ old) >> 27);
    const std::uint32_t rot = static_cast<std::uint32_t>(old >> 59);
    return (xorshifted >> rot) | (xorshifted << ((-rot) & 31));
  }

  // Uniform on the open interval (0,1); never returns an endpoint, so
  // -log(u) and inverse-CDF draws stay strictly positive and finite.
  double next_unit() {
    const std::uint64_t hi = next_u32();
    const std::uint64_t bits = ((hi << 32) | next_u32()) >> 11;  // 53 random bits
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
  }

 private:
  std::uint64_t state_ = 0;
  std::uint64_t inc_ = 1;
};

inline double sample(const DistributionSpec& spec, RngStream& rng) {
  switch (spec.kind) {
    case DistKind::Exponential:
      return -spec.mean * std::log(rng.next_unit());
    case DistKind::Deterministic:
      return spec.mean;
    case DistKind::Erlang: {
      const double scale = spec.mean / spec.shape;
      double sum = 0.0;
      for (int i = 0; i < spec.shape; ++i) sum += -scale * std::log(rng.next_unit());
      return sum;
    }
    case DistKind::Uniform:
      return spec.lo + (spec.hi - spec.lo) * rng.next_unit();
  }
  throw std::logic_error("unreachable distribution kind");
}

}  // namespace polling
