#pragma once

// Seeded random source with portable output.
//
// The bit generator is std::mt19937_64, whose output sequence is fixed by the
// C++ standard. The real-valued transforms are implemented here rather than
// taken from <random> distributions, whose algorithms are left to the
// library vendor, so a seed reproduces the same draws on every toolchain.
//
// Streams are split by hashing (master seed, tag, tag, ...) through
// splitmix64; see derive_seed.

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace sicdf {

inline constexpr const char* kRngName = "mt19937_64+splitmix64-derive+polar-normal";

inline std::uint64_t splitmix64(std::uint64_t x)
{
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

//! Seed of an independent stream identified by a tag path under `master`.
inline std::uint64_t derive_seed(std::uint64_t master,
                                 std::initializer_list<std::uint64_t> tags)
{
  std::uint64_t state = splitmix64(master);
  for (std::uint64_t tag : tags) {
    state = splitmix64(state ^ splitmix64(tag + 0x632be59bd9b4e019ULL));
  }
  return state;
}

// Stream purposes used with derive_seed.
enum class Stream : std::uint64_t
{
  data = 1,
  bootstrap_h = 2,
  bootstrap_H = 3,
  restarts = 4,
  truth = 5,
  holdout = 6,
};

inline std::uint64_t derive_seed(std::uint64_t master, Stream purpose,
                                 std::initializer_list<std::uint64_t> tags = {})
{
  std::uint64_t state = derive_seed(master, {static_cast<std::uint64_t>(purpose)});
  for (std::uint64_t tag : tags) {
    state = splitmix64(state ^ splitmix64(tag + 0x632be59bd9b4e019ULL));
  }
  return state;
}

class Rng
{
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t bits() { return engine_(); }

  //! Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  //! Uniform integer in [0, n), unbiased by rejection.
  std::uint64_t index(std::uint64_t n)
  {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t r = engine_();
    while (r >= limit) {
      r = engine_();
    }
    return r % n;
  }

  //! Standard normal via the Marsaglia polar method.
  double normal()
  {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u = 0.0, v = 0.0, s = 0.0;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double factor = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * factor;
    has_spare_ = true;
    return u * factor;
  }

private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

} // namespace sicdf
