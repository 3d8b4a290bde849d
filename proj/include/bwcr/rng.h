#ifndef BWCR_RNG_H_
#define BWCR_RNG_H_

#include <cstdint>
#include <random>

namespace bwcr {

// Purpose tags for substream derivation. The numeric values are part of the
// reproducibility contract; do not renumber.
enum class Stream : std::uint64_t {
  kInstance = 1,      // instance generation
  kArms = 2,          // sampling an arm from a policy
  kObservations = 3,  // sampling outcome vectors
  kAux = 4,           // anything else (tests, oracles)
};

// SplitMix64 finalizer; used to derive well-mixed substream seeds.
std::uint64_t splitmix64(std::uint64_t x);

// Seeded generator built on std::mt19937_64, whose output sequence is fixed by
// the C++ standard. All derived variates are computed here from raw 64-bit
// draws (the std:: distributions are implementation-defined and therefore not
// portable).
//
// Substream rule: the generator for (seed, run, purpose) is seeded with
//   splitmix64(splitmix64(seed) ^ splitmix64(run + 0x9E37...) ^ splitmix64(purpose << 32))
// so that every (seed, run, purpose) triple gets an independent stream.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  static Rng for_stream(std::uint64_t seed, std::uint64_t run, Stream purpose);

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Uniform integer in [0, n).
  std::uint64_t uniform_index(std::uint64_t n);
  bool bernoulli(double p) { return uniform() < p; }
  double normal();
  double gamma(double shape);
  double beta(double a, double b);

 private:
  std::mt19937_64 engine_;
  bool has_spare_normal_ = false;
  double spare_normal_ = 0.0;
};

}  // namespace bwcr

#endif  // BWCR_RNG_H_
