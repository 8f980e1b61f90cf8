#ifndef PPN_RNG_HPP
#define PPN_RNG_HPP

#include <cstdint>

namespace ppn {

// Deterministic splittable generator (splitmix64). We avoid <random>
// distributions because their output is not pinned across standard library
// implementations; results here are reproducible on any platform.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Unbiased draw in [0, bound) by rejection.
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound + 1) % bound;
    std::uint64_t x = next();
    while (x > limit) x = next();
    return x % bound;
  }

  double unit() {  // [0, 1)
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  // Seed for an independent sub-stream, derived from (master, stream index).
  // Evaluation order of the streams never affects their contents.
  static std::uint64_t derive(std::uint64_t master, std::uint64_t stream) {
    SplitMix64 g(master ^ (0xd1b54a32d192ed03ULL * (stream + 1)));
    g.next();
    return g.next();
  }

 private:
  std::uint64_t state_;
};

}  // namespace ppn

#endif  // PPN_RNG_HPP
