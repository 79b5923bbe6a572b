#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <utility>
#include <vector>

namespace judgeforge {

struct RngSeed {
  std::uint64_t value = 0;
};

// Seeded stream with platform-independent draws. std::mt19937_64's output
// sequence is fixed by the standard; the distributions layered on top here
// are hand-rolled because the std:: ones are implementation-defined.
class Rng {
 public:
  explicit Rng(RngSeed seed);

  // Independent stream for a named pipeline stage.
  static Rng derive(RngSeed seed, std::string_view stream);

  std::uint64_t next_u64();
  // Uniform in [0, 1) with 53 random bits.
  double uniform();
  // Uniform integer in [0, bound); bound must be > 0.
  std::uint64_t below(std::uint64_t bound);
  bool coin();

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      using std::swap;
      swap(v[i - 1], v[j]);
    }
  }

  // k distinct indices from [0, n), returned in ascending order.
  std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k);

 private:
  std::mt19937_64 engine_;
};

}  // namespace judgeforge
