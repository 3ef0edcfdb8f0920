#pragma once

#include <cstdint>
#include <functional>

namespace deskrl {

/// 128-bit incremental digest used to address history-tree nodes.
/// Keys are built step by step: key(h, a, o) = combine(key(h), a, o),
/// so extending a history never rehashes the whole sequence.
struct Digest128 {
  std::uint64_t hi = 0;
  std::uint64_t lo = 0;

  friend bool operator==(const Digest128& a, const Digest128& b) {
    return a.hi == b.hi && a.lo == b.lo;
  }
  friend bool operator!=(const Digest128& a, const Digest128& b) {
    return !(a == b);
  }
};

namespace detail {
inline std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 33;
  x *= 0xff51afd7ed558ccdULL;
  x ^= x >> 33;
  x *= 0xc4ceb9fe1a85ec53ULL;
  x ^= x >> 33;
  return x;
}
}  // namespace detail

/// Key of the empty history (the episode root).
inline Digest128 empty_history_key() {
  return Digest128{0x8f1d3a5c7e9b0246ULL, 0x13579bdf02468aceULL};
}

/// Folds one (action, observation-digest) transition into a history key.
inline Digest128 combine(const Digest128& key, int action, std::uint64_t obs_digest) {
  std::uint64_t a = detail::mix64(key.lo ^ (static_cast<std::uint64_t>(action) + 1));
  std::uint64_t b = detail::mix64(key.hi ^ obs_digest);
  return Digest128{detail::mix64(a + 0x2545f4914f6cdd1dULL * b),
                   detail::mix64(b + 0x9e3779b97f4a7c15ULL * a)};
}

/// FNV-1a over a word sequence; used to digest observation payloads.
class Fnv1a64 {
 public:
  void add(std::uint64_t w) {
    for (int i = 0; i < 8; ++i) {
      h_ ^= (w >> (8 * i)) & 0xff;
      h_ *= 0x100000001b3ULL;
    }
  }
  std::uint64_t value() const { return h_; }

 private:
  std::uint64_t h_ = 0xcbf29ce484222325ULL;
};

struct Digest128Hash {
  std::size_t operator()(const Digest128& d) const {
    return static_cast<std::size_t>(d.hi ^ (d.lo * 0x9e3779b97f4a7c15ULL));
  }
};

}  // namespace deskrl
