#pragma once

// Shared basic types and small utilities used across the toolchain.

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace lcsynth {

using u8 = std::uint8_t;
using u16 = std::uint16_t;
using u32 = std::uint32_t;
using u64 = std::uint64_t;
using i32 = std::int32_t;
using i64 = std::int64_t;

// A contiguous address range [base, base+size).
struct AddrRange {
  u32 base = 0;
  u32 size = 0;

  bool contains(u32 addr) const { return addr - base < size; }
  bool contains(u32 addr, u32 len) const {
    return len <= size && addr - base <= size - len;
  }
  u32 end() const { return base + size; }
  bool operator==(const AddrRange&) const = default;
};

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct EncodeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DigestMismatchError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct UnknownPresetError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct UngeneratableAtomError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InfeasibleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct TooLargeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Lowercase 0x-prefixed hex, the canonical integer spelling in all files.
inline std::string to_hex(u64 v) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "0x%llx", static_cast<unsigned long long>(v));
  return buf;
}

inline u64 parse_hex(const std::string& s) {
  if (s.size() < 3 || s[0] != '0' || (s[1] != 'x' && s[1] != 'X'))
    throw ParseError("expected 0x-prefixed hex value, got '" + s + "'");
  u64 v = 0;
  for (size_t i = 2; i < s.size(); ++i) {
    char c = s[i];
    u64 d;
    if (c >= '0' && c <= '9') d = c - '0';
    else if (c >= 'a' && c <= 'f') d = c - 'a' + 10;
    else if (c >= 'A' && c <= 'F') d = c - 'A' + 10;
    else throw ParseError("bad hex digit in '" + s + "'");
    if (v >> 60) throw ParseError("hex value out of range: '" + s + "'");
    v = (v << 4) | d;
  }
  return v;
}

// FNV-1a, used for content digests of serialized documents. Stable across
// platforms; not cryptographic.
inline u64 fnv1a64(const std::string& bytes) {
  u64 h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

// Deterministic RNG. mt19937 output is fixed by the standard; reductions are
// done by hand because std distributions are not portable across libraries.
class Rng {
 public:
  explicit Rng(u64 seed) : gen_(static_cast<u32>(seed ^ (seed >> 32))) {}

  u32 next_u32() { return gen_(); }

  // uniform in [0, n), n > 0
  u32 below(u32 n) { return next_u32() % n; }

  // uniform in [lo, hi]
  i32 range(i32 lo, i32 hi) {
    return lo + static_cast<i32>(below(static_cast<u32>(hi - lo + 1)));
  }

  bool chance(u32 num, u32 den) { return below(den) < num; }

 private:
  std::mt19937 gen_;
};

// splitmix64, used to derive independent sub-seeds from a suite seed.
inline u64 mix_seed(u64 seed, u64 index) {
  u64 z = seed + 0x9e3779b97f4a7c15ull * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

}  // namespace lcsynth
