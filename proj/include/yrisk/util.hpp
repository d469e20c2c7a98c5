#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "yrisk/error.hpp"

namespace yrisk {

inline constexpr const char* kLibraryVersion = "0.1.0";

// splitmix64 step; also the core of seed derivation.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Derive an independent child seed from (seed, salt). Used for per-tree,
// per-fold and per-cell seeds so parallel order never changes results.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t s = seed ^ (salt * 0xff51afd7ed558ccdull + 0x2545f4914f6cdd1dull);
  return splitmix64(s);
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::string_view tag) {
  std::uint64_t h = 0xcbf29ce484222325ull;  // FNV-1a
  for (unsigned char c : tag) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return mix_seed(seed, h);
}

// Deterministic generator with a fixed, platform-independent algorithm.
// libstdc++ distributions are avoided on purpose: their output is
// implementation-defined and would break byte-reproducible reports.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() { return splitmix64(state_); }

  // uniform in [0, 1)
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  // uniform in [0, n); modulo bias is irrelevant for n << 2^64
  std::size_t next_below(std::size_t n) { return static_cast<std::size_t>(next_u64() % n); }

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = next_below(i);
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::uint64_t state_;
};

// Natural question ordering: q2 < q15 < q25. Non-question ids sort
// lexicographically after all q-numbered ids.
inline std::pair<long long, std::string> qid_key(std::string_view id) {
  if (id.size() > 1 && id[0] == 'q') {
    long long num = 0;
    auto [p, ec] = std::from_chars(id.data() + 1, id.data() + id.size(), num);
    if (ec == std::errc() && p == id.data() + id.size()) return {num, std::string(id)};
  }
  return {std::numeric_limits<long long>::max(), std::string(id)};
}

inline bool qid_less(std::string_view a, std::string_view b) { return qid_key(a) < qid_key(b); }

// Shortest round-trip representation; deterministic and lossless.
inline std::string fmt_double(double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, r.ptr);
}

inline std::string fmt_fixed(double v, int precision) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", precision, v);
  return std::string(buf);
}

// Writes via a .partial temp file and renames into place, so a crash can
// never leave a truncated report under the final name.
inline void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  std::filesystem::path tmp = path;
  tmp += ".partial";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open for writing: " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open: " + path.string());
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace yrisk
