#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace qwloc {

using Complex = std::complex<double>;

// Lattice dimension is a runtime parameter; sites carry a fixed-size
// coordinate array so they stay cheap to copy and hash. Coordinates
// beyond the active dimension must be zero.
inline constexpr int kMaxDim = 4;

struct Site {
  std::array<std::int32_t, kMaxDim> x{};

  static Site zero() { return Site{}; }

  static Site axis(int i, int value) {
    Site s;
    s.x[static_cast<std::size_t>(i)] = value;
    return s;
  }

  std::int32_t operator[](int i) const { return x[static_cast<std::size_t>(i)]; }
  std::int32_t& operator[](int i) { return x[static_cast<std::size_t>(i)]; }

  friend Site operator+(Site a, const Site& b) {
    for (int i = 0; i < kMaxDim; ++i) a.x[i] += b.x[i];
    return a;
  }
  friend Site operator-(Site a, const Site& b) {
    for (int i = 0; i < kMaxDim; ++i) a.x[i] -= b.x[i];
    return a;
  }
  friend Site operator-(Site a) {
    for (int i = 0; i < kMaxDim; ++i) a.x[i] = -a.x[i];
    return a;
  }
  friend bool operator==(const Site& a, const Site& b) { return a.x == b.x; }
  friend bool operator!=(const Site& a, const Site& b) { return !(a == b); }
  // Lexicographic; used wherever a deterministic site ordering is needed.
  friend bool operator<(const Site& a, const Site& b) { return a.x < b.x; }

  int sup_norm() const {
    int m = 0;
    for (int i = 0; i < kMaxDim; ++i) m = std::max(m, std::abs(static_cast<int>(x[i])));
    return m;
  }
};

std::string to_string(const Site& s, int d);

// Coin index tau with 1 <= |tau| <= d. Canonical ordering of the coin
// basis is (+1, -1, +2, -2, ..., +d, -d); code(tau) is the position of
// tau in that list.
int coin_code(int tau, int d);
int coin_from_code(int code, int d);
void require_coin_index(int tau, int d);

struct BasisState {
  int tau = 1;
  Site site;

  friend bool operator==(const BasisState& a, const BasisState& b) {
    return a.tau == b.tau && a.site == b.site;
  }
  friend bool operator<(const BasisState& a, const BasisState& b) {
    if (a.site != b.site) return a.site < b.site;
    return a.tau < b.tau;
  }
};

std::string to_string(const BasisState& s, int d);

// Closed sup-norm box {x : |x - center| <= radius}.
struct BoxRegion {
  int d = 1;
  Site center;
  int radius = 0;

  bool contains(const Site& s) const { return (s - center).sup_norm() <= radius; }

  std::int64_t site_count() const {
    std::int64_t n = 1;
    for (int i = 0; i < d; ++i) n *= 2 * static_cast<std::int64_t>(radius) + 1;
    return n;
  }

  // Row-major linear index over the box, first coordinate slowest.
  std::int64_t linear_index(const Site& s) const {
    std::int64_t idx = 0;
    for (int i = 0; i < d; ++i) {
      const int off = s[i] - center[i] + radius;
      idx = idx * (2 * static_cast<std::int64_t>(radius) + 1) + off;
    }
    return idx;
  }

  Site site_at(std::int64_t idx) const {
    Site s;
    const std::int64_t w = 2 * static_cast<std::int64_t>(radius) + 1;
    for (int i = d - 1; i >= 0; --i) {
      s[i] = static_cast<std::int32_t>(idx % w) - radius + center[i];
      idx /= w;
    }
    return s;
  }

  std::vector<Site> sites() const;

  friend bool operator==(const BoxRegion& a, const BoxRegion& b) {
    return a.d == b.d && a.center == b.center && a.radius == b.radius;
  }
};

struct SiteHash {
  std::size_t operator()(const Site& s) const;
};

struct BasisStateHash {
  std::size_t operator()(const BasisState& s) const;
};

}  // namespace qwloc
