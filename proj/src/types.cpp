#include "qwloc/types.hpp"

#include "qwloc/rng.hpp"

namespace qwloc {

std::string to_string(const Site& s, int d) {
  std::string out = "(";
  for (int i = 0; i < d; ++i) {
    if (i) out += ",";
    out += std::to_string(s[i]);
  }
  out += ")";
  return out;
}

int coin_code(int tau, int d) {
  require_coin_index(tau, d);
  return 2 * (std::abs(tau) - 1) + (tau < 0 ? 1 : 0);
}

int coin_from_code(int code, int d) {
  if (code < 0 || code >= 2 * d) throw std::out_of_range("coin code out of range");
  const int axis = code / 2 + 1;
  return (code % 2 == 0) ? axis : -axis;
}

void require_coin_index(int tau, int d) {
  if (d < 1 || d > kMaxDim)
    throw std::invalid_argument("dimension must be in [1," + std::to_string(kMaxDim) + "]");
  if (tau == 0 || std::abs(tau) > d)
    throw std::out_of_range("coin index " + std::to_string(tau) + " invalid for d=" +
                            std::to_string(d));
}

std::string to_string(const BasisState& s, int d) {
  return "|" + std::to_string(s.tau) + "," + to_string(s.site, d) + ">";
}

std::vector<Site> BoxRegion::sites() const {
  std::vector<Site> out;
  out.reserve(static_cast<std::size_t>(site_count()));
  for (std::int64_t i = 0; i < site_count(); ++i) out.push_back(site_at(i));
  return out;
}

std::size_t SiteHash::operator()(const Site& s) const {
  std::uint64_t h = 0x51ab5e5715ULL;
  for (int i = 0; i < kMaxDim; ++i) {
    h = hash_combine(h, static_cast<std::uint64_t>(static_cast<std::int64_t>(s.x[i])));
  }
  return static_cast<std::size_t>(h);
}

std::size_t BasisStateHash::operator()(const BasisState& s) const {
  return static_cast<std::size_t>(
      hash_combine(SiteHash{}(s.site), static_cast<std::uint64_t>(static_cast<std::int64_t>(s.tau))));
}

}  // namespace qwloc
