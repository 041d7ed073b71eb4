#include "qwloc/coin.hpp"

#include <algorithm>
#include <cmath>

#include "qwloc/rng.hpp"

namespace qwloc {

Site displacement(int tau, int d) {
  require_coin_index(tau, d);
  return Site::axis(std::abs(tau) - 1, tau > 0 ? 1 : -1);
}

Permutation::Permutation(int d, std::vector<int> images) : d_(d), images_(std::move(images)) {
  if (d < 1 || d > kMaxDim) throw std::invalid_argument("permutation: bad dimension");
  if (images_.size() != static_cast<std::size_t>(2 * d))
    throw std::invalid_argument("permutation: expected 2d images");
  std::vector<bool> seen(static_cast<std::size_t>(2 * d), false);
  for (int img : images_) {
    require_coin_index(img, d);
    const auto code = static_cast<std::size_t>(coin_code(img, d));
    if (seen[code]) throw std::invalid_argument("permutation: images not a bijection");
    seen[code] = true;
  }
}

Permutation Permutation::identity(int d) {
  std::vector<int> images;
  for (int c = 0; c < 2 * d; ++c) images.push_back(coin_from_code(c, d));
  return Permutation(d, std::move(images));
}

Permutation Permutation::from_cycles(int d, const std::vector<std::vector<int>>& cycles) {
  std::vector<int> images;
  for (int c = 0; c < 2 * d; ++c) images.push_back(coin_from_code(c, d));
  for (const auto& cyc : cycles) {
    if (cyc.empty()) throw std::invalid_argument("empty cycle");
    for (std::size_t i = 0; i < cyc.size(); ++i) {
      const int from = cyc[i];
      const int to = cyc[(i + 1) % cyc.size()];
      images[static_cast<std::size_t>(coin_code(from, d))] = to;
    }
  }
  return Permutation(d, std::move(images));  // ctor re-validates bijectivity
}

int Permutation::inverse_apply(int tau) const {
  for (int c = 0; c < 2 * d_; ++c) {
    const int src = coin_from_code(c, d_);
    if (apply(src) == tau) return src;
  }
  throw std::logic_error("permutation: inverse lookup failed");
}

bool Permutation::is_fixed_point_free() const {
  for (int c = 0; c < 2 * d_; ++c) {
    const int tau = coin_from_code(c, d_);
    if (apply(tau) == tau) return false;
  }
  return true;
}

CycleDecomposition decompose_cycles(const Permutation& pi) {
  const int d = pi.dim();
  CycleDecomposition dec;
  dec.d = d;
  std::vector<bool> used(static_cast<std::size_t>(2 * d), false);
  for (int c = 0; c < 2 * d; ++c) {
    if (used[static_cast<std::size_t>(c)]) continue;
    const int leader = coin_from_code(c, d);
    if (pi.apply(leader) == leader) {
      used[static_cast<std::size_t>(c)] = true;
      dec.fixed_points.push_back(leader);
      continue;
    }
    Cycle cyc;
    int cur = leader;
    do {
      used[static_cast<std::size_t>(coin_code(cur, d))] = true;
      cyc.elements.push_back(cur);
      cur = pi.apply(cur);
    } while (cur != leader);
    dec.cycles.push_back(std::move(cyc));
  }
  return dec;
}

Permutation recompose(const CycleDecomposition& dec) {
  std::vector<std::vector<int>> cycles;
  for (const auto& c : dec.cycles) cycles.push_back(c.elements);
  return Permutation::from_cycles(dec.d, cycles);
}

LocalizationCheck check_localizing(const Permutation& pi) {
  const int d = pi.dim();
  LocalizationCheck out;
  out.fixed_point_free = pi.is_fixed_point_free();
  const CycleDecomposition dec = decompose_cycles(pi);
  bool sums_vanish = true;
  for (const auto& cyc : dec.cycles) {
    Site sum;
    for (int tau : cyc.elements) sum = sum + displacement(tau, d);
    if (sum.sup_norm() != 0) sums_vanish = false;
    out.cycle_displacement_sums.push_back(sum);
  }
  out.localizing = out.fixed_point_free && sums_vanish;
  return out;
}

CoinMatrix permutation_matrix(const Permutation& pi) {
  const int d = pi.dim();
  const int n = 2 * d;
  CoinMatrix m = CoinMatrix::Zero(n, n);
  for (int col = 0; col < n; ++col) {
    const int tau = coin_from_code(col, d);
    m(coin_code(pi.apply(tau), d), col) = Complex(1.0, 0.0);
  }
  return m;
}

double coin_distance(const CoinMatrix& c, const CoinMatrix& d) {
  if (c.rows() != d.rows() || c.cols() != d.cols())
    throw std::invalid_argument("coin_distance: dimension mismatch");
  Eigen::JacobiSVD<CoinMatrix> svd(c - d);
  return svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
}

CoinMatrix perturb_coin(const CoinMatrix& base, double delta, std::uint64_t seed) {
  const auto n = base.rows();
  if (base.cols() != n) throw std::invalid_argument("perturb_coin: base not square");
  if (delta < 0.0) throw std::invalid_argument("perturb_coin: delta must be >= 0");
  if (delta >= 2.0)
    throw std::invalid_argument("perturb_coin: delta >= 2 exceeds the diameter of U(n)");
  if (delta == 0.0) return base;

  // Random Hermitian H; exp(itH) built from its eigendecomposition is
  // unitary to machine precision, and ||exp(itH) - I|| = max_j |e^{it mu_j} - 1|
  // is available in closed form, so the norm target is met by bisection
  // on t without repeated matrix exponentials.
  CounterRng rng(derive_seed(seed, 0xc01f0eULL));
  CoinMatrix a(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) a(i, j) = Complex(rng.next_normal(), rng.next_normal());
  CoinMatrix h = (a + a.adjoint()) / 2.0;
  Eigen::SelfAdjointEigenSolver<CoinMatrix> es(h);
  Eigen::VectorXd mu = es.eigenvalues();
  const double mu_max = mu.cwiseAbs().maxCoeff();
  if (mu_max == 0.0) throw std::runtime_error("perturb_coin: degenerate random direction");
  mu /= mu_max;

  const auto norm_at = [&](double t) {
    double m = 0.0;
    for (Eigen::Index j = 0; j < mu.size(); ++j)
      m = std::max(m, std::abs(Complex(std::cos(t * mu(j)) - 1.0, std::sin(t * mu(j)))));
    return m;
  };

  // 2|sin(t/2)| <= delta < 2 keeps the hit inside the monotone branch.
  double lo = 0.0, hi = 2.0 * std::asin(delta / 2.0);
  double t = hi;
  for (int it = 0; it < 200; ++it) {
    const double v = norm_at(t);
    if (v >= 0.9 * delta && v <= delta) break;
    if (v > delta)
      hi = t;
    else
      lo = t;
    t = (lo + hi) / 2.0;
  }
  const double v = norm_at(t);
  if (v < 0.9 * delta || v > delta)
    throw std::runtime_error("perturb_coin: norm targeting failed to converge");

  Eigen::VectorXcd diag(mu.size());
  for (Eigen::Index j = 0; j < mu.size(); ++j)
    diag(j) = Complex(std::cos(t * mu(j)), std::sin(t * mu(j)));
  CoinMatrix expm = es.eigenvectors() * diag.asDiagonal() * es.eigenvectors().adjoint();
  return expm * base;
}

CoinMatrix dft_coin(int d) {
  const int n = 2 * d;
  CoinMatrix f(n, n);
  const double s = 1.0 / std::sqrt(static_cast<double>(n));
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) {
      const double a = -2.0 * M_PI * j * k / n;
      f(j, k) = s * Complex(std::cos(a), std::sin(a));
    }
  return f;
}

CoinMatrix random_unitary(int n, std::uint64_t seed) {
  CounterRng rng(derive_seed(seed, 0x4a11));
  CoinMatrix a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = Complex(rng.next_normal(), rng.next_normal());
  Eigen::HouseholderQR<CoinMatrix> qr(a);
  CoinMatrix q = qr.householderQ();
  // Fix the phase ambiguity so the result is a deterministic function of the seed.
  CoinMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < n; ++j) {
    const Complex rjj = r(j, j);
    const double m = std::abs(rjj);
    if (m > 0) q.col(j) *= rjj / m;
  }
  return q;
}

double unitarity_residual(const CoinMatrix& c) {
  return (c.adjoint() * c - CoinMatrix::Identity(c.rows(), c.cols())).cwiseAbs().maxCoeff();
}

}  // namespace qwloc
