#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "qwloc/coin.hpp"
#include "qwloc/disorder.hpp"
#include "qwloc/types.hpp"

namespace qwloc {

using SparseOp = Eigen::SparseMatrix<Complex>;

// Closed orbit of basis states traced by the permutation walk from
// anchor (tau, x): member t = |pi^t(tau), x + sum_{s=0..t} r(pi^s(tau))>.
// One walk step maps member t to member t+1 (mod m), so the span is
// invariant whenever the cycle displacement sum vanishes.
struct InvariantBlock {
  int anchor_tau = 1;
  Site anchor_site;
  std::vector<BasisState> members;

  int length() const { return static_cast<int>(members.size()); }
};

InvariantBlock make_block(const Permutation& pi, int tau, const Site& anchor);

// Anchor positions under which this orbit is reachable: member t of the
// orbit is member 0 of the block anchored at (member.tau, member.site -
// r(member.tau)). Used to decide which side of a box an orbit belongs to.
std::vector<Site> block_anchor_sites(const InvariantBlock& block, int d);
bool block_anchored_in(const InvariantBlock& block, const BoxRegion& box, int d);

// Blocks for every (anchor, coin start) pair, deduplicated: two anchors
// generating the same orbit keep only the first in enumeration order
// (anchors as given, starts in canonical coin order). Requires a
// localizing permutation, otherwise orbits do not close.
std::vector<InvariantBlock> enumerate_blocks(const Permutation& pi,
                                             const std::vector<Site>& anchors);

// Ordered basis made of whole blocks: block order as enumerated, members
// in path order. This fixes the row/column layout of every materialized
// operator.
struct BlockBasis {
  std::vector<InvariantBlock> blocks;
  std::vector<BasisState> states;
  std::unordered_map<BasisState, int, BasisStateHash> index;

  int dim() const { return static_cast<int>(states.size()); }
  bool contains(const BasisState& s) const { return index.count(s) > 0; }
  void append_block(InvariantBlock block);
};

// Span of all blocks anchored in the box (anchors in lexicographic site
// order). This is the subspace the finite-volume restriction acts on.
BlockBasis box_basis(const Permutation& pi, const BoxRegion& box);

// Span of the remaining blocks of the outer basis: anchored somewhere in
// outer, nowhere in inner. Together with box_basis(inner) this partitions
// the outer basis states.
BlockBasis complement_basis(const Permutation& pi, const BoxRegion& inner,
                            const BoxRegion& outer);

// Site-dependent coin rule: collar coin on the shells {r-1, r, r+1}
// around the center for each collar radius r, bulk coin elsewhere.
struct CoinAssignment {
  int d = 1;
  Site center;
  CoinMatrix bulk;
  CoinMatrix collar;
  std::vector<int> collar_radii;

  bool in_collar(const Site& s) const {
    const int dist = (s - center).sup_norm();
    for (int r : collar_radii)
      if (std::abs(dist - r) <= 1) return true;
    return false;
  }
  const CoinMatrix& at(const Site& s) const { return in_collar(s) ? collar : bulk; }
};

// One-step operator description for array-based application.
struct WalkSpec {
  int d = 1;
  BoxRegion box;  // array region; holds every site the walk may touch
  CoinAssignment coins;
  PhaseField field;
  bool closed = false;  // outermost collar closes the box subspace
};

// Uniform-coin walk on a box; caller must keep the light cone inside.
WalkSpec open_walk_spec(int d, const CoinMatrix& coin, const PhaseField& field,
                        const BoxRegion& box);

// Desk-scale stand-in for the infinite-lattice walk: bulk coin everywhere
// except a collar of the permutation coin at the outer radius, which
// closes the box subspace exactly. Optional extra collars carve out the
// finite-volume operators inside the same array.
WalkSpec closed_walk_spec(int d, const CoinMatrix& coin, const Permutation& pi,
                          int outer_radius, const Site& center, const PhaseField& field,
                          const std::vector<int>& inner_collars = {});

struct StateVector {
  int d = 1;
  BoxRegion region;
  std::vector<Complex> amp;  // index = region.linear_index(site) * 2d + coin_code

  static StateVector zero(int d, const BoxRegion& region);
  static StateVector point(int d, const BoxRegion& region, int tau, const Site& site);

  std::int64_t index(int tau, const Site& site) const {
    return region.linear_index(site) * 2 * d + coin_code(tau, d);
  }
  Complex& at(int tau, const Site& site) { return amp[static_cast<std::size_t>(index(tau, site))]; }
  Complex at(int tau, const Site& site) const {
    return amp[static_cast<std::size_t>(index(tau, site))];
  }
  double norm() const;
};

// One step of U = D(omega) S(coins): matrix-free gather
//   (U psi)(tau, y) = e^{i omega_y^tau} sum_sigma C(y - r(tau))_{tau,sigma} psi(sigma, y - r(tau)).
// Open specs reject states whose support touches the array boundary.
StateVector apply_walk(const WalkSpec& spec, const StateVector& psi);

inline constexpr int kDefaultDimCap = 20000;

// Matrix of the walk restricted to the given block basis. Throws if a
// nonzero coin entry would map a basis state outside the basis: a well
// formed (basis, coins) pair never triggers this, which is exactly the
// invariance statement.
SparseOp materialize_sparse(const BlockBasis& basis, const CoinAssignment& coins,
                            const PhaseField& field, int dim_cap = kDefaultDimCap);
Eigen::MatrixXcd materialize_dense(const BlockBasis& basis, const CoinAssignment& coins,
                                   const PhaseField& field, int dim_cap = kDefaultDimCap);

double unitarity_residual_sparse(const SparseOp& m);

enum class RestrictionSide { Box, ComplementCollar };

// Finite-volume restriction: the walk with the permutation coin on the
// collar {L-1, L, L+1}, restricted to the blocks anchored in the box
// (Box) or to the remaining blocks of an enclosing closed box
// (ComplementCollar).
struct FiniteRestriction {
  RestrictionSide side = RestrictionSide::Box;
  int boundary_radius = 0;
  BlockBasis basis;
  SparseOp matrix;
  double unitarity_residual = 0.0;
};

FiniteRestriction build_finite_restriction(int L, const CoinMatrix& coin, const Permutation& pi,
                                           const PhaseField& field, RestrictionSide side,
                                           const Site& center, int outer_radius = -1,
                                           int dim_cap = kDefaultDimCap);

// Defect T^L = U - U^L on the outer basis: columns live on the collar
// source sites {L-1, L, L+1}, entries carry C - C_pi. norm_ratio reports
// ||T^L|| / ||C - C_pi||.
struct DefectOperator {
  SparseOp matrix;
  double norm = 0.0;
  double norm_ratio = 0.0;
};

DefectOperator defect_operator(int L, const CoinMatrix& coin, const Permutation& pi,
                               const PhaseField& field, const BlockBasis& outer_basis,
                               const Site& center);

}  // namespace qwloc
