#include <unordered_set>

#include "doctest.h"
#include "qwloc/rng.hpp"
#include "qwloc/walk.hpp"
#include "test_helpers.hpp"

using namespace qwloc;
using qwloc::testing::operator_norm_oracle;

namespace {

const Permutation kSwap1 = Permutation::from_cycles(1, {{1, -1}});
const Permutation kSwap2 = Permutation::from_cycles(2, {{1, -1}, {2, -2}});
const Permutation kFour2 = Permutation::from_cycles(2, {{1, -1, 2, -2}});

PhaseField uniform_field(int d, int radius, std::uint64_t seed) {
  return sample_field(BoxRegion{d, Site::zero(), radius}, PhaseDistribution::uniform(), seed);
}

PhaseField zero_field(int d, int radius) {
  return sample_field(BoxRegion{d, Site::zero(), radius}, PhaseDistribution::zero_phases(), 0);
}

// Independent count of the box-restriction basis: states reachable by
// walking each anchored orbit, collected by brute force over anchors.
std::unordered_set<BasisState, BasisStateHash> brute_force_states(const Permutation& pi,
                                                                  const BoxRegion& box) {
  std::unordered_set<BasisState, BasisStateHash> states;
  for (const auto& x : box.sites()) {
    for (int c = 0; c < 2 * pi.dim(); ++c) {
      const InvariantBlock b = make_block(pi, coin_from_code(c, pi.dim()), x);
      for (const auto& m : b.members) states.insert(m);
    }
  }
  return states;
}

}  // namespace

TEST_CASE("block paths close and satisfy the member recurrence") {
  SUBCASE("d=1 swap: the two-member orbit") {
    const InvariantBlock b = make_block(kSwap1, 1, Site::zero());
    REQUIRE(b.length() == 2);
    CHECK(b.members[0] == BasisState{1, Site::axis(0, 1)});
    CHECK(b.members[1] == BasisState{-1, Site::zero()});
  }
  SUBCASE("member t sits at anchor + partial displacement sum") {
    const InvariantBlock b = make_block(kFour2, -2, Site::axis(1, 3));
    REQUIRE(b.length() == 4);
    Site expected = Site::axis(1, 3);
    int tau = -2;
    for (int t = 0; t < 4; ++t) {
      expected = expected + displacement(tau, 2);
      CHECK(b.members[static_cast<std::size_t>(t)] == BasisState{tau, expected});
      tau = kFour2.apply(tau);
    }
  }
  SUBCASE("walking the last member returns to the first") {
    const InvariantBlock b = make_block(kSwap2, 2, Site::zero());
    const BasisState& last = b.members.back();
    const int tau_next = kSwap2.apply(last.tau);
    CHECK(BasisState{tau_next, last.site + displacement(tau_next, 2)} == b.members.front());
  }
  SUBCASE("non-localizing permutations do not close") {
    const Permutation bad = Permutation::from_cycles(2, {{1, 2}, {-1, -2}});
    CHECK_THROWS_AS(make_block(bad, 1, Site::zero()), std::invalid_argument);
  }
}

TEST_CASE("enumerate_blocks deduplicates shared orbits") {
  SUBCASE("two anchors sharing a member give one block") {
    const std::vector<Site> anchors{Site::zero(), Site::axis(0, 1)};
    const auto blocks = enumerate_blocks(kSwap1, anchors);
    // Orbits anchored at 0: {(+1,1),(-1,0)} and {(-1,-1),(+1,0)};
    // anchor 1 re-generates the first orbit via tau=-1 plus one new one.
    CHECK(blocks.size() == 3);
  }
  SUBCASE("blocks partition the states they cover") {
    const auto blocks = enumerate_blocks(kFour2, BoxRegion{2, Site::zero(), 3}.sites());
    std::unordered_set<BasisState, BasisStateHash> seen;
    for (const auto& b : blocks)
      for (const auto& m : b.members) CHECK(seen.insert(m).second);
  }
}

TEST_CASE("box basis dimension matches an independent enumeration") {
  SUBCASE("d=1, L=2 swap walk") {
    const BoxRegion box{1, Site::zero(), 2};
    const BlockBasis basis = box_basis(kSwap1, box);
    CHECK(basis.dim() == static_cast<int>(brute_force_states(kSwap1, box).size()));
    // 2 states per site on 5 sites plus the boundary spill of the rim orbits.
    CHECK(basis.dim() == 12);
  }
  SUBCASE("d=2, L=3 double swap") {
    const BoxRegion box{2, Site::zero(), 3};
    const BlockBasis basis = box_basis(kSwap2, box);
    CHECK(basis.dim() == static_cast<int>(brute_force_states(kSwap2, box).size()));
    int member_sum = 0;
    for (const auto& b : basis.blocks) member_sum += b.length();
    CHECK(basis.dim() == member_sum);
  }
  SUBCASE("bulk states are all covered: dimension count on the interior") {
    const BoxRegion box{2, Site::zero(), 3};
    const BlockBasis basis = box_basis(kFour2, box);
    const BoxRegion interior{2, Site::zero(), 2};
    for (std::int64_t si = 0; si < interior.site_count(); ++si) {
      for (int c = 0; c < 4; ++c)
        CHECK(basis.contains(BasisState{coin_from_code(c, 2), interior.site_at(si)}));
    }
  }
}

TEST_CASE("apply_walk: single steps against hand calculations") {
  SUBCASE("d=1 swap, zero phases: coin flips first, then the shift follows the new coin") {
    const PhaseField field = zero_field(1, 6);
    const WalkSpec spec = open_walk_spec(1, permutation_matrix(kSwap1), field,
                                         BoxRegion{1, Site::zero(), 5});
    const StateVector psi0 = StateVector::point(1, spec.box, 1, Site::zero());
    const StateVector psi1 = apply_walk(spec, psi0);
    CHECK(psi1.at(-1, Site::axis(0, -1)) == Complex(1, 0));
    // One more step returns to the start: the orbit has period 2.
    const StateVector psi2 = apply_walk(spec, psi1);
    CHECK(psi2.at(1, Site::zero()) == Complex(1, 0));
  }
  SUBCASE("coin column convention: C acts before the shift") {
    // Hadamard-like coin on d=1: amplitudes split left and right.
    CoinMatrix h(2, 2);
    h(0, 0) = Complex(1, 0);
    h(0, 1) = Complex(1, 0);
    h(1, 0) = Complex(1, 0);
    h(1, 1) = Complex(-1, 0);
    h /= std::sqrt(2.0);
    const PhaseField field = zero_field(1, 6);
    const WalkSpec spec = open_walk_spec(1, h, field, BoxRegion{1, Site::zero(), 5});
    const StateVector psi1 = apply_walk(spec, StateVector::point(1, spec.box, -1, Site::zero()));
    CHECK(psi1.at(1, Site::axis(0, 1)).real() == doctest::Approx(1.0 / std::sqrt(2.0)));
    CHECK(psi1.at(-1, Site::axis(0, -1)).real() == doctest::Approx(-1.0 / std::sqrt(2.0)));
  }
  SUBCASE("norm preserved to 1e-12 for a generic unitary coin") {
    const PhaseField field = uniform_field(2, 7, 21);
    const WalkSpec spec =
        open_walk_spec(2, random_unitary(4, 5), field, BoxRegion{2, Site::zero(), 6});
    StateVector psi = StateVector::zero(2, spec.box);
    CounterRng rng(3);
    for (std::int64_t si = 0; si < spec.box.site_count(); ++si) {
      const Site s = spec.box.site_at(si);
      if ((s - spec.box.center).sup_norm() > 2) continue;
      for (int c = 0; c < 4; ++c)
        psi.at(coin_from_code(c, 2), s) = Complex(rng.next_normal(), rng.next_normal());
    }
    const double n0 = psi.norm();
    for (auto& a : psi.amp) a /= n0;
    const StateVector out = apply_walk(spec, psi);
    CHECK(std::abs(out.norm() - 1.0) <= 1e-12);
  }
  SUBCASE("U^2 = identity for the d=2 double swap with zero phases") {
    const PhaseField field = zero_field(2, 7);
    const WalkSpec spec = open_walk_spec(2, permutation_matrix(kSwap2), field,
                                         BoxRegion{2, Site::zero(), 6});
    for (int c = 0; c < 4; ++c) {
      const Site x = Site::axis(0, 1) + Site::axis(1, -2);
      const StateVector psi0 = StateVector::point(2, spec.box, coin_from_code(c, 2), x);
      const StateVector psi2 = apply_walk(spec, apply_walk(spec, psi0));
      CHECK(psi2.at(coin_from_code(c, 2), x) == Complex(1, 0));
      CHECK(std::abs(psi2.norm() - 1.0) <= 1e-15);
    }
  }
  SUBCASE("support touching the boundary of an open spec is an error") {
    const PhaseField field = zero_field(1, 4);
    const WalkSpec spec = open_walk_spec(1, permutation_matrix(kSwap1), field,
                                         BoxRegion{1, Site::zero(), 3});
    const StateVector edge = StateVector::point(1, spec.box, 1, Site::axis(0, 3));
    CHECK_THROWS_AS(apply_walk(spec, edge), std::runtime_error);
  }
}

TEST_CASE("materialized restriction agrees with apply_walk on basis vectors") {
  const PhaseField field = uniform_field(2, 8, 33);
  const CoinMatrix coin = perturb_coin(permutation_matrix(kSwap2), 0.3, 2);
  const FiniteRestriction fr = build_finite_restriction(
      3, coin, kSwap2, field, RestrictionSide::Box, Site::zero());
  const CoinAssignment coins{2, Site::zero(), coin, permutation_matrix(kSwap2), {3}};

  // Drive the same operator matrix-free on an array and compare columns.
  const WalkSpec spec{2, BoxRegion{2, Site::zero(), 6}, coins, field, true};
  double worst = 0.0;
  for (int col = 0; col < fr.basis.dim(); ++col) {
    const BasisState& src = fr.basis.states[static_cast<std::size_t>(col)];
    const StateVector image = apply_walk(spec, StateVector::point(2, spec.box, src.tau, src.site));
    Eigen::VectorXcd column = Eigen::VectorXcd::Zero(fr.basis.dim());
    for (SparseOp::InnerIterator it(fr.matrix, col); it; ++it) column(it.row()) = it.value();
    for (int row = 0; row < fr.basis.dim(); ++row) {
      const BasisState& dst = fr.basis.states[static_cast<std::size_t>(row)];
      worst = std::max(worst, std::abs(column(row) - image.at(dst.tau, dst.site)));
    }
  }
  CHECK(worst <= 1e-13);
  CHECK(fr.unitarity_residual <= 1e-10);
}

TEST_CASE("block invariance of the permutation walk is exact") {
  const PhaseField field = uniform_field(2, 8, 44);
  const Permutation& pi = kSwap2;
  const CoinMatrix cpi = permutation_matrix(pi);
  const FiniteRestriction fr =
      build_finite_restriction(3, cpi, pi, field, RestrictionSide::Box, Site::zero());
  // With C = C_pi every column holds exactly one entry, inside its own block.
  std::vector<int> block_of(static_cast<std::size_t>(fr.basis.dim()));
  int bi = 0, off = 0;
  for (const auto& b : fr.basis.blocks) {
    for (int t = 0; t < b.length(); ++t) block_of[static_cast<std::size_t>(off + t)] = bi;
    off += b.length();
    ++bi;
  }
  for (int col = 0; col < fr.basis.dim(); ++col) {
    int entries = 0;
    for (SparseOp::InnerIterator it(fr.matrix, col); it; ++it) {
      ++entries;
      CHECK(block_of[static_cast<std::size_t>(it.row())] ==
            block_of[static_cast<std::size_t>(col)]);
      CHECK(std::abs(std::abs(it.value()) - 1.0) <= 1e-15);
    }
    CHECK(entries == 1);
  }
}

TEST_CASE("box and complement bases partition the outer basis") {
  const int L = 3, R = 8;
  const PhaseField field = uniform_field(2, R + 2, 55);
  const CoinMatrix coin = perturb_coin(permutation_matrix(kSwap2), 0.4, 9);
  const BlockBasis outer = box_basis(kSwap2, BoxRegion{2, Site::zero(), R});
  const BlockBasis inner = box_basis(kSwap2, BoxRegion{2, Site::zero(), L});
  const BlockBasis compl_basis =
      complement_basis(kSwap2, BoxRegion{2, Site::zero(), L}, BoxRegion{2, Site::zero(), R});

  SUBCASE("dimensions add up") { CHECK(inner.dim() + compl_basis.dim() == outer.dim()); }

  SUBCASE("U^L has exactly zero coupling between the two sides") {
    const CoinAssignment coins{2, Site::zero(), coin, permutation_matrix(kSwap2), {L, R}};
    const SparseOp ul = materialize_sparse(outer, coins, field);
    std::vector<bool> in_side(static_cast<std::size_t>(outer.dim()), false);
    for (int i = 0; i < outer.dim(); ++i)
      in_side[static_cast<std::size_t>(i)] =
          inner.contains(outer.states[static_cast<std::size_t>(i)]);
    for (int k = 0; k < ul.outerSize(); ++k) {
      for (SparseOp::InnerIterator it(ul, k); it; ++it) {
        CHECK(in_side[static_cast<std::size_t>(it.row())] ==
              in_side[static_cast<std::size_t>(it.col())]);
      }
    }
  }

  SUBCASE("complement restriction is unitary too") {
    const FiniteRestriction fc = build_finite_restriction(
        L, coin, kSwap2, field, RestrictionSide::ComplementCollar, Site::zero(), R);
    CHECK(fc.unitarity_residual <= 1e-10);
    CHECK(fc.basis.dim() == compl_basis.dim());
  }
}

TEST_CASE("materialized operators are unitary and respect translation covariance") {
  const Permutation& pi = kFour2;
  const CoinMatrix coin = perturb_coin(permutation_matrix(pi), 0.2, 10);
  const PhaseField field = uniform_field(2, 12, 66);

  SUBCASE("unitarity of the restriction for a generic coin") {
    const FiniteRestriction fr =
        build_finite_restriction(4, coin, pi, field, RestrictionSide::Box, Site::zero());
    CHECK(fr.unitarity_residual <= 1e-10);
  }

  SUBCASE("translated field and shifted box give the identical matrix") {
    const Site a = Site::axis(0, 2) + Site::axis(1, -1);
    const BlockBasis at_origin = box_basis(pi, BoxRegion{2, Site::zero(), 3});
    const BlockBasis at_a = box_basis(pi, BoxRegion{2, a, 3});
    const CoinAssignment coins0{2, Site::zero(), coin, permutation_matrix(pi), {3}};
    const CoinAssignment coins_a{2, a, coin, permutation_matrix(pi), {3}};
    const SparseOp m_shifted = materialize_sparse(at_a, coins_a, field);
    const SparseOp m_translated = materialize_sparse(at_origin, coins0, field.translated(a));
    REQUIRE(m_shifted.rows() == m_translated.rows());
    const Eigen::MatrixXcd diff = Eigen::MatrixXcd(m_shifted) - Eigen::MatrixXcd(m_translated);
    CHECK(diff.cwiseAbs().maxCoeff() == 0.0);  // exact: same hashed phases
  }
}

TEST_CASE("defect operator: support, exactness at C_pi, and norm bound") {
  const int L = 3, R = 8;
  const Permutation& pi = kSwap2;
  const PhaseField field = uniform_field(2, R + 2, 77);
  const BlockBasis outer = box_basis(pi, BoxRegion{2, Site::zero(), R});

  SUBCASE("C = C_pi gives T = 0 exactly") {
    const DefectOperator t =
        defect_operator(L, permutation_matrix(pi), pi, field, outer, Site::zero());
    CHECK(t.norm == 0.0);
    CHECK(t.matrix.nonZeros() == 0);
  }

  SUBCASE("columns live on the collar shells only") {
    const CoinMatrix coin = perturb_coin(permutation_matrix(pi), 0.1, 4);
    const DefectOperator t = defect_operator(L, coin, pi, field, outer, Site::zero());
    CHECK(t.matrix.nonZeros() > 0);
    for (int k = 0; k < t.matrix.outerSize(); ++k) {
      for (SparseOp::InnerIterator it(t.matrix, k); it; ++it) {
        const int shell =
            (outer.states[static_cast<std::size_t>(it.col())].site - Site::zero()).sup_norm();
        CHECK(shell >= L - 1);
        CHECK(shell <= L + 1);
      }
    }
  }

  SUBCASE("T equals U - U^L entrywise") {
    const CoinMatrix coin = perturb_coin(permutation_matrix(pi), 0.1, 4);
    const CoinAssignment coins_u{2, Site::zero(), coin, permutation_matrix(pi), {R}};
    const CoinAssignment coins_ul{2, Site::zero(), coin, permutation_matrix(pi), {L, R}};
    const Eigen::MatrixXcd u = materialize_dense(outer, coins_u, field);
    const Eigen::MatrixXcd ul = materialize_dense(outer, coins_ul, field);
    const DefectOperator t = defect_operator(L, coin, pi, field, outer, Site::zero());
    CHECK((u - ul - Eigen::MatrixXcd(t.matrix)).cwiseAbs().maxCoeff() <= 1e-15);
  }

  SUBCASE("norm bounded by a small multiple of ||C - C_pi|| across L, via dense SVD oracle") {
    const CoinMatrix coin = perturb_coin(permutation_matrix(pi), 0.1, 4);
    const double dist = coin_distance(coin, permutation_matrix(pi));
    for (int l = 3; l <= 8; ++l) {
      const PhaseField wide = uniform_field(2, l + 7, 78);
      const BlockBasis big = box_basis(pi, BoxRegion{2, Site::zero(), l + 5});
      const DefectOperator t = defect_operator(l, coin, pi, wide, big, Site::zero());
      CHECK(t.norm <= 3.0 * dist);
      const CoinAssignment coins_u{2, Site::zero(), coin, permutation_matrix(pi), {l + 5}};
      const CoinAssignment coins_ul{2, Site::zero(), coin, permutation_matrix(pi), {l, l + 5}};
      const Eigen::MatrixXcd diff =
          materialize_dense(big, coins_u, wide) - materialize_dense(big, coins_ul, wide);
      CHECK(t.norm == doctest::Approx(operator_norm_oracle(diff)).epsilon(1e-10));
    }
  }
}

TEST_CASE("materialize enforces the dimension cap") {
  const PhaseField field = uniform_field(2, 8, 1);
  const BlockBasis basis = box_basis(kSwap2, BoxRegion{2, Site::zero(), 5});
  const CoinAssignment coins{2, Site::zero(), permutation_matrix(kSwap2),
                             permutation_matrix(kSwap2), {5}};
  CHECK_THROWS_AS(materialize_sparse(basis, coins, field, basis.dim() - 1), std::runtime_error);
}
