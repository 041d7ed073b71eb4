#include <cmath>

#include "doctest.h"
#include "qwloc/rng.hpp"
#include "qwloc/spectral.hpp"
#include "test_helpers.hpp"

using namespace qwloc;
using qwloc::testing::fixed_point_free_permutations;

namespace {

const Permutation kSwap2 = Permutation::from_cycles(2, {{1, -1}, {2, -2}});

PhaseField uniform_field(int d, int radius, std::uint64_t seed) {
  return sample_field(BoxRegion{d, Site::zero(), radius}, PhaseDistribution::uniform(), seed);
}

// Materializes one block of the permutation walk as a dense cyclic matrix.
Eigen::MatrixXcd block_matrix(const InvariantBlock& block, const PhaseField& field) {
  const int m = block.length();
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(m, m);
  for (int t = 0; t < m; ++t) {
    const auto& next = block.members[static_cast<std::size_t>((t + 1) % m)];
    out((t + 1) % m, t) = field.phase_factor(next.site, next.tau);
  }
  return out;
}

}  // namespace

TEST_CASE("unitary_spectrum: basics and residuals") {
  SUBCASE("identity has eigenvalue 1 with zero residual") {
    const SpectrumResult r = unitary_spectrum(Eigen::MatrixXcd::Identity(5, 5));
    for (Eigen::Index i = 0; i < 5; ++i) CHECK(r.eigenvalues(i) == Complex(1, 0));
    CHECK(r.max_residual() <= 1e-14);
  }
  SUBCASE("diagonal phases are returned sorted by argument") {
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(3, 3);
    m(0, 0) = std::polar(1.0, 2.0);
    m(1, 1) = std::polar(1.0, -1.0);
    m(2, 2) = std::polar(1.0, 0.5);
    const SpectrumResult r = unitary_spectrum(m);
    CHECK(std::arg(r.eigenvalues(0)) == doctest::Approx(-1.0));
    CHECK(std::arg(r.eigenvalues(1)) == doctest::Approx(0.5));
    CHECK(std::arg(r.eigenvalues(2)) == doctest::Approx(2.0));
  }
  SUBCASE("random 50x50 unitary: residuals below 1e-9, moduli on the circle") {
    const SpectrumResult r = unitary_spectrum(random_unitary(50, 8));
    CHECK(r.max_residual() <= 1e-9);
    CHECK(r.max_modulus_deviation() <= 1e-9);
  }
  SUBCASE("grossly non-unitary input rejected") {
    CHECK_THROWS_AS(unitary_spectrum(2.0 * Eigen::MatrixXcd::Identity(3, 3)),
                    std::invalid_argument);
  }
}

TEST_CASE("exact block spectra: roots of e^{i theta}") {
  SUBCASE("zero phases, m=2: eigenvalues {1, -1}") {
    const PhaseField field =
        sample_field(BoxRegion{2, Site::zero(), 4}, PhaseDistribution::zero_phases(), 0);
    const InvariantBlock block = make_block(kSwap2, 1, Site::zero());
    const SpectrumResult r = block_spectrum_exact(block, field);
    REQUIRE(r.eigenvalues.size() == 2);
    CHECK(std::abs(r.eigenvalues(0) - Complex(-1, 0)) <= 1e-15);
    CHECK(std::abs(r.eigenvalues(1) - Complex(1, 0)) <= 1e-15);
  }
  SUBCASE("the eigenvalue set is e^{i theta/m} times the m-th roots of unity") {
    const PhaseField field = uniform_field(2, 4, 5);
    const InvariantBlock block = make_block(kSwap2, 1, Site::zero());
    double theta = 0.0;
    for (const auto& m : block.members) theta += field.phase(m.site, m.tau);
    const SpectrumResult exact = block_spectrum_exact(block, field);
    const Complex root = std::polar(1.0, theta / 2.0);
    const double d0 = std::min(std::abs(exact.eigenvalues(0) - root),
                               std::abs(exact.eigenvalues(0) + root));
    const double d1 = std::min(std::abs(exact.eigenvalues(1) - root),
                               std::abs(exact.eigenvalues(1) + root));
    CHECK(d0 <= 1e-12);
    CHECK(d1 <= 1e-12);
    // against the dense oracle of the 2x2 cyclic block
    const SpectrumResult numeric = unitary_spectrum(block_matrix(block, field));
    CHECK(hausdorff_distance(exact.eigenvalues, numeric.eigenvalues) <= 1e-10);
  }
  SUBCASE("random phases, m=4: exact set matches the materialized block to 1e-10") {
    const Permutation pi4 = Permutation::from_cycles(2, {{1, -1, 2, -2}});
    for (std::uint64_t s = 0; s < 25; ++s) {
      const PhaseField field = uniform_field(2, 4, derive_seed(100, s));
      const InvariantBlock block = make_block(pi4, 1, Site::zero());
      const SpectrumResult exact = block_spectrum_exact(block, field);
      const SpectrumResult numeric = unitary_spectrum(block_matrix(block, field));
      CHECK(hausdorff_distance(exact.eigenvalues, numeric.eigenvalues) <= 1e-10);
    }
  }
  SUBCASE("block spectrum phase equals cycle_phase at the shifted anchor") {
    const InvariantBlock block = make_block(kSwap2, 2, Site::axis(0, 1));
    const PhaseField field = uniform_field(2, 6, 9);
    double theta = 0.0;
    for (const auto& m : block.members) theta += field.phase(m.site, m.tau);
    const Cycle cycle = decompose_cycles(kSwap2).cycles[1];  // (+2, -2)
    const double via_path =
        cycle_phase(field, block.anchor_site + displacement(2, 2), cycle);
    CHECK(theta == doctest::Approx(via_path).epsilon(1e-15));
  }
}

TEST_CASE("exact vs numerical block spectra across dimensions and cycle lengths") {
  // m = 2 (d=2 double swap), m = 4 (d=2 one 4-cycle), m = 6 (d=3 one 6-cycle).
  struct Case {
    Permutation pi;
    int expect_m;
  };
  const std::vector<Case> cases{
      {Permutation::from_cycles(2, {{1, -1}, {2, -2}}), 2},
      {Permutation::from_cycles(2, {{1, -1, 2, -2}}), 4},
      {Permutation::from_cycles(3, {{1, -1, 2, -2, 3, -3}}), 6},
  };
  int checked = 0;
  for (const auto& c : cases) {
    REQUIRE(check_localizing(c.pi).localizing);
    for (std::uint64_t s = 0; s < 40; ++s) {
      const PhaseField field =
          uniform_field(c.pi.dim(), 4, derive_seed(7000 + static_cast<std::uint64_t>(c.expect_m), s));
      const InvariantBlock block = make_block(c.pi, 1, Site::zero());
      REQUIRE(block.length() == c.expect_m);
      const SpectrumResult exact = block_spectrum_exact(block, field);
      const SpectrumResult numeric = unitary_spectrum(block_matrix(block, field));
      CHECK(hausdorff_distance(exact.eigenvalues, numeric.eigenvalues) <= 1e-9);
      ++checked;
    }
  }
  CHECK(checked == 120);
}

TEST_CASE("dispersion: flat bands iff localizing") {
  SUBCASE("double swap: all bands flat to 1e-12") {
    const DispersionResult disp = dispersion(permutation_matrix(kSwap2), 2, kgrid_uniform(2, 16));
    CHECK(disp.max_flatness() <= 1e-12);
  }
  SUBCASE("d=1 swap flat") {
    const DispersionResult disp = dispersion(
        permutation_matrix(Permutation::from_cycles(1, {{1, -1}})), 1, kgrid_uniform(1, 32));
    CHECK(disp.max_flatness() <= 1e-12);
  }
  SUBCASE("(+1,+2)(-1,-2): some band moves by at least 1e-3 on a 32^2 grid") {
    const Permutation bad = Permutation::from_cycles(2, {{1, 2}, {-1, -2}});
    const DispersionResult disp = dispersion(permutation_matrix(bad), 2, kgrid_uniform(2, 32));
    CHECK(disp.max_flatness() >= 1e-3);
  }
  SUBCASE("band movement matches the roots of e^{-ik.S} on cycle vectors (oracle)") {
    // For the cycle (+1,+2) of the non-localizing permutation the squared
    // symbol acts on the cycle subspace as e^{-ik.(e1+e2)} times identity.
    const Permutation bad = Permutation::from_cycles(2, {{1, 2}, {-1, -2}});
    const std::vector<double> k{0.7, 0.3};
    const Eigen::MatrixXcd symbol = coin_symbol(permutation_matrix(bad), 2, k);
    const Eigen::MatrixXcd sq = symbol * symbol;
    const SpectrumResult sp = unitary_spectrum(sq);
    const Complex expected_pp = std::polar(1.0, -(k[0] + k[1]));
    const Complex expected_mm = std::polar(1.0, k[0] + k[1]);
    double best_pp = 2.0, best_mm = 2.0;
    for (Eigen::Index i = 0; i < sp.eigenvalues.size(); ++i) {
      best_pp = std::min(best_pp, std::abs(sp.eigenvalues(i) - expected_pp));
      best_mm = std::min(best_mm, std::abs(sp.eigenvalues(i) - expected_mm));
    }
    CHECK(best_pp <= 1e-12);
    CHECK(best_mm <= 1e-12);
  }
  SUBCASE("every symbol on the grid is unitary") {
    const Permutation bad = Permutation::from_cycles(2, {{1, 2}, {-1, -2}});
    for (const auto& k : kgrid_uniform(2, 8))
      CHECK(unitarity_residual(coin_symbol(permutation_matrix(bad), 2, k)) <= 1e-12);
  }
}

TEST_CASE("trace of the symbol is k-independent iff the coin is off-diagonal") {
  SUBCASE("permutation coins of derangements have constant (zero) trace") {
    const Eigen::MatrixXcd c = permutation_matrix(kSwap2);
    const auto grid = kgrid_uniform(2, 8);
    const Complex t0 = coin_symbol(c, 2, grid[0]).trace();
    CHECK(std::abs(t0) <= 1e-15);
    for (const auto& k : grid) CHECK(std::abs(coin_symbol(c, 2, k).trace() - t0) <= 1e-14);
  }
  SUBCASE("a coin with diagonal weight has a k-dependent trace") {
    const Eigen::MatrixXcd c = Eigen::MatrixXcd::Identity(4, 4);
    const auto grid = kgrid_uniform(2, 8);
    double variation = 0.0;
    const Complex t0 = coin_symbol(c, 2, grid[0]).trace();
    for (const auto& k : grid)
      variation = std::max(variation, std::abs(coin_symbol(c, 2, k).trace() - t0));
    CHECK(variation > 1.0);
  }
}

TEST_CASE("flat_band_test agrees with check_localizing for all fixed-point-free permutations, d <= 2") {
  for (int d = 1; d <= 2; ++d) {
    for (const auto& pi : fixed_point_free_permutations(d)) {
      CHECK(flat_band_test(pi) == check_localizing(pi).localizing);
    }
  }
}

TEST_CASE("arc membership handles the wrap-around at +-pi") {
  const Arc arc{M_PI, 0.2};
  CHECK(arc_contains(arc, std::polar(1.0, M_PI - 0.05)));
  CHECK(arc_contains(arc, std::polar(1.0, -M_PI + 0.05)));
  CHECK_FALSE(arc_contains(arc, std::polar(1.0, M_PI - 0.2)));
  CHECK_FALSE(arc_contains(arc, Complex(1, 0)));
}

TEST_CASE("arc avoidance probabilities") {
  SUBCASE("uniform phases, m=2, |A| = 0.1: empirical within CI of 1 - m|A|/2pi") {
    const ArcAvoidanceResult res = arc_avoidance_probability(
        kSwap2, 0, PhaseDistribution::uniform(), Arc{0.3, 0.1}, 4000, 99);
    const double exact = 1.0 - 2.0 * 0.1 / (2.0 * M_PI);
    CHECK(res.exact_uniform == doctest::Approx(exact).epsilon(1e-12));
    CHECK(res.ci_low <= exact);
    CHECK(res.ci_high >= exact);
  }
  SUBCASE("vs the convolution-integral oracle for a tabulated density") {
    // Density (1 + cos theta)/2pi; integrate its 2-fold circular
    // convolution over the pulled-back arcs.
    const int grid = 256;
    std::vector<double> tab(static_cast<std::size_t>(grid));
    for (int i = 0; i < grid; ++i) {
      const double theta = 2.0 * M_PI * i / grid;
      tab[static_cast<std::size_t>(i)] = (1.0 + std::cos(theta)) / (2.0 * M_PI);
    }
    const PhaseDistribution dist = PhaseDistribution::tabulated(tab);
    const Arc arc{0.0, 0.1};
    const ArcAvoidanceResult res = arc_avoidance_probability(kSwap2, 0, dist, arc, 6000, 7);

    const double h = 2.0 * M_PI / grid;
    std::vector<double> conv(static_cast<std::size_t>(grid), 0.0);
    for (int i = 0; i < grid; ++i)
      for (int j = 0; j < grid; ++j)
        conv[static_cast<std::size_t>((i + j) % grid)] +=
            tab[static_cast<std::size_t>(i)] * tab[static_cast<std::size_t>(j)] * h;
    double hit = 0.0;
    for (int i = 0; i < grid; ++i) {
      const double theta = (i + 0.5) * h;
      const bool in = arc_contains(arc, std::polar(1.0, theta / 2.0)) ||
                      arc_contains(arc, std::polar(1.0, theta / 2.0 + M_PI));
      if (in) hit += conv[static_cast<std::size_t>(i)] * h;
    }
    const double oracle = 1.0 - hit;
    CHECK(res.probability == doctest::Approx(oracle).epsilon(0.02));
  }
  SUBCASE("probability tends to 1 as |A| -> 0 and is monotone under nesting") {
    double prev = -1.0;
    for (const double len : {0.4, 0.2, 0.1, 0.02, 0.002}) {
      const ArcAvoidanceResult res = arc_avoidance_probability(
          kSwap2, 0, PhaseDistribution::uniform(), Arc{1.0, len}, 2000, 5);
      if (prev >= 0.0) CHECK(res.probability >= prev);  // coupled seeds, nested arcs
      prev = res.probability;
    }
    CHECK(prev == 1.0);
  }
  SUBCASE("site mode multiplies the independent cycle blocks") {
    const ArcAvoidanceResult res = site_arc_avoidance_probability(
        kSwap2, PhaseDistribution::uniform(), Arc{0.0, 0.1}, 4000, 21);
    const double per_block = 1.0 - 2.0 * 0.1 / (2.0 * M_PI);
    const double exact = std::pow(per_block, 4);  // 4 blocks of length 2 at one site
    CHECK(res.exact_uniform == doctest::Approx(exact).epsilon(1e-12));
    CHECK(res.ci_low <= exact);
    CHECK(res.ci_high >= exact);
  }
  SUBCASE("fitted c_j is stable across small arc lengths (within 20%)") {
    double cmin = 1e9, cmax = 0.0;
    for (const double len : {0.02, 0.05, 0.1}) {
      const ArcAvoidanceResult res = arc_avoidance_probability(
          kSwap2, 0, PhaseDistribution::uniform(), Arc{0.0, len}, 40000, 31);
      const double c = (1.0 - res.probability) / len;
      cmin = std::min(cmin, c);
      cmax = std::max(cmax, c);
    }
    CHECK(cmax <= 1.2 * cmin);
  }
  SUBCASE("arc too long for the cycle is rejected") {
    CHECK_THROWS_AS(arc_avoidance_probability(kSwap2, 0, PhaseDistribution::uniform(),
                                              Arc{0.0, M_PI + 0.1}, 200, 1),
                    std::invalid_argument);
  }
}

TEST_CASE("spectral distance statistics") {
  SUBCASE("eta larger than the gap plus the diameter: probability 1") {
    const DistanceScalingResult res = spectral_distance_statistics(
        Complex(1.05, 0), {3.1}, 3, kSwap2, PhaseDistribution::uniform(), 200, 4);
    CHECK(res.probabilities[0] == 1.0);
  }
  SUBCASE("eta below the circle gap: probability 0") {
    const DistanceScalingResult res = spectral_distance_statistics(
        Complex(1.05, 0), {0.04}, 3, kSwap2, PhaseDistribution::uniform(), 200, 4);
    CHECK(res.probabilities[0] == 0.0);
  }
  SUBCASE("linear regime: halving eta roughly halves the probability (oracle: 10x samples)") {
    // z just off the circle so the eta-ball actually reaches it.
    const Complex z = std::polar(1.00002, 0.37);
    const std::vector<double> etas{0.0005, 0.001};
    const DistanceScalingResult res =
        spectral_distance_statistics(z, etas, 4, kSwap2, PhaseDistribution::uniform(), 3000, 11);
    const DistanceScalingResult oracle =
        spectral_distance_statistics(z, etas, 4, kSwap2, PhaseDistribution::uniform(), 30000, 12);
    const double ratio = res.probabilities[1] / res.probabilities[0];
    const double oracle_ratio = oracle.probabilities[1] / oracle.probabilities[0];
    CHECK(ratio >= 1.5);
    CHECK(ratio <= 2.5);
    CHECK(oracle_ratio >= 1.5);
    CHECK(oracle_ratio <= 2.5);
    CHECK(res.probabilities[0] == doctest::Approx(oracle.probabilities[0]).epsilon(0.35));
  }
  SUBCASE("z on the unit circle rejected") {
    CHECK_THROWS_AS(spectral_distance_statistics(Complex(1, 0), {0.1}, 3, kSwap2,
                                                 PhaseDistribution::uniform(), 200, 1),
                    std::invalid_argument);
  }
}
