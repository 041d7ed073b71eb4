#include "qwloc/runner.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <limits>
#include <sstream>

#include "qwloc/config.hpp"
#include "qwloc/dynamics.hpp"
#include "qwloc/resolvent.hpp"
#include "qwloc/rng.hpp"
#include "qwloc/spectral.hpp"
#include "qwloc/stats.hpp"

namespace qwloc {

namespace {

namespace cfg = qwloc::config;
namespace fs = std::filesystem;

class OutputWriter {
 public:
  explicit OutputWriter(std::string dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

  void save(const std::string& name, const std::string& content) {
    const std::string path = (fs::path(dir_) / name).string();
    write_text_file(path, content);
    files_.push_back(name);
  }

  void save_json(const std::string& name, const Json& j) { save(name, j.dump(2) + "\n"); }

  // Removes everything written so far; called when a run aborts.
  void cleanup() {
    for (const auto& name : files_) {
      std::error_code ec;
      fs::remove(fs::path(dir_) / name, ec);
    }
    files_.clear();
  }

  const std::vector<std::string>& files() const { return files_; }

 private:
  std::string dir_;
  std::vector<std::string> files_;
};

Json base_manifest(const std::string& subcommand, const Json& conf, std::uint64_t seed) {
  Json m;
  m["subcommand"] = subcommand;
  m["code_version"] = kVersion;
  m["seed"] = seed;
  Json echo = conf;
  echo["seed"] = seed;  // effective seed: a manifest fully reproduces its run
  m["config"] = echo;
  return m;
}

Json site_json(const Site& s, int d) {
  Json out = Json::array();
  for (int i = 0; i < d; ++i) out.push_back(s[i]);
  return out;
}

// --- check-perm -----------------------------------------------------------

void run_check_perm(const Json& conf, OutputWriter& out, std::uint64_t seed) {
  cfg::require_keys(conf, {"dimension", "permutation"}, {"seed"}, "check-perm");
  const int d = cfg::get_dimension(conf);
  const Permutation pi = cfg::get_permutation(conf, d);
  const CycleDecomposition dec = decompose_cycles(pi);
  const LocalizationCheck loc = check_localizing(pi);

  Json report;
  report["dimension"] = d;
  report["permutation"] = permutation_to_json(pi);
  Json cycles = Json::array();
  for (std::size_t c = 0; c < dec.cycles.size(); ++c) {
    Json jc;
    jc["elements"] = dec.cycles[c].elements;
    jc["length"] = dec.cycles[c].length();
    jc["displacement_sum"] = site_json(loc.cycle_displacement_sums[c], d);
    cycles.push_back(jc);
  }
  report["cycles"] = cycles;
  report["fixed_points"] = dec.fixed_points;
  report["fixed_point_free"] = loc.fixed_point_free;
  report["localizing"] = loc.localizing;
  out.save_json("report.json", report);
  std::cout << "localizing: " << (loc.localizing ? "true" : "false") << "\n";
  (void)seed;
}

// --- dispersion -------------------------------------------------------------

void run_dispersion(const Json& conf, OutputWriter& out, std::uint64_t seed) {
  cfg::require_keys(conf, {"dimension"}, {"permutation", "coin", "grid_points", "seed"},
                    "dispersion");
  const int d = cfg::get_dimension(conf);
  const int grid_points = conf.contains("grid_points") ? cfg::get_int(conf, "grid_points", 2, 256) : 32;
  if (conf.contains("permutation") == conf.contains("coin"))
    throw std::invalid_argument("dispersion: provide exactly one of 'permutation' or 'coin'");

  Json summary;
  summary["dimension"] = d;
  summary["grid_points"] = grid_points;
  CoinMatrix coin;
  if (conf.contains("permutation")) {
    const Permutation pi = cfg::get_permutation(conf, d);
    coin = permutation_matrix(pi);
    summary["localizing"] = check_localizing(pi).localizing;
    summary["flat_band_test"] = flat_band_test(pi, std::max(grid_points, 16));
  } else {
    coin = coin_from_json(conf.at("coin"));
    if (coin.rows() != 2 * d) throw std::invalid_argument("dispersion: coin must be 2d x 2d");
    if (unitarity_residual(coin) > 1e-10)
      throw std::invalid_argument("dispersion: coin is not unitary");
  }

  const DispersionResult disp = dispersion(coin, d, kgrid_uniform(d, grid_points));
  summary["flatness"] = disp.flatness;
  summary["max_flatness"] = disp.max_flatness();
  out.save("bands.csv", dispersion_csv(disp));
  out.save_json("summary.json", summary);
  (void)seed;
}

// --- spectrum (exact block formula vs numerical eigendecomposition) ---------

void run_spectrum(const Json& conf, OutputWriter& out, std::uint64_t seed) {
  cfg::require_keys(conf, {"dimension", "permutation", "box_radius", "realizations", "seed"},
                    {"distribution"}, "spectrum");
  const int d = cfg::get_dimension(conf);
  const Permutation pi = cfg::get_permutation(conf, d);
  if (!check_localizing(pi).localizing)
    throw std::invalid_argument("spectrum: permutation must be localizing");
  const int L = cfg::get_int(conf, "box_radius", 2, 16);
  const int realizations = cfg::get_int(conf, "realizations", 1, 1000000);
  const PhaseDistribution dist = cfg::get_distribution(conf);

  const BlockBasis basis = box_basis(pi, BoxRegion{d, Site::zero(), L});
  const CoinAssignment coins{d, Site::zero(), permutation_matrix(pi), permutation_matrix(pi), {L}};
  const BoxRegion field_region{d, Site::zero(), L + 2};

  double worst_hausdorff = 0.0;
  double worst_residual = 0.0;
  std::string first_exact_csv, first_numeric_csv;
  for (int i = 0; i < realizations; ++i) {
    const PhaseField field(d, field_region, dist, derive_seed(seed, static_cast<std::uint64_t>(i)));
    Eigen::VectorXcd exact(basis.dim());
    Eigen::Index at = 0;
    for (const auto& block : basis.blocks) {
      const SpectrumResult bs = block_spectrum_exact(block, field);
      for (Eigen::Index k = 0; k < bs.eigenvalues.size(); ++k) exact(at++) = bs.eigenvalues(k);
    }
    const SpectrumResult numeric = unitary_spectrum(materialize_dense(basis, coins, field));
    worst_hausdorff = std::max(worst_hausdorff, hausdorff_distance(exact, numeric.eigenvalues));
    worst_residual = std::max(worst_residual, numeric.max_residual());
    if (i == 0) {
      SpectrumResult exact_sorted;
      exact_sorted.source = SpectrumResult::Source::ExactFormula;
      exact_sorted.eigenvalues = exact;
      exact_sorted.residuals = Eigen::VectorXd::Zero(exact.size());
      first_exact_csv = spectrum_csv(exact_sorted);
      first_numeric_csv = spectrum_csv(numeric);
    }
  }

  Json summary;
  summary["dimension"] = d;
  summary["box_radius"] = L;
  summary["matrix_dimension"] = basis.dim();
  summary["realizations"] = realizations;
  summary["max_hausdorff_distance"] = worst_hausdorff;
  summary["max_eigen_residual"] = worst_residual;
  out.save("exact_spectrum.csv", first_exact_csv);
  out.save("numerical_spectrum.csv", first_numeric_csv);
  out.save_json("summary.json", summary);
}

// --- arc-stats ----------------------------------------------------------------

void run_arc_stats(const Json& conf, OutputWriter& out, std::uint64_t seed) {
  cfg::require_keys(conf, {"dimension", "permutation", "arc_lengths", "realizations", "seed"},
                    {"distribution", "arc_center", "mode", "cycle_index"}, "arc-stats");
  const int d = cfg::get_dimension(conf);
  const Permutation pi = cfg::get_permutation(conf, d);
  const std::vector<double> lengths = cfg::get_double_list(conf, "arc_lengths", 1e-9, 2 * M_PI);
  const int realizations = cfg::get_int(conf, "realizations", 100, 100000000);
  const double center = conf.contains("arc_center") ? cfg::get_double(conf, "arc_center", -M_PI, M_PI) : 0.0;
  const std::string mode = conf.contains("mode") ? conf.at("mode").get<std::string>() : "cycle";
  const int cycle_index = conf.contains("cycle_index") ? cfg::get_int(conf, "cycle_index", 0, 63) : 0;
  const PhaseDistribution dist = cfg::get_distribution(conf);
  if (mode != "cycle" && mode != "site")
    throw std::invalid_argument("arc-stats: mode must be 'cycle' or 'site'");

  Json rows = Json::array();
  for (std::size_t li = 0; li < lengths.size(); ++li) {
    const Arc arc{center, lengths[li]};
    const ArcAvoidanceResult res =
        mode == "cycle"
            ? arc_avoidance_probability(pi, cycle_index, dist, arc, realizations,
                                        derive_seed(seed, li))
            : site_arc_avoidance_probability(pi, dist, arc, realizations, derive_seed(seed, li));
    Json row;
    row["arc_length"] = arc.length;
    row["probability"] = res.probability;
    row["ci_low"] = res.ci_low;
    row["ci_high"] = res.ci_high;
    row["realizations"] = res.realizations;
    if (res.exact_uniform >= 0.0) row["exact_uniform"] = res.exact_uniform;
    row["fitted_c"] = (1.0 - res.probability) / arc.length;
    rows.push_back(row);
  }
  Json summary;
  summary["mode"] = mode;
  summary["rows"] = rows;
  out.save_json("arcs.json", summary);
}

// --- dist-scaling ---------------------------------------------------------------

void run_dist_scaling(const Json& conf, OutputWriter& out, std::uint64_t seed) {
  cfg::require_keys(conf, {"dimension", "permutation", "box_radii", "z", "etas", "realizations",
                           "seed"},
                    {"distribution"}, "dist-scaling");
  const int d = cfg::get_dimension(conf);
  const Permutation pi = cfg::get_permutation(conf, d);
  if (!check_localizing(pi).localizing)
    throw std::invalid_argument("dist-scaling: permutation must be localizing");
  const std::vector<int> radii = cfg::get_int_list(conf, "box_radii", 2, 64);
  const Complex z = cfg::get_complex(conf, "z");
  const std::vector<double> etas = cfg::get_double_list(conf, "etas", 0.0, 10.0);
  const int realizations = cfg::get_int(conf, "realizations", 100, 100000000);
  const PhaseDistribution dist = cfg::get_distribution(conf);

  Json per_box = Json::array();
  for (std::size_t bi = 0; bi < radii.size(); ++bi) {
    const DistanceScalingResult res = spectral_distance_statistics(
        z, etas, radii[bi], pi, dist, realizations, derive_seed(seed, bi));
    Json row;
    row["box_radius"] = radii[bi];
    row["etas"] = res.etas;
    row["probabilities"] = res.probabilities;
    row["ci_low"] = res.ci_low;
    row["ci_high"] = res.ci_high;
    Json ratios = Json::array();
    for (std::size_t e = 0; e + 1 < res.etas.size(); ++e) {
      const double denom = res.probabilities[e];
      ratios.push_back(denom > 0.0 ? res.probabilities[e + 1] / denom : 0.0);
    }
    row["probability_ratios"] = ratios;
    per_box.push_back(row);
  }
  Json summary;
  summary["z"] = complex_to_json(z);
  summary["realizations"] = realizations;
  summary["boxes"] = per_box;
  out.save_json("scaling.json", summary);
}

// --- dynamics -----------------------------------------------------------------

void run_dynamics(const Json& conf, OutputWriter& out, std::uint64_t seed) {
  cfg::require_keys(conf,
                    {"dimension", "permutation", "steps", "realizations", "seed"},
                    {"distribution", "delta", "coin_kind", "p_list", "box_radius", "early_step",
                     "single_precision", "initial_tau"},
                    "dynamics");
  DynamicsConfig dc;
  dc.d = cfg::get_dimension(conf);
  dc.pi = cfg::get_permutation(conf, dc.d);
  dc.steps = cfg::get_int(conf, "steps", 10, 1000000);
  dc.realizations = cfg::get_int(conf, "realizations", 1, 100000);
  dc.dist = cfg::get_distribution(conf);
  dc.seed = seed;
  const std::string kind =
      conf.contains("coin_kind") ? conf.at("coin_kind").get<std::string>() : "perturbed";
  if (kind == "fourier") {
    dc.ballistic_control = true;
  } else if (kind != "perturbed") {
    throw std::invalid_argument("dynamics: coin_kind must be 'perturbed' or 'fourier'");
  }
  dc.delta = conf.contains("delta") ? cfg::get_double(conf, "delta", 0.0, 1.999) : 0.05;
  if (conf.contains("p_list")) dc.p_list = cfg::get_double_list(conf, "p_list", 0.0, 16.0);
  if (conf.contains("box_radius")) dc.box_radius = cfg::get_int(conf, "box_radius", 4, 4096);
  if (conf.contains("early_step")) dc.early_step = cfg::get_int(conf, "early_step", 1, dc.steps);
  if (conf.contains("initial_tau")) dc.initial_tau = cfg::get_int(conf, "initial_tau", -dc.d, dc.d);
  dc.single_precision = cfg::get_bool(conf, "single_precision", false);

  const DynamicsResult res = localization_experiment(dc);

  Json summary;
  summary["steps"] = dc.steps;
  summary["realizations"] = dc.realizations;
  summary["coin_kind"] = kind;
  summary["delta"] = dc.delta;
  summary["box_radius"] = res.box_radius;
  summary["saturation_ratios"] = res.saturation_ratios;
  summary["median_saturation"] = res.median_saturation;
  summary["growth_exponents"] = res.growth_exponents;
  summary["median_growth_exponent"] = res.median_growth_exponent;
  summary["boundary_mass"] = res.boundary_mass;
  out.save("traces.csv", traces_csv(res.traces));
  out.save_json("summary.json", summary);
}

// --- fm-decay -----------------------------------------------------------------

void run_fm_decay(const Json& conf, OutputWriter& out, std::uint64_t seed) {
  cfg::require_keys(conf,
                    {"dimension", "permutation", "delta", "s", "z_moduli", "z_arguments",
                     "distances", "outer_radius", "realizations", "seed"},
                    {"distribution", "decoupling_regime", "bootstrap_reps", "raw_csv"},
                    "fm-decay");
  const int d = cfg::get_dimension(conf);
  const Permutation pi = cfg::get_permutation(conf, d);
  const double delta = cfg::get_double(conf, "delta", 0.0, 1.999);
  const double s = cfg::get_double(conf, "s", 1e-6, 0.999999);
  const bool decoupling = cfg::get_bool(conf, "decoupling_regime", true);
  if (decoupling && !(s < 1.0 / 3.0))
    throw std::invalid_argument(
        "fm-decay: decoupling-regime estimates require s < 1/3; got s = " + std::to_string(s));
  const std::vector<double> moduli = cfg::get_double_list(conf, "z_moduli", 0.5, 2.0);
  const std::vector<double> args = cfg::get_double_list(conf, "z_arguments", -7.0, 7.0);
  const std::vector<int> distances = cfg::get_int_list(conf, "distances", 3, 64);
  const int outer_radius = cfg::get_int(conf, "outer_radius", 4, 64);
  const int realizations = cfg::get_int(conf, "realizations", 100, 1000000);
  const int bootstrap_reps =
      conf.contains("bootstrap_reps") ? cfg::get_int(conf, "bootstrap_reps", 20, 100000) : 500;
  const PhaseDistribution dist = cfg::get_distribution(conf);
  for (double m : moduli)
    if (std::abs(m - 1.0) < 1e-9)
      throw std::invalid_argument("fm-decay: |z| must stay off the unit circle");
  const int max_dist = *std::max_element(distances.begin(), distances.end());
  if (outer_radius < max_dist + 2)
    throw std::invalid_argument("fm-decay: outer_radius must be >= max distance + 2");

  const CoinMatrix coin =
      perturb_coin(permutation_matrix(pi), delta, derive_seed(seed, 0xC011));
  const FmEnsemble ens{EnsembleKind::OuterClosed, d, pi, coin, dist, outer_radius, Site::zero()};

  std::vector<FmPair> pairs;
  std::vector<double> dist_x;
  for (int r : distances) {
    pairs.push_back(FmPair{BasisState{1, Site::zero()}, BasisState{1, Site::axis(0, r)}});
    dist_x.push_back(static_cast<double>(r));
  }

  Json estimates = Json::array();
  Json fits = Json::array();
  std::ostringstream raw_stream;
  raw_stream << "z_re,z_im,distance,realization,value\n";
  double worst_gamma = std::numeric_limits<double>::infinity();
  double worst_ci_low = std::numeric_limits<double>::infinity();
  double worst_r2 = 1.0;
  std::size_t zi = 0;
  for (double arg : args) {
    for (double modulus : moduli) {
      const Complex z = std::polar(modulus, arg);
      const FMEstimate est =
          fractional_moment_mc(ens, s, z, pairs, realizations, derive_seed(seed, 500 + zi));
      if (cfg::get_bool(conf, "raw_csv", false)) {
        for (std::size_t p = 0; p < est.raw.size(); ++p)
          for (std::size_t i = 0; i < est.raw[p].size(); ++i)
            raw_stream << format_double(z.real()) << "," << format_double(z.imag()) << ","
                       << distances[p] << "," << i << "," << format_double(est.raw[p][i]) << "\n";
      }
      Json je;
      je["z"] = complex_to_json(z);
      je["distances"] = distances;
      je["mean"] = est.mean;
      je["std_error"] = est.std_error;
      je["discarded"] = est.discarded;
      estimates.push_back(je);

      const FMFitResult fit =
          decay_fit_bootstrap(dist_x, est.raw, bootstrap_reps, derive_seed(seed, 900 + zi));
      Json jf;
      jf["z"] = complex_to_json(z);
      jf["gamma"] = fit.gamma;
      jf["gamma_ci_low"] = fit.gamma_ci_low;
      jf["gamma_ci_high"] = fit.gamma_ci_high;
      jf["prefactor"] = fit.prefactor;
      jf["r_squared"] = fit.r_squared;
      jf["excluded_zeros"] = fit.excluded_zeros;
      jf["decaying"] = fit.decaying;
      fits.push_back(jf);
      worst_gamma = std::min(worst_gamma, fit.gamma);
      worst_ci_low = std::min(worst_ci_low, fit.gamma_ci_low);
      worst_r2 = std::min(worst_r2, fit.r_squared);
      ++zi;
    }
  }

  Json summary;
  summary["s"] = s;
  summary["delta"] = delta;
  summary["outer_radius"] = outer_radius;
  summary["realizations"] = realizations;
  summary["estimates"] = estimates;
  summary["fits"] = fits;
  summary["worst_gamma"] = worst_gamma;
  summary["worst_gamma_ci_low"] = worst_ci_low;
  summary["worst_r_squared"] = worst_r2;
  out.save_json("fm_decay.json", summary);
  if (cfg::get_bool(conf, "raw_csv", false)) out.save("raw.csv", raw_stream.str());
}

// --- fv-scan --------------------------------------------------------------------

void run_fv_scan(const Json& conf, OutputWriter& out, std::uint64_t seed) {
  cfg::require_keys(conf,
                    {"dimension", "permutation", "a", "s", "p", "eta", "box_radii",
                     "realizations", "seed"},
                    {"distribution", "z", "pair_distance", "eta_cap"}, "fv-scan");
  ScanConfig sc;
  sc.d = cfg::get_dimension(conf);
  const Permutation pi = cfg::get_permutation(conf, sc.d);
  sc.a = cfg::get_double(conf, "a", 0.0, 64.0);
  sc.s = cfg::get_double(conf, "s", 1e-6, 0.999999);
  sc.p = cfg::get_double(conf, "p", 1.0, 64.0);
  sc.eta = cfg::get_double(conf, "eta", 1e-12, 1.0);
  sc.box_radii = cfg::get_int_list(conf, "box_radii", 2, 64);
  sc.realizations = cfg::get_int(conf, "realizations", 100, 1000000);
  if (conf.contains("z")) sc.z = cfg::get_complex(conf, "z");
  if (conf.contains("eta_cap")) sc.eta_cap = cfg::get_double(conf, "eta_cap", 1e-9, 10.0);
  const int pair_distance =
      conf.contains("pair_distance") ? cfg::get_int(conf, "pair_distance", 3, 64) : 3;
  const PhaseDistribution dist = cfg::get_distribution(conf);
  const int min_radius = *std::min_element(sc.box_radii.begin(), sc.box_radii.end());
  if (pair_distance > min_radius)
    throw std::invalid_argument("fv-scan: pair_distance must fit inside every box");

  const FmPair pair{BasisState{1, Site::zero()}, BasisState{1, Site::axis(0, pair_distance)}};
  const ScanResult res = finite_volume_bound_scan(sc, pi, dist, pair, seed);

  Json rows = Json::array();
  for (const auto& row : res.rows) {
    Json r;
    r["L"] = row.L;
    r["delta"] = row.delta;
    r["estimate"] = row.estimate;
    r["std_error"] = row.std_error;
    r["envelope"] = row.envelope;
    r["discarded"] = row.discarded;
    rows.push_back(r);
  }
  Json summary;
  summary["s"] = sc.s;
  summary["a"] = sc.a;
  summary["p"] = sc.p;
  summary["q"] = sc.q();
  summary["eta"] = sc.eta;
  summary["z"] = complex_to_json(sc.z);
  summary["pair_distance"] = pair_distance;
  summary["realizations"] = sc.realizations;
  summary["rows"] = rows;
  summary["fitted_c"] = res.fitted_c;
  out.save_json("scan.json", summary);
}

// --- verify-identities ------------------------------------------------------------

void run_verify_identities(const Json& conf, OutputWriter& out, std::uint64_t seed) {
  cfg::require_keys(conf,
                    {"dimension", "permutation", "delta", "box_radius", "outer_radius",
                     "z_moduli", "z_arguments", "realizations", "seed"},
                    {"distribution", "random_probes"}, "verify-identities");
  const int d = cfg::get_dimension(conf);
  const Permutation pi = cfg::get_permutation(conf, d);
  const double delta = cfg::get_double(conf, "delta", 0.0, 1.999);
  const int L = cfg::get_int(conf, "box_radius", 2, 32);
  const int outer_radius = cfg::get_int(conf, "outer_radius", L + 6, 64);
  const std::vector<double> moduli = cfg::get_double_list(conf, "z_moduli", 0.5, 2.0);
  const std::vector<double> args = cfg::get_double_list(conf, "z_arguments", -7.0, 7.0);
  const int realizations = cfg::get_int(conf, "realizations", 1, 10000);
  const int random_probes =
      conf.contains("random_probes") ? cfg::get_int(conf, "random_probes", 0, 1000) : 4;
  const PhaseDistribution dist = cfg::get_distribution(conf);

  const CoinMatrix coin =
      perturb_coin(permutation_matrix(pi), delta, derive_seed(seed, 0xC011));

  double worst_single = 0.0, worst_double = 0.0, worst_expansion = 0.0;
  Json rows = Json::array();
  for (int i = 0; i < realizations; ++i) {
    const PhaseField field(d, BoxRegion{d, Site::zero(), outer_radius + 2}, dist,
                           derive_seed(seed, static_cast<std::uint64_t>(i)));
    std::size_t zi = 0;
    for (double modulus : moduli) {
      for (double arg : args) {
        const Complex z = std::polar(modulus, arg);
        const IdentityCheckResult res = verify_geometric_identity(
            L, coin, pi, field, z, outer_radius, Site::zero(), random_probes,
            derive_seed(seed, 300 + zi));
        Json row;
        row["realization"] = i;
        row["z"] = complex_to_json(z);
        row["single_identity_dev"] = res.single_identity_dev;
        row["double_identity_dev"] = res.double_identity_dev;
        row["expansion_dev"] = res.expansion_dev;
        row["probe_columns"] = res.probe_columns;
        row["defect_norm"] = res.defect_norm;
        rows.push_back(row);
        worst_single = std::max(worst_single, res.single_identity_dev);
        worst_double = std::max(worst_double, res.double_identity_dev);
        worst_expansion = std::max(worst_expansion, res.expansion_dev);
        ++zi;
      }
    }
  }
  Json summary;
  summary["box_radius"] = L;
  summary["outer_radius"] = outer_radius;
  summary["delta"] = delta;
  summary["realizations"] = realizations;
  summary["rows"] = rows;
  summary["worst_single_identity_dev"] = worst_single;
  summary["worst_double_identity_dev"] = worst_double;
  summary["worst_expansion_dev"] = worst_expansion;
  out.save_json("identities.json", summary);
}

}  // namespace

const std::vector<std::string>& subcommand_names() {
  static const std::vector<std::string> names{
      "check-perm", "dispersion", "spectrum",  "arc-stats",        "dist-scaling",
      "dynamics",   "fm-decay",   "fv-scan",   "verify-identities"};
  return names;
}

void run_subcommand(const std::string& subcommand, const Json& conf, const std::string& out_dir,
                    std::optional<std::uint64_t> seed_override) {
  const auto start = std::chrono::steady_clock::now();
  OutputWriter out(out_dir);
  const std::uint64_t seed = config::get_seed(conf, seed_override);
  try {
    if (subcommand == "check-perm")
      run_check_perm(conf, out, seed);
    else if (subcommand == "dispersion")
      run_dispersion(conf, out, seed);
    else if (subcommand == "spectrum")
      run_spectrum(conf, out, seed);
    else if (subcommand == "arc-stats")
      run_arc_stats(conf, out, seed);
    else if (subcommand == "dist-scaling")
      run_dist_scaling(conf, out, seed);
    else if (subcommand == "dynamics")
      run_dynamics(conf, out, seed);
    else if (subcommand == "fm-decay")
      run_fm_decay(conf, out, seed);
    else if (subcommand == "fv-scan")
      run_fv_scan(conf, out, seed);
    else if (subcommand == "verify-identities")
      run_verify_identities(conf, out, seed);
    else
      throw std::invalid_argument("unknown subcommand '" + subcommand + "'");
  } catch (...) {
    out.cleanup();
    throw;
  }

  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  Json manifest = base_manifest(subcommand, conf, seed);
  manifest["wall_time_s"] = wall;
  manifest["data_files"] = out.files();
  write_text_file((fs::path(out_dir) / "manifest.json").string(), manifest.dump(2) + "\n");
}

}  // namespace qwloc
