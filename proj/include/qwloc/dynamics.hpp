#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qwloc/walk.hpp"

namespace qwloc {

// Position moments <|X|^p> with |x| the sup norm about `center`.
std::vector<double> position_moments(const StateVector& psi, const std::vector<double>& p_list,
                                     const Site& center = Site::zero());

// Repeated apply_walk; reference path for tests and small systems.
StateVector evolve_state(const WalkSpec& spec, StateVector psi, int steps);

struct MomentTrace {
  std::vector<int> times;
  std::vector<double> p_list;
  std::vector<std::vector<double>> moments;  // [time index][p index]
  std::vector<double> running_sup;           // per p, over recorded times
  std::vector<double> norms;                 // per recorded time
  std::string initial_state;
  std::uint64_t field_seed = 0;
  double boundary_mass = 0.0;  // final probability within 2 sites of the array edge
};

struct EvolveOptions {
  std::vector<int> sample_times;  // sorted, may include 0; empty = every step
  std::vector<double> p_list{2.0};
  Site moment_center;
  bool single_precision = false;  // throughput mode for ballistic controls
  int step_threads = 0;           // 0 = serial stepping (caller parallelizes realizations)
};

// Streamed time evolution: runs the walk for `steps` steps recording
// moments at the sampled times. The light cone is tracked so early steps
// only touch the active part of the array. Open (collarless) specs are
// rejected unless the box provably contains the whole light cone.
MomentTrace evolve_moments(const WalkSpec& spec, const StateVector& psi0, int steps,
                           const EvolveOptions& opt);

struct DynamicsConfig {
  int d = 2;
  Permutation pi = Permutation::from_cycles(2, {{1, -1}, {2, -2}});
  double delta = 0.05;
  bool ballistic_control = false;  // discrete-Fourier coin instead of the perturbed C_pi
  PhaseDistribution dist = PhaseDistribution::uniform();
  int steps = 2000;
  int realizations = 10;
  std::vector<double> p_list{2.0};
  std::uint64_t seed = 1;
  int box_radius = 0;   // 0: pick automatically (localized: 40, control: steps + 2)
  int early_step = 0;   // saturation denominator time; 0 = steps / 10
  int initial_tau = 1;
  std::vector<int> sample_times;  // empty = automatic
  bool single_precision = false;  // forced on for large control boxes unless set
};

struct DynamicsResult {
  std::vector<MomentTrace> traces;             // one per realization
  std::vector<double> saturation_ratios;       // <|X|^p>_n / <|X|^p>_{early}, first p
  double median_saturation = 0.0;
  std::vector<double> growth_exponents;        // log-log slope over [steps/10, steps]
  double median_growth_exponent = 0.0;
  int box_radius = 0;
  double boundary_mass = 0.0;  // worst-case final probability within 2 sites of the box edge
};

// Disorder-averaged moment growth for the delta-perturbed permutation
// walk (or the Fourier control): per-realization traces plus the
// saturation and growth statistics used by the dichotomy experiments.
DynamicsResult localization_experiment(const DynamicsConfig& config);

// Least squares slope of log(moment) vs log(time) over the given window.
double growth_exponent(const MomentTrace& trace, int p_index, int t_min, int t_max);

}  // namespace qwloc
