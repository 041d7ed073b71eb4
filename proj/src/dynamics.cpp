#include "qwloc/dynamics.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "qwloc/parallel.hpp"
#include "qwloc/rng.hpp"
#include "qwloc/stats.hpp"

namespace qwloc {

std::vector<double> position_moments(const StateVector& psi, const std::vector<double>& p_list,
                                     const Site& center) {
  const int nc = 2 * psi.d;
  std::vector<double> out;
  for (double p : p_list) {
    std::vector<double> terms;
    terms.reserve(static_cast<std::size_t>(psi.region.site_count()));
    for (std::int64_t si = 0; si < psi.region.site_count(); ++si) {
      const Site s = psi.region.site_at(si);
      double prob = 0.0;
      for (int c = 0; c < nc; ++c) prob += std::norm(psi.amp[static_cast<std::size_t>(si * nc + c)]);
      const int dist = (s - center).sup_norm();
      terms.push_back(prob * (p == 0.0 ? 1.0 : std::pow(static_cast<double>(dist), p)));
    }
    out.push_back(pairwise_sum(terms));
  }
  return out;
}

StateVector evolve_state(const WalkSpec& spec, StateVector psi, int steps) {
  for (int t = 0; t < steps; ++t) psi = apply_walk(spec, psi);
  return psi;
}

namespace {

// Planes-of-components stepper: one real and one imaginary plane per coin
// component, plus matching phase planes. The gather per target row only
// writes that row, so rows parallelize without synchronization, and the
// coin coefficients are hoisted out of contiguous inner loops.
template <typename Real>
class Stepper {
 public:
  Stepper(const WalkSpec& spec, int threads)
      : d_(spec.d),
        nc_(2 * spec.d),
        box_(spec.box),
        rb_(spec.box.radius),
        w_(2 * spec.box.radius + 1),
        threads_(threads) {
    nrows_ = 1;
    for (int i = 0; i < d_ - 1; ++i) nrows_ *= w_;
    nsites_ = nrows_ * w_;

    coin_tab_[0] = flatten(spec.coins.bulk);
    coin_tab_[1] = spec.coins.collar.size() ? flatten(spec.coins.collar) : coin_tab_[0];
    collar_radii_ = spec.coins.collar_radii;
    if (collar_radii_.size() > 2)
      throw std::invalid_argument("stepper: at most two collars supported");

    for (int b = 0; b < 2; ++b) {
      re_[b].assign(static_cast<std::size_t>(nc_), std::vector<Real>());
      im_[b].assign(static_cast<std::size_t>(nc_), std::vector<Real>());
      for (int c = 0; c < nc_; ++c) {
        re_[b][static_cast<std::size_t>(c)].assign(static_cast<std::size_t>(nsites_), Real(0));
        im_[b][static_cast<std::size_t>(c)].assign(static_cast<std::size_t>(nsites_), Real(0));
      }
    }
    build_phases(spec.field);
  }

  void load(const StateVector& psi) {
    for (std::int64_t si = 0; si < nsites_; ++si) {
      for (int c = 0; c < nc_; ++c) {
        const Complex a = psi.amp[static_cast<std::size_t>(si * nc_ + c)];
        re_[cur_][static_cast<std::size_t>(c)][static_cast<std::size_t>(si)] =
            static_cast<Real>(a.real());
        im_[cur_][static_cast<std::size_t>(c)][static_cast<std::size_t>(si)] =
            static_cast<Real>(a.imag());
      }
    }
  }

  void store(StateVector& psi) const {
    for (std::int64_t si = 0; si < nsites_; ++si)
      for (int c = 0; c < nc_; ++c)
        psi.amp[static_cast<std::size_t>(si * nc_ + c)] =
            Complex(re_[cur_][static_cast<std::size_t>(c)][static_cast<std::size_t>(si)],
                    im_[cur_][static_cast<std::size_t>(c)][static_cast<std::size_t>(si)]);
  }

  void step(int active_radius) {
    const int nxt = 1 - cur_;
    const auto row_job = [&](std::int64_t pr) { step_row(pr, active_radius, nxt); };
    if (threads_ > 1)
      parallel_for(nrows_, row_job, threads_);
    else
      for (std::int64_t pr = 0; pr < nrows_; ++pr) row_job(pr);
    cur_ = nxt;
  }

  // Sum over sites of probability times |site - center|^p per p; p = 0
  // recovers the squared norm.
  std::vector<double> weighted_sums(const std::vector<double>& p_list, const Site& center) const {
    std::vector<std::vector<double>> row_partials(
        p_list.size(), std::vector<double>(static_cast<std::size_t>(nrows_), 0.0));
    const auto row_job = [&](std::int64_t pr) {
      std::array<int, kMaxDim> po{};
      decode_prefix(pr, po);
      const std::int64_t base = pr * w_;
      std::vector<double> acc(p_list.size(), 0.0);
      for (int k = 0; k < w_; ++k) {
        double prob = 0.0;
        for (int c = 0; c < nc_; ++c) {
          const double r = re_[cur_][static_cast<std::size_t>(c)][static_cast<std::size_t>(base + k)];
          const double i = im_[cur_][static_cast<std::size_t>(c)][static_cast<std::size_t>(base + k)];
          prob += r * r + i * i;
        }
        if (prob == 0.0) continue;
        Site s = box_.center;
        for (int i = 0; i < d_ - 1; ++i) s[i] += po[static_cast<std::size_t>(i)];
        s[d_ - 1] += k - rb_;
        const int dist = (s - center).sup_norm();
        for (std::size_t pi = 0; pi < p_list.size(); ++pi)
          acc[pi] += prob * (p_list[pi] == 0.0
                                 ? 1.0
                                 : std::pow(static_cast<double>(dist), p_list[pi]));
      }
      for (std::size_t pi = 0; pi < p_list.size(); ++pi)
        row_partials[pi][static_cast<std::size_t>(pr)] = acc[pi];
    };
    if (threads_ > 1)
      parallel_for(nrows_, row_job, threads_);
    else
      for (std::int64_t pr = 0; pr < nrows_; ++pr) row_job(pr);

    std::vector<double> out;
    for (std::size_t pi = 0; pi < p_list.size(); ++pi)
      out.push_back(pairwise_sum(row_partials[pi]));
    return out;
  }

  // Probability within `margin` of the array edge.
  double edge_mass(int margin) const {
    std::vector<double> rows(static_cast<std::size_t>(nrows_), 0.0);
    for (std::int64_t pr = 0; pr < nrows_; ++pr) {
      std::array<int, kMaxDim> po{};
      decode_prefix(pr, po);
      int pd = 0;
      for (int i = 0; i < d_ - 1; ++i) pd = std::max(pd, std::abs(po[static_cast<std::size_t>(i)]));
      const std::int64_t base = pr * w_;
      double acc = 0.0;
      for (int k = 0; k < w_; ++k) {
        const int dist = std::max(pd, std::abs(k - rb_));
        if (dist < rb_ - margin) continue;
        for (int c = 0; c < nc_; ++c) {
          const double r = re_[cur_][static_cast<std::size_t>(c)][static_cast<std::size_t>(base + k)];
          const double i = im_[cur_][static_cast<std::size_t>(c)][static_cast<std::size_t>(base + k)];
          acc += r * r + i * i;
        }
      }
      rows[static_cast<std::size_t>(pr)] = acc;
    }
    return pairwise_sum(rows);
  }

 private:
  static std::vector<Real> flatten(const CoinMatrix& m) {
    std::vector<Real> flat(static_cast<std::size_t>(2 * m.rows() * m.cols()));
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c) {
        flat[static_cast<std::size_t>(2 * (r * m.cols() + c))] = static_cast<Real>(m(r, c).real());
        flat[static_cast<std::size_t>(2 * (r * m.cols() + c) + 1)] =
            static_cast<Real>(m(r, c).imag());
      }
    return flat;
  }

  void decode_prefix(std::int64_t pr, std::array<int, kMaxDim>& po) const {
    for (int i = d_ - 2; i >= 0; --i) {
      po[static_cast<std::size_t>(i)] = static_cast<int>(pr % w_) - rb_;
      pr /= w_;
    }
  }

  void build_phases(const PhaseField& field) {
    for (int c = 0; c < nc_; ++c) {
      phr_.emplace_back(static_cast<std::size_t>(nsites_), Real(0));
      phi_.emplace_back(static_cast<std::size_t>(nsites_), Real(0));
    }
    const auto row_job = [&](std::int64_t pr) {
      std::array<int, kMaxDim> po{};
      decode_prefix(pr, po);
      const std::int64_t base = pr * w_;
      for (int k = 0; k < w_; ++k) {
        Site s = box_.center;
        for (int i = 0; i < d_ - 1; ++i) s[i] += po[static_cast<std::size_t>(i)];
        s[d_ - 1] += k - rb_;
        for (int c = 0; c < nc_; ++c) {
          const Complex f = field.phase_factor(s, coin_from_code(c, d_));
          phr_[static_cast<std::size_t>(c)][static_cast<std::size_t>(base + k)] =
              static_cast<Real>(f.real());
          phi_[static_cast<std::size_t>(c)][static_cast<std::size_t>(base + k)] =
              static_cast<Real>(f.imag());
        }
      }
    };
    if (threads_ > 1)
      parallel_for(nrows_, row_job, threads_);
    else
      for (std::int64_t pr = 0; pr < nrows_; ++pr) row_job(pr);
  }

  // Coin selector for a source site at prefix distance pd and last-axis
  // offset k: collar wins whenever max(pd, |k|) lies within 1 of a collar
  // radius.
  int coin_id(int pd, int k) const {
    const int dist = std::max(pd, std::abs(k));
    for (int r : collar_radii_)
      if (std::abs(dist - r) <= 1) return 1;
    return 0;
  }

  template <int NC>
  void gather_segment(Real* out_re, Real* out_im, const Real* const* in_re,
                      const Real* const* in_im, const Real* ph_re, const Real* ph_im,
                      const Real* coin_row, std::int64_t lo, std::int64_t hi,
                      std::int64_t shift) const {
    for (std::int64_t i = lo; i <= hi; ++i) {
      Real sr = 0, si = 0;
      for (int s = 0; s < NC; ++s) {
        const Real ar = in_re[s][i + shift];
        const Real ai = in_im[s][i + shift];
        const Real cr = coin_row[2 * s];
        const Real ci = coin_row[2 * s + 1];
        sr += cr * ar - ci * ai;
        si += cr * ai + ci * ar;
      }
      const Real pr = ph_re[i];
      const Real pi_ = ph_im[i];
      out_re[i] = pr * sr - pi_ * si;
      out_im[i] = pr * si + pi_ * sr;
    }
  }

  void run_segment(Real* out_re, Real* out_im, const Real* const* in_re, const Real* const* in_im,
                   const Real* ph_re, const Real* ph_im, const Real* coin_row, std::int64_t lo,
                   std::int64_t hi, std::int64_t shift) const {
    switch (nc_) {
      case 2:
        gather_segment<2>(out_re, out_im, in_re, in_im, ph_re, ph_im, coin_row, lo, hi, shift);
        break;
      case 4:
        gather_segment<4>(out_re, out_im, in_re, in_im, ph_re, ph_im, coin_row, lo, hi, shift);
        break;
      case 6:
        gather_segment<6>(out_re, out_im, in_re, in_im, ph_re, ph_im, coin_row, lo, hi, shift);
        break;
      case 8:
        gather_segment<8>(out_re, out_im, in_re, in_im, ph_re, ph_im, coin_row, lo, hi, shift);
        break;
      default:
        throw std::logic_error("stepper: unsupported coin dimension");
    }
  }

  void step_row(std::int64_t pr, int active_radius, int nxt) {
    std::array<int, kMaxDim> po{};
    decode_prefix(pr, po);
    int pd_t = 0;
    for (int i = 0; i < d_ - 1; ++i) pd_t = std::max(pd_t, std::abs(po[static_cast<std::size_t>(i)]));
    const int kr = std::min(active_radius, rb_);
    if (pd_t > kr) return;  // row outside the light cone; stays zero

    const std::int64_t tbase = pr * w_;
    const std::int64_t klo_t = tbase + (-kr + rb_);
    const std::int64_t khi_t = tbase + (kr + rb_);

    std::array<const Real*, 8> in_re_ptr{}, in_im_ptr{};
    for (int s = 0; s < nc_; ++s) {
      in_re_ptr[static_cast<std::size_t>(s)] = re_[cur_][static_cast<std::size_t>(s)].data();
      in_im_ptr[static_cast<std::size_t>(s)] = im_[cur_][static_cast<std::size_t>(s)].data();
    }

    for (int ct = 0; ct < nc_; ++ct) {
      const int axis = ct / 2;
      const int sign = (ct % 2 == 0) ? 1 : -1;
      Real* out_re = re_[nxt][static_cast<std::size_t>(ct)].data();
      Real* out_im = im_[nxt][static_cast<std::size_t>(ct)].data();
      const Real* ph_re = phr_[static_cast<std::size_t>(ct)].data();
      const Real* ph_im = phi_[static_cast<std::size_t>(ct)].data();

      std::int64_t sbase = tbase;
      int pd_s = pd_t;
      std::int64_t k_offset = 0;  // source k = target k - k_offset
      bool missing_source_row = false;
      if (axis < d_ - 1) {
        const int src_po = po[static_cast<std::size_t>(axis)] - sign;
        if (std::abs(src_po) > rb_) {
          missing_source_row = true;
        } else {
          std::int64_t stride = w_;
          for (int i = axis + 1; i < d_ - 1; ++i) stride *= w_;
          sbase = tbase - sign * stride;
          pd_s = 0;
          for (int i = 0; i < d_ - 1; ++i) {
            const int v = (i == axis) ? src_po : po[static_cast<std::size_t>(i)];
            pd_s = std::max(pd_s, std::abs(v));
          }
        }
      } else {
        k_offset = sign;
      }

      if (missing_source_row) {
        std::fill(out_re + klo_t, out_re + khi_t + 1, Real(0));
        std::fill(out_im + klo_t, out_im + khi_t + 1, Real(0));
        continue;
      }
      const std::int64_t shift = sbase - tbase - k_offset;

      // Valid target k-range: the source's last-axis offset must stay in the box.
      std::int64_t lo = klo_t, hi = khi_t;
      if (k_offset == 1) {
        lo = std::max(lo, tbase + 1);  // source k = k - 1 >= -rb
        if (lo > klo_t) {
          std::fill(out_re + klo_t, out_re + lo, Real(0));
          std::fill(out_im + klo_t, out_im + lo, Real(0));
        }
      } else if (k_offset == -1) {
        hi = std::min(hi, tbase + 2 * static_cast<std::int64_t>(rb_) - 1);
        if (hi < khi_t) {
          std::fill(out_re + hi + 1, out_re + khi_t + 1, Real(0));
          std::fill(out_im + hi + 1, out_im + khi_t + 1, Real(0));
        }
      }
      if (lo > hi) continue;

      // Split [lo, hi] into runs of constant source coin. The coin can
      // only switch where |k_src| crosses a collar band edge, i.e. at
      // source offsets -(r+1), -(r-2), r-1 and r+2.
      std::array<std::int64_t, 12> cuts{};
      int ncuts = 0;
      cuts[static_cast<std::size_t>(ncuts++)] = lo;
      for (int r : collar_radii_) {
        for (const int e : {-(r + 1), -(r - 2), r - 1, r + 2}) {
          const std::int64_t kt = tbase + (e + rb_) + k_offset;
          if (kt > lo && kt <= hi) cuts[static_cast<std::size_t>(ncuts++)] = kt;
        }
      }
      cuts[static_cast<std::size_t>(ncuts++)] = hi + 1;
      std::sort(cuts.begin(), cuts.begin() + ncuts);

      for (int seg = 0; seg + 1 < ncuts; ++seg) {
        const std::int64_t s_lo = cuts[static_cast<std::size_t>(seg)];
        const std::int64_t s_hi = cuts[static_cast<std::size_t>(seg + 1)] - 1;
        if (s_lo > s_hi) continue;
        const int k_src = static_cast<int>(s_lo - tbase) - rb_ - static_cast<int>(k_offset);
        const int id = coin_id(pd_s, k_src);
        const Real* coin_row = coin_tab_[id].data() + 2 * ct * nc_;
        run_segment(out_re, out_im, in_re_ptr.data(), in_im_ptr.data(), ph_re, ph_im, coin_row,
                    s_lo, s_hi, shift);
      }
    }
  }

  int d_, nc_;
  BoxRegion box_;
  int rb_, w_;
  int threads_;
  std::int64_t nrows_ = 0, nsites_ = 0;
  int cur_ = 0;
  std::array<std::vector<Real>, 2> coin_tab_;
  std::vector<int> collar_radii_;
  std::array<std::vector<std::vector<Real>>, 2> re_, im_;  // [buffer][coin][site]
  std::vector<std::vector<Real>> phr_, phi_;               // [coin][site]
};

int initial_support_radius(const StateVector& psi) {
  int r = 0;
  const int nc = 2 * psi.d;
  for (std::int64_t si = 0; si < psi.region.site_count(); ++si) {
    bool nonzero = false;
    for (int c = 0; c < nc; ++c)
      if (psi.amp[static_cast<std::size_t>(si * nc + c)] != Complex(0, 0)) nonzero = true;
    if (nonzero)
      r = std::max(r, (psi.region.site_at(si) - psi.region.center).sup_norm());
  }
  return r;
}

template <typename Real>
MomentTrace run_evolution(const WalkSpec& spec, const StateVector& psi0, int steps,
                          const EvolveOptions& opt, const std::vector<int>& sample_times) {
  Stepper<Real> stepper(spec, opt.step_threads);
  stepper.load(psi0);

  const int r0 = initial_support_radius(psi0);
  if (!spec.closed && r0 + steps > spec.box.radius - 1)
    throw std::runtime_error(
        "evolve: light cone would reach the open array boundary (radius " +
        std::to_string(spec.box.radius) + ", needed " + std::to_string(r0 + steps + 1) + ")");

  std::vector<double> weights = opt.p_list;
  weights.insert(weights.begin(), 0.0);  // norm tracked alongside the moments

  MomentTrace trace;
  trace.p_list = opt.p_list;
  trace.field_seed = spec.field.seed();
  trace.running_sup.assign(opt.p_list.size(), 0.0);

  std::size_t next_sample = 0;
  const auto record = [&](int t) {
    const std::vector<double> sums = stepper.weighted_sums(weights, opt.moment_center);
    trace.times.push_back(t);
    trace.norms.push_back(std::sqrt(sums[0]));
    std::vector<double> ms(sums.begin() + 1, sums.end());
    for (std::size_t pi = 0; pi < ms.size(); ++pi)
      trace.running_sup[pi] = std::max(trace.running_sup[pi], ms[pi]);
    trace.moments.push_back(std::move(ms));
  };

  if (next_sample < sample_times.size() && sample_times[next_sample] == 0) {
    record(0);
    ++next_sample;
  }
  for (int t = 1; t <= steps; ++t) {
    stepper.step(std::min(r0 + t, spec.box.radius));
    if (next_sample < sample_times.size() && sample_times[next_sample] == t) {
      record(t);
      ++next_sample;
    }
  }
  trace.boundary_mass = stepper.edge_mass(2);
  return trace;
}

}  // namespace

MomentTrace evolve_moments(const WalkSpec& spec, const StateVector& psi0, int steps,
                           const EvolveOptions& opt) {
  std::vector<int> sample_times = opt.sample_times;
  if (sample_times.empty()) {
    sample_times.resize(static_cast<std::size_t>(steps) + 1);
    for (int t = 0; t <= steps; ++t) sample_times[static_cast<std::size_t>(t)] = t;
  }
  if (!std::is_sorted(sample_times.begin(), sample_times.end()))
    throw std::invalid_argument("evolve: sample times must be ascending");
  if (!sample_times.empty() && (sample_times.front() < 0 || sample_times.back() > steps))
    throw std::invalid_argument("evolve: sample times outside [0, steps]");

  if (opt.single_precision) return run_evolution<float>(spec, psi0, steps, opt, sample_times);
  return run_evolution<double>(spec, psi0, steps, opt, sample_times);
}

double growth_exponent(const MomentTrace& trace, int p_index, int t_min, int t_max) {
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < trace.times.size(); ++i) {
    const int t = trace.times[i];
    const double m = trace.moments[i][static_cast<std::size_t>(p_index)];
    if (t >= std::max(t_min, 1) && t <= t_max && m > 0.0) {
      xs.push_back(std::log(static_cast<double>(t)));
      ys.push_back(std::log(m));
    }
  }
  if (xs.size() < 2) throw std::runtime_error("growth_exponent: not enough usable samples");
  return least_squares(xs, ys).slope;
}

DynamicsResult localization_experiment(const DynamicsConfig& config) {
  const int d = config.d;
  const LocalizationCheck loc = check_localizing(config.pi);
  if (!config.ballistic_control && !loc.localizing)
    throw std::invalid_argument("localization_experiment: permutation is not localizing");
  if (config.steps < 10) throw std::invalid_argument("localization_experiment: too few steps");

  const int box_radius =
      config.box_radius > 0 ? config.box_radius
                            : (config.ballistic_control ? config.steps + 2 : 40);
  const int early = config.early_step > 0 ? config.early_step : config.steps / 10;

  const CoinMatrix cpi = permutation_matrix(config.pi);
  const CoinMatrix coin = config.ballistic_control
                              ? dft_coin(d)
                              : perturb_coin(cpi, config.delta, derive_seed(config.seed, 0xC011));

  std::vector<int> sample_times = config.sample_times;
  if (sample_times.empty()) {
    const BoxRegion probe{d, Site::zero(), box_radius + 1};
    if (probe.site_count() <= 50000) {
      for (int t = 0; t <= config.steps; ++t) sample_times.push_back(t);
    } else {
      // Geometric sampling plus the anchors the statistics need.
      sample_times.push_back(0);
      double t = 4.0;
      while (t < config.steps) {
        sample_times.push_back(static_cast<int>(t));
        t *= 1.3;
      }
      sample_times.push_back(early);
      sample_times.push_back(config.steps);
      std::sort(sample_times.begin(), sample_times.end());
      sample_times.erase(std::unique(sample_times.begin(), sample_times.end()),
                         sample_times.end());
    }
  }

  const bool big_box = BoxRegion{d, Site::zero(), box_radius + 1}.site_count() > 200000;
  const bool single_precision = config.single_precision || (config.ballistic_control && big_box);

  DynamicsResult result;
  result.box_radius = box_radius;
  result.traces.assign(static_cast<std::size_t>(config.realizations), MomentTrace{});

  const auto run_one = [&](std::int64_t i, int step_threads) {
    const PhaseField field(d, BoxRegion{d, Site::zero(), box_radius + 2}, config.dist,
                           derive_seed(config.seed, static_cast<std::uint64_t>(i)));
    const WalkSpec spec = closed_walk_spec(d, coin, config.pi, box_radius, Site::zero(), field);
    const StateVector psi0 =
        StateVector::point(d, spec.box, config.initial_tau, Site::zero());
    EvolveOptions opt;
    opt.sample_times = sample_times;
    opt.p_list = config.p_list;
    opt.single_precision = single_precision;
    opt.step_threads = step_threads;
    MomentTrace trace = evolve_moments(spec, psi0, config.steps, opt);
    trace.initial_state = to_string(BasisState{config.initial_tau, Site::zero()}, d);
    result.traces[static_cast<std::size_t>(i)] = std::move(trace);
  };

  if (big_box) {
    for (int i = 0; i < config.realizations; ++i) run_one(i, default_thread_count());
  } else {
    parallel_for(config.realizations, [&](std::int64_t i) { run_one(i, 1); });
  }

  const auto moment_at = [&](const MomentTrace& tr, int t) {
    for (std::size_t i = 0; i < tr.times.size(); ++i)
      if (tr.times[i] == t) return tr.moments[i][0];
    throw std::logic_error("localization_experiment: sample time missing");
  };
  for (const auto& tr : result.traces) {
    const double late = moment_at(tr, config.steps);
    const double early_m = moment_at(tr, early);
    result.saturation_ratios.push_back(
        early_m > 0.0 ? late / early_m : std::numeric_limits<double>::infinity());
    result.growth_exponents.push_back(growth_exponent(tr, 0, config.steps / 10, config.steps));
    result.boundary_mass = std::max(result.boundary_mass, tr.boundary_mass);
  }
  result.median_saturation = median(result.saturation_ratios);
  result.median_growth_exponent = median(result.growth_exponents);
  return result;
}

}  // namespace qwloc
