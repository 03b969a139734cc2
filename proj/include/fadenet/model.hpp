#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fadenet/set_valued.hpp"

namespace fadenet {

// Decay coefficient catalog. Every variant has a closed-form infimum and a
// closed-form Lipschitz constant on [-r, r], so the decay hypothesis is
// decidable instead of trusted.
class DecayFn {
 public:
  enum class Kind { kConstant, kAffineClipped, kLogisticOffset };

  static DecayFn constant(double value) {
    require(std::isfinite(value), "decay: non-finite constant");
    return DecayFn(Kind::kConstant, value, 0.0, value);
  }
  // min(base + slope |s|, cap)
  static DecayFn affine_clipped(double base, double slope, double cap) {
    require(slope >= 0.0 && cap >= base, "decay: affine_clipped needs slope >= 0, cap >= base");
    return DecayFn(Kind::kAffineClipped, base, slope, cap);
  }
  // base + amp / (1 + e^{-rate s})
  static DecayFn logistic_offset(double base, double amp, double rate) {
    require(amp >= 0.0 && rate > 0.0, "decay: logistic_offset needs amp >= 0, rate > 0");
    return DecayFn(Kind::kLogisticOffset, base, amp, rate);
  }

  double operator()(double s) const {
    switch (kind_) {
      case Kind::kConstant: return p0_;
      case Kind::kAffineClipped: return std::min(p0_ + p1_ * std::abs(s), p2_);
      case Kind::kLogisticOffset: {
        const double a = p2_ * s;
        const double sig = a >= 0.0 ? 1.0 / (1.0 + std::exp(-a))
                                    : std::exp(a) / (1.0 + std::exp(a));
        return p0_ + p1_ * sig;
      }
    }
    return p0_;
  }

  double lower_bound() const { return p0_; }

  double sup_on(double r) const {
    switch (kind_) {
      case Kind::kConstant: return p0_;
      case Kind::kAffineClipped: return std::min(p0_ + p1_ * r, p2_);
      case Kind::kLogisticOffset: return (*this)(r);
    }
    return p0_;
  }

  double lipschitz_on(double) const {
    switch (kind_) {
      case Kind::kConstant: return 0.0;
      case Kind::kAffineClipped: return p1_;
      case Kind::kLogisticOffset: return 0.25 * p1_ * p2_;
    }
    return 0.0;
  }

  Kind kind() const { return kind_; }
  double param0() const { return p0_; }
  double param1() const { return p1_; }
  double param2() const { return p2_; }

 private:
  DecayFn(Kind kind, double p0, double p1, double p2)
      : kind_(kind), p0_(p0), p1_(p1), p2_(p2) {}
  Kind kind_;
  double p0_, p1_, p2_;
};

// External stimulus catalog: continuous by construction, with closed-form
// squared integrals (sums fall back to adaptive quadrature).
class StimulusFn {
 public:
  enum class Kind { kConstant, kSinusoid, kGaussianPulse, kSum };

  static StimulusFn constant(double value) {
    StimulusFn f(Kind::kConstant);
    f.p_ = {value, 0.0, 0.0};
    return f;
  }
  // amp * sin(2 pi freq t + phase)
  static StimulusFn sinusoid(double amp, double freq, double phase) {
    require(freq > 0.0, "stimulus: sinusoid needs freq > 0");
    StimulusFn f(Kind::kSinusoid);
    f.p_ = {amp, freq, phase};
    return f;
  }
  // amp * exp(-((t - center)/width)^2)
  static StimulusFn gaussian_pulse(double amp, double center, double width) {
    require(width > 0.0, "stimulus: gaussian pulse needs width > 0");
    StimulusFn f(Kind::kGaussianPulse);
    f.p_ = {amp, center, width};
    return f;
  }
  static StimulusFn sum(std::vector<StimulusFn> terms) {
    StimulusFn f(Kind::kSum);
    f.terms_ = std::move(terms);
    return f;
  }

  double operator()(double t) const {
    switch (kind_) {
      case Kind::kConstant: return p_[0];
      case Kind::kSinusoid:
        return p_[0] * std::sin(2.0 * std::numbers::pi * p_[1] * t + p_[2]);
      case Kind::kGaussianPulse: {
        const double u = (t - p_[1]) / p_[2];
        return p_[0] * std::exp(-u * u);
      }
      case Kind::kSum: {
        double s = 0.0;
        for (const auto& term : terms_) s += term(t);
        return s;
      }
    }
    return 0.0;
  }

  double sup_abs() const {
    switch (kind_) {
      case Kind::kConstant:
      case Kind::kSinusoid:
      case Kind::kGaussianPulse: return std::abs(p_[0]);
      case Kind::kSum: {
        double s = 0.0;
        for (const auto& term : terms_) s += term.sup_abs();
        return s;
      }
    }
    return 0.0;
  }

  bool square_integrable() const {
    switch (kind_) {
      case Kind::kConstant: return p_[0] == 0.0;
      case Kind::kSinusoid: return p_[0] == 0.0;
      case Kind::kGaussianPulse: return true;
      case Kind::kSum:
        return std::all_of(terms_.begin(), terms_.end(),
                           [](const StimulusFn& f) { return f.square_integrable(); });
    }
    return false;
  }

  // integral of I^2 over [t0, t1]
  double integral_sq(double t0, double t1) const {
    require(t1 >= t0, "stimulus: reversed integration interval");
    switch (kind_) {
      case Kind::kConstant: return p_[0] * p_[0] * (t1 - t0);
      case Kind::kSinusoid: {
        const double w = 2.0 * std::numbers::pi * p_[1];
        auto anti = [&](double t) {
          return 0.5 * t - std::sin(2.0 * (w * t + p_[2])) / (4.0 * w);
        };
        return p_[0] * p_[0] * (anti(t1) - anti(t0));
      }
      case Kind::kGaussianPulse: {
        const double amp = p_[0], center = p_[1], width = p_[2];
        const double coeff = amp * amp * width * std::sqrt(std::numbers::pi / 8.0);
        const double s = std::numbers::sqrt2 / width;
        return coeff * (std::erf(s * (t1 - center)) - std::erf(s * (t0 - center)));
      }
      case Kind::kSum: {
        auto sq = [this](double t) {
          const double v = (*this)(t);
          return v * v;
        };
        return detail::adaptive_simpson(sq, t0, t1, 1e-12 * std::max(1.0, t1 - t0));
      }
    }
    return 0.0;
  }

  Kind kind() const { return kind_; }
  const std::array<double, 3>& params() const { return p_; }
  const std::vector<StimulusFn>& terms() const { return terms_; }

 private:
  explicit StimulusFn(Kind kind) : kind_(kind) {}
  Kind kind_;
  std::array<double, 3> p_ = {0.0, 0.0, 0.0};
  std::vector<StimulusFn> terms_;
};

// All model coefficients. State layout: components 0..n-1 are the neuron
// potentials x_i, components n..n^2-1 are the coupling strengths z_ij for
// i != j in row-major pair order.
struct NetworkParams {
  std::size_t n = 0;
  double gamma = 0.0;  // phase-space weight
  double alpha = 0.0;  // uniform decay lower bound
  std::vector<DecayFn> decay_x;      // n entries
  std::vector<DecayFn> decay_z;      // n(n-1) entries, pair order
  std::vector<double> inhibition;    // c_ij >= 0, pair order
  std::vector<double> hebbian;       // d_ij >= 0, pair order
  std::vector<double> threshold;     // n entries
  std::vector<DelayMeasure> delay;   // n(n-1) entries, pair order
  std::vector<StimulusFn> stimulus;  // n entries

  std::size_t dim() const { return n * n; }
  std::size_t pairs() const { return n * (n - 1); }
  std::size_t x_index(std::size_t i) const { return i; }
  std::size_t pair_index(std::size_t i, std::size_t j) const {
    return i * (n - 1) + (j > i ? j - 1 : j);
  }
  std::size_t z_index(std::size_t i, std::size_t j) const {
    return n + pair_index(i, j);
  }

  void check_structure() const {
    require(n >= 1, "network: n must be >= 1");
    require(gamma > 0.0, "network: gamma must be positive");
    require(decay_x.size() == n, "network: decay_x size mismatch");
    require(decay_z.size() == pairs(), "network: decay_z size mismatch");
    require(inhibition.size() == pairs(), "network: inhibition size mismatch");
    require(hebbian.size() == pairs(), "network: hebbian size mismatch");
    require(threshold.size() == n, "network: threshold size mismatch");
    require(delay.size() == pairs(), "network: delay size mismatch");
    require(stimulus.size() == n, "network: stimulus size mismatch");
    for (double c : inhibition) require(c >= 0.0, "network: inhibition must be >= 0");
    for (double d : hebbian) require(d >= 0.0, "network: hebbian gain must be >= 0");
  }
};

// Read-only view of the stored window of a history, the form both History and
// the integrator's rolling window expose to the right-hand sides.
struct HistoryWindow {
  const double* data = nullptr;  // count x dim, row-major, oldest node first
  std::size_t dim = 0;
  std::size_t count = 0;
  double gamma = 0.0;
  double window = 0.0;
  double step = 0.0;

  PathView component(std::size_t c) const {
    return PathView{data + c, dim, count, window, step, gamma};
  }
  double current(std::size_t c) const { return data[(count - 1) * dim + c]; }
};

inline HistoryWindow frame(const History& u) {
  return HistoryWindow{u.samples().data(), u.dim(),  u.nodes(),
                       u.gamma(),          u.window(), u.step()};
}

namespace detail {

inline void require_compatible(const NetworkParams& p, const HistoryWindow& u) {
  require(u.dim == p.dim(), "rhs: history dimension does not match the network");
  require(u.gamma == p.gamma, "rhs: history gamma does not match the network");
}

// the n(n-1) delayed signal integrals S_ij = integral of
// sigmoid_eps(x_i(.) - threshold_i) d mu_ij; the x-row of neuron i reuses
// S_ki for k != i
inline void signal_integrals(const NetworkParams& p, double eps,
                             const HistoryWindow& u, std::span<double> out) {
  for (std::size_t i = 0; i < p.n; ++i) {
    const PathView x_i = u.component(p.x_index(i));
    for (std::size_t j = 0; j < p.n; ++j) {
      if (j == i) continue;
      const std::size_t ij = p.pair_index(i, j);
      out[ij] = p.delay[ij].empty()
                    ? 0.0
                    : sigma_integral(p.delay[ij], eps, x_i, p.threshold[i]);
    }
  }
}

}  // namespace detail

// Right-hand side of the sigmoidal family at steepness eps.
inline void rhs_sigmoidal(const NetworkParams& p, double eps, double t,
                          const HistoryWindow& u, std::span<double> out) {
  require(eps > 0.0 && eps <= kEpsCap, "rhs: eps outside (0, 1/5]");
  detail::require_compatible(p, u);
  std::vector<double> signal(p.pairs());
  detail::signal_integrals(p, eps, u, signal);
  for (std::size_t i = 0; i < p.n; ++i) {
    const double xi = u.current(p.x_index(i));
    double acc = -p.decay_x[i](xi) * xi + p.stimulus[i](t);
    for (std::size_t k = 0; k < p.n; ++k) {
      if (k == i) continue;
      const std::size_t ki = p.pair_index(k, i);
      acc += (u.current(p.z_index(k, i)) - p.inhibition[ki]) * signal[ki];
    }
    out[p.x_index(i)] = acc;
  }
  for (std::size_t i = 0; i < p.n; ++i) {
    for (std::size_t j = 0; j < p.n; ++j) {
      if (j == i) continue;
      const std::size_t ij = p.pair_index(i, j);
      const double zij = u.current(p.z_index(i, j));
      const double xj_pos = std::max(u.current(p.x_index(j)), 0.0);
      out[p.z_index(i, j)] =
          -p.decay_z[ij](zij) * zij + p.hebbian[ij] * signal[ij] * xj_pos;
    }
  }
}

inline std::vector<double> rhs_sigmoidal(const NetworkParams& p, double eps, double t,
                                         const History& u) {
  std::vector<double> out(p.dim());
  rhs_sigmoidal(p, eps, t, frame(u), out);
  return out;
}

// Value box of the eps-inflated inclusion. The x rows are Minkowski sums of
// the Aumann intervals scaled by the signed coupling factors; the z rows are
// the single sigmoid values for eps > 0 and, at eps = 0 where the sigmoid
// degenerates, the hard-step Aumann interval scaled by the nonnegative
// Hebbian factor.
inline void rhs_inclusion_box(const NetworkParams& p, double eps, double t,
                              const HistoryWindow& u, Box& out) {
  require(eps >= 0.0 && eps <= kEpsCap, "box: eps outside [0, 1/5]");
  detail::require_compatible(p, u);
  out.assign(p.dim(), Interval());
  std::vector<Interval> aumann(p.pairs());
  for (std::size_t i = 0; i < p.n; ++i) {
    const PathView x_i = u.component(p.x_index(i));
    for (std::size_t j = 0; j < p.n; ++j) {
      if (j == i) continue;
      const std::size_t ij = p.pair_index(i, j);
      aumann[ij] = p.delay[ij].empty()
                       ? Interval()
                       : aumann_chi_integral(eps, x_i, p.threshold[i], p.delay[ij]);
    }
  }
  for (std::size_t i = 0; i < p.n; ++i) {
    const double xi = u.current(p.x_index(i));
    Interval row = Interval::point(-p.decay_x[i](xi) * xi + p.stimulus[i](t));
    for (std::size_t k = 0; k < p.n; ++k) {
      if (k == i) continue;
      const std::size_t ki = p.pair_index(k, i);
      row = row + scale(u.current(p.z_index(k, i)) - p.inhibition[ki], aumann[ki]);
    }
    out[p.x_index(i)] = row;
  }
  std::vector<double> signal;
  if (eps > 0.0) {
    signal.resize(p.pairs());
    detail::signal_integrals(p, eps, u, signal);
  }
  for (std::size_t i = 0; i < p.n; ++i) {
    for (std::size_t j = 0; j < p.n; ++j) {
      if (j == i) continue;
      const std::size_t ij = p.pair_index(i, j);
      const double zij = u.current(p.z_index(i, j));
      const double decay = -p.decay_z[ij](zij) * zij;
      const double gain = p.hebbian[ij] * std::max(u.current(p.x_index(j)), 0.0);
      out[p.z_index(i, j)] = eps > 0.0
                                 ? Interval::point(decay + gain * signal[ij])
                                 : scale(gain, aumann[ij]) + decay;
    }
  }
}

inline Box rhs_inclusion_box(const NetworkParams& p, double eps, double t,
                             const History& u) {
  Box out;
  rhs_inclusion_box(p, eps, t, frame(u), out);
  return out;
}

// Witnesses for the dissipativity hypothesis together with the derived
// absorbing-set constants.
struct AbsorbingConstants {
  double eta = 0.0;    // shared Young weight for all pairs
  double omega = 0.0;  // inhibition share
  double xi = 0.0;     // stimulus share
  double beta = 0.0;   // decay rate of the squared norm
  double K = 0.0;      // (1/omega) max_i sum_{k != i} c_ki^2 |mu_ki|^2
  double K_sum = 0.0;  // same with the sum over all pairs
};

struct HypothesisReport {
  bool decay_ok = false;
  bool measures_ok = false;
  bool stimuli_ok = false;
  bool coupling_ok = false;
  bool gamma_ok = false;
  bool stimuli_square_integrable = false;
  double margin = 0.0;  // min over pairs of 2 alpha^2 - (n-1)|mu|^2 (1 + d^2)
  std::vector<std::string> failures;
  std::optional<AbsorbingConstants> constants;

  bool pass() const { return decay_ok && measures_ok && stimuli_ok && coupling_ok; }
};

// Verifies the decay, measure-moment, stimulus and coupling-strength
// hypotheses. On a coupling pass the report carries a deterministic witness:
// the feasible interval for the shared Young weight eta is
// ( max_ij |mu|^2 (1+d^2) / (2 alpha),  alpha / (n-1) ), eta is its midpoint,
// and omega, xi and the retained decay margin each take a third of the
// remaining x-row slack.
inline HypothesisReport check_hypotheses(const NetworkParams& p) {
  p.check_structure();
  HypothesisReport report;

  report.decay_ok = p.alpha > 0.0;
  if (!report.decay_ok) report.failures.push_back("decay: alpha must be positive");
  auto check_decay = [&](const DecayFn& f, const std::string& name) {
    if (f.lower_bound() < p.alpha - 1e-15) {
      report.decay_ok = false;
      report.failures.push_back("decay: " + name + " drops below alpha");
    }
  };
  for (std::size_t i = 0; i < p.n; ++i)
    check_decay(p.decay_x[i], "A_" + std::to_string(i + 1));

  report.measures_ok = true;
  for (std::size_t i = 0; i < p.n; ++i) {
    for (std::size_t j = 0; j < p.n; ++j) {
      if (j == i) continue;
      const std::size_t ij = p.pair_index(i, j);
      check_decay(p.decay_z[ij],
                  "B_" + std::to_string(i + 1) + std::to_string(j + 1));
      if (!p.delay[ij].gamma_moment(p.gamma)) {
        report.measures_ok = false;
        report.failures.push_back("measure: gamma moment diverges for pair (" +
                                  std::to_string(i + 1) + "," +
                                  std::to_string(j + 1) + ")");
      }
    }
  }

  report.stimuli_ok = true;  // the catalog only holds continuous stimuli
  report.stimuli_square_integrable =
      std::all_of(p.stimulus.begin(), p.stimulus.end(),
                  [](const StimulusFn& f) { return f.square_integrable(); });

  double margin = 2.0 * p.alpha * p.alpha;
  double eta_lo = 0.0;
  for (std::size_t ij = 0; ij < p.pairs(); ++ij) {
    const double tv = p.delay[ij].total_variation();
    const double load = tv * tv * (1.0 + p.hebbian[ij] * p.hebbian[ij]);
    margin = std::min(margin,
                      2.0 * p.alpha * p.alpha - static_cast<double>(p.n - 1) * load);
    if (p.alpha > 0.0) eta_lo = std::max(eta_lo, load / (2.0 * p.alpha));
  }
  report.margin = margin;
  report.coupling_ok = margin > 0.0;
  if (!report.coupling_ok)
    report.failures.push_back("coupling: (n-1)|mu|^2(1+d^2) >= 2 alpha^2 for some pair");

  if (report.decay_ok && report.coupling_ok) {
    AbsorbingConstants ac;
    const double eta_hi =
        p.n > 1 ? p.alpha / static_cast<double>(p.n - 1) : p.alpha;
    ac.eta = 0.5 * (eta_lo + eta_hi);
    const double slack = 2.0 * p.alpha - 2.0 * static_cast<double>(p.n - 1) * ac.eta;
    ac.omega = slack / 3.0;
    ac.xi = slack / 3.0;
    double beta = slack / 3.0;
    double k_max = 0.0, k_sum = 0.0;
    for (std::size_t i = 0; i < p.n; ++i) {
      double row = 0.0;
      for (std::size_t k = 0; k < p.n; ++k) {
        if (k == i) continue;
        const std::size_t ki = p.pair_index(k, i);
        const double tv = p.delay[ki].total_variation();
        row += p.inhibition[ki] * p.inhibition[ki] * tv * tv;
      }
      k_max = std::max(k_max, row);
      k_sum += row;
    }
    for (std::size_t ij = 0; ij < p.pairs(); ++ij) {
      const double tv = p.delay[ij].total_variation();
      const double load = tv * tv * (1.0 + p.hebbian[ij] * p.hebbian[ij]);
      beta = std::min(beta, 2.0 * p.alpha - load / ac.eta);
    }
    ac.beta = beta;
    ac.K = k_max / ac.omega;
    ac.K_sum = k_sum / ac.omega;
    report.constants = ac;
    report.gamma_ok = p.gamma < 0.5 * beta;
    if (!report.gamma_ok)
      report.failures.push_back("gamma: must be below beta/2 for absorbing estimates");
  }
  return report;
}

// Radius of the absorbing ball at time t, with the stimulus energy taken over
// [t0, t].
inline double absorbing_radius(const AbsorbingConstants& ac, const NetworkParams& p,
                               double t, double t0) {
  require(t >= t0, "absorbing radius: t must be >= t0");
  double energy = 0.0;
  for (const auto& stim : p.stimulus) energy += stim.integral_sq(t0, t);
  require(std::isfinite(energy), "absorbing radius: divergent stimulus integral");
  return std::sqrt(ac.K / ac.beta) + std::sqrt(energy / ac.xi) + 1.0;
}

// Constants (k1, k2) with |u_t|_gamma <= k1 e^{k2 (t - t0)} for every
// trajectory starting in the radius-r ball with t0 in [a, b], valid for every
// eps and for inclusion selectors alike (the signal factors only enter
// through their [0, 1] bound).
inline std::pair<double, double> solution_bound_constants(const NetworkParams& p,
                                                          double r, double a, double b,
                                                          double horizon) {
  require(r > 0.0 && horizon > 0.0 && b >= a, "solution bound: bad arguments");
  double stim_bound = 0.0;
  for (const auto& stim : p.stimulus) stim_bound = std::max(stim_bound, stim.sup_abs());
  const double nn = static_cast<double>(p.n);
  const double coeff_x = -2.0 * p.alpha + 3.0 * (nn - 1.0) + 1.0;
  double coeff_z = -2.0 * p.alpha;
  double constant = nn * stim_bound * stim_bound;
  for (std::size_t ij = 0; ij < p.pairs(); ++ij) {
    const double tv = p.delay[ij].total_variation();
    coeff_z = std::max(coeff_z, -2.0 * p.alpha +
                                    (1.0 + p.hebbian[ij] * p.hebbian[ij]) * tv * tv);
    constant += p.inhibition[ij] * p.inhibition[ij] * tv * tv;
  }
  const double k = std::max({coeff_x, coeff_z, constant, 1e-2});
  const double k1 = std::max(r, std::sqrt(1.0 + nn * nn * r * r));
  return {k1, 0.5 * k};
}

}  // namespace fadenet
