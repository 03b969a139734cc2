#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fadenet/dynamics.hpp"

namespace fadenet {

class hypothesis_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class AttractorMode { kSigmoidal, kInclusion };

inline const char* mode_name(AttractorMode mode) {
  return mode == AttractorMode::kSigmoidal ? "sigmoidal" : "inclusion";
}

struct PullbackConfig {
  double time = 0.0;               // attractor section time t
  std::vector<double> tau_list;    // pullback depths, increasing
  std::size_t samples_per_tau = 8;
  std::vector<SelectorPolicy> policies;  // inclusion mode; defaults when empty
  std::uint64_t seed = 0;
  StepMethod method = StepMethod::kEuler;
  double step = 0.01;
  double window = 1.0;  // stored history window of the sampled initial data
  unsigned threads = 1;
};

// Finite point cloud in the phase space approximating the pullback attractor
// section at one time: endpoints of trajectories launched from the absorbing
// ball at depth tau, for the largest configured tau. The drift between
// consecutive depths is the honest convergence diagnostic.
struct AttractorEstimate {
  double time = 0.0;
  double eps = 0.0;
  AttractorMode mode = AttractorMode::kInclusion;
  std::vector<double> tau_list;
  std::vector<History> cloud;       // deepest tau
  std::vector<double> drift;        // cloud distance between consecutive depths
  std::vector<double> start_radius; // sampling radius per depth
  std::size_t samples_per_tau = 0;
  std::vector<std::string> policies;
  std::uint64_t seed = 0;
  std::size_t nonfinite_dropped = 0;
  double max_member_norm = 0.0;
};

namespace detail {

inline std::vector<SelectorPolicy> default_policies(std::uint64_t seed) {
  return {SelectorPolicy{SelectorPolicy::Kind::kLower, 0, 1.0},
          SelectorPolicy{SelectorPolicy::Kind::kUpper, 0, 1.0},
          SelectorPolicy{SelectorPolicy::Kind::kMidpoint, 0, 1.0},
          SelectorPolicy{SelectorPolicy::Kind::kRandom, seed, 1.0}};
}

// Initial data filling the ball of the given radius: constant histories
// alternate with exponentially decaying profiles, which the constant ones
// under-explore in the delayed directions.
inline History sample_initial(Rng& rng, double gamma, double window, double step,
                              std::size_t dim, double radius, bool decaying) {
  std::vector<double> dir(dim);
  double sup = 0.0;
  for (auto& v : dir) {
    v = rng.uniform(-1.0, 1.0);
    sup = std::max(sup, std::abs(v));
  }
  if (sup == 0.0) {
    dir[0] = 1.0;
    sup = 1.0;
  }
  const double rho = radius * rng.uniform();
  for (auto& v : dir) v *= rho / sup;
  if (!decaying) return History::constant(gamma, window, step, dir);
  const double rate = rng.uniform(0.25 * gamma, 3.0 * gamma);
  const std::size_t cells = checked_ratio(window, step, "sample window");
  std::vector<double> samples((cells + 1) * dim);
  for (std::size_t k = 0; k <= cells; ++k) {
    const double t = -window + static_cast<double>(k) * step;
    const double profile = std::exp(rate * t);
    for (std::size_t c = 0; c < dim; ++c) samples[k * dim + c] = dir[c] * profile;
  }
  return History(gamma, window, step, dim, std::move(samples));
}

}  // namespace detail

// Pullback approximation of the attractor section at cfg.time: for every
// depth tau, trajectories start from sampled initial data in the absorbing
// ball at time - tau and are integrated to time; the cloud at the deepest tau
// is returned. Stimulus energy is integrated over the pullback horizon
// [time - tau_max, .], so constant stimuli are admissible on a finite run.
inline AttractorEstimate pullback_estimate(const NetworkParams& p, double eps,
                                           AttractorMode mode,
                                           const PullbackConfig& cfg) {
  const HypothesisReport report = check_hypotheses(p);
  if (!report.pass() || !report.constants)
    throw hypothesis_error("pullback estimate: hypotheses fail");
  if (!report.gamma_ok)
    throw hypothesis_error("pullback estimate: gamma is not below beta/2");
  if (mode == AttractorMode::kSigmoidal)
    require(eps > 0.0, "pullback estimate: sigmoidal mode needs eps > 0");
  require(!cfg.tau_list.empty(), "pullback estimate: empty tau list");
  require(cfg.samples_per_tau > 0, "pullback estimate: no samples requested");
  for (std::size_t i = 0; i < cfg.tau_list.size(); ++i) {
    require(cfg.tau_list[i] > 0.0, "pullback estimate: tau must be positive");
    if (i > 0)
      require(cfg.tau_list[i] > cfg.tau_list[i - 1],
              "pullback estimate: tau list must be increasing");
  }
  const AbsorbingConstants ac = *report.constants;
  const double tau_max = cfg.tau_list.back();
  const double energy_start = cfg.time - tau_max;

  std::vector<SelectorPolicy> policies;
  if (mode == AttractorMode::kInclusion)
    policies = cfg.policies.empty() ? detail::default_policies(cfg.seed) : cfg.policies;
  const std::size_t per_sample = mode == AttractorMode::kInclusion ? policies.size() : 1;

  AttractorEstimate est;
  est.time = cfg.time;
  est.eps = eps;
  est.mode = mode;
  est.tau_list = cfg.tau_list;
  est.samples_per_tau = cfg.samples_per_tau;
  est.seed = cfg.seed;
  for (const auto& pol : policies) est.policies.push_back(pol.name());

  std::vector<std::vector<History>> clouds(cfg.tau_list.size());
  std::size_t dropped = 0;
  for (std::size_t ti = 0; ti < cfg.tau_list.size(); ++ti) {
    const double tau = cfg.tau_list[ti];
    const double start = cfg.time - tau;
    const double radius = absorbing_radius(ac, p, start, std::min(start, energy_start));
    est.start_radius.push_back(radius);

    IntegratorConfig icfg;
    icfg.method = mode == AttractorMode::kSigmoidal ? cfg.method : StepMethod::kEuler;
    icfg.step = cfg.step;
    icfg.horizon = tau;
    icfg.start = start;

    const std::size_t jobs = cfg.samples_per_tau * per_sample;
    std::vector<std::optional<History>> slots(jobs);
    parallel_for(jobs, cfg.threads, [&](std::size_t job) {
      const std::size_t s = job / per_sample;
      const std::size_t pi = job % per_sample;
      Rng rng(Rng::mix(cfg.seed, Rng::mix(ti, s)));
      const History init = detail::sample_initial(rng, p.gamma, cfg.window, cfg.step,
                                                  p.dim(), radius, s % 2 == 1);
      try {
        if (mode == AttractorMode::kSigmoidal) {
          slots[job] = integrate_sigmoidal(p, eps, init, icfg).final_history();
        } else {
          SelectorPolicy pol = policies[pi];
          if (pol.kind == SelectorPolicy::Kind::kRandom)
            pol.seed = Rng::mix(pol.seed, Rng::mix(cfg.seed, Rng::mix(ti, job)));
          slots[job] = integrate_inclusion(p, eps, init, icfg, pol).final_history();
        }
      } catch (const numeric_error&) {
        slots[job].reset();
      }
    });
    for (auto& slot : slots) {
      if (slot)
        clouds[ti].push_back(std::move(*slot));
      else
        ++dropped;
    }
    require(!clouds[ti].empty(), "pullback estimate: every trajectory diverged");
  }

  est.nonfinite_dropped = dropped;
  for (std::size_t ti = 0; ti + 1 < clouds.size(); ++ti)
    est.drift.push_back(hausdorff_cloud_sym(clouds[ti], clouds[ti + 1]));
  est.cloud = std::move(clouds.back());
  for (const auto& member : est.cloud)
    est.max_member_norm = std::max(est.max_member_norm, member.gamma_norm());
  return est;
}

struct CloudDistance {
  double one_sided_ab = 0.0;
  double one_sided_ba = 0.0;
  double symmetric = 0.0;
};

inline CloudDistance attractor_distance(const AttractorEstimate& a,
                                        const AttractorEstimate& b) {
  require(a.time == b.time, "attractor distance: estimates at different times");
  CloudDistance d;
  d.one_sided_ab = hausdorff_cloud(a.cloud, b.cloud);
  d.one_sided_ba = hausdorff_cloud(b.cloud, a.cloud);
  d.symmetric = std::max(d.one_sided_ab, d.one_sided_ba);
  return d;
}

struct AttractorSweepRow {
  double eps = 0.0;
  double dist_eps_to_hard = 0.0;  // one-sided, inflated cloud to hard-step cloud
  double dist_hard_to_eps = 0.0;  // containment direction, expected ~ 0
  double dist_sig_to_hard = 0.0;  // sigmoidal cloud to hard-step cloud
  double drift = 0.0;             // deepest-depth drift of the inflated estimate
};

struct AttractorSweep {
  std::vector<AttractorSweepRow> rows;
  double sampling_tolerance = 0.0;  // 2x the largest observed cloud drift
  bool containment_ok = false;
  std::vector<AttractorEstimate> inflated;    // one per eps entry
  std::vector<AttractorEstimate> sigmoidal;   // one per positive eps entry
};

// Compares the inflated-inclusion estimates against the hard-step estimate
// over a descending eps grid ending at 0. Clouds are inner approximations, so
// only the containment direction is asserted; the other direction is reported
// as a trend.
inline AttractorSweep attractor_convergence_sweep(const NetworkParams& p,
                                                  const std::vector<double>& eps_list,
                                                  const PullbackConfig& cfg) {
  require(!eps_list.empty(), "attractor sweep: empty eps list");
  for (std::size_t i = 1; i < eps_list.size(); ++i)
    require(eps_list[i] < eps_list[i - 1], "attractor sweep: eps list must be descending");
  require(eps_list.back() == 0.0, "attractor sweep: eps list must end at 0");

  AttractorSweep sweep;
  sweep.inflated.reserve(eps_list.size());
  for (double eps : eps_list)
    sweep.inflated.push_back(pullback_estimate(p, eps, AttractorMode::kInclusion, cfg));
  const AttractorEstimate& hard = sweep.inflated.back();

  double max_drift = 0.0;
  for (const auto& est : sweep.inflated)
    for (double d : est.drift) max_drift = std::max(max_drift, d);

  for (std::size_t i = 0; i < eps_list.size(); ++i) {
    AttractorSweepRow row;
    row.eps = eps_list[i];
    row.drift = sweep.inflated[i].drift.empty() ? 0.0 : sweep.inflated[i].drift.back();
    if (eps_list[i] > 0.0) {
      const CloudDistance d = attractor_distance(sweep.inflated[i], hard);
      row.dist_eps_to_hard = d.one_sided_ab;
      row.dist_hard_to_eps = d.one_sided_ba;
      sweep.sigmoidal.push_back(
          pullback_estimate(p, eps_list[i], AttractorMode::kSigmoidal, cfg));
      row.dist_sig_to_hard = hausdorff_cloud(sweep.sigmoidal.back().cloud, hard.cloud);
      for (double dr : sweep.sigmoidal.back().drift) max_drift = std::max(max_drift, dr);
    }
    sweep.rows.push_back(row);
  }
  sweep.sampling_tolerance = 2.0 * max_drift + 1e-9;
  sweep.containment_ok = std::all_of(
      sweep.rows.begin(), sweep.rows.end(), [&](const AttractorSweepRow& row) {
        return row.dist_hard_to_eps <= sweep.sampling_tolerance;
      });
  return sweep;
}

}  // namespace fadenet
