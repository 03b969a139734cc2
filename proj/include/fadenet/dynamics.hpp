#pragma once

#include <cstring>
#include <deque>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "fadenet/model.hpp"

namespace fadenet {

enum class StepMethod { kEuler, kRk4Interp };

struct IntegratorConfig {
  StepMethod method = StepMethod::kEuler;
  double step = 0.0;
  double horizon = 0.0;
  double start = 0.0;
  double residual_tol = 0.0;

  std::size_t steps() const { return checked_ratio(horizon, step, "horizon"); }
};

// Rule picking one point of each box component per step. The extreme and
// midpoint rules are deterministic; kRandom draws per component from its own
// stream; kBangBang alternates between the faces with the given period.
struct SelectorPolicy {
  enum class Kind { kLower, kUpper, kMidpoint, kRandom, kBangBang };
  Kind kind = Kind::kMidpoint;
  std::uint64_t seed = 0;
  double period = 1.0;

  std::string name() const {
    switch (kind) {
      case Kind::kLower: return "lower";
      case Kind::kUpper: return "upper";
      case Kind::kMidpoint: return "midpoint";
      case Kind::kRandom: return "random";
      case Kind::kBangBang: return "bang_bang";
    }
    return "?";
  }
};

class numeric_error : public std::runtime_error {
 public:
  numeric_error(const std::string& msg, std::size_t step, std::size_t component)
      : std::runtime_error(msg), step(step), component(component) {}
  std::size_t step;
  std::size_t component;
};

struct TrajectoryRecord {
  double eps = 0.0;
  StepMethod method = StepMethod::kEuler;
  std::string policy;  // empty for the sigmoidal flow
  std::uint64_t seed = 0;
  double start = 0.0;
  double step = 0.0;
  std::vector<double> times;                 // steps + 1 entries
  std::vector<std::vector<double>> states;   // per time
  std::vector<std::vector<double>> slopes;   // per step: (u_{m+1} - u_m) / h
  std::vector<double> gamma_norms;           // per time, |u_t|_gamma
  std::vector<History> endpoints;            // initial and final history
  const History& initial_history() const { return endpoints.front(); }
  const History& final_history() const { return endpoints.back(); }
};

namespace detail {

// Stored window of the running trajectory: a compacting ring of the last
// `count` states plus a monotone deque tracking the weighted sliding maximum
// that realizes |u_t|_gamma without rescanning the window.
class RollingState {
 public:
  explicit RollingState(const History& init)
      : gamma_(init.gamma()), window_(init.window()), step_(init.step()),
        dim_(init.dim()), count_(init.nodes()) {
    buf_.resize(2 * count_ * dim_);
    std::copy(init.samples().begin(), init.samples().end(), buf_.begin());
    for (std::size_t k = 0; k < count_; ++k) {
      const long j = static_cast<long>(k) - static_cast<long>(count_ - 1);
      push_weighted(j, sup_norm(buf_.data() + k * dim_));
    }
  }

  HistoryWindow frame() const {
    return HistoryWindow{buf_.data() + head_ * dim_, dim_, count_,
                         gamma_, window_, step_};
  }

  void push(std::span<const double> state) {
    ++now_;
    if (head_ + count_ < 2 * count_) {
      std::copy(state.begin(), state.end(), buf_.begin() + (head_ + count_) * dim_);
      ++head_;
    } else {
      std::memmove(buf_.data(), buf_.data() + (head_ + 1) * dim_,
                   (count_ - 1) * dim_ * sizeof(double));
      std::copy(state.begin(), state.end(), buf_.begin() + (count_ - 1) * dim_);
      head_ = 0;
    }
    push_weighted(now_, sup_norm(state.data()));
    while (!deque_.empty() &&
           deque_.front().first < now_ - static_cast<long>(count_ - 1))
      deque_.pop_front();
  }

  double gamma_norm() const {
    return std::exp(-gamma_ * static_cast<double>(now_) * step_) *
           deque_.front().second;
  }

  History history() const {
    const double* base = buf_.data() + head_ * dim_;
    return History(gamma_, window_, step_, dim_,
                   std::vector<double>(base, base + count_ * dim_));
  }

 private:
  double sup_norm(const double* row) const {
    double s = 0.0;
    for (std::size_t c = 0; c < dim_; ++c) s = std::max(s, std::abs(row[c]));
    return s;
  }

  void push_weighted(long j, double sup) {
    const double arg = gamma_ * static_cast<double>(j) * step_;
    require(std::abs(arg) < 600.0, "integration horizon too long for the weighted norm");
    const double w = std::exp(arg) * sup;
    while (!deque_.empty() && deque_.back().second <= w) deque_.pop_back();
    deque_.emplace_back(j, w);
  }

  double gamma_, window_, step_;
  std::size_t dim_, count_;
  std::vector<double> buf_;
  std::size_t head_ = 0;
  long now_ = 0;
  std::deque<std::pair<long, double>> deque_;
};

inline void check_finite(std::span<const double> v, std::size_t step, const char* what) {
  for (std::size_t c = 0; c < v.size(); ++c)
    if (!std::isfinite(v[c]))
      throw numeric_error(std::string(what) + " became non-finite at step " +
                              std::to_string(step) + ", component " + std::to_string(c),
                          step, c);
}

// Window of a Runge-Kutta stage at t + offset: past nodes are linear
// interpolations of the running window, the head node is the stage state.
inline void fill_stage_window(const HistoryWindow& base, double offset,
                              std::span<const double> head, std::vector<double>& buf) {
  const std::size_t count = base.count;
  const std::size_t dim = base.dim;
  buf.resize(count * dim);
  for (std::size_t c = 0; c < dim; ++c) {
    const PathView path = base.component(c);
    for (std::size_t k = 0; k + 1 < count; ++k) {
      const double rel = (static_cast<double>(k) + 1.0 - static_cast<double>(count)) *
                             base.step + offset;
      buf[k * dim + c] = path(rel);
    }
    buf[(count - 1) * dim + c] = head[c];
  }
}

inline void validate_initial(const NetworkParams& p, const History& u0,
                             const IntegratorConfig& cfg) {
  p.check_structure();
  require(u0.dim() == p.dim(), "integrate: initial history dimension mismatch");
  require(u0.gamma() == p.gamma, "integrate: initial history gamma mismatch");
  require(u0.step() == cfg.step, "integrate: history grid step must equal the step size");
  require(cfg.step > 0.0 && cfg.horizon > 0.0, "integrate: step and horizon must be positive");
}

template <class StepSlope>
TrajectoryRecord march(const NetworkParams& p, double eps, const History& u0,
                       const IntegratorConfig& cfg, StepSlope&& slope_of,
                       StepMethod method, std::string policy, std::uint64_t seed) {
  const std::size_t steps = cfg.steps();
  TrajectoryRecord rec;
  rec.eps = eps;
  rec.method = method;
  rec.policy = std::move(policy);
  rec.seed = seed;
  rec.start = cfg.start;
  rec.step = cfg.step;
  rec.times.reserve(steps + 1);
  rec.states.reserve(steps + 1);
  rec.slopes.reserve(steps);
  rec.gamma_norms.reserve(steps + 1);
  rec.endpoints.push_back(u0);

  RollingState win(u0);
  std::vector<double> state = u0.current();
  rec.times.push_back(cfg.start);
  rec.states.push_back(state);
  rec.gamma_norms.push_back(win.gamma_norm());

  std::vector<double> slope(p.dim());
  for (std::size_t m = 0; m < steps; ++m) {
    const double t = cfg.start + static_cast<double>(m) * cfg.step;
    slope_of(t, win.frame(), state, slope, m);
    check_finite(slope, m, "right-hand side");
    for (std::size_t c = 0; c < p.dim(); ++c) state[c] += cfg.step * slope[c];
    check_finite(state, m + 1, "state");
    win.push(state);
    rec.times.push_back(cfg.start + static_cast<double>(m + 1) * cfg.step);
    rec.states.push_back(state);
    rec.slopes.push_back(slope);
    rec.gamma_norms.push_back(win.gamma_norm());
  }
  rec.endpoints.push_back(win.history());
  return rec;
}

}  // namespace detail

// Fixed-step march of the sigmoidal system. kRk4Interp evaluates the stages
// on linearly interpolated windows; with delay terms present its observed
// order is interpolation-limited.
inline TrajectoryRecord integrate_sigmoidal(const NetworkParams& p, double eps,
                                            const History& u0,
                                            const IntegratorConfig& cfg) {
  require(eps > 0.0 && eps <= kEpsCap, "integrate: eps outside (0, 1/5]");
  detail::validate_initial(p, u0, cfg);
  const std::size_t dim = p.dim();

  if (cfg.method == StepMethod::kEuler) {
    auto slope = [&](double t, const HistoryWindow& w, const std::vector<double>&,
                     std::vector<double>& out, std::size_t) {
      rhs_sigmoidal(p, eps, t, w, out);
    };
    return detail::march(p, eps, u0, cfg, slope, cfg.method, "", 0);
  }

  std::vector<double> stage_buf;
  std::vector<double> k1(dim), k2(dim), k3(dim), k4(dim), y(dim);
  auto slope = [&](double t, const HistoryWindow& w, const std::vector<double>& state,
                   std::vector<double>& out, std::size_t) {
    const double h = cfg.step;
    rhs_sigmoidal(p, eps, t, w, k1);
    auto stage = [&](double offset, const std::vector<double>& k_prev, double weight,
                     std::vector<double>& k_out) {
      for (std::size_t c = 0; c < dim; ++c) y[c] = state[c] + weight * h * k_prev[c];
      detail::fill_stage_window(w, offset, y, stage_buf);
      const HistoryWindow sw{stage_buf.data(), w.dim, w.count, w.gamma, w.window, w.step};
      rhs_sigmoidal(p, eps, t + offset, sw, k_out);
    };
    stage(0.5 * h, k1, 0.5, k2);
    stage(0.5 * h, k2, 0.5, k3);
    stage(h, k3, 1.0, k4);
    for (std::size_t c = 0; c < dim; ++c)
      out[c] = (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]) / 6.0;
  };
  return detail::march(p, eps, u0, cfg, slope, cfg.method, "", 0);
}

// Euler march along one admissible trajectory of the inflated inclusion: each
// step takes the policy's selection from the value box. The result is a
// single selector trajectory, not the reachable set.
inline TrajectoryRecord integrate_inclusion(const NetworkParams& p, double eps,
                                            const History& u0,
                                            const IntegratorConfig& cfg,
                                            const SelectorPolicy& policy) {
  require(eps >= 0.0 && eps <= kEpsCap, "integrate: eps outside [0, 1/5]");
  require(cfg.method == StepMethod::kEuler, "inclusion trajectories use the Euler march");
  detail::validate_initial(p, u0, cfg);

  Rng rng(policy.seed);
  Box box;
  auto slope = [&](double t, const HistoryWindow& w, const std::vector<double>&,
                   std::vector<double>& out, std::size_t) {
    rhs_inclusion_box(p, eps, t, w, box);
    switch (policy.kind) {
      case SelectorPolicy::Kind::kLower:
        for (std::size_t c = 0; c < box.size(); ++c) out[c] = box[c].lo;
        break;
      case SelectorPolicy::Kind::kUpper:
        for (std::size_t c = 0; c < box.size(); ++c) out[c] = box[c].hi;
        break;
      case SelectorPolicy::Kind::kMidpoint:
        for (std::size_t c = 0; c < box.size(); ++c) out[c] = box[c].midpoint();
        break;
      case SelectorPolicy::Kind::kRandom:
        for (std::size_t c = 0; c < box.size(); ++c)
          out[c] = box[c].lo + rng.uniform() * box[c].width();
        break;
      case SelectorPolicy::Kind::kBangBang: {
        require(policy.period > 0.0, "bang_bang: period must be positive");
        const long phase =
            static_cast<long>(std::floor((t - cfg.start) / policy.period));
        for (std::size_t c = 0; c < box.size(); ++c)
          out[c] = (phase % 2 == 0) ? box[c].lo : box[c].hi;
        break;
      }
    }
  };
  return detail::march(p, eps, u0, cfg, slope, cfg.method, policy.name(), policy.seed);
}

struct MembershipReport {
  std::vector<double> residuals;  // per step
  double max_violation = 0.0;
  std::size_t worst_step = 0;
  bool pass(double tol) const { return max_violation <= tol; }
};

// Component-wise distance of the realized step slopes to the eps-box along
// the recorded trajectory. Euler slopes of the sigmoidal flow at the same eps
// sit inside the box up to quadrature roundoff; slopes checked against a
// smaller eps or produced by the Runge-Kutta march carry an O(h) defect.
inline MembershipReport residual_membership(const TrajectoryRecord& rec,
                                            const NetworkParams& p, double eps) {
  MembershipReport report;
  detail::RollingState win(rec.initial_history());
  Box box;
  report.residuals.reserve(rec.slopes.size());
  for (std::size_t m = 0; m < rec.slopes.size(); ++m) {
    const double t = rec.start + static_cast<double>(m) * rec.step;
    rhs_inclusion_box(p, eps, t, win.frame(), box);
    double viol = 0.0;
    for (std::size_t c = 0; c < box.size(); ++c) {
      const double d = (rec.states[m + 1][c] - rec.states[m][c]) / rec.step;
      viol = std::max(viol, box[c].distance(d));
    }
    report.residuals.push_back(viol);
    if (viol > report.max_violation) {
      report.max_violation = viol;
      report.worst_step = m;
    }
    win.push(rec.states[m + 1]);
  }
  return report;
}

struct SweepRow {
  double eps = 0.0;
  // sup over the shared grid of the state distance to the next-smaller eps;
  // NaN on the last row
  double distance_to_next = std::numeric_limits<double>::quiet_NaN();
  double residual_vs_hard = 0.0;  // membership defect against the eps = 0 box
};

struct ConvergenceSweep {
  std::vector<SweepRow> rows;
};

inline ConvergenceSweep sigmoidal_convergence_sweep(const NetworkParams& p,
                                                    const History& u0,
                                                    const IntegratorConfig& cfg,
                                                    const std::vector<double>& eps_list) {
  require(!eps_list.empty(), "sweep: empty eps list");
  for (std::size_t i = 0; i < eps_list.size(); ++i) {
    require(eps_list[i] > 0.0 && eps_list[i] <= kEpsCap, "sweep: eps outside (0, 1/5]");
    if (i > 0) require(eps_list[i] < eps_list[i - 1], "sweep: eps list must be descending");
  }
  ConvergenceSweep sweep;
  sweep.rows.resize(eps_list.size());
  TrajectoryRecord prev;
  for (std::size_t i = 0; i < eps_list.size(); ++i) {
    TrajectoryRecord rec = integrate_sigmoidal(p, eps_list[i], u0, cfg);
    sweep.rows[i].eps = eps_list[i];
    sweep.rows[i].residual_vs_hard = residual_membership(rec, p, 0.0).max_violation;
    if (i > 0) {
      double sup = 0.0;
      for (std::size_t m = 0; m < rec.states.size(); ++m)
        for (std::size_t c = 0; c < p.dim(); ++c)
          sup = std::max(sup, std::abs(rec.states[m][c] - prev.states[m][c]));
      sweep.rows[i - 1].distance_to_next = sup;
    }
    prev = std::move(rec);
  }
  return sweep;
}

}  // namespace fadenet
