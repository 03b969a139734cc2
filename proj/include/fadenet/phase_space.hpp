#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <utility>
#include <vector>

#include "fadenet/common.hpp"

namespace fadenet {

// One scalar signal on (-inf, 0]: values at the uniform grid nodes
// -window, -window+step, ..., 0, linear interpolation between nodes, and the
// continuation value(-window) * exp(-tail_rate * (t + window)) for t < -window.
// With tail_rate > 0 the signal grows into the past like exp(gamma |t|), which
// is exactly the largest growth the weighted sup-norm admits; with
// tail_rate == 0 the signal is frozen at its oldest value.
struct PathView {
  const double* data = nullptr;  // node k at data[k * stride]
  std::size_t stride = 1;
  std::size_t count = 0;  // number of nodes, window/step + 1
  double window = 0.0;
  double step = 0.0;
  double tail_rate = 0.0;

  double node(std::size_t k) const { return data[k * stride]; }
  double anchor() const { return node(0); }  // value at -window

  bool bounded() const { return tail_rate == 0.0 || anchor() == 0.0; }

  double operator()(double t) const {
    if (t <= -window) {
      return anchor() * std::exp(-tail_rate * (t + window));
    }
    const double pos = (t + window) / step;
    std::size_t k = static_cast<std::size_t>(pos);
    if (k >= count - 1) k = count - 2;
    const double frac = pos - static_cast<double>(k);
    const double a = node(k);
    const double b = node(k + 1);
    return a + frac * (b - a);
  }
};

// An owning scalar path; used for quadrature inputs that are not components
// of a stored history.
class ScalarPath {
 public:
  ScalarPath(double window, double step, double tail_rate, std::vector<double> samples)
      : window_(window), step_(step), tail_rate_(tail_rate), samples_(std::move(samples)) {
    require(window_ > 0.0, "path: window must be positive");
    require(tail_rate_ >= 0.0, "path: negative tail rate");
    const std::size_t cells = checked_ratio(window_, step_, "path window");
    require(samples_.size() == cells + 1, "path: sample count does not match the grid");
  }

  // samples f on the grid of [-window, 0]
  template <class F>
  static ScalarPath sample(double window, double step, double tail_rate, F&& f) {
    const std::size_t cells = checked_ratio(window, step, "path window");
    std::vector<double> values(cells + 1);
    for (std::size_t k = 0; k <= cells; ++k)
      values[k] = f(-window + static_cast<double>(k) * step);
    return ScalarPath(window, step, tail_rate, std::move(values));
  }

  PathView view() const {
    return PathView{samples_.data(), 1, samples_.size(), window_, step_, tail_rate_};
  }

  double operator()(double t) const { return view()(t); }

 private:
  double window_, step_, tail_rate_;
  std::vector<double> samples_;
};

// A past trajectory on (-inf, 0] with values in R^dim, stored on the uniform
// grid of [-window, 0] (row per node, node 0 at -window) and continued beyond
// the window by the exponential tail of each component. The weighted norm
//
//   |u|_gamma = max over nodes of e^{gamma t_k} sup-norm(u(t_k))
//
// is finite by construction: on the tail e^{gamma t} u(t) is constant, so the
// tail contributes exactly the node value at -window and the limit of
// e^{gamma t} u(t) at -infinity exists.
class History {
 public:
  History(double gamma, double window, double step, std::size_t dim,
          std::vector<double> samples)
      : gamma_(gamma), window_(window), step_(step), dim_(dim),
        samples_(std::move(samples)) {
    require(gamma_ > 0.0, "history: gamma must be positive");
    require(dim_ > 0, "history: dimension must be positive");
    const std::size_t cells = checked_ratio(window_, step_, "history window");
    nodes_ = cells + 1;
    require(samples_.size() == nodes_ * dim_, "history: sample count does not match the grid");
    for (double v : samples_)
      require(std::isfinite(v), "history: non-finite sample");
  }

  static History constant(double gamma, double window, double step,
                          std::span<const double> value) {
    const std::size_t cells = checked_ratio(window, step, "history window");
    std::vector<double> samples((cells + 1) * value.size());
    for (std::size_t k = 0; k <= cells; ++k)
      std::copy(value.begin(), value.end(), samples.begin() + k * value.size());
    return History(gamma, window, step, value.size(), std::move(samples));
  }

  double gamma() const { return gamma_; }
  double window() const { return window_; }
  double step() const { return step_; }
  std::size_t dim() const { return dim_; }
  std::size_t nodes() const { return nodes_; }
  double node_time(std::size_t k) const {
    return -window_ + static_cast<double>(k) * step_;
  }
  double node(std::size_t k, std::size_t c) const { return samples_[k * dim_ + c]; }
  const std::vector<double>& samples() const { return samples_; }

  PathView component(std::size_t c) const {
    return PathView{samples_.data() + c, dim_, nodes_, window_, step_, gamma_};
  }

  std::vector<double> current() const {
    return std::vector<double>(samples_.end() - dim_, samples_.end());
  }

  void evaluate(double t, std::span<double> out) const {
    require(t <= 0.0, "history: evaluation point must be <= 0");
    require(out.size() == dim_, "history: output size mismatch");
    for (std::size_t c = 0; c < dim_; ++c) out[c] = component(c)(t);
  }

  std::vector<double> evaluate(double t) const {
    std::vector<double> out(dim_);
    evaluate(t, out);
    return out;
  }

  double gamma_norm() const {
    double best = 0.0;
    for (std::size_t k = 0; k < nodes_; ++k) {
      double sup = 0.0;
      for (std::size_t c = 0; c < dim_; ++c)
        sup = std::max(sup, std::abs(samples_[k * dim_ + c]));
      best = std::max(best, std::exp(gamma_ * node_time(k)) * sup);
    }
    return best;
  }

  // History of the extended trajectory at its new final time. segment holds
  // the states at +step, +2 step, ..., flattened row-major; values that leave
  // the window are folded into the tail by re-anchoring at the new oldest
  // node.
  History shift_append(std::span<const double> segment) const {
    require(segment.size() % dim_ == 0, "shift_append: segment size is not a multiple of dim");
    const std::size_t m = segment.size() / dim_;
    if (m == 0) return *this;
    std::vector<double> out(nodes_ * dim_);
    for (std::size_t k = 0; k < nodes_; ++k) {
      const std::size_t j = k + m;  // index into the concatenated trajectory
      const double* src = j < nodes_ ? samples_.data() + j * dim_
                                     : segment.data() + (j - nodes_) * dim_;
      std::copy(src, src + dim_, out.begin() + k * dim_);
    }
    return History(gamma_, window_, step_, dim_, std::move(out));
  }

  bool same_geometry(const History& other) const {
    return gamma_ == other.gamma_ && window_ == other.window_ &&
           step_ == other.step_ && dim_ == other.dim_;
  }

 private:
  double gamma_, window_, step_;
  std::size_t dim_;
  std::size_t nodes_ = 0;
  std::vector<double> samples_;
};

inline double distance_gamma(const History& a, const History& b) {
  require(a.same_geometry(b), "distance: histories have different geometry");
  double best = 0.0;
  for (std::size_t k = 0; k < a.nodes(); ++k) {
    double sup = 0.0;
    for (std::size_t c = 0; c < a.dim(); ++c)
      sup = std::max(sup, std::abs(a.node(k, c) - b.node(k, c)));
    best = std::max(best, std::exp(a.gamma() * a.node_time(k)) * sup);
  }
  return best;
}

}  // namespace fadenet
