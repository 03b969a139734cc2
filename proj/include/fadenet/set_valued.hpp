#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "fadenet/measures.hpp"
#include "fadenet/phase_space.hpp"

namespace fadenet {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  Interval() = default;
  Interval(double lo_, double hi_) : lo(lo_), hi(hi_) {
    require(lo <= hi, "interval: lo > hi");
  }
  static Interval point(double v) { return Interval(v, v); }

  double width() const { return hi - lo; }
  double midpoint() const { return 0.5 * (lo + hi); }
  bool contains(double v, double tol = 0.0) const {
    return v >= lo - tol && v <= hi + tol;
  }
  // distance of a point to the interval
  double distance(double v) const {
    return std::max({lo - v, v - hi, 0.0});
  }
  bool subset_of(const Interval& other, double tol = 0.0) const {
    return lo >= other.lo - tol && hi <= other.hi + tol;
  }
};

inline Interval operator+(const Interval& a, const Interval& b) {
  return Interval(a.lo + b.lo, a.hi + b.hi);
}
inline Interval operator+(const Interval& a, double s) {
  return Interval(a.lo + s, a.hi + s);
}
// signed scaling flips the orientation for negative factors
inline Interval scale(double s, const Interval& a) {
  return s >= 0.0 ? Interval(s * a.lo, s * a.hi) : Interval(s * a.hi, s * a.lo);
}

using Box = std::vector<Interval>;

// Half-width of the indeterminate band of the inflated step: eps on [0,1),
// with b(0) = 0. Strictly increasing on [0, 1/5].
inline double b_of(double eps) {
  require(eps >= 0.0 && eps <= 1.0, "b_of: eps outside [0, 1]");
  if (eps == 0.0) return 0.0;
  return eps * std::log((1.0 - eps) / eps);
}

// Smooth step 1 / (1 + e^{-s/eps}); Lipschitz with constant 1/(4 eps).
inline double sigmoid(double eps, double s) {
  require(eps > 0.0 && eps < 1.0, "sigmoid: eps outside (0, 1)");
  const double a = s / eps;
  if (a >= 0.0) return 1.0 / (1.0 + std::exp(-a));
  const double e = std::exp(a);
  return e / (1.0 + e);
}

// Set-valued step: [0, eps] below the band, [0, 1] on the closed band,
// [1-eps, 1] above it. eps = 0 gives the hard step {0} / [0,1] / {1}.
inline Interval chi(double eps, double s) {
  require(eps >= 0.0 && eps <= kEpsCap, "chi: eps outside [0, 1/5]");
  const double b = b_of(eps);
  switch (classify(s, b)) {
    case Region::kBelow: return Interval(0.0, eps);
    case Region::kAbove: return Interval(1.0 - eps, 1.0);
    case Region::kMiddle: return Interval(0.0, 1.0);
  }
  return Interval(0.0, 1.0);
}

// Value set of the integral of chi_eps(x(.) - threshold) against mu, taken
// over all integrable selectors. With (m-, m0, m+) the masses of the three
// preimage sets this is the interval
//   [ (1-eps) m+ ,  eps m- + m0 + m+ ].
inline Interval aumann_chi_integral(double eps, const PathView& x, double threshold,
                                    const DelayMeasure& mu) {
  require(eps >= 0.0 && eps <= kEpsCap, "aumann integral: eps outside [0, 1/5]");
  const PartitionMasses m = partition_masses(mu, x, threshold, b_of(eps));
  const double lo = (1.0 - eps) * m.above;
  const double hi = eps * m.below + m.middle + m.above;
  return Interval(std::min(lo, hi), std::max(lo, hi));
}

namespace detail {

// sigmoid with the saturated branches short-circuited; for |s/eps| >= 50 the
// result is identical to the exact formula at double precision except that
// the deep-negative branch returns 0 (its true value is below 2^-71)
inline double sigmoid_fast(double eps, double s) {
  const double a = s / eps;
  if (a >= 50.0) return 1.0;
  if (a <= -50.0) return 0.0;
  if (a >= 0.0) return 1.0 / (1.0 + std::exp(-a));
  const double e = std::exp(a);
  return e / (1.0 + e);
}

// adaptive Simpson, used only on the few cells where the path crosses the
// chi band edges inside a cell
template <class F>
double simpson_recurse(const F& f, double a, double b, double fa, double fm, double fb,
                       double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return simpson_recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

template <class F>
double adaptive_simpson(const F& f, double a, double b, double tol) {
  const double fa = f(a);
  const double m = 0.5 * (a + b);
  const double fm = f(m);
  const double fb = f(b);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_recurse(f, a, b, fa, fm, fb, whole, tol, 24);
}

}  // namespace detail

// Integral of sigmoid_eps(x(.) - threshold) against mu. The integrand is the
// piecewise-linear interpolant of the node values of the composition on cells
// where the classification against the chi band is constant, the exact
// composition (adaptive quadrature split at the band crossings) on the cells
// where it changes, and the region-wise frozen value on the tail pieces. The
// integrand is therefore a pointwise selector of chi_eps(x(.) - threshold),
// so the result always lies inside aumann_chi_integral at the same eps.
inline double sigma_integral(const DelayMeasure& mu, double eps, const PathView& x,
                             double threshold) {
  require(eps > 0.0 && eps <= kEpsCap, "sigma integral: eps outside (0, 1/5]");
  const double b = b_of(eps);
  double total = 0.0;
  for (const auto& a : mu.atoms())
    total += a.weight * detail::sigmoid_fast(eps, x(a.location) - threshold);

  if (mu.exp_terms().empty()) return total;

  const auto tail = detail::tail_pieces(x, threshold, b);
  for (const auto& e : mu.exp_terms()) {
    const double lam = e.rate;
    double sum = 0.0;
    detail::RollingExp weight(lam, -x.window, x.step);
    double e_lo = weight.value();
    double v_lo = x.node(0) - threshold;
    double s_lo = detail::sigmoid_fast(eps, v_lo);
    for (std::size_t k = 0; k + 1 < x.count; ++k) {
      const double t_lo = -x.window + static_cast<double>(k) * x.step;
      weight.advance();
      const double e_hi = weight.value();
      const double v_hi = x.node(k + 1) - threshold;
      const double s_hi = detail::sigmoid_fast(eps, v_hi);
      double cross[2];
      const std::size_t nc = detail::cell_crossings(t_lo, x.step, v_lo, v_hi, b, cross);
      if (nc == 0) {
        // linear interpolant of the sigmoid values; stays in the cell's band
        const double slope = (s_hi - s_lo) / x.step;
        sum += e_hi * (s_hi / lam - slope / (lam * lam)) -
               e_lo * (s_lo / lam - slope / (lam * lam));
      } else {
        const double vslope = (v_hi - v_lo) / x.step;
        auto g = [&](double t) {
          return std::exp(lam * t) *
                 detail::sigmoid_fast(eps, v_lo + vslope * (t - t_lo));
        };
        double seg_lo = t_lo;
        for (std::size_t i = 0; i <= nc; ++i) {
          const double seg_hi = i < nc ? cross[i] : t_lo + x.step;
          if (seg_hi > seg_lo)
            sum += detail::adaptive_simpson(g, seg_lo, seg_hi,
                                            1e-14 * std::max(1.0, e_hi * x.step));
          seg_lo = seg_hi;
        }
      }
      e_lo = e_hi;
      v_lo = v_hi;
      s_lo = s_hi;
    }
    for (const auto& piece : tail) {
      const double probe = std::isinf(piece.lo)
                               ? (x.anchor() > 0.0 ? 1.0
                                  : x.anchor() < 0.0
                                      ? 0.0
                                      : detail::sigmoid_fast(eps, -threshold))
                               : detail::sigmoid_fast(
                                     eps, x(0.5 * (piece.lo + piece.hi)) - threshold);
      sum += probe * detail::exp_mass(1.0, lam, piece.lo, piece.hi);
    }
    total += e.coeff * sum;
  }
  return total;
}

// One-sided Hausdorff pseudometric between nonempty intervals,
// sup over a in A of the distance from a to B.
inline double hausdorff(const Interval& a, const Interval& b) {
  return std::max({b.lo - a.lo, a.hi - b.hi, 0.0});
}

inline double hausdorff_sym(const Interval& a, const Interval& b) {
  return std::max(hausdorff(a, b), hausdorff(b, a));
}

// boxes are products of intervals and the state norm is the sup norm, so the
// distance is the component-wise maximum
inline double hausdorff_box(const Box& a, const Box& b) {
  require(!a.empty() && a.size() == b.size(), "hausdorff: box size mismatch");
  double best = 0.0;
  for (std::size_t c = 0; c < a.size(); ++c)
    best = std::max(best, hausdorff_sym(a[c], b[c]));
  return best;
}

namespace detail {

inline std::vector<double> node_weights(const History& h) {
  std::vector<double> w(h.nodes());
  for (std::size_t k = 0; k < h.nodes(); ++k)
    w[k] = std::exp(h.gamma() * h.node_time(k));
  return w;
}

inline double weighted_distance(const History& a, const History& b,
                                std::span<const double> w) {
  double best = 0.0;
  for (std::size_t k = 0; k < a.nodes(); ++k) {
    double sup = 0.0;
    for (std::size_t c = 0; c < a.dim(); ++c)
      sup = std::max(sup, std::abs(a.node(k, c) - b.node(k, c)));
    best = std::max(best, w[k] * sup);
  }
  return best;
}

}  // namespace detail

// One-sided cloud distance in the weighted norm: sup over p of the distance
// from p to the nearest member of q.
inline double hausdorff_cloud(std::span<const History> p, std::span<const History> q) {
  require(!p.empty() && !q.empty(), "hausdorff: empty cloud");
  for (const auto& h : p)
    require(h.same_geometry(q.front()), "hausdorff: cloud geometry mismatch");
  for (const auto& h : q)
    require(h.same_geometry(q.front()), "hausdorff: cloud geometry mismatch");
  const auto weights = detail::node_weights(q.front());
  double best = 0.0;
  for (const auto& a : p) {
    double nearest = std::numeric_limits<double>::infinity();
    for (const auto& b : q) {
      nearest = std::min(nearest, detail::weighted_distance(a, b, weights));
      if (nearest == 0.0) break;
    }
    best = std::max(best, nearest);
  }
  return best;
}

inline double hausdorff_cloud_sym(std::span<const History> p,
                                  std::span<const History> q) {
  return std::max(hausdorff_cloud(p, q), hausdorff_cloud(q, p));
}

}  // namespace fadenet
