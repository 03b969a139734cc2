#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "fadenet/phase_space.hpp"

namespace fadenet {

// Positive Borel measure on (-inf, 0] built from point masses and
// exponential-tail densities coeff * e^{rate t}. The class is closed under
// the finite-gamma-moment requirement (every rate strictly above gamma) and
// admits closed-form quadrature against piecewise-linear paths.
class DelayMeasure {
 public:
  struct Atom {
    double location;  // <= 0
    double weight;    // > 0
  };
  struct ExpTerm {
    double coeff;  // > 0
    double rate;   // > 0, density coeff * e^{rate t}
  };

  DelayMeasure() = default;
  DelayMeasure(std::vector<Atom> atoms, std::vector<ExpTerm> exp_terms)
      : atoms_(std::move(atoms)), exp_terms_(std::move(exp_terms)) {
    for (const auto& a : atoms_) {
      require(a.location <= 0.0, "measure: atom location must be <= 0");
      require(a.weight > 0.0, "measure: atom weight must be positive");
      total_variation_ += a.weight;
    }
    for (const auto& e : exp_terms_) {
      require(e.coeff > 0.0, "measure: density coefficient must be positive");
      require(e.rate > 0.0, "measure: density rate must be positive");
      total_variation_ += e.coeff / e.rate;
    }
  }

  static DelayMeasure unit_atom(double location) {
    return DelayMeasure({Atom{location, 1.0}}, {});
  }

  const std::vector<Atom>& atoms() const { return atoms_; }
  const std::vector<ExpTerm>& exp_terms() const { return exp_terms_; }
  double total_variation() const { return total_variation_; }
  bool empty() const { return atoms_.empty() && exp_terms_.empty(); }

  // integral of e^{-gamma t}; nullopt when some density rate is <= gamma
  std::optional<double> gamma_moment(double gamma) const {
    double sum = 0.0;
    for (const auto& a : atoms_) sum += a.weight * std::exp(-gamma * a.location);
    for (const auto& e : exp_terms_) {
      if (e.rate <= gamma) return std::nullopt;
      sum += e.coeff / (e.rate - gamma);
    }
    return sum;
  }

 private:
  std::vector<Atom> atoms_;
  std::vector<ExpTerm> exp_terms_;
  double total_variation_ = 0.0;
};

namespace detail {

// e^{rate t} recomputed exactly every block to keep the rolling product from
// accumulating drift over long windows
class RollingExp {
 public:
  RollingExp(double rate, double t0, double step)
      : rate_(rate), t0_(t0), step_(step), factor_(std::exp(rate * step)) {
    value_ = std::exp(rate * t0);
  }
  double value() const { return value_; }
  void advance() {
    ++index_;
    if (index_ % 256 == 0) {
      value_ = std::exp(rate_ * (t0_ + static_cast<double>(index_) * step_));
    } else {
      value_ *= factor_;
    }
  }

 private:
  double rate_, t0_, step_, factor_, value_;
  std::size_t index_ = 0;
};

}  // namespace detail

// Exact integral of a bounded representable path against the measure. The
// density part is closed-form per grid cell (the path is linear there) and on
// the tail (the path is frozen there); atoms evaluate the path pointwise.
inline double integrate(const DelayMeasure& mu, const PathView& f) {
  require(f.bounded(), "integrate: path is unbounded on the tail");
  double total = 0.0;
  for (const auto& a : mu.atoms()) total += a.weight * f(a.location);
  for (const auto& e : mu.exp_terms()) {
    const double lam = e.rate;
    double sum = 0.0;
    detail::RollingExp weight(lam, -f.window, f.step);
    double e_lo = weight.value();
    double v_lo = f.node(0);
    for (std::size_t k = 0; k + 1 < f.count; ++k) {
      weight.advance();
      const double e_hi = weight.value();
      const double v_hi = f.node(k + 1);
      const double slope = (v_hi - v_lo) / f.step;
      sum += e_hi * (v_hi / lam - slope / (lam * lam)) -
             e_lo * (v_lo / lam - slope / (lam * lam));
      e_lo = e_hi;
      v_lo = v_hi;
    }
    // frozen tail: anchor * integral of e^{lam t} over (-inf, -window]
    sum += f.anchor() * std::exp(-lam * f.window) / lam;
    total += e.coeff * sum;
  }
  return total;
}

enum class Region { kBelow, kMiddle, kAbove };

inline Region classify(double value, double half_width) {
  if (value < -half_width) return Region::kBelow;
  if (value > half_width) return Region::kAbove;
  return Region::kMiddle;  // closed middle band, boundaries included
}

struct PartitionMasses {
  double below = 0.0;
  double middle = 0.0;
  double above = 0.0;
  double total() const { return below + middle + above; }
};

namespace detail {

struct TailPiece {
  double lo;  // -inf allowed
  double hi;
  Region region;
};

// Splits the tail (-inf, -window] of x - threshold into maximal pieces on
// which the classification against the +-half_width band is constant. On the
// tail e^{tail_rate t} x(t) is constant, so x is monotone there and each band
// edge is crossed at most once, at a point available in closed form.
inline std::vector<TailPiece> tail_pieces(const PathView& x, double threshold,
                                          double half_width) {
  std::vector<TailPiece> pieces;
  const double anchor = x.anchor();
  const double rho = x.tail_rate;
  if (rho == 0.0 || anchor == 0.0) {
    const double value = (anchor == 0.0 ? 0.0 : anchor) - threshold;
    pieces.push_back({-std::numeric_limits<double>::infinity(), -x.window,
                      classify(value, half_width)});
    return pieces;
  }
  double crossings[2];
  std::size_t found = 0;
  for (double level : {threshold - half_width, threshold + half_width}) {
    const double ratio = level / anchor;
    if (ratio <= 0.0) continue;
    const double t = -x.window - std::log(ratio) / rho;
    if (t < -x.window) crossings[found++] = t;
  }
  std::sort(crossings, crossings + found);
  double lo = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i <= found; ++i) {
    const double hi = i < found ? crossings[i] : -x.window;
    if (hi <= lo) continue;
    Region region;
    if (std::isinf(lo)) {
      // deepest piece: x diverges with the sign of the anchor
      region = anchor > 0.0 ? Region::kAbove : Region::kBelow;
    } else {
      const double probe = 0.5 * (lo + hi);
      region = classify(x(probe) - threshold, half_width);
    }
    pieces.push_back({lo, hi, region});
    lo = hi;
  }
  return pieces;
}

inline double exp_mass(double coeff, double rate, double lo, double hi) {
  const double upper = std::exp(rate * hi);
  const double lower = std::isinf(lo) ? 0.0 : std::exp(rate * lo);
  return coeff * (upper - lower) / rate;
}

// In-cell crossing times of the linear piece v0 -> v1 against the band edges,
// strictly inside (t_lo, t_lo + step), ascending. Exact linear solves.
inline std::size_t cell_crossings(double t_lo, double step, double v0, double v1,
                                  double half_width, double out[2]) {
  std::size_t found = 0;
  if (v0 == v1) return 0;
  for (double level : {-half_width, half_width}) {
    const double theta = (level - v0) / (v1 - v0);
    if (theta > 0.0 && theta < 1.0) out[found++] = t_lo + theta * step;
  }
  if (found == 2 && out[0] > out[1]) std::swap(out[0], out[1]);
  return found;
}

}  // namespace detail

// Measure of the three preimage sets of x - threshold relative to the closed
// band [-half_width, half_width]. Exact up to floating point: the path is
// linear per cell and monotone on the tail, so every region boundary is
// located by a closed-form solve.
inline PartitionMasses partition_masses(const DelayMeasure& mu, const PathView& x,
                                        double threshold, double half_width) {
  require(half_width >= 0.0, "partition: negative half width");
  PartitionMasses masses;
  auto add = [&masses](Region r, double m) {
    switch (r) {
      case Region::kBelow: masses.below += m; break;
      case Region::kMiddle: masses.middle += m; break;
      case Region::kAbove: masses.above += m; break;
    }
  };

  for (const auto& a : mu.atoms())
    add(classify(x(a.location) - threshold, half_width), a.weight);

  const auto tail = detail::tail_pieces(x, threshold, half_width);
  for (const auto& e : mu.exp_terms()) {
    detail::RollingExp weight(e.rate, -x.window, x.step);
    double e_lo = weight.value();
    double v_lo = x.node(0) - threshold;
    for (std::size_t k = 0; k + 1 < x.count; ++k) {
      const double t_lo = -x.window + static_cast<double>(k) * x.step;
      weight.advance();
      const double e_hi = weight.value();
      const double v_hi = x.node(k + 1) - threshold;
      double cross[2];
      const std::size_t nc =
          detail::cell_crossings(t_lo, x.step, v_lo, v_hi, half_width, cross);
      if (nc == 0) {
        add(classify(0.5 * (v_lo + v_hi), half_width),
            e.coeff * (e_hi - e_lo) / e.rate);
      } else {
        double seg_lo = t_lo;
        double seg_elo = e_lo;
        for (std::size_t i = 0; i <= nc; ++i) {
          const double seg_hi = i < nc ? cross[i] : t_lo + x.step;
          const double seg_ehi = i < nc ? std::exp(e.rate * seg_hi) : e_hi;
          if (seg_hi > seg_lo) {
            const double mid = 0.5 * (seg_lo + seg_hi);
            const double v_mid = v_lo + (v_hi - v_lo) * (mid - t_lo) / x.step;
            add(classify(v_mid, half_width), e.coeff * (seg_ehi - seg_elo) / e.rate);
          }
          seg_lo = seg_hi;
          seg_elo = seg_ehi;
        }
      }
      e_lo = e_hi;
      v_lo = v_hi;
    }
    for (const auto& piece : tail)
      add(piece.region, detail::exp_mass(e.coeff, e.rate, piece.lo, piece.hi));
  }
  return masses;
}

}  // namespace fadenet
