// Copyright 2026 The subgeo Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "subgeo/errors.hpp"
#include "subgeo/numerics.hpp"

namespace subgeo {

enum class Direction { increasing, decreasing };

// Interpolation between grid knots.
//   loglog     : log y linear in log x (x, y > 0)
//   linear     : y linear in x
//   step_right : y_i on [x_i, x_{i+1}), y_last on [x_last, inf)
//   step_left  : y_i on (x_{i-1}, x_i], right tail tag beyond x_last
enum class Interp { loglog, linear, step_right, step_left };

// Extrapolation outside the knot range. `power` continues the log-log slope
// of the boundary segment.
enum class Tail { constant, power, zero, infinite };

struct PowerLaw {
  double coef = 1.0;
  double exponent = -1.0;  // coef * x^exponent
};

struct Exponential {
  double coef = 1.0;
  double rate = 1.0;  // coef * exp(-rate * x)
};

struct LogDecay {
  double coef = 1.0;
  double scale = 1.0;  // coef * max(0, log(scale / x))
};

struct Grid {
  std::vector<double> x;
  std::vector<double> y;
  Interp interp = Interp::loglog;
  Tail left = Tail::constant;
  Tail right = Tail::constant;
};

// Opaque function; not serializable except through tabulate().
struct Callable {
  std::function<double(double)> fn;
  std::string label;
  std::vector<double> kinks;  // known nonsmooth points, used by quadrature
};

class MonotoneFn {
 public:
  using Form = std::variant<PowerLaw, Exponential, LogDecay, Grid, Callable>;

  MonotoneFn(Form form, Direction dir) : form_(std::move(form)), dir_(dir) { validate(); }

  static MonotoneFn power(double coef, double exponent) {
    return MonotoneFn(PowerLaw{coef, exponent},
                      exponent <= 0 ? Direction::decreasing : Direction::increasing);
  }
  static MonotoneFn constant(double c, Direction dir = Direction::decreasing) {
    return MonotoneFn(PowerLaw{c, 0.0}, dir);
  }
  static MonotoneFn grid(std::vector<double> x, std::vector<double> y, Interp interp, Direction dir,
                         Tail left = Tail::constant, Tail right = Tail::constant) {
    return MonotoneFn(Grid{std::move(x), std::move(y), interp, left, right}, dir);
  }
  static MonotoneFn callable(std::function<double(double)> fn, Direction dir, std::string label = {},
                             std::vector<double> kinks = {}) {
    return MonotoneFn(Callable{std::move(fn), std::move(label), std::move(kinks)}, dir);
  }

  const Form& form() const { return form_; }
  Direction direction() const { return dir_; }
  bool decreasing() const { return dir_ == Direction::decreasing; }
  double cap() const { return cap_; }
  double support_end() const { return support_end_; }
  bool is_grid() const { return std::holds_alternative<Grid>(form_); }
  const Grid& grid() const { return std::get<Grid>(form_); }
  bool serializable() const { return !std::holds_alternative<Callable>(form_); }

  // min(f, c)
  MonotoneFn capped(double c) const {
    require(c >= 0, "capped: cap must be nonnegative");
    MonotoneFn g = *this;
    g.cap_ = std::min(cap_, c);
    return g;
  }
  // f * 1[x < end]; only meaningful for decreasing functions.
  MonotoneFn truncated(double end) const {
    require(decreasing(), "truncated: only decreasing functions may be cut to zero");
    require(end > 0, "truncated: end must be positive");
    MonotoneFn g = *this;
    g.support_end_ = std::min(support_end_, end);
    return g;
  }

  double operator()(double x) const {
    if (x >= support_end_) return 0.0;
    const double v = base(x);
    return v < cap_ ? v : cap_;
  }

  // Points where the function may fail to be smooth.
  std::vector<double> kinks() const {
    std::vector<double> k;
    if (std::isfinite(support_end_)) k.push_back(support_end_);
    std::visit(
        [&](const auto& f) {
          using T = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<T, Grid>) {
            for (double x : f.x)
              if (x > 0) k.push_back(x);
          } else if constexpr (std::is_same_v<T, Callable>) {
            k.insert(k.end(), f.kinks.begin(), f.kinks.end());
          } else if constexpr (std::is_same_v<T, PowerLaw>) {
            if (std::isfinite(cap_) && f.coef > 0 && f.exponent != 0)
              k.push_back(std::pow(cap_ / f.coef, 1.0 / f.exponent));
          } else if constexpr (std::is_same_v<T, Exponential>) {
            if (std::isfinite(cap_) && f.coef > cap_ && f.rate > 0) k.push_back(std::log(f.coef / cap_) / f.rate);
          } else if constexpr (std::is_same_v<T, LogDecay>) {
            k.push_back(f.scale);
            if (std::isfinite(cap_) && f.coef > 0) k.push_back(f.scale * std::exp(-cap_ / f.coef));
          }
        },
        form_);
    std::sort(k.begin(), k.end());
    k.erase(std::unique(k.begin(), k.end()), k.end());
    return k;
  }

  // Power-law exponent of the behaviour as x -> inf; -inf for eventual zero
  // or faster-than-power decay; nullopt when unknown.
  std::optional<double> tail_exponent_at_infinity() const {
    if (std::isfinite(support_end_)) return -kInf;
    return std::visit(
        [&](const auto& f) -> std::optional<double> {
          using T = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<T, PowerLaw>) {
            if (f.coef == 0) return -kInf;
            return f.exponent;
          } else if constexpr (std::is_same_v<T, Exponential>) {
            if (f.coef == 0) return -kInf;
            return f.rate > 0 ? -kInf : (f.rate == 0 ? 0.0 : kInf);
          } else if constexpr (std::is_same_v<T, LogDecay>) {
            return -kInf;
          } else if constexpr (std::is_same_v<T, Grid>) {
            switch (f.right) {
              case Tail::zero: return f.interp == Interp::step_right ? tail_const_exponent(f.y.back()) : -kInf;
              case Tail::infinite: return f.interp == Interp::step_right ? tail_const_exponent(f.y.back()) : kInf;
              case Tail::constant: return tail_const_exponent(f.y.back());
              case Tail::power:
                if (f.interp == Interp::step_right) return tail_const_exponent(f.y.back());
                return boundary_slope(f, false);
            }
            return std::nullopt;
          } else {
            return std::nullopt;
          }
        },
        form_);
  }

  // Power-law exponent of the behaviour as x -> 0+.
  std::optional<double> tail_exponent_at_zero() const {
    const double capped_value = cap_;
    auto r = std::visit(
        [&](const auto& f) -> std::optional<double> {
          using T = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<T, PowerLaw>) {
            return f.coef == 0 ? 0.0 : f.exponent;
          } else if constexpr (std::is_same_v<T, Exponential>) {
            return 0.0;
          } else if constexpr (std::is_same_v<T, LogDecay>) {
            return std::nullopt;  // logarithmic blow-up, not a power
          } else if constexpr (std::is_same_v<T, Grid>) {
            if (!f.x.empty() && f.x.front() == 0.0) return 0.0;
            switch (f.left) {
              case Tail::constant: return 0.0;
              case Tail::zero: return kInf;
              case Tail::infinite: return -kInf;
              case Tail::power:
                if (f.interp == Interp::step_right || f.interp == Interp::step_left) return 0.0;
                return boundary_slope(f, true);
            }
            return std::nullopt;
          } else {
            return std::nullopt;
          }
        },
        form_);
    if (r && *r < 0 && std::isfinite(capped_value)) return 0.0;
    return r;
  }

  // True when f(x) -> 0 as x -> inf is certified by the representation.
  bool vanishes_at_infinity() const {
    if (std::isfinite(support_end_)) return true;
    if (std::holds_alternative<Callable>(form_)) {
      const double far = (*this)(1e12), near = (*this)(1.0);
      return far == 0.0 || (near > 0 && far < 1e-9 * near);
    }
    if (const auto* g = std::get_if<Grid>(&form_))
      if (g->y.back() == 0.0 && g->interp != Interp::step_left) return true;
    auto e = tail_exponent_at_infinity();
    return e && *e < 0;
  }

  // Sampled copy on [lo, hi] with n log-spaced knots.
  MonotoneFn tabulate(double lo, double hi, std::size_t n, Interp interp = Interp::loglog) const {
    auto xs = log_grid(lo, hi, n);
    std::vector<double> ys(n);
    for (std::size_t i = 0; i < n; ++i) ys[i] = (*this)(xs[i]);
    bool positive = std::all_of(ys.begin(), ys.end(), [](double v) { return v > 0 && std::isfinite(v); });
    if (interp == Interp::loglog && !positive) interp = Interp::linear;
    Tail right = decreasing() ? (ys.back() == 0 ? Tail::zero : Tail::power) : Tail::power;
    Tail left = decreasing() ? Tail::power : (ys.front() == 0 ? Tail::zero : Tail::power);
    if (interp == Interp::step_right || interp == Interp::step_left) left = right = Tail::constant;
    if (!positive && interp == Interp::linear) {
      if (right == Tail::power) right = Tail::constant;
      if (left == Tail::power) left = Tail::constant;
    }
    return MonotoneFn(Grid{xs, ys, interp, left, right}, dir_);
  }

  // Generalized inverse f^-(x) = inf{y > 0 : f(y) <= x} of a decreasing f.
  MonotoneFn generalized_inverse() const;

 private:
  static std::optional<double> tail_const_exponent(double last) { return last == 0 ? -kInf : 0.0; }

  static double boundary_slope(const Grid& g, bool left) {
    const std::size_t n = g.x.size();
    if (n < 2) return 0.0;
    const std::size_t i = left ? 0 : n - 2;
    const double x0 = g.x[i], x1 = g.x[i + 1], y0 = g.y[i], y1 = g.y[i + 1];
    if (!(x0 > 0 && y0 > 0 && y1 > 0)) return 0.0;
    return std::log(y1 / y0) / std::log(x1 / x0);
  }

  double base(double x) const {
    return std::visit(
        [&](const auto& f) -> double {
          using T = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<T, PowerLaw>) {
            if (f.coef == 0) return 0.0;
            if (f.exponent == 0) return f.coef;
            return f.coef * std::pow(x, f.exponent);
          } else if constexpr (std::is_same_v<T, Exponential>) {
            return f.coef * std::exp(-f.rate * x);
          } else if constexpr (std::is_same_v<T, LogDecay>) {
            return x >= f.scale ? 0.0 : f.coef * std::log(f.scale / x);
          } else if constexpr (std::is_same_v<T, Grid>) {
            return eval_grid(f, x);
          } else {
            return f.fn(x);
          }
        },
        form_);
  }

  static double tail_value(Tail t, double boundary_y, double slope, double x, double xb) {
    switch (t) {
      case Tail::constant: return boundary_y;
      case Tail::zero: return 0.0;
      case Tail::infinite: return kInf;
      case Tail::power:
        if (boundary_y <= 0 || xb <= 0) return boundary_y;
        return boundary_y * std::pow(x / xb, slope);
    }
    return boundary_y;
  }

  static double eval_grid(const Grid& g, double t) {
    const auto& x = g.x;
    const auto& y = g.y;
    const std::size_t n = x.size();
    switch (g.interp) {
      case Interp::step_right: {
        if (t < x[0]) return tail_value(g.left, y[0], 0.0, t, x[0]);
        auto it = std::upper_bound(x.begin(), x.end(), t);
        return y[std::size_t(it - x.begin()) - 1];
      }
      case Interp::step_left: {
        if (t < x[0]) return tail_value(g.left, y[0], 0.0, t, x[0]);
        if (t > x[n - 1]) return tail_value(g.right, y[n - 1], 0.0, t, x[n - 1]);
        auto it = std::lower_bound(x.begin(), x.end(), t);
        return y[std::size_t(it - x.begin())];
      }
      case Interp::loglog:
      case Interp::linear: {
        if (t < x[0]) return tail_value(g.left, y[0], boundary_slope(g, true), t, x[0]);
        if (t > x[n - 1]) return tail_value(g.right, y[n - 1], boundary_slope(g, false), t, x[n - 1]);
        if (n == 1) return y[0];
        auto it = std::upper_bound(x.begin(), x.end(), t);
        std::size_t i = std::size_t(it - x.begin());
        if (i == 0) i = 1;
        if (i >= n) i = n - 1;
        const double x0 = x[i - 1], x1 = x[i], y0 = y[i - 1], y1 = y[i];
        if (t == x1) return y1;
        if (g.interp == Interp::linear) return y0 + (y1 - y0) * (t - x0) / (x1 - x0);
        const double w = std::log(t / x0) / std::log(x1 / x0);
        return std::exp(std::log(y0) + w * std::log(y1 / y0));
      }
    }
    return 0.0;
  }

  void validate() const {
    const bool dec = decreasing();
    std::visit(
        [&](const auto& f) {
          using T = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<T, PowerLaw>) {
            require(f.coef >= 0 && !std::isnan(f.coef), "PowerLaw: coefficient must be nonnegative");
            require(std::isfinite(f.exponent), "PowerLaw: exponent must be finite");
            if (f.coef > 0 && std::isfinite(f.coef))
              require(dec ? f.exponent <= 0 : f.exponent >= 0, "PowerLaw: exponent sign contradicts direction");
          } else if constexpr (std::is_same_v<T, Exponential>) {
            require(f.coef >= 0 && std::isfinite(f.rate), "Exponential: invalid parameters");
            require(f.coef == 0 || (dec ? f.rate >= 0 : f.rate <= 0), "Exponential: rate sign contradicts direction");
          } else if constexpr (std::is_same_v<T, LogDecay>) {
            require(dec, "LogDecay: must be decreasing");
            require(f.coef >= 0 && f.scale > 0, "LogDecay: invalid parameters");
          } else if constexpr (std::is_same_v<T, Grid>) {
            validate_grid(f, dec);
          } else {
            require(static_cast<bool>(f.fn), "Callable: empty function");
          }
        },
        form_);
  }

  static void validate_grid(const Grid& g, bool dec) {
    require(!g.x.empty() && g.x.size() == g.y.size(), "grid: knots and values must be nonempty and equal length");
    const bool step = g.interp == Interp::step_right || g.interp == Interp::step_left;
    for (std::size_t i = 0; i < g.x.size(); ++i) {
      require(std::isfinite(g.x[i]), "grid: abscissae must be finite");
      require(g.x[i] >= 0, "grid: abscissae must be nonnegative");
      require(!std::isnan(g.y[i]), "grid: NaN value");
      require(step || std::isfinite(g.y[i]), "grid: infinite values allowed only for staircases");
      if (i > 0) require(g.x[i] > g.x[i - 1], "grid: abscissae must be strictly increasing");
      if (i > 0) {
        const bool ok = dec ? g.y[i] <= g.y[i - 1] : g.y[i] >= g.y[i - 1];
        require(ok, "grid: values are not monotone in the declared direction");
      }
      if (dec) require(g.y[i] >= 0, "grid: decreasing functions must be nonnegative");
    }
    if (g.interp == Interp::loglog) {
      require(g.x.front() > 0, "grid: log-log interpolation needs positive abscissae");
      for (double v : g.y) require(v > 0, "grid: log-log interpolation needs positive values");
    }
    if (dec) {
      require(g.left != Tail::zero || g.y.front() == 0, "grid: zero left tail contradicts decreasing direction");
      require(g.right != Tail::infinite || step, "grid: infinite right tail contradicts decreasing direction");
    } else {
      require(g.right != Tail::zero || g.y.back() == 0, "grid: zero right tail contradicts increasing direction");
    }
  }

  Form form_;
  Direction dir_;
  double cap_ = kInf;
  double support_end_ = kInf;
};

namespace detail {

// Exact inf{y > 0 : f(y) <= x} for a decreasing function known only by
// evaluation: geometric bracketing then bisection in log y.
inline double inverse_by_search(const std::function<double(double)>& f, double x) {
  constexpr double tiny = 1e-300, huge = 1e300;
  if (f(tiny) <= x) return 0.0;
  double hi = 1.0;
  while (f(hi) > x) {
    hi *= 16.0;
    if (hi > huge) return kInf;
  }
  double lo = hi / 16.0;
  while (lo > tiny && f(lo) <= x) lo /= 16.0;
  for (int it = 0; it < 200 && hi / lo > 1.0 + 1e-15; ++it) {
    const double mid = std::sqrt(lo * hi);
    if (f(mid) <= x) hi = mid; else lo = mid;
  }
  return hi;
}

// Exact inverse of a decreasing staircase; returns a right-continuous staircase.
inline Grid invert_staircase(const Grid& g) {
  // Collapse repeated values so that every step has a distinct level.
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < g.x.size(); ++i) {
    if (g.interp == Interp::step_right) {
      if (!ys.empty() && ys.back() == g.y[i]) continue;
      xs.push_back(g.x[i]);
      ys.push_back(g.y[i]);
    } else {
      // step_left: y_i on (x_{i-1}, x_i]; the level set starts at x_{i-1}.
      const double start = i == 0 ? 0.0 : g.x[i - 1];
      if (!ys.empty() && ys.back() == g.y[i]) continue;
      xs.push_back(start);
      ys.push_back(g.y[i]);
    }
  }
  // A constant left tail extends the first level down to zero.
  if (g.left == Tail::constant) xs.front() = 0.0;
  bool tail_zero = g.interp == Interp::step_left && g.right == Tail::zero && ys.back() > 0;
  if (tail_zero) {
    xs.push_back(g.x.back());
    ys.push_back(0.0);
  }
  Grid inv;
  inv.interp = Interp::step_right;
  inv.left = Tail::infinite;
  inv.right = Tail::constant;
  for (std::size_t k = ys.size(); k-- > 0;) {
    if (std::isinf(ys[k])) continue;
    inv.x.push_back(ys[k]);
    inv.y.push_back(xs[k]);
  }
  if (inv.x.empty()) {
    // f is infinite everywhere.
    inv.x = {0.0};
    inv.y = {kInf};
  }
  return inv;
}

}  // namespace detail

inline MonotoneFn MonotoneFn::generalized_inverse() const {
  require(decreasing(), "generalized_inverse: function must be decreasing");
  auto base_inverse = std::visit(
      [&](const auto& f) -> MonotoneFn {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, PowerLaw>) {
          if (f.coef == 0) return MonotoneFn(PowerLaw{0.0, 0.0}, Direction::decreasing);
          if (f.exponent == 0) {
            // f == c: preimage of [0, x] is everything for x >= c, empty otherwise.
            return MonotoneFn(Grid{{f.coef}, {0.0}, Interp::step_right, Tail::infinite, Tail::constant},
                              Direction::decreasing);
          }
          const double q = -f.exponent;
          return MonotoneFn(PowerLaw{std::pow(f.coef, 1.0 / q), -1.0 / q}, Direction::decreasing);
        } else if constexpr (std::is_same_v<T, Exponential>) {
          if (f.coef == 0 || f.rate == 0) return MonotoneFn::constant(0.0).generalized_inverse();
          return MonotoneFn(LogDecay{1.0 / f.rate, f.coef}, Direction::decreasing);
        } else if constexpr (std::is_same_v<T, LogDecay>) {
          if (f.coef == 0) return MonotoneFn(PowerLaw{0.0, 0.0}, Direction::decreasing);
          return MonotoneFn(Exponential{f.scale, 1.0 / f.coef}, Direction::decreasing);
        } else if constexpr (std::is_same_v<T, Grid>) {
          if (f.interp == Interp::step_right || f.interp == Interp::step_left)
            return MonotoneFn(detail::invert_staircase(f), Direction::decreasing);
          bool strict = true;
          for (std::size_t i = 1; i < f.y.size(); ++i) strict = strict && f.y[i] < f.y[i - 1];
          if (!strict || f.left == Tail::zero) {
            Grid copy = f;
            auto fn = [copy](double y) { return MonotoneFn(copy, Direction::decreasing)(y); };
            auto g = [fn](double x) { return detail::inverse_by_search(fn, x); };
            return MonotoneFn::callable(g, Direction::decreasing, "inverse(grid)", f.y);
          }
          Grid inv;
          inv.interp = f.interp;
          for (std::size_t k = f.x.size(); k-- > 0;) {
            inv.x.push_back(f.y[k]);
            inv.y.push_back(f.x[k]);
          }
          // Left tail of f maps to the right tail of f^- and vice versa.
          switch (f.left) {
            case Tail::constant: inv.right = Tail::zero; break;
            case Tail::power: inv.right = Tail::power; break;
            case Tail::infinite: inv.right = Tail::constant; break;
            case Tail::zero: inv.right = Tail::zero; break;
          }
          switch (f.right) {
            case Tail::constant: inv.left = Tail::infinite; break;
            case Tail::power: inv.left = Tail::power; break;
            case Tail::zero: inv.left = Tail::constant; break;
            case Tail::infinite: inv.left = Tail::constant; break;
          }
          if (inv.left == Tail::infinite) {
            // Continuous interpolation cannot carry an infinite tail; use a staircase guard.
            Grid copy = f;
            auto fn = [copy](double y) { return MonotoneFn(copy, Direction::decreasing)(y); };
            auto g = [fn](double x) { return detail::inverse_by_search(fn, x); };
            return MonotoneFn::callable(g, Direction::decreasing, "inverse(grid)", f.y);
          }
          return MonotoneFn(inv, Direction::decreasing);
        } else {
          auto fn = f.fn;
          auto g = [fn](double x) { return detail::inverse_by_search(fn, x); };
          return MonotoneFn::callable(g, Direction::decreasing, "inverse(" + f.label + ")");
        }
      },
      form_);
  // (1[y < e] min(f, c))^- = 1[x < c] min(f^-, e)
  MonotoneFn out = base_inverse;
  if (std::isfinite(support_end_)) out = out.capped(support_end_);
  if (std::isfinite(cap_)) out = out.truncated(cap_);
  return out;
}

// A convex nondecreasing rate function K* on [0, a_max) with K*(0) = 0.
class RateFn {
 public:
  RateFn(MonotoneFn fn, double a_max) : fn_(std::move(fn)), a_max_(a_max) { validate(); }

  static RateFn power(double coef, double exponent, double a_max) {
    return RateFn(MonotoneFn(PowerLaw{coef, exponent}, Direction::increasing), a_max);
  }

  double operator()(double v) const { return v <= 0 ? 0.0 : fn_(v); }
  double a_max() const { return a_max_; }
  const MonotoneFn& fn() const { return fn_; }
  std::vector<double> kinks() const { return fn_.kinks(); }

 private:
  void validate() const {
    require(a_max_ > 0 && std::isfinite(a_max_), "RateFn: a_max must be positive and finite");
    require(!fn_.decreasing(), "RateFn: K* must be nondecreasing");
    if (const auto* p = std::get_if<PowerLaw>(&fn_.form())) {
      require(p->coef == 0 || p->exponent >= 1, "RateFn: power-law K* needs exponent >= 1 for convexity");
    }
    if (fn_.is_grid()) {
      const auto& g = fn_.grid();
      require(g.interp == Interp::linear, "RateFn: grids must use linear interpolation");
      require(g.x.front() == 0.0 && g.y.front() == 0.0, "RateFn: grid must start at the knot (0, 0)");
      // Midpoint convexity on every knot triple = nondecreasing chord slopes.
      for (std::size_t i = 2; i < g.x.size(); ++i) {
        const double s0 = (g.y[i - 1] - g.y[i - 2]) / (g.x[i - 1] - g.x[i - 2]);
        const double s1 = (g.y[i] - g.y[i - 1]) / (g.x[i] - g.x[i - 1]);
        require(s1 >= s0 - 1e-12 * std::max(1.0, std::abs(s0)), "RateFn: grid is not convex");
      }
    }
    // Callables are pinned to K*(0) = 0 by operator(); closed forms and grids must agree.
    if (!std::holds_alternative<Callable>(fn_.form()))
      require(std::abs(fn_(0.0)) <= 1e-300, "RateFn: K*(0) must be 0");
  }

  MonotoneFn fn_;
  double a_max_;
};

// Upper envelope of lines y = slope*x + intercept restricted to [lo, hi],
// returned as exact piecewise-linear knots.
struct Line {
  double slope;
  double intercept;
  double operator()(double x) const { return slope * x + intercept; }
};

// Lines that attain the upper envelope, ordered by increasing slope.
inline std::vector<Line> upper_hull(std::vector<Line> lines) {
  std::sort(lines.begin(), lines.end(), [](const Line& a, const Line& b) {
    return a.slope < b.slope || (a.slope == b.slope && a.intercept > b.intercept);
  });
  std::vector<Line> uniq;
  for (const auto& l : lines)
    if (uniq.empty() || uniq.back().slope != l.slope) uniq.push_back(l);
  auto cross = [](const Line& a, const Line& b) { return (a.intercept - b.intercept) / (b.slope - a.slope); };
  std::vector<Line> hull;
  for (const auto& l : uniq) {
    while (hull.size() >= 2 && cross(hull[hull.size() - 2], l) <= cross(hull[hull.size() - 2], hull.back()))
      hull.pop_back();
    hull.push_back(l);
  }
  return hull;
}

inline std::pair<std::vector<double>, std::vector<double>> upper_envelope(std::vector<Line> lines, double lo,
                                                                           double hi) {
  require(!lines.empty() && hi > lo, "upper_envelope: need lines and lo < hi");
  const std::vector<Line> hull = upper_hull(std::move(lines));
  auto cross = [](const Line& a, const Line& b) { return (a.intercept - b.intercept) / (b.slope - a.slope); };
  std::vector<double> xs{lo};
  for (std::size_t i = 0; i + 1 < hull.size(); ++i) {
    const double c = cross(hull[i], hull[i + 1]);
    // Nearly parallel neighbours can cross out of order by rounding.
    if (c > xs.back() && c < hi) xs.push_back(c);
  }
  xs.push_back(hi);
  std::vector<double> ys(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double m = -kInf;
    for (const auto& l : hull) m = std::max(m, l(xs[i]));
    ys[i] = m;
  }
  return {xs, ys};
}

}  // namespace subgeo
