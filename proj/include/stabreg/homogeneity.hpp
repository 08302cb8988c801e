#pragma once

// Exact decision procedure for (delta; gamma, epsilon)-homogeneity of a block
// pair under counting measure.
//
// For a stored entry x the set of doubles r with fabs(x - r) <= delta is a
// contiguous range [lo(x), hi(x)] of doubles, because fl(x - r) is monotone
// in r. The number of qualifying columns |G(r)| is therefore a step function
// that only rises at some lo(x) (or at 0 after clamping), and a sweep over
// those endpoints finds its maximum exactly.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <limits>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "stabreg/core.hpp"

namespace stabreg {

namespace detail {

// Doubles in increasing order map to increasing integers.
inline std::int64_t order_key(double d) {
  std::int64_t b;
  std::memcpy(&b, &d, sizeof b);
  return b < 0 ? -(b & std::numeric_limits<std::int64_t>::max()) : b;
}

inline double from_order_key(std::int64_t k) {
  const std::int64_t b = k < 0 ? (-k) | std::numeric_limits<std::int64_t>::min() : k;
  double d;
  std::memcpy(&d, &b, sizeof d);
  return d;
}

// Boundary of the interval of doubles r with fabs(x - r) <= delta, found by
// bisection: `good` satisfies the relation and `bad` does not.
inline double closeness_edge(double x, double delta, double good, double bad) {
  std::int64_t g = order_key(good), b = order_key(bad);
  while (g - b > 1 || b - g > 1) {
    const std::int64_t mid = g + (b - g) / 2;
    if (std::fabs(x - from_order_key(mid)) <= delta)
      g = mid;
    else
      b = mid;
  }
  return from_order_key(g);
}

// Smallest double r with fabs(x - r) <= delta.
inline double closeness_lo(double x, double delta) { return closeness_edge(x, delta, x, x - 2.0 * delta - 1.0); }

// Largest double r with fabs(x - r) <= delta.
inline double closeness_hi(double x, double delta) { return closeness_edge(x, delta, x, x + 2.0 * delta + 1.0); }

struct SideResult {
  double value = 0.0;
  IndexSet good;  // the maximal qualifying set for `value`
};

// Best centre for the "column" clause: maximizes the number of outer indices
// o in `outer` such that at least `need` of the inner indices i satisfy
// fabs(at(i, o) - r) <= delta. Ties keep the smallest r.
template <class At>
SideResult best_centre(std::span<const Index> inner, std::span<const Index> outer, double delta,
                       std::size_t need, At&& at) {
  struct Event {
    double pos;
    int delta;
    std::size_t outer_pos;
  };
  std::vector<Event> events;
  events.reserve(2 * inner.size() * outer.size());
  const double inf = std::numeric_limits<double>::infinity();
  for (std::size_t o = 0; o < outer.size(); ++o)
    for (Index i : inner) {
      const double x = at(i, outer[o]);
      const double lo = closeness_lo(x, delta), hi = closeness_hi(x, delta);
      if (hi < 0.0 || lo > 1.0) continue;
      events.push_back({lo, +1, o});
      events.push_back({std::nextafter(hi, inf), -1, o});
    }
  std::sort(events.begin(), events.end(),
            [](const Event& a, const Event& b) { return a.pos < b.pos; });

  std::vector<std::size_t> count(outer.size(), 0);
  std::size_t good = 0;
  auto apply = [&](const Event& e) {
    const bool was = count[e.outer_pos] >= need;
    count[e.outer_pos] = static_cast<std::size_t>(static_cast<long long>(count[e.outer_pos]) + e.delta);
    const bool now = count[e.outer_pos] >= need;
    if (was != now) good += now ? 1 : std::size_t(-1);
  };
  // need == 0 makes every outer index qualify everywhere.
  if (need == 0) good = outer.size();

  std::size_t i = 0;
  while (i < events.size() && events[i].pos <= 0.0) apply(events[i++]);
  double best_r = 0.0;
  std::size_t best = good;
  while (i < events.size() && events[i].pos <= 1.0) {
    const double pos = events[i].pos;
    while (i < events.size() && events[i].pos == pos) apply(events[i++]);
    if (good > best) {
      best = good;
      best_r = pos;
    }
  }

  SideResult res;
  res.value = best_r;
  for (Index o : outer) {
    std::size_t hits = 0;
    for (Index in : inner) hits += approx_within(at(in, o), best_r, delta);
    if (hits >= need) res.good.push_back(o);
  }
  return res;
}

inline void check_homogeneity_args(const ValueMatrix& f, std::span<const Index> v_star,
                                   std::span<const Index> w_star, double delta, double gamma,
                                   double epsilon) {
  if (v_star.empty() || w_star.empty()) throw InputError("homogeneity block is empty");
  check_index_sets(f, v_star, w_star);
  if (!(delta > 0.0)) throw InputError("delta must be positive");
  if (!(gamma > 0.0 && gamma < 1.0)) throw InputError("gamma must lie in (0,1)");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw InputError("epsilon must lie in (0,1)");
}

}  // namespace detail

// Returns a witness iff (V*, W*) is (delta; gamma, epsilon)-homogeneous. r and
// s are the smallest centres achieving the largest W' and V'; W' and V' are
// maximal for them.
inline std::optional<HomogeneityWitness> check_homogeneous(const ValueMatrix& f, std::span<const Index> v_star,
                                                           std::span<const Index> w_star, double delta,
                                                           double gamma, double epsilon) {
  detail::check_homogeneity_args(f, v_star, w_star, delta, gamma, epsilon);
  if (f.range() != Range::unit) throw InputError("homogeneity checks expect a unit-range matrix");

  const std::size_t need_rows = fraction_threshold(v_star.size(), epsilon);
  auto cols = detail::best_centre(v_star, w_star, delta, need_rows,
                                  [&](Index a, Index b) { return f(a, b); });
  if (!meets_fraction(cols.good.size(), w_star.size(), gamma)) return std::nullopt;

  const std::size_t need_cols = fraction_threshold(w_star.size(), epsilon);
  auto rows = detail::best_centre(w_star, v_star, delta, need_cols,
                                  [&](Index b, Index a) { return f(a, b); });
  if (!meets_fraction(rows.good.size(), v_star.size(), gamma)) return std::nullopt;

  HomogeneityWitness w;
  w.r = cols.value;
  w.s = rows.value;
  w.w_prime = std::move(cols.good);
  w.v_prime = std::move(rows.good);
  w.delta = delta;
  w.gamma = gamma;
  w.epsilon = epsilon;
  return w;
}

struct HomogeneityConsequences {
  double l1_dev_r = 0.0;  // ||f|_{V* x W*} - r||_1
  double l1_dev_s = 0.0;
  double rs_gap = 0.0;    // |r - s|
  double dev_bound = 0.0;  // delta + gamma + epsilon
  double gap_bound = 0.0;  // 2 (delta + gamma + epsilon)
  bool bounds_hold = false;
};

inline HomogeneityConsequences homogeneity_consequences(const ValueMatrix& f, std::span<const Index> v_star,
                                                        std::span<const Index> w_star,
                                                        const HomogeneityWitness& w) {
  if (!validate_homogeneity_witness(f, v_star, w_star, w))
    throw InputError("homogeneity witness does not validate");
  HomogeneityConsequences c;
  double sr = 0.0, ss = 0.0;
  for (Index a : v_star)
    for (Index b : w_star) {
      sr += std::fabs(f(a, b) - w.r);
      ss += std::fabs(f(a, b) - w.s);
    }
  const double n = static_cast<double>(v_star.size() * w_star.size());
  c.l1_dev_r = sr / n;
  c.l1_dev_s = ss / n;
  c.rs_gap = std::fabs(w.r - w.s);
  c.dev_bound = w.delta + w.gamma + w.epsilon;
  c.gap_bound = 2.0 * c.dev_bound;
  c.bounds_hold = c.l1_dev_r <= c.dev_bound && c.l1_dev_s <= c.dev_bound && c.rs_gap <= c.gap_bound;
  return c;
}

}  // namespace stabreg
