#pragma once

// Normalized inner products and norms, and measurement of rectangle
// pseudorandomness sup_{A,B} |<f, 1_{A x B}>|.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "stabreg/core.hpp"
#include "stabreg/detail/parallel.hpp"
#include "stabreg/detail/rng.hpp"

namespace stabreg {

enum class Norm { l1, l2, linf };

// (1 / |V||W|) sum f(a,b) g(a,b)
inline double inner_product(const ValueMatrix& f, const ValueMatrix& g) {
  if (f.rows() != g.rows() || f.cols() != g.cols())
    throw InputError("inner_product: dimension mismatch");
  double sum = 0.0;
  auto x = f.entries(), y = g.entries();
  for (std::size_t i = 0; i < x.size(); ++i) sum += x[i] * y[i];
  return sum / static_cast<double>(x.size());
}

inline double norm(const ValueMatrix& f, Norm which) {
  auto e = f.entries();
  switch (which) {
    case Norm::l1: {
      double s = 0.0;
      for (double v : e) s += std::fabs(v);
      return s / static_cast<double>(e.size());
    }
    case Norm::l2: {
      double s = 0.0;
      for (double v : e) s += v * v;
      return std::sqrt(s / static_cast<double>(e.size()));
    }
    case Norm::linf: {
      double m = 0.0;
      for (double v : e) m = std::max(m, std::fabs(v));
      return m;
    }
  }
  return 0.0;
}

inline std::size_t support_size(const ValueMatrix& f) {
  std::size_t n = 0;
  for (double v : f.entries()) n += (v != 0.0);
  return n;
}

// Entrywise |f|.
inline ValueMatrix abs(const ValueMatrix& f) {
  std::vector<double> e(f.entries().begin(), f.entries().end());
  for (double& v : e) v = std::fabs(v);
  return ValueMatrix(f.rows(), f.cols(), std::move(e), f.range());
}

// |<f, 1_{A x B}>| summed in row-major order over the full matrix. Using one
// fixed order makes the value comparable, bit for bit, with ||f||_1 and with
// any other rectangle evaluated the same way.
inline double rectangle_correlation(const ValueMatrix& f, std::span<const Index> rows_a,
                                    std::span<const Index> cols_b) {
  std::vector<char> in_a(f.rows(), 0), in_b(f.cols(), 0);
  for (Index a : rows_a) in_a.at(a) = 1;
  for (Index b : cols_b) in_b.at(b) = 1;
  double sum = 0.0;
  for (Index a = 0; a < f.rows(); ++a) {
    if (!in_a[a]) continue;
    for (Index b = 0; b < f.cols(); ++b)
      if (in_b[b]) sum += f(a, b);
  }
  return std::fabs(sum) / static_cast<double>(f.size());
}

struct Rectangle {
  IndexSet rows;
  IndexSet cols;
  friend bool operator==(const Rectangle&, const Rectangle&) = default;
};

struct PseudorandomnessReport {
  double lower_bound = 0.0;
  double upper_bound = 0.0;
  bool exact = false;
  Rectangle best_rectangle;
};

enum class PseudorandomMode { exact, bounds };

struct PseudorandomOptions {
  PseudorandomMode mode = PseudorandomMode::exact;
  std::size_t exact_cap = 20;       // exact mode needs min(|V|,|W|) <= exact_cap
  std::size_t restarts = 16;        // bounds mode
  std::size_t max_iterations = 64;  // alternating-ascent rounds per restart
  std::uint64_t seed = 0;
  std::size_t threads = 1;
};

// Upper bound min(||f||_1, max(<f+,1>, <f-,1>)), valid for every rectangle.
inline double rectangle_upper_bound(const ValueMatrix& f) {
  double pos = 0.0, neg = 0.0, l1 = 0.0;
  for (double v : f.entries()) {
    pos += std::max(v, 0.0);
    neg += std::max(-v, 0.0);
    l1 += std::fabs(v);
  }
  const double n = static_cast<double>(f.size());
  return std::min(l1 / n, std::max(pos / n, neg / n));
}

namespace detail {

struct RectCandidate {
  double value = -1.0;
  Rectangle rect;
};

// Rows whose partial sum over `cols` is strictly positive (sign = +1) or
// strictly negative (sign = -1).
inline IndexSet best_rows_for(const ValueMatrix& f, const std::vector<char>& in_cols, int sign) {
  IndexSet rows;
  for (Index a = 0; a < f.rows(); ++a) {
    double s = 0.0;
    for (Index b = 0; b < f.cols(); ++b)
      if (in_cols[b]) s += f(a, b);
    if (sign * s > 0.0) rows.push_back(a);
  }
  return rows;
}

inline IndexSet best_cols_for(const ValueMatrix& f, const std::vector<char>& in_rows, int sign) {
  std::vector<double> s(f.cols(), 0.0);
  for (Index a = 0; a < f.rows(); ++a)
    if (in_rows[a])
      for (Index b = 0; b < f.cols(); ++b) s[b] += f(a, b);
  IndexSet cols;
  for (Index b = 0; b < f.cols(); ++b)
    if (sign * s[b] > 0.0) cols.push_back(b);
  return cols;
}

inline std::vector<char> mask_of(const IndexSet& s, std::size_t n) {
  std::vector<char> m(n, 0);
  for (Index x : s) m[x] = 1;
  return m;
}

// Strictly better value wins; equal values keep the lexicographically smaller
// rectangle so reductions are order independent.
inline void offer(RectCandidate& best, double value, Rectangle rect) {
  if (value > best.value ||
      (value == best.value && std::tie(rect.rows, rect.cols) < std::tie(best.rect.rows, best.rect.cols))) {
    best.value = value;
    best.rect = std::move(rect);
  }
}

// Exact maximum over all rectangles: enumerate every column subset B (Gray
// code order), take the sign-optimal row set for each, and evaluate the
// near-best candidates canonically.
inline RectCandidate exact_rectangle_max(const ValueMatrix& f, std::size_t threads) {
  const std::size_t n = f.cols();
  const std::uint64_t total = std::uint64_t{1} << n;
  const std::size_t chunks = std::max<std::size_t>(1, std::min<std::uint64_t>(total, 64));
  std::vector<RectCandidate> partial(chunks);
  parallel_for(chunks, threads, [&](std::size_t c) {
    const std::uint64_t begin = total * c / chunks, end = total * (c + 1) / chunks;
    std::vector<double> rowsum(f.rows(), 0.0);
    auto gray = [](std::uint64_t i) { return i ^ (i >> 1); };
    std::uint64_t mask = gray(begin);
    for (Index b = 0; b < n; ++b)
      if (mask >> b & 1)
        for (Index a = 0; a < f.rows(); ++a) rowsum[a] += f(a, b);
    RectCandidate best;
    best.value = 0.0;
    double best_approx = 0.0;
    const double scale = static_cast<double>(f.size());
    for (std::uint64_t i = begin; i < end; ++i) {
      if (i != begin) {
        const std::uint64_t next = gray(i);
        const std::uint64_t flip = next ^ mask;
        const Index b = static_cast<Index>(__builtin_ctzll(flip));
        const double sgn = (next >> b & 1) ? 1.0 : -1.0;
        for (Index a = 0; a < f.rows(); ++a) rowsum[a] += sgn * f(a, b);
        mask = next;
      }
      for (int sign : {1, -1}) {
        double approx = 0.0;
        for (double s : rowsum) approx += std::max(sign * s, 0.0);
        approx /= scale;
        // Gray-code sums drift by a few ulps; anything within slack of the
        // best so far is re-evaluated exactly.
        if (approx <= 0.0 || approx + 1e-9 < best_approx) continue;
        best_approx = std::max(best_approx, approx);
        Rectangle rect;
        for (Index b = 0; b < n; ++b)
          if (mask >> b & 1) rect.cols.push_back(b);
        rect.rows = best_rows_for(f, mask_of(rect.cols, n), sign);
        if (rect.rows.empty() || rect.cols.empty()) rect = {};
        const double v = rectangle_correlation(f, rect.rows, rect.cols);
        offer(best, v, std::move(rect));
      }
    }
    partial[c] = std::move(best);
  });
  RectCandidate best;
  best.value = 0.0;
  for (auto& p : partial) offer(best, p.value, std::move(p.rect));
  return best;
}

}  // namespace detail

inline PseudorandomnessReport pseudorandomness(const ValueMatrix& f,
                                               const PseudorandomOptions& opt = {}) {
  PseudorandomnessReport rep;
  if (opt.mode == PseudorandomMode::exact) {
    const std::size_t small = std::min(f.rows(), f.cols());
    if (small > opt.exact_cap)
      throw CapabilityError("exact pseudorandomness needs min(|V|,|W|) <= " +
                            std::to_string(opt.exact_cap) + " (exact_cap); got " +
                            std::to_string(small));
    const bool flip = f.rows() < f.cols();
    const ValueMatrix g = flip ? f.transpose() : f;
    auto best = detail::exact_rectangle_max(g, opt.threads);
    if (flip) std::swap(best.rect.rows, best.rect.cols);
    // Re-evaluate on the original orientation so the reported value is the
    // canonical one for f.
    rep.lower_bound = rectangle_correlation(f, best.rect.rows, best.rect.cols);
    rep.upper_bound = rep.lower_bound;
    rep.exact = true;
    rep.best_rectangle = std::move(best.rect);
    return rep;
  }

  // Alternating ascent from seeded random column sets, both signs.
  detail::RectCandidate best;
  best.value = 0.0;
  detail::CounterRng rng(opt.seed, 0x70736575ULL);
  for (std::size_t start = 0; start < opt.restarts; ++start) {
    std::vector<char> cols(f.cols(), 0);
    for (auto& c : cols) c = rng.bernoulli(0.5);
    for (int sign : {1, -1}) {
      std::vector<char> in_cols = cols;
      IndexSet prev_rows, prev_cols;
      for (std::size_t it = 0; it < opt.max_iterations; ++it) {
        IndexSet r = detail::best_rows_for(f, in_cols, sign);
        IndexSet c = detail::best_cols_for(f, detail::mask_of(r, f.rows()), sign);
        if (r == prev_rows && c == prev_cols) break;
        prev_rows = r;
        prev_cols = c;
        in_cols = detail::mask_of(c, f.cols());
        Rectangle rect{r, c};
        if (r.empty() || c.empty()) rect = {};
        const double v = rectangle_correlation(f, rect.rows, rect.cols);
        detail::offer(best, v, std::move(rect));
      }
    }
  }
  rep.lower_bound = best.value;
  rep.best_rectangle = std::move(best.rect);
  rep.upper_bound = std::max(rep.lower_bound, rectangle_upper_bound(f));
  rep.exact = false;
  return rep;
}

}  // namespace stabreg
