#pragma once

// Shared data model: value matrices, partitions, half-graph and homogeneity
// witnesses, and their validity checks.
//
// Conventions used across the library:
//   * indices are 0-based; a matrix f has rows V = {0..rows-1} and columns
//     W = {0..cols-1};
//   * all measures are normalized counting measures;
//   * definitional comparisons (>= delta, <= r, |f - r| <= delta) are exact
//     comparisons on stored doubles, with no fuzz factor.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace stabreg {

using Index = std::size_t;
using IndexSet = std::vector<Index>;

// Malformed input: bad shapes, out-of-range entries, out-of-bounds indices.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// An exact search was asked to run beyond its configured guard.
class CapabilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An operation was handed an object that does not meet its precondition
// (e.g. decomposing from a report that is not satisfied).
class PreconditionError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

enum class Range { unit, signed_unit };

inline const char* to_string(Range r) { return r == Range::unit ? "unit" : "signed"; }

inline double range_lower(Range r) { return r == Range::unit ? 0.0 : -1.0; }

// Dense real matrix over V x W. Immutable after construction.
class ValueMatrix {
 public:
  ValueMatrix(std::size_t rows, std::size_t cols, std::vector<double> entries,
              Range range = Range::unit)
      : rows_(rows), cols_(cols), range_(range), entries_(std::move(entries)) {
    if (rows_ == 0 || cols_ == 0) throw InputError("matrix must have at least one row and column");
    if (entries_.size() != rows_ * cols_)
      throw InputError("matrix entry count " + std::to_string(entries_.size()) +
                       " does not match shape " + std::to_string(rows_) + "x" +
                       std::to_string(cols_));
    const double lo = range_lower(range_);
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      const double v = entries_[i];
      if (!(v >= lo && v <= 1.0))
        throw InputError("entry (" + std::to_string(i / cols_) + "," + std::to_string(i % cols_) +
                         ") = " + std::to_string(v) + " outside the " + to_string(range_) +
                         " range");
    }
  }

  static ValueMatrix constant(std::size_t rows, std::size_t cols, double value,
                              Range range = Range::unit) {
    return ValueMatrix(rows, cols, std::vector<double>(rows * cols, value), range);
  }

  template <class F>
  static ValueMatrix from_function(std::size_t rows, std::size_t cols, F&& fn,
                                   Range range = Range::unit) {
    std::vector<double> e(rows * cols);
    for (std::size_t a = 0; a < rows; ++a)
      for (std::size_t b = 0; b < cols; ++b) e[a * cols + b] = fn(a, b);
    return ValueMatrix(rows, cols, std::move(e), range);
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return entries_.size(); }
  Range range() const { return range_; }

  double operator()(Index a, Index b) const { return entries_[a * cols_ + b]; }
  double at(Index a, Index b) const {
    if (a >= rows_ || b >= cols_)
      throw InputError("index (" + std::to_string(a) + "," + std::to_string(b) +
                       ") out of bounds for " + std::to_string(rows_) + "x" +
                       std::to_string(cols_) + " matrix");
    return (*this)(a, b);
  }

  std::span<const double> entries() const { return entries_; }
  std::span<const double> row(Index a) const {
    return std::span<const double>(entries_).subspan(a * cols_, cols_);
  }

  ValueMatrix transpose() const {
    std::vector<double> t(entries_.size());
    for (std::size_t a = 0; a < rows_; ++a)
      for (std::size_t b = 0; b < cols_; ++b) t[b * rows_ + a] = entries_[a * cols_ + b];
    return ValueMatrix(cols_, rows_, std::move(t), range_);
  }

  bool is_square_symmetric() const {
    if (rows_ != cols_) return false;
    for (std::size_t a = 0; a < rows_; ++a)
      for (std::size_t b = a + 1; b < cols_; ++b)
        if ((*this)(a, b) != (*this)(b, a)) return false;
    return true;
  }

  friend bool operator==(const ValueMatrix&, const ValueMatrix&) = default;

 private:
  std::size_t rows_;
  std::size_t cols_;
  Range range_;
  std::vector<double> entries_;
};

// v -> (v + 1) / 2. A signed f is (k, delta)-stable iff the rescaled matrix
// is (k, delta / 2)-stable.
inline ValueMatrix rescale_to_unit(const ValueMatrix& f) {
  if (f.range() != Range::signed_unit) throw InputError("rescale_to_unit expects a signed matrix");
  std::vector<double> e(f.entries().begin(), f.entries().end());
  for (double& v : e) v = (v + 1.0) / 2.0;
  return ValueMatrix(f.rows(), f.cols(), std::move(e), Range::unit);
}

// Inverse of rescale_to_unit: u -> 2u - 1.
inline ValueMatrix rescale_to_signed(const ValueMatrix& f) {
  if (f.range() != Range::unit) throw InputError("rescale_to_signed expects a unit matrix");
  std::vector<double> e(f.entries().begin(), f.entries().end());
  for (double& v : e) v = 2.0 * v - 1.0;
  return ValueMatrix(f.rows(), f.cols(), std::move(e), Range::signed_unit);
}

// |x - r| <= delta, the closeness relation used by every homogeneity check.
inline bool approx_within(double x, double r, double delta) { return std::fabs(x - r) <= delta; }

// count >= (1 - frac) * total, the "all but a frac-fraction" threshold.
inline bool meets_fraction(std::size_t count, std::size_t total, double frac) {
  return static_cast<double>(count) >= (1.0 - frac) * static_cast<double>(total);
}

// Smallest count satisfying meets_fraction(count, total, frac).
inline std::size_t fraction_threshold(std::size_t total, double frac) {
  std::size_t c = 0;
  const double target = (1.0 - frac) * static_cast<double>(total);
  if (target > 0.0) c = static_cast<std::size_t>(std::floor(target));
  while (c > 0 && meets_fraction(c - 1, total, frac)) --c;
  while (!meets_fraction(c, total, frac)) ++c;
  return c;
}

// ---------------------------------------------------------------------------
// Partitions

// Partition of {0..ground_size-1} into blocks 1..m (stored 0-based in
// `blocks`) and an exceptional block 0 that may be empty.
struct Partition {
  std::size_t ground_size = 0;
  std::vector<IndexSet> blocks;
  IndexSet exceptional;

  std::size_t block_count() const { return blocks.size(); }

  static Partition trivial(std::size_t n) {
    Partition p;
    p.ground_size = n;
    IndexSet all(n);
    for (Index i = 0; i < n; ++i) all[i] = i;
    if (n > 0) p.blocks.push_back(std::move(all));
    return p;
  }

  static Partition singletons(std::size_t n) {
    Partition p;
    p.ground_size = n;
    for (Index i = 0; i < n; ++i) p.blocks.push_back({i});
    return p;
  }

  // labels[x] == 0 puts x in the exceptional block, labels[x] == t >= 1 in
  // block t. Block numbers must be contiguous.
  static Partition from_labels(std::span<const std::size_t> labels) {
    Partition p;
    p.ground_size = labels.size();
    std::size_t m = 0;
    for (auto l : labels) m = std::max(m, l);
    p.blocks.assign(m, {});
    for (Index x = 0; x < labels.size(); ++x) {
      if (labels[x] == 0)
        p.exceptional.push_back(x);
      else
        p.blocks[labels[x] - 1].push_back(x);
    }
    p.validate();
    return p;
  }

  // Label of every ground element (0 = exceptional).
  std::vector<std::size_t> labels() const {
    std::vector<std::size_t> l(ground_size, 0);
    for (std::size_t i = 0; i < blocks.size(); ++i)
      for (Index x : blocks[i]) l[x] = i + 1;
    return l;
  }

  void validate() const {
    std::vector<char> seen(ground_size, 0);
    auto mark = [&](const IndexSet& s, const std::string& what) {
      for (Index x : s) {
        if (x >= ground_size)
          throw InputError(what + " contains index " + std::to_string(x) +
                           " outside ground set of size " + std::to_string(ground_size));
        if (seen[x]) throw InputError("index " + std::to_string(x) + " appears in two blocks");
        seen[x] = 1;
      }
    };
    mark(exceptional, "exceptional block");
    for (std::size_t i = 0; i < blocks.size(); ++i) {
      if (blocks[i].empty()) throw InputError("block " + std::to_string(i + 1) + " is empty");
      mark(blocks[i], "block " + std::to_string(i + 1));
    }
    for (Index x = 0; x < ground_size; ++x)
      if (!seen[x]) throw InputError("index " + std::to_string(x) + " is not covered");
  }

  // Sort members of every block, then order blocks by decreasing size with
  // the smallest member as tiebreak. Block 1 is then a largest block.
  void canonicalize() {
    for (auto& b : blocks) std::sort(b.begin(), b.end());
    std::sort(exceptional.begin(), exceptional.end());
    std::stable_sort(blocks.begin(), blocks.end(), [](const IndexSet& x, const IndexSet& y) {
      if (x.size() != y.size()) return x.size() > y.size();
      return x.front() < y.front();
    });
  }

  friend bool operator==(const Partition&, const Partition&) = default;
};

// ---------------------------------------------------------------------------
// Half-graph witnesses

enum class WitnessKind { plain, star };

inline const char* to_string(WitnessKind k) { return k == WitnessKind::plain ? "plain" : "star"; }

// Index sequences certifying failure of (k, delta)-stability (plain) or of
// *(k, delta)-stability (star). Repeated indices are allowed.
struct HalfGraphWitness {
  WitnessKind kind = WitnessKind::plain;
  IndexSet a_idx;
  IndexSet b_idx;
  double delta = 0.0;
  std::optional<double> r;  // star only

  std::size_t length() const { return a_idx.size(); }
  friend bool operator==(const HalfGraphWitness&, const HalfGraphWitness&) = default;
};

namespace detail {
inline void check_index_sets(const ValueMatrix& f, std::span<const Index> a,
                             std::span<const Index> b) {
  for (Index x : a)
    if (x >= f.rows()) throw InputError("row index " + std::to_string(x) + " out of bounds");
  for (Index y : b)
    if (y >= f.cols()) throw InputError("column index " + std::to_string(y) + " out of bounds");
}
}  // namespace detail

// plain: |f(a_i,b_j) - f(a_j,b_i)| >= delta for all i < j.
// star:  f(a_i,b_j) - r >= delta for i <= j, f(a_i,b_j) <= r for i > j, r in [0,1].
inline bool validate_witness(const ValueMatrix& f, const HalfGraphWitness& w) {
  if (w.a_idx.size() != w.b_idx.size())
    throw InputError("witness index sequences differ in length");
  detail::check_index_sets(f, w.a_idx, w.b_idx);
  const std::size_t k = w.a_idx.size();
  if (w.kind == WitnessKind::plain) {
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = i + 1; j < k; ++j)
        if (!(std::fabs(f(w.a_idx[i], w.b_idx[j]) - f(w.a_idx[j], w.b_idx[i])) >= w.delta))
          return false;
    return true;
  }
  if (!w.r) return false;
  const double r = *w.r;
  if (!(r >= 0.0 && r <= 1.0)) return false;
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) {
      const double v = f(w.a_idx[i], w.b_idx[j]);
      if (i <= j ? !(v - r >= w.delta) : !(v <= r)) return false;
    }
  return true;
}

// ---------------------------------------------------------------------------
// Homogeneity witnesses

// (r, s, V', W') certificate that (V*, W*) is (delta; gamma, epsilon)-homogeneous.
struct HomogeneityWitness {
  double r = 0.0;
  double s = 0.0;
  IndexSet v_prime;
  IndexSet w_prime;
  double delta = 0.0;
  double gamma = 0.0;
  double epsilon = 0.0;

  friend bool operator==(const HomogeneityWitness&, const HomogeneityWitness&) = default;
};

namespace detail {
inline bool is_subset(std::span<const Index> sub, std::span<const Index> super) {
  std::vector<Index> a(sub.begin(), sub.end()), b(super.begin(), super.end());
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  if (std::adjacent_find(a.begin(), a.end()) != a.end()) return false;
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}
}  // namespace detail

// All four clauses of the homogeneity definition under normalized counting
// measures on V* and W*.
inline bool validate_homogeneity_witness(const ValueMatrix& f, std::span<const Index> v_star,
                                         std::span<const Index> w_star,
                                         const HomogeneityWitness& w) {
  if (v_star.empty() || w_star.empty()) throw InputError("homogeneity block is empty");
  detail::check_index_sets(f, v_star, w_star);
  detail::check_index_sets(f, w.v_prime, w.w_prime);
  if (!(w.r >= 0.0 && w.r <= 1.0 && w.s >= 0.0 && w.s <= 1.0)) return false;
  if (!detail::is_subset(w.v_prime, v_star) || !detail::is_subset(w.w_prime, w_star)) return false;
  if (!meets_fraction(w.v_prime.size(), v_star.size(), w.gamma)) return false;
  if (!meets_fraction(w.w_prime.size(), w_star.size(), w.gamma)) return false;
  for (Index b : w.w_prime) {
    std::size_t hits = 0;
    for (Index a : v_star) hits += approx_within(f(a, b), w.r, w.delta);
    if (!meets_fraction(hits, v_star.size(), w.epsilon)) return false;
  }
  for (Index a : w.v_prime) {
    std::size_t hits = 0;
    for (Index b : w_star) hits += approx_within(f(a, b), w.s, w.delta);
    if (!meets_fraction(hits, w_star.size(), w.epsilon)) return false;
  }
  return true;
}

inline IndexSet full_index_set(std::size_t n) {
  IndexSet s(n);
  for (Index i = 0; i < n; ++i) s[i] = i;
  return s;
}

}  // namespace stabreg
