#pragma once

// f-definable sets (unions of intersections of interval preimages) and
// min-max f-functions, with their complexity.

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "stabreg/core.hpp"

namespace stabreg {

// p/q in lowest terms, q > 0.
class Rational {
 public:
  Rational() = default;
  Rational(std::int64_t num, std::int64_t den = 1) {  // NOLINT(google-explicit-constructor)
    if (den == 0) throw InputError("rational with zero denominator");
    constexpr auto min64 = std::numeric_limits<std::int64_t>::min();
    if (num == min64 || den == min64) throw InputError("rational component out of range");
    if (den < 0) {
      num = -num;
      den = -den;
    }
    const std::int64_t g = std::gcd(num, den);
    num_ = num / (g == 0 ? 1 : g);
    den_ = den / (g == 0 ? 1 : g);
  }

  // "p" or "p/q".
  static Rational parse(const std::string& text) {
    try {
      const auto slash = text.find('/');
      std::size_t used = 0;
      if (slash == std::string::npos) {
        const long long p = std::stoll(text, &used);
        if (used != text.size()) throw InputError("");
        return Rational(p);
      }
      const std::string ps = text.substr(0, slash), qs = text.substr(slash + 1);
      const long long p = std::stoll(ps, &used);
      if (used != ps.size()) throw InputError("");
      const long long q = std::stoll(qs, &used);
      if (used != qs.size()) throw InputError("");
      return Rational(p, q);
    } catch (const std::exception&) {
      throw InputError("malformed rational '" + text + "'");
    }
  }

  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }

  // The usual height max(|p|, q).
  std::uint64_t height() const {
    const std::uint64_t p = static_cast<std::uint64_t>(num_ < 0 ? -num_ : num_);
    return std::max<std::uint64_t>(p, static_cast<std::uint64_t>(den_));
  }

  std::string str() const { return den_ == 1 ? std::to_string(num_) : std::to_string(num_) + "/" + std::to_string(den_); }

  boost::multiprecision::cpp_rational exact() const {
    return boost::multiprecision::cpp_rational(num_, den_);
  }

  friend bool operator==(const Rational&, const Rational&) = default;

 private:
  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

// Exact comparison of a stored double against a rational; doubles are exact
// dyadic rationals, so this has no rounding.
inline int compare_exact(double x, const Rational& q) {
  const boost::multiprecision::cpp_rational xr(x);
  const auto qr = q.exact();
  return xr < qr ? -1 : (xr > qr ? 1 : 0);
}

// Closed interval [lo, hi]; empty when lo > hi.
struct Interval {
  Rational lo;
  Rational hi;

  bool contains(double x) const { return compare_exact(x, lo) >= 0 && compare_exact(x, hi) <= 0; }
  std::uint64_t height() const { return std::max(lo.height(), hi.height()); }
  friend bool operator==(const Interval&, const Interval&) = default;
};

enum class Side { V, W };

inline const char* to_string(Side s) { return s == Side::V ? "V" : "W"; }

// {x : f(x, param) in D} for side V, {y : f(param, y) in D} for side W.
struct Atom {
  Index param = 0;
  Interval interval;
  friend bool operator==(const Atom&, const Atom&) = default;
};

struct DefinableSetExpr {
  Side side = Side::V;
  std::vector<std::vector<Atom>> clauses;  // union over clauses of intersections of atoms
  friend bool operator==(const DefinableSetExpr&, const DefinableSetExpr&) = default;
};

struct MinMaxExpr {
  Side side = Side::V;
  std::vector<IndexSet> shape;  // min over rows of max over entries
  friend bool operator==(const MinMaxExpr&, const MinMaxExpr&) = default;
};

namespace detail {
inline double side_value(const ValueMatrix& f, Side side, Index x, Index param) {
  return side == Side::V ? f(x, param) : f(param, x);
}
inline std::size_t side_size(const ValueMatrix& f, Side side) { return side == Side::V ? f.rows() : f.cols(); }
inline std::size_t param_size(const ValueMatrix& f, Side side) { return side == Side::V ? f.cols() : f.rows(); }
}  // namespace detail

inline bool atom_holds(const ValueMatrix& f, Side side, const Atom& atom, Index x) {
  return atom.interval.contains(detail::side_value(f, side, x, atom.param));
}

inline IndexSet evaluate_set(const DefinableSetExpr& expr, const ValueMatrix& f) {
  const std::size_t np = detail::param_size(f, expr.side);
  for (const auto& clause : expr.clauses)
    for (const auto& atom : clause)
      if (atom.param >= np)
        throw InputError("definable-set parameter " + std::to_string(atom.param) + " out of bounds");
  IndexSet out;
  const std::size_t n = detail::side_size(f, expr.side);
  for (Index x = 0; x < n; ++x) {
    const bool in = std::any_of(expr.clauses.begin(), expr.clauses.end(), [&](const auto& clause) {
      return std::all_of(clause.begin(), clause.end(),
                         [&](const Atom& atom) { return atom_holds(f, expr.side, atom, x); });
    });
    if (in) out.push_back(x);
  }
  return out;
}

inline double evaluate_minmax(const MinMaxExpr& expr, const ValueMatrix& f, Index x) {
  if (x >= detail::side_size(f, expr.side)) throw InputError("min-max argument out of bounds");
  if (expr.shape.empty()) throw InputError("min-max expression has no clauses");
  const std::size_t np = detail::param_size(f, expr.side);
  double lo = std::numeric_limits<double>::infinity();
  for (const auto& row : expr.shape) {
    if (row.empty()) throw InputError("min-max expression has an empty clause");
    double hi = -std::numeric_limits<double>::infinity();
    for (Index y : row) {
      if (y >= np) throw InputError("min-max parameter " + std::to_string(y) + " out of bounds");
      hi = std::max(hi, detail::side_value(f, expr.side, x, y));
    }
    lo = std::min(lo, hi);
  }
  return lo;
}

// max(m, max n_i, max interval height), at least 1.
inline std::uint64_t complexity(const DefinableSetExpr& expr) {
  std::uint64_t c = std::max<std::uint64_t>(1, expr.clauses.size());
  for (const auto& clause : expr.clauses) {
    c = std::max<std::uint64_t>(c, clause.size());
    for (const auto& atom : clause) c = std::max(c, atom.interval.height());
  }
  return c;
}

inline std::uint64_t complexity(const MinMaxExpr& expr) {
  std::uint64_t c = std::max<std::uint64_t>(1, expr.shape.size());
  for (const auto& row : expr.shape) c = std::max<std::uint64_t>(c, row.size());
  return c;
}

}  // namespace stabreg
