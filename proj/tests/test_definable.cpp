#include <gtest/gtest.h>

#include "oracles.hpp"
#include "stabreg/definable.hpp"

using namespace stabreg;

namespace {

Atom atom(Index b, Rational lo, Rational hi) { return Atom{b, Interval{lo, hi}}; }

}  // namespace

TEST(Rational, NormalizesAndParses) {
  EXPECT_EQ(Rational(2, -4), Rational(-1, 2));
  EXPECT_EQ(Rational(0, 7), Rational(0));
  EXPECT_EQ(Rational::parse("3/6"), Rational(1, 2));
  EXPECT_EQ(Rational::parse("-5"), Rational(-5));
  EXPECT_EQ(Rational(3, 4).height(), 4u);
  EXPECT_EQ(Rational(-7, 2).height(), 7u);
  EXPECT_EQ(Rational(1, 3).str(), "1/3");
  EXPECT_THROW(Rational(1, 0), InputError);
  EXPECT_THROW(Rational::parse("1/"), InputError);
  EXPECT_THROW(Rational::parse("a"), InputError);
  EXPECT_THROW(Rational::parse("1/2x"), InputError);
}

TEST(Rational, ExactComparison) {
  EXPECT_EQ(compare_exact(0.5, Rational(1, 2)), 0);
  EXPECT_EQ(compare_exact(0.1, Rational(1, 10)), 1);
  EXPECT_EQ(compare_exact(1.0 / 3.0, Rational(1, 3)), -1);
  EXPECT_TRUE((Interval{Rational(0), Rational(1, 2)}.contains(0.5)));
  EXPECT_FALSE((Interval{Rational(1, 10), Rational(1)}.contains(0.1 - 1e-17)));
}

TEST(EvaluateSet, Examples) {
  const auto f = oracle::half_graph(3);
  EXPECT_EQ(evaluate_set({Side::V, {{atom(0, 0, 1)}}}, f), full_index_set(3));
  EXPECT_EQ(evaluate_set({Side::V, {{atom(1, 1, 1)}}}, f), (IndexSet{0, 1}));
  EXPECT_EQ(evaluate_set({Side::V, {{atom(1, 2, 3)}}}, f), IndexSet{});
  EXPECT_EQ(evaluate_set({Side::W, {{atom(2, 1, 1)}}}, f), IndexSet{2});
  EXPECT_THROW(evaluate_set({Side::V, {{atom(3, 0, 1)}}}, f), InputError);
}

TEST(EvaluateSet, MatchesSetAlgebraProperty) {
  oracle::Gen g(51);
  for (int i = 0; i < 200; ++i) {
    const auto f = g.unit_matrix(g.between(1, 6), g.between(1, 6), 4);
    DefinableSetExpr e;
    e.side = g.coin(0.5) ? Side::V : Side::W;
    const std::size_t np = e.side == Side::V ? f.cols() : f.rows();
    const std::size_t n = e.side == Side::V ? f.rows() : f.cols();
    e.clauses.resize(g.between(0, 3));
    for (auto& clause : e.clauses) {
      clause.resize(g.between(1, 3));
      for (auto& a : clause) {
        const auto lo = static_cast<std::int64_t>(g.below(5)), hi = static_cast<std::int64_t>(g.below(5));
        a = atom(g.below(np), Rational(lo, 4), Rational(hi, 4));
      }
    }
    std::vector<char> in(n, 0);
    for (const auto& clause : e.clauses) {
      std::vector<char> all(n, 1);
      for (const auto& a : clause) {
        const auto s = evaluate_set({e.side, {{a}}}, f);
        std::vector<char> m(n, 0);
        for (Index x : s) m[x] = 1;
        for (std::size_t x = 0; x < n; ++x) all[x] = all[x] && m[x];
      }
      for (std::size_t x = 0; x < n; ++x) in[x] = in[x] || all[x];
    }
    IndexSet expect;
    for (std::size_t x = 0; x < n; ++x)
      if (in[x]) expect.push_back(x);
    EXPECT_EQ(evaluate_set(e, f), expect);
  }
}

TEST(EvaluateMinMax, Examples) {
  const ValueMatrix f(1, 2, {0.2, 0.7});
  EXPECT_EQ(evaluate_minmax({Side::V, {{0}}}, f, 0), 0.2);
  EXPECT_EQ(evaluate_minmax({Side::V, {{0, 1}}}, f, 0), 0.7);
  EXPECT_EQ(evaluate_minmax({Side::V, {{0, 1}, {0}}}, f, 0), 0.2);
  EXPECT_EQ(evaluate_minmax({Side::W, {{0}}}, f, 1), 0.7);
  EXPECT_THROW(evaluate_minmax({Side::V, {{2}}}, f, 0), InputError);
  EXPECT_THROW(evaluate_minmax({Side::V, {{0}}}, f, 1), InputError);
  EXPECT_THROW(evaluate_minmax({Side::V, {}}, f, 0), InputError);
  EXPECT_THROW(evaluate_minmax({Side::V, {{}}}, f, 0), InputError);
}

TEST(EvaluateMinMax, LipschitzProperty) {
  oracle::Gen g(52);
  for (int i = 0; i < 200; ++i) {
    const auto f = g.unit_matrix(g.between(2, 6), g.between(1, 6), 0);
    MinMaxExpr e{Side::V, {}};
    e.shape.resize(g.between(1, 3));
    for (auto& row : e.shape) {
      row.resize(g.between(1, 3));
      for (auto& y : row) y = g.below(f.cols());
    }
    const Index q = g.below(f.rows()), p = g.below(f.rows());
    double d = 0.0;
    for (Index b = 0; b < f.cols(); ++b) d = std::max(d, std::fabs(f(q, b) - f(p, b)));
    EXPECT_LE(std::fabs(evaluate_minmax(e, f, q) - evaluate_minmax(e, f, p)), d);
  }
}

TEST(Complexity, Examples) {
  EXPECT_EQ(complexity(DefinableSetExpr{Side::V, {{atom(0, 0, Rational(1, 2))}}}), 2u);
  const std::vector<Atom> two{atom(0, 0, 1), atom(1, 0, 1)};
  EXPECT_EQ(complexity(DefinableSetExpr{Side::V, {two, two, two}}), 3u);
  EXPECT_EQ(complexity(MinMaxExpr{Side::V, {{0}}}), 1u);
  EXPECT_EQ(complexity(DefinableSetExpr{}), 1u);
}

TEST(Complexity, MonotoneUnderAddingProperty) {
  oracle::Gen g(53);
  DefinableSetExpr e;
  std::uint64_t prev = complexity(e);
  for (int i = 0; i < 100; ++i) {
    const auto a = atom(0, Rational(static_cast<std::int64_t>(g.below(9)), static_cast<std::int64_t>(1 + g.below(9))),
                        Rational(1));
    if (e.clauses.empty() || g.coin(0.3))
      e.clauses.push_back({a});
    else
      e.clauses[g.below(e.clauses.size())].push_back(a);
    const auto c = complexity(e);
    EXPECT_GE(c, prev);
    prev = c;
  }
}
