#include <gtest/gtest.h>

#include "oracles.hpp"
#include "stabreg/generators.hpp"
#include "stabreg/io/csv.hpp"

using namespace stabreg;

namespace {

GeneratorSpec spec(GeneratorKind kind) {
  GeneratorSpec s;
  s.kind = kind;
  return s;
}

StabilityOptions distinct_opts() {
  StabilityOptions o;
  o.search.distinct = true;
  return o;
}

}  // namespace

TEST(Generate, HalfGraphTable) {
  auto s = spec(GeneratorKind::half_graph);
  s.k = 3;
  const ValueMatrix expect(3, 3, {1, 1, 1, 0, 1, 1, 0, 0, 1});
  EXPECT_EQ(generate(s), expect);
}

TEST(Generate, InnerProductOfOnes) {
  auto s = spec(GeneratorKind::inner_product);
  s.rows = 3;
  s.cols = 4;
  for (std::size_t x : {1u, 2u, 5u}) {
    s.x_size = x;
    s.g.assign(x * 3, 1.0);
    s.h.assign(x * 4, 1.0);
    const auto f = generate(s);
    EXPECT_EQ(f.range(), Range::signed_unit);
    for (double v : f.entries()) EXPECT_EQ(v, 1.0);
  }
}

TEST(Generate, CyclicConvolutionMatchesDirectSum) {
  auto s = spec(GeneratorKind::cyclic_convolution);
  s.group_order = 2;
  s.g = {1.0, 0.0};
  s.h = {0.0, 1.0};
  const auto f = generate(s);
  EXPECT_EQ(f(0, 0), 0.0);
  EXPECT_EQ(f(0, 1), 0.5);
  EXPECT_EQ(f(1, 0), 0.5);
  EXPECT_EQ(f(1, 1), 0.0);

  oracle::Gen g(81);
  for (int i = 0; i < 20; ++i) {
    const std::size_t n = g.between(1, 9);
    auto r = spec(GeneratorKind::cyclic_convolution);
    r.group_order = n;
    for (std::size_t t = 0; t < n; ++t) {
      r.g.push_back(2 * g.unit() - 1);
      r.h.push_back(2 * g.unit() - 1);
    }
    const auto m = generate(r);
    for (std::size_t x = 0; x < n; ++x)
      for (std::size_t y = 0; y < n; ++y) {
        // sum over u + v = x + y of g(u) h(v)
        double sum = 0.0;
        for (std::size_t u = 0; u < n; ++u)
          for (std::size_t v = 0; v < n; ++v)
            if ((u + v) % n == (x + y) % n) sum += r.g[u] * r.h[v];
        EXPECT_NEAR(m(x, y), sum / static_cast<double>(n), 1e-12);
      }
  }
}

TEST(Certify, FuzzyHalfGraphIndexIsK) {
  for (std::size_t k = 1; k <= 5; ++k)
    for (double gap : {0.1, 0.25, 0.5}) {
      auto s = spec(GeneratorKind::fuzzy_half_graph);
      s.k = k;
      s.gap = gap;
      const auto rep = certify_stability(s, gap, 0, distinct_opts());
      EXPECT_EQ(rep.plain_index, k);
      const auto f = generate(s);
      EXPECT_EQ(oracle::chain_index(f, gap, false, true, k + 1), k);
    }
}

TEST(Certify, RankOneInnerProduct) {
  oracle::Gen g(82);
  for (int i = 0; i < 10; ++i) {
    auto s = spec(GeneratorKind::inner_product);
    s.rows = g.between(2, 4);
    s.cols = g.between(2, 4);
    s.x_size = 1;
    s.seed = static_cast<std::uint64_t>(i);
    const auto rep = certify_stability(s, 1.9, 0, distinct_opts());
    EXPECT_LE(*rep.plain_index, 2u);
    const auto u = rescale_to_unit(generate(s));
    EXPECT_EQ(rep.plain_index, oracle::chain_index(u, 0.95, false, true, 4));
  }
}

TEST(Certify, ConstantIndexIsOne) {
  auto s = spec(GeneratorKind::constant);
  s.rows = 5;
  s.cols = 3;
  s.value = 0.25;
  for (double delta : {0.01, 0.5, 1.0}) {
    EXPECT_EQ(certify_stability(s, delta, 0).plain_index, 1u);
    // A star chain of length one needs f >= r + delta with r >= 0.
    EXPECT_EQ(certify_stability(s, delta, 0).star_index, 0.25 >= delta ? 1u : 0u);
  }
}

TEST(Certify, DiscreteStableValues) {
  auto s = spec(GeneratorKind::discrete_stable);
  s.rows = s.cols = 8;
  s.row_blocks = s.col_blocks = 3;
  s.gap = 0.02;
  s.value_set = {0.0, 0.5, 1.0};
  s.seed = 5;
  const auto f = generate(s);
  for (double v : f.entries()) EXPECT_TRUE(v == 0.0 || v == 0.5 || v == 1.0);
}

TEST(Generate, DeterministicBySeed) {
  for (auto kind : {GeneratorKind::inner_product, GeneratorKind::cyclic_convolution, GeneratorKind::planted_blocks,
                    GeneratorKind::uniform_random}) {
    auto s = spec(kind);
    s.rows = s.cols = 6;
    s.x_size = 3;
    s.group_order = 6;
    s.row_blocks = s.col_blocks = 2;
    s.noise = 0.2;
    s.seed = 11;
    const auto a = io::matrix_to_csv(generate(s)), b = io::matrix_to_csv(generate(s));
    EXPECT_EQ(a, b);
    s.seed = 12;
    EXPECT_NE(a, io::matrix_to_csv(generate(s)));
  }
}

TEST(Generate, RejectsBadSpecs) {
  EXPECT_THROW(generate(spec(GeneratorKind::half_graph)), InputError);
  auto f = spec(GeneratorKind::fuzzy_half_graph);
  f.k = 3;
  f.gap = 1.5;
  EXPECT_THROW(generate(f), InputError);
  auto ip = spec(GeneratorKind::inner_product);
  ip.rows = ip.cols = 2;
  EXPECT_THROW(generate(ip), InputError);
  ip.x_size = 1;
  ip.g = {0.5};
  EXPECT_THROW(generate(ip), InputError);
  auto pb = spec(GeneratorKind::planted_blocks);
  pb.rows = pb.cols = 3;
  pb.row_blocks = 4;
  EXPECT_THROW(generate(pb), InputError);
  auto ds = spec(GeneratorKind::discrete_stable);
  ds.rows = ds.cols = 3;
  ds.gap = 0.1;
  ds.value_set = {0.0, 0.5};
  EXPECT_THROW(generate(ds), InputError);
  auto c = spec(GeneratorKind::constant);
  c.rows = c.cols = 2;
  c.value = 1.5;
  EXPECT_THROW(generate(c), InputError);
  EXPECT_THROW(parse_generator_kind("spiral"), InputError);
  EXPECT_EQ(parse_generator_kind("half_graph"), GeneratorKind::half_graph);
}
