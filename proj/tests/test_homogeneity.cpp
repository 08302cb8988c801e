#include <gtest/gtest.h>

#include "oracles.hpp"
#include "stabreg/homogeneity.hpp"

using namespace stabreg;

TEST(CheckHomogeneous, ConstantBlock) {
  const auto f = ValueMatrix::constant(5, 3, 0.4);
  const auto vs = full_index_set(5), ws = full_index_set(3);
  const auto w = check_homogeneous(f, vs, ws, 0.05, 0.1, 0.1);
  ASSERT_TRUE(w.has_value());
  EXPECT_NEAR(w->r, 0.4, 0.05);
  EXPECT_NEAR(w->s, 0.4, 0.05);
  EXPECT_EQ(w->v_prime, vs);
  EXPECT_EQ(w->w_prime, ws);
  EXPECT_TRUE(validate_homogeneity_witness(f, vs, ws, *w));
}

TEST(CheckHomogeneous, HalfGraphThresholds) {
  const auto f = oracle::half_graph(2);
  const auto full = full_index_set(2);
  EXPECT_FALSE(check_homogeneous(f, full, full, 0.1, 0.4, 0.4).has_value());
  const auto w = check_homogeneous(f, full, full, 0.1, 0.5, 0.5);
  ASSERT_TRUE(w.has_value());
  EXPECT_TRUE(validate_homogeneity_witness(f, full, full, *w));
}

TEST(CheckHomogeneous, SubBlocks) {
  const auto f = oracle::half_graph(6);
  const IndexSet vs{0, 1, 2}, ws{3, 4, 5};
  const auto w = check_homogeneous(f, vs, ws, 0.01, 0.01, 0.01);
  ASSERT_TRUE(w.has_value());
  EXPECT_NEAR(w->r, 1.0, 0.01);
  EXPECT_NEAR(w->s, 1.0, 0.01);
  EXPECT_EQ(w->v_prime, vs);
}

TEST(CheckHomogeneous, RejectsBadArguments) {
  const auto f = ValueMatrix::constant(3, 3, 0.5);
  const IndexSet full = full_index_set(3);
  EXPECT_THROW(check_homogeneous(f, IndexSet{}, full, 0.1, 0.1, 0.1), InputError);
  EXPECT_THROW(check_homogeneous(f, IndexSet{0, 3}, full, 0.1, 0.1, 0.1), InputError);
  EXPECT_THROW(check_homogeneous(f, full, full, 0.0, 0.1, 0.1), InputError);
  EXPECT_THROW(check_homogeneous(f, full, full, 0.1, 1.0, 0.1), InputError);
  EXPECT_THROW(check_homogeneous(f, full, full, 0.1, 0.1, 0.0), InputError);
  const auto s = ValueMatrix::constant(3, 3, 0.5, Range::signed_unit);
  EXPECT_THROW(check_homogeneous(s, full, full, 0.1, 0.1, 0.1), InputError);
}

TEST(CheckHomogeneous, AgreesWithOracleProperty) {
  oracle::Gen g(41);
  for (int i = 0; i < 150; ++i) {
    const auto f = g.unit_matrix(g.between(1, 6), g.between(1, 6), g.coin(0.5) ? 4 : 0);
    const auto vs = g.subset(f.rows()), ws = g.subset(f.cols());
    const double delta = 0.05 + 0.3 * g.unit();
    const double gamma = 0.05 + 0.6 * g.unit(), eps = 0.05 + 0.6 * g.unit();
    const auto w = check_homogeneous(f, vs, ws, delta, gamma, eps);
    EXPECT_EQ(w.has_value(), oracle::homogeneous(f, vs, ws, delta, gamma, eps));
    if (w) EXPECT_TRUE(validate_homogeneity_witness(f, vs, ws, *w));
  }
}

TEST(CheckHomogeneous, WitnessSetsAreMaximalProperty) {
  oracle::Gen g(42);
  for (int i = 0; i < 100; ++i) {
    const auto f = g.unit_matrix(g.between(2, 7), g.between(2, 7), 5);
    const auto vs = full_index_set(f.rows()), ws = full_index_set(f.cols());
    const auto w = check_homogeneous(f, vs, ws, 0.2, 0.5, 0.5);
    if (!w) continue;
    auto fab = [&](Index a, Index b) { return f(a, b); };
    EXPECT_EQ(w->w_prime.size(), oracle::qualifying(vs, ws, w->r, w->delta, w->epsilon, fab));
  }
}

TEST(Consequences, BoundsHoldProperty) {
  oracle::Gen g(43);
  std::size_t seen = 0;
  for (int i = 0; i < 200; ++i) {
    const auto f = g.unit_matrix(g.between(1, 8), g.between(1, 8), 6);
    const auto vs = g.subset(f.rows()), ws = g.subset(f.cols());
    const auto w = check_homogeneous(f, vs, ws, 0.1 + 0.2 * g.unit(), 0.1 + 0.4 * g.unit(), 0.1 + 0.4 * g.unit());
    if (!w) continue;
    ++seen;
    const auto c = homogeneity_consequences(f, vs, ws, *w);
    EXPECT_TRUE(c.bounds_hold);
    EXPECT_LE(c.l1_dev_r, c.dev_bound);
    EXPECT_LE(c.rs_gap, c.gap_bound);
  }
  EXPECT_GT(seen, 20u);
}

TEST(Consequences, RejectsInvalidWitness) {
  const auto f = oracle::half_graph(2);
  const auto full = full_index_set(2);
  HomogeneityWitness w{1.0, 1.0, full, full, 0.1, 0.4, 0.4};
  EXPECT_THROW(homogeneity_consequences(f, full, full, w), InputError);
}
