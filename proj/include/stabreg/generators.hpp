#pragma once

// Test matrices with known stability behaviour. Every generator is a pure
// function of its spec; random parts come from the counter-based generator
// keyed by the seed. Random unit values are multiples of 2^-53 and signed
// ones multiples of 2^-52.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "stabreg/core.hpp"
#include "stabreg/detail/rng.hpp"
#include "stabreg/stability.hpp"

namespace stabreg {

enum class GeneratorKind {
  half_graph,
  fuzzy_half_graph,
  inner_product,
  cyclic_convolution,
  planted_blocks,
  discrete_stable,
  uniform_random,
  constant,
};

inline const char* to_string(GeneratorKind k) {
  switch (k) {
    case GeneratorKind::half_graph: return "half_graph";
    case GeneratorKind::fuzzy_half_graph: return "fuzzy_half_graph";
    case GeneratorKind::inner_product: return "inner_product";
    case GeneratorKind::cyclic_convolution: return "cyclic_convolution";
    case GeneratorKind::planted_blocks: return "planted_blocks";
    case GeneratorKind::discrete_stable: return "discrete_stable";
    case GeneratorKind::uniform_random: return "uniform_random";
    case GeneratorKind::constant: return "constant";
  }
  return "";
}

inline GeneratorKind parse_generator_kind(const std::string& s) {
  for (auto k : {GeneratorKind::half_graph, GeneratorKind::fuzzy_half_graph, GeneratorKind::inner_product,
                 GeneratorKind::cyclic_convolution, GeneratorKind::planted_blocks, GeneratorKind::discrete_stable,
                 GeneratorKind::uniform_random, GeneratorKind::constant})
    if (s == to_string(k)) return k;
  throw InputError("unknown generator kind '" + s + "'");
}

struct GeneratorSpec {
  GeneratorKind kind = GeneratorKind::half_graph;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::uint64_t seed = 0;
  std::size_t k = 0;           // half graphs
  double gap = 0.0;            // fuzzy_half_graph gap; discrete_stable delta
  std::size_t x_size = 0;      // inner_product |X|
  std::size_t group_order = 0; // cyclic_convolution n
  // inner_product: g is x_size x rows and h is x_size x cols (row-major);
  // cyclic_convolution: g and h have group_order entries. Random when empty.
  std::vector<double> g;
  std::vector<double> h;
  std::size_t row_blocks = 1;  // planted_blocks, discrete_stable
  std::size_t col_blocks = 1;
  std::vector<double> block_values;  // row_blocks x col_blocks; random when empty
  double noise = 0.0;                // planted_blocks flip rate, v -> 1 - v
  std::vector<double> value_set;     // discrete_stable
  double value = 0.0;                // constant

  friend bool operator==(const GeneratorSpec&, const GeneratorSpec&) = default;
};

namespace detail {

inline void check_table(const std::vector<double>& t, std::size_t n, const char* what) {
  if (t.size() != n) throw InputError(std::string(what) + " has " + std::to_string(t.size()) + " entries, expected " + std::to_string(n));
  for (double v : t)
    if (!(v >= -1.0 && v <= 1.0)) throw InputError(std::string(what) + " entries must lie in [-1,1]");
}

inline void require_dims(const GeneratorSpec& s) {
  if (s.rows == 0 || s.cols == 0) throw InputError(std::string(to_string(s.kind)) + " needs rows and cols");
}

// Block index of x when n elements are cut into `blocks` contiguous runs of
// near-equal size.
inline std::size_t block_of(std::size_t x, std::size_t n, std::size_t blocks) { return x * blocks / n; }

// Upper value u >= (1 + gap) / 2 with u - (1 - u) >= gap in doubles.
inline double fuzzy_upper(double gap) {
  double u = (1.0 + gap) / 2.0;
  while (u - (1.0 - u) < gap) u = std::nextafter(u, 2.0);
  return u;
}

}  // namespace detail

inline ValueMatrix generate(const GeneratorSpec& s) {
  using detail::CounterRng;
  switch (s.kind) {
    case GeneratorKind::half_graph: {
      if (s.k == 0) throw InputError("half_graph needs k >= 1");
      return ValueMatrix::from_function(s.k, s.k, [](Index a, Index b) { return a <= b ? 1.0 : 0.0; });
    }
    case GeneratorKind::fuzzy_half_graph: {
      if (s.k == 0) throw InputError("fuzzy_half_graph needs k >= 1");
      if (!(s.gap > 0.0 && s.gap <= 1.0)) throw InputError("fuzzy_half_graph gap must lie in (0,1]");
      const double u = detail::fuzzy_upper(s.gap);
      if (u > 1.0) throw InputError("fuzzy_half_graph gap too large");
      const double l = 1.0 - u;
      return ValueMatrix::from_function(s.k, s.k, [&](Index a, Index b) { return a <= b ? u : l; });
    }
    case GeneratorKind::inner_product: {
      detail::require_dims(s);
      if (s.x_size == 0) throw InputError("inner_product needs |X| >= 1");
      std::vector<double> g = s.g, h = s.h;
      CounterRng rg(s.seed, 1), rh(s.seed, 2);
      if (g.empty())
        for (std::size_t i = 0; i < s.x_size * s.rows; ++i) g.push_back(rg.uniform_signed());
      if (h.empty())
        for (std::size_t i = 0; i < s.x_size * s.cols; ++i) h.push_back(rh.uniform_signed());
      detail::check_table(g, s.x_size * s.rows, "inner_product g table");
      detail::check_table(h, s.x_size * s.cols, "inner_product h table");
      return ValueMatrix::from_function(
          s.rows, s.cols,
          [&](Index a, Index b) {
            double sum = 0.0;
            for (std::size_t x = 0; x < s.x_size; ++x) sum += g[x * s.rows + a] * h[x * s.cols + b];
            return std::clamp(sum / static_cast<double>(s.x_size), -1.0, 1.0);
          },
          Range::signed_unit);
    }
    case GeneratorKind::cyclic_convolution: {
      const std::size_t n = s.group_order;
      if (n == 0) throw InputError("cyclic_convolution needs group order >= 1");
      std::vector<double> g = s.g, h = s.h;
      CounterRng rg(s.seed, 3), rh(s.seed, 4);
      if (g.empty())
        for (std::size_t i = 0; i < n; ++i) g.push_back(rg.uniform_signed());
      if (h.empty())
        for (std::size_t i = 0; i < n; ++i) h.push_back(rh.uniform_signed());
      detail::check_table(g, n, "cyclic_convolution g");
      detail::check_table(h, n, "cyclic_convolution h");
      return ValueMatrix::from_function(
          n, n,
          [&](Index x, Index y) {
            double sum = 0.0;
            for (std::size_t t = 0; t < n; ++t) sum += g[t] * h[(x + y + n - t) % n];
            return std::clamp(sum / static_cast<double>(n), -1.0, 1.0);
          },
          Range::signed_unit);
    }
    case GeneratorKind::planted_blocks: {
      detail::require_dims(s);
      if (s.row_blocks == 0 || s.col_blocks == 0 || s.row_blocks > s.rows || s.col_blocks > s.cols)
        throw InputError("planted_blocks block counts must lie in [1, side size]");
      if (!(s.noise >= 0.0 && s.noise <= 1.0)) throw InputError("planted_blocks noise must lie in [0,1]");
      std::vector<double> vals = s.block_values;
      CounterRng rv(s.seed, 5), rn(s.seed, 6);
      if (vals.empty())
        for (std::size_t i = 0; i < s.row_blocks * s.col_blocks; ++i) vals.push_back(rv.uniform());
      if (vals.size() != s.row_blocks * s.col_blocks) throw InputError("planted_blocks needs one value per block pair");
      for (double v : vals)
        if (!(v >= 0.0 && v <= 1.0)) throw InputError("planted_blocks values must lie in [0,1]");
      return ValueMatrix::from_function(s.rows, s.cols, [&](Index a, Index b) {
        const double v = vals[detail::block_of(a, s.rows, s.row_blocks) * s.col_blocks +
                              detail::block_of(b, s.cols, s.col_blocks)];
        return rn.bernoulli(s.noise) ? 1.0 - v : v;
      });
    }
    case GeneratorKind::discrete_stable: {
      detail::require_dims(s);
      if (s.value_set.empty()) throw InputError("discrete_stable needs a value set");
      if (!(s.gap > 0.0)) throw InputError("discrete_stable needs delta > 0");
      for (double v : s.value_set)
        if (!(v >= 0.0 && v <= 1.0)) throw InputError("discrete_stable values must lie in [0,1]");
      for (std::size_t i = 0; i < s.value_set.size(); ++i)
        for (std::size_t j = i + 1; j < s.value_set.size(); ++j)
          if (s.value_set[i] != s.value_set[j] && !(std::fabs(s.value_set[i] - s.value_set[j]) > 10.0 * s.gap))
            throw InputError("discrete_stable values must be more than 10 delta apart");
      if (s.row_blocks == 0 || s.col_blocks == 0 || s.row_blocks > s.rows || s.col_blocks > s.cols)
        throw InputError("discrete_stable block counts must lie in [1, side size]");
      CounterRng rv(s.seed, 7);
      std::vector<double> vals;
      for (std::size_t i = 0; i < s.row_blocks * s.col_blocks; ++i)
        vals.push_back(s.value_set[rv.below(s.value_set.size())]);
      return ValueMatrix::from_function(s.rows, s.cols, [&](Index a, Index b) {
        return vals[detail::block_of(a, s.rows, s.row_blocks) * s.col_blocks +
                    detail::block_of(b, s.cols, s.col_blocks)];
      });
    }
    case GeneratorKind::uniform_random: {
      detail::require_dims(s);
      CounterRng r(s.seed, 8);
      return ValueMatrix::from_function(s.rows, s.cols, [&](Index, Index) { return r.uniform(); });
    }
    case GeneratorKind::constant: {
      detail::require_dims(s);
      if (!(s.value >= 0.0 && s.value <= 1.0)) throw InputError("constant value must lie in [0,1]");
      return ValueMatrix::constant(s.rows, s.cols, s.value);
    }
  }
  throw InputError("unknown generator kind");
}

// Generates the matrix and computes its exact stability index up to k_max.
// Signed output is rescaled to [0,1] first, and delta halved to match.
inline StabilityReport certify_stability(const GeneratorSpec& spec, double delta, std::size_t k_max,
                                         StabilityOptions opt = {}) {
  ValueMatrix f = generate(spec);
  if (f.range() == Range::signed_unit) {
    f = rescale_to_unit(f);
    delta /= 2.0;
  }
  opt.search.mode = SearchMode::exact;
  opt.k_max = k_max;
  return stability_index(f, delta, opt);
}

}  // namespace stabreg
