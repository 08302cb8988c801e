#pragma once

// f = f_str + f_psd + f_err built from a satisfied regularity report:
//   * on Z = (V0 x W) u (V x W0): f_err = f, the others 0;
//   * on a cell of V_i x W_j within the homogeneity radius of r_ij: f_str = f;
//   * on the remaining (atypical) cells: f_str = r_ij, f_psd = f - r_ij.

#include <cmath>
#include <optional>
#include <stdexcept>
#include <utility>
#include <string>
#include <vector>

#include "stabreg/core.hpp"
#include "stabreg/norms.hpp"
#include "stabreg/partition.hpp"

namespace stabreg {

enum class DecompositionVariant { standard, fold_err, perfect_str };

inline const char* to_string(DecompositionVariant v) {
  switch (v) {
    case DecompositionVariant::standard: return "standard";
    case DecompositionVariant::fold_err: return "fold_err";
    case DecompositionVariant::perfect_str: return "perfect_str";
  }
  return "";
}

struct Decomposition {
  ValueMatrix f_str;
  ValueMatrix f_psd;  // signed
  ValueMatrix f_err;
  ValueMatrix structured_template;  // sum r_ij 1_{V_i x W_j}, 0 on Z
  std::vector<std::vector<double>> r_table;
  Partition partition_V;
  Partition partition_W;
  IndexSet z_rows;  // V0
  IndexSet z_cols;  // W0
  double delta = 0.0;
  double epsilon = 0.0;
  double sigma_mn = 0.0;
  double radius = 0.0;
  DecompositionVariant variant = DecompositionVariant::standard;
  // False when some cell admits no split with f_str + f_psd == f in doubles
  // (possible only for entries that are not multiples of 2^-53).
  bool additivity_exact = true;
  std::optional<double> psd_l1_bound;  // perfect_str only
};

struct DecompositionCheck {
  bool additive = false;
  double str_template_dev = 0.0;
  bool str_ok = false;
  std::size_t psd_support = 0;
  double psd_support_limit = 0.0;
  bool psd_ok = false;
  bool err_in_z = false;
  bool z_ok = false;  // |V0| <= eps |V|, |W0| <= eps |W|
  double err_str_inner = 0.0;
  double err_abs_psd_inner = 0.0;
  bool orthogonal = false;
  std::optional<double> psd_l1;
  bool psd_l1_ok = true;

  bool structural_ok() const { return str_ok && psd_ok && err_in_z && z_ok && orthogonal && psd_l1_ok; }
  bool all_ok() const { return additive && structural_ok(); }
};

// Re-derives every invariant of `d` against f. The support limit is
// sigma(mn) |V||W|, or (sigma(mn) + 2 eps) |V||W| after fold_err.
inline DecompositionCheck check_decomposition(const ValueMatrix& f, const Decomposition& d) {
  DecompositionCheck c;
  const std::size_t R = f.rows(), C = f.cols();
  std::vector<char> zr(R, 0), zc(C, 0);
  for (Index a : d.z_rows) zr[a] = 1;
  for (Index b : d.z_cols) zc[b] = 1;

  c.additive = true;
  c.err_in_z = true;
  for (Index a = 0; a < R; ++a)
    for (Index b = 0; b < C; ++b) {
      if (d.f_str(a, b) + d.f_psd(a, b) + d.f_err(a, b) != f(a, b)) c.additive = false;
      c.str_template_dev = std::max(c.str_template_dev, std::fabs(d.f_str(a, b) - d.structured_template(a, b)));
      c.psd_support += d.f_psd(a, b) != 0.0;
      if (d.f_err(a, b) != 0.0 && !(zr[a] || zc[b])) c.err_in_z = false;
    }
  c.str_ok = c.str_template_dev <= d.radius;
  const double area = static_cast<double>(R) * static_cast<double>(C);
  // After perfect_str the support of f_psd is unrestricted; its l1 norm is
  // bounded instead.
  double frac = d.sigma_mn;
  if (d.variant == DecompositionVariant::fold_err) frac = d.sigma_mn + 2.0 * d.epsilon;
  if (d.variant == DecompositionVariant::perfect_str) frac = 1.0;
  c.psd_support_limit = frac * area;
  c.psd_ok = static_cast<double>(c.psd_support) <= c.psd_support_limit;
  c.z_ok = static_cast<double>(d.z_rows.size()) <= d.epsilon * static_cast<double>(R) &&
           static_cast<double>(d.z_cols.size()) <= d.epsilon * static_cast<double>(C);
  c.err_str_inner = inner_product(d.f_err, d.f_str);
  c.err_abs_psd_inner = inner_product(d.f_err, abs(d.f_psd));
  c.orthogonal = c.err_str_inner == 0.0 && c.err_abs_psd_inner == 0.0;
  if (d.psd_l1_bound) {
    c.psd_l1 = norm(d.f_psd, Norm::l1);
    c.psd_l1_ok = *c.psd_l1 <= *d.psd_l1_bound;
  }
  return c;
}

namespace detail {

// A value x near r with fl(x + fl(f - x)) == f, if one of the candidates
// works: r itself, r on the 2^-53 grid, or the round trip f - (f - r).
inline std::optional<double> exact_split_point(double f, double r) {
  const double cands[] = {r, std::nearbyint(r * 0x1.0p53) * 0x1.0p-53, f - (f - r)};
  for (double x : cands)
    if (x >= 0.0 && x <= 1.0 && x + (f - x) == f) return x;
  return std::nullopt;
}

inline void require_decomposable(const ValueMatrix& f, const RegularityReport& rep) {
  if (rep.partition_V.ground_size != f.rows() || rep.partition_W.ground_size != f.cols())
    throw InputError("report partitions do not match the matrix shape");
  if (f.range() != Range::unit) throw InputError("decompose expects a unit-range matrix");
  if (!rep.satisfied) throw PreconditionError("report is not satisfied");
  const std::size_t m = rep.partition_V.block_count(), n = rep.partition_W.block_count();
  const double sigma = rep.params.decay(m * n);
  const double need = sigma / 2.0;
  if (!(rep.homog_radius <= rep.params.regularity_radius()))
    throw PreconditionError("report homogeneity radius exceeds 5 delta + epsilon");
  if (!(rep.pair_gamma <= need))
    throw PreconditionError("report pairs were checked at gamma " + std::to_string(rep.pair_gamma) +
                            ", above sigma(mn)/2 = " + std::to_string(need));
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const auto& w = rep.pair_results.at(i).at(j);
      const std::string name = "pair (" + std::to_string(i + 1) + "," + std::to_string(j + 1) + ")";
      if (!w) throw PreconditionError(name + " has no homogeneity witness");
      if (!(w->gamma <= need && w->epsilon <= need && w->delta == rep.homog_radius))
        throw PreconditionError(name + " witness is not at strength (radius; sigma(mn)/2)");
      if (!validate_homogeneity_witness(f, rep.partition_V.blocks[i], rep.partition_W.blocks[j], *w))
        throw PreconditionError(name + " witness does not validate");
    }
}

inline Decomposition build_decomposition(const ValueMatrix& f, const RegularityReport& rep,
                                         const std::vector<std::vector<double>>& r_table) {
  const std::size_t R = f.rows(), C = f.cols();
  const auto lv = rep.partition_V.labels(), lw = rep.partition_W.labels();
  std::vector<double> s(R * C, 0.0), p(R * C, 0.0), e(R * C, 0.0), t(R * C, 0.0);
  bool exact = true;
  for (Index a = 0; a < R; ++a)
    for (Index b = 0; b < C; ++b) {
      const std::size_t k = a * C + b;
      const double x = f(a, b);
      if (lv[a] == 0 || lw[b] == 0) {
        e[k] = x;
        continue;
      }
      const double r = r_table[lv[a] - 1][lw[b] - 1];
      t[k] = r;
      if (approx_within(x, r, rep.homog_radius)) {
        s[k] = x;
        continue;
      }
      const auto split = exact_split_point(x, r);
      if (!split) exact = false;
      s[k] = split.value_or(r);
      p[k] = x - s[k];
    }
  const std::size_t m = rep.partition_V.block_count(), n = rep.partition_W.block_count();
  Decomposition d{ValueMatrix(R, C, std::move(s)),
                  ValueMatrix(R, C, std::move(p), Range::signed_unit),
                  ValueMatrix(R, C, std::move(e)),
                  ValueMatrix(R, C, std::move(t)),
                  r_table,
                  rep.partition_V,
                  rep.partition_W,
                  rep.partition_V.exceptional,
                  rep.partition_W.exceptional};
  d.delta = rep.params.delta;
  d.epsilon = rep.params.epsilon;
  d.sigma_mn = rep.params.decay(m * n);
  d.radius = rep.homog_radius;
  d.additivity_exact = exact;
  return d;
}

inline void assert_invariants(const ValueMatrix& f, const Decomposition& d) {
  const auto c = check_decomposition(f, d);
  if (!c.structural_ok()) throw std::logic_error("decomposition invariant violated");
  if (d.additivity_exact && !c.additive) throw std::logic_error("decomposition is not additive");
}

}  // namespace detail

// Requires a satisfied report whose pairs were checked at
// (radius; sigma(mn)/2, sigma(mn)/2) with radius <= 5 delta + eps.
inline Decomposition decompose(const ValueMatrix& f, const RegularityReport& rep) {
  detail::require_decomposable(f, rep);
  std::vector<std::vector<double>> r(rep.partition_V.block_count());
  for (std::size_t i = 0; i < r.size(); ++i)
    for (const auto& w : rep.pair_results[i]) r[i].push_back(w->r);
  auto d = detail::build_decomposition(f, rep, r);
  detail::assert_invariants(f, d);
  return d;
}

inline Decomposition decompose_no_error(const Decomposition& d, DecompositionVariant variant) {
  if (variant == DecompositionVariant::standard) return d;
  if (d.variant != DecompositionVariant::standard)
    throw InputError("decompose_no_error expects a standard decomposition");
  const std::size_t R = d.f_str.rows(), C = d.f_str.cols();
  Decomposition out = d;
  out.variant = variant;
  if (variant == DecompositionVariant::fold_err) {
    // f_psd and f_err have disjoint supports, so the sum is exact.
    std::vector<double> p(R * C);
    for (Index a = 0; a < R; ++a)
      for (Index b = 0; b < C; ++b) p[a * C + b] = d.f_psd(a, b) + d.f_err(a, b);
    out.f_psd = ValueMatrix(R, C, std::move(p), Range::signed_unit);
    out.f_err = ValueMatrix::constant(R, C, 0.0);
    return out;
  }
  // perfect_str: f_str := template, f_psd += f_str - template.
  std::vector<double> p(R * C);
  bool exact = d.additivity_exact;
  for (Index a = 0; a < R; ++a)
    for (Index b = 0; b < C; ++b) {
      const double whole = d.f_str(a, b) + d.f_psd(a, b);
      const double tv = d.structured_template(a, b);
      p[a * C + b] = whole - tv;
      if (tv + p[a * C + b] != whole) exact = false;
    }
  out.f_psd = ValueMatrix(R, C, std::move(p), Range::signed_unit);
  out.f_str = d.structured_template;
  out.additivity_exact = exact;
  // Typical cells contribute at most the radius, atypical ones at most 1 on
  // a sigma(mn) fraction of the cells.
  out.psd_l1_bound = d.radius + d.sigma_mn;
  return out;
}

struct GraphDecomposition {
  Decomposition decomposition;
  std::vector<std::vector<double>> density;  // |E cap (V_i x W_j)| / (|V_i||W_j|)
  std::vector<std::vector<int>> rounded;     // r_ij rounded to {0, 1}
  std::vector<std::pair<std::size_t, std::size_t>> violations;  // pairs failing the dichotomy (1-based)
  bool dichotomy_holds = false;
};

// Graph case: with a 0/1 matrix and radius < 1/2 every r_ij rounds to 0 or 1,
// and each block pair is near-empty or near-complete at sigma(mn).
inline GraphDecomposition graph_decompose(const ValueMatrix& e, const RegularityReport& rep) {
  for (double v : e.entries())
    if (v != 0.0 && v != 1.0) throw InputError("graph_decompose expects a 0/1 matrix");
  if (!(rep.homog_radius < 0.5)) throw PreconditionError("graph_decompose needs homogeneity radius < 1/2");
  detail::require_decomposable(e, rep);
  const std::size_t m = rep.partition_V.block_count(), n = rep.partition_W.block_count();
  std::vector<std::vector<double>> r(m, std::vector<double>(n)), density(m, std::vector<double>(n));
  std::vector<std::vector<int>> rounded(m, std::vector<int>(n));
  std::vector<std::pair<std::size_t, std::size_t>> violations;
  const double sigma = rep.params.decay(m * n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      rounded[i][j] = rep.pair_results[i][j]->r < 0.5 ? 0 : 1;
      r[i][j] = rounded[i][j];
      const auto& vb = rep.partition_V.blocks[i];
      const auto& wb = rep.partition_W.blocks[j];
      std::size_t edges = 0;
      for (Index a : vb)
        for (Index b : wb) edges += e(a, b) == 1.0;
      const double cells = static_cast<double>(vb.size()) * static_cast<double>(wb.size());
      density[i][j] = static_cast<double>(edges) / cells;
      const bool sparse = static_cast<double>(edges) <= sigma * cells;
      const bool dense = static_cast<double>(edges) >= (1.0 - sigma) * cells;
      if (!sparse && !dense) violations.emplace_back(i + 1, j + 1);
    }
  auto d = detail::build_decomposition(e, rep, r);
  detail::assert_invariants(e, d);
  const bool holds = violations.empty();
  return GraphDecomposition{std::move(d), std::move(density), std::move(rounded), std::move(violations), holds};
}

}  // namespace stabreg
