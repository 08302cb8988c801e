#pragma once

// Homogeneous partitions: verification against the regularity statement,
// greedy and exhaustive search, the equal-size chopping construction, and
// the common refinement of two partitions of one ground set.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "stabreg/core.hpp"
#include "stabreg/definable.hpp"
#include "stabreg/detail/parallel.hpp"
#include "stabreg/homogeneity.hpp"
#include "stabreg/params.hpp"

namespace stabreg {

// relative: |V0| <= eps |V1|, |W0| <= eps |W1| (block 1 as stored).
// absolute: |V0| <= eps |V|, |W0| <= eps |W|.
enum class ExceptionalMode { relative, absolute };

inline const char* to_string(ExceptionalMode m) { return m == ExceptionalMode::relative ? "relative" : "absolute"; }

struct ExceptionalCheck {
  bool v_ok = false;
  bool w_ok = false;
};

struct RegularityReport {
  Partition partition_V;
  Partition partition_W;
  // pair_results[i][j] is the witness for (V_{i+1}, W_{j+1}), if homogeneous.
  std::vector<std::vector<std::optional<HomogeneityWitness>>> pair_results;
  Params params;
  double homog_radius = 0.0;
  double pair_gamma = 0.0;  // gamma and epsilon used for every pair: gamma_scale * sigma(mn)
  double gamma_scale = 1.0;
  ExceptionalMode exceptional_mode = ExceptionalMode::relative;
  ExceptionalCheck exceptional_check;
  std::optional<bool> equal_sizes_ok;  // set when equal sizes were required
  bool satisfied = false;
  // Per block, when the search produced a definable description of it.
  std::vector<std::optional<DefinableSetExpr>> certificates_V;
  std::vector<std::optional<DefinableSetExpr>> certificates_W;

  std::size_t failing_pairs() const {
    std::size_t n = 0;
    for (const auto& row : pair_results)
      for (const auto& w : row) n += !w.has_value();
    return n;
  }
};

struct VerifyOptions {
  ExceptionalMode exceptional_mode = ExceptionalMode::relative;
  double gamma_scale = 1.0;  // 0.5 gives the strength the decomposition needs
  bool require_equal_sizes = false;
  std::size_t threads = 1;
};

namespace detail {

inline bool exceptional_ok(const Partition& p, double epsilon, ExceptionalMode mode) {
  const double lim = mode == ExceptionalMode::absolute
                         ? static_cast<double>(p.ground_size)
                         : (p.blocks.empty() ? 0.0 : static_cast<double>(p.blocks.front().size()));
  return static_cast<double>(p.exceptional.size()) <= epsilon * lim;
}

inline bool equal_sizes(const Partition& p) {
  for (const auto& b : p.blocks)
    if (b.size() != p.blocks.front().size()) return false;
  return true;
}

}  // namespace detail

// Checks every pair (V_i, W_j), i, j >= 1, for (radius; g, g)-homogeneity with
// g = gamma_scale * sigma(mn), and the exceptional-set inequality.
inline RegularityReport verify_partition(const ValueMatrix& f, const Partition& pV, const Partition& pW,
                                         const Params& params, double homog_radius,
                                         const VerifyOptions& opt = {}) {
  params.validate();
  if (pV.ground_size != f.rows()) throw InputError("V-partition ground size does not match the matrix");
  if (pW.ground_size != f.cols()) throw InputError("W-partition ground size does not match the matrix");
  pV.validate();
  pW.validate();
  if (!(homog_radius > 0.0)) throw InputError("homogeneity radius must be positive");
  if (!(opt.gamma_scale > 0.0 && opt.gamma_scale <= 1.0)) throw InputError("gamma_scale must lie in (0,1]");

  RegularityReport rep;
  rep.partition_V = pV;
  rep.partition_W = pW;
  rep.params = params;
  rep.homog_radius = homog_radius;
  rep.gamma_scale = opt.gamma_scale;
  rep.exceptional_mode = opt.exceptional_mode;
  rep.certificates_V.assign(pV.block_count(), std::nullopt);
  rep.certificates_W.assign(pW.block_count(), std::nullopt);

  const std::size_t m = pV.block_count(), n = pW.block_count();
  rep.exceptional_check.v_ok = detail::exceptional_ok(pV, params.epsilon, opt.exceptional_mode);
  rep.exceptional_check.w_ok = detail::exceptional_ok(pW, params.epsilon, opt.exceptional_mode);
  if (opt.require_equal_sizes) rep.equal_sizes_ok = detail::equal_sizes(pV) && detail::equal_sizes(pW);
  rep.pair_results.assign(m, std::vector<std::optional<HomogeneityWitness>>(n));
  if (m == 0 || n == 0) {
    rep.satisfied = false;
    return rep;
  }
  if (f.range() != Range::unit) throw InputError("partition verification expects a unit-range matrix");
  rep.pair_gamma = opt.gamma_scale * params.decay(m * n);

  detail::parallel_for(m * n, opt.threads, [&](std::size_t t) {
    const std::size_t i = t / n, j = t % n;
    rep.pair_results[i][j] =
        check_homogeneous(f, pV.blocks[i], pW.blocks[j], homog_radius, rep.pair_gamma, rep.pair_gamma);
  });
  rep.satisfied = rep.failing_pairs() == 0 && rep.exceptional_check.v_ok && rep.exceptional_check.w_ok &&
                  rep.equal_sizes_ok.value_or(true);
  return rep;
}

enum class PartitionMode { greedy_refine, exhaustive };

struct PartitionBudget {
  std::size_t max_blocks = 16;  // per side
  std::size_t max_rounds = 32;
  std::optional<double> min_block_frac;  // default eps^2 / (block count)^2
};

struct FindOptions {
  PartitionMode mode = PartitionMode::greedy_refine;
  PartitionBudget budget;
  std::optional<double> homog_radius;  // default 5 delta + eps
  double gamma_scale = 1.0;
  std::size_t threads = 1;
  std::uint64_t exhaustive_cap = std::uint64_t{1} << 25;  // candidate partition pairs
};

namespace detail {

struct Block {
  IndexSet members;
  std::optional<DefinableSetExpr> cert;
};

struct SideState {
  std::vector<Block> blocks;
  IndexSet exceptional;
  std::size_t ground = 0;

  Partition partition() const {
    Partition p;
    p.ground_size = ground;
    for (const auto& b : blocks) p.blocks.push_back(b.members);
    p.exceptional = exceptional;
    return p;
  }

  void canonicalize() {
    for (auto& b : blocks) std::sort(b.members.begin(), b.members.end());
    std::sort(exceptional.begin(), exceptional.end());
    std::stable_sort(blocks.begin(), blocks.end(), [](const Block& x, const Block& y) {
      if (x.members.size() != y.members.size()) return x.members.size() > y.members.size();
      return x.members.front() < y.members.front();
    });
  }
};

// Largest 2^-p <= delta, as the exponent p. Capped at 60 so bucket numbers
// and interval endpoints fit in 64-bit integers.
inline int dyadic_exponent(double delta) {
  int p = 0;
  while (p < 60 && std::ldexp(1.0, -p) > delta) ++p;
  return p;
}

inline std::int64_t bucket_of(double v, int p) {
  const double h = std::ldexp(1.0, -p);
  const std::int64_t nb = static_cast<std::int64_t>(std::ceil(1.0 / h));
  return std::clamp<std::int64_t>(static_cast<std::int64_t>(std::floor(v / h)), 0, nb - 1);
}

inline double variance(const std::vector<double>& xs) {
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double v = 0.0;
  for (double x : xs) v += (x - mean) * (x - mean);
  return v / static_cast<double>(xs.size());
}

struct Bucket {
  std::int64_t t_lo, t_hi;  // covers [t_lo h, (t_hi + 1) h]
  IndexSet members;
};

// Splits `members` by the dyadic bucket of value(x), merging adjacent buckets
// (smallest combined size first) until at most `max_parts` remain.
template <class Value>
std::vector<Bucket> bucket_split(const IndexSet& members, int p, std::size_t max_parts, Value&& value) {
  std::map<std::int64_t, IndexSet> by;
  for (Index x : members) by[bucket_of(value(x), p)].push_back(x);
  std::vector<Bucket> out;
  for (auto& [t, s] : by) out.push_back({t, t, std::move(s)});
  while (out.size() > std::max<std::size_t>(1, max_parts)) {
    std::size_t best = 0;
    for (std::size_t i = 1; i + 1 < out.size(); ++i)
      if (out[i].members.size() + out[i + 1].members.size() <
          out[best].members.size() + out[best + 1].members.size())
        best = i;
    out[best].t_hi = out[best + 1].t_hi;
    out[best].members.insert(out[best].members.end(), out[best + 1].members.begin(), out[best + 1].members.end());
    std::sort(out[best].members.begin(), out[best].members.end());
    out.erase(out.begin() + static_cast<std::ptrdiff_t>(best) + 1);
  }
  return out;
}

inline std::optional<DefinableSetExpr> refine_certificate(const std::optional<DefinableSetExpr>& parent,
                                                          Index param, const Bucket& b, int p) {
  if (!parent) return std::nullopt;
  const std::int64_t den = std::int64_t{1} << p;
  Atom atom{param, Interval{Rational(b.t_lo, den), Rational(b.t_hi + 1, den)}};
  DefinableSetExpr e = *parent;
  for (auto& clause : e.clauses) clause.push_back(atom);
  return e;
}

inline DefinableSetExpr whole_side(Side side) {
  DefinableSetExpr e;
  e.side = side;
  e.clauses.push_back({});
  return e;
}

// One refinement pass on one side. `failing[i]` lists the opposite blocks j
// with (i, j) failing. Returns true if any block was split.
template <class Value>
bool refine_side(SideState& side, const std::vector<std::vector<std::size_t>>& failing,
                 const std::vector<Block>& other, int p, std::size_t max_blocks, Value&& value) {
  // Blocks with more failing pairs are refined first.
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < side.blocks.size(); ++i)
    if (!failing[i].empty()) order.push_back(i);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return failing[x].size() > failing[y].size(); });

  std::size_t count = side.blocks.size();
  std::vector<std::vector<Block>> replacement(side.blocks.size());
  bool changed = false;
  for (std::size_t i : order) {
    if (count >= max_blocks) break;
    const Block& blk = side.blocks[i];
    if (blk.members.size() < 2) continue;
    // Splitter: the opposite index in a failing block with the largest
    // variance over this block and at least two buckets; smallest index wins ties.
    std::optional<Index> best;
    double best_var = -1.0;
    for (std::size_t j : failing[i]) {
      for (Index y : other[j].members) {
        std::vector<double> xs;
        xs.reserve(blk.members.size());
        bool two = false;
        for (Index x : blk.members) {
          xs.push_back(value(x, y));
          if (bucket_of(xs.back(), p) != bucket_of(xs.front(), p)) two = true;
        }
        if (!two) continue;
        const double v = variance(xs);
        if (v > best_var || (v == best_var && best && y < *best)) {
          best_var = v;
          best = y;
        }
      }
    }
    if (!best) continue;
    const Index y = *best;
    auto parts = bucket_split(blk.members, p, max_blocks - count + 1, [&](Index x) { return value(x, y); });
    if (parts.size() < 2) continue;
    for (const auto& part : parts)
      replacement[i].push_back({part.members, refine_certificate(blk.cert, y, part, p)});
    count += parts.size() - 1;
    changed = true;
  }
  if (!changed) return false;
  std::vector<Block> next;
  for (std::size_t i = 0; i < side.blocks.size(); ++i) {
    if (replacement[i].empty())
      next.push_back(std::move(side.blocks[i]));
    else
      for (auto& b : replacement[i]) next.push_back(std::move(b));
  }
  side.blocks = std::move(next);
  return true;
}

// Moves blocks smaller than frac * ground to the exceptional set, smallest
// first, as long as the relative exceptional inequality keeps holding.
inline void drop_small_blocks(SideState& side, double frac, double epsilon) {
  side.canonicalize();
  while (side.blocks.size() > 1) {
    const Block& last = side.blocks.back();
    if (!(static_cast<double>(last.members.size()) < frac * static_cast<double>(side.ground))) break;
    const double e = static_cast<double>(side.exceptional.size() + last.members.size());
    if (!(e <= epsilon * static_cast<double>(side.blocks.front().members.size()))) break;
    side.exceptional.insert(side.exceptional.end(), last.members.begin(), last.members.end());
    side.blocks.pop_back();
  }
  side.canonicalize();
}

inline void attach_certificates(RegularityReport& rep, const ValueMatrix& f, const SideState& v,
                                const SideState& w) {
  auto fill = [&](const SideState& s, std::vector<std::optional<DefinableSetExpr>>& out) {
    out.assign(s.blocks.size(), std::nullopt);
    for (std::size_t i = 0; i < s.blocks.size(); ++i)
      if (s.blocks[i].cert && evaluate_set(*s.blocks[i].cert, f) == s.blocks[i].members)
        out[i] = s.blocks[i].cert;
  };
  fill(v, rep.certificates_V);
  fill(w, rep.certificates_W);
}

inline RegularityReport greedy_refine(const ValueMatrix& f, const Params& params, const FindOptions& opt,
                                      double radius) {
  SideState v, w;
  v.ground = f.rows();
  w.ground = f.cols();
  v.blocks.push_back({full_index_set(f.rows()), whole_side(Side::V)});
  w.blocks.push_back({full_index_set(f.cols()), whole_side(Side::W)});
  const int p = dyadic_exponent(params.delta);
  VerifyOptions vo;
  vo.gamma_scale = opt.gamma_scale;
  vo.threads = opt.threads;

  RegularityReport rep;
  for (std::size_t round = 0;; ++round) {
    rep = verify_partition(f, v.partition(), w.partition(), params, radius, vo);
    attach_certificates(rep, f, v, w);
    if (rep.satisfied || round >= opt.budget.max_rounds) return rep;

    const std::size_t m = v.blocks.size(), n = w.blocks.size();
    std::vector<std::vector<std::size_t>> fail_v(m), fail_w(n);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (!rep.pair_results[i][j]) {
          fail_v[i].push_back(j);
          fail_w[j].push_back(i);
        }
    const std::vector<Block> v_before = v.blocks, w_before = w.blocks;
    const bool sv = refine_side(v, fail_v, w_before, p, opt.budget.max_blocks,
                                [&](Index a, Index b) { return f(a, b); });
    const bool sw = refine_side(w, fail_w, v_before, p, opt.budget.max_blocks,
                                [&](Index b, Index a) { return f(a, b); });
    if (!sv && !sw) return rep;  // stalled
    auto frac_for = [&](const SideState& s) {
      if (opt.budget.min_block_frac) return *opt.budget.min_block_frac;
      const double c = static_cast<double>(s.blocks.size());
      return params.epsilon * params.epsilon / (c * c);
    };
    drop_small_blocks(v, frac_for(v), params.epsilon);
    drop_small_blocks(w, frac_for(w), params.epsilon);
  }
}

// All partitions of {0..n-1} with 1..max_blocks blocks and an exceptional
// block, as label vectors (0 = exceptional, blocks numbered by first
// appearance).
inline void enumerate_labelings(std::size_t n, std::size_t max_blocks,
                                std::vector<std::vector<std::size_t>>& out) {
  std::vector<std::size_t> l(n, 0);
  auto rec = [&](auto&& self, std::size_t x, std::size_t used) -> void {
    if (x == n) {
      if (used >= 1) out.push_back(l);
      return;
    }
    for (std::size_t lab = 0; lab <= std::min(used + 1, max_blocks); ++lab) {
      l[x] = lab;
      self(self, x + 1, std::max(used, lab));
    }
  };
  rec(rec, 0, 0);
}

struct Labeled {
  Partition part;
  std::uint32_t exc_mask = 0;
  std::vector<std::uint32_t> masks;
};

inline std::vector<Labeled> side_candidates(std::size_t n, std::size_t max_blocks, double epsilon) {
  std::vector<std::vector<std::size_t>> labs;
  enumerate_labelings(n, max_blocks, labs);
  std::vector<Labeled> out;
  for (auto& l : labs) {
    Labeled c;
    c.part = Partition::from_labels(l);
    c.part.canonicalize();
    if (!exceptional_ok(c.part, epsilon, ExceptionalMode::relative)) continue;
    for (Index x : c.part.exceptional) c.exc_mask |= 1u << x;
    for (const auto& b : c.part.blocks) {
      std::uint32_t mk = 0;
      for (Index x : b) mk |= 1u << x;
      c.masks.push_back(mk);
    }
    out.push_back(std::move(c));
  }
  // Canonical order: fewer blocks, then smaller exceptional set, then labels.
  std::stable_sort(out.begin(), out.end(), [](const Labeled& a, const Labeled& b) {
    return std::make_tuple(a.part.block_count(), a.part.exceptional.size(), a.part.labels()) <
           std::make_tuple(b.part.block_count(), b.part.exceptional.size(), b.part.labels());
  });
  return out;
}

inline RegularityReport exhaustive_search(const ValueMatrix& f, const Params& params, const FindOptions& opt,
                                          double radius) {
  constexpr std::size_t side_guard = 9;
  if (f.rows() > side_guard || f.cols() > side_guard)
    throw CapabilityError("exhaustive partition search needs |V|, |W| <= " + std::to_string(side_guard) +
                          "; got " + std::to_string(f.rows()) + "x" + std::to_string(f.cols()));
  const auto cv = side_candidates(f.rows(), opt.budget.max_blocks, params.epsilon);
  const auto cw = side_candidates(f.cols(), opt.budget.max_blocks, params.epsilon);
  const std::uint64_t total = static_cast<std::uint64_t>(cv.size()) * cw.size();
  if (total > opt.exhaustive_cap)
    throw CapabilityError("exhaustive partition search would examine " + std::to_string(total) +
                          " partition pairs, over the cap of " + std::to_string(opt.exhaustive_cap));

  std::map<std::tuple<std::uint32_t, std::uint32_t, std::size_t>, bool> memo;
  auto homogeneous = [&](std::uint32_t vm, const IndexSet& vb, std::uint32_t wm, const IndexSet& wb,
                         std::size_t mn) {
    auto key = std::make_tuple(vm, wm, mn);
    auto it = memo.find(key);
    if (it != memo.end()) return it->second;
    const double g = opt.gamma_scale * params.decay(mn);
    const bool ok = check_homogeneous(f, vb, wb, radius, g, g).has_value();
    memo.emplace(key, ok);
    return ok;
  };

  std::size_t best_fail = std::size_t(-1);
  const Labeled* best_v = nullptr;
  const Labeled* best_w = nullptr;
  for (std::size_t m = 1; m <= opt.budget.max_blocks; ++m)
    for (std::size_t n = 1; n <= opt.budget.max_blocks; ++n)
      for (const auto& a : cv) {
        if (a.part.block_count() != m) continue;
        for (const auto& b : cw) {
          if (b.part.block_count() != n) continue;
          std::size_t fails = 0;
          for (std::size_t i = 0; i < m && fails < best_fail; ++i)
            for (std::size_t j = 0; j < n; ++j)
              if (!homogeneous(a.masks[i], a.part.blocks[i], b.masks[j], b.part.blocks[j], m * n)) ++fails;
          if (fails < best_fail) {
            best_fail = fails;
            best_v = &a;
            best_w = &b;
          }
          if (fails == 0) goto done;
        }
      }
done:
  VerifyOptions vo;
  vo.gamma_scale = opt.gamma_scale;
  vo.threads = opt.threads;
  if (!best_v) return verify_partition(f, Partition::trivial(f.rows()), Partition::trivial(f.cols()), params, radius, vo);
  return verify_partition(f, best_v->part, best_w->part, params, radius, vo);
}

}  // namespace detail

// Searches for partitions making every block pair (radius; sigma(mn))-
// homogeneous with small exceptional sets. The returned report says honestly
// whether the search succeeded.
inline RegularityReport find_partition(const ValueMatrix& f, const Params& params, const FindOptions& opt = {}) {
  params.validate();
  if (f.range() != Range::unit) throw InputError("find_partition expects a unit-range matrix");
  if (opt.budget.max_blocks == 0) throw InputError("max_blocks must be positive");
  const double radius = opt.homog_radius.value_or(params.regularity_radius());
  if (opt.mode == PartitionMode::exhaustive) return detail::exhaustive_search(f, params, opt, radius);
  return detail::greedy_refine(f, params, opt, radius);
}

// tau(n) = (eps / 2n) sigma(4 n^2 ceil(1/eps)^2) with sigma monotonized.
inline DecayFn equipartition_decay(const DecayFn& sigma, double epsilon) {
  return DecayFn::equipartition_modified(sigma, epsilon);
}

struct EquipartitionOptions {
  PartitionBudget inner_budget;
  std::size_t threads = 1;
};

namespace detail {

// Cuts every block into chunks of exactly `chunk` elements (in index order);
// the remainders, and blocks smaller than one chunk, join the exceptional set.
inline Partition chop(const Partition& p, std::size_t chunk) {
  Partition out;
  out.ground_size = p.ground_size;
  out.exceptional = p.exceptional;
  for (const auto& b : p.blocks) {
    IndexSet sorted = b;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t full = chunk == 0 ? 0 : sorted.size() / chunk;
    for (std::size_t c = 0; c < full; ++c)
      out.blocks.emplace_back(sorted.begin() + static_cast<std::ptrdiff_t>(c * chunk),
                              sorted.begin() + static_cast<std::ptrdiff_t>((c + 1) * chunk));
    out.exceptional.insert(out.exceptional.end(), sorted.begin() + static_cast<std::ptrdiff_t>(full * chunk),
                           sorted.end());
  }
  out.canonicalize();
  return out;
}

inline std::size_t chunk_size(double epsilon, std::size_t blocks, std::size_t side) {
  return static_cast<std::size_t>(
      std::ceil(epsilon / (2.0 * static_cast<double>(blocks)) * static_cast<double>(side)));
}

}  // namespace detail

// Equal-size partitions: search at (delta, eps/2, tau), chop each block into
// chunks of ceil((eps / 2m') |V|), and verify the result at (5 delta + eps;
// sigma(mn)) with |V0| <= eps |V| and equal block sizes.
inline RegularityReport equipartition(const ValueMatrix& f, const Params& params,
                                      const EquipartitionOptions& opt = {}) {
  params.validate();
  if (f.range() != Range::unit) throw InputError("equipartition expects a unit-range matrix");
  Params inner = params;
  inner.epsilon = params.epsilon / 2.0;
  inner.decay = equipartition_decay(params.decay, params.epsilon);
  FindOptions fo;
  fo.budget = opt.inner_budget;
  fo.threads = opt.threads;
  const RegularityReport found = find_partition(f, inner, fo);

  Partition pv = found.partition_V, pw = found.partition_W;
  if (pv.block_count() > 0) pv = detail::chop(pv, detail::chunk_size(params.epsilon, pv.block_count(), f.rows()));
  if (pw.block_count() > 0) pw = detail::chop(pw, detail::chunk_size(params.epsilon, pw.block_count(), f.cols()));

  VerifyOptions vo;
  vo.exceptional_mode = ExceptionalMode::absolute;
  vo.require_equal_sizes = true;
  vo.threads = opt.threads;
  Params outer = params;
  outer.decay = params.decay.monotonized();
  return verify_partition(f, pv, pw, outer, params.regularity_radius(), vo);
}

struct RefinementOptions {
  std::optional<double> min_block_frac;  // default eps^2 / (piece count)^2
  std::optional<double> homog_radius;    // default 5 delta + eps
  std::size_t threads = 1;
};

// Common refinement of two partitions of the ground set of a symmetric f.
// Pieces V_i cap W_j become blocks of one partition used on both sides.
// The exceptional set collects V0, W0, pieces below the size floor, and
// every original block lying more than half inside the other partition's
// exceptional set.
inline RegularityReport common_refinement(const ValueMatrix& f, const Partition& pV, const Partition& pW,
                                          const Params& params, const RefinementOptions& opt = {}) {
  params.validate();
  if (!f.is_square_symmetric()) throw InputError("common_refinement needs a square symmetric matrix");
  if (pV.ground_size != f.rows() || pW.ground_size != f.rows())
    throw InputError("partitions must cover the ground set of the matrix");
  pV.validate();
  pW.validate();
  const std::size_t n = f.rows();
  const auto lv = pV.labels(), lw = pW.labels();

  std::vector<char> exc(n, 0);
  for (Index x : pV.exceptional) exc[x] = 1;
  for (Index x : pW.exceptional) exc[x] = 1;
  auto mostly_in = [&](const IndexSet& block, const IndexSet& other_exc) {
    std::vector<char> in(n, 0);
    for (Index x : other_exc) in[x] = 1;
    std::size_t c = 0;
    for (Index x : block) c += in[x];
    return 2 * c > block.size();
  };
  for (const auto& b : pV.blocks)
    if (mostly_in(b, pW.exceptional))
      for (Index x : b) exc[x] = 1;
  for (const auto& b : pW.blocks)
    if (mostly_in(b, pV.exceptional))
      for (Index x : b) exc[x] = 1;

  std::map<std::pair<std::size_t, std::size_t>, IndexSet> pieces;
  for (Index x = 0; x < n; ++x)
    if (!exc[x]) pieces[{lv[x], lw[x]}].push_back(x);

  Partition p;
  p.ground_size = n;
  const double c = static_cast<double>(std::max<std::size_t>(1, pieces.size()));
  const double frac = opt.min_block_frac.value_or(params.epsilon * params.epsilon / (c * c));
  for (auto& [key, piece] : pieces) {
    if (static_cast<double>(piece.size()) < frac * static_cast<double>(n))
      for (Index x : piece) exc[x] = 1;
    else
      p.blocks.push_back(piece);
  }
  for (Index x = 0; x < n; ++x)
    if (exc[x]) p.exceptional.push_back(x);
  p.canonicalize();

  VerifyOptions vo;
  vo.threads = opt.threads;
  return verify_partition(f, p, p, params, opt.homog_radius.value_or(params.regularity_radius()), vo);
}

}  // namespace stabreg
