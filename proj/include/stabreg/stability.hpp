#pragma once

// Half-graph witness search.
//
// A plain chain (a_1,b_1),...,(a_k,b_k) needs |f(a_i,b_j) - f(a_j,b_i)| >= delta
// for every i < j. That relation is symmetric in the two pairs, so a plain
// chain is exactly a k-clique in the "compatibility graph" on V x W and the
// exact search is a max-clique branch and bound with a greedy-colouring bound.
//
// A star chain additionally needs a threshold r in [0,1] with
// f(a_i,b_j) - r >= delta on and above the diagonal and f <= r below it. For a
// fixed chain the best threshold is r = max(0, L) where L is the largest
// below-diagonal value: raising r never helps the upper inequalities and
// rounding of f - r is monotone in r. The exact search is a DFS over ordered
// chains that tracks L and the smallest on/above-diagonal value U.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "stabreg/core.hpp"

namespace stabreg {

enum class SearchMode { exact, greedy };

struct HalfGraphOptions {
  SearchMode mode = SearchMode::exact;
  bool distinct = false;        // require pairwise distinct a's and b's
  std::size_t guard_cells = 400;  // exact search allowed when |V||W| <= guard_cells
  std::size_t guard_k = 6;        // ... or when the target length is <= guard_k
};

namespace detail {

class Bitset {
 public:
  Bitset() = default;
  explicit Bitset(std::size_t n) : n_(n), w_((n + 63) / 64, 0) {}

  void set(std::size_t i) { w_[i >> 6] |= std::uint64_t{1} << (i & 63); }
  void reset(std::size_t i) { w_[i >> 6] &= ~(std::uint64_t{1} << (i & 63)); }
  bool test(std::size_t i) const { return w_[i >> 6] >> (i & 63) & 1; }
  std::size_t count() const {
    std::size_t c = 0;
    for (auto x : w_) c += static_cast<std::size_t>(std::popcount(x));
    return c;
  }
  bool none() const {
    for (auto x : w_)
      if (x) return false;
    return true;
  }
  std::size_t first() const {
    for (std::size_t i = 0; i < w_.size(); ++i)
      if (w_[i]) return i * 64 + static_cast<std::size_t>(std::countr_zero(w_[i]));
    return n_;
  }
  // this &= ~o
  void subtract(const Bitset& o) {
    for (std::size_t i = 0; i < w_.size(); ++i) w_[i] &= ~o.w_[i];
  }
  Bitset& operator&=(const Bitset& o) {
    for (std::size_t i = 0; i < w_.size(); ++i) w_[i] &= o.w_[i];
    return *this;
  }
  friend Bitset operator&(Bitset a, const Bitset& b) { return a &= b; }

  template <class Fn>
  void for_each(Fn&& fn) const {
    for (std::size_t i = 0; i < w_.size(); ++i) {
      std::uint64_t x = w_[i];
      while (x) {
        fn(i * 64 + static_cast<std::size_t>(std::countr_zero(x)));
        x &= x - 1;
      }
    }
  }

 private:
  std::size_t n_ = 0;
  std::vector<std::uint64_t> w_;
};

struct PairIndex {
  std::size_t cols;
  Index a(std::size_t p) const { return p / cols; }
  Index b(std::size_t p) const { return p % cols; }
};

inline bool plain_compatible(const ValueMatrix& f, Index a1, Index b1, Index a2, Index b2,
                             double delta, bool distinct) {
  if (distinct && (a1 == a2 || b1 == b2)) return false;
  return std::fabs(f(a1, b2) - f(a2, b1)) >= delta;
}

inline void check_search_guard(const ValueMatrix& f, std::size_t target_len,
                               const HalfGraphOptions& opt) {
  const std::size_t cells = f.rows() * f.cols();
  if (cells <= opt.guard_cells || target_len <= opt.guard_k) return;
  throw CapabilityError("exact half-graph search needs |V||W| <= " + std::to_string(opt.guard_cells) +
                        " or k <= " + std::to_string(opt.guard_k) + "; got |V||W| = " +
                        std::to_string(cells) + ", k = " + std::to_string(target_len));
}

// Max clique in the compatibility graph, stopping once `cap` nodes are found.
class PlainChainSearch {
 public:
  PlainChainSearch(const ValueMatrix& f, double delta, bool distinct)
      : idx_{f.cols()}, n_(f.rows() * f.cols()), adj_(n_, Bitset(n_)) {
    for (std::size_t p = 0; p < n_; ++p)
      for (std::size_t q = p + 1; q < n_; ++q)
        if (plain_compatible(f, idx_.a(p), idx_.b(p), idx_.a(q), idx_.b(q), delta, distinct)) {
          adj_[p].set(q);
          adj_[q].set(p);
        }
  }

  std::vector<std::size_t> run(std::size_t cap) {
    cap_ = cap;
    best_.clear();
    std::vector<std::size_t> current;
    Bitset all(n_);
    for (std::size_t p = 0; p < n_; ++p) all.set(p);
    if (n_ > 0 && cap_ > 0) expand(current, all);
    std::sort(best_.begin(), best_.end());
    return best_;
  }

 private:
  // Greedy sequential colouring of the candidates; colour classes give an
  // upper bound on the clique size inside each prefix.
  void colour_sort(const Bitset& cand, std::vector<std::size_t>& order,
                   std::vector<std::size_t>& bound) const {
    order.clear();
    bound.clear();
    Bitset uncoloured = cand;
    std::size_t colour = 0;
    while (!uncoloured.none()) {
      ++colour;
      Bitset q = uncoloured;
      while (!q.none()) {
        const std::size_t v = q.first();
        q.reset(v);
        uncoloured.reset(v);
        q.subtract(adj_[v]);
        order.push_back(v);
        bound.push_back(colour);
      }
    }
  }

  bool expand(std::vector<std::size_t>& current, Bitset cand) {
    std::vector<std::size_t> order, bound;
    colour_sort(cand, order, bound);
    for (std::size_t i = order.size(); i-- > 0;) {
      if (current.size() + bound[i] <= best_.size()) return false;
      const std::size_t v = order[i];
      current.push_back(v);
      Bitset next = cand & adj_[v];
      if (next.none() || current.size() >= cap_) {
        if (current.size() > best_.size()) best_ = current;
      } else if (expand(current, next)) {
        return true;
      }
      current.pop_back();
      if (best_.size() >= cap_) return true;
      cand.reset(v);
    }
    return best_.size() >= cap_;
  }

  PairIndex idx_;
  std::size_t n_;
  std::vector<Bitset> adj_;
  std::vector<std::size_t> best_;
  std::size_t cap_ = 0;
};

// DFS over ordered star chains; returns the longest chain found (capped).
class StarChainSearch {
 public:
  StarChainSearch(const ValueMatrix& f, double delta, bool distinct)
      : f_(f), delta_(delta), idx_{f.cols()}, n_(f.rows() * f.cols()),
        succ_(n_, Bitset(n_)), diag_(n_) {
    for (std::size_t p = 0; p < n_; ++p)
      if (f(idx_.a(p), idx_.b(p)) >= delta) diag_.set(p);
    // p may precede q only if f(p.a, q.b) - f(q.a, p.b) >= delta: necessary
    // for any threshold r with f(q.a,p.b) <= r and f(p.a,q.b) - r >= delta.
    for (std::size_t p = 0; p < n_; ++p)
      for (std::size_t q = 0; q < n_; ++q) {
        if (p == q || !diag_.test(q)) continue;
        if (distinct && (idx_.a(p) == idx_.a(q) || idx_.b(p) == idx_.b(q))) continue;
        if (f(idx_.a(p), idx_.b(q)) - f(idx_.a(q), idx_.b(p)) >= delta) succ_[p].set(q);
      }
  }

  std::vector<std::size_t> run(std::size_t cap) {
    cap_ = cap;
    best_.clear();
    std::vector<std::size_t> chain;
    if (cap_ > 0) dfs(chain, -std::numeric_limits<double>::infinity(),
                      std::numeric_limits<double>::infinity(), diag_);
    return best_;
  }

 private:
  bool dfs(std::vector<std::size_t>& chain, double lower, double upper, const Bitset& cand) {
    if (chain.size() > best_.size()) best_ = chain;
    if (best_.size() >= cap_) return true;
    if (chain.size() + cand.count() <= best_.size()) return false;
    bool done = false;
    cand.for_each([&](std::size_t q) {
      if (done) return;
      const Index qa = idx_.a(q), qb = idx_.b(q);
      double lo = lower, up = std::min(upper, f_(qa, qb));
      for (std::size_t p : chain) {
        lo = std::max(lo, f_(qa, idx_.b(p)));
        up = std::min(up, f_(idx_.a(p), qb));
      }
      if (!(up - std::max(0.0, lo) >= delta_)) return;
      chain.push_back(q);
      done = dfs(chain, lo, up, cand & succ_[q]);
      chain.pop_back();
    });
    return done;
  }

  const ValueMatrix& f_;
  double delta_;
  PairIndex idx_;
  std::size_t n_;
  std::vector<Bitset> succ_;
  Bitset diag_;
  std::vector<std::size_t> best_;
  std::size_t cap_ = 0;
};

inline HalfGraphWitness witness_from_pairs(const ValueMatrix& f, const std::vector<std::size_t>& pairs,
                                           WitnessKind kind, double delta,
                                           std::optional<double> r = std::nullopt) {
  PairIndex idx{f.cols()};
  HalfGraphWitness w;
  w.kind = kind;
  w.delta = delta;
  w.r = r;
  for (std::size_t p : pairs) {
    w.a_idx.push_back(idx.a(p));
    w.b_idx.push_back(idx.b(p));
  }
  return w;
}

// Greedy plain chain: seed with the two pairs of largest cross difference,
// then repeatedly append the compatible pair whose weakest constraint is
// largest.
inline std::vector<std::size_t> greedy_plain_chain(const ValueMatrix& f, double delta, bool distinct,
                                                   std::size_t cap) {
  PairIndex idx{f.cols()};
  const std::size_t n = f.rows() * f.cols();
  std::vector<std::size_t> chain;
  if (n == 0 || cap == 0) return chain;
  double best = -1.0;
  std::size_t bp = 0, bq = 0;
  for (std::size_t p = 0; p < n; ++p)
    for (std::size_t q = p + 1; q < n; ++q) {
      if (distinct && (idx.a(p) == idx.a(q) || idx.b(p) == idx.b(q))) continue;
      const double d = std::fabs(f(idx.a(p), idx.b(q)) - f(idx.a(q), idx.b(p)));
      if (d > best) {
        best = d;
        bp = p;
        bq = q;
      }
    }
  chain.push_back(bp);
  if (cap == 1 || !(best >= delta)) return chain;
  chain.push_back(bq);
  while (chain.size() < cap) {
    double best_slack = -1.0;
    std::size_t pick = n;
    for (std::size_t q = 0; q < n; ++q) {
      double slack = std::numeric_limits<double>::infinity();
      for (std::size_t p : chain) {
        if (p == q || !plain_compatible(f, idx.a(p), idx.b(p), idx.a(q), idx.b(q), delta, distinct)) {
          slack = -1.0;
          break;
        }
        slack = std::min(slack, std::fabs(f(idx.a(p), idx.b(q)) - f(idx.a(q), idx.b(p))));
      }
      if (slack > best_slack) {
        best_slack = slack;
        pick = q;
      }
    }
    if (pick == n || best_slack < 0.0) break;
    chain.push_back(pick);
  }
  return chain;
}

// Greedy star chain: start from the largest diagonal value and append the
// pair keeping the most room between U - max(0, L) and delta.
inline std::vector<std::size_t> greedy_star_chain(const ValueMatrix& f, double delta, bool distinct,
                                                  std::size_t cap) {
  PairIndex idx{f.cols()};
  const std::size_t n = f.rows() * f.cols();
  std::vector<std::size_t> chain;
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();
  while (chain.size() < cap) {
    double best_room = -1.0;
    std::size_t pick = n;
    double pick_lo = 0.0, pick_up = 0.0;
    for (std::size_t q = 0; q < n; ++q) {
      const Index qa = idx.a(q), qb = idx.b(q);
      double lo = lower, up = std::min(upper, f(qa, qb));
      bool ok = true;
      for (std::size_t p : chain) {
        if (p == q || (distinct && (idx.a(p) == qa || idx.b(p) == qb))) {
          ok = false;
          break;
        }
        lo = std::max(lo, f(qa, idx.b(p)));
        up = std::min(up, f(idx.a(p), qb));
      }
      if (!ok || !(up - std::max(0.0, lo) >= delta)) continue;
      const double room = (up - std::max(0.0, lo)) - delta;
      if (room > best_room) {
        best_room = room;
        pick = q;
        pick_lo = lo;
        pick_up = up;
      }
    }
    if (pick == n) break;
    chain.push_back(pick);
    lower = pick_lo;
    upper = pick_up;
  }
  return chain;
}

inline double star_threshold(const ValueMatrix& f, const HalfGraphWitness& w) {
  double lo = 0.0;
  for (std::size_t i = 0; i < w.a_idx.size(); ++i)
    for (std::size_t j = 0; j < i; ++j) lo = std::max(lo, f(w.a_idx[i], w.b_idx[j]));
  return lo;
}

}  // namespace detail

// Returns a witness of length k of the requested kind, or nullopt. Exact mode
// returns a witness iff one exists.
inline std::optional<HalfGraphWitness> find_half_graph(const ValueMatrix& f, std::size_t k, double delta,
                                                       WitnessKind kind,
                                                       const HalfGraphOptions& opt = {}) {
  if (!(delta > 0.0)) throw InputError("delta must be positive");
  if (k == 0) throw InputError("k must be positive");
  if (kind == WitnessKind::star && f.range() != Range::unit)
    throw InputError("star witnesses are defined for unit-range matrices");
  std::vector<std::size_t> chain;
  if (opt.mode == SearchMode::exact) {
    detail::check_search_guard(f, k, opt);
    if (kind == WitnessKind::plain)
      chain = detail::PlainChainSearch(f, delta, opt.distinct).run(k);
    else
      chain = detail::StarChainSearch(f, delta, opt.distinct).run(k);
  } else {
    chain = kind == WitnessKind::plain ? detail::greedy_plain_chain(f, delta, opt.distinct, k)
                                       : detail::greedy_star_chain(f, delta, opt.distinct, k);
  }
  if (chain.size() < k) return std::nullopt;
  chain.resize(k);
  auto w = detail::witness_from_pairs(f, chain, kind, delta);
  if (kind == WitnessKind::star) w.r = detail::star_threshold(f, w);
  if (!validate_witness(f, w)) return std::nullopt;
  return w;
}

struct StabilityReport {
  double delta = 0.0;
  std::optional<std::size_t> plain_index;
  std::optional<std::size_t> star_index;
  bool plain_exact = false;
  bool star_exact = false;
  bool exact = false;  // every computed index is exact
  std::optional<HalfGraphWitness> plain_witness;
  std::optional<HalfGraphWitness> star_witness;
};

enum class KindSelection { plain, star, both };

struct StabilityOptions {
  KindSelection kinds = KindSelection::both;
  HalfGraphOptions search;
  std::size_t k_max = 0;  // 0: unbounded
};

// Longest chain found per kind. An index is exact when the search was
// exhaustive one step beyond it (index < k_max) and found nothing.
inline StabilityReport stability_index(const ValueMatrix& f, double delta,
                                       const StabilityOptions& opt = {}) {
  if (!(delta > 0.0)) throw InputError("delta must be positive");
  StabilityReport rep;
  rep.delta = delta;
  const std::size_t cap = opt.k_max == 0 ? std::numeric_limits<std::size_t>::max() : opt.k_max;
  const bool exact = opt.search.mode == SearchMode::exact;
  if (exact) detail::check_search_guard(f, cap, opt.search);
  // Greedy chains need a finite cap; no chain can use more pairs than exist.
  const std::size_t greedy_cap = std::min(cap, f.rows() * f.cols());

  auto finish = [&](std::vector<std::size_t> chain, WitnessKind kind, std::optional<std::size_t>& index,
                    bool& is_exact, std::optional<HalfGraphWitness>& witness) {
    index = chain.size();
    is_exact = exact && chain.size() < cap;
    if (chain.empty()) return;
    auto w = detail::witness_from_pairs(f, chain, kind, delta);
    if (kind == WitnessKind::star) w.r = detail::star_threshold(f, w);
    witness = std::move(w);
  };

  if (opt.kinds != KindSelection::star) {
    auto chain = exact ? detail::PlainChainSearch(f, delta, opt.search.distinct).run(cap)
                       : detail::greedy_plain_chain(f, delta, opt.search.distinct, greedy_cap);
    finish(std::move(chain), WitnessKind::plain, rep.plain_index, rep.plain_exact, rep.plain_witness);
  }
  if (opt.kinds != KindSelection::plain) {
    if (f.range() != Range::unit) throw InputError("star witnesses are defined for unit-range matrices");
    auto chain = exact ? detail::StarChainSearch(f, delta, opt.search.distinct).run(cap)
                       : detail::greedy_star_chain(f, delta, opt.search.distinct, greedy_cap);
    finish(std::move(chain), WitnessKind::star, rep.star_index, rep.star_exact, rep.star_witness);
  }
  rep.exact = (!rep.plain_index || rep.plain_exact) && (!rep.star_index || rep.star_exact);
  return rep;
}

namespace detail {

// Pivot-greedy extraction of a monochromatic subsequence from a colouring of
// pairs i < j of `items`. Each pivot takes the colour of the largest class of
// later items; the pivots of the most frequent colour are pairwise of that
// colour. The last pivot has no later items and joins any class.
template <class Colour>
std::pair<std::vector<std::size_t>, int> greedy_monochromatic(const std::vector<std::size_t>& items,
                                                              int colours, Colour&& colour_of) {
  std::vector<std::size_t> rest = items;
  std::vector<std::pair<std::size_t, int>> pivots;  // (item, colour or -1)
  while (!rest.empty()) {
    const std::size_t p = rest.front();
    std::vector<std::vector<std::size_t>> cls(static_cast<std::size_t>(colours));
    for (std::size_t i = 1; i < rest.size(); ++i)
      cls[static_cast<std::size_t>(colour_of(p, rest[i]))].push_back(rest[i]);
    if (rest.size() == 1) {
      pivots.emplace_back(p, -1);
      break;
    }
    std::size_t pick = 0;
    for (std::size_t c = 1; c < cls.size(); ++c)
      if (cls[c].size() > cls[pick].size()) pick = c;
    pivots.emplace_back(p, static_cast<int>(pick));
    rest = std::move(cls[pick]);
  }
  std::vector<std::size_t> freq(static_cast<std::size_t>(colours), 0);
  for (auto& [item, c] : pivots)
    if (c >= 0) ++freq[static_cast<std::size_t>(c)];
  int best = 0;
  for (int c = 1; c < colours; ++c)
    if (freq[static_cast<std::size_t>(c)] > freq[static_cast<std::size_t>(best)]) best = c;
  std::vector<std::size_t> out;
  for (auto& [item, c] : pivots)
    if (c == best || c < 0) out.push_back(item);
  return {out, best};
}

}  // namespace detail

// Turns a plain chain (valid at delta_prime) into a star witness of length k
// at delta < delta_prime by the two-stage Ramsey extraction: first a
// subsequence on which every pair goes the same direction, then one on which
// every lower value f(a_j, b_i) lies in the same bucket [(t-1)/m, t/m] with
// m = ceil(1 / (delta_prime - delta)). Both stages are greedy, so this can
// return nullopt even when a star witness exists.
inline std::optional<HalfGraphWitness> extract_star_witness(const ValueMatrix& f, const HalfGraphWitness& w,
                                                            double delta_prime, double delta, std::size_t k) {
  if (w.kind != WitnessKind::plain) throw InputError("extract_star_witness expects a plain witness");
  if (!(delta > 0.0) || !(delta_prime > delta)) throw InputError("need delta_prime > delta > 0");
  if (k == 0) throw InputError("k must be positive");
  if (f.range() != Range::unit) throw InputError("star witnesses are defined for unit-range matrices");
  HalfGraphWitness at_prime = w;
  at_prime.delta = delta_prime;
  if (!validate_witness(f, at_prime)) throw InputError("input witness does not validate at delta_prime");

  const std::size_t len = w.length();
  std::vector<std::size_t> items(len);
  for (std::size_t i = 0; i < len; ++i) items[i] = i;
  auto va = [&](std::size_t i, std::size_t j) { return f(w.a_idx[i], w.b_idx[j]); };

  // Stage 1: colour 0 when f(a_i,b_j) - f(a_j,b_i) >= delta', else colour 1.
  auto [mono, dir] = detail::greedy_monochromatic(items, 2, [&](std::size_t i, std::size_t j) {
    return va(i, j) - va(j, i) >= delta_prime ? 0 : 1;
  });
  if (dir == 1) std::reverse(mono.begin(), mono.end());
  if (mono.size() < 2 * k + 1) return std::nullopt;

  // Stage 2: bucket of the lower value of each ordered pair.
  const std::size_t m = static_cast<std::size_t>(std::ceil(1.0 / (delta_prime - delta)));
  auto bucket = [&](double v) {
    for (std::size_t t = 1; t <= m; ++t)
      if (v <= static_cast<double>(t) / static_cast<double>(m)) return t;
    return m;
  };
  std::vector<std::size_t> pos(mono.size());
  for (std::size_t i = 0; i < pos.size(); ++i) pos[i] = i;
  auto [seq, colour] = detail::greedy_monochromatic(pos, static_cast<int>(m), [&](std::size_t i, std::size_t j) {
    return static_cast<int>(bucket(va(mono[j], mono[i])) - 1);
  });
  if (seq.size() < 2 * k + 1) return std::nullopt;
  seq.resize(2 * k + 1);

  HalfGraphWitness star;
  star.kind = WitnessKind::star;
  star.delta = delta;
  star.r = static_cast<double>(colour + 1) / static_cast<double>(m);
  // 1-based positions 2, 4, ..., 2k for a and 3, 5, ..., 2k+1 for b.
  for (std::size_t i = 1; i <= k; ++i) {
    star.a_idx.push_back(w.a_idx[mono[seq[2 * i - 1]]]);
    star.b_idx.push_back(w.b_idx[mono[seq[2 * i]]]);
  }
  if (!validate_witness(f, star)) return std::nullopt;
  return star;
}

}  // namespace stabreg
