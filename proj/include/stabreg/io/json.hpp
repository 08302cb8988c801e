#pragma once

// JSON encodings of the library types. Every to_json has a matching
// from_json so reports can be replayed.

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "stabreg/core.hpp"
#include "stabreg/decomposition.hpp"
#include "stabreg/definable.hpp"
#include "stabreg/generators.hpp"
#include "stabreg/norms.hpp"
#include "stabreg/params.hpp"
#include "stabreg/partition.hpp"
#include "stabreg/stability.hpp"

namespace stabreg::io {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Partitions and witnesses

inline json to_json(const Partition& p) {
  return {{"ground_size", p.ground_size}, {"blocks", p.blocks}, {"exceptional", p.exceptional}};
}

inline Partition partition_from_json(const json& j) {
  Partition p;
  p.ground_size = j.at("ground_size").get<std::size_t>();
  p.blocks = j.at("blocks").get<std::vector<IndexSet>>();
  p.exceptional = j.at("exceptional").get<IndexSet>();
  p.validate();
  return p;
}

inline json to_json(const HalfGraphWitness& w) {
  return {{"kind", to_string(w.kind)},
          {"a", w.a_idx},
          {"b", w.b_idx},
          {"delta", w.delta},
          {"r", w.r ? json(*w.r) : json(nullptr)}};
}

inline HalfGraphWitness half_graph_from_json(const json& j) {
  HalfGraphWitness w;
  const auto kind = j.at("kind").get<std::string>();
  if (kind != "plain" && kind != "star") throw InputError("unknown witness kind '" + kind + "'");
  w.kind = kind == "plain" ? WitnessKind::plain : WitnessKind::star;
  w.a_idx = j.at("a").get<IndexSet>();
  w.b_idx = j.at("b").get<IndexSet>();
  w.delta = j.at("delta").get<double>();
  if (!j.at("r").is_null()) w.r = j.at("r").get<double>();
  return w;
}

inline json to_json(const HomogeneityWitness& w) {
  return {{"r", w.r},
          {"s", w.s},
          {"v_prime", w.v_prime},
          {"w_prime", w.w_prime},
          {"v_prime_size", w.v_prime.size()},
          {"w_prime_size", w.w_prime.size()},
          {"delta", w.delta},
          {"gamma", w.gamma},
          {"epsilon", w.epsilon}};
}

inline HomogeneityWitness homogeneity_from_json(const json& j) {
  HomogeneityWitness w;
  w.r = j.at("r").get<double>();
  w.s = j.at("s").get<double>();
  w.v_prime = j.at("v_prime").get<IndexSet>();
  w.w_prime = j.at("w_prime").get<IndexSet>();
  if (j.at("v_prime_size").get<std::size_t>() != w.v_prime.size() ||
      j.at("w_prime_size").get<std::size_t>() != w.w_prime.size())
    throw InputError("witness subset sizes do not match the recorded subsets");
  w.delta = j.at("delta").get<double>();
  w.gamma = j.at("gamma").get<double>();
  w.epsilon = j.at("epsilon").get<double>();
  return w;
}

// ---------------------------------------------------------------------------
// Parameters

inline json to_json(const DecayFn& d) {
  switch (d.kind()) {
    case DecayFn::Kind::constant: return {{"kind", "const"}, {"c", d.parameter()}};
    case DecayFn::Kind::inverse: return {{"kind", "inv"}, {"c", d.parameter()}};
    case DecayFn::Kind::inverse_square: return {{"kind", "invsq"}, {"c", d.parameter()}};
    case DecayFn::Kind::exponential: return {{"kind", "exp"}, {"c", d.parameter()}};
    case DecayFn::Kind::table: return {{"kind", "table"}, {"values", d.table_values()}, {"fallback", d.parameter()}};
    case DecayFn::Kind::equipartition:
      return {{"kind", "tau"}, {"epsilon", d.parameter()}, {"base", to_json(*d.base())}};
  }
  return nullptr;
}

inline DecayFn decay_from_json(const json& j) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "const") return DecayFn::constant(j.at("c").get<double>());
  if (kind == "inv") return DecayFn::inverse(j.at("c").get<double>());
  if (kind == "invsq") return DecayFn::inverse_square(j.at("c").get<double>());
  if (kind == "exp") return DecayFn::exponential(j.at("c").get<double>());
  if (kind == "table")
    return DecayFn::table(j.at("values").get<std::vector<double>>(), j.at("fallback").get<double>());
  if (kind == "tau") return DecayFn::equipartition_modified(decay_from_json(j.at("base")), j.at("epsilon").get<double>());
  throw InputError("unknown decay kind '" + kind + "'");
}

inline json to_json(const Params& p) {
  return {{"delta", p.delta}, {"epsilon", p.epsilon}, {"gamma", p.gamma}, {"k", p.k}, {"decay", to_json(p.decay)}};
}

inline Params params_from_json(const json& j) {
  Params p;
  p.delta = j.at("delta").get<double>();
  p.epsilon = j.at("epsilon").get<double>();
  p.gamma = j.at("gamma").get<double>();
  p.k = j.at("k").get<std::size_t>();
  p.decay = decay_from_json(j.at("decay"));
  p.validate();
  return p;
}

// ---------------------------------------------------------------------------
// Definable expressions

inline json to_json(const DefinableSetExpr& e) {
  json clauses = json::array();
  for (const auto& clause : e.clauses) {
    json c = json::array();
    for (const auto& a : clause)
      c.push_back({{"param", a.param}, {"lo", a.interval.lo.str()}, {"hi", a.interval.hi.str()}});
    clauses.push_back(std::move(c));
  }
  return {{"side", to_string(e.side)}, {"clauses", std::move(clauses)}, {"complexity", complexity(e)}};
}

inline DefinableSetExpr definable_from_json(const json& j) {
  DefinableSetExpr e;
  const auto side = j.at("side").get<std::string>();
  if (side != "V" && side != "W") throw InputError("unknown side '" + side + "'");
  e.side = side == "V" ? Side::V : Side::W;
  for (const auto& c : j.at("clauses")) {
    std::vector<Atom> clause;
    for (const auto& a : c)
      clause.push_back({a.at("param").get<Index>(),
                        Interval{Rational::parse(a.at("lo").get<std::string>()),
                                 Rational::parse(a.at("hi").get<std::string>())}});
    e.clauses.push_back(std::move(clause));
  }
  if (j.at("complexity").get<std::uint64_t>() != complexity(e))
    throw InputError("recorded complexity does not match the expression");
  return e;
}

inline json to_json(const MinMaxExpr& e) {
  return {{"side", to_string(e.side)}, {"shape", e.shape}, {"complexity", complexity(e)}};
}

// ---------------------------------------------------------------------------
// Reports

inline json to_json(const StabilityReport& r) {
  auto idx = [](const std::optional<std::size_t>& v) { return v ? json(*v) : json(nullptr); };
  auto wit = [](const std::optional<HalfGraphWitness>& w) { return w ? to_json(*w) : json(nullptr); };
  return {{"delta", r.delta},
          {"plain_index", idx(r.plain_index)},
          {"star_index", idx(r.star_index)},
          {"plain_exact", r.plain_exact},
          {"star_exact", r.star_exact},
          {"exact", r.exact},
          {"plain_witness", wit(r.plain_witness)},
          {"star_witness", wit(r.star_witness)}};
}

inline json to_json(const RegularityReport& r) {
  json pairs = json::array();
  for (const auto& row : r.pair_results) {
    json jr = json::array();
    for (const auto& w : row) jr.push_back(w ? to_json(*w) : json(nullptr));
    pairs.push_back(std::move(jr));
  }
  auto certs = [](const std::vector<std::optional<DefinableSetExpr>>& cs) {
    json out = json::array();
    for (const auto& c : cs) out.push_back(c ? to_json(*c) : json(nullptr));
    return out;
  };
  return {{"partition_V", to_json(r.partition_V)},
          {"partition_W", to_json(r.partition_W)},
          {"pair_results", std::move(pairs)},
          {"params", to_json(r.params)},
          {"homog_radius", r.homog_radius},
          {"pair_gamma", r.pair_gamma},
          {"gamma_scale", r.gamma_scale},
          {"exceptional_mode", to_string(r.exceptional_mode)},
          {"exceptional_check", {{"v_ok", r.exceptional_check.v_ok}, {"w_ok", r.exceptional_check.w_ok}}},
          {"equal_sizes_ok", r.equal_sizes_ok ? json(*r.equal_sizes_ok) : json(nullptr)},
          {"satisfied", r.satisfied},
          {"failing_pairs", r.failing_pairs()},
          {"certificates_V", certs(r.certificates_V)},
          {"certificates_W", certs(r.certificates_W)}};
}

inline json to_json(const PseudorandomnessReport& r) {
  return {{"lower_bound", r.lower_bound},
          {"upper_bound", r.upper_bound},
          {"exact", r.exact},
          {"best_rectangle", {{"rows", r.best_rectangle.rows}, {"cols", r.best_rectangle.cols}}}};
}

inline json to_json(const DecompositionCheck& c) {
  return {{"additive", c.additive},
          {"str_template_dev", c.str_template_dev},
          {"psd_support", c.psd_support},
          {"psd_support_limit", c.psd_support_limit},
          {"err_in_z", c.err_in_z},
          {"z_ok", c.z_ok},
          {"err_str_inner", c.err_str_inner},
          {"err_abs_psd_inner", c.err_abs_psd_inner},
          {"psd_l1", c.psd_l1 ? json(*c.psd_l1) : json(nullptr)},
          {"all_ok", c.all_ok()}};
}

inline json to_json(const GeneratorSpec& s) {
  return {{"kind", to_string(s.kind)}, {"rows", s.rows},          {"cols", s.cols},
          {"seed", s.seed},            {"k", s.k},                {"gap", s.gap},
          {"x_size", s.x_size},        {"group_order", s.group_order}, {"g", s.g},
          {"h", s.h},                  {"row_blocks", s.row_blocks},   {"col_blocks", s.col_blocks},
          {"block_values", s.block_values}, {"noise", s.noise},   {"value_set", s.value_set},
          {"value", s.value}};
}

inline GeneratorSpec generator_spec_from_json(const json& j) {
  GeneratorSpec s;
  s.kind = parse_generator_kind(j.at("kind").get<std::string>());
  s.rows = j.at("rows").get<std::size_t>();
  s.cols = j.at("cols").get<std::size_t>();
  s.seed = j.at("seed").get<std::uint64_t>();
  s.k = j.at("k").get<std::size_t>();
  s.gap = j.at("gap").get<double>();
  s.x_size = j.at("x_size").get<std::size_t>();
  s.group_order = j.at("group_order").get<std::size_t>();
  s.g = j.at("g").get<std::vector<double>>();
  s.h = j.at("h").get<std::vector<double>>();
  s.row_blocks = j.at("row_blocks").get<std::size_t>();
  s.col_blocks = j.at("col_blocks").get<std::size_t>();
  s.block_values = j.at("block_values").get<std::vector<double>>();
  s.noise = j.at("noise").get<double>();
  s.value_set = j.at("value_set").get<std::vector<double>>();
  s.value = j.at("value").get<double>();
  return s;
}

}  // namespace stabreg::io
