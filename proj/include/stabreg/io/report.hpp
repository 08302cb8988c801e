#pragma once

// Report files. A report is
//   { schema_version, kind, matrix, options, result, outputs?, digest }
// where `result` (and any output matrices) is a deterministic function of
// the matrix and `options`. Replay therefore re-validates every certificate
// in the report, recomputes the result from the recorded options, and checks
// the digest over the canonical serialization of everything else.

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "stabreg/decomposition.hpp"
#include "stabreg/generators.hpp"
#include "stabreg/homogeneity.hpp"
#include "stabreg/io/csv.hpp"
#include "stabreg/io/json.hpp"
#include "stabreg/norms.hpp"
#include "stabreg/partition.hpp"
#include "stabreg/stability.hpp"

namespace stabreg::io {

inline constexpr int schema_version = 1;

// Outcome of a computation: the result object, any output matrices keyed by
// role, and whether the mathematical property asked about holds.
struct Computation {
  json result;
  std::vector<std::pair<std::string, ValueMatrix>> outputs;
  bool property_holds = true;
};

namespace detail {

inline std::string get_enum(const json& j, const char* key, std::initializer_list<const char*> allowed) {
  const auto v = j.at(key).get<std::string>();
  for (const char* a : allowed)
    if (v == a) return v;
  throw InputError(std::string("option '") + key + "' has unsupported value '" + v + "'");
}

inline IndexSet index_set_or_full(const json& j, std::size_t n) {
  return j.is_null() ? full_index_set(n) : j.get<IndexSet>();
}

inline PartitionBudget budget_from_json(const json& o) {
  PartitionBudget b;
  b.max_blocks = o.at("max_blocks").get<std::size_t>();
  b.max_rounds = o.at("max_rounds").get<std::size_t>();
  if (!o.at("min_block_frac").is_null()) b.min_block_frac = o.at("min_block_frac").get<double>();
  return b;
}

inline FindOptions find_options_from_json(const json& o, std::size_t threads) {
  FindOptions fo;
  fo.mode = get_enum(o, "mode", {"greedy_refine", "exhaustive"}) == "exhaustive" ? PartitionMode::exhaustive
                                                                               : PartitionMode::greedy_refine;
  fo.budget = budget_from_json(o);
  if (!o.at("radius").is_null()) fo.homog_radius = o.at("radius").get<double>();
  fo.gamma_scale = o.at("gamma_scale").get<double>();
  fo.threads = threads;
  return fo;
}

inline json decomposition_meta(const Decomposition& d) {
  return {{"variant", to_string(d.variant)},
          {"r_table", d.r_table},
          {"z_rows", d.z_rows},
          {"z_cols", d.z_cols},
          {"delta", d.delta},
          {"epsilon", d.epsilon},
          {"sigma_mn", d.sigma_mn},
          {"radius", d.radius},
          {"additivity_exact", d.additivity_exact},
          {"psd_l1_bound", d.psd_l1_bound ? json(*d.psd_l1_bound) : json(nullptr)},
          {"norms",
           {{"str_l1", norm(d.f_str, Norm::l1)},
            {"str_l2", norm(d.f_str, Norm::l2)},
            {"psd_l1", norm(d.f_psd, Norm::l1)},
            {"psd_l2", norm(d.f_psd, Norm::l2)},
            {"err_l1", norm(d.f_err, Norm::l1)},
            {"psd_support", support_size(d.f_psd)},
            {"err_support", support_size(d.f_err)}}}};
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Computations, one per report kind. Each reads only `options`.

inline Computation compute_stability(const ValueMatrix& f, const json& o) {
  StabilityOptions opt;
  const auto kinds = detail::get_enum(o, "kinds", {"plain", "star", "both"});
  opt.kinds = kinds == "plain" ? KindSelection::plain : kinds == "star" ? KindSelection::star : KindSelection::both;
  opt.search.mode = detail::get_enum(o, "mode", {"exact", "greedy"}) == "exact" ? SearchMode::exact : SearchMode::greedy;
  opt.search.distinct = o.at("distinct").get<bool>();
  opt.search.guard_cells = o.at("guard_cells").get<std::size_t>();
  opt.search.guard_k = o.at("guard_k").get<std::size_t>();
  opt.k_max = o.at("k_max").get<std::size_t>();
  const auto rep = stability_index(f, o.at("delta").get<double>(), opt);
  Computation c;
  c.result = to_json(rep);
  if (!o.at("k").is_null()) {
    const auto k = o.at("k").get<std::size_t>();
    // f is (k, delta)-stable iff no chain of length k exists.
    c.property_holds = rep.plain_index.value_or(0) < k && rep.star_index.value_or(0) < k;
    c.result["stable_at_k"] = c.property_holds;
  }
  return c;
}

inline Computation compute_homogeneity(const ValueMatrix& f, const json& o) {
  const IndexSet vs = detail::index_set_or_full(o.at("rows"), f.rows());
  const IndexSet ws = detail::index_set_or_full(o.at("cols"), f.cols());
  const auto w = check_homogeneous(f, vs, ws, o.at("delta").get<double>(), o.at("gamma").get<double>(),
                                   o.at("epsilon").get<double>());
  Computation c;
  c.property_holds = w.has_value();
  c.result = {{"homogeneous", w.has_value()}, {"witness", nullptr}, {"consequences", nullptr}};
  if (w) {
    const auto q = homogeneity_consequences(f, vs, ws, *w);
    c.result["witness"] = to_json(*w);
    c.result["consequences"] = {{"l1_dev_r", q.l1_dev_r}, {"l1_dev_s", q.l1_dev_s}, {"rs_gap", q.rs_gap},
                                {"dev_bound", q.dev_bound}, {"gap_bound", q.gap_bound},
                                {"bounds_hold", q.bounds_hold}};
  }
  return c;
}

inline Computation compute_partition(const ValueMatrix& f, const json& o, std::size_t threads) {
  const Params p = params_from_json(o.at("params"));
  const auto rep = find_partition(f, p, detail::find_options_from_json(o, threads));
  return {to_json(rep), {}, rep.satisfied};
}

inline Computation compute_equipartition(const ValueMatrix& f, const json& o, std::size_t threads) {
  const Params p = params_from_json(o.at("params"));
  EquipartitionOptions eo;
  eo.inner_budget = detail::budget_from_json(o);
  eo.threads = threads;
  const auto rep = equipartition(f, p, eo);
  json r = to_json(rep);
  r["inner_decay"] = to_json(equipartition_decay(p.decay, p.epsilon));
  return {std::move(r), {}, rep.satisfied};
}

inline Computation compute_decomposition(const ValueMatrix& f, const json& o, std::size_t threads) {
  const Params p = params_from_json(o.at("params"));
  const auto variant_name = detail::get_enum(o, "variant", {"standard", "fold_err", "perfect_str"});
  FindOptions fo = detail::find_options_from_json(o, threads);
  if (fo.gamma_scale != 0.5) throw InputError("decomposition needs gamma_scale 0.5");
  const auto rep = find_partition(f, p, fo);
  Computation c;
  c.result = {{"regularity", to_json(rep)}, {"decomposition", nullptr}, {"check", nullptr}};
  c.property_holds = rep.satisfied;
  if (!rep.satisfied) return c;
  Decomposition d = decompose(f, rep);
  if (variant_name == "fold_err") d = decompose_no_error(d, DecompositionVariant::fold_err);
  if (variant_name == "perfect_str") d = decompose_no_error(d, DecompositionVariant::perfect_str);
  const auto chk = check_decomposition(f, d);
  c.result["decomposition"] = detail::decomposition_meta(d);
  c.result["check"] = to_json(chk);
  c.outputs = {{"str", d.f_str}, {"psd", d.f_psd}, {"err", d.f_err}};
  return c;
}

inline Computation compute_pseudorandom(const ValueMatrix& f, const json& o, std::size_t threads) {
  PseudorandomOptions po;
  po.mode = detail::get_enum(o, "mode", {"exact", "bounds"}) == "exact" ? PseudorandomMode::exact
                                                                       : PseudorandomMode::bounds;
  po.exact_cap = o.at("exact_cap").get<std::size_t>();
  po.restarts = o.at("restarts").get<std::size_t>();
  po.max_iterations = o.at("max_iterations").get<std::size_t>();
  po.seed = o.at("seed").get<std::uint64_t>();
  po.threads = threads;
  const auto rep = pseudorandomness(f, po);
  Computation c;
  c.result = to_json(rep);
  c.result["l1_norm"] = norm(f, Norm::l1);
  if (!o.at("epsilon").is_null()) {
    const double eps = o.at("epsilon").get<double>();
    // Only a proven bound settles the question either way.
    c.property_holds = rep.upper_bound <= eps;
    c.result["pseudorandom_at_epsilon"] = c.property_holds;
  }
  return c;
}

inline Computation compute_generate(const json& o) {
  const ValueMatrix f = generate(generator_spec_from_json(o));
  Computation c;
  c.result = {{"rows", f.rows()}, {"cols", f.cols()}, {"range", to_string(f.range())}, {"hash", matrix_hash(f)}};
  c.outputs = {{"matrix", f}};
  return c;
}

inline Computation compute(const std::string& kind, const ValueMatrix* f, const json& options, std::size_t threads) {
  if (kind == "generate") return compute_generate(options);
  if (!f) throw InputError("report kind '" + kind + "' needs a matrix");
  if (kind == "stability") return compute_stability(*f, options);
  if (kind == "homogeneity") return compute_homogeneity(*f, options);
  if (kind == "partition") return compute_partition(*f, options, threads);
  if (kind == "equipartition") return compute_equipartition(*f, options, threads);
  if (kind == "decomposition") return compute_decomposition(*f, options, threads);
  if (kind == "pseudorandom") return compute_pseudorandom(*f, options, threads);
  throw InputError("unknown report kind '" + kind + "'");
}

// ---------------------------------------------------------------------------
// Documents

inline json matrix_ref(const ValueMatrix& f, const std::string& recorded_path) {
  return {{"path", recorded_path},
          {"hash", matrix_hash(f)},
          {"rows", f.rows()},
          {"cols", f.cols()},
          {"range", to_string(f.range())}};
}

// Path of `target` as seen from the directory holding `report_path`.
inline std::string path_from_report(const std::string& target, const std::string& report_path) {
  namespace fs = std::filesystem;
  const fs::path base = fs::absolute(fs::path(report_path)).parent_path();
  return fs::absolute(fs::path(target)).lexically_relative(base).generic_string();
}

inline std::string resolve_from_report(const std::string& recorded, const std::string& report_path) {
  namespace fs = std::filesystem;
  const fs::path p(recorded);
  if (p.is_absolute()) return recorded;
  return (fs::absolute(fs::path(report_path)).parent_path() / p).string();
}

inline std::string compute_digest(const json& doc) {
  json c = doc;
  c.erase("digest");
  return "fnv1a64:" + hex64(fnv1a64(c.dump()));
}

inline void seal(json& doc) { doc["digest"] = compute_digest(doc); }

inline json make_document(const std::string& kind, json matrix, json options, json result, json outputs) {
  json doc = {{"schema_version", schema_version},
              {"kind", kind},
              {"matrix", std::move(matrix)},
              {"options", std::move(options)},
              {"result", std::move(result)},
              {"outputs", std::move(outputs)}};
  seal(doc);
  return doc;
}

inline std::string dump_document(const json& doc) { return doc.dump(2) + "\n"; }

// ---------------------------------------------------------------------------
// Replay

struct ReplayResult {
  std::vector<std::string> failures;
  bool ok() const { return failures.empty(); }
};

namespace detail {

inline void check_regularity_certificates(const ValueMatrix& f, const json& r, const std::string& where,
                                          ReplayResult& out) {
  const Partition pv = partition_from_json(r.at("partition_V"));
  const Partition pw = partition_from_json(r.at("partition_W"));
  if (pv.ground_size != f.rows() || pw.ground_size != f.cols()) {
    out.failures.push_back(where + "partitions do not match the matrix shape");
    return;
  }
  const double radius = r.at("homog_radius").get<double>();
  const double g = r.at("pair_gamma").get<double>();
  const auto& pairs = r.at("pair_results");
  if (pairs.size() != pv.block_count()) {
    out.failures.push_back(where + "pair table has the wrong number of rows");
    return;
  }
  for (std::size_t i = 0; i < pv.block_count(); ++i) {
    if (pairs[i].size() != pw.block_count()) {
      out.failures.push_back(where + "pair table row " + std::to_string(i + 1) + " has the wrong length");
      continue;
    }
    for (std::size_t j = 0; j < pw.block_count(); ++j) {
      if (pairs[i][j].is_null()) continue;
      const std::string name = where + "pair (" + std::to_string(i + 1) + "," + std::to_string(j + 1) + ") witness";
      try {
        const auto w = homogeneity_from_json(pairs[i][j]);
        if (w.delta != radius || w.gamma != g || w.epsilon != g)
          out.failures.push_back(name + " has parameters differing from the report");
        else if (!validate_homogeneity_witness(f, pv.blocks[i], pw.blocks[j], w))
          out.failures.push_back(name + " fails to validate");
      } catch (const std::exception& e) {
        out.failures.push_back(name + " is malformed: " + e.what());
      }
    }
  }
  auto certs = [&](const char* key, const Partition& p, const char* side) {
    const auto& cs = r.at(key);
    if (cs.size() != p.block_count()) {
      out.failures.push_back(where + key + " has the wrong length");
      return;
    }
    for (std::size_t i = 0; i < cs.size(); ++i) {
      if (cs[i].is_null()) continue;
      const std::string name = where + "definable certificate for " + side + " block " + std::to_string(i + 1);
      try {
        IndexSet block = p.blocks[i];
        std::sort(block.begin(), block.end());
        if (evaluate_set(definable_from_json(cs[i]), f) != block) out.failures.push_back(name + " does not evaluate to the block");
      } catch (const std::exception& e) {
        out.failures.push_back(name + " is malformed: " + e.what());
      }
    }
  };
  certs("certificates_V", pv, "V");
  certs("certificates_W", pw, "W");
}

inline void check_certificates(const std::string& kind, const ValueMatrix* f, const json& doc,
                               const std::string& report_path, ReplayResult& out) {
  const json& r = doc.at("result");
  if (kind == "stability") {
    for (const char* which : {"plain", "star"}) {
      const auto& w = r.at(std::string(which) + "_witness");
      const auto& idx = r.at(std::string(which) + "_index");
      if (w.is_null()) continue;
      try {
        const auto hw = half_graph_from_json(w);
        if (!validate_witness(*f, hw)) out.failures.push_back(std::string(which) + " witness fails to validate");
        if (hw.kind == WitnessKind::star) {
          HalfGraphWitness as_plain = hw;
          as_plain.kind = WitnessKind::plain;
          if (!validate_witness(*f, as_plain)) out.failures.push_back("star witness fails as a plain witness");
        }
        if (idx.is_null() || idx.get<std::size_t>() != hw.length())
          out.failures.push_back(std::string(which) + "_index does not match the witness length");
      } catch (const std::exception& e) {
        out.failures.push_back(std::string(which) + " witness is malformed: " + e.what());
      }
    }
  } else if (kind == "homogeneity") {
    if (!r.at("witness").is_null()) {
      const auto& o = doc.at("options");
      try {
        const auto w = homogeneity_from_json(r.at("witness"));
        if (!validate_homogeneity_witness(*f, index_set_or_full(o.at("rows"), f->rows()),
                                          index_set_or_full(o.at("cols"), f->cols()), w))
          out.failures.push_back("homogeneity witness fails to validate");
      } catch (const std::exception& e) {
        out.failures.push_back(std::string("homogeneity witness is malformed: ") + e.what());
      }
    }
  } else if (kind == "partition" || kind == "equipartition") {
    check_regularity_certificates(*f, r, "", out);
  } else if (kind == "decomposition") {
    check_regularity_certificates(*f, r.at("regularity"), "regularity: ", out);
    if (r.at("decomposition").is_null()) return;
    // The written parts must satisfy every invariant on their own.
    std::vector<ValueMatrix> parts;
    for (const char* role : {"str", "psd", "err"}) {
      const auto& ref = doc.at("outputs").at(role);
      const ValueMatrix m = read_matrix(resolve_from_report(ref.at("path").get<std::string>(), report_path));
      if (matrix_hash(m) != ref.at("hash").get<std::string>())
        out.failures.push_back(std::string(role) + " matrix file does not match its recorded hash");
      parts.push_back(m);
    }
    const auto& meta = r.at("decomposition");
    const auto& reg = r.at("regularity");
    const Partition pv = partition_from_json(reg.at("partition_V"));
    const Partition pw = partition_from_json(reg.at("partition_W"));
    const auto rt = meta.at("r_table").get<std::vector<std::vector<double>>>();
    const auto lv = pv.labels(), lw = pw.labels();
    if (rt.size() != pv.block_count()) {
      out.failures.push_back("r_table has the wrong shape");
      return;
    }
    for (const auto& row : rt)
      if (row.size() != pw.block_count()) {
        out.failures.push_back("r_table has the wrong shape");
        return;
      }
    std::vector<double> t(f->size(), 0.0);
    for (Index a = 0; a < f->rows(); ++a)
      for (Index b = 0; b < f->cols(); ++b)
        if (lv[a] && lw[b]) t[a * f->cols() + b] = rt[lv[a] - 1][lw[b] - 1];
    const auto variant_name = meta.at("variant").get<std::string>();
    Decomposition d{parts[0], parts[1], parts[2], ValueMatrix(f->rows(), f->cols(), std::move(t)), rt, pv, pw,
                    meta.at("z_rows").get<IndexSet>(), meta.at("z_cols").get<IndexSet>()};
    d.delta = meta.at("delta").get<double>();
    d.epsilon = meta.at("epsilon").get<double>();
    d.sigma_mn = meta.at("sigma_mn").get<double>();
    d.radius = meta.at("radius").get<double>();
    d.variant = variant_name == "fold_err"      ? DecompositionVariant::fold_err
                : variant_name == "perfect_str" ? DecompositionVariant::perfect_str
                                                : DecompositionVariant::standard;
    d.additivity_exact = meta.at("additivity_exact").get<bool>();
    if (!meta.at("psd_l1_bound").is_null()) d.psd_l1_bound = meta.at("psd_l1_bound").get<double>();
    if (d.z_rows != pv.exceptional || d.z_cols != pw.exceptional)
      out.failures.push_back("decomposition Z does not match the exceptional blocks");
    const auto chk = check_decomposition(*f, d);
    if (!chk.structural_ok()) out.failures.push_back("decomposition invariants fail on the written parts");
    if (d.additivity_exact && !chk.additive) out.failures.push_back("written parts do not sum to f");
  } else if (kind == "pseudorandom") {
    const auto& rect = r.at("best_rectangle");
    const double v = rectangle_correlation(*f, rect.at("rows").get<IndexSet>(), rect.at("cols").get<IndexSet>());
    if (v != r.at("lower_bound").get<double>())
      out.failures.push_back("best rectangle correlation does not equal lower_bound");
    if (!(r.at("lower_bound").get<double>() <= r.at("upper_bound").get<double>()))
      out.failures.push_back("lower_bound exceeds upper_bound");
  }
}

}  // namespace detail

// Replays the report stored at report_path. Problems with the report are
// collected as failures; an unreadable report file raises InputError.
inline ReplayResult replay(const std::string& report_path, std::size_t threads = 1) {
  ReplayResult out;
  json doc;
  try {
    doc = json::parse(read_file(report_path));
  } catch (const json::exception& e) {
    throw InputError("report is not valid JSON: " + std::string(e.what()));
  }
  try {
    if (!doc.is_object()) throw InputError("report is not a JSON object");
    if (doc.at("schema_version") != schema_version) {
      out.failures.push_back("unsupported schema_version");
      return out;
    }
    if (doc.at("digest").get<std::string>() != compute_digest(doc))
      out.failures.push_back("report digest does not match its contents");
    const auto kind = doc.at("kind").get<std::string>();

    std::optional<ValueMatrix> f;
    const auto& mref = doc.at("matrix");
    if (kind != "generate") {
      const std::string path = resolve_from_report(mref.at("path").get<std::string>(), report_path);
      f = read_matrix(path);
      if (matrix_hash(*f) != mref.at("hash").get<std::string>()) {
        out.failures.push_back("matrix file does not match its recorded hash");
        return out;
      }
      if (mref != matrix_ref(*f, mref.at("path").get<std::string>()))
        out.failures.push_back("matrix reference fields do not match the matrix");
    }

    detail::check_certificates(kind, f ? &*f : nullptr, doc, report_path, out);

    const Computation c = compute(kind, f ? &*f : nullptr, doc.at("options"), threads);
    if (c.result != doc.at("result")) out.failures.push_back("result differs from recomputation");
    const auto& outs = doc.at("outputs");
    std::size_t expected = 0;
    for (const auto& [role, m] : c.outputs) {
      if (!outs.contains(role)) {
        out.failures.push_back("output '" + role + "' missing from report");
        continue;
      }
      ++expected;
      const auto& ref = outs.at(role);
      if (ref.at("hash").get<std::string>() != matrix_hash(m))
        out.failures.push_back("output '" + role + "' differs from recomputation");
      const ValueMatrix disk = read_matrix(resolve_from_report(ref.at("path").get<std::string>(), report_path));
      if (matrix_hash(disk) != ref.at("hash").get<std::string>())
        out.failures.push_back("output file for '" + role + "' does not match its recorded hash");
      if (kind == "generate" && mref != matrix_ref(disk, mref.at("path").get<std::string>()))
        out.failures.push_back("matrix reference fields do not match the generated matrix");
    }
    if (outs.size() != expected) out.failures.push_back("report lists unexpected outputs");
  } catch (const CapabilityError& e) {
    out.failures.push_back(std::string("recomputation exceeded a guard: ") + e.what());
  } catch (const std::exception& e) {
    out.failures.push_back(std::string("malformed report: ") + e.what());
  }
  return out;
}

}  // namespace stabreg::io
