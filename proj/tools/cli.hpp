#pragma once

// Command-line front end. Exit codes: 0 success or verified, 1 property not
// satisfied, 2 input error, 3 guard exceeded.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "stabreg/detail/parallel.hpp"
#include "stabreg/io/report.hpp"

namespace stabreg::cli {

using io::json;

enum ExitCode : int { ok = 0, not_satisfied = 1, input_error = 2, capability_error = 3 };

namespace detail {

struct Flags {
  std::string matrix;
  std::string out;
  std::string config;
  std::size_t threads = stabreg::detail::default_threads();

  // shared analysis parameters
  double delta = 0.1;
  double epsilon = 0.1;
  double gamma = 0.1;
  std::size_t k = 2;
  std::string sigma = "const:0.1";
  std::string mode;
  std::size_t budget_blocks = 16;
  std::size_t budget_rounds = 32;
  double budget_min_frac = 0.0;
  double radius = 0.0;
  double gamma_scale = 1.0;
  std::uint64_t seed = 0;

  // stability
  std::string kinds = "both";
  bool distinct = false;
  std::size_t k_max = 0;
  std::size_t guard_cells = 400;
  std::size_t guard_k = 6;

  // homogeneity
  std::vector<std::size_t> rows;
  std::vector<std::size_t> cols;

  // decompose
  std::string variant = "standard";

  // pseudorandom
  std::size_t exact_cap = 20;
  std::size_t restarts = 16;
  std::size_t iterations = 64;

  // generate
  std::string kind;
  std::size_t gen_rows = 0, gen_cols = 0, x_size = 0, group_order = 0, row_blocks = 1, col_blocks = 1;
  double gap = 0.0, noise = 0.0, value = 0.0;
  std::vector<double> values;
};

inline std::string default_report_path(const std::string& matrix, const std::string& command) {
  std::filesystem::path p(matrix);
  p.replace_extension();
  return p.string() + "." + command + ".json";
}

inline std::string sibling_path(const std::string& report, const std::string& suffix) {
  std::filesystem::path p(report);
  p.replace_extension();
  return p.string() + suffix;
}

inline json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  try {
    json j = json::parse(io::read_file(path));
    if (!j.is_object()) throw InputError("config '" + path + "' must hold a JSON object");
    return j;
  } catch (const json::exception& e) {
    throw InputError("config '" + path + "' is not valid JSON: " + std::string(e.what()));
  }
}

inline std::string fmt(double v) { return io::format_double(v); }

}  // namespace detail

class Runner {
 public:
  Runner(std::ostream& out, std::ostream& err) : out_(out), err_(err) {}

  int run(const std::vector<std::string>& args) {
    CLI::App app{"Stability, homogeneity and regularity analysis of matrices", "stabreg"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Show help for every subcommand");

    auto add_common = [&](CLI::App* s) {
      s->add_option("--threads", f_.threads, "Worker threads")->check(CLI::PositiveNumber);
      s->add_option("--out", f_.out, "Report path");
    };
    auto add_matrix = [&](CLI::App* s) { s->add_option("matrix", f_.matrix, "Matrix CSV file")->required(); };
    auto add_params = [&](CLI::App* s) {
      s->add_option("--delta", f_.delta, "Homogeneity tolerance delta");
      s->add_option("--epsilon", f_.epsilon, "Exceptional-set and row fraction epsilon");
      s->add_option("--gamma", f_.gamma, "Column fraction gamma");
      s->add_option("--k", f_.k, "Stability length k");
      s->add_option("--sigma", f_.sigma, "Decay function kind:c with kind in const, inv, invsq, exp");
      s->add_option("--config", f_.config, "JSON file with a params object (table decays go here)");
    };
    auto add_budget = [&](CLI::App* s) {
      s->add_option("--budget-blocks", f_.budget_blocks, "Maximum blocks per side");
      s->add_option("--budget-rounds", f_.budget_rounds, "Maximum refinement rounds");
      s->add_option("--budget-min-frac", f_.budget_min_frac, "Drop blocks smaller than this fraction of the side");
    };
    auto add_search = [&](CLI::App* s) {
      s->add_option("--mode", f_.mode, "greedy_refine or exhaustive");
      s->add_option("--radius", f_.radius, "Homogeneity radius (default 5 delta + epsilon)");
      add_budget(s);
    };

    auto* gen = app.add_subcommand("generate", "Write a generated matrix");
    gen->add_option("--kind", f_.kind, "Generator kind");
    gen->add_option("--k", f_.k, "Half graph size");
    gen->add_option("--rows", f_.gen_rows, "Rows");
    gen->add_option("--cols", f_.gen_cols, "Columns");
    gen->add_option("--seed", f_.seed, "Seed");
    gen->add_option("--gap", f_.gap, "Fuzzy half graph gap, or discrete_stable delta");
    gen->add_option("--x-size", f_.x_size, "inner_product |X|");
    gen->add_option("--group-order", f_.group_order, "cyclic_convolution group order");
    gen->add_option("--row-blocks", f_.row_blocks, "Row blocks");
    gen->add_option("--col-blocks", f_.col_blocks, "Column blocks");
    gen->add_option("--noise", f_.noise, "planted_blocks flip rate");
    gen->add_option("--values", f_.values, "Block values (planted_blocks) or value set (discrete_stable)")
        ->delimiter(',');
    gen->add_option("--value", f_.value, "constant value");
    gen->add_option("--config", f_.config, "JSON generator spec");
    gen->add_option("--out", f_.out, "Matrix CSV path")->required();
    gen->add_option("--report", report_, "Report path (default: next to the matrix)");

    auto* stab = app.add_subcommand("stability", "Stability indices and half-graph witnesses");
    add_matrix(stab);
    add_common(stab);
    stab->add_option("--delta", f_.delta, "Threshold delta")->required();
    stab->add_option("--kinds", f_.kinds, "plain, star or both")->check(CLI::IsMember({"plain", "star", "both"}));
    stab->add_option("--mode", f_.mode, "exact or greedy");
    stab->add_flag("--distinct", f_.distinct, "Require pairwise distinct chain elements");
    stab->add_option("--k", k_opt_, "Report (k, delta)-stability; exit 1 if a length-k chain exists");
    stab->add_option("--k-max", f_.k_max, "Stop searching at this length (0: no limit)");
    stab->add_option("--guard-cells", f_.guard_cells, "Exact search allowed when |V||W| is at most this");
    stab->add_option("--guard-k", f_.guard_k, "... or when the target length is at most this");

    auto* hom = app.add_subcommand("homogeneity", "Check one block pair for homogeneity");
    add_matrix(hom);
    add_common(hom);
    hom->add_option("--delta", f_.delta, "Tolerance delta")->required();
    hom->add_option("--gamma", f_.gamma, "Column fraction gamma")->required();
    hom->add_option("--epsilon", f_.epsilon, "Row fraction epsilon")->required();
    hom->add_option("--rows", f_.rows, "Row block (default: all rows)")->delimiter(',');
    hom->add_option("--cols", f_.cols, "Column block (default: all columns)")->delimiter(',');

    auto* part = app.add_subcommand("partition", "Find a regular partition pair");
    add_matrix(part);
    add_common(part);
    add_params(part);
    add_search(part);
    part->add_option("--gamma-scale", f_.gamma_scale, "Pairs are checked at gamma_scale * sigma(mn)");

    auto* eq = app.add_subcommand("equipartition", "Find a regular equipartition pair");
    add_matrix(eq);
    add_common(eq);
    add_params(eq);
    add_budget(eq);

    auto* dec = app.add_subcommand("decompose", "Structured, pseudorandom and error decomposition");
    add_matrix(dec);
    add_common(dec);
    add_params(dec);
    add_search(dec);
    dec->add_option("--variant", f_.variant, "standard, fold_err or perfect_str")
        ->check(CLI::IsMember({"standard", "fold_err", "perfect_str"}));

    auto* pr = app.add_subcommand("pseudorandom", "Maximum rectangle correlation");
    add_matrix(pr);
    add_common(pr);
    pr->add_option("--mode", f_.mode, "exact or bounds");
    pr->add_option("--exact-cap", f_.exact_cap, "Exact mode needs min(|V|,|W|) at most this");
    pr->add_option("--restarts", f_.restarts, "Bounds mode restarts");
    pr->add_option("--iterations", f_.iterations, "Bounds mode ascent rounds per restart");
    pr->add_option("--seed", f_.seed, "Bounds mode seed");
    pr->add_option("--epsilon", eps_opt_, "Report epsilon-pseudorandomness; exit 1 unless proven");

    auto* ver = app.add_subcommand("verify", "Replay a report and re-validate its certificates");
    ver->add_option("report", f_.matrix, "Report JSON file")->required();
    ver->add_option("--threads", f_.threads, "Worker threads")->check(CLI::PositiveNumber);

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
      app.parse(rev);
    } catch (const CLI::ParseError& e) {
      const int code = app.exit(e, out_, err_);
      return code == 0 ? ok : input_error;
    }

    try {
      if (gen->parsed()) return run_generate(gen);
      if (stab->parsed()) return run_stability(stab);
      if (hom->parsed()) return run_homogeneity(hom);
      if (part->parsed()) return run_params_command("partition", part);
      if (eq->parsed()) return run_params_command("equipartition", eq);
      if (dec->parsed()) return run_params_command("decomposition", dec);
      if (pr->parsed()) return run_pseudorandom(pr);
      if (ver->parsed()) return run_verify();
    } catch (const CapabilityError& e) {
      err_ << "capability error: " << e.what() << "\n";
      return capability_error;
    } catch (const InputError& e) {
      err_ << "input error: " << e.what() << "\n";
      return input_error;
    } catch (const PreconditionError& e) {
      err_ << "precondition error: " << e.what() << "\n";
      return input_error;
    } catch (const json::exception& e) {
      err_ << "input error: " << e.what() << "\n";
      return input_error;
    }
    return input_error;
  }

 private:
  static bool given(CLI::App* s, const char* name) { return s->count(name) > 0; }

  ValueMatrix load_matrix() { return io::read_matrix(f_.matrix); }

  json params_json(CLI::App* s) {
    json p = detail::load_config(f_.config);
    if (p.contains("params")) p = p.at("params");
    auto set = [&](const char* flag, const char* key, json v) {
      if (given(s, flag) || !p.contains(key)) p[key] = std::move(v);
    };
    set("--delta", "delta", f_.delta);
    set("--epsilon", "epsilon", f_.epsilon);
    set("--gamma", "gamma", f_.gamma);
    set("--k", "k", f_.k);
    if (given(s, "--sigma") || !p.contains("decay")) p["decay"] = io::to_json(DecayFn::parse(f_.sigma));
    io::params_from_json(p);
    return p;
  }

  json budget_json(CLI::App* s) {
    return {{"max_blocks", f_.budget_blocks},
            {"max_rounds", f_.budget_rounds},
            {"min_block_frac", given(s, "--budget-min-frac") ? json(f_.budget_min_frac) : json(nullptr)}};
  }

  std::string mode_or(const std::string& fallback) const { return f_.mode.empty() ? fallback : f_.mode; }

  // Computes, writes outputs and the sealed report, and prints a summary.
  int finish(const std::string& kind, const ValueMatrix& f, const json& options, const std::string& report_path) {
    const io::Computation c = io::compute(kind, &f, options, f_.threads);
    json outputs = json::object();
    for (const auto& [role, m] : c.outputs) {
      const std::string path = detail::sibling_path(report_path, "." + role + ".csv");
      io::write_matrix(path, m);
      outputs[role] = {{"path", io::path_from_report(path, report_path)}, {"hash", io::matrix_hash(m)}};
    }
    const json doc = io::make_document(kind, io::matrix_ref(f, io::path_from_report(f_.matrix, report_path)),
                                       options, c.result, outputs);
    io::write_file(report_path, io::dump_document(doc));
    summarize(kind, c.result);
    for (const auto& [role, ref] : outputs.items()) out_ << role << " matrix: " << ref.at("path").get<std::string>() << "\n";
    out_ << "report: " << report_path << "\n";
    return c.property_holds ? ok : not_satisfied;
  }

  int run_generate(CLI::App* s) {
    json spec = io::to_json(GeneratorSpec{});
    const json cfg = detail::load_config(f_.config);
    for (const auto& [key, v] : cfg.items()) {
      if (!spec.contains(key)) throw InputError("unknown generator spec field '" + key + "'");
      spec[key] = v;
    }
    auto set = [&](const char* flag, const char* key, json v) {
      if (given(s, flag)) spec[key] = std::move(v);
    };
    set("--kind", "kind", f_.kind);
    set("--k", "k", f_.k);
    set("--rows", "rows", f_.gen_rows);
    set("--cols", "cols", f_.gen_cols);
    set("--seed", "seed", f_.seed);
    set("--gap", "gap", f_.gap);
    set("--x-size", "x_size", f_.x_size);
    set("--group-order", "group_order", f_.group_order);
    set("--row-blocks", "row_blocks", f_.row_blocks);
    set("--col-blocks", "col_blocks", f_.col_blocks);
    set("--noise", "noise", f_.noise);
    set("--value", "value", f_.value);
    if (given(s, "--values"))
      spec[spec.at("kind") == "discrete_stable" ? "value_set" : "block_values"] = f_.values;
    const GeneratorSpec gs = io::generator_spec_from_json(spec);
    spec = io::to_json(gs);

    const io::Computation c = io::compute("generate", nullptr, spec, f_.threads);
    const ValueMatrix& m = c.outputs.front().second;
    io::write_matrix(f_.out, m);
    const std::string report_path = report_.empty() ? detail::sibling_path(f_.out, ".json") : report_;
    const std::string rel = io::path_from_report(f_.out, report_path);
    const json outputs = {{"matrix", {{"path", rel}, {"hash", io::matrix_hash(m)}}}};
    io::write_file(report_path, io::dump_document(io::make_document("generate", io::matrix_ref(m, rel), spec,
                                                                     c.result, outputs)));
    out_ << "generated " << to_string(gs.kind) << " " << m.rows() << "x" << m.cols() << " (" << to_string(m.range())
         << ") -> " << f_.out << "\n";
    out_ << "hash: " << io::matrix_hash(m) << "\n";
    out_ << "report: " << report_path << "\n";
    return ok;
  }

  int run_stability(CLI::App*) {
    const ValueMatrix f = load_matrix();
    const json o = {{"delta", f_.delta},
                    {"kinds", f_.kinds},
                    {"mode", mode_or("exact")},
                    {"distinct", f_.distinct},
                    {"k_max", f_.k_max},
                    {"guard_cells", f_.guard_cells},
                    {"guard_k", f_.guard_k},
                    {"k", k_opt_ ? json(*k_opt_) : json(nullptr)}};
    return finish("stability", f, o, report_path("stability"));
  }

  int run_homogeneity(CLI::App* s) {
    const ValueMatrix f = load_matrix();
    const json o = {{"rows", given(s, "--rows") ? json(f_.rows) : json(nullptr)},
                    {"cols", given(s, "--cols") ? json(f_.cols) : json(nullptr)},
                    {"delta", f_.delta},
                    {"gamma", f_.gamma},
                    {"epsilon", f_.epsilon}};
    return finish("homogeneity", f, o, report_path("homogeneity"));
  }

  int run_params_command(const std::string& kind, CLI::App* s) {
    const ValueMatrix f = load_matrix();
    json o = budget_json(s);
    o["params"] = params_json(s);
    if (kind != "equipartition") {
      std::string mode = mode_or("greedy_refine");
      if (mode == "greedy") mode = "greedy_refine";
      o["mode"] = mode;
      o["radius"] = given(s, "--radius") ? json(f_.radius) : json(nullptr);
      o["gamma_scale"] = kind == "decomposition" ? 0.5 : f_.gamma_scale;
    }
    if (kind == "decomposition") o["variant"] = f_.variant;
    return finish(kind, f, o, report_path(kind == "decomposition" ? "decompose" : kind));
  }

  int run_pseudorandom(CLI::App*) {
    const ValueMatrix f = load_matrix();
    const json o = {{"mode", mode_or("exact")},
                    {"exact_cap", f_.exact_cap},
                    {"restarts", f_.restarts},
                    {"max_iterations", f_.iterations},
                    {"seed", f_.seed},
                    {"epsilon", eps_opt_ ? json(*eps_opt_) : json(nullptr)}};
    return finish("pseudorandom", f, o, report_path("pseudorandom"));
  }

  int run_verify() {
    const io::ReplayResult r = io::replay(f_.matrix, f_.threads);
    if (r.ok()) {
      out_ << "verified: " << f_.matrix << "\n";
      return ok;
    }
    for (const auto& msg : r.failures) out_ << "FAILED: " << msg << "\n";
    return not_satisfied;
  }

  std::string report_path(const std::string& command) const {
    return f_.out.empty() ? detail::default_report_path(f_.matrix, command) : f_.out;
  }

  void summarize(const std::string& kind, const json& r) {
    auto show = [&](const json& v) { return v.is_null() ? std::string("none") : v.is_number_float() ? detail::fmt(v.get<double>()) : v.dump(); };
    if (kind == "stability") {
      out_ << "plain_index: " << show(r.at("plain_index")) << "\n";
      out_ << "star_index: " << show(r.at("star_index")) << "\n";
      out_ << "exact: " << show(r.at("exact")) << "\n";
      if (r.contains("stable_at_k")) out_ << "stable at k: " << show(r.at("stable_at_k")) << "\n";
    } else if (kind == "homogeneity") {
      out_ << "homogeneous: " << show(r.at("homogeneous")) << "\n";
      if (!r.at("witness").is_null()) {
        const auto& w = r.at("witness");
        out_ << "r = " << show(w.at("r")) << ", s = " << show(w.at("s")) << ", |V'| = " << show(w.at("v_prime_size"))
             << ", |W'| = " << show(w.at("w_prime_size")) << "\n";
      }
    } else if (kind == "partition" || kind == "equipartition" || kind == "decomposition") {
      const json& reg = kind == "decomposition" ? r.at("regularity") : r;
      out_ << "satisfied: " << show(reg.at("satisfied")) << "\n";
      out_ << "blocks: " << reg.at("partition_V").at("blocks").size() << " x "
           << reg.at("partition_W").at("blocks").size() << ", exceptional " << reg.at("partition_V").at("exceptional").size()
           << " + " << reg.at("partition_W").at("exceptional").size() << "\n";
      out_ << "pair gamma: " << show(reg.at("pair_gamma")) << ", radius: " << show(reg.at("homog_radius")) << "\n";
      if (reg.at("failing_pairs").get<std::size_t>() > 0) out_ << "failing pairs: " << show(reg.at("failing_pairs")) << "\n";
      if (kind == "decomposition" && !r.at("check").is_null()) {
        const auto& c = r.at("check");
        out_ << "invariants hold: " << show(c.at("all_ok")) << ", psd support " << show(c.at("psd_support"))
             << " (limit " << show(c.at("psd_support_limit")) << ")\n";
      }
    } else if (kind == "pseudorandom") {
      out_ << "max rectangle correlation in [" << show(r.at("lower_bound")) << ", " << show(r.at("upper_bound"))
           << "], exact: " << show(r.at("exact")) << "\n";
      if (r.contains("pseudorandom_at_epsilon")) out_ << "pseudorandom at epsilon: " << show(r.at("pseudorandom_at_epsilon")) << "\n";
    }
  }

  std::ostream& out_;
  std::ostream& err_;
  detail::Flags f_;
  std::string report_;
  std::optional<std::size_t> k_opt_;
  std::optional<double> eps_opt_;
};

inline int run(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  return Runner(out, err).run(args);
}

}  // namespace stabreg::cli
