#include "mplace/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <json.hpp>
#include <ostream>

#include "mplace/cascade.hpp"
#include "mplace/generator.hpp"
#include "mplace/global_placer.hpp"
#include "mplace/io.hpp"
#include "mplace/legality.hpp"
#include "mplace/legalizer.hpp"
#include "mplace/scorer.hpp"
#include "mplace/wirelength.hpp"

namespace mplace {
namespace {

using json = nlohmann::json;

constexpr int kExitViolations = 4;

struct Inputs {
  std::string layout, design, placement;
};

struct Loaded {
  FpgaLayout layout;
  Design design;
};

Loaded load(const Inputs& in) {
  FpgaLayout layout = parse_layout(read_file(in.layout));
  Design design = parse_design(read_file(in.design), layout);
  return {std::move(layout), std::move(design)};
}

void apply_config(const json& cfg, GpConfig& gp, LegalizeOptions& lg) {
  if (!cfg.is_object()) throw ValidationError("config must be a JSON object");
  for (const auto& [key, value] : cfg.items()) {
    if (key == "max_iters") gp.max_iters = value.get<int>();
    else if (key == "ovfl_stop_nonmacro") gp.ovfl_stop_nonmacro = value.get<double>();
    else if (key == "ovfl_stop_macro") gp.ovfl_stop_macro = value.get<double>();
    else if (key == "lambda_growth") gp.lambda_growth = value.get<double>();
    else if (key == "checkpoint_every") gp.checkpoint_every = value.get<int>();
    else if (key == "divergence_window") gp.divergence_window = value.get<int>();
    else if (key == "divergence_factor") gp.divergence_factor = value.get<double>();
    else if (key == "candidates") lg.candidates = value.get<int>();
    else throw ValidationError("unknown config key '" + key + "'");
  }
  if (lg.candidates < 1) throw ValidationError("candidates must be positive");
  gp.validate();
}

std::string legality_text(const LegalityReport& rep) {
  std::string s;
  for (const auto& v : rep.violations) s += std::string(to_string(v.kind)) + ": " + v.message + "\n";
  s += "violations " + std::to_string(rep.violations.size()) + "\n";
  return s;
}

// Maps library exceptions onto exit codes; everything else is an error with a message.
template <typename F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const InfeasibleError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }
}

struct PlaceArgs {
  Inputs in;
  std::string out, config, trace, plot;
  std::uint64_t seed = 1;
};

int cmd_place(const PlaceArgs& a, std::ostream& out, std::ostream& err) {
  const auto start = std::chrono::steady_clock::now();
  json manifest = {{"inputs", {{"layout", a.in.layout}, {"design", a.in.design}, {"config", a.config}}},
                   {"seed", a.seed},
                   {"config_overrides", json::object()},
                   {"outputs", {{"placement", a.out}, {"trace", a.trace}, {"plot", a.plot}}}};
  const int code = guarded(err, [&] {
    Loaded d = load(a.in);
    GpConfig gp;
    LegalizeOptions lg;
    if (!a.config.empty()) {
      manifest["config_overrides"] = json::parse(read_file(a.config));
      apply_config(manifest["config_overrides"], gp, lg);
    }
    gp.seed = a.seed;

    const MergeResult merged = merge_cascades(d.design, d.layout);
    const GpResult res = run_global_placement(d.layout, merged.design, gp);
    manifest["gp"] = {{"iterations", res.trace.records.size()},
                      {"converged", res.trace.converged},
                      {"rolled_back", res.trace.rolled_back}};
    if (!a.trace.empty()) write_file_atomic(a.trace, res.trace.to_csv());

    const LegalizeResult legal = legalize(d.layout, merged.design, res.state.positions, lg);
    const Placement placement = expand_placement(merged, Placement{legal.positions, legal.legal});
    const LegalityReport rep = check_legality(d.layout, d.design, placement);
    if (!rep.legal()) {
      err << legality_text(rep);
      throw std::runtime_error("legalized placement failed the legality check");
    }
    write_file_atomic(a.out, write_placement(d.design, placement));
    if (!a.plot.empty()) write_file_atomic(a.plot, write_svg(d.layout, d.design, placement));
    out << "placed " << d.design.instances.size() << " instances, hpwl "
        << format_number(hpwl(d.design, placement.positions).total) << '\n';
    return res.trace.rolled_back ? kExitRolledBack : kExitOk;
  });
  const double minutes = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() / 60.0;
  manifest["t_mp"] = std::round(minutes * 1000.0) / 1000.0;
  manifest["exit_status"] = code;
  try {
    write_file_atomic(a.out + ".manifest.json", manifest.dump(2) + "\n");
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return code == kExitOk ? kExitError : code;
  }
  return code;
}

struct LegalizeArgs {
  Inputs in;
  std::string out, report;
  int candidates = kDefaultCandidates;
};

int cmd_legalize(const LegalizeArgs& a, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    Loaded d = load(a.in);
    const Placement gp = parse_placement(read_file(a.in.placement), d.design);
    const MergeResult merged = merge_cascades(d.design, d.layout);
    const LegalizeResult legal =
        legalize(d.layout, merged.design, collapse_positions(merged, gp.positions), LegalizeOptions{a.candidates});
    write_file_atomic(a.out, write_placement(d.design, expand_placement(merged, Placement{legal.positions, legal.legal})));
    if (!a.report.empty()) write_file_atomic(a.report, write_legalization_report(merged.design, legal));
    out << "legalized " << legal.assignments.size() << " macros, cost " << format_number(legal.total_cost) << '\n';
    return kExitOk;
  });
}

int cmd_check(const Inputs& in, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    Loaded d = load(in);
    const Placement p = parse_placement(read_file(in.placement), d.design);
    const LegalityReport rep = check_legality(d.layout, d.design, p);
    out << legality_text(rep);
    return rep.legal() ? kExitOk : kExitViolations;
  });
}

int cmd_eval(const Inputs& in, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    Loaded d = load(in);
    const Placement p = parse_placement(read_file(in.placement), d.design);
    const HpwlResult h = hpwl(d.design, p.positions);
    out << "total " << format_number(h.total) << '\n';
    for (std::size_t n = 0; n < h.per_net.size(); ++n)
      out << "net " << d.design.nets[n].name << ' ' << format_number(h.per_net[n]) << '\n';
    return kExitOk;
  });
}

struct ScoreArgs {
  std::vector<std::string> metrics;
  double hidden_weight = kHiddenWeight;
  std::string out;
};

int cmd_score(const ScoreArgs& a, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    std::vector<MetricsRecord> records;
    for (const auto& f : a.metrics) {
      auto r = parse_metrics(read_file(f));
      records.insert(records.end(), r.begin(), r.end());
    }
    if (records.empty()) throw ValidationError("no DESIGN records in the metrics input");
    const std::string table = score_table(records, a.hidden_weight);
    if (!a.out.empty()) write_file_atomic(a.out, table);
    out << table;
    return kExitOk;
  });
}

struct GenerateArgs {
  std::uint64_t seed = 1;
  std::string profile = "tiny", out;
  bool contention = false;
};

int cmd_generate(const GenerateArgs& a, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto profile = parse_profile(a.profile);
    if (!profile) throw ValidationError("unknown profile '" + a.profile + "'");
    const Benchmark b = a.contention ? generate_contention_benchmark(a.seed) : generate_benchmark(a.seed, *profile);
    write_file_atomic(a.out + ".layout", write_layout(b.layout));
    write_file_atomic(a.out + ".design", write_design(b.design));
    out << "wrote " << a.out << ".layout and " << a.out << ".design (" << b.design.instances.size()
        << " instances)\n";
    return kExitOk;
  });
}

int cmd_plot(const Inputs& in, const std::string& svg, std::ostream& err) {
  return guarded(err, [&] {
    Loaded d = load(in);
    const Placement p = parse_placement(read_file(in.placement), d.design);
    write_file_atomic(svg, write_svg(d.layout, d.design, p));
    return kExitOk;
  });
}

void add_inputs(CLI::App* cmd, Inputs& in, bool placement) {
  cmd->add_option("--layout", in.layout, "Layout file")->required();
  cmd->add_option("--design", in.design, "Design file")->required();
  if (placement) cmd->add_option("--placement", in.placement, "Placement file")->required();
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"FPGA macro placer"};
  app.name("mplace");
  app.require_subcommand(1);

  PlaceArgs place;
  auto* p = app.add_subcommand("place", "Global placement, legalization and output");
  add_inputs(p, place.in, false);
  p->add_option("--out", place.out, "Placement output; the run manifest goes to <out>.manifest.json")->required();
  p->add_option("--seed", place.seed, "Random seed");
  p->add_option("--config", place.config, "JSON file overriding placer settings");
  p->add_option("--trace", place.trace, "Per-iteration trace CSV");
  p->add_option("--plot", place.plot, "SVG drawing of the result");

  LegalizeArgs leg;
  auto* l = app.add_subcommand("legalize", "Legalize the macros of a global placement");
  add_inputs(l, leg.in, true);
  l->add_option("--out", leg.out, "Legalized placement output")->required();
  l->add_option("--report", leg.report, "Per-macro legalization report");
  l->add_option("--candidates", leg.candidates, "Initial candidate sites per macro")->check(CLI::PositiveNumber);

  Inputs check_in, eval_in, plot_in;
  auto* c = app.add_subcommand("check", "Audit a placement; exit 0 only when it is legal");
  add_inputs(c, check_in, true);
  auto* e = app.add_subcommand("eval", "Print total and per-net HPWL");
  add_inputs(e, eval_in, true);

  ScoreArgs score;
  auto* s = app.add_subcommand("score", "Contest score table from metrics files");
  s->add_option("--metrics", score.metrics, "Metrics files")->required()->expected(1, -1);
  s->add_option("--hidden-weight", score.hidden_weight, "Weight of hidden designs")->check(CLI::PositiveNumber);
  s->add_option("--out", score.out, "Write the table to this file as well");

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "Write a synthetic benchmark");
  g->add_option("--seed", gen.seed, "Random seed");
  g->add_option("--profile", gen.profile, "tiny, small or medium");
  g->add_flag("--contention", gen.contention, "Crowded-region benchmark instead of a profile");
  g->add_option("--out", gen.out, "Output prefix for <out>.layout and <out>.design")->required();

  std::string svg;
  auto* pl = app.add_subcommand("plot", "SVG drawing of a placement");
  add_inputs(pl, plot_in, true);
  pl->add_option("--out", svg, "SVG output")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& ex) {
    const int code = app.exit(ex, out, err);
    return code == 0 ? kExitOk : kExitError;
  }

  if (p->parsed()) return cmd_place(place, out, err);
  if (l->parsed()) return cmd_legalize(leg, out, err);
  if (c->parsed()) return cmd_check(check_in, out, err);
  if (e->parsed()) return cmd_eval(eval_in, out, err);
  if (s->parsed()) return cmd_score(score, out, err);
  if (g->parsed()) return cmd_generate(gen, out, err);
  return cmd_plot(plot_in, svg, err);
}

}  // namespace mplace
