// obsblock: synthesize and check observability-blocking gains for
// integrator networks.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "obsblock/cutset.hpp"
#include "obsblock/designer.hpp"
#include "obsblock/error.hpp"
#include "obsblock/io.hpp"
#include "obsblock/scenarios.hpp"
#include "obsblock/verify.hpp"

using namespace obsblock;

namespace {

struct DesignFlags {
  std::string input;
  std::string output;
  std::string report;
  std::uint64_t seed = 1;
  int order = 0;
  bool cutset = false;
  std::string variant = "n4";
  std::string lambda = "default";
  double tol_rank = 0.0;
  double tol_spec = 1e-6;
  std::string q_check = "strict";
};

LambdaChoice parse_lambda(const std::string& text) {
  LambdaChoice c;
  if (text == "default") return c;
  try {
    if (text.rfind("index:", 0) == 0) {
      c.kind = LambdaChoice::Kind::Index;
      size_t used = 0;
      c.index = std::stoi(text.substr(6), &used);
      if (used != text.size() - 6) throw std::invalid_argument("trailing");
      return c;
    }
    if (text.rfind("value:", 0) == 0) {
      const std::string body = text.substr(6);
      const auto comma = body.find(',');
      c.kind = LambdaChoice::Kind::Value;
      const double re = std::stod(body.substr(0, comma));
      const double im = comma == std::string::npos ? 0.0 : std::stod(body.substr(comma + 1));
      c.value = cplx(re, im);
      return c;
    }
  } catch (const std::logic_error&) {
  }
  throw Error(ErrorKind::InvalidInput,
              fmt::format("--lambda must be default, index:<k> or value:<re>,<im>; got \"{}\"", text));
}

DesignOptions design_options(const DesignFlags& f) {
  if (f.tol_rank < 0.0 || !(f.tol_spec > 0.0)) {
    throw Error(ErrorKind::InvalidInput, "tolerances must be positive");
  }
  DesignOptions opt;
  opt.variant = f.variant == "n6" ? Variant::MeasureDerivative : Variant::MeasurePosition;
  opt.lambda = parse_lambda(f.lambda);
  opt.seed = f.seed;
  opt.tol.rank = f.tol_rank;
  opt.tol.spectrum = f.tol_spec;
  opt.strict_actuation_count = f.q_check != "warn";
  return opt;
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
  } else {
    write_text_file(path, text);
  }
}

IntegratorNetwork load_network(const std::string& path) {
  return network_from_json(parse_json(read_text_file(path)));
}

int cmd_gen(const std::string& scenario, int n, int order, double density, int m, int q, std::uint64_t seed,
            const std::string& out) {
  if (!scenario.empty()) {
    if (scenario != "fig2-din") {
      throw Error(ErrorKind::InvalidInput, fmt::format("unknown scenario \"{}\" (available: fig2-din)", scenario));
    }
    emit(out, network_to_json(fig2_network(seed, order)).dump(2) + "\n");
    return 0;
  }
  if (n < 2) throw Error(ErrorKind::InvalidInput, "gen: n must be at least 2");
  if (!(density > 0.0 && density <= 1.0)) throw Error(ErrorKind::InvalidInput, "gen: density must be in (0, 1]");
  const auto net = random_network(n, order, m, q, density, seed);
  emit(out, network_to_json(net).dump(2) + "\n");
  return 0;
}

int cmd_cut(const std::string& in, const std::string& out) {
  const auto net = load_network(in);
  const auto plan = min_vertex_cut(net.graph, net.actuation, net.measurement);
  emit(out, render_cut_report(net, plan));
  return 0;
}

struct DesignRun {
  DesignRecord record;
  std::optional<CutsetDesign> cut;
  SpectralData open;
  VerificationReport report;
};

DesignRun run_design(const IntegratorNetwork& net, bool use_cutset, const DesignOptions& opt) {
  DesignRun run{{net, {}, opt.variant, std::nullopt, opt.seed, opt.tol}, std::nullopt, {}, {}};
  if (use_cutset) {
    const auto plan = min_vertex_cut(net.graph, net.actuation, net.measurement);
    run.cut = design_via_cutset(net, plan, opt);
    run.record.design = run.cut->design;
    run.record.plan = plan;
  } else {
    run.record.design = design_blocking(net, opt);
  }
  const auto ss = assemble(net);
  run.open = decompose(ss.A);
  VerifyOptions vopt;
  vopt.tol = opt.tol;
  run.report = verify_design(ss, run.open, run.record.design, vopt);
  return run;
}

int cmd_design(const DesignFlags& f) {
  const auto net = load_network(f.input);
  if (f.order != 0 && f.order != net.order()) {
    throw Error(ErrorKind::OrderMismatch,
                fmt::format("--order {} does not match the network file (order {})", f.order, net.order()));
  }
  const auto run = run_design(net, f.cutset, design_options(f));
  if (!f.output.empty()) write_text_file(f.output, design_to_json(run.record).dump(2) + "\n");
  emit(f.report, render_design_report(run.record, run.open, run.cut ? &*run.cut : nullptr, run.report));
  if (!run.report.pass) throw Error(ErrorKind::Verification, "design failed verification");
  return 0;
}

int cmd_verify(const std::string& in, const std::string& out, bool as_json) {
  const auto rec = design_from_json(parse_json(read_text_file(in)));
  const auto ss = assemble(rec.network);
  const auto open = decompose(ss.A);
  if (rec.design.p < 0 || rec.design.p >= open.size()) {
    throw Error(ErrorKind::Parse, "design file: \"p\" is out of range");
  }
  for (int i : rec.design.preserved) {
    if (i >= open.size()) throw Error(ErrorKind::Parse, "design file: \"preserved\" index out of range");
  }
  VerifyOptions vopt;
  vopt.tol = rec.tol;
  const auto rep = verify_design(ss, open, rec.design, vopt);
  emit(out, as_json ? verification_to_json(rep).dump(2) + "\n" : render_verification(rep));
  if (!rep.pass) throw Error(ErrorKind::Verification, "verification failed");
  return 0;
}

std::string deviation_table(const CutsetDesign& cd, const std::vector<int>& nodes, double tol) {
  std::string s = "zero-pattern deviations (unit-scaled |v_hat|)\n  node  block  value      limit\n";
  for (int id : nodes) {
    for (Eigen::Index k = 0; k < cd.zero_pattern.cols(); ++k) {
      const double v = cd.zero_pattern(id - 1, k);
      if (!(v < tol)) s += fmt::format("  {:>4}  {:>5}  {:.3e}  {:.0e}\n", id, k, v, tol);
    }
  }
  return s;
}

int cmd_repro(const std::string& scenario, std::uint64_t seed, int order, const std::string& out) {
  if (scenario != "fig2-din") {
    throw Error(ErrorKind::InvalidInput, fmt::format("unknown scenario \"{}\" (available: fig2-din)", scenario));
  }
  const auto net = fig2_network(seed, order);
  const std::vector<int> expected_zero = {5, 6, 7, 8, 9, 11};
  const std::vector<int> expected_cut = {5};
  DesignOptions opt;
  opt.seed = seed;
  // Higher orders give the network complex modes, so two actuators fall one
  // short of the general count; the selected eigenvalues are real, and the
  // oracles decide.
  opt.strict_actuation_count = order == 2;

  std::string text = fmt::format("scenario fig2-din, seed {}, order {}\n\n", seed, order);
  const auto plan = min_vertex_cut(net.graph, net.actuation, net.measurement);
  text += render_cut_report(net, plan) + "\n";
  bool ok = plan.vcut == expected_cut;
  if (!ok) text += fmt::format("cut mismatch: expected {{5}}, got {} nodes\n", plan.vcut.size());

  const auto ss = assemble(net);
  const auto open = decompose(ss.A);
  // Second run: the nonzero real eligible eigenvalue farthest from violating
  // the Lg condition, which keeps the gain small.
  std::vector<LambdaChoice> choices(1);
  double best_ratio = 0.0;
  for (int col : eligible_columns(net, plan, open, opt.tol)) {
    if (!open.is_real(col) || std::abs(open.eigenvalues(col)) <= 1e-6 || !open.is_eigenvector(col)) continue;
    const auto lg = lg_condition(net, plan, open.eigenvalues(col), opt.tol);
    const double ratio = lg.margin / lg.threshold;
    if (ratio > best_ratio) {
      best_ratio = ratio;
      LambdaChoice c;
      c.kind = LambdaChoice::Kind::Index;
      c.index = col;
      if (choices.size() == 1) choices.push_back(c);
      choices.back() = c;
    }
  }

  for (const auto& choice : choices) {
    opt.lambda = choice;
    const auto cd = design_via_cutset(net, plan, opt);
    VerifyOptions vopt;
    vopt.tol = opt.tol;
    const auto rep = verify_design(ss, open, cd.design, vopt);
    DesignRecord rec{net, cd.design, opt.variant, plan, seed, opt.tol};
    text += "----\n" + render_design_report(rec, open, &cd, rep);

    double worst = 0.0;
    for (int id : expected_zero) {
      for (Eigen::Index k = 0; k < cd.zero_pattern.cols(); ++k) worst = std::max(worst, cd.zero_pattern(id - 1, k));
    }
    const bool pattern_ok = worst < opt.tol.zero;
    text += fmt::format("zero pattern on nodes {{5, 6, 7, 8, 9, 11}}: {} (max {:.3e})\n",
                        pattern_ok ? "matches" : "MISMATCH", worst);
    if (!pattern_ok) text += deviation_table(cd, expected_zero, opt.tol.zero);
    ok = ok && pattern_ok && rep.pass;
  }
  text += fmt::format("\nrepro: {}\n", ok ? "pass" : "fail");
  emit(out, text);
  if (!ok) throw Error(ErrorKind::Verification, "fig2-din reproduction failed");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Observability-blocking state feedback for integrator networks"};
  app.require_subcommand(1);

  int gen_n = 11, gen_order = 2, gen_m = 1, gen_q = 3;
  double gen_density = 0.3;
  std::uint64_t gen_seed = 1;
  std::string gen_out, gen_scenario;
  auto* gen = app.add_subcommand("gen", "Generate a random strongly connected network file");
  gen->add_option("-n,--nodes", gen_n, "Node count")->capture_default_str();
  gen->add_option("--order", gen_order, "Integrator order")->capture_default_str();
  gen->add_option("--density", gen_density, "Edge probability per ordered pair")->capture_default_str();
  gen->add_option("-m,--measurements", gen_m, "Measurement node count")->capture_default_str();
  gen->add_option("-q,--actuators", gen_q, "Actuation node count")->capture_default_str();
  gen->add_option("--seed", gen_seed, "Random seed")->capture_default_str();
  gen->add_option("-o,--output", gen_out, "Output path (stdout if omitted)");
  gen->add_option("--scenario", gen_scenario, "Write a bundled network instead (fig2-din)");

  std::string cut_in, cut_out;
  auto* cut = app.add_subcommand("cut", "Minimum vertex cut between actuation and measurement nodes");
  cut->add_option("-i,--input", cut_in, "Network file")->required();
  cut->add_option("-o,--output", cut_out, "Report path (stdout if omitted)");

  DesignFlags df;
  auto* design = app.add_subcommand("design", "Synthesize a blocking gain");
  design->add_option("-i,--input", df.input, "Network file")->required();
  design->add_option("-o,--output", df.output, "Design file to write");
  design->add_option("--report", df.report, "Report path (stdout if omitted)");
  design->add_option("--seed", df.seed, "Seed for the repair step")->capture_default_str();
  design->add_option("--order", df.order, "Expected integrator order (checked against the file)");
  design->add_flag("--cutset", df.cutset, "Design against a minimum vertex cut");
  design->add_option("--variant", df.variant, "Zeroed block: n4 positions, n6 highest derivative")
      ->check(CLI::IsMember({"n4", "n6"}))
      ->capture_default_str();
  design->add_option("--lambda", df.lambda, "default | index:<k> | value:<re>,<im>")->capture_default_str();
  design->add_option("--tol-rank", df.tol_rank, "Relative rank cutoff (0: max_dim * eps)");
  design->add_option("--tol-spec", df.tol_spec, "Spectrum preservation tolerance")->capture_default_str();
  design->add_option("--q-check", df.q_check, "Actuation count check")
      ->check(CLI::IsMember({"strict", "warn"}))
      ->capture_default_str();

  std::string ver_in, ver_out;
  bool ver_json = false;
  auto* verify = app.add_subcommand("verify", "Re-check a design file with independent oracles");
  verify->add_option("-i,--input", ver_in, "Design file")->required();
  verify->add_option("-o,--output", ver_out, "Report path (stdout if omitted)");
  verify->add_flag("--json", ver_json, "Emit the report as JSON");

  std::string rep_scenario = "fig2-din", rep_out;
  std::uint64_t rep_seed = 1;
  int rep_order = 2;
  auto* repro = app.add_subcommand("repro", "Run a bundled reproduction scenario");
  repro->add_option("scenario", rep_scenario, "Scenario id")->capture_default_str();
  repro->add_option("--seed", rep_seed, "Weight draw seed")->capture_default_str();
  repro->add_option("--order", rep_order, "Integrator order")->capture_default_str();
  repro->add_option("-o,--output", rep_out, "Report path (stdout if omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*gen) return cmd_gen(gen_scenario, gen_n, gen_order, gen_density, gen_m, gen_q, gen_seed, gen_out);
    if (*cut) return cmd_cut(cut_in, cut_out);
    if (*design) return cmd_design(df);
    if (*verify) return cmd_verify(ver_in, ver_out, ver_json);
    if (*repro) return cmd_repro(rep_scenario, rep_seed, rep_order, rep_out);
  } catch (const Error& e) {
    std::cerr << fmt::format("error [{}]: {}\n", to_string(e.kind()), e.what());
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << fmt::format("error: {}\n", e.what());
    return 3;
  }
  return 0;
}
