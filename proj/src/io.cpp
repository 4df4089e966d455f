#include "obsblock/io.hpp"

#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "obsblock/error.hpp"

namespace obsblock {

using nlohmann::json;

namespace {

const json& field(const json& j, const char* name) {
  if (!j.is_object() || !j.contains(name)) {
    throw Error(ErrorKind::Parse, fmt::format("missing field \"{}\"", name));
  }
  return j.at(name);
}

int as_int(const json& j, const char* what) {
  if (!j.is_number_integer()) throw Error(ErrorKind::Parse, fmt::format("\"{}\" must be an integer", what));
  return j.get<int>();
}

double as_double(const json& j, const char* what) {
  if (!j.is_number()) throw Error(ErrorKind::Parse, fmt::format("\"{}\" must be a number", what));
  return j.get<double>();
}

std::vector<int> as_ids(const json& j, const char* what) {
  if (!j.is_array()) throw Error(ErrorKind::Parse, fmt::format("\"{}\" must be a list", what));
  std::vector<int> out;
  for (const auto& x : j) out.push_back(as_int(x, what));
  return out;
}

json cvec_json(const VecC& v) {
  json re = json::array();
  json im = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    re.push_back(v(i).real());
    im.push_back(v(i).imag());
  }
  return {{"re", re}, {"im", im}};
}

VecC cvec_from(const json& j, const char* what) {
  const auto& re = field(j, "re");
  const auto& im = field(j, "im");
  if (!re.is_array() || !im.is_array() || re.size() != im.size()) {
    throw Error(ErrorKind::Parse, fmt::format("\"{}\" needs equal-length re/im lists", what));
  }
  VecC v(static_cast<Eigen::Index>(re.size()));
  for (size_t i = 0; i < re.size(); ++i) v(i) = cplx(as_double(re[i], what), as_double(im[i], what));
  return v;
}

json mat_json(const MatR& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

MatR mat_from(const json& j, Eigen::Index rows, Eigen::Index cols, const char* what) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows) {
    throw Error(ErrorKind::Parse, fmt::format("\"{}\" must have {} rows", what, rows));
  }
  MatR m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& row = j[i];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw Error(ErrorKind::Parse, fmt::format("\"{}\" row {} must have {} entries", what, i, cols));
    }
    for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = as_double(row[c], what);
  }
  return m;
}

std::string cfmt(cplx z, const char* spec) {
  const std::string re = fmt::format(fmt::runtime(spec), z.real());
  if (z.imag() == 0.0) return re;
  return re + (z.imag() < 0 ? "-" : "+") + fmt::format(fmt::runtime(spec), std::abs(z.imag())) + "i";
}

std::string id_list(const std::vector<int>& ids) {
  std::string s = "{";
  for (size_t i = 0; i < ids.size(); ++i) s += (i ? ", " : "") + std::to_string(ids[i]);
  return s + "}";
}

}  // namespace

json network_to_json(const IntegratorNetwork& net) {
  json edges = json::array();
  for (const auto& e : net.graph.edges()) {
    edges.push_back({{"from", e.from}, {"to", e.to}, {"weights", e.weights}});
  }
  return {{"order", net.order()},
          {"n", net.nodes()},
          {"edges", edges},
          {"actuation", net.actuation},
          {"measurement", net.measurement}};
}

IntegratorNetwork network_from_json(const json& j) {
  const int order = as_int(field(j, "order"), "order");
  const int n = as_int(field(j, "n"), "n");
  const auto& edges_j = field(j, "edges");
  if (!edges_j.is_array()) throw Error(ErrorKind::Parse, "\"edges\" must be a list");
  std::vector<Edge> edges;
  for (const auto& e : edges_j) {
    Edge edge;
    edge.from = as_int(field(e, "from"), "from");
    edge.to = as_int(field(e, "to"), "to");
    const auto& w = field(e, "weights");
    if (!w.is_array()) throw Error(ErrorKind::Parse, "\"weights\" must be a list");
    for (const auto& x : w) edge.weights.push_back(as_double(x, "weights"));
    edges.push_back(std::move(edge));
  }
  return make_network(WeightedDigraph(n, order, std::move(edges)),
                      as_ids(field(j, "actuation"), "actuation"),
                      as_ids(field(j, "measurement"), "measurement"));
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, fmt::format("cannot open {}", path));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, fmt::format("cannot write {}", path));
  out << text;
  if (!out) throw Error(ErrorKind::Io, fmt::format("write to {} failed", path));
}

json parse_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Parse, e.what());
  }
}

json design_to_json(const DesignRecord& rec) {
  const auto& d = rec.design;
  json j;
  j["network"] = network_to_json(rec.network);
  j["variant"] = rec.variant == Variant::MeasurePosition ? "n4" : "n6";
  j["seed"] = rec.seed;
  j["p"] = d.p;
  j["lambda_p"] = {d.lambda_p.real(), d.lambda_p.imag()};
  j["targets"] = d.targets;
  j["h_p"] = cvec_json(d.h_p);
  j["v_hat"] = cvec_json(d.v_hat);
  j["z_p"] = cvec_json(d.z_p);
  j["F"] = mat_json(d.F);
  j["preserved"] = d.preserved;
  j["repaired"] = d.repaired;
  j["direct"] = d.direct;
  j["condition"] = d.condition;
  j["realness_residual"] = d.realness_residual;
  j["notes"] = d.notes;
  if (rec.plan) {
    j["cutset"] = {{"v1", rec.plan->v1}, {"vcut", rec.plan->vcut}, {"v2", rec.plan->v2}};
  }
  j["tolerances"] = {{"rank", rec.tol.rank},         {"pbh", rec.tol.pbh},
                     {"spectrum", rec.tol.spectrum}, {"realness", rec.tol.realness},
                     {"zero", rec.tol.zero},         {"lg_margin", rec.tol.lg_margin}};
  return j;
}

DesignRecord design_from_json(const json& j) {
  DesignRecord rec{network_from_json(field(j, "network")), {}, Variant::MeasurePosition, {}, 1, {}};
  const auto& variant = field(j, "variant");
  if (variant == "n4") {
    rec.variant = Variant::MeasurePosition;
  } else if (variant == "n6") {
    rec.variant = Variant::MeasureDerivative;
  } else {
    throw Error(ErrorKind::Parse, "\"variant\" must be n4 or n6");
  }
  const auto& seed = field(j, "seed");
  if (!seed.is_number_unsigned()) throw Error(ErrorKind::Parse, "\"seed\" must be unsigned");
  rec.seed = seed.get<std::uint64_t>();

  auto& d = rec.design;
  const int dim = rec.network.state_dim();
  const int q = rec.network.inputs();
  d.p = as_int(field(j, "p"), "p");
  const auto& lam = field(j, "lambda_p");
  if (!lam.is_array() || lam.size() != 2) throw Error(ErrorKind::Parse, "\"lambda_p\" must be [re, im]");
  d.lambda_p = cplx(as_double(lam[0], "lambda_p"), as_double(lam[1], "lambda_p"));
  d.targets = as_ids(field(j, "targets"), "targets");
  d.h_p = cvec_from(field(j, "h_p"), "h_p");
  d.v_hat = cvec_from(field(j, "v_hat"), "v_hat");
  d.z_p = cvec_from(field(j, "z_p"), "z_p");
  if (d.v_hat.size() != dim) throw Error(ErrorKind::Parse, "\"v_hat\" has wrong length");
  d.F = mat_from(field(j, "F"), q, dim, "F");
  d.preserved = as_ids(field(j, "preserved"), "preserved");
  d.repaired = as_ids(field(j, "repaired"), "repaired");
  for (int i : d.preserved) {
    if (i < 0 || i >= dim) throw Error(ErrorKind::Parse, "\"preserved\" index out of range");
  }
  const auto& direct = field(j, "direct");
  if (!direct.is_boolean()) throw Error(ErrorKind::Parse, "\"direct\" must be true or false");
  d.direct = direct.get<bool>();
  d.condition = as_double(field(j, "condition"), "condition");
  d.realness_residual = as_double(field(j, "realness_residual"), "realness_residual");
  if (j.contains("cutset")) {
    const auto& c = j.at("cutset");
    rec.plan = plan_from_cut(rec.network.graph, rec.network.actuation, rec.network.measurement,
                             as_ids(field(c, "vcut"), "vcut"));
  }
  if (j.contains("tolerances")) {
    const auto& t = j.at("tolerances");
    rec.tol.rank = as_double(field(t, "rank"), "rank");
    rec.tol.pbh = as_double(field(t, "pbh"), "pbh");
    rec.tol.spectrum = as_double(field(t, "spectrum"), "spectrum");
    rec.tol.realness = as_double(field(t, "realness"), "realness");
    rec.tol.zero = as_double(field(t, "zero"), "zero");
    rec.tol.lg_margin = as_double(field(t, "lg_margin"), "lg_margin");
  }
  return rec;
}

json verification_to_json(const VerificationReport& rep) {
  return {{"pbh_rank_at_lambda", rep.pbh_rank_at_lambda},
          {"full_state_dim", rep.full_state_dim},
          {"obs_matrix_rank", rep.obs_matrix_rank},
          {"obs_rank_tolerance", rep.obs_rank_tolerance},
          {"oracles_agree", rep.oracles_agree},
          {"spectrum_match_error", rep.spectrum_match_error},
          {"preserved_vector_residuals", rep.preserved_vector_residuals},
          {"realness_residual", rep.realness_residual},
          {"output_energy", rep.output_energy},
          {"energy_horizon", rep.energy_horizon},
          {"blocked_entry_max", rep.blocked_entry_max},
          {"verdict", rep.pass ? "pass" : "fail"},
          {"reasons", rep.reasons}};
}

std::string matrix_text(const MatR& m) {
  std::string s;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) s += fmt::format("{}{:.17g}", j ? " " : "", m(i, j));
    s += "\n";
  }
  return s;
}

std::string render_cut_report(const IntegratorNetwork& net, const CutsetPlan& plan) {
  std::string s;
  s += fmt::format("vertex cut\n  nodes: {}  order: {}\n", net.nodes(), net.order());
  s += fmt::format("  actuation: {}\n  measurement: {}\n", id_list(net.actuation), id_list(net.measurement));
  s += fmt::format("  |Vcut| = {} (measurement count {})\n", plan.vcut.size(), net.measurement.size());
  s += fmt::format("  V1   = {}\n  Vcut = {}\n  V2   = {}\n", id_list(plan.v1), id_list(plan.vcut),
                   id_list(plan.v2));
  std::vector<int> renumber;
  for (int i : plan.permutation) renumber.push_back(i + 1);
  s += fmt::format("  renumbering (new position -> node): {}\n", id_list(renumber));
  return s;
}

std::string render_verification(const VerificationReport& rep) {
  std::string s = "verification\n";
  s += fmt::format("  PBH rank at lambda_p:      {} of {}\n", rep.pbh_rank_at_lambda, rep.full_state_dim);
  s += fmt::format("  observability rank:        {} of {} (cutoff {:.1e}, diagnostic{})\n", rep.obs_matrix_rank,
                   rep.full_state_dim, rep.obs_rank_tolerance, rep.oracles_agree ? "" : ", disagrees with PBH");
  s += fmt::format("  spectrum match error:      {:.3e}\n", rep.spectrum_match_error);
  double worst = 0.0;
  for (double r : rep.preserved_vector_residuals) worst = std::max(worst, r);
  s += fmt::format("  preserved columns:         {} (max residual {:.3e})\n",
                   rep.preserved_vector_residuals.size(), worst);
  s += fmt::format("  gain imaginary residue:    {:.3e}\n", rep.realness_residual);
  s += fmt::format("  |C v_hat|_inf (unit):      {:.3e}\n", rep.blocked_entry_max);
  s += fmt::format("  output energy on blocked direction: {:.3e} over t in [0, {:.4g}]\n", rep.output_energy,
                   rep.energy_horizon);
  s += fmt::format("  verdict: {}\n", rep.pass ? "pass" : "fail");
  for (const auto& r : rep.reasons) s += "    - " + r + "\n";
  return s;
}

std::string render_design_report(const DesignRecord& rec, const SpectralData& open,
                                 const CutsetDesign* cut, const VerificationReport& rep) {
  const auto& net = rec.network;
  const auto& d = rec.design;
  const int n = net.nodes();
  const int N = net.order();
  std::string s = "observability-blocking design\n";
  s += fmt::format("  nodes: {}  order: {}  state dimension: {}\n", n, N, net.state_dim());
  s += fmt::format("  actuation: {}  measurement: {}\n", id_list(net.actuation), id_list(net.measurement));
  s += fmt::format("  mode: {}  variant: {}  seed: {}\n", cut ? "cutset" : "direct",
                   rec.variant == Variant::MeasurePosition ? "n4 (position rows)" : "n6 (derivative rows)",
                   rec.seed);
  s += fmt::format("  zeroed nodes: {}\n", id_list(d.targets));

  s += "\nopen-loop spectrum\n";
  for (Eigen::Index i = 0; i < open.size(); ++i) {
    std::string flags;
    if (open.defective[i]) flags += fmt::format("  chain {}", open.chain_position[i]);
    if (i == d.p) flags += "  <- selected";
    s += fmt::format("  [{:>3}] {}{}\n", i, cfmt(open.eigenvalues(i), "{:.4g}"), flags);
  }
  s += fmt::format("  cond(V0) = {:.3e}\n", open.condition);

  s += fmt::format("\nselected eigenvalue lambda_p = {}\n", cfmt(d.lambda_p, "{:.17g}"));
  s += "h_p:\n";
  for (Eigen::Index i = 0; i < d.h_p.size(); ++i) s += "  " + cfmt(d.h_p(i), "{:.17g}") + "\n";

  s += "\nmodified eigenvector (unit-scaled magnitudes, 4 s.f.)\n  node";
  for (int k = 0; k < N; ++k) s += fmt::format("  {:>10}", fmt::format("block{}", k));
  s += "\n";
  const double vn = d.v_hat.norm();
  for (int j = 0; j < n; ++j) {
    s += fmt::format("  {:>4}", j + 1);
    for (int k = 0; k < N; ++k) s += fmt::format("  {:>10.4g}", std::abs(d.v_hat(k * n + j)) / vn);
    s += "\n";
  }
  s += "v_hat (full precision):\n";
  for (Eigen::Index i = 0; i < d.v_hat.size(); ++i) s += "  " + cfmt(d.v_hat(i), "{:.17g}") + "\n";

  s += "\ngain F (rows follow actuation order, full precision)\n";
  s += matrix_text(d.F);
  s += "gain summary (4 s.f.)\n";
  for (Eigen::Index i = 0; i < d.F.rows(); ++i) {
    s += fmt::format("  node {:>3}:", net.actuation[i]);
    for (Eigen::Index j = 0; j < d.F.cols(); ++j) s += fmt::format(" {:.4g}", d.F(i, j));
    s += "\n";
  }

  s += "\npreservation ledger\n";
  s += fmt::format("  construction: {}\n", d.direct ? "direct swap" : "greedy subset with repair");
  s += fmt::format("  preserved columns: {}\n", id_list(d.preserved));
  s += fmt::format("  repaired columns:  {}\n", id_list(d.repaired));
  s += fmt::format("  cond(V) = {:.3e}\n", d.condition);

  if (cut) {
    s += "\ntransfer certificate\n";
    s += fmt::format("  V1 = {}  Vcut = {}  V2 = {}\n", id_list(cut->plan.v1), id_list(cut->plan.vcut),
                     id_list(cut->plan.v2));
    s += fmt::format("  Lg eigenvalues ({}):\n", cut->condition.lg_eigenvalues.size());
    for (Eigen::Index i = 0; i < cut->condition.lg_eigenvalues.size(); ++i) {
      s += "    " + cfmt(cut->condition.lg_eigenvalues(i), "{:.6g}") + "\n";
    }
    s += fmt::format("  lambda_p^N = {}  margin = {:.6g}  threshold = {:.3e}  satisfied = {}\n",
                     cfmt(std::pow(cut->condition.lambda_p, N), "{:.6g}"), cut->condition.margin,
                     cut->condition.threshold, cut->condition.satisfied ? "yes" : "no");
    s += fmt::format("  max |v_hat| over Vcut u V2 (unit): {:.3e}\n", cut->blocked_entry_max);
    s += fmt::format("  |C v_hat|_inf with base measurements (unit): {:.3e}\n", cut->base_output_residual);
  }

  s += "\n" + render_verification(rep);
  if (!d.notes.empty()) {
    s += "notes\n";
    for (const auto& note : d.notes) s += "  - " + note + "\n";
  }
  return s;
}

}  // namespace obsblock
