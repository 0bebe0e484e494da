// trajstat: command-line driver. Every artifact carries a reproducibility
// header (command, config, model hash, version); payloads are deterministic,
// including multi-worker sampling runs.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "CLI11.hpp"
#include "trajstat/counting.hpp"
#include "trajstat/errors.hpp"
#include "trajstat/generators.hpp"
#include "trajstat/model.hpp"
#include "trajstat/output_states.hpp"
#include "trajstat/renewal.hpp"
#include "trajstat/superop.hpp"
#include "trajstat/thermo.hpp"
#include "trajstat/trajectories.hpp"

using json = nlohmann::json;
using namespace trajstat;

namespace {

constexpr const char* kVersion = "0.1.0";

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void diag(const std::string& level, const std::string& type,
          const std::string& message) {
  json j{{"level", level}, {"type", type}, {"message", message}};
  std::cerr << j.dump() << "\n";
}

std::vector<double> parse_grid(const std::string& spec) {
  double lo, hi;
  int n;
  char c1, c2;
  std::istringstream is(spec);
  if (!(is >> lo >> c1 >> hi >> c2 >> n) || c1 != ':' || c2 != ':' || n < 1)
    throw ParseError("grid must be lo:hi:count, got '" + spec + "'");
  std::vector<double> g;
  for (int i = 0; i < n; ++i)
    g.push_back(n == 1 ? lo : lo + (hi - lo) * i / (n - 1.0));
  return g;
}

std::vector<int> parse_int_list(const std::string& spec) {
  std::vector<int> out;
  std::istringstream is(spec);
  std::string tok;
  while (std::getline(is, tok, ',')) out.push_back(std::stoi(tok));
  if (out.empty()) throw ParseError("empty integer list");
  return out;
}

RVec to_rvec(const std::vector<double>& v) {
  RVec r(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) r(i) = v[i];
  return r;
}

json header_json(const std::string& command, const json& config,
                 std::uint64_t model_hash) {
  char hash[20];
  std::snprintf(hash, sizeof(hash), "%016llx",
                static_cast<unsigned long long>(model_hash));
  return json{{"command", command},
              {"config", config},
              {"model_hash", hash},
              {"version", kVersion}};
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open output file: " + path);
  return out;
}

void write_csv(const std::string& path, const json& header,
               const std::vector<std::string>& columns,
               const std::vector<std::vector<std::string>>& rows) {
  auto out = open_out(path);
  out << "# " << header.dump() << "\n";
  for (std::size_t i = 0; i < columns.size(); ++i)
    out << columns[i] << (i + 1 < columns.size() ? "," : "\n");
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i)
      out << row[i] << (i + 1 < row.size() ? "," : "\n");
  }
}

void write_json(const std::string& path, json doc) {
  auto out = open_out(path);
  out << doc.dump(2) << "\n";
}

struct Ctx {
  LindbladModel model;
  bool waiver = false;  // set for renewal models: T_x is not primitive
  std::uint64_t hash = 0;
};

Ctx load_ctx(const std::string& path) {
  Ctx ctx{LindbladModel::load(path), false, 0};
  ctx.hash = ctx.model.hash();
  ctx.waiver = detect_renewal(ctx.model).has_value();
  if (ctx.waiver)
    diag("info", "renewal",
         "renewal structure detected; primitivity waiver enabled");
  return ctx;
}

int resolve_workers(int flag_value) {
  if (flag_value > 0) return flag_value;
  if (const char* env = std::getenv("TRAJSTAT_WORKERS")) {
    const int w = std::atoi(env);
    if (w > 0) return w;
  }
  return 1;
}

// --- command implementations ------------------------------------------------

int cmd_validate(const std::string& model_path, const std::string& out_path) {
  const Ctx ctx = load_ctx(model_path);
  const auto eff = effective_hamiltonian(ctx.model);
  json evs = json::array();
  for (int i = 0; i < eff.eigenvalues.size(); ++i)
    evs.push_back({eff.eigenvalues(i).real(), eff.eigenvalues(i).imag()});
  json doc{{"header", header_json("validate", {{"model", model_path}}, ctx.hash)},
           {"dim", ctx.model.dim()},
           {"num_jumps", ctx.model.num_jumps()},
           {"spin_dim", ctx.model.spin_dim()},
           {"x_min", eff.x_min},
           {"h_eff_eigenvalues", evs},
           {"renewal", ctx.waiver},
           {"valid", true}};
  if (out_path.empty())
    std::cout << doc.dump(2) << "\n";
  else
    write_json(out_path, doc);
  return 0;
}

int cmd_potentials(const std::string& model_path, const std::string& kind,
                   const std::string& grid_spec, const std::vector<double>& c,
                   const std::string& out_path) {
  const Ctx ctx = load_ctx(model_path);
  const RVec cv = to_rvec(c);
  const auto grid = parse_grid(grid_spec);
  std::vector<std::vector<std::string>> rows;
  for (double f : grid) {
    const TiltPoint tilt = kind == "x" ? TiltPoint::x_tilt(f, cv)
                                       : TiltPoint::s_tilt(f, cv);
    const auto rep = potential(ctx.model, tilt, ctx.waiver);
    const auto iv = intensive_quantities(ctx.model, tilt, ctx.waiver);
    rows.push_back({fmt(f), fmt(rep.potential), fmt(rep.gap), fmt(iv.rate)});
  }
  write_csv(out_path,
            header_json("potentials",
                        {{"model", model_path},
                         {"kind", kind},
                         {"grid", grid_spec},
                         {"c", c}},
                        ctx.hash),
            {"field", "potential", "gap", "rate"}, rows);
  return 0;
}

int cmd_duality(const std::string& model_path, const std::string& grid_spec,
                const std::vector<double>& c, const std::string& out_path) {
  const Ctx ctx = load_ctx(model_path);
  const RVec cv = to_rvec(c);
  std::vector<std::vector<std::string>> rows;
  for (double s : parse_grid(grid_spec)) {
    const TiltPoint st = TiltPoint::s_tilt(s, cv);
    const TiltPoint xt = dual_map(ctx.model, st, ctx.waiver);
    const double g = potential(ctx.model, xt, ctx.waiver).potential;
    const double k = intensive_quantities(ctx.model, st, ctx.waiver).rate;
    const double t = intensive_quantities(ctx.model, xt, ctx.waiver).rate;
    rows.push_back({fmt(s), fmt(xt.field), fmt(g), fmt(std::abs(g - s)),
                    fmt(k), fmt(t), fmt(std::abs(t * k - 1.0))});
  }
  write_csv(out_path,
            header_json("duality",
                        {{"model", model_path}, {"s_grid", grid_spec}, {"c", c}},
                        ctx.hash),
            {"s", "x", "g_round_trip", "round_trip_error", "k", "t",
             "tk_error"},
            rows);
  return 0;
}

int cmd_counting(const std::string& model_path, double tau,
                 const std::string& kmax_spec, const std::vector<double>& c,
                 const std::string& out_path) {
  const Ctx ctx = load_ctx(model_path);
  const RVec cv = to_rvec(c);
  const int k_max = kmax_spec == "auto" ? auto_K_max(ctx.model, tau, cv)
                                        : std::stoi(kmax_spec);
  const auto st = count_resolved_propagate(ctx.model, tau, k_max, cv);
  std::vector<std::vector<std::string>> rows;
  for (int k = 0; k <= st.K_max; ++k)
    rows.push_back({std::to_string(k), fmt(st.p(k))});
  write_csv(out_path,
            header_json("counting",
                        {{"model", model_path},
                         {"tau", tau},
                         {"kmax", kmax_spec},
                         {"c", c}},
                        ctx.hash),
            {"K", "P_tau_K"}, rows);
  return 0;
}

int cmd_concentration(const std::string& model_path, double s,
                      const std::string& k_spec, const std::vector<double>& c,
                      const std::string& out_path) {
  const Ctx ctx = load_ctx(model_path);
  const auto rep = concentration_report(ctx.model, s, to_rvec(c),
                                        parse_int_list(k_spec), ctx.waiver);
  json doc{{"header", header_json("concentration",
                                  {{"model", model_path},
                                   {"s", s},
                                   {"K", k_spec},
                                   {"c", c}},
                                  ctx.hash)},
           {"K_list", rep.K_list},
           {"tau_list", rep.tau_list},
           {"log_ratio", rep.log_ratio},
           {"slope_estimate", rep.slope_estimate}};
  write_json(out_path, doc);
  return 0;
}

int cmd_sample(const std::string& model_path, const std::string& scheme, int K,
               double tau, int n, std::uint64_t seed, int workers,
               const std::string& out_path) {
  const Ctx ctx = load_ctx(model_path);
  if (scheme != "fixed-count" && scheme != "fixed-time")
    throw ParseError("scheme must be fixed-count or fixed-time");
  const bool by_count = scheme == "fixed-count";
  workers = std::max(1, std::min(workers, n));

  // Contiguous index slices; concatenation is worker-count invariant because
  // trajectory i depends only on (seed, i).
  std::vector<SampleBatch> parts(workers);
  std::vector<std::thread> pool;
  std::exception_ptr error;
  std::mutex error_mu;
  for (int w = 0; w < workers; ++w) {
    const int lo = static_cast<int>(static_cast<long long>(n) * w / workers);
    const int hi =
        static_cast<int>(static_cast<long long>(n) * (w + 1) / workers);
    pool.emplace_back([&, w, lo, hi] {
      try {
        parts[w] = by_count
                       ? sample_fixed_count_range(ctx.model, K, lo, hi, seed)
                       : sample_fixed_time_range(ctx.model, tau, lo, hi, seed);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);

  auto out = open_out(out_path);
  json hdr{{"header", header_json("sample",
                                  {{"model", model_path},
                                   {"scheme", scheme},
                                   {"K", K},
                                   {"tau", tau},
                                   {"n", n},
                                   {"seed", seed},
                                   {"workers", workers}},
                                  ctx.hash)}};
  out << hdr.dump() << "\n";
  for (const auto& part : parts) {
    for (const auto& traj : part.trajectories) {
      json jumps = json::array();
      for (const auto& j : traj.jumps) jumps.push_back({j.time, j.channel});
      const RVec m = traj.spin_total(ctx.model);
      json line{{"jumps", jumps},
                {"T", traj.final_jump_time()},
                {"K", traj.count()},
                {"M", std::vector<double>(m.data(), m.data() + m.size())}};
      out << line.dump() << "\n";
    }
  }
  return 0;
}

json block_to_json(const Mat& block) {
  json re = json::array(), im = json::array();
  for (int i = 0; i < block.rows(); ++i) {
    json rrow = json::array(), irow = json::array();
    for (int j = 0; j < block.cols(); ++j) {
      rrow.push_back(block(i, j).real());
      irow.push_back(block(i, j).imag());
    }
    re.push_back(rrow);
    im.push_back(irow);
  }
  return json{{"re", re}, {"im", im}};
}

int cmd_reduced(const std::string& model_path, const std::string& ensemble,
                double field, double tau, int K, double tau0, int n_max,
                int nodes, const std::vector<double>& c,
                const std::string& out_path) {
  const Ctx ctx = load_ctx(model_path);
  const RVec cv = to_rvec(c);
  const EnsembleSpec spec =
      ensemble == "x" ? EnsembleSpec::x_ensemble(K, field, cv)
                      : EnsembleSpec::s_ensemble(tau, field, cv);
  json blocks = json::array();
  for (int a = 0; a <= n_max; ++a) {
    for (int b = 0; b <= n_max; ++b) {
      const auto lb = reduced_block_finite(ctx.model, spec, tau0, a, b, nodes);
      blocks.push_back({{"N", a},
                        {"N_prime", b},
                        {"trace", lb.block.trace().real()},
                        {"block", block_to_json(lb.block)}});
    }
  }
  json doc{{"header", header_json("reduced",
                                  {{"model", model_path},
                                   {"ensemble", ensemble},
                                   {"field", field},
                                   {"tau", tau},
                                   {"K", K},
                                   {"tau0", tau0},
                                   {"nmax", n_max},
                                   {"nodes", nodes},
                                   {"c", c}},
                                  ctx.hash)},
           {"blocks", blocks}};
  write_json(out_path, doc);
  return 0;
}

json phase_report_json(const PhaseCheckReport& rep) {
  return json{{"kind", rep.kind == PhaseKind::P1 ? "P1" : "P2"},
              {"phi", rep.phi},
              {"invariant_deviation", rep.invariant_deviation},
              {"phase_law_deviation", rep.phase_law_deviation},
              {"imaginary_shift_deviation", rep.imaginary_shift_deviation}};
}

int cmd_phase_check(const std::string& model_path, const std::string& kind,
                    double phi, double s, const std::string& out_path) {
  const Ctx ctx = load_ctx(model_path);
  PhaseCheckContext pctx;
  pctx.s = s;
  const auto rep = phase_covariance_check(
      ctx.model, kind == "P2" ? PhaseKind::P2 : PhaseKind::P1, phi, pctx);
  json doc{{"header", header_json("phase-check",
                                  {{"model", model_path},
                                   {"kind", kind},
                                   {"phi", phi},
                                   {"s", s}},
                                  ctx.hash)},
           {"report", phase_report_json(rep)}};
  write_json(out_path, doc);
  return 0;
}

json equivalence_report_body(const Ctx& ctx, double s, double tau0) {
  const LindbladModel& m = ctx.model;
  const RVec c(0);
  const TiltPoint st = TiltPoint::s_tilt(s, c);
  const TiltPoint xt = dual_map(m, st, ctx.waiver);

  const auto s_rep = potential(m, st, ctx.waiver);
  const auto x_rep = potential(m, xt, ctx.waiver);
  const double k = intensive_quantities(m, st, ctx.waiver).rate;
  const double t = intensive_quantities(m, xt, ctx.waiver).rate;

  const Mat fn = x_rep.right_eig / x_rep.right_eig.norm();
  const Mat en = s_rep.right_eig / s_rep.right_eig.norm();
  const Cplx ip = (fn.adjoint() * en).trace();
  const double angle = std::atan2((en - ip * fn).norm(), std::abs(ip));

  const auto conc = concentration_report(m, s, c, {4, 8, 16}, ctx.waiver);
  json conc_json{{"K_list", conc.K_list},
                 {"log_ratio", conc.log_ratio},
                 {"slope_estimate", conc.slope_estimate}};

  const int n_max = 1, nodes = 5;
  const auto lim = limit_state(m, s, c, tau0, n_max, nodes, ctx.waiver);
  json red_taus = json::array(), red_dists = json::array();
  for (double tau : {tau0 + 2.0, tau0 + 5.0, tau0 + 10.0}) {
    double dist = 0.0;
    for (int a = 0; a <= n_max; ++a)
      for (int b = 0; b <= n_max; ++b)
        dist += block_distance(
            reduced_block_finite(m, EnsembleSpec::s_ensemble(tau, Cplx(s, 0), c),
                                 tau0, a, b, nodes)
                .block,
            lim.blocks.at({a, b}));
    red_taus.push_back(tau);
    red_dists.push_back(dist);
  }

  PhaseCheckContext pctx;
  pctx.s = s;
  pctx.tau0 = tau0;
  pctx.nodes_per_dim = nodes;
  const auto p1 = phase_covariance_check(m, PhaseKind::P1, 0.7, pctx);
  const auto p2 = phase_covariance_check(m, PhaseKind::P2, 0.7, pctx);

  return json{
      {"s", s},
      {"x_dual", xt.field},
      {"connection_residual", connection_residual(m, s, c, xt.field)},
      {"duality_round_trip_error", std::abs(x_rep.potential - s)},
      {"tk_error", std::abs(t * k - 1.0)},
      {"eigenvector_angle", angle},
      {"schrodinger_relation_residual",
       schrodinger_eigvec_relation_residual(m, s, c, ctx.waiver)},
      {"concentration", conc_json},
      {"reduced_convergence", {{"tau", red_taus}, {"distance", red_dists}}},
      {"phase_checks", {phase_report_json(p1), phase_report_json(p2)}}};
}

int cmd_equivalence_report(const std::string& model_path, double s, double tau0,
                           const std::string& out_path) {
  const Ctx ctx = load_ctx(model_path);
  json doc{{"header", header_json("equivalence-report",
                                  {{"model", model_path},
                                   {"s", s},
                                   {"tau0", tau0}},
                                  ctx.hash)},
           {"report", equivalence_report_body(ctx, s, tau0)}};
  write_json(out_path, doc);
  return 0;
}

int cmd_renewal_demo(const std::string& model_path, const std::string& out_dir) {
  Ctx ctx = model_path.empty()
                ? Ctx{three_level_renewal(), true, three_level_renewal().hash()}
                : load_ctx(model_path);
  const auto eff = effective_hamiltonian(ctx.model);
  if (eff.x_min >= -1e-10)
    throw DomainError(
        "renewal demo requires strict stability: x_min = " + fmt(eff.x_min) +
        " >= -1e-10, so the waiting-time integrals are not summable");
  const auto structure = detect_renewal(ctx.model);
  if (!structure)
    throw DomainError("model does not have renewal structure (rank-1 jumps "
                      "with a common reset state)");

  const json base_cfg{{"model", model_path.empty() ? "builtin" : model_path},
                      {"out", out_dir}};

  // Potentials: analytic vs numerical e^{g(x)}.
  std::vector<std::vector<std::string>> pot_rows;
  for (double x : parse_grid("0.05:1.0:20")) {
    const auto pot = analytic_potential(ctx.model, *structure, x);
    const auto num = dominant_eigenpair(build_T(ctx.model, TiltPoint::x_tilt(x)),
                                        DominantMode::SpectralRadius, true);
    pot_rows.push_back({fmt(x), fmt(pot.g), fmt(std::log(num.value.real())),
                        fmt(std::abs(num.value - std::exp(pot.g)))});
  }
  write_csv(out_dir + "/potentials.csv",
            header_json("renewal-demo", base_cfg, ctx.hash),
            {"x", "g_analytic", "g_numeric", "eigenvalue_error"}, pot_rows);

  // Duality table.
  std::vector<std::vector<std::string>> dual_rows;
  for (double s : parse_grid("-0.5:0.5:21")) {
    const TiltPoint xt = dual_map(ctx.model, TiltPoint::s_tilt(s), true);
    const double g = potential(ctx.model, xt, true).potential;
    dual_rows.push_back({fmt(s), fmt(xt.field), fmt(std::abs(g - s))});
  }
  write_csv(out_dir + "/duality.csv",
            header_json("renewal-demo", base_cfg, ctx.hash),
            {"s", "x", "round_trip_error"}, dual_rows);

  // Counting distribution at tau = 10.
  const double tau = 10.0;
  const auto crs =
      count_resolved_propagate(ctx.model, tau, auto_K_max(ctx.model, tau));
  std::vector<std::vector<std::string>> count_rows;
  for (int k = 0; k <= crs.K_max; ++k)
    count_rows.push_back({std::to_string(k), fmt(crs.p(k))});
  write_csv(out_dir + "/counting.csv",
            header_json("renewal-demo", base_cfg, ctx.hash), {"K", "P_tau_K"},
            count_rows);

  // Product-form checks and the full equivalence report.
  const auto checks =
      renewal_product_checks(ctx.model, *structure, 10, 0.3, 20000, 11);
  write_json(out_dir + "/renewal_checks.json",
             json{{"header", header_json("renewal-demo", base_cfg, ctx.hash)},
                  {"collapse_residual", checks.collapse_residual},
                  {"partition_residual", checks.partition_residual},
                  {"lag1_correlation", checks.lag1_correlation},
                  {"lag1_std_error", checks.lag1_std_error},
                  {"n_waiting_times", checks.n_waiting_times}});
  write_json(out_dir + "/equivalence.json",
             json{{"header", header_json("renewal-demo", base_cfg, ctx.hash)},
                  {"report", equivalence_report_body(ctx, 0.3, 1.0)}});
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"thermodynamics of quantum trajectory ensembles"};
  app.require_subcommand(1);

  std::string model_path, out_path, grid_spec = "-0.5:0.5:21", kind = "s";
  std::string kmax_spec = "auto", scheme = "fixed-time", k_spec = "4,8,16,32";
  std::vector<double> c;
  double tau = 10.0, s = 0.3, phi = 0.7, field = 0.0, tau0 = 1.0;
  int K = 4, n = 1000, n_max = 1, nodes = 5, workers = 0;
  std::uint64_t seed = 1;

  auto* validate = app.add_subcommand("validate", "load and validate a model");
  validate->add_option("model", model_path)->required();
  validate->add_option("--out", out_path);

  auto* potentials = app.add_subcommand("potentials", "potential curve");
  potentials->add_option("model", model_path)->required();
  potentials->add_option("--kind", kind)->check(CLI::IsMember({"s", "x"}));
  potentials->add_option("--grid", grid_spec);
  potentials->add_option("--c", c);
  potentials->add_option("--out", out_path)->required();

  auto* duality = app.add_subcommand("duality", "dual-map round-trip table");
  duality->add_option("model", model_path)->required();
  duality->add_option("--s-grid", grid_spec);
  duality->add_option("--c", c);
  duality->add_option("--out", out_path)->required();

  auto* counting = app.add_subcommand("counting", "count distribution P_tau(K)");
  counting->add_option("model", model_path)->required();
  counting->add_option("--tau", tau)->required();
  counting->add_option("--kmax", kmax_spec);
  counting->add_option("--c", c);
  counting->add_option("--out", out_path)->required();

  auto* concentration =
      app.add_subcommand("concentration", "ensemble concentration exponents");
  concentration->add_option("model", model_path)->required();
  concentration->add_option("--s", s)->required();
  concentration->add_option("--K", k_spec);
  concentration->add_option("--c", c);
  concentration->add_option("--out", out_path)->required();

  auto* sample = app.add_subcommand("sample", "quantum jump Monte Carlo");
  sample->add_option("model", model_path)->required();
  sample->add_option("--scheme", scheme)
      ->check(CLI::IsMember({"fixed-count", "fixed-time"}));
  sample->add_option("--K", K);
  sample->add_option("--tau", tau);
  sample->add_option("--n", n)->required();
  sample->add_option("--seed", seed);
  sample->add_option("--workers", workers);
  sample->add_option("--out", out_path)->required();

  auto* reduced = app.add_subcommand("reduced", "reduced output-state blocks");
  reduced->add_option("model", model_path)->required();
  reduced->add_option("--ensemble", kind)->check(CLI::IsMember({"s", "x"}));
  reduced->add_option("--field", field)->required();
  reduced->add_option("--tau", tau);
  reduced->add_option("--K", K);
  reduced->add_option("--tau0", tau0);
  reduced->add_option("--nmax", n_max);
  reduced->add_option("--nodes", nodes);
  reduced->add_option("--c", c);
  reduced->add_option("--out", out_path)->required();

  auto* phase = app.add_subcommand("phase-check", "P1/P2 covariance checks");
  phase->add_option("model", model_path)->required();
  phase->add_option("--kind", kind)->check(CLI::IsMember({"P1", "P2"}));
  phase->add_option("--phi", phi);
  phase->add_option("--s", s);
  phase->add_option("--out", out_path)->required();

  auto* demo = app.add_subcommand("renewal-demo", "full renewal pipeline");
  demo->add_option("--model", model_path);
  demo->add_option("--out", out_path)->required();

  auto* equiv =
      app.add_subcommand("equivalence-report", "bundled equivalence report");
  equiv->add_option("model", model_path)->required();
  equiv->add_option("--s", s);
  equiv->add_option("--tau0", tau0);
  equiv->add_option("--out", out_path)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (validate->parsed()) return cmd_validate(model_path, out_path);
    if (potentials->parsed())
      return cmd_potentials(model_path, kind, grid_spec, c, out_path);
    if (duality->parsed())
      return cmd_duality(model_path, grid_spec, c, out_path);
    if (counting->parsed())
      return cmd_counting(model_path, tau, kmax_spec, c, out_path);
    if (concentration->parsed())
      return cmd_concentration(model_path, s, k_spec, c, out_path);
    if (sample->parsed())
      return cmd_sample(model_path, scheme, K, tau, n, seed,
                        resolve_workers(workers), out_path);
    if (reduced->parsed())
      return cmd_reduced(model_path, kind, field, tau, K, tau0, n_max, nodes, c,
                         out_path);
    if (phase->parsed())
      return cmd_phase_check(model_path, kind, phi, s, out_path);
    if (demo->parsed()) return cmd_renewal_demo(model_path, out_path);
    if (equiv->parsed())
      return cmd_equivalence_report(model_path, s, tau0, out_path);
  } catch (const ParseError& e) {
    diag("error", "parse", e.what());
    return 1;
  } catch (const ValidationError& e) {
    diag("error", "validation", e.what());
    return 1;
  } catch (const IoError& e) {
    diag("error", "io", e.what());
    return 3;
  } catch (const std::exception& e) {
    // Remaining library exceptions are numerical-assumption failures.
    diag("error", "numerical", e.what());
    return 2;
  }
  return 1;
}
