#include "diamondlab/cli/run.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <limits>
#include <map>
#include <ostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "diamondlab/certificates.hpp"
#include "diamondlab/cli/emit.hpp"
#include "diamondlab/critical.hpp"
#include "diamondlab/errors.hpp"
#include "diamondlab/hier_exact.hpp"
#include "diamondlab/hier_mc.hpp"
#include "diamondlab/parallel.hpp"
#include "diamondlab/renewal.hpp"
#include "diamondlab/zd_polymer.hpp"

#ifndef DIAMONDLAB_VERSION
#define DIAMONDLAB_VERSION "0.0.0"
#endif

namespace diamondlab::cli {
namespace {

using nlohmann::json;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Result {
  Table table;
  json record = json::object();  // command-specific summary; the verdict for certify
  bool always_json = false;
};

void append(std::vector<std::string>& a, const std::vector<std::string>& b) { a.insert(a.end(), b.begin(), b.end()); }
void append(std::vector<Cell>& a, const std::vector<Cell>& b) { a.insert(a.end(), b.begin(), b.end()); }

json estimate_json(const Estimate& e, double z) {
  return {{"value", e.value},     {"stderr", e.stderr_},           {"n_samples", e.n_samples},
          {"seed", e.seed},       {"ci_lo", e.lower(z)},           {"ci_hi", e.upper(z)}};
}

json pairs_json(const std::vector<std::pair<std::string, double>>& v) {
  json j = json::object();
  for (const auto& [k, x] : v) j[k] = x;
  return j;
}

McBudget mc_budget(const RunConfig& c, std::uint64_t seed) {
  return {std::size_t(c.budget.pool_size), c.budget.replicas, seed};
}

CertifyOptions certify_options(const RunConfig& c, std::uint64_t seed) { return {mc_budget(c, seed), c.params.z}; }

CriticalSearchOptions search_options(const RunConfig& c, std::uint64_t seed) {
  CriticalSearchOptions o;
  o.budget = mc_budget(c, seed);
  o.level = c.search.level;
  o.tol = c.search.tol;
  o.threshold = c.search.threshold;
  o.z = c.params.z;
  return o;
}

Result certificate_result(const Certificate& cert) {
  Result r;
  r.always_json = true;
  r.record = {{"kind", to_string(cert.kind)},
              {"route", cert.route},
              {"verdict", to_string(cert.verdict)},
              {"label", cert.label},
              {"inputs", pairs_json(cert.inputs)},
              {"estimate", estimate_json(cert.estimate, cert.z)},
              {"z", cert.z},
              {"threshold", cert.threshold},
              {"strict", cert.strict},
              {"deterministic", cert.deterministic},
              {"extras", pairs_json(cert.extras)}};
  if (cert.witness) r.record["witness"] = *cert.witness;
  if (!cert.orbit.empty()) {
    r.record["orbit"] = cert.orbit;
    r.record["orbit_to_zero"] = cert.orbit_to_zero;
  }
  r.table.columns = {"kind", "route", "verdict"};
  append(r.table.columns, estimate_columns());
  append(r.table.columns, {"z", "threshold", "strict"});
  std::vector<Cell> row{to_string(cert.kind), cert.route, to_string(cert.verdict)};
  append(row, estimate_cells(cert.estimate));
  append(row, {cert.z, cert.threshold, std::int64_t(cert.strict)});
  r.table.rows.push_back(std::move(row));
  return r;
}

json interval_json(const CriticalInterval& ci) {
  return {{"h_lo", ci.h_lo},           {"h_hi", ci.h_hi},           {"stderr", ci.stderr_},
          {"reference", ci.reference}, {"threshold", ci.threshold}, {"evaluations", ci.evaluations}};
}

Result compute(const RunConfig& c, std::uint64_t seed) {
  const std::string& cmd = c.command;
  const auto& P = c.params;
  const DisorderLaw law = disorder_law(c);
  Result r;

  if (cmd == "anneal") {
    const auto p = model_params(c);
    const double hc = annealed_critical_point(p);
    const double a = alpha_exponent(p);
    r.table.columns = {"h"};
    append(r.table.columns, interval_columns("F_"));
    append(r.table.columns, {"zero_within_tol", "h_c", "alpha", "diverges"});
    for (double h : h_values(c)) {
      std::vector<Cell> row{h};
      const auto F = annealed_free_energy(p, h, P.tol);
      append(row, interval_cells(F));
      append(row, {std::int64_t(F.upper <= P.tol), hc, a, std::int64_t(annealed_diverges(p, h))});
      r.table.rows.push_back(std::move(row));
    }
    r.record = {{"h_c", hc}, {"alpha", a}};
  } else if (cmd == "percolation") {
    const int b = int(c.model.b), s = c.model.s;
    const double pc = percolation_threshold(b, s);
    const double d = percolation_map_derivative(b, s, pc);
    r.table.columns = {"b", "s", "p_c", "phi_prime"};
    r.table.rows.push_back({std::int64_t(b), std::int64_t(s), pc, d});
    r.record = {{"p_c", pc}, {"phi_prime", d}};
  } else if (cmd == "renewal solve") {
    const auto K = make_kernel(kernel_spec(c));
    const double hc = renewal_critical_point(K);
    r.table.columns = {"h"};
    append(r.table.columns, interval_columns("F_"));
    r.table.columns.push_back("h_c");
    for (double h : h_values(c)) {
      std::vector<Cell> row{h};
      append(row, interval_cells(homogeneous_free_energy(K, h, P.tol)));
      row.push_back(hc);
      r.table.rows.push_back(std::move(row));
    }
    r.record = {{"kernel", K.describe()}, {"h_c", hc}};
  } else if (cmd == "renewal quenched") {
    const auto K = make_kernel(kernel_spec(c));
    const auto q = quenched_summary(K, law, P.beta, P.h, std::size_t(P.N), std::size_t(c.budget.environments), seed);
    r.table.columns = {"N", "beta", "h"};
    append(r.table.columns, estimate_columns("mean_partition_"));
    append(r.table.columns, estimate_columns("log_partition_"));
    r.table.columns.push_back("annealed_log_partition");
    std::vector<Cell> row{std::int64_t(P.N), P.beta, P.h};
    append(row, estimate_cells(q.mean_partition));
    append(row, estimate_cells(q.log_partition));
    row.push_back(q.annealed_log_partition);
    r.table.rows.push_back(std::move(row));
    r.record = {{"mean_partition", estimate_json(q.mean_partition, P.z)},
                {"log_partition", estimate_json(q.log_partition, P.z)},
                {"annealed_log_partition", q.annealed_log_partition}};
  } else if (cmd == "renewal asymptotics") {
    const auto K = make_kernel(kernel_spec(c));
    const auto offsets = geometric_grid(c.grid.lo, c.grid.hi, c.grid.count);
    const auto a = critical_asymptotics_check(K, offsets, seed, c.budget.bootstrap);
    r.table.columns = {"dh", "F"};
    for (std::size_t i = 0; i < a.h.size(); ++i) r.table.rows.push_back({a.h[i], a.F[i]});
    r.record = {{"slope", a.slope}, {"ci_lo", a.ci_lo}, {"ci_hi", a.ci_hi}, {"reference", a.reference}};
  } else if (cmd == "pool run") {
    const auto series = free_energy_series(model_params(c), law, P.beta, P.h, P.n, mc_budget(c, seed));
    r.table.columns = {"level"};
    append(r.table.columns, estimate_columns());
    append(r.table.columns, {"mean_log", "sandwich_lo", "sandwich_hi"});
    for (const auto& fe : series) {
      std::vector<Cell> row{std::int64_t(fe.estimate.level)};
      append(row, estimate_cells(fe.estimate));
      append(row, {fe.mean_log, fe.has_sandwich ? fe.sandwich_lo : kNaN, fe.has_sandwich ? fe.sandwich_hi : kNaN});
      r.table.rows.push_back(std::move(row));
    }
  } else if (cmd == "certify pin-bond") {
    r = certificate_result(
        pin_bond_delocalization(law, c.model.b, P.beta, P.h, P.gamma, P.n0, certify_options(c, seed)));
  } else if (cmd == "certify pin-site") {
    r = certificate_result(pin_site_delocalization(law, int(c.model.b), c.model.s, P.beta, P.h, *P.theta, P.n,
                                                   certify_options(c, seed)));
  } else if (cmd == "certify polymer") {
    r = certificate_result(polymer_strong_disorder(law, int(c.model.b), c.model.s, P.beta, polymer_route(c),
                                                   P.theta, P.n, certify_options(c, seed)));
  } else if (cmd == "certify renewal") {
    const auto K = make_kernel(kernel_spec(c));
    r = certificate_result(renewal_delocalization(K, law, P.beta, P.h, P.k, P.gamma, c.budget.environments, seed, P.z));
  } else if (cmd == "zd free-energy") {
    const auto f = quenched_free_energy_zd(c.model.d, law, P.beta, P.N, c.budget.replicas, seed);
    r.table.columns = {"d", "N", "beta"};
    append(r.table.columns, estimate_columns());
    r.table.columns.push_back("annealed_compatible");
    std::vector<Cell> row{std::int64_t(c.model.d), std::int64_t(P.N), P.beta};
    append(row, estimate_cells(f.estimate));
    row.push_back(std::int64_t(f.annealed_compatible));
    r.table.rows.push_back(std::move(row));
  } else if (cmd == "zd overlap") {
    const auto o = overlap_and_derivative_check(c.model.d, law, P.beta, P.N, c.budget.replicas, P.eps, seed, P.z);
    r.table.columns = {"d", "N", "beta", "eps"};
    for (const char* k : {"overlap_", "derivative_", "predicted_", "discrepancy_"})
      append(r.table.columns, estimate_columns(k));
    append(r.table.columns, {"bias_estimate", "within_budget"});
    std::vector<Cell> row{std::int64_t(c.model.d), std::int64_t(P.N), P.beta, P.eps};
    for (const Estimate* e : {&o.overlap, &o.derivative, &o.predicted, &o.discrepancy}) append(row, estimate_cells(*e));
    append(row, {o.bias_estimate, std::int64_t(o.within_budget)});
    r.table.rows.push_back(std::move(row));
  } else if (cmd == "zd crosscheck") {
    const auto x = second_moment_crosscheck(c.model.d, law, P.beta, P.N, c.budget.replicas, seed);
    r.table.columns = {"d", "N", "beta"};
    append(r.table.columns, estimate_columns("mc_"));
    append(r.table.columns, {"exact", "agrees"});
    std::vector<Cell> row{std::int64_t(c.model.d), std::int64_t(P.N), P.beta};
    append(row, estimate_cells(x.mc));
    append(row, {x.exact, std::int64_t(x.agrees)});
    r.table.rows.push_back(std::move(row));
  } else if (cmd == "critpoint") {
    const auto ci = critical_point_search(model_params(c), law, P.beta, c.search.h_left, c.search.h_right,
                                          search_options(c, seed));
    r.table.columns = {"beta", "h_lo", "h_hi", "stderr", "reference", "threshold", "evaluations"};
    r.table.rows.push_back({P.beta, ci.h_lo, ci.h_hi, ci.stderr_, ci.reference, ci.threshold,
                            std::int64_t(ci.evaluations)});
    r.record = interval_json(ci);
  } else if (cmd == "scaling") {
    const auto s = shift_scaling_experiment(model_params(c), law, P.betas, search_options(c, seed), c.budget.bootstrap);
    r.table.columns = {"beta", "h_lo", "h_hi", "stderr", "shift"};
    for (std::size_t i = 0; i < s.beta.size(); ++i) {
      const auto& pt = s.points[i];
      r.table.rows.push_back({s.beta[i], pt.h_lo, pt.h_hi, pt.stderr_, pt.midpoint() - s.h_c0});
    }
    r.record = {{"h_c0", s.h_c0}, {"alpha", s.alpha}, {"marginal", s.marginal}};
    if (s.fit)
      r.record["fit"] = {{"slope", s.fit->slope},     {"intercept", s.fit->intercept}, {"ci_lo", s.fit->ci_lo},
                         {"ci_hi", s.fit->ci_hi},     {"residual", s.fit->residual},
                         {"reference_exponent", s.reference_exponent}};
    if (s.marginal_fit) {
      const auto& m = *s.marginal_fit;
      r.record["marginal_fit"] = {{"slope_inv_beta", m.slope_inv_beta},   {"residual_inv_beta", m.residual_inv_beta},
                                  {"slope_inv_beta2", m.slope_inv_beta2}, {"residual_inv_beta2", m.residual_inv_beta2},
                                  {"c1", m.c1},                           {"c2", m.c2},
                                  {"bracketed", m.bracketed}};
    }
  } else if (cmd == "oracle exact-small-n") {
    const auto o = exact_small_n(model_params(c), law, P.beta, P.h, P.n, P.order, P.thetas);
    r.table.columns = {"n", "mean_log", "support", "theta", "fractional_moment"};
    if (o.thetas.empty())
      r.table.rows.push_back({std::int64_t(P.n), o.mean_log, std::int64_t(o.support), kNaN, kNaN});
    for (std::size_t i = 0; i < o.thetas.size(); ++i)
      r.table.rows.push_back(
          {std::int64_t(P.n), o.mean_log, std::int64_t(o.support), o.thetas[i], o.fractional_moments[i]});
  } else {
    throw ConfigError("command", "unknown command '" + cmd + "'");
  }
  return r;
}

std::string join_path(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

}  // namespace

const char* version() { return DIAMONDLAB_VERSION; }

std::uint64_t resolve_seed(const RunConfig& c, std::string* source) {
  if (c.seed) {
    if (source) *source = "config";
    return *c.seed;
  }
  if (const char* env = std::getenv("DIAMONDLAB_SEED"); env && *env) {
    RunConfig tmp;
    try {
      set_field(tmp, "seed", env);
    } catch (const ConfigError&) {
      throw ConfigError("DIAMONDLAB_SEED", std::string("not a non-negative integer: '") + env + "'");
    }
    if (source) *source = "env";
    return *tmp.seed;
  }
  if (source) *source = "default";
  return 1;
}

std::string manifest_hash(const RunConfig& resolved) {
  RunConfig c = resolved;
  c.output = OutputSection{};  // where results go does not change them
  return fnv1a_hex(std::string("diamondlab ") + version() + "\n" + dump_config(c));
}

RunOutcome run(const RunConfig& config) {
  validate(config);
  RunConfig c = config;
  std::string seed_source;
  c.seed = resolve_seed(config, &seed_source);
  set_thread_count(unsigned(c.threads));

  RunOutcome out;
  out.seed = *c.seed;
  out.manifest_hash = manifest_hash(c);

  const auto t0 = std::chrono::steady_clock::now();
  Result r = compute(c, *c.seed);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  const std::string base = join_path(c.output.dir, c.output.stem);
  std::vector<std::string> files;
  if (c.output.format == "csv") files.push_back(base + ".csv");
  if (c.output.format == "json" || r.always_json) files.push_back(base + ".json");

  json manifest = stamp(json::object(), out.manifest_hash);
  manifest["tool"] = "diamondlab";
  manifest["version"] = version();
  manifest["command"] = c.command;
  manifest["seed"] = *c.seed;
  manifest["seed_source"] = seed_source;
  manifest["threads"] = c.threads;
  manifest["threads_effective"] = thread_count();
  manifest["config_toml"] = dump_config(c);
  manifest["wall_time_seconds"] = wall;
  manifest["artifacts"] = files;
  out.manifest_path = base + ".manifest.json";
  write_file(out.manifest_path, manifest.dump(2) + "\n");

  for (const auto& f : files) {
    if (f.size() > 4 && f.compare(f.size() - 4, 4, ".csv") == 0) {
      write_file(f, to_csv(r.table, out.manifest_hash));
    } else {
      json j = r.record;
      j["command"] = c.command;
      j["rows"] = table_json(r.table);
      write_file(f, stamp(std::move(j), out.manifest_hash).dump(2) + "\n");
    }
  }
  out.artifacts = files;
  return out;
}

int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"diamondlab: disordered pinning and polymer laboratory"};
  app.set_help_flag("--help", "print this help");  // -h would clash with --h
  app.set_version_flag("--version", std::string(version()));
  std::vector<std::string> words;
  std::string config_path;
  app.add_option("command", words, "command words, e.g. `renewal solve`");
  app.add_option("--config", config_path, "TOML config file; flags override it");
  std::map<std::string, std::string> values;
  for (const auto& f : flag_table()) app.add_option("--" + f.flag, values[f.path], f.path);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << version() << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "diamondlab: " << e.what() << "\n";
    return 2;
  }

  try {
    RunConfig c;
    if (!config_path.empty()) {
      try {
        c = load_config(config_path);
      } catch (const IoError& e) {
        throw ConfigError("--config", e.what());
      }
    }
    if (!words.empty()) {
      std::string cmd;
      for (const auto& w : words) cmd += (cmd.empty() ? "" : " ") + w;
      c.command = cmd;
    }
    for (const auto& f : flag_table())
      if (app.get_option("--" + f.flag)->count() > 0) set_field(c, f.path, values[f.path]);
    const RunOutcome r = run(c);
    out << "seed " << r.seed << "  manifest " << r.manifest_hash << "\n";
    out << r.manifest_path << "\n";
    for (const auto& a : r.artifacts) out << a << "\n";
    return 0;
  } catch (const ConfigError& e) {
    err << "diamondlab: config error: " << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    err << "diamondlab: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "diamondlab: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace diamondlab::cli
