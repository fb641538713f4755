#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "diamondlab/cli/config.hpp"
#include "diamondlab/cli/emit.hpp"
#include "diamondlab/cli/run.hpp"
#include "diamondlab/errors.hpp"

using namespace diamondlab;
using namespace diamondlab::cli;
namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("diamondlab_test_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int invoke(std::vector<std::string> args, std::string* out_text = nullptr, std::string* err_text = nullptr) {
  args.insert(args.begin(), "diamondlab");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int rc = main_entry(int(argv.size()), argv.data(), out, err);
  if (out_text) *out_text = out.str();
  if (err_text) *err_text = err.str();
  return rc;
}

}  // namespace

TEST_CASE("minimal TOML fills defaults") {
  const auto c = parse_config("command = \"anneal\"\n");
  RunConfig d;
  d.command = "anneal";
  CHECK(c == d);
  CHECK(c.budget.pool_size == 100000);
  CHECK(!c.seed);
}

TEST_CASE("malformed TOML is a ParseError with its line") {
  try {
    parse_config("command = \"anneal\"\n[model]\nb = = 3\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
  CHECK_THROWS_AS(parse_config("[model]\nbee = 3\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[model]\ns = \"two\"\n"), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/diamondlab.toml"), IoError);
}

TEST_CASE("dump then reload is the identity") {
  RunConfig c;
  c.command = "certify polymer";
  c.seed = 12345678901234ULL;
  c.threads = 3;
  c.model = {4.0, 2, "site", "polymer", 2};
  c.disorder = {"atoms", 0.25, {-1.0, 0.5, 2.0}, {0.2, 0.5, 0.3}};
  c.kernel = {"power-law", 0.3, 0.75, -1.5, 0.9};
  c.params.beta = 0.1 + 0.2;  // not exactly representable in short form
  c.params.h = -1.0 / 3.0;
  c.params.theta = 0.7;
  c.params.betas = {0.5, 0.65, 0.8};
  c.params.tol = 1e-12;
  c.params.route = "closed-form";
  c.grid = {1e-3, 0.1, 10, "geometric"};
  c.search.threshold = 2.5e-4;
  c.output = {"out dir", "name \"quoted\"", "json"};
  const auto text = dump_config(c);
  CHECK(parse_config(text) == c);
  CHECK(dump_config(parse_config(text)) == text);
}

TEST_CASE("set_field parses typed values") {
  RunConfig c;
  set_field(c, "params.beta", "0.75");
  set_field(c, "params.betas", "0.5,1,1.5");
  set_field(c, "budget.pool_size", "42");
  CHECK(c.params.beta == 0.75);
  CHECK(c.params.betas == std::vector<double>{0.5, 1.0, 1.5});
  CHECK(c.budget.pool_size == 42u);
  CHECK_THROWS_AS(set_field(c, "params.beta", "abc"), ConfigError);
  CHECK_THROWS_AS(set_field(c, "budget.pool_size", "-1"), ConfigError);
  CHECK_THROWS_AS(set_field(c, "params.nope", "1"), ConfigError);
}

TEST_CASE("emission formats") {
  Table empty;
  empty.columns = estimate_columns();
  CHECK(to_csv(empty, "abc") == "# manifest abc\nvalue,stderr,n_samples,seed\n");
  CHECK(interval_columns() == std::vector<std::string>{"lower", "upper"});

  Estimate e;
  e.value = 1.0 / 3.0;
  e.stderr_ = 0.01;
  e.n_samples = 10;
  e.seed = 7;
  Table t;
  t.columns = estimate_columns();
  t.rows.push_back(estimate_cells(e));
  CHECK(to_csv(t, "h") == "# manifest h\nvalue,stderr,n_samples,seed\n0.33333333333333331,0.01,10,7\n");
  CHECK(std::stod(format_double(0.1 + 0.2)) == 0.1 + 0.2);
  CHECK(format_double(-0.0) == "0");
  t.rows.push_back({1.0});
  CHECK_THROWS_AS(to_csv(t, "h"), BadInput);

  const auto j = stamp(nlohmann::json::object(), "h");
  CHECK(j["schema_version"] == kSchemaVersion);
  CHECK(j["manifest_hash"] == "h");
}

TEST_CASE("anneal at log(B-1) gives a zero row") {
  const auto dir = scratch("anneal");
  CHECK(invoke({"anneal", "--b", "3", "--s", "2", "--placement", "bond", "--h", "0.6931472", "--out", dir.string()}) == 0);
  const auto csv = slurp((dir / "result.csv").string());
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  CHECK(line.rfind("# manifest ", 0) == 0);
  std::getline(in, line);
  CHECK(line == "h,F_lower,F_upper,zero_within_tol,h_c,alpha,diverges");
  std::getline(in, line);
  std::vector<std::string> cells;
  std::istringstream row(line);
  for (std::string cell; std::getline(row, cell, ',');) cells.push_back(cell);
  REQUIRE(cells.size() == 7);
  CHECK(std::stod(cells[2]) < 1e-9);
  CHECK(cells[3] == "1");
  CHECK(fs::exists(dir / "result.manifest.json"));
}

TEST_CASE("exit codes and validation before computation") {
  const auto dir = scratch("exit");
  std::string err;
  CHECK(invoke({"bogus", "--out", dir.string()}, nullptr, &err) == 2);
  CHECK(err.find("unknown command") != std::string::npos);
  CHECK(invoke({"anneal", "--no-such-flag", "1"}) == 2);
  CHECK(invoke({"anneal", "--config", "/nonexistent.toml"}) == 2);
  CHECK(invoke({"certify", "pin-bond", "--b", "10", "--gamma", "0.3", "--out", dir.string()}, nullptr, &err) == 2);
  CHECK(err.find("params.gamma") != std::string::npos);
  CHECK(invoke({"certify", "pin-site", "--b", "3", "--s", "2", "--theta", "0.9", "--out", dir.string()}) == 2);
  CHECK(invoke({"zd", "overlap", "--law", "rademacher", "--beta", "1", "--out", dir.string()}) == 2);
  CHECK(fs::is_empty(dir));
  // module error after validation: no trap point at theta = 0.5
  CHECK(invoke({"certify", "pin-site", "--b", "2", "--s", "4", "--theta", "0.5", "--beta", "1", "--out", dir.string(),
                "--pool-size", "100", "--replicas", "2"}) == 1);
  CHECK(invoke({"--help"}) == 0);
}

TEST_CASE("reruns are byte-identical and flags, seed and threads reach the manifest") {
  const auto dir = scratch("rerun");
  const std::vector<std::string> base{"pool", "run", "--b", "3", "--beta", "0.3", "--h", "0.69", "--n", "5",
                                      "--pool-size", "2000", "--replicas", "3", "--threads", "2"};
  auto with = [&](std::vector<std::string> extra) {
    auto a = base;
    a.insert(a.end(), extra.begin(), extra.end());
    return a;
  };
  REQUIRE(invoke(with({"--out", (dir / "a").string(), "--seed", "77"})) == 0);
  REQUIRE(invoke(with({"--out", (dir / "b").string(), "--seed", "77"})) == 0);
  CHECK(slurp((dir / "a/result.csv").string()) == slurp((dir / "b/result.csv").string()));

  const auto m = nlohmann::json::parse(slurp((dir / "a/result.manifest.json").string()));
  CHECK(m["seed"] == 77);
  CHECK(m["seed_source"] == "config");
  CHECK(m["threads"] == 2);
  CHECK(m["schema_version"] == kSchemaVersion);
  CHECK(m["config_toml"].get<std::string>().find("beta = 0.3") != std::string::npos);
  const auto csv = slurp((dir / "a/result.csv").string());
  CHECK(csv.find(m["manifest_hash"].get<std::string>()) != std::string::npos);

  // a TOML file with a flag override of beta
  const auto toml = dir / "c.toml";
  {
    std::ofstream f(toml);
    f << "command = \"pool run\"\nseed = 5\n[model]\nb = 3.0\n[params]\nbeta = 0.2\nh = 0.69\nn = 3\n"
         "[budget]\npool_size = 500\nreplicas = 2\n";
  }
  REQUIRE(invoke({"--config", toml.string(), "--beta", "0.4", "--out", (dir / "c").string()}) == 0);
  const auto mc = nlohmann::json::parse(slurp((dir / "c/result.manifest.json").string()));
  CHECK(mc["config_toml"].get<std::string>().find("beta = 0.4") != std::string::npos);
  CHECK(mc["seed"] == 5);

  // environment fallback
  ::setenv("DIAMONDLAB_SEED", "31", 1);
  REQUIRE(invoke(with({"--out", (dir / "d").string()})) == 0);
  ::unsetenv("DIAMONDLAB_SEED");
  const auto md = nlohmann::json::parse(slurp((dir / "d/result.manifest.json").string()));
  CHECK(md["seed"] == 31);
  CHECK(md["seed_source"] == "env");
}

TEST_CASE("certify writes a JSON verdict") {
  const auto dir = scratch("certify");
  REQUIRE(invoke({"certify", "polymer", "--b", "4", "--s", "2", "--beta", "1.4", "--route", "gaussian-large-b", "--out",
                  dir.string()}) == 0);
  const auto j = nlohmann::json::parse(slurp((dir / "result.json").string()));
  CHECK(j["verdict"] == "certified");
  CHECK(j["kind"] == "polymer-strong");
  CHECK(j.contains("threshold"));
  CHECK(j["estimate"].contains("ci_hi"));
  CHECK(j["schema_version"] == kSchemaVersion);
}
