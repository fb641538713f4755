#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "diamondlab/certificates.hpp"
#include "diamondlab/disorder.hpp"
#include "diamondlab/hier_exact.hpp"
#include "diamondlab/renewal.hpp"

namespace diamondlab::cli {

struct ModelSection {
  double b = 2.0;
  int s = 2;
  std::string placement = "bond";  // bond | site
  std::string kind = "pinning";    // pinning | polymer
  int d = 1;                       // lattice dimension for zd commands
  bool operator==(const ModelSection&) const = default;
};

struct DisorderSection {
  std::string law = "gaussian";  // gaussian | rademacher | bernoulli | atoms
  double p = 0.5;                // bernoulli
  std::vector<double> values;    // atoms
  std::vector<double> weights;
  bool operator==(const DisorderSection&) const = default;
};

struct KernelSection {
  std::string kind = "srw";  // srw | geometric | power-law
  double q = 0.5;
  double alpha = 0.5;
  double log_power = 0.0;
  double mass = 1.0;
  bool operator==(const KernelSection&) const = default;
};

struct ParamsSection {
  double beta = 0.0;
  double h = 0.0;
  double gamma = 0.8;
  std::optional<double> theta;
  std::vector<double> thetas;  // oracle fractional moments
  std::vector<double> betas;   // scaling grid
  double eps = 0.05;
  double z = 3.0;
  double tol = 1e-9;
  int n = 10;
  int n0 = 0;
  int k = 16;
  int N = 64;
  int order = 24;
  std::string route = "fractional-moment";  // fractional-moment | closed-form | gaussian-large-b
  bool operator==(const ParamsSection&) const = default;
};

struct GridSection {
  double lo = 0.0;
  double hi = 0.0;
  int count = 0;  // 0: use params.h alone
  std::string spacing = "linear";  // linear | geometric
  bool operator==(const GridSection&) const = default;
};

struct SearchSection {
  double h_left = 0.0;
  double h_right = 0.0;
  double tol = 1e-3;
  int level = 14;
  std::optional<double> threshold;
  bool operator==(const SearchSection&) const = default;
};

struct BudgetSection {
  std::uint64_t pool_size = 100000;
  int replicas = 32;
  int environments = 10000;
  int bootstrap = 1000;
  bool operator==(const BudgetSection&) const = default;
};

struct OutputSection {
  std::string dir = ".";
  std::string stem = "result";
  std::string format = "csv";  // csv | json
  bool operator==(const OutputSection&) const = default;
};

struct RunConfig {
  std::string command;
  std::optional<std::uint64_t> seed;
  int threads = 0;  // 0: hardware concurrency
  ModelSection model;
  DisorderSection disorder;
  KernelSection kernel;
  ParamsSection params;
  GridSection grid;
  SearchSection search;
  BudgetSection budget;
  OutputSection output;
  bool operator==(const RunConfig&) const = default;
};

/// Commands accepted by the dispatcher, as space-separated words.
const std::vector<std::string>& known_commands();

/// Parses TOML text. Unknown keys and type mismatches are ConfigError;
/// syntax errors are ParseError with the source line.
RunConfig parse_config(const std::string& text, const std::string& source = "<string>");

/// Throws IoError if the file cannot be read.
RunConfig load_config(const std::string& path);

/// Canonical TOML: every field, fixed order. parse_config(dump_config(c)) == c.
std::string dump_config(const RunConfig& c);

/// Assigns one field addressed by its TOML path ("params.beta") from text.
void set_field(RunConfig& c, const std::string& path, const std::string& value);

struct FlagInfo {
  std::string path;  // TOML path
  std::string flag;  // command-line long option, without dashes
};
/// Every overridable field with its command-line flag.
std::vector<FlagInfo> flag_table();

/// Checks the command and every precondition the command will hit, before
/// any computation. Throws ConfigError naming the field.
void validate(const RunConfig& c);

DiamondParams model_params(const RunConfig& c);
DisorderLaw disorder_law(const RunConfig& c);
KernelSpec kernel_spec(const RunConfig& c);
PolymerRoute polymer_route(const RunConfig& c);
std::vector<double> h_values(const RunConfig& c);

}  // namespace diamondlab::cli
