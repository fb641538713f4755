#include "diamondlab/cli/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <variant>

#include <toml.hpp>

#include "diamondlab/errors.hpp"
#include "diamondlab/zd_polymer.hpp"

namespace diamondlab::cli {
namespace {

using Ref = std::variant<double*, int*, std::uint64_t*, std::string*, std::optional<double>*, std::vector<double>*,
                         std::optional<std::uint64_t>*>;

struct Field {
  std::string path;
  std::string flag;
  Ref ref;
};

std::vector<Field> fields(RunConfig& c) {
  return {
      {"command", "", &c.command},
      {"seed", "seed", &c.seed},
      {"threads", "threads", &c.threads},
      {"model.b", "b", &c.model.b},
      {"model.s", "s", &c.model.s},
      {"model.placement", "placement", &c.model.placement},
      {"model.kind", "model", &c.model.kind},
      {"model.d", "d", &c.model.d},
      {"disorder.law", "law", &c.disorder.law},
      {"disorder.p", "p", &c.disorder.p},
      {"disorder.values", "atom-values", &c.disorder.values},
      {"disorder.weights", "atom-weights", &c.disorder.weights},
      {"kernel.kind", "kernel", &c.kernel.kind},
      {"kernel.q", "q", &c.kernel.q},
      {"kernel.alpha", "alpha", &c.kernel.alpha},
      {"kernel.log_power", "log-power", &c.kernel.log_power},
      {"kernel.mass", "mass", &c.kernel.mass},
      {"params.beta", "beta", &c.params.beta},
      {"params.h", "h", &c.params.h},
      {"params.gamma", "gamma", &c.params.gamma},
      {"params.theta", "theta", &c.params.theta},
      {"params.thetas", "thetas", &c.params.thetas},
      {"params.betas", "betas", &c.params.betas},
      {"params.eps", "eps", &c.params.eps},
      {"params.z", "z", &c.params.z},
      {"params.tol", "tol", &c.params.tol},
      {"params.n", "n", &c.params.n},
      {"params.n0", "n0", &c.params.n0},
      {"params.k", "k", &c.params.k},
      {"params.N", "N", &c.params.N},
      {"params.order", "order", &c.params.order},
      {"params.route", "route", &c.params.route},
      {"grid.lo", "grid-lo", &c.grid.lo},
      {"grid.hi", "grid-hi", &c.grid.hi},
      {"grid.count", "grid-count", &c.grid.count},
      {"grid.spacing", "grid-spacing", &c.grid.spacing},
      {"search.h_left", "h-left", &c.search.h_left},
      {"search.h_right", "h-right", &c.search.h_right},
      {"search.tol", "search-tol", &c.search.tol},
      {"search.level", "level", &c.search.level},
      {"search.threshold", "threshold", &c.search.threshold},
      {"budget.pool_size", "pool-size", &c.budget.pool_size},
      {"budget.replicas", "replicas", &c.budget.replicas},
      {"budget.environments", "environments", &c.budget.environments},
      {"budget.bootstrap", "bootstrap", &c.budget.bootstrap},
      {"output.dir", "out", &c.output.dir},
      {"output.stem", "stem", &c.output.stem},
      {"output.format", "format", &c.output.format},
  };
}

std::string line_of(const toml::node& n) {
  const auto& src = n.source();
  return src.begin ? " (line " + std::to_string(src.begin.line) + ")" : "";
}

double node_double(const std::string& path, const toml::node& n) {
  if (auto v = n.value<double>()) return *v;
  throw ConfigError(path, "expected a number" + line_of(n));
}

std::int64_t node_int(const std::string& path, const toml::node& n) {
  if (n.is_integer()) return n.as_integer()->get();
  throw ConfigError(path, "expected an integer" + line_of(n));
}

void assign(const std::string& path, const Ref& ref, const toml::node& n) {
  std::visit(
      [&](auto* p) {
        using T = std::remove_pointer_t<decltype(p)>;
        if constexpr (std::is_same_v<T, double>) {
          *p = node_double(path, n);
        } else if constexpr (std::is_same_v<T, std::optional<double>>) {
          *p = node_double(path, n);
        } else if constexpr (std::is_same_v<T, int>) {
          const auto v = node_int(path, n);
          if (v < INT32_MIN || v > INT32_MAX) throw ConfigError(path, "integer out of range" + line_of(n));
          *p = int(v);
        } else if constexpr (std::is_same_v<T, std::uint64_t> || std::is_same_v<T, std::optional<std::uint64_t>>) {
          const auto v = node_int(path, n);
          if (v < 0) throw ConfigError(path, "must be non-negative" + line_of(n));
          *p = std::uint64_t(v);
        } else if constexpr (std::is_same_v<T, std::string>) {
          if (auto s = n.value<std::string>()) {
            *p = *s;
          } else {
            throw ConfigError(path, "expected a string" + line_of(n));
          }
        } else {
          const auto* arr = n.as_array();
          if (!arr) throw ConfigError(path, "expected an array of numbers" + line_of(n));
          p->clear();
          for (const auto& e : *arr) p->push_back(node_double(path, e));
        }
      },
      ref);
}

std::string fmt_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  std::string s(buf, end);
  if (s.find_first_of(".en") == std::string::npos) s += ".0";
  return s;
}

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"' || ch == '\\') out += '\\';
    if (ch == '\n') {
      out += "\\n";
      continue;
    }
    out += ch;
  }
  return out + "\"";
}

// Value text as TOML, empty when the field is unset.
std::string render(const Ref& ref) {
  return std::visit(
      [](auto* p) -> std::string {
        using T = std::remove_pointer_t<decltype(p)>;
        if constexpr (std::is_same_v<T, double>) {
          return fmt_double(*p);
        } else if constexpr (std::is_same_v<T, std::optional<double>>) {
          return *p ? fmt_double(**p) : "";
        } else if constexpr (std::is_same_v<T, int> || std::is_same_v<T, std::uint64_t>) {
          return std::to_string(*p);
        } else if constexpr (std::is_same_v<T, std::optional<std::uint64_t>>) {
          return *p ? std::to_string(**p) : "";
        } else if constexpr (std::is_same_v<T, std::string>) {
          return quote(*p);
        } else {
          std::string s = "[";
          for (std::size_t i = 0; i < p->size(); ++i) s += (i ? ", " : "") + fmt_double((*p)[i]);
          return s + "]";
        }
      },
      ref);
}

double parse_double(const std::string& path, std::string_view text) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw ConfigError(path, "cannot parse '" + std::string(text) + "' as a number");
  return v;
}

long long parse_int(const std::string& path, std::string_view text) {
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw ConfigError(path, "cannot parse '" + std::string(text) + "' as an integer");
  return v;
}

void walk(RunConfig& c, const toml::table& tbl, const std::string& prefix, std::vector<Field>& fs) {
  for (const auto& [key, node] : tbl) {
    const std::string path = prefix.empty() ? std::string(key.str()) : prefix + "." + std::string(key.str());
    if (const auto* sub = node.as_table()) {
      if (!prefix.empty()) throw ConfigError(path, "nested tables are not supported" + line_of(node));
      walk(c, *sub, path, fs);
      continue;
    }
    auto it = std::find_if(fs.begin(), fs.end(), [&](const Field& f) { return f.path == path; });
    if (it == fs.end()) throw ConfigError(path, "unknown key" + line_of(node));
    assign(path, it->ref, node);
  }
}

bool is_integer(double x) { return std::floor(x) == x; }

void require(bool ok, const std::string& field, const std::string& msg) {
  if (!ok) throw ConfigError(field, msg);
}

// Runs a library validator and turns its error into a field-level ConfigError.
template <class Fn>
void check_with(const std::string& field, Fn&& fn) {
  try {
    fn();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(field, e.what());
  }
}

void validate_budget(const RunConfig& c) {
  require(c.budget.pool_size >= 2, "budget.pool_size", "must be >= 2");
  require(c.budget.replicas >= 1, "budget.replicas", "must be >= 1");
}

void validate_pinning(const RunConfig& c) {
  check_with("model", [&] { model_params(c).validate(); });
  require(c.model.kind == "pinning", "model.kind", "this command needs a pinning model");
}

}  // namespace

const std::vector<std::string>& known_commands() {
  static const std::vector<std::string> cmds{
      "anneal",         "percolation",       "renewal solve",  "renewal quenched", "renewal asymptotics",
      "pool run",       "certify pin-bond",  "certify pin-site", "certify polymer", "certify renewal",
      "zd free-energy", "zd overlap",        "zd crosscheck",  "critpoint",        "scaling",
      "oracle exact-small-n"};
  return cmds;
}

RunConfig parse_config(const std::string& text, const std::string& source) {
  toml::table tbl;
  try {
    tbl = toml::parse(text, source);
  } catch (const toml::parse_error& e) {
    throw ParseError(long(e.source().begin.line), std::string(e.description()));
  }
  RunConfig c;
  auto fs = fields(c);
  walk(c, tbl, "", fs);
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

std::string dump_config(const RunConfig& c) {
  RunConfig copy = c;
  std::string out, section;
  for (const auto& f : fields(copy)) {
    const std::string value = render(f.ref);
    if (value.empty()) continue;
    const auto dot = f.path.find('.');
    const std::string sec = dot == std::string::npos ? "" : f.path.substr(0, dot);
    const std::string key = dot == std::string::npos ? f.path : f.path.substr(dot + 1);
    if (sec != section) {
      out += "\n[" + sec + "]\n";
      section = sec;
    }
    out += key + " = " + value + "\n";
  }
  return out;
}

void set_field(RunConfig& c, const std::string& path, const std::string& value) {
  auto fs = fields(c);
  auto it = std::find_if(fs.begin(), fs.end(), [&](const Field& f) { return f.path == path; });
  if (it == fs.end()) throw ConfigError(path, "unknown field");
  std::visit(
      [&](auto* p) {
        using T = std::remove_pointer_t<decltype(p)>;
        if constexpr (std::is_same_v<T, double> || std::is_same_v<T, std::optional<double>>) {
          *p = parse_double(path, value);
        } else if constexpr (std::is_same_v<T, int>) {
          const auto v = parse_int(path, value);
          require(v >= INT32_MIN && v <= INT32_MAX, path, "integer out of range");
          *p = int(v);
        } else if constexpr (std::is_same_v<T, std::uint64_t> || std::is_same_v<T, std::optional<std::uint64_t>>) {
          const auto v = parse_int(path, value);
          require(v >= 0, path, "must be non-negative");
          *p = std::uint64_t(v);
        } else if constexpr (std::is_same_v<T, std::string>) {
          *p = value;
        } else {
          p->clear();
          std::string_view rest = value;
          while (!rest.empty()) {
            const auto comma = rest.find(',');
            p->push_back(parse_double(path, rest.substr(0, comma)));
            if (comma == std::string_view::npos) break;
            rest.remove_prefix(comma + 1);
          }
        }
      },
      it->ref);
}

std::vector<FlagInfo> flag_table() {
  RunConfig dummy;
  std::vector<FlagInfo> out;
  for (const auto& f : fields(dummy))
    if (!f.flag.empty()) out.push_back({f.path, f.flag});
  return out;
}

DiamondParams model_params(const RunConfig& c) {
  DiamondParams p;
  p.b = c.model.b;
  p.s = c.model.s;
  if (c.model.placement == "bond") {
    p.placement = Placement::bond;
  } else if (c.model.placement == "site") {
    p.placement = Placement::site;
  } else {
    throw ConfigError("model.placement", "expected bond or site, got '" + c.model.placement + "'");
  }
  if (c.model.kind == "pinning") {
    p.model = ModelKind::pinning;
  } else if (c.model.kind == "polymer") {
    p.model = ModelKind::polymer;
  } else {
    throw ConfigError("model.kind", "expected pinning or polymer, got '" + c.model.kind + "'");
  }
  return p;
}

DisorderLaw disorder_law(const RunConfig& c) {
  const auto& d = c.disorder;
  if (d.law == "gaussian") return DisorderLaw::gaussian();
  if (d.law == "rademacher") return DisorderLaw::rademacher();
  if (d.law == "bernoulli") {
    require(d.p > 0.0 && d.p < 1.0, "disorder.p", "must lie in (0, 1)");
    return DisorderLaw::bernoulli_pair(d.p);
  }
  if (d.law == "atoms") {
    require(!d.values.empty(), "disorder.values", "atoms law needs values");
    require(d.values.size() == d.weights.size(), "disorder.weights", "needs one weight per value");
    std::vector<Atom> atoms;
    for (std::size_t i = 0; i < d.values.size(); ++i) atoms.push_back({d.values[i], d.weights[i]});
    DisorderLaw out = DisorderLaw::gaussian();
    check_with("disorder", [&] { out = DisorderLaw::discrete_atoms(atoms); });
    return out;
  }
  throw ConfigError("disorder.law", "expected gaussian, rademacher, bernoulli or atoms, got '" + d.law + "'");
}

KernelSpec kernel_spec(const RunConfig& c) {
  KernelSpec k;
  if (c.kernel.kind == "srw") {
    k.kind = KernelKind::srw_return;
  } else if (c.kernel.kind == "geometric") {
    k.kind = KernelKind::geometric;
  } else if (c.kernel.kind == "power-law") {
    k.kind = KernelKind::power_law;
  } else {
    throw ConfigError("kernel.kind", "expected srw, geometric or power-law, got '" + c.kernel.kind + "'");
  }
  k.q = c.kernel.q;
  k.alpha = c.kernel.alpha;
  k.log_power = c.kernel.log_power;
  k.mass = c.kernel.mass;
  return k;
}

PolymerRoute polymer_route(const RunConfig& c) {
  if (c.params.route == "fractional-moment") return PolymerRoute::fractional_moment;
  if (c.params.route == "closed-form") return PolymerRoute::closed_form;
  if (c.params.route == "gaussian-large-b") return PolymerRoute::gaussian_large_b;
  throw ConfigError("params.route", "expected fractional-moment, closed-form or gaussian-large-b");
}

std::vector<double> h_values(const RunConfig& c) {
  const auto& g = c.grid;
  if (g.count <= 0) return {c.params.h};
  if (g.count == 1) return {g.lo};
  if (g.spacing == "geometric") return geometric_grid(g.lo, g.hi, g.count);
  std::vector<double> out(g.count);
  for (int i = 0; i < g.count; ++i) out[i] = g.lo + (g.hi - g.lo) * double(i) / double(g.count - 1);
  return out;
}

void validate(const RunConfig& c) {
  const auto& cmds = known_commands();
  if (std::find(cmds.begin(), cmds.end(), c.command) == cmds.end())
    throw ConfigError("command", c.command.empty() ? "no command given" : "unknown command '" + c.command + "'");
  require(c.threads >= 0, "threads", "must be >= 0");
  require(c.output.format == "csv" || c.output.format == "json", "output.format", "expected csv or json");
  require(!c.output.stem.empty(), "output.stem", "must not be empty");
  require(c.budget.bootstrap >= 0, "budget.bootstrap", "must be >= 0");
  if (c.grid.count > 0) {
    require(c.grid.spacing == "linear" || c.grid.spacing == "geometric", "grid.spacing",
            "expected linear or geometric");
    require(c.grid.count == 1 || c.grid.lo < c.grid.hi, "grid.hi", "must exceed grid.lo");
    if (c.grid.spacing == "geometric") require(c.grid.lo > 0.0, "grid.lo", "geometric grid needs lo > 0");
  }
  (void)disorder_law(c);
  const auto& P = c.params;
  const std::string& cmd = c.command;

  if (cmd == "anneal") {
    validate_pinning(c);
    require(P.tol > 0.0, "params.tol", "must be positive");
  } else if (cmd == "percolation") {
    require(is_integer(c.model.b) && c.model.b >= 2, "model.b", "must be an integer >= 2");
    require(c.model.s >= 2, "model.s", "must be >= 2");
  } else if (cmd.rfind("renewal", 0) == 0) {
    check_with("kernel", [&] { (void)make_kernel(kernel_spec(c)); });
    if (cmd == "renewal solve") require(P.tol > 0.0, "params.tol", "must be positive");
    if (cmd == "renewal quenched") {
      require(P.N >= 1, "params.N", "must be >= 1");
      require(c.budget.environments >= 2, "budget.environments", "must be >= 2");
    }
    if (cmd == "renewal asymptotics") {
      require(c.grid.count >= 8, "grid.count", "needs at least 8 offsets");
      require(c.grid.lo > 0.0 && c.grid.hi <= 0.1, "grid", "offsets must lie in (0, 0.1]");
    }
  } else if (cmd == "pool run") {
    check_with("model", [&] { model_params(c).validate(); });
    require(P.n >= 0, "params.n", "must be >= 0");
    validate_budget(c);
  } else if (cmd == "certify pin-bond") {
    validate_pinning(c);
    require(c.model.placement == "bond" && c.model.s == 2, "model", "pin-bond certificate needs bond placement, s = 2");
    require(c.model.b > 2.0, "model.b", "must exceed 2");
    const double lo = std::log(2.0) / std::log(c.model.b);
    require(P.gamma > lo && P.gamma < 1.0, "params.gamma", "must lie in (log 2 / log B, 1) = (" + std::to_string(lo) + ", 1)");
    require(P.n0 >= 0, "params.n0", "must be >= 0");
    validate_budget(c);
  } else if (cmd == "certify pin-site") {
    require(is_integer(c.model.b) && c.model.b >= 2, "model.b", "must be an integer >= 2");
    require(c.model.b < c.model.s, "model.b", "pin-site certificate needs b < s");
    require(P.theta && *P.theta > 0.0 && *P.theta < 1.0, "params.theta", "must be given in (0, 1)");
    require(P.n >= 0, "params.n", "must be >= 0");
    validate_budget(c);
  } else if (cmd == "certify polymer") {
    require(is_integer(c.model.b) && c.model.b >= 2, "model.b", "must be an integer >= 2");
    require(c.model.s >= 2, "model.s", "must be >= 2");
    const auto route = polymer_route(c);
    require(!P.theta || (*P.theta > 0.0 && *P.theta <= 1.0), "params.theta", "must lie in (0, 1]");
    if (route == PolymerRoute::gaussian_large_b) {
      require(c.disorder.law == "gaussian", "disorder.law", "route gaussian-large-b needs gaussian disorder");
      require(c.model.b > c.model.s, "model.b", "route gaussian-large-b needs b > s");
    }
    if (route == PolymerRoute::fractional_moment) {
      require(P.n >= 0, "params.n", "must be >= 0");
      validate_budget(c);
    }
  } else if (cmd == "certify renewal") {
    RenewalKernel K = srw_kernel();
    check_with("kernel", [&] { K = make_kernel(kernel_spec(c)); });
    require(P.k >= 2, "params.k", "must be >= 2");
    require(P.gamma > 0.0 && P.gamma < 1.0, "params.gamma", "must lie in (0, 1)");
    require((1.0 + K.alpha()) * P.gamma > 1.0, "params.gamma", "(1 + alpha) gamma must exceed 1");
    require(c.budget.environments >= 2, "budget.environments", "must be >= 2");
  } else if (cmd.rfind("zd", 0) == 0) {
    require(c.model.d == 1 || c.model.d == 2, "model.d", "must be 1 or 2");
    require(P.N >= 0 && P.N <= (c.model.d == 1 ? kZdMaxN1 : kZdMaxN2), "params.N", "outside the size cap");
    require(c.budget.replicas >= 2, "budget.replicas", "must be >= 2");
    if (cmd == "zd overlap") {
      require(c.disorder.law == "gaussian", "disorder.law", "the overlap identity needs gaussian disorder");
      require(P.eps > 0.0 && P.eps < P.beta / 2.0, "params.eps", "must lie in (0, beta / 2)");
    }
  } else if (cmd == "critpoint" || cmd == "scaling") {
    validate_pinning(c);
    validate_budget(c);
    require(c.search.tol > 0.0, "search.tol", "must be positive");
    require(c.search.level >= 1, "search.level", "must be >= 1");
    if (cmd == "critpoint") require(c.search.h_left < c.search.h_right, "search.h_right", "must exceed h_left");
    if (cmd == "scaling") {
      require(P.betas.size() >= 5, "params.betas", "needs at least 5 values");
      for (double b : P.betas) require(b > 0.0, "params.betas", "values must be positive");
    }
  } else if (cmd == "oracle exact-small-n") {
    check_with("model", [&] { model_params(c).validate(); });
    require(P.n >= 0, "params.n", "must be >= 0");
    require(std::pow(double(c.model.s), P.n) <= kExactLeafCap, "params.n", "s^n exceeds the exact-oracle cap");
    require(P.order >= 1, "params.order", "must be >= 1");
    for (double t : P.thetas) require(t > 0.0, "params.thetas", "values must be positive");
  }
}

}  // namespace diamondlab::cli
