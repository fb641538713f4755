#include "diamondlab/cli/emit.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "diamondlab/errors.hpp"

namespace diamondlab::cli {
namespace {

std::vector<std::string> prefixed(const std::string& prefix, std::initializer_list<const char*> names) {
  std::vector<std::string> out;
  for (const char* n : names) out.push_back(prefix + n);
  return out;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

std::string cell_text(const Cell& c) {
  if (const auto* d = std::get_if<double>(&c)) return format_double(*d);
  if (const auto* i = std::get_if<std::int64_t>(&c)) return std::to_string(*i);
  return csv_field(std::get<std::string>(c));
}

}  // namespace

std::vector<std::string> estimate_columns(const std::string& prefix) {
  return prefixed(prefix, {"value", "stderr", "n_samples", "seed"});
}

std::vector<Cell> estimate_cells(const Estimate& e) {
  return {e.value, e.stderr_, std::int64_t(e.n_samples), std::to_string(e.seed)};
}

std::vector<std::string> interval_columns(const std::string& prefix) { return prefixed(prefix, {"lower", "upper"}); }

std::vector<Cell> interval_cells(const CertifiedValue& v) { return {v.lower, v.upper}; }

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (x == 0.0) return "0";
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
  return std::string(buf, end);
}

std::string to_csv(const Table& t, const std::string& manifest_hash) {
  std::string out = "# manifest " + manifest_hash + "\n";
  for (std::size_t i = 0; i < t.columns.size(); ++i) out += (i ? "," : "") + csv_field(t.columns[i]);
  out += "\n";
  for (const auto& row : t.rows) {
    if (row.size() != t.columns.size()) throw BadInput("csv row width differs from the header");
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + cell_text(row[i]);
    out += "\n";
  }
  return out;
}

nlohmann::json stamp(nlohmann::json j, const std::string& manifest_hash) {
  j["schema_version"] = kSchemaVersion;
  j["manifest_hash"] = manifest_hash;
  return j;
}

nlohmann::json table_json(const Table& t) {
  auto rows = nlohmann::json::array();
  for (const auto& row : t.rows) {
    nlohmann::json r = nlohmann::json::object();
    for (std::size_t i = 0; i < t.columns.size() && i < row.size(); ++i)
      std::visit([&](const auto& v) { r[t.columns[i]] = v; }, row[i]);
    rows.push_back(std::move(r));
  }
  return rows;
}

std::string fnv1a_hex(const std::string& data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : data) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void write_file(const std::string& path, const std::string& text) {
  namespace fs = std::filesystem;
  std::error_code ec;
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path(), ec);
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << text;
  out.close();
  if (!out) throw IoError("failed writing " + path);
}

}  // namespace diamondlab::cli
