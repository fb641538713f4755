#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "diamondlab/estimate.hpp"
#include "diamondlab/hier_exact.hpp"

namespace diamondlab::cli {

inline constexpr int kSchemaVersion = 1;

using Cell = std::variant<double, std::int64_t, std::string>;

/// Fixed-column result table.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

/// Column names of an Estimate: prefix + {value, stderr, n_samples, seed}.
std::vector<std::string> estimate_columns(const std::string& prefix = "");
std::vector<Cell> estimate_cells(const Estimate& e);
/// Column names of a CertifiedValue: prefix + {lower, upper}.
std::vector<std::string> interval_columns(const std::string& prefix = "");
std::vector<Cell> interval_cells(const CertifiedValue& v);

/// 17 significant digits, locale independent.
std::string format_double(double x);

/// First line "# manifest <hash>", then the header, then one line per row.
/// Throws BadInput if a row's width differs from the header.
std::string to_csv(const Table& t, const std::string& manifest_hash);

/// Adds schema_version and manifest_hash to a JSON object.
nlohmann::json stamp(nlohmann::json j, const std::string& manifest_hash);

/// Table as a JSON array of row objects.
nlohmann::json table_json(const Table& t);

/// FNV-1a 64-bit digest as 16 hex digits.
std::string fnv1a_hex(const std::string& data);

/// Writes text to path, creating parent directories. Throws IoError.
void write_file(const std::string& path, const std::string& text);

}  // namespace diamondlab::cli
