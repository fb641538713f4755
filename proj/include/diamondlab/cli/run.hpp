#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "diamondlab/cli/config.hpp"

namespace diamondlab::cli {

/// Library version string recorded in manifests.
const char* version();

/// Seed from the config, else DIAMONDLAB_SEED, else 1. `source` receives
/// "config", "env" or "default".
std::uint64_t resolve_seed(const RunConfig& c, std::string* source = nullptr);

/// Digest of the version and the canonical config with the seed resolved,
/// excluding the output section and wall time, so reruns share the hash.
std::string manifest_hash(const RunConfig& resolved);

struct RunOutcome {
  std::string manifest_hash;
  std::string manifest_path;
  std::vector<std::string> artifacts;
  std::uint64_t seed = 0;
};

/// Validates, computes, then writes the manifest followed by the result
/// files under output.dir. Library errors propagate.
RunOutcome run(const RunConfig& c);

/// Command-line front end. Exit status 0 on success, 1 on a computation
/// error, 2 on a usage or configuration error.
int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace diamondlab::cli
