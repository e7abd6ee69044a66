#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "tentlab/atomic.hpp"
#include "tentlab/gamma.hpp"
#include "tentlab/hardy.hpp"
#include "tentlab/space.hpp"
#include "tentlab/tent_norms.hpp"

namespace tentlab {

using Json = nlohmann::json;

// Shortest round-tripping decimal form of v; deterministic, so repeated runs
// emit byte-identical text.
std::string format_double(double v);

Json space_to_json(const SpaceGrid& sp);
std::shared_ptr<const SpaceGrid> space_from_json(const Json& j);

Json ball_to_json(const Ball& b);
Json region_to_json(const Region& R);  // sorted (point, level) pairs
Json gamma_to_json(const GammaEstimate& e);
Json tent_report_to_json(const TentNormReport& r);

// Atoms as (ball, node-value pairs); the diagnostics block is mandatory.
Json decomposition_to_json(const Decomposition& dec);
Json l_atom_to_json(const LAtom& atom);
Json classical_atom_to_json(const ClassicalAtom& atom);

// Fixed-column CSV with stable formatting.
struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  void add_row(std::vector<std::string> row);
  std::string to_string() const;
};

std::uint64_t fnv1a(std::string_view s);

// 16 hex digits of the FNV-1a hash of the canonical (sorted-key) dump.
std::string config_hash(const Json& canonical);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace tentlab
