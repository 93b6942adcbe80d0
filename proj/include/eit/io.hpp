#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

#include "eit/cauchy_data.hpp"
#include "eit/sparsity_recon.hpp"
#include "eit/tv_recon.hpp"

namespace eit::io {

using Json = nlohmann::json;

// Readers throw ConfigError on malformed input. Config readers start from the
// given defaults, override what is present and reject unknown keys.

Json to_json(const Mesh& mesh);
MeshPtr mesh_from_json(const Json& j);

Json to_json(const BoundaryArc& arc);
BoundaryArc arc_from_json(const Json& j);

Json to_json(const PhantomSpec& phantom);
/// Accepts either an explicit inclusion list or {"preset": "circular" |
/// "kite" | "multi_bump"}.
PhantomSpec phantom_from_json(const Json& j);

Json to_json(const Region& region);
Region region_from_json(const Json& j);

Json to_json(const PriorMask& prior);
/// A "phantom" key in place of "region" uses the phantom's support.
PriorMask prior_from_json(const Json& j, PriorMask defaults = {});

Json to_json(const DescentParams& params);
DescentParams descent_from_json(const Json& j, DescentParams defaults = {});

Json to_json(const ReconConfig& config);
ReconConfig recon_config_from_json(const Json& j, ReconConfig defaults = {});

Json to_json(const TVConfig& config);
TVConfig tv_config_from_json(const Json& j, TVConfig defaults = {});

Json to_json(const NeumannPattern& pattern);
NeumannPattern pattern_from_json(const Json& j, const BoundaryArc& arc);

Json to_json(const CauchyDataSet& data);
CauchyDataSet dataset_from_json(const Json& j);

Json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const Json& j);
std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, std::string_view text);

/// "node_index,value" rows.
std::string field_csv(const Field& field);
/// Legacy ASCII VTK unstructured grid with one point-data scalar.
std::string field_vtk(const Field& field, const std::string& name);
/// i,psi,discrepancy,penalty,step,backtracks,nnz,nodes rows.
std::string diagnostics_csv(const std::vector<IterationRecord>& log);

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t value);
/// hex64(fnv1a64(contents of path)).
std::string file_hash(const std::filesystem::path& path);

}  // namespace eit::io
