#pragma once

#include <cstdint>
#include <string>
#include <utility>

#include <json.hpp>

#include "ndar/montecarlo.hpp"

// File formats and JSON views.  All writers are timestamp-free so a rerun
// with the same inputs reproduces every output byte for byte.

namespace ndar {

// Adjacency input, either layout detected from the shape of the file:
//   dense  - n rows of n comma-separated 0/1 entries
//   edges  - rows of "src,dst" 0-based node ids, optional "src,dst" header
// An edge list may carry an "n = <count>" comment line ("# n = 61") to pin
// the node count; otherwise the largest id + 1 is used.
Network read_network(const std::string& path);
void write_network_dense(const Network& net, const std::string& path);
void write_network_edges(const Network& net, const std::string& path);

// Degree counts and density of a generated network, as stable JSON.
nlohmann::ordered_json network_summary(const Network& net);

// Panel CSV: one row per time point, one column per node, full double
// precision.  A sidecar "<path>.meta.json" records how many leading rows
// are presample context; reading without the sidecar treats every row as
// observation.
void write_panel(const Panel<double>& panel, const std::string& path);
Panel<double> read_panel(const std::string& path);

// Parameter sets as {"alpha": [...], "beta": [...], "omega": x, ...}.
nlohmann::ordered_json params_to_json(const NdarParams<double>& params);
NdarParams<double> params_from_json(const nlohmann::json& j);
NdarParams<double> read_params(const std::string& path);
void write_params(const NdarParams<double>& params, const std::string& path);

nlohmann::ordered_json fit_to_json(const FitResult& fit,
                                   bool include_covariance = true);
nlohmann::ordered_json selection_to_json(const SelectionResult& sel);
nlohmann::ordered_json mc_report_to_json(const McReport& report);
nlohmann::ordered_json bic_report_to_json(const BicReport& report);

// Study description consumed by the batch runner; see read_mc_design.
struct McStudySpec {
  bool bic = false;  // false: fixed-order estimation study
  McDesign design;
  int r_max = 3;
  PenaltyScale penalty = PenaltyScale::log_t;
};
McStudySpec read_mc_design(const std::string& path);

NetworkConfig network_config_from_json(const nlohmann::json& j);

// 64-bit FNV-1a, for quick content digests in logs and tests.
std::uint64_t fnv1a(const void* data, std::size_t size);
std::uint64_t file_digest(const std::string& path);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace ndar
