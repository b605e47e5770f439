#pragma once

#include <cstdint>
#include <string>

#include "json.hpp"

namespace psfm {

struct PipelineConfig {
  // Edge weight blend of inlier count and hull coverage.
  double r_ew = 0.5;
  // WCDS blend of white-neighbour count and edge weight.
  double r_vw = 0.5;
  std::size_t min_matches = 50;
  int index_features = 1500;
  int top_k = 100;
  std::size_t cluster_max_size = 50;
  int worker_count = 1;
  double merge_threshold_px = 1.8;
  std::uint64_t rng_seed = 0;

  int vocab_branching = 8;
  int vocab_depth = 3;
  // Use the dataset's MATCH records (or matches_path) instead of retrieval
  // and descriptor matching.
  bool bypass_retrieval = false;
  // Geometric verification of supplied matches in bypass mode.
  bool verify_precomputed = true;

  std::string dataset_path;
  std::string matches_path;
  std::string gcp_path;
  std::string truth_path;
  std::string output_dir;

  // Same values as a default-constructed config, worker_count from the
  // environment.
  static PipelineConfig Defaults();
  // Throws std::invalid_argument naming the first bad field.
  void Validate() const;
};

nlohmann::json ToJson(const PipelineConfig& config);
// Fields absent from `json` keep their defaults; unknown keys throw.
PipelineConfig ConfigFromJson(const nlohmann::json& json);
PipelineConfig ReadConfig(const std::string& path);

}  // namespace psfm
