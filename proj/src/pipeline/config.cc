#include "psfm/pipeline/config.h"

#include <fstream>
#include <stdexcept>

#include "psfm/util/parallel.h"

namespace psfm {

PipelineConfig PipelineConfig::Defaults() {
  PipelineConfig config;
  config.worker_count = DefaultWorkerCount();
  return config;
}

void PipelineConfig::Validate() const {
  const auto fail = [](const std::string& what) {
    throw std::invalid_argument("config: " + what);
  };
  if (!(r_ew >= 0 && r_ew <= 1)) fail("r_ew must be in [0, 1]");
  if (!(r_vw >= 0 && r_vw <= 1)) fail("r_vw must be in [0, 1]");
  if (min_matches < 2) fail("min_matches must be >= 2");
  if (index_features < 1) fail("index_features must be >= 1");
  if (top_k < 1) fail("top_k must be >= 1");
  if (cluster_max_size < 2) fail("cluster_max_size must be >= 2");
  if (worker_count < 1) fail("worker_count must be >= 1");
  if (!(merge_threshold_px > 0)) fail("merge_threshold_px must be > 0");
  if (vocab_branching < 2) fail("vocab_branching must be >= 2");
  if (vocab_depth < 0) fail("vocab_depth must be >= 0");
}

nlohmann::json ToJson(const PipelineConfig& c) {
  return {{"r_ew", c.r_ew},
          {"r_vw", c.r_vw},
          {"min_matches", c.min_matches},
          {"index_features", c.index_features},
          {"top_k", c.top_k},
          {"cluster_max_size", c.cluster_max_size},
          {"worker_count", c.worker_count},
          {"merge_threshold_px", c.merge_threshold_px},
          {"rng_seed", c.rng_seed},
          {"vocab_branching", c.vocab_branching},
          {"vocab_depth", c.vocab_depth},
          {"bypass_retrieval", c.bypass_retrieval},
          {"verify_precomputed", c.verify_precomputed},
          {"dataset_path", c.dataset_path},
          {"matches_path", c.matches_path},
          {"gcp_path", c.gcp_path},
          {"truth_path", c.truth_path},
          {"output_dir", c.output_dir}};
}

PipelineConfig ConfigFromJson(const nlohmann::json& json) {
  if (!json.is_object()) throw std::invalid_argument("config: expected an object");
  PipelineConfig c = PipelineConfig::Defaults();
  const nlohmann::json known = ToJson(c);
  for (const auto& [key, value] : json.items()) {
    if (!known.contains(key)) {
      throw std::invalid_argument("config: unknown key '" + key + "'");
    }
  }
  const auto read = [&](const char* key, auto& field) {
    if (json.contains(key)) json.at(key).get_to(field);
  };
  read("r_ew", c.r_ew);
  read("r_vw", c.r_vw);
  read("min_matches", c.min_matches);
  read("index_features", c.index_features);
  read("top_k", c.top_k);
  read("cluster_max_size", c.cluster_max_size);
  read("worker_count", c.worker_count);
  read("merge_threshold_px", c.merge_threshold_px);
  read("rng_seed", c.rng_seed);
  read("vocab_branching", c.vocab_branching);
  read("vocab_depth", c.vocab_depth);
  read("bypass_retrieval", c.bypass_retrieval);
  read("verify_precomputed", c.verify_precomputed);
  read("dataset_path", c.dataset_path);
  read("matches_path", c.matches_path);
  read("gcp_path", c.gcp_path);
  read("truth_path", c.truth_path);
  read("output_dir", c.output_dir);
  c.Validate();
  return c;
}

PipelineConfig ReadConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return ConfigFromJson(nlohmann::json::parse(in));
}

}  // namespace psfm
