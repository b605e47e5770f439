#pragma once

#include <optional>
#include <string>
#include <vector>

#include "psfm/graphalgo/normalized_cut.h"
#include "psfm/graphalgo/wcds.h"
#include "psfm/matchgraph/match_graph.h"
#include "psfm/merge/georeference.h"
#include "psfm/merge/merger.h"
#include "psfm/pipeline/config.h"
#include "psfm/pipeline/evaluation.h"
#include "psfm/sfm/incremental_mapper.h"
#include "psfm/util/expected.h"

namespace psfm {

// Verified pairs and the match graph built from them.
struct TcnResult {
  std::size_t num_candidates = 0;
  std::vector<MatchPair> verified_pairs;
  // Verified pairs that became graph edges; the only matches used later.
  std::vector<MatchPair> edge_pairs;
  MatchGraph graph;
  double seconds = 0;
};

// Retrieval, matching and verification (or the supplied matches in bypass
// mode), then the weighted match graph. Errors carry the stage name.
Expected<TcnResult> BuildTcn(const Dataset& dataset, const PipelineConfig& config);

struct ReconstructionTask {
  std::vector<image_t> images;
  bool ok = false;
  std::string error;
  Reconstruction model;
  MapperReport report;
  double seconds = 0;
};

struct PipelineResult {
  Reconstruction final_model;
  EvalMetrics metrics;
  MergeReport merge_report;
  TcnResult tcn;
  WcdsResult wcds;
  Clustering clustering;
  ReconstructionTask skeleton;
  std::vector<ReconstructionTask> clusters;
  std::optional<GeoreferenceResult> georeference;
};

struct PipelineInputs {
  Dataset dataset;
  // Optional; enables pose accuracy metrics.
  std::optional<Reconstruction> truth;
  // Optional; enables geo-referencing of the final model.
  std::vector<GcpRecord> gcps;
};

MapperOptions MapperOptionsFor(const PipelineConfig& config, std::size_t task);

// TCN construction, WCDS extraction and clustering, the skeleton and the
// clusters reconstructed on a pool of worker_count threads, merging and the
// final BA. A precomputed TCN skips the first stage.
Expected<PipelineResult> RunPipeline(const PipelineInputs& inputs,
                                     const PipelineConfig& config,
                                     const TcnResult* tcn = nullptr);

struct MonolithicResult {
  Reconstruction model;
  MapperReport report;
  EvalMetrics metrics;
  double seconds = 0;
};

// One incremental run over every image, on the same TCN edges.
Expected<MonolithicResult> RunMonolithic(const PipelineInputs& inputs,
                                         const PipelineConfig& config,
                                         const TcnResult& tcn);

// Loads dataset, matches, ground truth and GCPs from the config paths.
PipelineInputs LoadInputs(const PipelineConfig& config);

// Every intermediate artifact, the merged model and the reports.
void WriteArtifacts(const PipelineResult& result, const PipelineConfig& config,
                    const std::string& directory);

}  // namespace psfm
