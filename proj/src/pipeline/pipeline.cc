#include "psfm/pipeline/pipeline.h"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>

#include "psfm/matchgraph/dataset_io.h"
#include "psfm/matchgraph/matching.h"
#include "psfm/matchgraph/retrieval.h"
#include "psfm/matchgraph/vocabulary.h"
#include "psfm/merge/gcp_io.h"
#include "psfm/pipeline/report.h"
#include "psfm/sfm/reconstruction_io.h"
#include "psfm/util/parallel.h"
#include "psfm/util/timer.h"

namespace psfm {
namespace {

constexpr std::size_t kVocabularySamples = 100000;

Error StageError(const std::string& stage, const std::string& message) {
  return MakeError(ErrorCode::kInvalidArgument, stage + ": " + message);
}

std::vector<image_t> AllImages(const Dataset& dataset) {
  std::vector<image_t> ids;
  for (const auto& [id, meta] : dataset.images) ids.push_back(id);
  return ids;
}

ReconstructionTask Reconstruct(std::vector<image_t> images, const Dataset& dataset,
                               const std::vector<MatchPair>& pairs,
                               const MapperOptions& options) {
  ReconstructionTask task;
  task.images = std::move(images);
  Timer timer;
  auto model = IncrementalReconstruct(task.images, dataset, pairs, options, &task.report);
  task.seconds = timer.ElapsedSeconds();
  if (model.ok()) {
    task.ok = true;
    task.model = std::move(*model);
  } else {
    task.error = model.error().message;
  }
  return task;
}

}  // namespace

MapperOptions MapperOptionsFor(const PipelineConfig& config, std::size_t task) {
  MapperOptions options;
  options.rng_seed = config.rng_seed + 1000003 * task;
  return options;
}

Expected<TcnResult> BuildTcn(const Dataset& dataset, const PipelineConfig& config) {
  const std::string stage = "TCNConstruction";
  if (dataset.images.empty()) return StageError(stage, "dataset has no images");
  Timer timer;
  TcnResult tcn;
  MatchingOptions matching;
  matching.num_workers = config.worker_count;
  matching.pose.seed = config.rng_seed;
  try {
    if (config.bypass_retrieval || !dataset.HasDescriptors()) {
      if (dataset.matches.empty()) {
        return StageError(stage, "no descriptors and no precomputed matches");
      }
      tcn.num_candidates = dataset.matches.size();
      if (config.verify_precomputed) {
        std::vector<std::optional<MatchPair>> verified(dataset.matches.size());
        ParallelFor(verified.size(), config.worker_count, [&](std::size_t i) {
          verified[i] = VerifyMatches(dataset.matches[i], dataset, matching);
        });
        for (auto& v : verified) {
          if (v) tcn.verified_pairs.push_back(std::move(*v));
        }
      } else {
        tcn.verified_pairs = dataset.matches;
      }
    } else {
      VocabularyTree::Options vocab_options;
      vocab_options.branching = config.vocab_branching;
      vocab_options.depth = config.vocab_depth;
      vocab_options.seed = config.rng_seed;
      const auto vocab = VocabularyTree::Build(
          SampleDescriptors(dataset, kVocabularySamples, config.rng_seed),
          vocab_options);
      RetrievalOptions retrieval;
      retrieval.index_features = config.index_features;
      retrieval.top_k = config.top_k;
      retrieval.num_workers = config.worker_count;
      const auto candidates = RetrievePairs(dataset.features, vocab, retrieval);
      tcn.num_candidates = candidates.size();
      tcn.verified_pairs = VerifyCandidates(candidates, dataset, matching);
    }
    MatchGraphOptions graph_options;
    graph_options.min_matches = config.min_matches;
    graph_options.r_ew = config.r_ew;
    tcn.graph = BuildMatchGraph(tcn.verified_pairs, dataset, graph_options);
  } catch (const std::exception& e) {
    return StageError(stage, e.what());
  }
  for (const auto& edge : tcn.graph.Edges()) {
    tcn.edge_pairs.push_back(tcn.verified_pairs[edge.pair_index]);
  }
  tcn.seconds = timer.ElapsedSeconds();
  return tcn;
}

Expected<PipelineResult> RunPipeline(const PipelineInputs& inputs,
                                     const PipelineConfig& config,
                                     const TcnResult* tcn) {
  try {
    config.Validate();
  } catch (const std::exception& e) {
    return StageError("Config", e.what());
  }
  Timer total;
  PipelineResult result;
  if (tcn) {
    result.tcn = *tcn;
  } else {
    auto built = BuildTcn(inputs.dataset, config);
    if (!built.ok()) return built.error();
    result.tcn = std::move(*built);
  }
  auto& seconds = result.metrics.stage_seconds;
  seconds["tcn"] = result.tcn.seconds;
  const MatchGraph& graph = result.tcn.graph;
  if (graph.NumEdges() == 0) {
    return StageError("WCDSExtraction", "match graph has no edges");
  }

  Timer timer;
  result.wcds = ExtractWcds(graph, config.r_vw);
  seconds["wcds"] = timer.ElapsedSeconds();
  timer.Restart();
  NormalizedCutOptions ncut;
  ncut.max_size = config.cluster_max_size;
  result.clustering = NormalizedCut(graph, ncut);
  seconds["clustering"] = timer.ElapsedSeconds();

  // Task 0 is the skeleton; it starts first since it is usually largest.
  timer.Restart();
  std::vector<std::vector<image_t>> subsets;
  std::vector<image_t> skeleton = result.wcds.selected_vertices;
  // A vertex adjacent to every other one dominates alone, but one image
  // cannot be reconstructed: add its strongest neighbour.
  if (skeleton.size() == 1) {
    const auto& adjacent = graph.Neighbors(skeleton[0]);
    const auto strongest = std::max_element(
        adjacent.begin(), adjacent.end(), [&](const auto& x, const auto& y) {
          return graph.Edges()[x.second].weight < graph.Edges()[y.second].weight;
        });
    if (strongest != adjacent.end()) skeleton.push_back(strongest->first);
  }
  std::sort(skeleton.begin(), skeleton.end());
  subsets.push_back(skeleton);
  for (const auto& cluster : result.clustering.clusters) subsets.push_back(cluster);
  std::vector<ReconstructionTask> tasks(subsets.size());
  ParallelFor(subsets.size(), config.worker_count, [&](std::size_t i) {
    tasks[i] = Reconstruct(subsets[i], inputs.dataset, result.tcn.edge_pairs,
                           MapperOptionsFor(config, i));
  });
  seconds["reconstruction"] = timer.ElapsedSeconds();
  result.skeleton = std::move(tasks[0]);
  result.clusters.assign(std::make_move_iterator(tasks.begin() + 1),
                         std::make_move_iterator(tasks.end()));
  if (!result.skeleton.ok) {
    return StageError("ParallelReconstruction",
                      "skeleton reconstruction failed: " + result.skeleton.error);
  }

  // Failed clusters enter as empty models and are reported as dropped.
  timer.Restart();
  std::vector<Reconstruction> cluster_models;
  for (std::size_t i = 0; i < result.clusters.size(); ++i) {
    cluster_models.push_back(result.clusters[i].ok ? result.clusters[i].model
                                                   : Reconstruction{});
    cluster_models.back().recon_id = static_cast<std::uint32_t>(i + 1);
  }
  MergeOptions merge;
  merge.ransac.threshold_px = config.merge_threshold_px;
  merge.ransac.seed = config.rng_seed;
  merge.num_workers = config.worker_count;
  const MatchStore store(
      std::make_shared<const std::vector<MatchPair>>(result.tcn.edge_pairs));
  result.final_model = MergeAll(result.skeleton.model, cluster_models, store, merge,
                                &result.merge_report);
  seconds["merge"] = timer.ElapsedSeconds();

  if (!inputs.gcps.empty()) {
    timer.Restart();
    auto geo = Georeference(result.final_model, inputs.gcps);
    if (geo.ok()) result.georeference = std::move(*geo);
    seconds["georeference"] = timer.ElapsedSeconds();
  }

  const auto stage_seconds = seconds;
  result.metrics = inputs.truth ? Evaluate(result.final_model, *inputs.truth)
                                : Evaluate(result.final_model);
  result.metrics.stage_seconds = stage_seconds;
  result.metrics.stage_seconds["total"] = total.ElapsedSeconds();
  return result;
}

Expected<MonolithicResult> RunMonolithic(const PipelineInputs& inputs,
                                         const PipelineConfig& config,
                                         const TcnResult& tcn) {
  MonolithicResult result;
  Timer timer;
  auto model = IncrementalReconstruct(AllImages(inputs.dataset), inputs.dataset,
                                      tcn.edge_pairs, MapperOptionsFor(config, 0),
                                      &result.report);
  result.seconds = timer.ElapsedSeconds();
  if (!model.ok()) return StageError("MonolithicReconstruction", model.error().message);
  result.model = std::move(*model);
  result.metrics = inputs.truth ? Evaluate(result.model, *inputs.truth)
                                : Evaluate(result.model);
  result.metrics.stage_seconds["reconstruction"] = result.seconds;
  return result;
}

PipelineInputs LoadInputs(const PipelineConfig& config) {
  if (config.dataset_path.empty()) throw std::invalid_argument("no dataset path");
  PipelineInputs inputs;
  inputs.dataset = ReadDataset(config.dataset_path);
  if (!config.matches_path.empty()) ReadMatchesInto(config.matches_path, &inputs.dataset);
  if (!config.truth_path.empty()) {
    inputs.truth = ReadReconstruction(config.truth_path, inputs.dataset);
  }
  if (!config.gcp_path.empty()) inputs.gcps = ReadGcps(config.gcp_path);
  return inputs;
}

void WriteArtifacts(const PipelineResult& result, const PipelineConfig& config,
                    const std::string& directory) {
  namespace fs = std::filesystem;
  const fs::path dir(directory);
  fs::create_directories(dir / "clusters");
  const auto open = [&](const fs::path& name) {
    std::ofstream out(dir / name);
    if (!out) throw std::runtime_error("cannot write " + (dir / name).string());
    return out;
  };
  WriteMatches(result.tcn.edge_pairs, (dir / "matches.txt").string());
  WriteMatchGraph(result.tcn.graph, (dir / "graph.txt").string());
  {
    auto out = open("wcds.txt");
    WriteWcds(result.wcds, out);
  }
  {
    auto out = open("clusters.txt");
    WriteClustering(result.clustering, out);
  }
  WriteReconstruction(result.skeleton.model, (dir / "skeleton.txt").string());
  for (std::size_t i = 0; i < result.clusters.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "cluster_%03zu.txt", i);
    WriteReconstruction(result.clusters[i].model, (dir / "clusters" / name).string());
  }
  WriteReconstruction(result.final_model, (dir / "merged.txt").string());
  {
    auto out = open("report.json");
    out << PipelineReportJson(result, config).dump(2) << '\n';
  }
  {
    auto out = open("report.txt");
    WriteReportText(result, out);
  }
  {
    auto out = open("merge_series.csv");
    WriteMergeSeriesCsv(result.merge_report, out);
  }
  {
    auto out = open("wcds_series.csv");
    WriteWcdsSeriesCsv(result.tcn.graph, out);
  }
  if (result.georeference) {
    WriteReconstruction(result.georeference->model, (dir / "georeferenced.txt").string());
    auto out = open("georeference.txt");
    out << FormatResidualTable(*result.georeference);
  }
}

}  // namespace psfm
