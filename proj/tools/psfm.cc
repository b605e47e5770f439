// psfm command line: one subcommand per pipeline stage plus the full run.
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "psfm/graphalgo/normalized_cut.h"
#include "psfm/graphalgo/wcds.h"
#include "psfm/matchgraph/dataset_io.h"
#include "psfm/merge/gcp_io.h"
#include "psfm/pipeline/pipeline.h"
#include "psfm/pipeline/report.h"
#include "psfm/pipeline/synthetic.h"
#include "psfm/sfm/reconstruction_io.h"
#include "psfm/util/parallel.h"

namespace {

using namespace psfm;

// Config flags shared by the stage subcommands. A --config file is read
// first; flags given on the command line override it.
class ConfigFlags {
 public:
  void Register(CLI::App* app, bool paths) {
    app_ = app;
    app->add_option("--config", config_file_, "JSON config file")->check(CLI::ExistingFile);
    Add("--r-ew", &flags_.r_ew, &PipelineConfig::r_ew, "edge weight ratio");
    Add("--r-vw", &flags_.r_vw, &PipelineConfig::r_vw, "WCDS vertex weight ratio");
    Add("--min-matches", &flags_.min_matches, &PipelineConfig::min_matches,
        "minimum inliers for a graph edge");
    Add("--index-features", &flags_.index_features, &PipelineConfig::index_features,
        "largest-scale features indexed per image");
    Add("--top-k", &flags_.top_k, &PipelineConfig::top_k, "retrieved images per query");
    Add("--cluster-max-size", &flags_.cluster_max_size,
        &PipelineConfig::cluster_max_size, "normalized-cut cluster size bound");
    Add("--workers", &flags_.worker_count, &PipelineConfig::worker_count,
        "worker threads (default PSFM_WORKERS or hardware concurrency)");
    Add("--merge-threshold", &flags_.merge_threshold_px,
        &PipelineConfig::merge_threshold_px, "merge RANSAC threshold in pixels");
    Add("--seed", &flags_.rng_seed, &PipelineConfig::rng_seed, "random seed");
    Add("--vocab-branching", &flags_.vocab_branching, &PipelineConfig::vocab_branching,
        "vocabulary tree branching");
    Add("--vocab-depth", &flags_.vocab_depth, &PipelineConfig::vocab_depth,
        "vocabulary tree depth");
    Add("--bypass-retrieval", &flags_.bypass_retrieval,
        &PipelineConfig::bypass_retrieval, "use the supplied matches");
    Add("--verify-precomputed", &flags_.verify_precomputed,
        &PipelineConfig::verify_precomputed, "verify supplied matches (bypass mode)");
    if (!paths) return;
    Add("--dataset", &flags_.dataset_path, &PipelineConfig::dataset_path, "dataset file");
    Add("--matches", &flags_.matches_path, &PipelineConfig::matches_path,
        "extra MATCH records");
    Add("--gcps", &flags_.gcp_path, &PipelineConfig::gcp_path, "GCP file");
    Add("--truth", &flags_.truth_path, &PipelineConfig::truth_path,
        "ground-truth reconstruction");
    Add("--out", &flags_.output_dir, &PipelineConfig::output_dir, "output directory");
  }

  PipelineConfig Resolve() const {
    PipelineConfig config = config_file_.empty() ? PipelineConfig::Defaults()
                                                 : ReadConfig(config_file_);
    for (const auto& apply : appliers_) apply(config);
    config.Validate();
    return config;
  }

 private:
  template <typename T>
  void Add(const std::string& name, T* target, T PipelineConfig::*field,
           const std::string& help) {
    CLI::Option* opt = app_->add_option(name, *target, help);
    appliers_.push_back([opt, target, field](PipelineConfig& config) {
      if (opt->count() > 0) config.*field = *target;
    });
  }

  CLI::App* app_ = nullptr;
  std::string config_file_;
  PipelineConfig flags_;
  std::vector<std::function<void(PipelineConfig&)>> appliers_;
};

Dataset LoadDataset(const std::string& path, const std::string& matches) {
  Dataset dataset = ReadDataset(path);
  if (!matches.empty()) ReadMatchesInto(matches, &dataset);
  return dataset;
}

// Image ids from "1,2,3", or the ids of a WCDS / CLUSTER line in a file.
std::vector<image_t> ReadImageList(const std::string& ids, const std::string& file,
                                   int cluster) {
  std::vector<image_t> out;
  if (!ids.empty()) {
    std::stringstream ss(ids);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(std::stoul(tok));
    return out;
  }
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot read " + file);
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "CLUSTER") {
      std::string index;
      ls >> index;
      if (std::stoi(index) != cluster) continue;
    } else if (tag != "WCDS") {
      continue;
    }
    image_t id;
    while (ls >> id) out.push_back(id);
    return out;
  }
  throw std::runtime_error("no image list found in " + file);
}

void WriteText(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

int Fail(const std::string& message) {
  std::cerr << "error: " << message << '\n';
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Parallel structure from motion over a weighted connected dominating set"};
  app.require_subcommand(1);

  // synth
  SyntheticConfig synth;
  std::string synth_pattern = "nadir", synth_out;
  bool synth_standard = false;
  auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic dataset");
  synth_cmd->add_flag("--standard", synth_standard,
                      "120 nadir images, 4000 points, 0.4 px, 10 GCPs (flags below override)");
  synth_cmd->add_option("--pattern", synth_pattern, "nadir | oblique | orbit");
  synth_cmd->add_option("--images", synth.image_count);
  synth_cmd->add_option("--points", synth.point_count);
  synth_cmd->add_option("--buildings", synth.building_count);
  synth_cmd->add_option("--noise", synth.noise_px, "keypoint noise sigma in pixels");
  synth_cmd->add_option("--outliers", synth.outlier_rate, "fraction of wrong matches");
  synth_cmd->add_option("--gcps", synth.gcp_count);
  synth_cmd->add_option("--controls", synth.control_count);
  synth_cmd->add_option("--seed", synth.seed);
  synth_cmd->add_option("--out", synth_out, "output directory")->required();

  // graph
  ConfigFlags graph_flags;
  std::string graph_out, graph_matches_out;
  auto* graph_cmd = app.add_subcommand("graph", "build the verified match graph");
  graph_flags.Register(graph_cmd, true);
  graph_cmd->add_option("--graph-out", graph_out, "match graph file")->required();
  graph_cmd->add_option("--matches-out", graph_matches_out, "edge matches file");

  // wcds
  std::string wcds_graph, wcds_out;
  double wcds_r_vw = 0.5;
  auto* wcds_cmd = app.add_subcommand("wcds", "extract the WCDS skeleton");
  wcds_cmd->add_option("--graph", wcds_graph)->required()->check(CLI::ExistingFile);
  wcds_cmd->add_option("--r-vw", wcds_r_vw);
  wcds_cmd->add_option("--out", wcds_out)->required();

  // cluster
  std::string cluster_graph, cluster_out;
  std::size_t cluster_max = 50;
  auto* cluster_cmd = app.add_subcommand("cluster", "normalized-cut clustering");
  cluster_cmd->add_option("--graph", cluster_graph)->required()->check(CLI::ExistingFile);
  cluster_cmd->add_option("--cluster-max-size", cluster_max);
  cluster_cmd->add_option("--out", cluster_out)->required();

  // reconstruct
  std::string rec_dataset, rec_matches, rec_ids, rec_list, rec_out;
  int rec_cluster = -1;
  std::uint64_t rec_seed = 0;
  auto* rec_cmd = app.add_subcommand("reconstruct", "incremental reconstruction of an image set");
  rec_cmd->add_option("--dataset", rec_dataset)->required()->check(CLI::ExistingFile);
  rec_cmd->add_option("--matches", rec_matches, "matches to use (e.g. graph --matches-out)");
  rec_cmd->add_option("--images", rec_ids, "comma-separated image ids");
  rec_cmd->add_option("--list", rec_list, "WCDS or clustering file");
  rec_cmd->add_option("--cluster", rec_cluster, "cluster index within --list");
  rec_cmd->add_option("--seed", rec_seed);
  rec_cmd->add_option("--out", rec_out)->required();

  // merge
  std::string merge_dataset, merge_matches, merge_global, merge_out, merge_report;
  std::vector<std::string> merge_clusters;
  double merge_threshold = 1.8;
  std::uint64_t merge_seed = 0;
  int merge_workers = DefaultWorkerCount();
  auto* merge_cmd = app.add_subcommand("merge", "merge cluster reconstructions into a global one");
  merge_cmd->add_option("--dataset", merge_dataset)->required()->check(CLI::ExistingFile);
  merge_cmd->add_option("--matches", merge_matches);
  merge_cmd->add_option("--global", merge_global)->required()->check(CLI::ExistingFile);
  merge_cmd->add_option("--clusters", merge_clusters)->required()->check(CLI::ExistingFile);
  merge_cmd->add_option("--merge-threshold", merge_threshold);
  merge_cmd->add_option("--seed", merge_seed);
  merge_cmd->add_option("--workers", merge_workers);
  merge_cmd->add_option("--out", merge_out)->required();
  merge_cmd->add_option("--report", merge_report, "merge report JSON");

  // pipeline
  ConfigFlags pipe_flags;
  auto* pipe_cmd = app.add_subcommand("pipeline", "run every stage and write all artifacts");
  pipe_flags.Register(pipe_cmd, true);

  // eval
  std::string eval_dataset, eval_recon, eval_truth;
  auto* eval_cmd = app.add_subcommand("eval", "metrics of a reconstruction");
  eval_cmd->add_option("--dataset", eval_dataset)->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--recon", eval_recon)->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--truth", eval_truth)->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*synth_cmd) {
      SyntheticConfig config = synth;
      if (synth_standard) {
        config = StandardSyntheticConfig();
        for (const auto* opt : synth_cmd->get_options()) {
          if (opt->count() == 0) continue;
          const std::string name = opt->get_name();
          if (name == "--images") config.image_count = synth.image_count;
          if (name == "--points") config.point_count = synth.point_count;
          if (name == "--buildings") config.building_count = synth.building_count;
          if (name == "--noise") config.noise_px = synth.noise_px;
          if (name == "--outliers") config.outlier_rate = synth.outlier_rate;
          if (name == "--gcps") config.gcp_count = synth.gcp_count;
          if (name == "--controls") config.control_count = synth.control_count;
          if (name == "--seed") config.seed = synth.seed;
        }
      }
      if (synth_cmd->count("--pattern") > 0 || !synth_standard) {
        config.pattern = ParseCameraPattern(synth_pattern);
      }
      WriteSynthetic(GenerateSynthetic(config), synth_out);
      return 0;
    }
    if (*graph_cmd) {
      const PipelineConfig config = graph_flags.Resolve();
      const Dataset dataset = LoadDataset(config.dataset_path, config.matches_path);
      auto tcn = BuildTcn(dataset, config);
      if (!tcn.ok()) return Fail(tcn.error().message);
      WriteMatchGraph(tcn->graph, graph_out);
      if (!graph_matches_out.empty()) WriteMatches(tcn->edge_pairs, graph_matches_out);
      std::cout << tcn->graph.NumVertices() << " images, " << tcn->graph.NumEdges()
                << " edges\n";
      return 0;
    }
    if (*wcds_cmd) {
      const WcdsResult wcds = ExtractWcds(ReadMatchGraph(wcds_graph), wcds_r_vw);
      std::ofstream out(wcds_out);
      WriteWcds(wcds, out);
      std::cout << wcds.selected_vertices.size() << " selected\n";
      return 0;
    }
    if (*cluster_cmd) {
      NormalizedCutOptions options;
      options.max_size = cluster_max;
      const Clustering clustering = NormalizedCut(ReadMatchGraph(cluster_graph), options);
      std::ofstream out(cluster_out);
      WriteClustering(clustering, out);
      std::cout << clustering.clusters.size() << " clusters\n";
      return 0;
    }
    if (*rec_cmd) {
      const Dataset dataset = LoadDataset(rec_dataset, rec_matches);
      std::vector<image_t> images;
      if (rec_ids.empty() && rec_list.empty()) {
        for (const auto& [id, meta] : dataset.images) images.push_back(id);
      } else {
        images = ReadImageList(rec_ids, rec_list, rec_cluster);
      }
      PipelineConfig config;
      config.rng_seed = rec_seed;
      auto model = IncrementalReconstruct(images, dataset, dataset.matches,
                                          MapperOptionsFor(config, 0));
      if (!model.ok()) return Fail(model.error().message);
      WriteReconstruction(*model, rec_out);
      std::cout << model->NumImages() << " of " << images.size() << " images registered, "
                << model->NumPoints() << " points\n";
      return 0;
    }
    if (*merge_cmd) {
      const Dataset dataset = LoadDataset(merge_dataset, merge_matches);
      const Reconstruction global = ReadReconstruction(merge_global, dataset);
      std::vector<Reconstruction> clusters;
      for (const auto& path : merge_clusters) {
        clusters.push_back(ReadReconstruction(path, dataset));
      }
      MergeOptions options;
      options.ransac.threshold_px = merge_threshold;
      options.ransac.seed = merge_seed;
      options.num_workers = merge_workers;
      MergeReport report;
      const MatchStore store(std::make_shared<const std::vector<MatchPair>>(dataset.matches));
      const Reconstruction merged = MergeAll(global, clusters, store, options, &report);
      WriteReconstruction(merged, merge_out);
      if (!merge_report.empty()) WriteText(merge_report, MergeReportJson(report).dump(2) + "\n");
      std::cout << report.steps.size() << " merged, " << report.dropped.size() << " dropped, "
                << merged.NumImages() << " images\n";
      return 0;
    }
    if (*pipe_cmd) {
      const PipelineConfig config = pipe_flags.Resolve();
      if (config.output_dir.empty()) return Fail("--out is required");
      const PipelineInputs inputs = LoadInputs(config);
      auto result = RunPipeline(inputs, config);
      if (!result.ok()) return Fail(result.error().message);
      WriteArtifacts(*result, config, config.output_dir);
      WriteReportText(*result, std::cout);
      return 0;
    }
    if (*eval_cmd) {
      const Dataset dataset = ReadDataset(eval_dataset);
      const Reconstruction recon = ReadReconstruction(eval_recon, dataset);
      const EvalMetrics metrics = eval_truth.empty()
                                      ? Evaluate(recon)
                                      : Evaluate(recon, ReadReconstruction(eval_truth, dataset));
      std::cout << ToJson(metrics).dump(2) << '\n';
      return 0;
    }
  } catch (const std::exception& e) {
    return Fail(e.what());
  }
  return 0;
}
