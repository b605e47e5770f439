#include "psfm/pipeline/report.h"

#include <cstdio>

namespace psfm {
namespace {

nlohmann::json Vec(const Eigen::Vector3d& v) { return {v.x(), v.y(), v.z()}; }

nlohmann::json Loaded(const LoadedMatches& l) {
  return {{"pairs", l.pairs}, {"matches", l.matches}};
}

nlohmann::json TaskJson(const ReconstructionTask& task) {
  nlohmann::json j = {{"images", task.images.size()},
                      {"ok", task.ok},
                      {"registered", task.model.NumImages()},
                      {"points", task.model.NumPoints()},
                      {"timing", {{"seconds", task.seconds}}}};
  if (!task.ok) j["error"] = task.error;
  if (task.model.NumPoints() > 0) {
    j["mean_reprojection_error_px"] = task.model.MeanReprojectionError();
  }
  return j;
}

nlohmann::json BaJson(const BaReport& ba) {
  return {{"initial_mean_error_px", ba.initial_mean_error},
          {"final_mean_error_px", ba.final_mean_error},
          {"iterations", ba.iterations},
          {"converged", ba.converged}};
}

}  // namespace

nlohmann::json MergeReportJson(const MergeReport& report) {
  nlohmann::json steps = nlohmann::json::array();
  for (const auto& s : report.steps) {
    nlohmann::json counts = nlohmann::json::object();
    for (const auto& [index, count] : s.candidate_counts) {
      counts[std::to_string(index)] = count;
    }
    steps.push_back({{"cluster", s.cluster_index},
                     {"common_points", s.common_points},
                     {"inliers", s.num_inliers},
                     {"inlier_ratio", s.inlier_ratio},
                     {"mse", s.mse},
                     {"images_added", s.images_added},
                     {"points_fused", s.points_fused},
                     {"candidate_counts", counts},
                     {"loaded",
                      {{"on_demand", Loaded(s.on_demand)},
                       {"pairwise", Loaded(s.pairwise)},
                       {"all_dataset", Loaded(s.all_dataset)}}}});
  }
  nlohmann::json dropped = nlohmann::json::array();
  for (const std::size_t index : report.dropped) {
    const auto it = report.dropped_common_points.find(index);
    dropped.push_back({{"cluster", index},
                       {"common_points",
                        it == report.dropped_common_points.end() ? 0 : it->second}});
  }
  return {{"steps", steps},
          {"dropped", dropped},
          {"failed_attempts", report.failed_attempts},
          {"pruned_observations", report.pruned_observations},
          {"mean_error_before_ba_px", report.mean_error_before_ba},
          {"mean_error_after_ba_px", report.mean_error_after_ba},
          {"final_ba", BaJson(report.final_ba)}};
}

nlohmann::json GeoreferenceJson(const GeoreferenceResult& result) {
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& r : result.check_residuals) {
    checks.push_back({{"gcp", r.gcp_id}, {"delta", Vec(r.delta)}});
  }
  return {{"controls", result.num_controls},
          {"checks", checks},
          {"max_abs", Vec(result.stats.max)},
          {"mean_abs", Vec(result.stats.mean)},
          {"std_dev_abs", Vec(result.stats.std_dev)},
          {"ba", BaJson(result.ba)}};
}

nlohmann::json PipelineReportJson(const PipelineResult& result,
                                  const PipelineConfig& config) {
  nlohmann::json clusters = nlohmann::json::array();
  for (std::size_t i = 0; i < result.clusters.size(); ++i) {
    nlohmann::json c = TaskJson(result.clusters[i]);
    c["index"] = i;
    clusters.push_back(std::move(c));
  }
  nlohmann::json j = {
      {"config", ToJson(config)},
      {"tcn",
       {{"candidates", result.tcn.num_candidates},
        {"verified_pairs", result.tcn.verified_pairs.size()},
        {"vertices", result.tcn.graph.NumVertices()},
        {"edges", result.tcn.graph.NumEdges()},
        {"timing", {{"seconds", result.tcn.seconds}}}}},
      {"wcds",
       {{"selected", result.wcds.selected_vertices.size()},
        {"ratio", result.tcn.graph.NumVertices()
                      ? static_cast<double>(result.wcds.selected_vertices.size()) /
                            result.tcn.graph.NumVertices()
                      : 0.0}}},
      {"clustering",
       {{"clusters", result.clustering.clusters.size()},
        {"max_size", result.clustering.max_size}}},
      {"skeleton", TaskJson(result.skeleton)},
      {"cluster_reconstructions", clusters},
      {"merge", MergeReportJson(result.merge_report)},
      {"metrics", ToJson(result.metrics)}};
  if (result.georeference) j["georeference"] = GeoreferenceJson(*result.georeference);
  return j;
}

void WriteReportText(const PipelineResult& result, std::ostream& out) {
  char line[256];
  const auto& m = result.metrics;
  std::snprintf(line, sizeof(line), "images in graph      %zu (%zu edges)\n",
                result.tcn.graph.NumVertices(), result.tcn.graph.NumEdges());
  out << line;
  std::snprintf(line, sizeof(line), "skeleton images      %zu (%zu registered)\n",
                result.skeleton.images.size(), result.skeleton.model.NumImages());
  out << line;
  std::snprintf(line, sizeof(line), "clusters             %zu (max size %zu)\n",
                result.clustering.clusters.size(), result.clustering.max_size);
  out << line;
  std::snprintf(line, sizeof(line), "merged / dropped     %zu / %zu\n",
                result.merge_report.steps.size(), result.merge_report.dropped.size());
  out << line;
  std::snprintf(line, sizeof(line), "registered images    %zu\n", m.registered_images);
  out << line;
  std::snprintf(line, sizeof(line), "points               %zu\n", m.num_points);
  out << line;
  std::snprintf(line, sizeof(line), "mean reproj. error   %.3f px\n",
                m.mean_reprojection_error);
  out << line;
  if (m.aligned) {
    std::snprintf(line, sizeof(line), "position RMSE        %.4f (%zu cameras)\n",
                  m.position_rmse, m.aligned_cameras);
    out << line;
    std::snprintf(line, sizeof(line), "rotation error       %.4f mean, %.4f max deg\n",
                  m.rotation_error_mean_deg, m.rotation_error_max_deg);
    out << line;
  }
  out << "timing (s)\n";
  for (const auto& [stage, seconds] : m.stage_seconds) {
    std::snprintf(line, sizeof(line), "  %-18s %.3f\n", stage.c_str(), seconds);
    out << line;
  }
  if (result.georeference) {
    out << "check points\n" << FormatResidualTable(*result.georeference);
  }
}

void WriteMergeSeriesCsv(const MergeReport& report, std::ostream& out) {
  out << "step,cluster,on_demand_pairs,on_demand_matches,pairwise_pairs,"
         "pairwise_matches,all_dataset_pairs,all_dataset_matches\n";
  for (std::size_t i = 0; i < report.steps.size(); ++i) {
    const auto& s = report.steps[i];
    out << i << ',' << s.cluster_index << ',' << s.on_demand.pairs << ','
        << s.on_demand.matches << ',' << s.pairwise.pairs << ',' << s.pairwise.matches
        << ',' << s.all_dataset.pairs << ',' << s.all_dataset.matches << '\n';
  }
}

void WriteWcdsSeriesCsv(const MatchGraph& graph, std::ostream& out) {
  out << "r_vw,selected,ratio\n";
  for (int k = 0; k <= 10; ++k) {
    const double r_vw = k / 10.0;
    const std::size_t selected = ExtractWcds(graph, r_vw).selected_vertices.size();
    char line[96];
    std::snprintf(line, sizeof(line), "%.1f,%zu,%.6f\n", r_vw, selected,
                  graph.NumVertices() ? static_cast<double>(selected) / graph.NumVertices()
                                      : 0.0);
    out << line;
  }
}

}  // namespace psfm
