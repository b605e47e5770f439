#pragma once

#include <ostream>
#include <string>

#include "json.hpp"
#include "psfm/pipeline/pipeline.h"

namespace psfm {

nlohmann::json MergeReportJson(const MergeReport& report);
nlohmann::json GeoreferenceJson(const GeoreferenceResult& result);
// Everything but the models. Timing lives under "timing" keys only.
nlohmann::json PipelineReportJson(const PipelineResult& result,
                                  const PipelineConfig& config);
void WriteReportText(const PipelineResult& result, std::ostream& out);

// Match records each correspondence strategy loads at every merge step.
void WriteMergeSeriesCsv(const MergeReport& report, std::ostream& out);
// Selected-vertex ratio of the WCDS for r_vw = 0, 0.1, ..., 1.
void WriteWcdsSeriesCsv(const MatchGraph& graph, std::ostream& out);

}  // namespace psfm
