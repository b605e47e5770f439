#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "psfm/matchgraph/dataset.h"

namespace psfm {

// Line-oriented dataset format; `#` starts a comment line.
//
//   INTRINSICS image_id fx fy cx cy
//   IMAGE image_id width height
//   KEYPOINT image_id x y scale          (index = order within the image)
//   DESC image_id keypoint_idx v0 ... v{D-1}
//   MATCH image_id_a image_id_b keypoint_idx_a keypoint_idx_b
//
// Records may appear in any order except that a KEYPOINT's index is its
// position among the KEYPOINT lines of the same image. MATCH lines of the
// same unordered image pair are merged into one MatchPair.
Dataset ParseDataset(std::istream& in);
Dataset ReadDataset(const std::string& path);

// Replaces `dataset->matches` with the MATCH records of a stream/file.
void ParseMatchesInto(std::istream& in, Dataset* dataset);
void ReadMatchesInto(const std::string& path, Dataset* dataset);

void WriteDataset(const Dataset& dataset, std::ostream& out,
                  bool include_matches = true);
void WriteDataset(const Dataset& dataset, const std::string& path,
                  bool include_matches = true);
void WriteMatches(const std::vector<MatchPair>& pairs, std::ostream& out);
void WriteMatches(const std::vector<MatchPair>& pairs, const std::string& path);

// Shortest decimal that round-trips the value.
std::string FormatDouble(double value);

}  // namespace psfm
