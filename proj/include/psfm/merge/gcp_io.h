#pragma once

#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "psfm/merge/georeference.h"

namespace psfm {

// Text format, '#' starts a comment:
//   GCP id X Y Z control|check
//   GCPOBS gcp_id image_id px py
// Observations may appear before or after their GCP line.
std::vector<GcpRecord> ParseGcps(std::istream& in);
std::vector<GcpRecord> ReadGcps(const std::string& path);
void WriteGcps(const std::vector<GcpRecord>& gcps, std::ostream& out);
void WriteGcps(const std::vector<GcpRecord>& gcps, const std::string& path);

}  // namespace psfm
