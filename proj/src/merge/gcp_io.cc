#include "psfm/merge/gcp_io.h"

#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "psfm/matchgraph/dataset_io.h"

namespace psfm {
namespace {

[[noreturn]] void Fail(std::size_t line, const std::string& what) {
  throw std::runtime_error("line " + std::to_string(line) + ": " + what);
}

}  // namespace

std::vector<GcpRecord> ParseGcps(std::istream& in) {
  std::map<std::uint32_t, GcpRecord> gcps;
  std::map<std::uint32_t, std::size_t> defined_on;
  std::vector<std::pair<std::size_t, std::uint32_t>> referenced;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    std::istringstream line(raw);
    std::string tag;
    if (!(line >> tag)) continue;
    if (tag == "GCP") {
      std::uint32_t id;
      Eigen::Vector3d xyz;
      std::string role;
      if (!(line >> id >> xyz.x() >> xyz.y() >> xyz.z() >> role)) {
        Fail(line_no, "expected GCP id X Y Z role");
      }
      if (defined_on.count(id)) Fail(line_no, "duplicate GCP " + std::to_string(id));
      defined_on[id] = line_no;
      GcpRecord& gcp = gcps[id];
      gcp.gcp_id = id;
      gcp.world = xyz;
      if (role == "control") {
        gcp.role = GcpRole::kControl;
      } else if (role == "check") {
        gcp.role = GcpRole::kCheck;
      } else {
        Fail(line_no, "role must be control or check, got '" + role + "'");
      }
    } else if (tag == "GCPOBS") {
      std::uint32_t id;
      GcpObservation obs;
      if (!(line >> id >> obs.image_id >> obs.pixel.x() >> obs.pixel.y())) {
        Fail(line_no, "expected GCPOBS gcp_id image_id px py");
      }
      gcps[id].gcp_id = id;
      gcps[id].observations.push_back(obs);
      referenced.emplace_back(line_no, id);
    } else {
      Fail(line_no, "unknown record '" + tag + "'");
    }
    std::string extra;
    if (line >> extra) Fail(line_no, "trailing token '" + extra + "'");
  }
  for (const auto& [line, id] : referenced) {
    if (!defined_on.count(id)) {
      Fail(line, "observation of undefined GCP " + std::to_string(id));
    }
  }
  std::vector<GcpRecord> out;
  for (auto& [id, gcp] : gcps) out.push_back(std::move(gcp));
  return out;
}

std::vector<GcpRecord> ReadGcps(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return ParseGcps(in);
}

void WriteGcps(const std::vector<GcpRecord>& gcps, std::ostream& out) {
  for (const auto& gcp : gcps) {
    out << "GCP " << gcp.gcp_id << ' ' << FormatDouble(gcp.world.x()) << ' '
        << FormatDouble(gcp.world.y()) << ' ' << FormatDouble(gcp.world.z())
        << ' ' << (gcp.role == GcpRole::kControl ? "control" : "check") << '\n';
  }
  for (const auto& gcp : gcps) {
    for (const auto& obs : gcp.observations) {
      out << "GCPOBS " << gcp.gcp_id << ' ' << obs.image_id << ' '
          << FormatDouble(obs.pixel.x()) << ' ' << FormatDouble(obs.pixel.y())
          << '\n';
    }
  }
}

void WriteGcps(const std::vector<GcpRecord>& gcps, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  WriteGcps(gcps, out);
}

}  // namespace psfm
