#include "psfm/sfm/reconstruction_io.h"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "psfm/matchgraph/dataset_io.h"

namespace psfm {

void WriteReconstruction(const Reconstruction& recon, std::ostream& out) {
  auto f = [](double v) { return FormatDouble(v); };
  for (const image_t id : recon.registered_order) {
    const auto& pose = recon.images.at(id).pose;
    const Eigen::Quaterniond q = pose.Quaternion();
    out << "CAMERA " << id << ' ' << f(q.w()) << ' ' << f(q.x()) << ' '
        << f(q.y()) << ' ' << f(q.z()) << ' ' << f(pose.translation.x()) << ' '
        << f(pose.translation.y()) << ' ' << f(pose.translation.z()) << '\n';
  }
  for (const auto& [id, point] : recon.points) {
    out << "POINT " << id << ' ' << f(point.xyz.x()) << ' ' << f(point.xyz.y())
        << ' ' << f(point.xyz.z()) << ' ' << point.observations.size();
    for (const auto& obs : point.observations) {
      out << ' ' << obs.image_id << ' ';
      if (obs.keypoint_idx == kNoKeypoint) {
        out << -1;
      } else {
        out << obs.keypoint_idx;
      }
    }
    out << '\n';
  }
}

void WriteReconstruction(const Reconstruction& recon, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  WriteReconstruction(recon, out);
}

Reconstruction ParseReconstruction(std::istream& in, const Dataset& dataset) {
  Reconstruction recon;
  std::string line, tag;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& what) {
    throw std::runtime_error("line " + std::to_string(line_no) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    ss >> tag;
    if (tag == "CAMERA") {
      image_t id;
      double qw, qx, qy, qz;
      Eigen::Vector3d t;
      if (!(ss >> id >> qw >> qx >> qy >> qz >> t.x() >> t.y() >> t.z())) {
        fail("bad CAMERA");
      }
      if (recon.HasImage(id)) fail("duplicate CAMERA");
      const Eigen::Quaterniond q(qw, qx, qy, qz);
      recon.AddImage(id, dataset.IntrinsicsFor(id),
                     CameraPose::FromQuaternion(q, t));
    } else if (tag == "POINT") {
      point3D_t id;
      ScenePoint point;
      std::size_t n;
      if (!(ss >> id >> point.xyz.x() >> point.xyz.y() >> point.xyz.z() >> n)) {
        fail("bad POINT");
      }
      for (std::size_t i = 0; i < n; ++i) {
        Observation obs;
        long long kp;
        if (!(ss >> obs.image_id >> kp)) fail("truncated POINT");
        if (!recon.HasImage(obs.image_id)) fail("observation of unknown camera");
        if (kp >= 0) {
          obs.keypoint_idx = static_cast<std::uint32_t>(kp);
          const auto fs = dataset.features.find(obs.image_id);
          if (fs == dataset.features.end() ||
              obs.keypoint_idx >= fs->second.keypoints.size()) {
            fail("keypoint index out of range");
          }
          obs.xy = fs->second.keypoints[obs.keypoint_idx].xy;
        }
        point.observations.push_back(obs);
      }
      if (recon.points.count(id)) fail("duplicate POINT");
      recon.InsertPoint(id, std::move(point));
    } else {
      fail("unknown record " + tag);
    }
  }
  return recon;
}

Reconstruction ReadReconstruction(const std::string& path,
                                  const Dataset& dataset) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return ParseReconstruction(in, dataset);
}

}  // namespace psfm
