#include "psfm/matchgraph/dataset_io.h"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace psfm {
namespace {

[[noreturn]] void ParseError(std::size_t line_no, const std::string& what) {
  throw std::runtime_error("line " + std::to_string(line_no) + ": " + what);
}

std::ifstream OpenForRead(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return in;
}

std::ofstream OpenForWrite(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

using PairKey = std::pair<image_t, image_t>;

void AddMatch(std::map<PairKey, MatchPair>* pairs, image_t a, image_t b,
              std::uint32_t ia, std::uint32_t ib) {
  if (a > b) {
    std::swap(a, b);
    std::swap(ia, ib);
  }
  auto& pair = (*pairs)[{a, b}];
  pair.image_id_a = a;
  pair.image_id_b = b;
  pair.matches.push_back({ia, ib});
}

std::vector<MatchPair> Flatten(std::map<PairKey, MatchPair>& pairs) {
  std::vector<MatchPair> out;
  out.reserve(pairs.size());
  for (auto& [key, pair] : pairs) out.push_back(std::move(pair));
  return out;
}

void ParseImpl(std::istream& in, Dataset* dataset, bool matches_only) {
  std::map<image_t, std::map<std::uint32_t, std::vector<float>>> descs;
  std::map<PairKey, MatchPair> pairs;
  std::string line, tag;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    if (!(ss >> tag)) continue;
    if (tag == "MATCH") {
      image_t a, b;
      std::uint32_t ia, ib;
      if (!(ss >> a >> b >> ia >> ib)) ParseError(line_no, "bad MATCH");
      if (a == b) ParseError(line_no, "MATCH within one image");
      AddMatch(&pairs, a, b, ia, ib);
      continue;
    }
    if (matches_only) ParseError(line_no, "unexpected record " + tag);
    if (tag == "IMAGE") {
      ImageMeta meta;
      if (!(ss >> meta.image_id >> meta.width >> meta.height)) {
        ParseError(line_no, "bad IMAGE");
      }
      if (dataset->images.count(meta.image_id)) {
        ParseError(line_no, "duplicate IMAGE");
      }
      dataset->images[meta.image_id] = meta;
    } else if (tag == "INTRINSICS") {
      image_t id;
      CameraIntrinsics intr;
      if (!(ss >> id >> intr.focal_x >> intr.focal_y >> intr.principal_x >>
            intr.principal_y)) {
        ParseError(line_no, "bad INTRINSICS");
      }
      dataset->intrinsics[id] = intr;
    } else if (tag == "KEYPOINT") {
      image_t id;
      Keypoint kp;
      if (!(ss >> id >> kp.xy.x() >> kp.xy.y() >> kp.scale)) {
        ParseError(line_no, "bad KEYPOINT");
      }
      auto& fs = dataset->features[id];
      fs.image_id = id;
      fs.keypoints.push_back(kp);
    } else if (tag == "DESC") {
      image_t id;
      std::uint32_t idx;
      if (!(ss >> id >> idx)) ParseError(line_no, "bad DESC");
      std::vector<float> values;
      float v;
      while (ss >> v) values.push_back(v);
      if (values.empty()) ParseError(line_no, "empty DESC");
      descs[id][idx] = std::move(values);
    } else {
      ParseError(line_no, "unknown record " + tag);
    }
  }

  dataset->matches = Flatten(pairs);
  if (matches_only) return;

  // Fill image sizes into intrinsics records.
  for (auto& [id, intr] : dataset->intrinsics) {
    const auto meta = dataset->images.find(id);
    if (meta == dataset->images.end()) {
      throw std::runtime_error("INTRINSICS for unknown image " +
                               std::to_string(id));
    }
    intr.image_width = meta->second.width;
    intr.image_height = meta->second.height;
  }

  long dim = -1;
  for (auto& [id, by_idx] : descs) {
    auto fs_it = dataset->features.find(id);
    if (fs_it == dataset->features.end()) {
      throw std::runtime_error("DESC for image without keypoints");
    }
    auto& fs = fs_it->second;
    for (const auto& [idx, values] : by_idx) {
      if (dim < 0) dim = static_cast<long>(values.size());
      if (static_cast<long>(values.size()) != dim) {
        throw std::runtime_error("inconsistent descriptor dimension");
      }
    }
    if (by_idx.size() != fs.keypoints.size()) {
      throw std::runtime_error("image " + std::to_string(id) +
                               " has descriptors for only some keypoints");
    }
    fs.descriptors.resize(static_cast<long>(fs.keypoints.size()), dim);
    for (const auto& [idx, values] : by_idx) {
      if (idx >= fs.keypoints.size()) {
        throw std::runtime_error("DESC index out of range");
      }
      for (long d = 0; d < dim; ++d) fs.descriptors(idx, d) = values[d];
    }
  }
}

}  // namespace

std::string FormatDouble(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

Dataset ParseDataset(std::istream& in) {
  Dataset dataset;
  ParseImpl(in, &dataset, false);
  for (auto& [id, meta] : dataset.images) {
    auto& fs = dataset.features[id];
    fs.image_id = id;
  }
  dataset.Validate();
  return dataset;
}

Dataset ReadDataset(const std::string& path) {
  auto in = OpenForRead(path);
  return ParseDataset(in);
}

void ParseMatchesInto(std::istream& in, Dataset* dataset) {
  ParseImpl(in, dataset, true);
}

void ReadMatchesInto(const std::string& path, Dataset* dataset) {
  auto in = OpenForRead(path);
  ParseMatchesInto(in, dataset);
  dataset->Validate();
}

void WriteMatches(const std::vector<MatchPair>& pairs, std::ostream& out) {
  for (const auto& pair : pairs) {
    for (const auto& m : pair.matches) {
      out << "MATCH " << pair.image_id_a << ' ' << pair.image_id_b << ' '
          << m.idx_a << ' ' << m.idx_b << '\n';
    }
  }
}

void WriteMatches(const std::vector<MatchPair>& pairs, const std::string& path) {
  auto out = OpenForWrite(path);
  WriteMatches(pairs, out);
}

void WriteDataset(const Dataset& dataset, std::ostream& out,
                  bool include_matches) {
  out << "# psfm dataset\n";
  for (const auto& [id, meta] : dataset.images) {
    out << "IMAGE " << id << ' ' << meta.width << ' ' << meta.height << '\n';
  }
  for (const auto& [id, intr] : dataset.intrinsics) {
    out << "INTRINSICS " << id << ' ' << FormatDouble(intr.focal_x) << ' '
        << FormatDouble(intr.focal_y) << ' ' << FormatDouble(intr.principal_x)
        << ' ' << FormatDouble(intr.principal_y) << '\n';
  }
  for (const auto& [id, fs] : dataset.features) {
    for (const auto& kp : fs.keypoints) {
      out << "KEYPOINT " << id << ' ' << FormatDouble(kp.xy.x()) << ' '
          << FormatDouble(kp.xy.y()) << ' ' << FormatDouble(kp.scale) << '\n';
    }
  }
  char buf[32];
  for (const auto& [id, fs] : dataset.features) {
    for (long i = 0; i < fs.descriptors.rows(); ++i) {
      out << "DESC " << id << ' ' << i;
      for (long d = 0; d < fs.descriptors.cols(); ++d) {
        const auto res = std::to_chars(buf, buf + sizeof(buf),
                                       fs.descriptors(i, d));
        out << ' ' << std::string_view(buf, res.ptr - buf);
      }
      out << '\n';
    }
  }
  if (include_matches) WriteMatches(dataset.matches, out);
}

void WriteDataset(const Dataset& dataset, const std::string& path,
                  bool include_matches) {
  auto out = OpenForWrite(path);
  WriteDataset(dataset, out, include_matches);
}

}  // namespace psfm
