#include "psfm/matchgraph/dataset_io.h"

#include <sstream>

#include <gtest/gtest.h>

namespace psfm {
namespace {

constexpr char kSmall[] = R"(# two images
IMAGE 1 640 480
IMAGE 2 640 480
INTRINSICS 2 500 510 320 240
KEYPOINT 1 10 20 2.5
KEYPOINT 1 30.25 40 1
KEYPOINT 2 5 6 3
DESC 1 1 0 1
DESC 1 0 1 0
DESC 2 0 0.6 0.8
MATCH 2 1 0 1
MATCH 1 2 0 0
)";

TEST(DatasetIo, ParsesAllRecordKinds) {
  std::istringstream in(kSmall);
  const Dataset d = ParseDataset(in);
  ASSERT_EQ(d.images.size(), 2u);
  EXPECT_EQ(d.images.at(1).width, 640);
  ASSERT_EQ(d.features.at(1).keypoints.size(), 2u);
  EXPECT_DOUBLE_EQ(d.features.at(1).keypoints[1].xy.x(), 30.25);
  EXPECT_FLOAT_EQ(d.features.at(1).descriptors(0, 0), 1.0f);
  EXPECT_FLOAT_EQ(d.features.at(1).descriptors(1, 1), 1.0f);
  EXPECT_DOUBLE_EQ(d.IntrinsicsFor(2).focal_y, 510);
  EXPECT_EQ(d.IntrinsicsFor(2).image_width, 640);
  // Image 1 has no record: default focal 1.2 * max(w, h).
  EXPECT_DOUBLE_EQ(d.IntrinsicsFor(1).focal_x, 768);
  EXPECT_DOUBLE_EQ(d.IntrinsicsFor(1).principal_x, 320);

  // Both MATCH lines collapse into one canonical pair.
  ASSERT_EQ(d.matches.size(), 1u);
  EXPECT_EQ(d.matches[0].image_id_a, 1u);
  EXPECT_EQ(d.matches[0].image_id_b, 2u);
  ASSERT_EQ(d.matches[0].matches.size(), 2u);
  EXPECT_EQ(d.matches[0].matches[0], (FeatureMatch{1, 0}));
  EXPECT_EQ(d.matches[0].matches[1], (FeatureMatch{0, 0}));
}

TEST(DatasetIo, RoundTripIsExact) {
  std::istringstream in(kSmall);
  Dataset d = ParseDataset(in);
  d.features[1].keypoints[0].xy.x() = 0.1 + 0.2;  // not exactly representable
  std::stringstream buf;
  WriteDataset(d, buf);
  const Dataset e = ParseDataset(buf);
  EXPECT_EQ(e.features.at(1).keypoints[0].xy.x(), 0.1 + 0.2);
  EXPECT_EQ(e.features.at(2).descriptors(0, 1), 0.8f);
  ASSERT_EQ(e.matches.size(), 1u);
  EXPECT_EQ(e.matches[0].matches, d.matches[0].matches);
  EXPECT_EQ(e.intrinsics.size(), 1u);
}

TEST(DatasetIo, SeparateMatchesFileReplacesMatches) {
  std::istringstream in(kSmall);
  Dataset d = ParseDataset(in);
  std::istringstream matches("MATCH 1 2 1 0\n");
  ParseMatchesInto(matches, &d);
  ASSERT_EQ(d.matches.size(), 1u);
  ASSERT_EQ(d.matches[0].matches.size(), 1u);
  EXPECT_EQ(d.matches[0].matches[0], (FeatureMatch{1, 0}));
}

TEST(DatasetIo, RejectsMalformedInput) {
  auto parse = [](const std::string& text) {
    std::istringstream in(text);
    return ParseDataset(in);
  };
  EXPECT_THROW(parse("IMAGE 1 640\n"), std::runtime_error);
  EXPECT_THROW(parse("FOO 1\n"), std::runtime_error);
  EXPECT_THROW(parse("IMAGE 1 640 480\nIMAGE 1 640 480\n"), std::runtime_error);
  EXPECT_THROW(parse("IMAGE 1 0 480\n"), std::invalid_argument);
  EXPECT_THROW(parse("IMAGE 1 640 480\nKEYPOINT 1 700 10 1\n"),
               std::invalid_argument);
  EXPECT_THROW(parse("IMAGE 1 640 480\nIMAGE 2 640 480\n"
                     "KEYPOINT 1 1 1 1\nMATCH 1 2 0 5\n"),
               std::invalid_argument);
  // Descriptor dimension must be consistent.
  EXPECT_THROW(parse("IMAGE 1 640 480\nKEYPOINT 1 1 1 1\nKEYPOINT 1 2 2 1\n"
                     "DESC 1 0 1 0\nDESC 1 1 1\n"),
               std::runtime_error);
}

TEST(DatasetIo, FormatDoubleRoundTrips) {
  for (double v : {0.0, 1.0, -2.5, 1.0 / 3.0, 1e-300, 123456789.123456789}) {
    EXPECT_EQ(std::stod(FormatDouble(v)), v);
  }
}

}  // namespace
}  // namespace psfm
