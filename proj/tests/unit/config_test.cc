#include "psfm/pipeline/config.h"

#include <stdexcept>

#include <gtest/gtest.h>

namespace psfm {
namespace {

TEST(PipelineConfig, Defaults) {
  const PipelineConfig c;
  EXPECT_DOUBLE_EQ(c.r_ew, 0.5);
  EXPECT_DOUBLE_EQ(c.r_vw, 0.5);
  EXPECT_EQ(c.min_matches, 50u);
  EXPECT_EQ(c.index_features, 1500);
  EXPECT_EQ(c.top_k, 100);
  EXPECT_EQ(c.cluster_max_size, 50u);
  EXPECT_EQ(c.worker_count, 1);
  EXPECT_DOUBLE_EQ(c.merge_threshold_px, 1.8);
  EXPECT_EQ(c.rng_seed, 0u);
  EXPECT_FALSE(c.bypass_retrieval);
  EXPECT_TRUE(c.verify_precomputed);
  EXPECT_NO_THROW(c.Validate());
}

TEST(PipelineConfig, JsonRoundTrip) {
  PipelineConfig c;
  c.r_ew = 0.25;
  c.cluster_max_size = 30;
  c.worker_count = 4;
  c.rng_seed = 99;
  c.bypass_retrieval = true;
  c.dataset_path = "data/dataset.txt";
  const PipelineConfig back = ConfigFromJson(ToJson(c));
  EXPECT_EQ(ToJson(back), ToJson(c));
}

TEST(PipelineConfig, MissingKeysKeepDefaults) {
  const PipelineConfig c = ConfigFromJson(nlohmann::json{{"top_k", 7}});
  EXPECT_EQ(c.top_k, 7);
  EXPECT_DOUBLE_EQ(c.merge_threshold_px, 1.8);
}

TEST(PipelineConfig, UnknownKeyThrows) {
  EXPECT_THROW(ConfigFromJson(nlohmann::json{{"topk", 7}}), std::invalid_argument);
  EXPECT_THROW(ConfigFromJson(nlohmann::json::array()), std::invalid_argument);
}

TEST(PipelineConfig, ValidateNamesBadField) {
  PipelineConfig c;
  c.r_vw = 1.5;
  try {
    c.Validate();
    FAIL();
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("r_vw"), std::string::npos);
  }
  c = PipelineConfig();
  c.worker_count = 0;
  EXPECT_THROW(c.Validate(), std::invalid_argument);
  c = PipelineConfig();
  c.cluster_max_size = 1;
  EXPECT_THROW(c.Validate(), std::invalid_argument);
}

}  // namespace
}  // namespace psfm
