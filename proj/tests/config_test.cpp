#include <gtest/gtest.h>

#include "svo/config.hpp"
#include "svo/error.hpp"

namespace svo {
namespace {

void ExpectConfigError(const std::string& json, const std::string& field) {
  try {
    ParseConfig(json);
    FAIL() << json;
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidConfig);
    EXPECT_NE(std::string(e.what()).find(field), std::string::npos) << e.what();
  }
}

TEST(Config, RoundTrip) {
  RunConfig c;
  c.seed = 17;
  c.scope = RefinementScope::kMotionStructureNoise;
  c.weighting = true;
  c.init.method = "ac-ransac";
  c.init.threshold = 2.5;
  c.init.iterations = 333;
  c.calibration.focal = 500;
  SceneConfig s;
  s.num_points = 321;
  s.sigma_u = 2.0;
  s.previous_frame_noise = false;
  s.frame_count = 7;
  s.seed = 9;
  c.scene = s;
  const std::string json = ConfigToJson(c);
  const RunConfig back = ParseConfig(json);
  EXPECT_EQ(ConfigToJson(back), json);
  EXPECT_EQ(back.seed, 17u);
  EXPECT_EQ(back.scope, RefinementScope::kMotionStructureNoise);
  EXPECT_EQ(back.init.method, "ac-ransac");
  EXPECT_EQ(back.init.threshold, 2.5);
  ASSERT_TRUE(back.scene.has_value());
  EXPECT_EQ(back.scene->num_points, 321);
  EXPECT_EQ(back.scene->sigma_u, 2.0);
  EXPECT_FALSE(back.scene->sigma_v.has_value());
  EXPECT_FALSE(back.scene->previous_frame_noise);
}

TEST(Config, MinimalDocument) {
  const RunConfig c = ParseConfig(R"({"version": 1})");
  EXPECT_EQ(c.init.method, "msac");
  EXPECT_FALSE(c.scene.has_value());
}

TEST(Config, FieldErrors) {
  ExpectConfigError(R"({})", "version");
  ExpectConfigError(R"({"version": 2})", "version");
  ExpectConfigError(R"({"version": 1, "scene": {"points": 10, "seed": 1}})", "scene.frames");
  ExpectConfigError(R"({"version": 1, "scene": {"points": "many", "frames": 2, "seed": 1}})", "scene.points");
  ExpectConfigError(R"({"version": 1, "init": {"method": "lmeds"}})", "init.method");
  ExpectConfigError(R"({"version": 1, "colour": 3})", "colour");
  ExpectConfigError(R"({"version": 1, "refinement": {"scope": "full"}})", "refinement.scope");
  ExpectConfigError("{not json", "");
}

TEST(Config, Thresholds) {
  MethodConfig m;
  m.method = "ransac";
  EXPECT_EQ(ResolvedThreshold(m), 2.0);
  m.method = "erode";
  EXPECT_EQ(ResolvedThreshold(m), 2.79);
  m.threshold = 3.0;
  EXPECT_EQ(ResolvedThreshold(m), 3.0);
  EXPECT_TRUE(IsKnownMethod("amlesac"));
  EXPECT_FALSE(IsKnownMethod("lmeds"));
  m.method = "lmeds";
  EXPECT_THROW(MakeInitModel(m, StereoCalibration{}), Error);
}

}  // namespace
}  // namespace svo
