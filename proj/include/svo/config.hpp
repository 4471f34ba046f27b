#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "svo/geometry.hpp"
#include "svo/io_sim.hpp"
#include "svo/noise_models.hpp"
#include "svo/pipeline.hpp"
#include "svo/refinement.hpp"

namespace svo {

inline constexpr int kConfigVersion = 1;

/// Initializer selection and its parameters.
struct MethodConfig {
  std::string method = "msac";  // ransac, msac, mlesac, amlesac, ac-ransac, erode
  /// T (pixels); unset means 2.0 for RANSAC/MSAC and 2.79 for ERODE.
  std::optional<double> threshold;
  /// Inlier cutoff reported for the mixture models.
  double inlier_threshold = 2.79;
  /// Inlier sigma (pixels) of the mixture models' starting covariance.
  double mixture_sigma = 1.0;
  double inlier_ratio = 0.5;
  /// AC-RANSAC epsilon.
  double nfa_threshold = 1.0;
  /// Pseudo-Huber shape for ERODE.
  double erode_b = 2.0;
  int iterations = 1000;
  int threads = 1;
};

struct RunConfig {
  int version = kConfigVersion;
  StereoCalibration calibration;
  std::optional<SceneConfig> scene;
  MethodConfig init;
  RefinementScope scope = RefinementScope::kMotionOnly;
  bool weighting = false;
  std::uint64_t seed = 0;
};

bool IsKnownMethod(std::string_view method);

/// Configured T, or the method's default.
double ResolvedThreshold(const MethodConfig& method);

/// Initializer cost model for a method name. Throws kInvalidArgument for
/// unknown names.
NoiseModel MakeInitModel(const MethodConfig& method, const StereoCalibration& calib);

PipelineConfig MakePipelineConfig(const RunConfig& config);

/// Parses the JSON document. Every section is optional except "version";
/// a "scene" section requires "points", "frames" and "seed".
/// Throws kInvalidConfig with the dotted field name.
RunConfig ParseConfig(std::string_view json_text);
RunConfig LoadConfig(const std::filesystem::path& path);
/// Pretty-printed JSON, stable key order; ParseConfig(ConfigToJson(c)) == c.
std::string ConfigToJson(const RunConfig& config);

}  // namespace svo
