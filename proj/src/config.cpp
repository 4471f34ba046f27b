#include "svo/config.hpp"

#include <array>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "svo/error.hpp"

namespace svo {
namespace {

using nlohmann::json;

constexpr std::array<std::string_view, 6> kMethods = {"ransac", "msac", "mlesac", "amlesac", "ac-ransac", "erode"};

[[noreturn]] void Fail(const std::string& field, const std::string& what) {
  throw Error(ErrorCode::kInvalidConfig, field + ": " + what);
}

const json* Find(const json& obj, const char* key) {
  const auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

double GetDouble(const json& obj, const std::string& prefix, const char* key, double fallback) {
  const json* v = Find(obj, key);
  if (!v) return fallback;
  if (!v->is_number()) Fail(prefix + key, "expected a number");
  return v->get<double>();
}

int GetInt(const json& obj, const std::string& prefix, const char* key, int fallback) {
  const json* v = Find(obj, key);
  if (!v) return fallback;
  if (!v->is_number_integer()) Fail(prefix + key, "expected an integer");
  return v->get<int>();
}

std::uint64_t GetSeed(const json& v, const std::string& field) {
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
    Fail(field, "expected a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

const json& Require(const json& obj, const std::string& prefix, const char* key) {
  const json* v = Find(obj, key);
  if (!v) Fail(prefix + key, "required field is missing");
  return *v;
}

void CheckKeys(const json& obj, const std::string& section, std::initializer_list<const char*> allowed) {
  for (const auto& [key, _] : obj.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) Fail(section + key, "unknown field");
  }
}

const json& Section(const json& root, const char* key) {
  static const json empty = json::object();
  const json* v = Find(root, key);
  if (!v) return empty;
  if (!v->is_object()) Fail(key, "expected an object");
  return *v;
}

}  // namespace

bool IsKnownMethod(std::string_view method) {
  for (const auto m : kMethods) {
    if (m == method) return true;
  }
  return false;
}

double ResolvedThreshold(const MethodConfig& m) { return m.threshold.value_or(m.method == "erode" ? 2.79 : 2.0); }

NoiseModel MakeInitModel(const MethodConfig& m, const StereoCalibration& calib) {
  const double volume = calib.image_width * calib.image_height * calib.disparity_range;
  const SquareMat cov = SquareMat::Identity(3, 3) * (m.mixture_sigma * m.mixture_sigma);
  if (m.method == "ransac") return RansacModel{ResolvedThreshold(m)};
  if (m.method == "msac") return MsacModel{ResolvedThreshold(m)};
  if (m.method == "mlesac") return MlesacModel{cov, volume, m.inlier_ratio};
  if (m.method == "amlesac") return AmlesacModel{cov, volume, m.inlier_ratio};
  if (m.method == "ac-ransac") return AcRansacModel{Alpha0Stereo(calib), m.nfa_threshold, 4, 3};
  if (m.method == "erode") return ErodeModel{m.erode_b, ResolvedThreshold(m)};
  throw Error(ErrorCode::kInvalidArgument,
              "unknown method '" + m.method + "' (expected ransac, msac, mlesac, amlesac, ac-ransac or erode)");
}

PipelineConfig MakePipelineConfig(const RunConfig& config) {
  PipelineConfig p;
  p.init.iterations = config.init.iterations;
  p.init.model = MakeInitModel(config.init, config.calibration);
  p.init.seed = config.seed;
  p.init.inlier_threshold = config.init.inlier_threshold;
  p.init.threads = config.init.threads;
  p.scope = config.scope;
  p.weighting = config.weighting;
  return p;
}

RunConfig ParseConfig(std::string_view text) {
  json root;
  try {
    root = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kInvalidConfig, std::string("not valid JSON: ") + e.what());
  }
  if (!root.is_object()) Fail("(root)", "expected an object");
  CheckKeys(root, "", {"version", "calibration", "scene", "init", "refinement", "weighting", "seed"});
  RunConfig c;
  const json& version = Require(root, "", "version");
  if (!version.is_number_integer() || version.get<int>() != kConfigVersion) {
    Fail("version", "unsupported version (expected " + std::to_string(kConfigVersion) + ")");
  }

  const json& cal = Section(root, "calibration");
  CheckKeys(cal, "calibration.",
            {"focal", "u0", "v0", "baseline", "image_width", "image_height", "disparity_range"});
  auto& k = c.calibration;
  k.focal = GetDouble(cal, "calibration.", "focal", k.focal);
  k.u0 = GetDouble(cal, "calibration.", "u0", k.u0);
  k.v0 = GetDouble(cal, "calibration.", "v0", k.v0);
  k.baseline = GetDouble(cal, "calibration.", "baseline", k.baseline);
  k.image_width = GetDouble(cal, "calibration.", "image_width", k.image_width);
  k.image_height = GetDouble(cal, "calibration.", "image_height", k.image_height);
  k.disparity_range = GetDouble(cal, "calibration.", "disparity_range", k.disparity_range);
  try {
    k.Validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::kInvalidConfig, e.what());
  }

  if (const json* sc = Find(root, "scene")) {
    if (!sc->is_object()) Fail("scene", "expected an object");
    CheckKeys(*sc, "scene.",
              {"points", "frames", "seed", "depth_min", "depth_max", "sigma", "sigma_u", "sigma_v", "outlier_ratio",
               "translation_m", "rotation_deg", "previous_frame_noise"});
    SceneConfig s;
    Require(*sc, "scene.", "points");
    Require(*sc, "scene.", "frames");
    s.num_points = GetInt(*sc, "scene.", "points", s.num_points);
    s.frame_count = GetInt(*sc, "scene.", "frames", s.frame_count);
    s.seed = GetSeed(Require(*sc, "scene.", "seed"), "scene.seed");
    s.depth_min = GetDouble(*sc, "scene.", "depth_min", s.depth_min);
    s.depth_max = GetDouble(*sc, "scene.", "depth_max", s.depth_max);
    s.sigma = GetDouble(*sc, "scene.", "sigma", s.sigma);
    if (Find(*sc, "sigma_u")) s.sigma_u = GetDouble(*sc, "scene.", "sigma_u", 0);
    if (Find(*sc, "sigma_v")) s.sigma_v = GetDouble(*sc, "scene.", "sigma_v", 0);
    s.outlier_ratio = GetDouble(*sc, "scene.", "outlier_ratio", s.outlier_ratio);
    s.translation_m = GetDouble(*sc, "scene.", "translation_m", s.translation_m);
    s.rotation_deg = GetDouble(*sc, "scene.", "rotation_deg", s.rotation_deg);
    if (const json* v = Find(*sc, "previous_frame_noise")) {
      if (!v->is_boolean()) Fail("scene.previous_frame_noise", "expected true or false");
      s.previous_frame_noise = v->get<bool>();
    }
    s.Validate();
    c.scene = s;
  }

  const json& init = Section(root, "init");
  CheckKeys(init, "init.",
            {"method", "threshold", "inlier_threshold", "mixture_sigma", "inlier_ratio", "nfa_threshold", "erode_b",
             "iterations", "threads"});
  auto& m = c.init;
  if (const json* v = Find(init, "method")) {
    if (!v->is_string() || !IsKnownMethod(v->get<std::string>())) {
      Fail("init.method", "expected one of ransac, msac, mlesac, amlesac, ac-ransac, erode");
    }
    m.method = v->get<std::string>();
  }
  if (Find(init, "threshold")) m.threshold = GetDouble(init, "init.", "threshold", 0);
  m.inlier_threshold = GetDouble(init, "init.", "inlier_threshold", m.inlier_threshold);
  m.mixture_sigma = GetDouble(init, "init.", "mixture_sigma", m.mixture_sigma);
  m.inlier_ratio = GetDouble(init, "init.", "inlier_ratio", m.inlier_ratio);
  m.nfa_threshold = GetDouble(init, "init.", "nfa_threshold", m.nfa_threshold);
  m.erode_b = GetDouble(init, "init.", "erode_b", m.erode_b);
  m.iterations = GetInt(init, "init.", "iterations", m.iterations);
  m.threads = GetInt(init, "init.", "threads", m.threads);
  if (m.threshold && !(*m.threshold > 0)) Fail("init.threshold", "must be > 0");
  if (!(m.inlier_threshold > 0)) Fail("init.inlier_threshold", "must be > 0");
  if (!(m.mixture_sigma > 0)) Fail("init.mixture_sigma", "must be > 0");
  if (!(m.inlier_ratio > 0 && m.inlier_ratio < 1)) Fail("init.inlier_ratio", "must lie in (0, 1)");
  if (!(m.nfa_threshold > 0)) Fail("init.nfa_threshold", "must be > 0");
  if (!(m.erode_b > 0)) Fail("init.erode_b", "must be > 0");
  if (m.iterations < 1) Fail("init.iterations", "must be >= 1");
  if (m.threads < 1) Fail("init.threads", "must be >= 1");

  const json& ref = Section(root, "refinement");
  CheckKeys(ref, "refinement.", {"scope"});
  if (const json* v = Find(ref, "scope")) {
    if (!v->is_string()) Fail("refinement.scope", "expected a string");
    try {
      c.scope = ParseScope(v->get<std::string>());
    } catch (const Error&) {
      Fail("refinement.scope", "expected motion, ba or ba-noise");
    }
  }

  if (const json* v = Find(root, "weighting")) {
    if (!v->is_boolean()) Fail("weighting", "expected true or false");
    c.weighting = v->get<bool>();
  }
  if (const json* v = Find(root, "seed")) c.seed = GetSeed(*v, "seed");
  return c;
}

RunConfig LoadConfig(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ParseConfig(ss.str());
}

std::string ConfigToJson(const RunConfig& c) {
  json root = json::object();
  root["version"] = c.version;
  const auto& k = c.calibration;
  root["calibration"] = {{"focal", k.focal},
                         {"u0", k.u0},
                         {"v0", k.v0},
                         {"baseline", k.baseline},
                         {"image_width", k.image_width},
                         {"image_height", k.image_height},
                         {"disparity_range", k.disparity_range}};
  if (c.scene) {
    const auto& s = *c.scene;
    json sc = {{"points", s.num_points},
               {"frames", s.frame_count},
               {"seed", s.seed},
               {"depth_min", s.depth_min},
               {"depth_max", s.depth_max},
               {"sigma", s.sigma},
               {"outlier_ratio", s.outlier_ratio},
               {"translation_m", s.translation_m},
               {"rotation_deg", s.rotation_deg},
               {"previous_frame_noise", s.previous_frame_noise}};
    if (s.sigma_u) sc["sigma_u"] = *s.sigma_u;
    if (s.sigma_v) sc["sigma_v"] = *s.sigma_v;
    root["scene"] = sc;
  }
  const auto& m = c.init;
  root["init"] = {{"method", m.method},
                  {"inlier_threshold", m.inlier_threshold},
                  {"mixture_sigma", m.mixture_sigma},
                  {"inlier_ratio", m.inlier_ratio},
                  {"nfa_threshold", m.nfa_threshold},
                  {"erode_b", m.erode_b},
                  {"iterations", m.iterations},
                  {"threads", m.threads}};
  if (m.threshold) root["init"]["threshold"] = *m.threshold;
  root["refinement"] = {{"scope", std::string(ToString(c.scope))}};
  root["weighting"] = c.weighting;
  root["seed"] = c.seed;
  return root.dump(2) + "\n";
}

}  // namespace svo
