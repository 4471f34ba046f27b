// svo: simulate, estimate, evaluate and benchmark stereo visual odometry runs.

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "svo/config.hpp"
#include "svo/error.hpp"
#include "svo/evaluation.hpp"
#include "svo/io_sim.hpp"
#include "svo/pipeline.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace svo;

namespace {

constexpr const char* kArtifactVersion = "0.1.0";
constexpr int kManifestVersion = 1;

const std::vector<std::string> kMethodNames = {"ransac", "msac", "mlesac", "amlesac", "ac-ransac", "erode"};
const std::vector<std::string> kScopeNames = {"motion", "ba", "ba-noise"};

std::string UtcNow() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::vector<std::string> SplitList(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::ofstream OpenOut(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  return out;
}

fs::path PrepareOut(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + dir.string() + ": " + ec.message());
  return dir;
}

std::string Absolute(const fs::path& p) { return fs::absolute(p).lexically_normal().string(); }

// Everything needed to repeat a command lives in "arguments" (+ "config").
struct Manifest {
  std::string command;
  json arguments = json::object();
  std::optional<RunConfig> config;
  std::uint64_t seed = 0;
  json inputs = json::object();
  std::vector<std::string> outputs;
  std::string started_at;
};

void WriteManifest(const fs::path& out_dir, Manifest m) {
  m.outputs.push_back("manifest.json");
  json j;
  j["manifest_version"] = kManifestVersion;
  j["artifact_version"] = kArtifactVersion;
  j["command"] = m.command;
  j["arguments"] = m.arguments;
  j["config"] = m.config ? json::parse(ConfigToJson(*m.config)) : json(nullptr);
  j["seed"] = m.seed;
  j["inputs"] = m.inputs;
  j["outputs"] = m.outputs;
  j["started_at"] = m.started_at;
  j["finished_at"] = UtcNow();
  auto out = OpenOut(out_dir / "manifest.json");
  out << j.dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateOptions {
  RunConfig config;
  fs::path out;
};

void Simulate(const SimulateOptions& o) {
  const std::string started = UtcNow();
  if (!o.config.scene) throw Error(ErrorCode::kInvalidConfig, "scene: required section is missing");
  const fs::path dir = PrepareOut(o.out);
  const GeneratedSequence seq = GenerateSequence(*o.config.scene, o.config.calibration);
  std::vector<FramePair> pairs;
  for (const auto& g : seq.pairs) pairs.push_back(g.pair);
  WriteCorrespondences(dir / "correspondences.csv", pairs);
  WritePoses(dir / "ground_truth.txt", seq.ground_truth);
  {
    auto labels = OpenOut(dir / "labels.csv");
    WriteLabels(labels, seq.pairs);
  }
  Manifest m;
  m.command = "simulate";
  m.config = o.config;
  m.seed = o.config.scene->seed;
  m.outputs = {"correspondences.csv", "ground_truth.txt", "labels.csv"};
  m.started_at = started;
  WriteManifest(dir, m);
}

// ---------------------------------------------------------------------------
// run

struct RunOptions {
  RunConfig config;
  fs::path correspondences;
  fs::path out;
};

std::string CsvSafe(std::string s) {
  for (char& c : s) {
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  }
  return s;
}

void Run(const RunOptions& o) {
  const std::string started = UtcNow();
  const std::vector<FramePair> pairs = FillFrameGaps(ReadCorrespondences(o.correspondences));
  const PipelineConfig pipeline = MakePipelineConfig(o.config);
  const SequenceResult result = ProcessSequence(pairs, o.config.calibration, pipeline);

  const fs::path dir = PrepareOut(o.out);
  WritePoses(dir / "poses.txt", result.trajectory);
  const bool adaptive = o.config.init.method == "ac-ransac";
  {
    auto out = OpenOut(dir / "diagnostics.csv");
    out << "frame_index,correspondences,inliers," << (adaptive ? "adaptive_threshold" : "threshold")
        << ",init_score,inlier_ratio,refine_initial_cost,refine_final_cost,refine_iterations,status\n";
    for (const auto& d : result.diagnostics) {
      out << d.frame_index << ',' << d.correspondences << ',' << d.inliers << ',';
      if (d.failed) {
        out << ",,,,,," << CsvSafe(d.failure) << '\n';
        continue;
      }
      out << FormatDouble(d.threshold) << ',' << FormatDouble(d.init_score) << ','
          << (d.inlier_ratio ? FormatDouble(*d.inlier_ratio) : "") << ',' << FormatDouble(d.refine_initial_cost)
          << ',' << FormatDouble(d.refine_final_cost) << ',' << d.refine_iterations << ",ok\n";
    }
  }
  {
    auto out = OpenOut(dir / "timings.csv");
    out << "frame_index,triangulate_ms,init_ms,refine_ms\n";
    for (const auto& d : result.diagnostics) {
      out << d.frame_index << ',' << FormatDouble(d.triangulate_ms) << ',' << FormatDouble(d.init_ms) << ','
          << FormatDouble(d.refine_ms) << '\n';
    }
  }
  int failed = 0;
  for (const auto& d : result.diagnostics) failed += d.failed ? 1 : 0;
  if (failed > 0) std::cerr << "warning: " << failed << " frame pair(s) failed; identity motion used\n";

  Manifest m;
  m.command = "run";
  m.arguments = {{"correspondences", Absolute(o.correspondences)}};
  m.config = o.config;
  m.seed = o.config.seed;
  m.inputs = {{"correspondences", Absolute(o.correspondences)}};
  m.outputs = {"poses.txt", "diagnostics.csv", "timings.csv"};
  m.started_at = started;
  WriteManifest(dir, m);
}

// ---------------------------------------------------------------------------
// eval

struct EvalOptions {
  fs::path estimated;
  fs::path ground_truth;
  std::vector<double> lengths;
  int step = 1;
  std::string method = "estimate";
  std::string scope = "-";
  fs::path out;
};

std::vector<double> LengthsFromFlag(const std::string& flag) {
  if (flag == "default") return DefaultSegmentLengths();
  if (flag == "short") return ShortSegmentLengths();
  return ParseLengths(flag);
}

void Eval(const EvalOptions& o) {
  const std::string started = UtcNow();
  if (o.step < 1) throw Error(ErrorCode::kInvalidArgument, "--step must be >= 1");
  const PoseReadResult est = ReadPoses(o.estimated);
  const PoseReadResult gt = ReadPoses(o.ground_truth);
  for (const int line : est.reorthonormalized_lines) {
    std::cerr << "warning: " << o.estimated.string() << " line " << line << ": rotation re-orthonormalized\n";
  }
  for (const int line : gt.reorthonormalized_lines) {
    std::cerr << "warning: " << o.ground_truth.string() << " line " << line << ": rotation re-orthonormalized\n";
  }
  const auto segments = SegmentErrors(est.trajectory, gt.trajectory, o.lengths, o.step);
  const EvalReport report = Summarize(segments, o.lengths);
  if (segments.empty()) std::cerr << "warning: trajectory is shorter than every segment length\n";

  const fs::path dir = PrepareOut(o.out);
  {
    auto out = OpenOut(dir / "report.csv");
    WriteReportCsv(out, o.method, o.scope, report);
  }
  {
    auto out = OpenOut(dir / "summary.txt");
    WriteSummary(out, o.method, o.scope, report);
  }
  Manifest m;
  m.command = "eval";
  m.arguments = {{"estimated", Absolute(o.estimated)},
                 {"ground_truth", Absolute(o.ground_truth)},
                 {"lengths", o.lengths},
                 {"step", o.step},
                 {"method", o.method},
                 {"scope", o.scope}};
  m.inputs = {{"estimated", Absolute(o.estimated)}, {"ground_truth", Absolute(o.ground_truth)}};
  m.outputs = {"report.csv", "summary.txt"};
  m.started_at = started;
  WriteManifest(dir, m);
}

// ---------------------------------------------------------------------------
// bench

struct BenchOptions {
  RunConfig config;
  std::optional<fs::path> correspondences;
  int points = 1000;
  std::vector<std::string> methods = {"msac"};
  std::vector<std::string> scopes = {"motion"};
  int repeats = 1;
  fs::path out;
};

void Bench(const BenchOptions& o) {
  const std::string started = UtcNow();
  if (o.repeats < 1) throw Error(ErrorCode::kInvalidArgument, "--repeats must be >= 1");
  std::vector<FramePair> pairs;
  std::optional<SceneConfig> scene;
  if (o.correspondences) {
    pairs = ReadCorrespondences(*o.correspondences);
  } else {
    scene = o.config.scene.value_or(SceneConfig{});
    if (!o.config.scene) {
      scene->num_points = o.points;
      scene->sigma = 1.0;
      scene->outlier_ratio = 0.3;
      scene->seed = o.config.seed;
    }
    pairs.push_back(GeneratePair(*scene, o.config.calibration).pair);
  }
  if (pairs.empty()) throw Error(ErrorCode::kInsufficientCorrespondences, "no frame pairs to benchmark");

  const fs::path dir = PrepareOut(o.out);
  auto out = OpenOut(dir / "timings.csv");
  out << "method,scope,stage,samples,mean_ms,median_ms,std_ms\n";
  auto emit = [&](const std::string& method, const std::string& scope,
                  const std::map<std::string, std::vector<double>>& samples) {
    for (const StageStats& s : TimingReport(samples)) {
      out << method << ',' << scope << ',' << s.stage << ',' << s.samples << ',' << FormatDouble(s.mean_ms) << ','
          << FormatDouble(s.median_ms) << ',' << FormatDouble(s.std_ms) << '\n';
    }
  };
  for (const auto& method : o.methods) {
    RunConfig rc = o.config;
    rc.init.method = method;
    std::map<std::string, std::vector<double>> init;
    std::vector<std::pair<std::string, std::map<std::string, std::vector<double>>>> refine;
    for (const auto& scope_name : o.scopes) {
      rc.scope = ParseScope(scope_name);
      const PipelineConfig pipeline = MakePipelineConfig(rc);
      std::map<std::string, std::vector<double>> stage;
      for (int rep = 0; rep < o.repeats; ++rep) {
        for (const auto& pair : pairs) {
          const PairResult r = ProcessPair(pair, rc.calibration, pipeline);
          init["init_total"].push_back(r.diagnostics.init_ms);
          // ERODE is a single optimization, not iterative sampling.
          if (method != "erode") {
            init["init_per_iteration"].push_back(r.diagnostics.init_ms / rc.init.iterations);
          }
          stage["refine"].push_back(r.diagnostics.refine_ms);
        }
      }
      refine.emplace_back(scope_name, std::move(stage));
    }
    emit(method, "-", init);
    for (const auto& [scope_name, stage] : refine) emit(method, scope_name, stage);
  }

  Manifest m;
  m.command = "bench";
  m.arguments = {{"correspondences", o.correspondences ? json(Absolute(*o.correspondences)) : json(nullptr)},
                 {"points", o.points},
                 {"methods", o.methods},
                 {"scopes", o.scopes},
                 {"repeats", o.repeats}};
  m.config = o.config;
  if (scene) m.config->scene = scene;
  m.seed = o.config.seed;
  if (o.correspondences) m.inputs = {{"correspondences", Absolute(*o.correspondences)}};
  m.outputs = {"timings.csv"};
  m.started_at = started;
  out.close();
  WriteManifest(dir, m);
}

// ---------------------------------------------------------------------------
// rerun

void Rerun(const fs::path& manifest_path, const std::optional<fs::path>& out_override) {
  std::ifstream in(manifest_path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open manifest " + manifest_path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kMalformedInput, std::string("manifest is not valid JSON: ") + e.what());
  }
  auto field = [&](const json& obj, const char* key) -> const json& {
    if (!obj.is_object() || !obj.contains(key)) {
      throw Error(ErrorCode::kMalformedInput, std::string("manifest: missing field '") + key + "'");
    }
    return obj.at(key);
  };
  if (field(j, "manifest_version") != kManifestVersion) {
    throw Error(ErrorCode::kMalformedInput, "manifest: unsupported manifest_version");
  }
  const std::string command = field(j, "command").get<std::string>();
  const json& args = field(j, "arguments");
  const fs::path out = out_override.value_or(manifest_path.parent_path());
  auto config = [&] { return ParseConfig(field(j, "config").dump()); };
  try {
    if (command == "simulate") {
      Simulate({config(), out});
    } else if (command == "run") {
      Run({config(), field(args, "correspondences").get<std::string>(), out});
    } else if (command == "eval") {
      EvalOptions o;
      o.estimated = field(args, "estimated").get<std::string>();
      o.ground_truth = field(args, "ground_truth").get<std::string>();
      o.lengths = field(args, "lengths").get<std::vector<double>>();
      o.step = field(args, "step").get<int>();
      o.method = field(args, "method").get<std::string>();
      o.scope = field(args, "scope").get<std::string>();
      o.out = out;
      Eval(o);
    } else if (command == "bench") {
      BenchOptions o;
      o.config = config();
      if (!field(args, "correspondences").is_null()) o.correspondences = field(args, "correspondences").get<std::string>();
      o.points = field(args, "points").get<int>();
      o.methods = field(args, "methods").get<std::vector<std::string>>();
      o.scopes = field(args, "scopes").get<std::vector<std::string>>();
      o.repeats = field(args, "repeats").get<int>();
      o.out = out;
      Bench(o);
    } else {
      throw Error(ErrorCode::kMalformedInput, "manifest: unknown command '" + command + "'");
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kMalformedInput, std::string("manifest: ") + e.what());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stereo visual odometry noise-model toolkit"};
  app.set_version_flag("--version", kArtifactVersion);
  app.require_subcommand(1);

  // Shared estimation flags (run and bench).
  struct EstimationFlags {
    std::string config;
    std::string method;
    std::string scope;
    double threshold = 0;
    std::uint64_t seed = 0;
    int iterations = 1000;
    int threads = 1;
    bool weighting = false;
    CLI::Option* method_opt = nullptr;
    CLI::Option* scope_opt = nullptr;
    CLI::Option* threshold_opt = nullptr;
    CLI::Option* seed_opt = nullptr;
    CLI::Option* iterations_opt = nullptr;
    CLI::Option* threads_opt = nullptr;
    CLI::Option* weighting_opt = nullptr;
  };
  auto add_estimation = [](CLI::App* cmd, EstimationFlags& f, bool with_method) {
    cmd->add_option("--config", f.config, "JSON run configuration")->check(CLI::ExistingFile);
    if (with_method) {
      f.method_opt = cmd->add_option("--method", f.method, "Initializer")->check(CLI::IsMember(kMethodNames));
      f.scope_opt = cmd->add_option("--scope", f.scope, "Refinement scope")->check(CLI::IsMember(kScopeNames));
    }
    f.threshold_opt = cmd->add_option("--threshold", f.threshold, "Inlier threshold T in pixels (e.g. 2.0 or 2.79)")
                          ->check(CLI::PositiveNumber);
    f.seed_opt = cmd->add_option("--seed", f.seed, "Seed for every random draw");
    f.iterations_opt = cmd->add_option("--iterations", f.iterations, "Hypotheses per frame pair (default 1000)")
                           ->check(CLI::PositiveNumber);
    f.threads_opt = cmd->add_option("--threads", f.threads, "Worker threads for hypothesis scoring")
                        ->check(CLI::PositiveNumber);
    f.weighting_opt = cmd->add_flag("--weighting,!--no-weighting", f.weighting, "Weight features by image column");
  };
  auto resolve = [](const EstimationFlags& f) {
    RunConfig c = f.config.empty() ? RunConfig{} : LoadConfig(f.config);
    if (f.method_opt && f.method_opt->count()) c.init.method = f.method;
    if (f.scope_opt && f.scope_opt->count()) c.scope = ParseScope(f.scope);
    if (f.threshold_opt->count()) c.init.threshold = f.threshold;
    if (f.seed_opt->count()) c.seed = f.seed;
    if (f.iterations_opt->count()) c.init.iterations = f.iterations;
    if (f.threads_opt->count()) c.init.threads = f.threads;
    if (f.weighting_opt->count()) c.weighting = f.weighting;
    return c;
  };

  auto* sim = app.add_subcommand("simulate", "Generate a synthetic sequence with ground truth");
  std::string sim_config, sim_out;
  std::uint64_t sim_seed = 0;
  sim->add_option("--config", sim_config, "JSON configuration with a scene section")
      ->required()
      ->check(CLI::ExistingFile);
  auto* sim_seed_opt = sim->add_option("--seed", sim_seed, "Overrides scene.seed");
  sim->add_option("--out", sim_out, "Output directory")->required();

  auto* run = app.add_subcommand("run", "Estimate a trajectory from correspondences");
  EstimationFlags run_flags;
  std::string run_corr, run_out;
  run->add_option("--correspondences", run_corr, "Correspondence CSV")->required()->check(CLI::ExistingFile);
  add_estimation(run, run_flags, true);
  run->add_option("--out", run_out, "Output directory")->required();

  auto* eval = app.add_subcommand("eval", "Segment errors of an estimated trajectory");
  EvalOptions eval_opts;
  std::string eval_est, eval_gt, eval_lengths = "default", eval_out;
  eval->add_option("--est", eval_est, "Estimated pose file")->required()->check(CLI::ExistingFile);
  eval->add_option("--gt", eval_gt, "Ground-truth pose file")->required()->check(CLI::ExistingFile);
  eval->add_option("--lengths", eval_lengths, "Segment lengths in meters (comma list), 'default' or 'short'");
  eval->add_option("--step", eval_opts.step, "Start-frame stride (>= 1)");
  eval->add_option("--method", eval_opts.method, "Method label for the report");
  eval->add_option("--scope", eval_opts.scope, "Scope label for the report");
  eval->add_option("--out", eval_out, "Output directory")->required();

  auto* bench = app.add_subcommand("bench", "Time initializers and refinement scopes");
  EstimationFlags bench_flags;
  BenchOptions bench_opts;
  std::string bench_corr, bench_methods = "msac", bench_scopes = "motion", bench_out;
  bench->add_option("--correspondences", bench_corr, "Correspondence CSV (default: one synthetic pair)")
      ->check(CLI::ExistingFile);
  bench->add_option("--points", bench_opts.points, "Synthetic pair size when no correspondences are given")
      ->check(CLI::PositiveNumber);
  bench->add_option("--methods", bench_methods, "Comma-separated initializers");
  bench->add_option("--scopes", bench_scopes, "Comma-separated refinement scopes");
  bench->add_option("--repeats", bench_opts.repeats, "Repetitions per pair")->check(CLI::PositiveNumber);
  add_estimation(bench, bench_flags, false);
  bench->add_option("--out", bench_out, "Output directory")->required();

  auto* rerun = app.add_subcommand("rerun", "Repeat a command from its manifest.json");
  std::string rerun_manifest, rerun_out;
  rerun->add_option("--manifest", rerun_manifest, "manifest.json of an earlier run")
      ->required()
      ->check(CLI::ExistingFile);
  auto* rerun_out_opt = rerun->add_option("--out", rerun_out, "Output directory (default: the manifest's)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sim) {
      SimulateOptions o{LoadConfig(sim_config), sim_out};
      if (!o.config.scene) throw Error(ErrorCode::kInvalidConfig, "scene: required section is missing");
      if (sim_seed_opt->count()) o.config.scene->seed = sim_seed;
      Simulate(o);
    } else if (*run) {
      Run({resolve(run_flags), run_corr, run_out});
    } else if (*eval) {
      eval_opts.estimated = eval_est;
      eval_opts.ground_truth = eval_gt;
      eval_opts.lengths = LengthsFromFlag(eval_lengths);
      eval_opts.out = eval_out;
      Eval(eval_opts);
    } else if (*bench) {
      bench_opts.config = resolve(bench_flags);
      if (!bench_corr.empty()) bench_opts.correspondences = bench_corr;
      bench_opts.methods = SplitList(bench_methods);
      bench_opts.scopes = SplitList(bench_scopes);
      for (const auto& m : bench_opts.methods) {
        if (!IsKnownMethod(m)) throw Error(ErrorCode::kInvalidArgument, "unknown method '" + m + "'");
      }
      for (const auto& s : bench_opts.scopes) ParseScope(s);
      bench_opts.out = bench_out;
      Bench(bench_opts);
    } else if (*rerun) {
      Rerun(rerun_manifest, rerun_out_opt->count() ? std::optional<fs::path>(rerun_out) : std::nullopt);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << ToString(e.code()) << ": " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
