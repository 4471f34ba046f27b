#include "svo/evaluation.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <numeric>
#include <ostream>

#include "svo/error.hpp"
#include "svo/io_sim.hpp"

namespace svo {

std::vector<double> DefaultSegmentLengths() {
  std::vector<double> out;
  for (int l = 100; l <= 800; l += 50) out.push_back(l);
  return out;
}

std::vector<double> ShortSegmentLengths() {
  std::vector<double> out = {0.05, 0.10};
  for (int cm = 50; cm <= 400; cm += 50) out.push_back(cm / 100.0);
  return out;
}

std::vector<double> ParseLengths(std::string_view text) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = std::min(text.find(',', start), text.size());
    const std::string_view item = text.substr(start, end - start);
    double v = 0;
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (item.empty() || ec != std::errc() || ptr != item.data() + item.size() || !(v > 0)) {
      throw Error(ErrorCode::kInvalidArgument, "bad segment length '" + std::string(item) + "'");
    }
    out.push_back(v);
    start = end + 1;
  }
  return out;
}

std::vector<double> TrajectoryDistances(const Trajectory& trajectory) {
  std::vector<double> dist;
  dist.reserve(trajectory.poses.size());
  for (std::size_t i = 0; i < trajectory.poses.size(); ++i) {
    if (i == 0) {
      dist.push_back(0);
    } else {
      dist.push_back(dist.back() +
                     (trajectory.poses[i].translation() - trajectory.poses[i - 1].translation()).norm());
    }
  }
  return dist;
}

std::vector<SegmentError> SegmentErrors(const Trajectory& estimated, const Trajectory& ground_truth,
                                        std::span<const double> lengths, int step) {
  if (step < 1) throw Error(ErrorCode::kInvalidArgument, "step must be >= 1");
  if (estimated.poses.size() != ground_truth.poses.size()) {
    throw Error(ErrorCode::kMismatchedTrajectories,
                "estimated has " + std::to_string(estimated.poses.size()) + " poses, ground truth has " +
                    std::to_string(ground_truth.poses.size()));
  }
  const std::vector<double> dist = TrajectoryDistances(ground_truth);
  const int n = static_cast<int>(dist.size());
  std::vector<SegmentError> out;
  for (int first = 0; first < n; first += step) {
    for (const double len : lengths) {
      // First frame whose path distance from `first` reaches len.
      const auto it = std::lower_bound(dist.begin() + first, dist.end(), dist[first] + len);
      if (it == dist.end()) continue;
      const int last = static_cast<int>(it - dist.begin());
      const Pose gt_rel = ground_truth.poses[first].Inverse() * ground_truth.poses[last];
      const Pose est_rel = estimated.poses[first].Inverse() * estimated.poses[last];
      const Pose err = gt_rel.Inverse() * est_rel;
      out.push_back({first, len, err.translation().norm() / len, RotationAngle(err.rotation()) / len});
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const SegmentError& a, const SegmentError& b) {
    return a.first_frame != b.first_frame ? a.first_frame < b.first_frame : a.length < b.length;
  });
  return out;
}

EvalReport Summarize(std::span<const SegmentError> segments, std::span<const double> lengths) {
  EvalReport report;
  for (const double len : lengths) {
    LengthAverage avg;
    avg.length = len;
    for (const auto& s : segments) {
      if (s.length != len) continue;
      ++avg.segments;
      avg.t_err += s.t_err;
      avg.r_err += s.r_err;
    }
    if (avg.segments > 0) {
      avg.t_err /= static_cast<double>(avg.segments);
      avg.r_err /= static_cast<double>(avg.segments);
    }
    report.per_length.push_back(avg);
  }
  for (const auto& s : segments) {
    report.t_err += s.t_err;
    report.r_err += s.r_err;
  }
  report.segments = segments.size();
  if (!segments.empty()) {
    report.t_err /= static_cast<double>(segments.size());
    report.r_err /= static_cast<double>(segments.size());
  }
  std::size_t used = 0;
  for (const auto& l : report.per_length) {
    if (l.segments == 0) continue;
    ++used;
    report.t_err_length_mean += l.t_err;
    report.r_err_length_mean += l.r_err;
  }
  if (used > 0) {
    report.t_err_length_mean /= static_cast<double>(used);
    report.r_err_length_mean /= static_cast<double>(used);
  }
  return report;
}

namespace {
constexpr double kRadToDeg = 180.0 / std::numbers::pi;
}

void WriteReportCsv(std::ostream& out, std::string_view method, std::string_view scope, const EvalReport& report,
                    bool header) {
  if (header) out << "method,scope,length_m,t_err_pct,r_err_deg_per_m\n";
  for (const auto& l : report.per_length) {
    if (l.segments == 0) continue;
    out << method << ',' << scope << ',' << FormatDouble(l.length) << ',' << FormatDouble(100.0 * l.t_err) << ','
        << FormatDouble(kRadToDeg * l.r_err) << '\n';
  }
}

void WriteSummary(std::ostream& out, std::string_view method, std::string_view scope, const EvalReport& report) {
  out << "method: " << method << '\n'
      << "scope: " << scope << '\n'
      << "segments: " << report.segments << '\n'
      << "segment_mean_t_err_pct: " << FormatDouble(100.0 * report.t_err) << '\n'
      << "segment_mean_r_err_deg_per_m: " << FormatDouble(kRadToDeg * report.r_err) << '\n'
      << "length_mean_t_err_pct: " << FormatDouble(100.0 * report.t_err_length_mean) << '\n'
      << "length_mean_r_err_deg_per_m: " << FormatDouble(kRadToDeg * report.r_err_length_mean) << '\n';
}

std::vector<StageStats> TimingReport(const std::map<std::string, std::vector<double>>& samples_ms) {
  std::vector<StageStats> out;
  for (const auto& [stage, samples] : samples_ms) {
    if (samples.empty()) throw Error(ErrorCode::kInvalidArgument, "stage '" + stage + "' has no samples");
    StageStats s;
    s.stage = stage;
    s.samples = samples.size();
    s.mean_ms = std::accumulate(samples.begin(), samples.end(), 0.0) / static_cast<double>(samples.size());
    std::vector<double> sorted = samples;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t mid = sorted.size() / 2;
    s.median_ms = sorted.size() % 2 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);
    if (samples.size() > 1) {
      double ss = 0;
      for (const double v : samples) ss += (v - s.mean_ms) * (v - s.mean_ms);
      s.std_ms = std::sqrt(ss / static_cast<double>(samples.size() - 1));
    }
    out.push_back(s);
  }
  return out;
}

}  // namespace svo
