#pragma once

#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "svo/pipeline.hpp"

namespace svo {

struct SegmentError {
  int first_frame = 0;
  double length = 0;   // meters
  double t_err = 0;    // fraction of length
  double r_err = 0;    // radians per meter
};

/// 100, 150, ..., 800 m.
std::vector<double> DefaultSegmentLengths();
/// 5, 10, 50, 100, 150, ..., 400 cm, expressed in meters.
std::vector<double> ShortSegmentLengths();
/// Comma-separated meters, e.g. "5,10,50". Throws kInvalidArgument.
std::vector<double> ParseLengths(std::string_view text);

/// Cumulative path length of the trajectory (meters), starting at 0.
std::vector<double> TrajectoryDistances(const Trajectory& trajectory);

/// Relative-pose errors over every start frame (stride = step) and every
/// length, sorted by (first_frame, length). Segments past the end are skipped.
/// Throws kMismatchedTrajectories or kInvalidArgument (step < 1).
std::vector<SegmentError> SegmentErrors(const Trajectory& estimated, const Trajectory& ground_truth,
                                        std::span<const double> lengths, int step = 1);

struct LengthAverage {
  double length = 0;
  std::size_t segments = 0;
  double t_err = 0;
  double r_err = 0;
};

struct EvalReport {
  std::vector<LengthAverage> per_length;
  std::size_t segments = 0;
  /// Mean over all segments.
  double t_err = 0;
  double r_err = 0;
  /// Mean over lengths of the per-length means (lengths with no segment skipped).
  double t_err_length_mean = 0;
  double r_err_length_mean = 0;
};

EvalReport Summarize(std::span<const SegmentError> segments, std::span<const double> lengths);

/// Columns: method,scope,length_m,t_err_pct,r_err_deg_per_m.
void WriteReportCsv(std::ostream& out, std::string_view method, std::string_view scope, const EvalReport& report,
                    bool header = true);
void WriteSummary(std::ostream& out, std::string_view method, std::string_view scope, const EvalReport& report);

struct StageStats {
  std::string stage;
  std::size_t samples = 0;
  double mean_ms = 0;
  double median_ms = 0;
  double std_ms = 0;
};

/// Mean, median and sample standard deviation per stage (stages in key order).
/// Throws kInvalidArgument for a stage without samples.
std::vector<StageStats> TimingReport(const std::map<std::string, std::vector<double>>& samples_ms);

}  // namespace svo
