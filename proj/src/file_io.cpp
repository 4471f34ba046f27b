#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "svo/error.hpp"
#include "svo/io_sim.hpp"

namespace svo {
namespace {

std::vector<std::string_view> Split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  if (sep == ' ') {
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
      const std::size_t start = i;
      while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
      if (i > start) out.push_back(line.substr(start, i - start));
    }
    return out;
  }
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(sep, start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

bool ParseDouble(std::string_view s, double& out) {
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
}

bool ParseInt(std::string_view s, int& out) {
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

std::string_view StripCr(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return line;
}

[[noreturn]] void Malformed(const std::string& what, int line) {
  throw Error(ErrorCode::kMalformedInput, "line " + std::to_string(line) + ": " + what);
}

std::ifstream OpenIn(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  return in;
}

std::ofstream OpenOut(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  return out;
}

}  // namespace

std::string FormatDouble(double value) {
  if (value == 0) return "0";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

std::string FormatPoseLine(const Pose& pose) {
  const Eigen::Matrix<double, 3, 4> m = pose.Matrix3x4();
  std::string line;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 4; ++c) {
      if (!line.empty()) line += ' ';
      line += FormatDouble(m(r, c));
    }
  }
  return line;
}

void WritePoses(std::ostream& out, const Trajectory& trajectory) {
  for (const Pose& p : trajectory.poses) out << FormatPoseLine(p) << '\n';
}

void WritePoses(const std::filesystem::path& path, const Trajectory& trajectory) {
  auto out = OpenOut(path);
  WritePoses(out, trajectory);
}

PoseReadResult ReadPoses(std::istream& in) {
  PoseReadResult result;
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = StripCr(raw);
    const auto fields = Split(line, ' ');
    if (fields.empty()) continue;
    if (fields.size() != 12) {
      Malformed("expected 12 values, found " + std::to_string(fields.size()), line_no);
    }
    double v[12];
    for (int i = 0; i < 12; ++i) {
      if (!ParseDouble(fields[i], v[i])) Malformed("bad number '" + std::string(fields[i]) + "'", line_no);
    }
    Eigen::Matrix3d r;
    r << v[0], v[1], v[2], v[4], v[5], v[6], v[8], v[9], v[10];
    const Eigen::Vector3d t(v[3], v[7], v[11]);
    if ((r.transpose() * r - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() > 1e-6 || r.determinant() < 0) {
      r = Orthonormalize(r);
      result.reorthonormalized_lines.push_back(line_no);
    }
    result.trajectory.poses.emplace_back(r, t);
  }
  return result;
}

PoseReadResult ReadPoses(const std::filesystem::path& path) {
  auto in = OpenIn(path);
  return ReadPoses(in);
}

void WriteCorrespondences(std::ostream& out, std::span<const FramePair> pairs) {
  out << kCorrespondenceHeader << '\n';
  for (const FramePair& p : pairs) {
    for (const StereoMeasurement& m : p.measurements) {
      out << p.frame_index << ',' << FormatDouble(m.ul_prev) << ',' << FormatDouble(m.ur_prev) << ','
          << FormatDouble(m.v_prev) << ',' << FormatDouble(m.ul_cur) << ',' << FormatDouble(m.ur_cur) << ','
          << FormatDouble(m.v_cur) << '\n';
    }
  }
}

void WriteCorrespondences(const std::filesystem::path& path, std::span<const FramePair> pairs) {
  auto out = OpenOut(path);
  WriteCorrespondences(out, pairs);
}

std::vector<FramePair> ReadCorrespondences(std::istream& in) {
  std::vector<FramePair> pairs;
  std::string raw;
  int line_no = 0;
  bool header_seen = false;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = StripCr(raw);
    if (line.empty()) continue;
    if (!header_seen) {
      if (line != kCorrespondenceHeader) Malformed("expected header '" + std::string(kCorrespondenceHeader) + "'", line_no);
      header_seen = true;
      continue;
    }
    const auto fields = Split(line, ',');
    if (fields.size() != 7) Malformed("expected 7 columns, found " + std::to_string(fields.size()), line_no);
    int frame = 0;
    if (!ParseInt(fields[0], frame) || frame < 1) Malformed("bad frame_index '" + std::string(fields[0]) + "'", line_no);
    double v[6];
    for (int i = 0; i < 6; ++i) {
      if (!ParseDouble(fields[i + 1], v[i])) Malformed("bad number '" + std::string(fields[i + 1]) + "'", line_no);
    }
    const StereoMeasurement m{v[0], v[1], v[2], v[3], v[4], v[5]};
    if (!(m.ul_prev - m.ur_prev > 0) || !(m.ul_cur - m.ur_cur > 0)) Malformed("non-positive disparity", line_no);
    if (!pairs.empty() && frame < pairs.back().frame_index) {
      throw Error(ErrorCode::kNonMonotoneFrames, "line " + std::to_string(line_no) + ": frame_index " +
                                                     std::to_string(frame) + " after " +
                                                     std::to_string(pairs.back().frame_index));
    }
    if (pairs.empty() || pairs.back().frame_index != frame) pairs.push_back({frame, {}});
    pairs.back().measurements.push_back(m);
  }
  return pairs;
}

std::vector<FramePair> ReadCorrespondences(const std::filesystem::path& path) {
  auto in = OpenIn(path);
  return ReadCorrespondences(in);
}

std::vector<FramePair> FillFrameGaps(std::vector<FramePair> pairs) {
  std::vector<FramePair> out;
  for (auto& p : pairs) {
    while (static_cast<int>(out.size()) + 1 < p.frame_index) out.push_back({static_cast<int>(out.size()) + 1, {}});
    out.push_back(std::move(p));
  }
  return out;
}

void WriteLabels(std::ostream& out, std::span<const GeneratedPair> pairs) {
  out << kLabelHeader << '\n';
  for (const GeneratedPair& g : pairs) {
    for (std::size_t i = 0; i < g.true_points.size(); ++i) {
      const Point3& y = g.true_points[i];
      out << g.pair.frame_index << ',' << i << ',' << (g.is_outlier[i] ? 1 : 0) << ',' << FormatDouble(y.x()) << ','
          << FormatDouble(y.y()) << ',' << FormatDouble(y.z()) << '\n';
    }
  }
}

}  // namespace svo
