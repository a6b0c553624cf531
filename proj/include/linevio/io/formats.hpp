#pragma once

#include <cerrno>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Geometry>

#include "linevio/core/types.hpp"
#include "linevio/filter/lifecycle.hpp"
#include "linevio/imu/model.hpp"

namespace linevio {

/// Malformed input with a located, human-readable diagnostic
/// ("path:line: message"; the line part is omitted for file-level errors).
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& path, long line, const std::string& msg)
      : std::runtime_error(format(path, line, msg)) {}

 private:
  static std::string format(const std::string& path, long line,
                            const std::string& msg) {
    std::ostringstream os;
    os << path;
    if (line > 0) os << ":" << line;
    os << ": " << msg;
    return os.str();
  }
};

/// One pose/velocity sample of an estimated or ground-truth trajectory.
struct TrajectoryRecord {
  Timestamp t = 0;
  Vec3 p = Vec3::Zero();
  Mat3 R = Mat3::Identity();
  Vec3 v = Vec3::Zero();
};

namespace detail {

inline std::vector<std::string> splitCsv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

inline double parseDouble(const std::string& path, long line,
                          const std::string& field) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(field.c_str(), &end);
  if (end == field.c_str() || *end != '\0' || errno == ERANGE) {
    throw ParseError(path, line, "expected a number, got '" + field + "'");
  }
  return v;
}

inline std::int64_t parseInt(const std::string& path, long line,
                             const std::string& field) {
  errno = 0;
  char* end = nullptr;
  const long long v = std::strtoll(field.c_str(), &end, 10);
  if (end == field.c_str() || *end != '\0' || errno == ERANGE) {
    throw ParseError(path, line, "expected an integer, got '" + field + "'");
  }
  return v;
}

inline std::ifstream openForRead(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, 0, "cannot open file for reading");
  return in;
}

inline std::ofstream openForWrite(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError(path, 0, "cannot open file for writing");
  return out;
}

/// Shortest exact decimal form of a double (round-trips bit-exactly).
inline std::string numberToString(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace detail

/// Rows `timestamp_ns,wx,wy,wz,ax,ay,az`; lines starting with '#' are
/// headers. Timestamps must be strictly increasing.
inline std::vector<ImuSample> parseImuCsv(const std::string& path) {
  std::ifstream in = detail::openForRead(path);
  std::vector<ImuSample> out;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    const auto fields = detail::splitCsv(line);
    if (fields.size() != 7) {
      throw ParseError(path, lineno,
                       "expected 7 fields (timestamp_ns,wx,wy,wz,ax,ay,az), "
                       "got " + std::to_string(fields.size()));
    }
    ImuSample s;
    s.t = detail::parseInt(path, lineno, fields[0]);
    for (int i = 0; i < 3; ++i) {
      s.gyro(i) = detail::parseDouble(path, lineno, fields[1 + i]);
      s.accel(i) = detail::parseDouble(path, lineno, fields[4 + i]);
    }
    if (!s.gyro.allFinite() || !s.accel.allFinite()) {
      throw ParseError(path, lineno, "non-finite measurement value");
    }
    if (!out.empty() && s.t <= out.back().t) {
      throw ParseError(path, lineno, "timestamp not strictly increasing");
    }
    out.push_back(s);
  }
  return out;
}

inline void writeImuCsv(const std::string& path,
                        const std::vector<ImuSample>& samples) {
  std::ofstream out = detail::openForWrite(path);
  out << "#timestamp_ns,wx,wy,wz,ax,ay,az\n";
  for (const ImuSample& s : samples) {
    out << s.t;
    for (int i = 0; i < 3; ++i) out << ',' << detail::numberToString(s.gyro(i));
    for (int i = 0; i < 3; ++i) out << ',' << detail::numberToString(s.accel(i));
    out << '\n';
  }
  if (!out) throw ParseError(path, 0, "write failed");
}

/// Rows `timestamp_ns,track_id,u1,v1,u2,v2`, grouped by non-decreasing
/// timestamp. Pixels must lie inside the image; duplicate (timestamp, id)
/// pairs and zero-length segments are rejected.
inline std::vector<LineTrack> parseLineTracks(const std::string& path,
                                              int width, int height) {
  std::ifstream in = detail::openForRead(path);
  std::vector<LineTrack> out;
  std::set<std::pair<Timestamp, std::int64_t>> seen;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    const auto fields = detail::splitCsv(line);
    if (fields.size() != 6) {
      throw ParseError(path, lineno,
                       "expected 6 fields (timestamp_ns,track_id,u1,v1,u2,v2), "
                       "got " + std::to_string(fields.size()));
    }
    LineTrack t;
    t.t = detail::parseInt(path, lineno, fields[0]);
    t.id = detail::parseInt(path, lineno, fields[1]);
    t.a.x() = detail::parseDouble(path, lineno, fields[2]);
    t.a.y() = detail::parseDouble(path, lineno, fields[3]);
    t.b.x() = detail::parseDouble(path, lineno, fields[4]);
    t.b.y() = detail::parseDouble(path, lineno, fields[5]);
    if (!out.empty() && t.t < out.back().t) {
      throw ParseError(path, lineno, "timestamp decreased");
    }
    if (!seen.insert({t.t, t.id}).second) {
      throw ParseError(path, lineno,
                       "duplicate track id " + std::to_string(t.id) +
                           " in frame " + std::to_string(t.t));
    }
    for (const Vec2& px : {t.a, t.b}) {
      if (!px.allFinite() || px.x() < 0 || px.x() > width || px.y() < 0 ||
          px.y() > height) {
        throw ParseError(path, lineno, "pixel outside image bounds");
      }
    }
    if (t.a == t.b) {
      throw ParseError(path, lineno, "zero-length segment");
    }
    out.push_back(t);
  }
  return out;
}

inline void writeLineTracks(const std::string& path,
                            const std::vector<LineTrack>& tracks) {
  std::ofstream out = detail::openForWrite(path);
  out << "#timestamp_ns,track_id,u1,v1,u2,v2\n";
  for (const LineTrack& t : tracks) {
    out << t.t << ',' << t.id << ',' << detail::numberToString(t.a.x()) << ','
        << detail::numberToString(t.a.y()) << ','
        << detail::numberToString(t.b.x()) << ','
        << detail::numberToString(t.b.y()) << '\n';
  }
  if (!out) throw ParseError(path, 0, "write failed");
}

/// Rows `t_ns,px,py,pz,qw,qx,qy,qz,vx,vy,vz` with unit quaternions, qw >= 0.
inline std::vector<TrajectoryRecord> parseTrajectoryCsv(
    const std::string& path) {
  std::ifstream in = detail::openForRead(path);
  std::vector<TrajectoryRecord> out;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    const auto fields = detail::splitCsv(line);
    if (fields.size() != 11) {
      throw ParseError(path, lineno,
                       "expected 11 fields "
                       "(t_ns,px,py,pz,qw,qx,qy,qz,vx,vy,vz), got " +
                           std::to_string(fields.size()));
    }
    TrajectoryRecord r;
    r.t = detail::parseInt(path, lineno, fields[0]);
    double vals[10];
    for (int i = 0; i < 10; ++i) {
      vals[i] = detail::parseDouble(path, lineno, fields[1 + i]);
    }
    r.p = Vec3(vals[0], vals[1], vals[2]);
    Eigen::Quaterniond q(vals[3], vals[4], vals[5], vals[6]);
    if (std::abs(q.norm() - 1.0) > 1e-6) {
      throw ParseError(path, lineno, "quaternion is not unit length");
    }
    r.R = q.normalized().toRotationMatrix();
    r.v = Vec3(vals[7], vals[8], vals[9]);
    if (!out.empty() && r.t <= out.back().t) {
      throw ParseError(path, lineno, "timestamp not strictly increasing");
    }
    out.push_back(r);
  }
  return out;
}

inline void writeTrajectoryCsv(const std::string& path,
                               const std::vector<TrajectoryRecord>& records) {
  std::ofstream out = detail::openForWrite(path);
  out << "#t_ns,px,py,pz,qw,qx,qy,qz,vx,vy,vz\n";
  for (const TrajectoryRecord& r : records) {
    Eigen::Quaterniond q(r.R);
    q.normalize();
    if (q.w() < 0) q.coeffs() = -q.coeffs();
    out << r.t;
    for (int i = 0; i < 3; ++i) out << ',' << detail::numberToString(r.p(i));
    out << ',' << detail::numberToString(q.w()) << ','
        << detail::numberToString(q.x()) << ','
        << detail::numberToString(q.y()) << ','
        << detail::numberToString(q.z());
    for (int i = 0; i < 3; ++i) out << ',' << detail::numberToString(r.v(i));
    out << '\n';
  }
  if (!out) throw ParseError(path, 0, "write failed");
}

}  // namespace linevio
