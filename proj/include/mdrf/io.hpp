#pragma once

// Text file formats: observation CSV (2D and 3D), trace CSV, and the
// ISO-8601 time axis of 3D data.
//
// Every writer emits '.' decimals, LF line endings and no trailing
// whitespace; numbers use the shortest round-trip form, so output bytes are
// a pure function of the values.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "mdrf/errors.hpp"
#include "mdrf/format.hpp"
#include "mdrf/geometry.hpp"
#include "mdrf/network.hpp"
#include "mdrf/oracle.hpp"
#include "mdrf/training.hpp"

namespace mdrf::io {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::ostringstream os;
  os << in.rdbuf();
  if (in.bad()) throw IoError("error while reading '" + path + "'");
  return os.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.close();
  if (!out) throw IoError("error while writing '" + path + "'");
}

/// Lines of a CSV body; accepts LF or CRLF, skips blank lines. Fields are
/// plain (no quoting), as every format here is numeric or a bare token.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line;  // 1-based source line of each row
};

inline std::vector<std::string> split_fields(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(',', start);
    out.emplace_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline CsvTable parse_csv(const std::string& text, const std::string& what) {
  CsvTable t;
  std::size_t start = 0, lineno = 0;
  bool have_header = false;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    std::string_view line(text.data() + start, end - start);
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!line.empty()) {
      auto fields = split_fields(line);
      if (!have_header) {
        t.header = std::move(fields);
        have_header = true;
      } else {
        if (fields.size() != t.header.size())
          throw InvalidArgument(what + " line " + std::to_string(lineno) + ": expected " +
                                std::to_string(t.header.size()) + " fields, found " + std::to_string(fields.size()));
        t.rows.push_back(std::move(fields));
        t.line.push_back(lineno);
      }
    }
    start = end + 1;
  }
  if (!have_header) throw InvalidArgument(what + ": empty file");
  return t;
}

inline std::string join_header(const std::vector<std::string>& h) {
  std::string s;
  for (std::size_t i = 0; i < h.size(); ++i) s += (i ? "," : "") + h[i];
  return s;
}

inline void expect_header(const CsvTable& t, const std::vector<std::string>& want, const std::string& what) {
  if (t.header != want)
    throw InvalidArgument(what + ": header must be '" + join_header(want) + "', found '" + join_header(t.header) + "'");
}

// --- time axis ------------------------------------------------------------------

/// Parses "YYYY-MM-DDTHH:MM:SS[.fff][Z]" (UTC) to seconds since 1970-01-01.
inline double parse_iso8601(const std::string& s) {
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, consumed = 0;
  double sec = 0.0;
  if (std::sscanf(s.c_str(), "%4d-%2d-%2dT%2d:%2d:%lf%n", &y, &mo, &d, &h, &mi, &sec, &consumed) != 6)
    throw InvalidArgument("time '" + s + "' is not ISO-8601 (YYYY-MM-DDTHH:MM:SS[Z])");
  const std::string_view rest = std::string_view(s).substr(static_cast<std::size_t>(consumed));
  if (!(rest.empty() || rest == "Z")) throw InvalidArgument("time '" + s + "': only UTC ('Z') times are supported");
  using namespace std::chrono;
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h > 23 || mi > 59 || sec < 0.0 || sec >= 61.0)
    throw InvalidArgument("time '" + s + "' is not a valid calendar time");
  const auto days = sys_days(ymd).time_since_epoch().count();
  return static_cast<double>(days) * 86400.0 + h * 3600.0 + mi * 60.0 + sec;
}

/// Inverse of parse_iso8601 with microsecond resolution.
inline std::string format_iso8601(double epoch_seconds) {
  if (!std::isfinite(epoch_seconds)) throw NumericError("format_iso8601: non-finite time");
  using namespace std::chrono;
  const auto micros = static_cast<long long>(std::llround(epoch_seconds * 1e6));
  long long day_index = micros / 86400000000LL;
  long long rem = micros % 86400000000LL;
  if (rem < 0) {
    rem += 86400000000LL;
    --day_index;
  }
  const year_month_day ymd{sys_days{days{day_index}}};
  const long long secs = rem / 1000000, frac = rem % 1000000;
  char buf[48];
  if (frac == 0) {
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02lld:%02lld:%02lldZ", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()), secs / 3600, secs / 60 % 60,
                  secs % 60);
  } else {
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02lld:%02lld:%02lld.%06lldZ", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()), secs / 3600, secs / 60 % 60,
                  secs % 60, frac);
  }
  return buf;
}

/// Model time t = (time - origin) / unit_seconds.
struct TimeAxis {
  std::string origin = "2000-01-01T00:00:00Z";
  double unit_seconds = 86400.0;

  double to_model(const std::string& iso) const { return (parse_iso8601(iso) - parse_iso8601(origin)) / unit_seconds; }
  std::string to_iso(double t) const { return format_iso8601(parse_iso8601(origin) + t * unit_seconds); }
};

// --- 3D coordinates ---------------------------------------------------------------

inline double lat_to_theta(double lat_deg) { return kPi / 2.0 - lat_deg * kPi / 180.0; }
inline double theta_to_lat(double theta) { return 90.0 - theta * 180.0 / kPi; }

inline double lon_to_phi(double lon_deg) {
  double phi = std::fmod(lon_deg * kPi / 180.0, 2.0 * kPi);
  if (phi < 0.0) phi += 2.0 * kPi;
  return phi;
}
inline double phi_to_lon(double phi) { return phi * 180.0 / kPi; }

// --- observation CSV ----------------------------------------------------------------

inline const std::vector<std::string>& observation_header(Mode m) {
  static const std::vector<std::string> h2{"x", "z", "t", "var", "value"};
  static const std::vector<std::string> h3{"depth_m", "lat_deg", "lon_deg", "time_iso8601", "var", "value"};
  return m == Mode::TwoD ? h2 : h3;
}

inline std::string write_observations(const std::vector<Observation2>& obs) {
  std::string s = join_header(observation_header(Mode::TwoD)) + "\n";
  const auto& names = field_names(Mode::TwoD);
  for (const auto& o : obs) {
    s += format_real(o.point[0]) + "," + format_real(o.point[1]) + "," + format_real(o.point[2]) + "," +
         names.at(o.var) + "," + format_real(o.value) + "\n";
  }
  return s;
}

/// depth_m = -r_a; the time column carries the ISO form of t on `axis`.
inline std::string write_observations(const std::vector<Observation3>& obs, const TimeAxis& axis) {
  std::string s = join_header(observation_header(Mode::ThreeD)) + "\n";
  const auto& names = field_names(Mode::ThreeD);
  for (const auto& o : obs) {
    s += format_real(o.point[0] == 0.0 ? 0.0 : -o.point[0]) + "," + format_real(theta_to_lat(o.point[1])) + "," +
         format_real(phi_to_lon(o.point[2])) + "," + axis.to_iso(o.point[3]) + "," + names.at(o.var) + "," +
         format_real(o.value) + "\n";
  }
  return s;
}

inline std::vector<Observation2> read_observations_2d(const std::string& text, const std::string& what = "observations") {
  const auto t = parse_csv(text, what);
  expect_header(t, observation_header(Mode::TwoD), what);
  std::vector<Observation2> out;
  out.reserve(t.rows.size());
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& r = t.rows[i];
    const std::string at = what + " line " + std::to_string(t.line[i]);
    Observation2 o;
    for (std::size_t k = 0; k < 3; ++k) o.point[k] = parse_real(r[k], at);
    try {
      o.var = field_index(Mode::TwoD, r[3]);
    } catch (const InvalidArgument&) {
      throw InvalidArgument(at + ": unknown variable '" + r[3] + "' (2D uses tau, v, w, p)");
    }
    o.value = parse_real(r[4], at);
    out.push_back(o);
  }
  return out;
}

inline std::vector<Observation3> read_observations_3d(const std::string& text, const TimeAxis& axis,
                                                      const std::string& what = "observations") {
  const auto t = parse_csv(text, what);
  expect_header(t, observation_header(Mode::ThreeD), what);
  std::vector<Observation3> out;
  out.reserve(t.rows.size());
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& r = t.rows[i];
    const std::string at = what + " line " + std::to_string(t.line[i]);
    Observation3 o;
    const double depth = parse_real(r[0], at);
    const double lat = parse_real(r[1], at);
    if (depth < 0.0) throw InvalidArgument(at + ": depth_m must be >= 0");
    if (lat < -90.0 || lat > 90.0) throw InvalidArgument(at + ": lat_deg must lie in [-90, 90]");
    o.point = {depth == 0.0 ? 0.0 : -depth, lat_to_theta(lat), lon_to_phi(parse_real(r[2], at)), axis.to_model(r[3])};
    try {
      o.var = field_index(Mode::ThreeD, r[4]);
    } catch (const InvalidArgument&) {
      throw InvalidArgument(at + ": unknown variable '" + r[4] + "' (3D uses tau, sal, w, v_theta, v_phi, p)");
    }
    o.value = parse_real(r[5], at);
    out.push_back(o);
  }
  return out;
}

// --- trace CSV --------------------------------------------------------------------------

/// iter,e_data,e_pde,e_icbc,total,<coefficients...>
/// A diverged run keeps its trace, so non-finite cells are written as
/// nan / inf / -inf here (and only here).
inline std::string write_trace(const TrainTrace& trace) {
  auto cell = [](double v) {
    if (std::isfinite(v)) return format_real(v);
    return std::string(std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf"));
  };
  std::string s = "iter,e_data,e_pde,e_icbc,total";
  for (const auto& n : trace.coefficient_names) s += "," + n;
  s += "\n";
  for (const auto& r : trace.records) {
    s += std::to_string(r.iter) + "," + cell(r.loss.e_data) + "," + cell(r.loss.e_pde) + "," + cell(r.loss.e_icbc) +
         "," + cell(r.loss.total);
    for (double c : r.coefficients) s += "," + cell(c);
    s += "\n";
  }
  return s;
}

}  // namespace mdrf::io
