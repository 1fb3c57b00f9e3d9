// SPDX-License-Identifier: Apache-2.0
#include "doorinet/io.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <sstream>

#include "doorinet/error.hpp"

namespace doorinet {

namespace {

constexpr std::array<std::string_view, 7> kImuColumns = {"t", "fx", "fy", "fz", "wx", "wy", "wz"};
constexpr std::array<std::string_view, 2> kGtColumns = {"t", "heading_deg"};

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

// Parses a CSV into rows of the requested columns. Returns (line number,
// values) pairs so later checks can still cite the source line.
struct Row {
  std::size_t line;
  std::vector<double> v;
};

std::vector<Row> read_table(const std::filesystem::path& path,
                            std::span<const std::string_view> columns) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  const std::string where = path.string();
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::size_t> pos;
  std::size_t n_fields = 0;
  std::vector<Row> rows;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view sv = trim(line);
    if (line_no == 1 && sv.starts_with("\xEF\xBB\xBF")) sv.remove_prefix(3);
    if (sv.empty() || sv.front() == '#') continue;
    const std::vector<std::string_view> fields = split(sv);
    if (!have_header) {
      for (std::string_view col : columns) {
        const auto it = std::find(fields.begin(), fields.end(), col);
        if (it == fields.end()) {
          throw FormatError(where + ":" + std::to_string(line_no) + ": missing column '" +
                            std::string(col) + "'");
        }
        pos.push_back(static_cast<std::size_t>(it - fields.begin()));
      }
      n_fields = fields.size();
      have_header = true;
      continue;
    }
    if (fields.size() != n_fields) {
      throw FormatError(where + ":" + std::to_string(line_no) + ": expected " +
                        std::to_string(n_fields) + " fields, found " + std::to_string(fields.size()));
    }
    Row row{line_no, std::vector<double>(columns.size())};
    for (std::size_t c = 0; c < columns.size(); ++c) {
      const std::string_view f = fields[pos[c]];
      const auto [end, ec] = std::from_chars(f.data(), f.data() + f.size(), row.v[c]);
      if (ec != std::errc() || end != f.data() + f.size() || !std::isfinite(row.v[c])) {
        throw FormatError(where + ":" + std::to_string(line_no) + ": column '" +
                          std::string(columns[c]) + "' has unparseable value '" + std::string(f) +
                          "'");
      }
    }
    rows.push_back(std::move(row));
  }
  if (!have_header) throw FormatError(where + ": empty file");
  if (rows.empty()) throw FormatError(where + ": no data rows");
  std::stable_sort(rows.begin(), rows.end(),
                   [](const Row& a, const Row& b) { return a.v[0] < b.v[0]; });
  const auto last = std::unique(rows.begin(), rows.end(),
                                [](const Row& a, const Row& b) { return a.v[0] == b.v[0]; });
  rows.erase(last, rows.end());
  return rows;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  return out;
}

}  // namespace

std::span<const std::string_view> schema_columns(CsvSchema schema) {
  if (schema == CsvSchema::imu) return kImuColumns;
  return kGtColumns;
}

RecordingSession load_imu_csv(const std::filesystem::path& path, const std::string& imu_id) {
  const std::vector<Row> rows = read_table(path, kImuColumns);
  RecordingSession s;
  s.imu_id = imu_id.empty() ? path.stem().string() : imu_id;
  s.samples.reserve(rows.size());
  for (const Row& r : rows) {
    s.samples.push_back({r.v[0], {r.v[1], r.v[2], r.v[3]}, AngularRate::from_deg_s(r.v[4], r.v[5], r.v[6])});
  }
  s.rate_hz = estimate_rate_hz(s.samples);
  return s;
}

HeadingSeries load_gt_csv(const std::filesystem::path& path) {
  HeadingSeries gt;
  for (const Row& r : read_table(path, kGtColumns)) gt.push_back(r.v[0], r.v[1]);
  return gt;
}

std::string format_double(double v) {
  std::array<char, 64> buf;
  const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc()) throw Error("format_double failed");
  return std::string(buf.data(), end);
}

void write_imu_csv(const std::filesystem::path& path, std::span<const ImuSample> samples) {
  std::ofstream out = open_out(path);
  out << "t,fx,fy,fz,wx,wy,wz\n";
  for (const ImuSample& s : samples) {
    out << format_double(s.t) << ',' << format_double(s.f.x) << ',' << format_double(s.f.y) << ','
        << format_double(s.f.z) << ',' << format_double(rad_to_deg(s.w.x)) << ','
        << format_double(rad_to_deg(s.w.y)) << ',' << format_double(rad_to_deg(s.w.z)) << '\n';
  }
  if (!out) throw Error("write to '" + path.string() + "' failed");
}

void write_gt_csv(const std::filesystem::path& path, const HeadingSeries& gt) {
  std::ofstream out = open_out(path);
  out << "t,heading_deg\n";
  for (std::size_t i = 0; i < gt.size(); ++i) {
    out << format_double(gt.t[i]) << ',' << format_double(gt.heading_deg[i]) << '\n';
  }
  if (!out) throw Error("write to '" + path.string() + "' failed");
}

double estimate_rate_hz(std::span<const ImuSample> samples) {
  if (samples.size() < 2) return 0.0;
  std::vector<double> dt(samples.size() - 1);
  for (std::size_t i = 1; i < samples.size(); ++i) dt[i - 1] = samples[i].t - samples[i - 1].t;
  std::nth_element(dt.begin(), dt.begin() + dt.size() / 2, dt.end());
  const double mid = dt[dt.size() / 2];
  return mid > 0.0 ? 1.0 / mid : 0.0;
}

}  // namespace doorinet
