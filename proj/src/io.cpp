#include "abcpet/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "abcpet/error.hpp"

namespace abcpet {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_number(const std::string& s, std::size_t line_no) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || s.empty() || !std::isfinite(v))
    fail(ErrorCode::FormatError,
         "line " + std::to_string(line_no) + ": '" + s + "' is not a finite number");
  return v;
}

std::vector<std::vector<double>> parse_rows(const std::string& text,
                                            const std::vector<std::string>& header) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  bool saw_header = false;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto fields = split_csv(t);
    if (!saw_header) {
      if (fields != header) {
        std::string want;
        for (const auto& h : header) want += (want.empty() ? "" : ",") + h;
        fail(ErrorCode::FormatError, "expected header '" + want + "'");
      }
      saw_header = true;
      continue;
    }
    if (fields.size() != header.size())
      fail(ErrorCode::FormatError, "line " + std::to_string(line_no) + ": expected " +
                                       std::to_string(header.size()) + " fields");
    std::vector<double> row;
    for (const auto& f : fields) row.push_back(parse_number(f, line_no));
    rows.push_back(std::move(row));
  }
  if (!saw_header) fail(ErrorCode::FormatError, "missing CSV header");
  if (rows.empty()) fail(ErrorCode::FormatError, "CSV has no data rows");
  return rows;
}

std::string first_header_line(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const std::string t = trim(line);
    if (!t.empty() && t[0] != '#') return t;
  }
  return {};
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) return "nan";
  return std::string(buf, ptr);
}

std::uint64_t fnv1a64(const std::string& bytes) noexcept {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IOError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::IOError, "cannot write " + path.string());
  out << text;
  if (!out) fail(ErrorCode::IOError, "write failed for " + path.string());
}

Tac parse_tac_csv(const std::string& text, double sub_step) {
  const auto rows = parse_rows(text, {"t_start", "t_end", "value"});
  std::vector<double> starts, ends, values;
  for (const auto& r : rows) {
    starts.push_back(r[0]);
    ends.push_back(r[1]);
    values.push_back(r[2]);
  }
  double min_duration = INFINITY;
  for (std::size_t i = 0; i < starts.size(); ++i) {
    if (!(ends[i] > starts[i]) || (i > 0 && !(starts[i] >= ends[i - 1])))
      fail(ErrorCode::FormatError, "TAC frame times must be monotone and non-overlapping");
    min_duration = std::min(min_duration, ends[i] - starts[i]);
  }
  if (starts.front() < 0.0) fail(ErrorCode::FormatError, "TAC frames cannot start before 0");
  try {
    return Tac(make_grid(TimeGrid(std::move(starts), std::move(ends),
                                  std::min(sub_step, min_duration))),
               std::move(values));
  } catch (const Error& e) {
    fail(ErrorCode::FormatError, e.what());
  }
}

Tac read_tac_csv(const std::filesystem::path& path, double sub_step) {
  return parse_tac_csv(read_text_file(path), sub_step);
}

std::string tac_csv(const Tac& tac) {
  std::string out = "t_start,t_end,value\n";
  const TimeGrid& g = tac.grid();
  for (std::size_t i = 0; i < tac.size(); ++i) {
    out += format_double(g.frame_start(i));
    out += ',';
    out += format_double(g.frame_end(i));
    out += ',';
    out += format_double(tac[i]);
    out += '\n';
  }
  return out;
}

void write_tac_csv(const std::filesystem::path& path, const Tac& tac) {
  write_text_file(path, tac_csv(tac));
}

SampledCurve parse_sampled_curve_csv(const std::string& text) {
  SampledCurve out;
  const std::string header = first_header_line(text);
  if (header == "t_start,t_end,value") {
    for (const auto& r : parse_rows(text, {"t_start", "t_end", "value"})) {
      if (!(r[1] > r[0])) fail(ErrorCode::FormatError, "frame end must exceed frame start");
      out.times.push_back(0.5 * (r[0] + r[1]));
      out.values.push_back(r[2]);
    }
  } else {
    for (const auto& r : parse_rows(text, {"t", "value"})) {
      out.times.push_back(r[0]);
      out.values.push_back(r[1]);
    }
  }
  for (std::size_t i = 1; i < out.times.size(); ++i)
    if (!(out.times[i] > out.times[i - 1]))
      fail(ErrorCode::FormatError, "sample times must be strictly increasing");
  out.digest = hex64(fnv1a64(text));
  return out;
}

SampledCurve read_sampled_curve_csv(const std::filesystem::path& path) {
  return parse_sampled_curve_csv(read_text_file(path));
}

}  // namespace abcpet
