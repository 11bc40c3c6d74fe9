#include "sste/ingestion.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

namespace sste {

namespace {

constexpr std::string_view kCheckinHeader = "user_id,timestamp,lat,lon";
constexpr std::string_view kFriendHeader = "user_id_a,user_id_b";

std::string loc(const std::filesystem::path& path, std::size_t line) {
  return path.string() + ":" + std::to_string(line);
}

// Splits on commas; strips a trailing '\r'. Returns false if the field count
// does not match.
bool split_fields(std::string_view row, std::size_t expected,
                  std::vector<std::string_view>& out) {
  if (!row.empty() && row.back() == '\r') row.remove_suffix(1);
  out.clear();
  std::size_t start = 0;
  while (true) {
    std::size_t comma = row.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(row.substr(start));
      break;
    }
    out.push_back(row.substr(start, comma - start));
    start = comma + 1;
  }
  return out.size() == expected;
}

template <typename T>
bool parse_number(std::string_view field, T& out) {
  const char* first = field.data();
  const char* last = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last && !field.empty();
}

std::ifstream open_or_throw(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open file: " + path.string());
  return in;
}

}  // namespace

CheckinSequence parse_checkins(const std::filesystem::path& path) {
  std::ifstream in = open_or_throw(path);
  std::string line;
  if (!std::getline(in, line)) return CheckinSequence{};  // empty file
  {
    std::string_view header = line;
    if (!header.empty() && header.back() == '\r') header.remove_suffix(1);
    if (header != kCheckinHeader) {
      throw ParseError(loc(path, 1) + ": expected header '" +
                       std::string(kCheckinHeader) + "'");
    }
  }

  std::vector<Checkin> records;
  std::vector<std::string_view> f;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    if (!split_fields(line, 4, f)) {
      throw ParseError(loc(path, lineno) + ": expected 4 fields");
    }
    Checkin r;
    r.user = std::string(f[0]);
    if (r.user.empty()) throw ParseError(loc(path, lineno) + ": empty user id");
    if (!parse_number(f[1], r.time) || r.time < 0) {
      throw ParseError(loc(path, lineno) + ": non-numeric or negative timestamp '" +
                       std::string(f[1]) + "'");
    }
    if (!parse_number(f[2], r.lat) || !parse_number(f[3], r.lon)) {
      throw ParseError(loc(path, lineno) + ": non-numeric coordinate");
    }
    if (r.lat < -90.0 || r.lat > 90.0 || r.lon < -180.0 || r.lon > 180.0) {
      throw ParseError(loc(path, lineno) + ": coordinate out of range");
    }
    records.push_back(std::move(r));
  }
  return CheckinSequence::from_records(std::move(records));
}

FriendshipGraph parse_friendship(const std::filesystem::path& path) {
  std::ifstream in = open_or_throw(path);
  FriendshipGraph g;
  std::string line;
  if (!std::getline(in, line)) return g;
  {
    std::string_view header = line;
    if (!header.empty() && header.back() == '\r') header.remove_suffix(1);
    if (header != kFriendHeader) {
      throw ParseError(loc(path, 1) + ": expected header '" +
                       std::string(kFriendHeader) + "'");
    }
  }
  std::vector<std::string_view> f;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    if (!split_fields(line, 2, f)) {
      throw ParseError(loc(path, lineno) + ": expected 2 fields");
    }
    if (f[0].empty() || f[1].empty()) {
      throw ParseError(loc(path, lineno) + ": empty user id");
    }
    if (f[0] == f[1]) {
      throw ParseError(loc(path, lineno) + ": self-loop edge '" + std::string(f[0]) + "'");
    }
    g.add_edge(std::string(f[0]), std::string(f[1]));
  }
  return g;
}

namespace {

// Shortest round-trip decimal form, locale-independent.
std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  double back = 0.0;
  std::sscanf(buf, "%lf", &back);
  if (back == v) {
    for (int prec = 1; prec < 17; ++prec) {
      char shorter[32];
      std::snprintf(shorter, sizeof(shorter), "%.*g", prec, v);
      std::sscanf(shorter, "%lf", &back);
      if (back == v) return shorter;
    }
  }
  return buf;
}

}  // namespace

void write_checkins(const CheckinSequence& seq, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ParseError("cannot write file: " + path.string());
  out << kCheckinHeader << '\n';
  for (const auto& r : seq.records()) {
    out << r.user << ',' << r.time << ',' << fmt_double(r.lat) << ','
        << fmt_double(r.lon) << '\n';
  }
}

void write_friendship(const FriendshipGraph& graph, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ParseError("cannot write file: " + path.string());
  out << kFriendHeader << '\n';
  for (const auto& [u, nbrs] : graph.adjacency()) {
    for (const auto& v : nbrs) {
      if (u < v) out << u << ',' << v << '\n';
    }
  }
}

}  // namespace sste
