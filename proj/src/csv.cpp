#include "nexica/csv.hpp"

#include "nexica/error.hpp"

#include <charconv>
#include <cmath>
#include <system_error>

namespace nexica::csv {

Reader::Reader(const std::string& path) : path_(path), in_(path) {
  if (!in_) {
    throw Error("cannot open '" + path + "'");
  }
}

bool Reader::next() {
  while (std::getline(in_, line_)) {
    ++line_no_;
    if (!line_.empty() && line_.back() == '\r') line_.pop_back();
    const auto t = trim(line_);
    if (t.empty() || t.front() == '#') continue;
    fields_ = split(t);
    return true;
  }
  return false;
}

void Reader::fail(const std::string& what) const {
  throw ParseError(path_ + ":" + std::to_string(line_no_) + ": " + what);
}

void Reader::expect_columns(std::size_t n) const {
  if (fields_.size() != n) {
    fail("expected " + std::to_string(n) + " columns, got " + std::to_string(fields_.size()));
  }
}

double Reader::field_double(std::size_t i) const {
  double v = 0;
  if (i >= fields_.size() || !parse_double(fields_[i], v)) {
    fail("column " + std::to_string(i + 1) + " is not a number");
  }
  return v;
}

std::int64_t Reader::field_int(std::size_t i) const {
  std::int64_t v = 0;
  if (i >= fields_.size() || !parse_int(fields_[i], v)) {
    fail("column " + std::to_string(i + 1) + " is not an integer");
  }
  return v;
}

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(std::string_view line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    const auto piece = line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start);
    out.emplace_back(trim(piece));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) return std::to_string(v);
  return std::string(buf, ptr);
}

bool parse_double(std::string_view s, double& out) {
  s = trim(s);
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

bool parse_int(std::string_view s, std::int64_t& out) {
  s = trim(s);
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  return out;
}

} // namespace nexica::csv
