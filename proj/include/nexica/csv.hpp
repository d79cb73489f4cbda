#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

namespace nexica::csv {

// Minimal comma-separated reader. Fields are unquoted; surrounding whitespace
// is trimmed; blank lines and lines starting with '#' are skipped.
class Reader {
public:
  explicit Reader(const std::string& path);

  // Advances to the next non-blank record. Returns false at end of file.
  bool next();

  const std::vector<std::string>& fields() const { return fields_; }
  std::size_t line_number() const { return line_no_; }
  const std::string& path() const { return path_; }

  // Throws ParseError that names the file and the current line.
  [[noreturn]] void fail(const std::string& what) const;

  double field_double(std::size_t i) const;
  std::int64_t field_int(std::size_t i) const;
  void expect_columns(std::size_t n) const;

private:
  std::string path_;
  std::ifstream in_;
  std::string line_;
  std::vector<std::string> fields_;
  std::size_t line_no_ = 0;
};

std::vector<std::string> split(std::string_view line, char sep = ',');
std::string_view trim(std::string_view s);

// Shortest text that parses back to exactly the same double.
std::string format_double(double v);

bool parse_double(std::string_view s, double& out);
bool parse_int(std::string_view s, std::int64_t& out);

// Opens a file for writing or throws nexica::Error.
std::ofstream open_output(const std::string& path);

} // namespace nexica::csv
