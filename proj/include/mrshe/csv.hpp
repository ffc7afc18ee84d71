#pragma once

#include <string>
#include <vector>

namespace mrshe {

// Shortest decimal representation that round-trips to the same double.
std::string format_double(double v);

// CSV dialect used project-wide: comma separator, LF line endings, one header
// row, numeric-only payloads (no quoting).
class CsvWriter {
 public:
  void header(const std::vector<std::string>& names);
  void row(const std::vector<double>& values);
  const std::string& str() const { return buf_; }

 private:
  std::string buf_;
};

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

// Reads a numeric matrix; a leading non-numeric header row is skipped.
std::vector<std::vector<double>> read_csv_matrix(const std::string& path);

}  // namespace mrshe
