#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "mplace/types.hpp"

namespace mplace {

/// A malformed input line. `line()` is 1-based; 0 means the problem is not tied to one line.
class ParseError : public ValidationError {
 public:
  ParseError(int line, const std::string& what)
      : ValidationError(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

/// One row of contest metrics for a design, as reported by the downstream P&R flow.
struct MetricsRecord {
  std::string design;
  double t_mp = 0.0;  ///< minutes
  double t_pr = 0.0;  ///< hours
  std::array<double, 4> l_short{};
  std::array<double, 4> l_global{};
  int dri = 1;
  bool hidden = false;
  friend bool operator==(const MetricsRecord&, const MetricsRecord&) = default;
};

/// Shortest decimal text that reads back to the same double.
std::string format_number(double v);

FpgaLayout parse_layout(std::string_view text);
std::string write_layout(const FpgaLayout& layout);

Design parse_design(std::string_view text, const FpgaLayout& layout);
std::string write_design(const Design& design);

Placement parse_placement(std::string_view text, const Design& design);
std::string write_placement(const Design& design, const Placement& placement);

std::vector<MetricsRecord> parse_metrics(std::string_view text);
std::string write_metrics(const std::vector<MetricsRecord>& records);

/// Standalone SVG drawing of the fabric columns, macros, cascade outlines and regions.
std::string write_svg(const FpgaLayout& layout, const Design& design, const Placement& placement);

std::string read_file(const std::filesystem::path& path);
/// Writes through a temporary sibling and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

}  // namespace mplace
