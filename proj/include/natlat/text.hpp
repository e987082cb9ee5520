#pragma once

// Line-oriented text formats: tokenizing, number parsing and locale-independent
// decimal output shared by the distribution, DAG, label-map and derivation formats.

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "natlat/distribution.hpp"

namespace natlat {

struct TextLine {
  int number = 0;  // 1-based
  std::vector<std::string> tokens;
};

/// Splits into whitespace-separated tokens; `#` starts a comment, blank lines are dropped.
std::vector<TextLine> tokenize_lines(std::string_view text);

std::string read_text_file(const std::filesystem::path& path);

std::size_t parse_index(const std::string& token, int line);
double parse_probability(const std::string& token, int line);

/// Fixed-point decimal with `digits` fractional digits, "C" locale regardless of environment.
std::string format_fixed(double value, int digits = 6);
/// Shortest representation that round-trips.
std::string format_shortest(double value);

/// Distribution text format:
///   vars <name:cardinality> ...
///   <idx> ... <probability>
/// Unlisted cells are zero.
JointDistribution parse_distribution(std::string_view text);
JointDistribution parse_distribution(std::span<const TextLine> lines);

/// Emits the `vars` header and every nonzero cell.
std::string format_distribution(const JointDistribution& p);

}  // namespace natlat
