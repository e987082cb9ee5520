#include "natlat/text.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <algorithm>
#include <sstream>

namespace natlat {

std::vector<TextLine> tokenize_lines(std::string_view text) {
  std::vector<TextLine> out;
  int number = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    ++number;
    std::string_view line = text.substr(start, end - start);
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    TextLine tl{number, {}};
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
      std::size_t j = i;
      while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
      if (j > i) tl.tokens.emplace_back(line.substr(i, j - i));
      i = j;
    }
    if (!tl.tokens.empty()) out.push_back(std::move(tl));
    if (end == text.size()) break;
    start = end + 1;
  }
  return out;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(0, "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t parse_index(const std::string& token, int line) {
  std::size_t v = 0;
  const auto* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, v);
  if (ec != std::errc() || ptr != end) throw ParseError(line, "expected a non-negative integer, got '" + token + "'");
  return v;
}

double parse_probability(const std::string& token, int line) {
  double v = 0.0;
  const auto* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) {
    throw ParseError(line, "expected a decimal probability, got '" + token + "'");
  }
  if (v < 0.0) throw ParseError(line, "negative probability '" + token + "'");
  return v;
}

std::string format_fixed(double value, int digits) {
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  if (std::isnan(value)) return "nan";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::fixed, digits);
  if (ec != std::errc()) return "overflow";
  std::string s(buf, ptr);
  if (s.starts_with('-') && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
  return s;
}

std::string format_shortest(double value) {
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

JointDistribution parse_distribution(std::string_view text) {
  const auto lines = tokenize_lines(text);
  return parse_distribution(lines);
}

JointDistribution parse_distribution(std::span<const TextLine> lines) {
  if (lines.empty() || lines.front().tokens.front() != "vars") {
    throw ParseError(lines.empty() ? 0 : lines.front().number, "expected 'vars' header line");
  }
  const auto& header = lines.front();
  if (header.tokens.size() < 2) throw ParseError(header.number, "'vars' needs at least one variable");
  std::vector<VarSpec> vars;
  for (std::size_t t = 1; t < header.tokens.size(); ++t) {
    const auto& tok = header.tokens[t];
    const auto colon = tok.rfind(':');
    if (colon == std::string::npos || colon == 0) {
      throw ParseError(header.number, "expected <name:cardinality>, got '" + tok + "'");
    }
    const auto card = parse_index(tok.substr(colon + 1), header.number);
    if (card == 0) throw ParseError(header.number, "cardinality of '" + tok.substr(0, colon) + "' must be positive");
    vars.push_back({tok.substr(0, colon), card});
  }
  std::vector<std::pair<Assignment, double>> cells;
  std::vector<std::pair<std::uint64_t, int>> seen;  // (encoded cell, line)
  for (std::size_t l = 1; l < lines.size(); ++l) {
    const auto& line = lines[l];
    if (line.tokens.size() != vars.size() + 1) {
      throw ParseError(line.number, "expected " + std::to_string(vars.size()) + " indices and a probability");
    }
    Assignment a(vars.size());
    for (std::size_t k = 0; k < vars.size(); ++k) {
      a[k] = parse_index(line.tokens[k], line.number);
      if (a[k] >= vars[k].cardinality) {
        throw ParseError(line.number, "index " + line.tokens[k] + " out of range for '" + vars[k].name + "'");
      }
    }
    std::uint64_t code = 0;
    for (std::size_t k = 0; k < vars.size(); ++k) code = code * vars[k].cardinality + a[k];
    seen.emplace_back(code, line.number);
    cells.emplace_back(std::move(a), parse_probability(line.tokens.back(), line.number));
  }
  std::sort(seen.begin(), seen.end());
  for (std::size_t i = 1; i < seen.size(); ++i) {
    if (seen[i].first == seen[i - 1].first) {
      throw ParseError(std::max(seen[i].second, seen[i - 1].second), "cell listed twice");
    }
  }
  try {
    return JointDistribution::from_cells(std::move(vars), cells);
  } catch (const InvalidDistribution& e) {
    throw ParseError(header.number, e.what());
  }
}

std::string format_distribution(const JointDistribution& p) {
  std::string out = "vars";
  for (const auto& v : p.variables()) out += " " + v.name + ":" + std::to_string(v.cardinality);
  out += '\n';
  p.for_each_nonzero([&](std::span<const std::size_t> d, double v) {
    for (auto x : d) out += std::to_string(x) + ' ';
    out += format_shortest(v);
    out += '\n';
  });
  return out;
}

}  // namespace natlat
