#pragma once

// Plain-text instance format, one record per line, '#' starts a comment:
//
//   values  1 2 3
//   prior   1/3 1/3 1/3
//   segment 2/3  1/2 1/6 1/3
//   segment 1/6  0 1/3 2/3
//
// A `segment` record is the weight followed by the posterior over the grid's
// values. Entries are separated by whitespace and/or commas; integers,
// fractions and decimals are all accepted.

#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "robustseg/market.hpp"

namespace robustseg {

/// Splits on commas and whitespace.
inline std::vector<std::string> split_list(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (c == ',' || std::isspace(static_cast<unsigned char>(c))) {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

template <class T>
std::vector<T> parse_list(std::string_view text) {
  std::vector<T> out;
  for (const auto& tok : split_list(text)) out.push_back(parse_number<T>(tok));
  return out;
}

template <class T>
struct InstanceFile {
  std::optional<ValuationGrid<T>> grid;
  std::vector<Segment<T>> segments;
};

/// True if every numeric token in the stream is an integer or a fraction.
inline bool text_is_exact(std::istream& in) {
  std::string line;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    auto toks = split_list(line);
    for (std::size_t i = 1; i < toks.size(); ++i)
      if (!is_exact_literal(toks[i])) return false;
  }
  return true;
}

template <class T>
InstanceFile<T> read_instance(std::istream& in) {
  std::optional<std::vector<T>> values, prior;
  std::vector<std::vector<T>> raw_segments;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    auto toks = split_list(line);
    if (toks.empty()) continue;
    const std::string key = toks.front();
    std::vector<T> nums;
    for (std::size_t i = 1; i < toks.size(); ++i) nums.push_back(parse_number<T>(toks[i]));
    if (key == "values") {
      values = std::move(nums);
    } else if (key == "prior") {
      prior = std::move(nums);
    } else if (key == "segment") {
      if (nums.size() < 2) throw ValidationError("line " + std::to_string(lineno) + ": segment needs a weight and a posterior");
      raw_segments.push_back(std::move(nums));
    } else {
      throw ValidationError("line " + std::to_string(lineno) + ": unknown record '" + key + "'");
    }
  }
  InstanceFile<T> out;
  if (values || prior) {
    if (!values || !prior) throw ValidationError("instance needs both 'values' and 'prior'");
    out.grid.emplace(std::move(*values), std::move(*prior));
  }
  for (auto& raw : raw_segments) {
    T weight = raw.front();
    raw.erase(raw.begin());
    if (out.grid && raw.size() != out.grid->size()) throw ValidationError("segment dimension does not match grid");
    out.segments.push_back({std::move(weight), Posterior<T>(std::move(raw))});
  }
  return out;
}

template <class T>
void write_grid(std::ostream& out, const ValuationGrid<T>& grid, int digits = 17) {
  out << "values";
  for (const auto& v : grid.values()) out << ' ' << format_number(v, digits);
  out << "\nprior";
  for (const auto& p : grid.prior()) out << ' ' << format_number(p, digits);
  out << '\n';
}

template <class T>
void write_segments(std::ostream& out, const std::vector<Segment<T>>& segments, int digits = 17) {
  for (const auto& seg : segments) {
    out << "segment " << format_number(seg.weight, digits);
    for (const auto& p : seg.posterior.probs()) out << ' ' << format_number(p, digits);
    out << '\n';
  }
}

template <class T>
void write_segmentation(std::ostream& out, const Segmentation<T>& sigma, int digits = 17) {
  write_segments(out, sigma.segments(), digits);
}

}  // namespace robustseg
