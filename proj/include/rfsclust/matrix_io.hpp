#pragma once

// Dissimilarity matrix CSV:
//   # metric=ospa p=2 c=20 base=euclidean
//   id,a,b,c
//   a,0,1.5,inf
//   ...

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "rfsclust/dataset_io.hpp"
#include "rfsclust/setdist.hpp"

namespace rfsclust {

inline std::string describe(const DistanceSpec& spec) {
  std::string out = "metric=" + to_string(spec.kind);
  if (spec.kind != DistanceKind::Hausdorff) out += " p=" + format_double(spec.order);
  if (spec.kind == DistanceKind::Ospa) out += " c=" + format_double(spec.cutoff);
  out += " base=euclidean";
  return out;
}

inline void write_dissimilarity_csv(const DissimilarityMatrix& d, std::ostream& out) {
  const std::size_t n = d.size();
  out << "# " << describe(d.spec) << '\n';
  out << "id";
  for (std::size_t j = 0; j < n; ++j) out << ',' << (d.ids.empty() ? "p" + std::to_string(j) : d.ids[j]);
  out << '\n';
  for (std::size_t i = 0; i < n; ++i) {
    out << (d.ids.empty() ? "p" + std::to_string(i) : d.ids[i]);
    for (std::size_t j = 0; j < n; ++j) out << ',' << format_double(d.values(i, j));
    out << '\n';
  }
}

inline void write_dissimilarity_csv(const DissimilarityMatrix& d, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "' for writing");
  write_dissimilarity_csv(d, out);
}

namespace detail {

inline std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream in(text);
  while (std::getline(in, cur, sep)) parts.push_back(cur);
  if (!text.empty() && text.back() == sep) parts.emplace_back();
  return parts;
}

}  // namespace detail

inline DissimilarityMatrix read_dissimilarity_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& why) {
    throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": " + why);
  };
  auto next_line = [&]() -> bool {
    if (!std::getline(in, line)) return false;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  };

  DissimilarityMatrix d;
  if (!next_line()) fail("empty matrix file");
  if (line.rfind("# ", 0) != 0) fail("expected '# metric=...' spec line");
  bool has_metric = false;
  for (const auto& token : detail::split(line.substr(2), ' ')) {
    if (token.empty()) continue;
    const auto eq = token.find('=');
    if (eq == std::string::npos) fail("malformed spec token '" + token + "'");
    const auto key = token.substr(0, eq);
    const auto value = token.substr(eq + 1);
    try {
      if (key == "metric") {
        d.spec.kind = parse_distance_kind(value);
        has_metric = true;
      } else if (key == "p") {
        d.spec.order = parse_double(value);
      } else if (key == "c") {
        d.spec.cutoff = parse_double(value);
      } else if (key == "base") {
        if (value != "euclidean") fail("unsupported base metric '" + value + "'");
      }
    } catch (const std::invalid_argument&) {
      fail("bad number in spec token '" + token + "'");
    }
  }
  if (!has_metric) fail("spec line lacks metric=");

  if (!next_line()) fail("missing id header");
  auto header = detail::split(line, ',');
  if (header.empty() || header.front() != "id") fail("header must start with 'id'");
  d.ids.assign(header.begin() + 1, header.end());
  const std::size_t n = d.ids.size();
  if (n == 0) fail("matrix has no columns");
  d.values = Matrix(n, n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (!next_line()) fail("expected " + std::to_string(n) + " rows, found " + std::to_string(i));
    auto cells = detail::split(line, ',');
    if (cells.size() != n + 1) fail("row has " + std::to_string(cells.size() - 1) + " values, expected " + std::to_string(n));
    if (cells.front() != d.ids[i]) fail("row id '" + cells.front() + "' does not match column '" + d.ids[i] + "'");
    for (std::size_t j = 0; j < n; ++j) {
      double v = 0.0;
      try {
        v = parse_double(cells[j + 1]);
      } catch (const std::exception&) {
        fail("bad number '" + cells[j + 1] + "'");
      }
      if (std::isnan(v) || v < 0) fail("dissimilarities must be nonnegative");
      d.values(i, j) = v;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (d.values(i, i) != 0.0) fail("nonzero diagonal at row " + std::to_string(i));
    for (std::size_t j = i + 1; j < n; ++j)
      if (d.values(i, j) != d.values(j, i))
        fail("matrix is not symmetric at (" + std::to_string(i) + ", " + std::to_string(j) + ")");
  }
  return d;
}

inline DissimilarityMatrix read_dissimilarity_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "'");
  return read_dissimilarity_csv(in);
}

}  // namespace rfsclust
