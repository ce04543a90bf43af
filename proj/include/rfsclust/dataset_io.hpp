#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "rfsclust/core.hpp"

namespace rfsclust {

// 17 significant digits round-trips every finite double exactly.
inline std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline double parse_double(const std::string& text) {
  if (text == "inf" || text == "+inf" || text == "Infinity") return INFINITY;
  if (text == "-inf" || text == "-Infinity") return -INFINITY;
  std::size_t used = 0;
  double v = std::stod(text, &used);
  if (used != text.size()) throw std::invalid_argument("trailing characters in number '" + text + "'");
  return v;
}

// One record: {"id": "...", "points": [[...], ...], "label": "..."}
inline std::string dataset_record(const std::string& id, const PointPattern& x,
                                  const std::string* label) {
  std::string line = "{\"id\":" + nlohmann::json(id).dump() + ",\"points\":[";
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (i) line += ',';
    line += '[';
    auto p = x.point(i);
    for (std::size_t j = 0; j < p.size(); ++j) {
      if (j) line += ',';
      line += format_double(p[j]);
    }
    line += ']';
  }
  line += ']';
  if (label) line += ",\"label\":" + nlohmann::json(*label).dump();
  line += '}';
  return line;
}

inline void write_dataset(const PatternDataset& data, std::ostream& out) {
  validate_dataset(data);
  for (std::size_t n = 0; n < data.size(); ++n) {
    const std::string* label = data.labels ? &(*data.labels)[n] : nullptr;
    out << dataset_record(data.id(n), data.patterns[n], label) << '\n';
  }
}

inline void write_dataset(const PatternDataset& data, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "' for writing");
  write_dataset(data, out);
  if (!out) throw Error(ErrorCode::IoError, "write to '" + path.string() + "' failed");
}

inline PatternDataset read_dataset(std::istream& in) {
  struct Raw {
    std::string id;
    std::vector<std::vector<double>> rows;
    std::optional<std::string> label;
    std::size_t line;
  };
  std::vector<Raw> raws;
  std::string text;
  std::size_t line_no = 0;
  std::size_t dim = 0;
  auto fail = [&](const std::string& why) {
    throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": " + why);
  };
  while (std::getline(in, text)) {
    ++line_no;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    if (text.find_first_not_of(" \t") == std::string::npos) continue;
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      fail(std::string("malformed record: ") + e.what());
    }
    if (!rec.is_object()) fail("record is not an object");
    Raw raw;
    raw.line = line_no;
    if (!rec.contains("id") || !rec["id"].is_string()) fail("missing string field 'id'");
    raw.id = rec["id"].get<std::string>();
    if (!rec.contains("points") || !rec["points"].is_array()) fail("missing array field 'points'");
    for (const auto& pt : rec["points"]) {
      if (!pt.is_array() || pt.empty()) fail("point is not a non-empty array of numbers");
      std::vector<double> row;
      for (const auto& c : pt) {
        if (!c.is_number()) fail("point coordinate is not a number");
        row.push_back(c.get<double>());
      }
      if (dim == 0) dim = row.size();
      if (row.size() != dim)
        fail("point of dimension " + std::to_string(row.size()) + " in a " + std::to_string(dim) +
             "-dimensional dataset");
      raw.rows.push_back(std::move(row));
    }
    if (rec.contains("label")) {
      if (!rec["label"].is_string()) fail("'label' must be a string");
      raw.label = rec["label"].get<std::string>();
    }
    raws.push_back(std::move(raw));
  }
  if (raws.empty()) throw Error(ErrorCode::EmptyDataset, "no records found");
  if (dim == 0) throw Error(ErrorCode::ParseError, "cannot infer dimension: every pattern is empty");

  PatternDataset data;
  data.dim = dim;
  const bool labelled = raws.front().label.has_value();
  if (labelled) data.labels.emplace();
  for (auto& raw : raws) {
    if (raw.label.has_value() != labelled) {
      line_no = raw.line;
      fail("labels must be present on every record or on none");
    }
    data.ids.push_back(raw.id);
    data.patterns.push_back(PointPattern::from_rows(raw.rows, dim));
    if (labelled) data.labels->push_back(*raw.label);
  }
  validate_dataset(data);
  return data;
}

inline PatternDataset read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "'");
  return read_dataset(in);
}

// Labels CSV: header "id,label", then one row per datum.
inline void write_labels_csv(const std::vector<std::string>& ids, const std::vector<std::string>& labels,
                             std::ostream& out) {
  if (ids.size() != labels.size()) throw Error(ErrorCode::LengthMismatch, "ids and labels differ in length");
  out << "id,label\n";
  for (std::size_t i = 0; i < ids.size(); ++i) out << ids[i] << ',' << labels[i] << '\n';
}

struct LabelTable {
  std::vector<std::string> ids;
  std::vector<std::string> labels;
};

inline LabelTable read_labels_csv(std::istream& in) {
  LabelTable table;
  std::string text;
  std::size_t line_no = 0;
  while (std::getline(in, text)) {
    ++line_no;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    if (text.empty()) continue;
    if (line_no == 1 && text == "id,label") continue;
    auto comma = text.find(',');
    if (comma == std::string::npos || text.find(',', comma + 1) != std::string::npos)
      throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": expected 'id,label'");
    table.ids.push_back(text.substr(0, comma));
    table.labels.push_back(text.substr(comma + 1));
  }
  return table;
}

inline LabelTable read_labels_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "'");
  return read_labels_csv(in);
}

}  // namespace rfsclust
