#include <algorithm>
#include <charconv>
#include <fstream>
#include <numeric>
#include <string_view>

#include "amlgnn/error.hpp"
#include "amlgnn/graph.hpp"

namespace amlgnn {

namespace {

constexpr std::size_t kExpectedFeatureDim = 166;

class CsvReader {
 public:
  explicit CsvReader(const std::filesystem::path& path) : path_(path), in_(path) {
    if (!in_) throw Error(ErrorKind::MalformedCsv, "cannot open " + path.string());
  }

  // Splits the next non-empty line into fields; false at end of file.
  bool next(std::vector<std::string_view>& fields) {
    while (std::getline(in_, line_)) {
      ++line_no_;
      if (!line_.empty() && line_.back() == '\r') line_.pop_back();
      if (line_.empty()) continue;
      fields.clear();
      std::string_view rest(line_);
      while (true) {
        const auto comma = rest.find(',');
        fields.push_back(trim(rest.substr(0, comma)));
        if (comma == std::string_view::npos) break;
        rest.remove_prefix(comma + 1);
      }
      return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw Error(ErrorKind::MalformedCsv,
                path_.filename().string() + ":" + std::to_string(line_no_) + ": " + what);
  }

  template <typename T>
  T number(std::string_view field) const {
    T value{};
    const auto* end = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(field.data(), end, value);
    if (ec != std::errc() || ptr != end || field.empty()) {
      fail("non-numeric field '" + std::string(field) + "'");
    }
    return value;
  }

  std::size_t line_no() const { return line_no_; }

 private:
  static std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '"')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '"')) s.remove_suffix(1);
    return s;
  }

  std::filesystem::path path_;
  std::ifstream in_;
  std::string line_;
  std::size_t line_no_ = 0;
};

bool looks_numeric(std::string_view s) {
  if (s.empty()) return false;
  std::int64_t v{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  return ec == std::errc() && ptr == s.data() + s.size();
}

struct FeatureRow {
  std::int64_t id;
  std::int32_t step;
  std::size_t offset;  // into the raw feature buffer
};

}  // namespace

TransactionGraph load_elliptic(const std::filesystem::path& features_path,
                               const std::filesystem::path& classes_path,
                               const std::filesystem::path& edges_path,
                               std::vector<std::string>* warnings) {
  std::vector<std::string_view> fields;

  // Features: id, time step, then F numeric columns; no header.
  std::vector<FeatureRow> rows;
  std::vector<double> raw;
  std::size_t arity = 0;
  {
    CsvReader csv(features_path);
    while (csv.next(fields)) {
      if (arity == 0) {
        if (fields.size() < 2) csv.fail("feature rows need an id and a time step");
        arity = fields.size();
      } else if (fields.size() != arity) {
        csv.fail("expected " + std::to_string(arity) + " columns, got " +
                 std::to_string(fields.size()));
      }
      FeatureRow row{csv.number<std::int64_t>(fields[0]), csv.number<std::int32_t>(fields[1]),
                     raw.size()};
      if (row.step < 1) csv.fail("time step must be >= 1");
      for (std::size_t k = 2; k < fields.size(); ++k) raw.push_back(csv.number<double>(fields[k]));
      rows.push_back(row);
    }
  }
  if (rows.empty()) throw Error(ErrorKind::EmptyGraph, features_path.string() + " has no rows");

  std::sort(rows.begin(), rows.end(),
            [](const FeatureRow& a, const FeatureRow& b) { return a.id < b.id; });
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].id == rows[i - 1].id) {
      throw Error(ErrorKind::MalformedCsv, "duplicate transaction id " + std::to_string(rows[i].id));
    }
  }

  TransactionGraph g;
  g.num_nodes = rows.size();
  g.feat_dim = arity - 2;
  g.features.resize(g.num_nodes * g.feat_dim);
  g.time_steps.resize(g.num_nodes);
  g.original_ids.resize(g.num_nodes);
  g.labels.assign(g.num_nodes, static_cast<std::uint8_t>(Label::Unknown));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    g.original_ids[i] = rows[i].id;
    g.time_steps[i] = rows[i].step;
    g.num_steps = std::max(g.num_steps, rows[i].step);
    std::copy_n(raw.begin() + static_cast<std::ptrdiff_t>(rows[i].offset), g.feat_dim,
                g.features.begin() + static_cast<std::ptrdiff_t>(i * g.feat_dim));
  }
  raw = {};
  if (warnings && g.feat_dim != kExpectedFeatureDim) {
    warnings->push_back("feature dimension is " + std::to_string(g.feat_dim) + ", expected " +
                        std::to_string(kExpectedFeatureDim));
  }

  const auto index_of = [&](std::int64_t id) -> std::int32_t {
    auto it = std::lower_bound(g.original_ids.begin(), g.original_ids.end(), id);
    if (it == g.original_ids.end() || *it != id) {
      throw Error(ErrorKind::UnknownTxId, "transaction id " + std::to_string(id) +
                                              " not present in the features file");
    }
    return static_cast<std::int32_t>(it - g.original_ids.begin());
  };

  // Classes: header `txId,class`; "1" illicit, "2" licit, "unknown".
  {
    CsvReader csv(classes_path);
    bool first = true;
    while (csv.next(fields)) {
      if (first && !looks_numeric(fields[0])) {
        first = false;
        continue;
      }
      first = false;
      if (fields.size() != 2) csv.fail("expected 2 columns");
      const auto idx = static_cast<std::size_t>(index_of(csv.number<std::int64_t>(fields[0])));
      const auto cls = fields[1];
      if (cls == "1") {
        g.labels[idx] = static_cast<std::uint8_t>(Label::Illicit);
      } else if (cls == "2") {
        g.labels[idx] = static_cast<std::uint8_t>(Label::Licit);
      } else if (cls == "unknown") {
        g.labels[idx] = static_cast<std::uint8_t>(Label::Unknown);
      } else {
        csv.fail("unrecognised class '" + std::string(cls) + "'");
      }
    }
  }

  // Edges: header `txId1,txId2`; one directed edge per row.
  std::vector<std::pair<std::int32_t, std::int32_t>> edges;
  {
    CsvReader csv(edges_path);
    bool first = true;
    while (csv.next(fields)) {
      if (first && !looks_numeric(fields[0])) {
        first = false;
        continue;
      }
      first = false;
      if (fields.size() != 2) csv.fail("expected 2 columns");
      edges.emplace_back(index_of(csv.number<std::int64_t>(fields[0])),
                         index_of(csv.number<std::int64_t>(fields[1])));
    }
  }
  g.input_edges = edges.size();
  build_csr(g, edges);
  if (warnings && g.cross_step_edges > 0) {
    warnings->push_back(std::to_string(g.cross_step_edges) +
                        " edges join nodes from different time steps (kept)");
  }
  return g;
}

}  // namespace amlgnn
