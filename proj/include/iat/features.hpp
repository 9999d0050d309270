#pragma once

// Per-block latency features, correlation pruning and dataset assembly.

#include <iat/errors.hpp>
#include <iat/scoring.hpp>
#include <iat/session.hpp>
#include <iat/stats.hpp>

#include <json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace iat {

enum class Label { First, Second };

inline constexpr std::string_view to_string(Label l) {
  return l == Label::First ? "first" : "second";
}

inline Label label_from_string(std::string_view s) {
  if (s == "first") return Label::First;
  if (s == "second") return Label::Second;
  throw ParseError("label", "expected first|second, got '" + std::string(s) + "'");
}

enum class Variant { Unpruned, Pruned };

inline constexpr std::string_view to_string(Variant v) {
  return v == Variant::Unpruned ? "unpruned" : "pruned";
}

inline constexpr std::size_t kStatsPerBlock = 8;
inline constexpr std::size_t kFeatureCount = kStatsPerBlock * kBlockCount;

inline constexpr std::array<std::string_view, kStatsPerBlock> kBlockStatNames = {
    "error_pct", "fast_pct", "min", "q1", "median", "q3", "max", "skewness"};

/// "b<block>_<stat>" for blocks 1..7 in order.
inline std::vector<std::string> feature_names() {
  std::vector<std::string> names;
  names.reserve(kFeatureCount);
  for (int b = 1; b <= kBlockCount; ++b)
    for (auto s : kBlockStatNames)
      names.push_back("b" + std::to_string(b) + "_" + std::string(s));
  return names;
}

struct FeatureVector {
  std::string session_id;
  Label label = Label::First;
  std::vector<double> values;

  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

struct FeatureMatrix {
  std::vector<FeatureVector> rows;
  std::vector<std::string> feature_names;
  std::vector<bool> selected;
  Variant variant = Variant::Unpruned;

  std::size_t width() const { return feature_names.size(); }

  std::size_t selected_count() const {
    return static_cast<std::size_t>(
        std::count(selected.begin(), selected.end(), true));
  }

  std::vector<std::size_t> selected_indices() const {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < selected.size(); ++i)
      if (selected[i]) idx.push_back(i);
    return idx;
  }

  std::vector<double> column(std::size_t j) const {
    std::vector<double> c;
    c.reserve(rows.size());
    for (const auto& r : rows) c.push_back(r.values.at(j));
    return c;
  }

  /// Same columns and mask, only the given rows.
  FeatureMatrix subset(std::span<const std::size_t> row_idx) const {
    FeatureMatrix m{{}, feature_names, selected, variant};
    m.rows.reserve(row_idx.size());
    for (auto i : row_idx) m.rows.push_back(rows.at(i));
    return m;
  }
};

/// error_pct, fast_pct, five-number summary and skewness of one block.
inline std::array<double, kStatsPerBlock> block_features(
    std::span<const Trial> trials) {
  if (trials.size() < 3)
    throw InsufficientDataError("block features need at least 3 trials, got " +
                                std::to_string(trials.size()));
  std::vector<double> lat;
  lat.reserve(trials.size());
  std::size_t errors = 0, fast = 0;
  for (const auto& t : trials) {
    lat.push_back(t.latency_ms);
    errors += t.correct ? 0 : 1;
    fast += t.latency_ms < kFastTrialMs ? 1 : 0;
  }
  const auto n = static_cast<double>(trials.size());
  const auto f = stats::five_number_summary(lat);
  return {static_cast<double>(errors) / n, static_cast<double>(fast) / n,
          f.min, f.q1, f.median, f.q3, f.max, stats::skewness(lat)};
}

/// 56 features, blocks 1..7 in order. Reads only trials and the attempt label.
inline FeatureVector featurize(const Session& s) {
  FeatureVector fv{s.session_id, s.attempt == 1 ? Label::First : Label::Second, {}};
  fv.values.reserve(kFeatureCount);
  for (int b = 1; b <= kBlockCount; ++b) {
    try {
      const auto f = block_features(s.block(b).trials);
      fv.values.insert(fv.values.end(), f.begin(), f.end());
    } catch (const InsufficientDataError& e) {
      throw InsufficientDataError("block " + std::to_string(b) + ": " + e.what());
    }
  }
  return fv;
}

inline FeatureMatrix featurize_all(std::span<const Session> sessions,
                                   Variant variant = Variant::Unpruned) {
  FeatureMatrix m{{}, feature_names(), std::vector<bool>(kFeatureCount, true),
                  variant};
  m.rows.reserve(sessions.size());
  for (const auto& s : sessions) m.rows.push_back(featurize(s));
  return m;
}

/// Greedy correlation pruning over the given rows: walking pairs (i, j), i < j,
/// in index order, j is dropped when |r| exceeds the threshold or it is an
/// exact copy of i. The lower-indexed feature always survives.
inline std::vector<bool> correlation_mask(const FeatureMatrix& m,
                                          std::span<const std::size_t> rows,
                                          double threshold = 0.75) {
  if (!(threshold > 0.0 && threshold <= 1.0))
    throw DataError("selection threshold must be in (0, 1]");
  if (rows.size() < 2) throw InsufficientDataError("selection needs >= 2 rows");
  const auto w = m.width();
  std::vector<std::vector<double>> cols(w);
  for (std::size_t j = 0; j < w; ++j) {
    if (!m.selected[j]) continue;
    cols[j].reserve(rows.size());
    for (auto r : rows) cols[j].push_back(m.rows.at(r).values.at(j));
  }
  auto mask = m.selected;
  for (std::size_t i = 0; i < w; ++i) {
    if (!mask[i]) continue;
    for (std::size_t j = i + 1; j < w; ++j) {
      if (!mask[j]) continue;
      if (cols[i] == cols[j] ||
          std::abs(stats::pearson(cols[i], cols[j])) > threshold)
        mask[j] = false;
    }
  }
  return mask;
}

inline FeatureMatrix select_features(FeatureMatrix m, double threshold = 0.75) {
  std::vector<std::size_t> all(m.rows.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  m.selected = correlation_mask(m, all, threshold);
  return m;
}

/// A second attempt that moved against the sign of the first by at least one
/// first-attempt SD. With a zero first score either direction counts.
inline bool is_reversal(double d1, double d2, double sigma1) {
  const double delta = d2 - d1;
  if (std::abs(delta) < sigma1) return false;
  if (d1 == 0.0) return true;
  return (delta > 0.0) != (d1 > 0.0);
}

struct Datasets {
  FeatureMatrix unpruned;
  FeatureMatrix pruned;
  std::vector<Session> unpruned_sessions;
  std::vector<Session> pruned_sessions;
  double first_score_sd = 0.0;
  std::size_t reversals = 0;
};

/// Unpruned: every session. Pruned: every first attempt plus the second
/// attempts that reversed. D-scores decide membership but never enter rows.
inline Datasets assemble_datasets(const Cohort& c,
                                  std::span<const Session> extra_firsts = {}) {
  if (c.pairs.empty()) throw DataError("cannot assemble datasets from an empty cohort");
  std::vector<double> d1(c.pairs.size()), d2(c.pairs.size());
  for (std::size_t i = 0; i < c.pairs.size(); ++i) {
    d1[i] = d_score(c.pairs[i].first).d_score;
    d2[i] = d_score(c.pairs[i].second).d_score;
  }
  Datasets out;
  out.first_score_sd = d1.size() >= 2 ? stats::sample_sd(d1) : 0.0;
  std::vector<Session> all, pruned;
  for (std::size_t i = 0; i < c.pairs.size(); ++i) {
    all.push_back(c.pairs[i].first);
    all.push_back(c.pairs[i].second);
    pruned.push_back(c.pairs[i].first);
    if (is_reversal(d1[i], d2[i], out.first_score_sd)) {
      pruned.push_back(c.pairs[i].second);
      ++out.reversals;
    }
  }
  for (const auto& s : extra_firsts) {
    all.push_back(s);
    pruned.push_back(s);
  }
  out.unpruned = featurize_all(all, Variant::Unpruned);
  out.pruned = featurize_all(pruned, Variant::Pruned);
  out.unpruned_sessions = std::move(all);
  out.pruned_sessions = std::move(pruned);
  return out;
}

// ---- feature matrix file: CSV + sidecar JSON mask ----

inline void write_feature_csv(std::ostream& os, const FeatureMatrix& m) {
  for (const auto& n : m.feature_names) os << n << ',';
  os << "label,session_id\n";
  std::ostringstream cell;
  cell.precision(17);
  for (const auto& r : m.rows) {
    for (double v : r.values) {
      cell.str("");
      cell << v;
      os << cell.str() << ',';
    }
    os << to_string(r.label) << ',' << r.session_id << '\n';
  }
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace detail

/// Reads a feature CSV; the mask starts all-true.
inline FeatureMatrix read_feature_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw ParseError("header", "empty feature file");
  auto header = detail::split_csv_line(line);
  if (header.size() < 3 || header[header.size() - 2] != "label" ||
      header.back() != "session_id")
    throw ParseError("header", "expected trailing label,session_id columns");
  FeatureMatrix m;
  m.feature_names.assign(header.begin(), header.end() - 2);
  m.selected.assign(m.feature_names.size(), true);
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto cells = detail::split_csv_line(line);
    if (cells.size() != header.size())
      throw ParseError("line " + std::to_string(lineno), "wrong number of cells");
    FeatureVector r;
    for (std::size_t j = 0; j < m.feature_names.size(); ++j) {
      try {
        std::size_t used = 0;
        r.values.push_back(std::stod(cells[j], &used));
        if (used != cells[j].size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        throw ParseError("line " + std::to_string(lineno) + " column " +
                             m.feature_names[j],
                         "not a number");
      }
    }
    r.label = label_from_string(cells[cells.size() - 2]);
    r.session_id = cells.back();
    m.rows.push_back(std::move(r));
  }
  return m;
}

/// Selected feature names, as a JSON array.
inline std::string mask_to_json(const FeatureMatrix& m) {
  nlohmann::json arr = nlohmann::json::array();
  for (std::size_t i = 0; i < m.width(); ++i)
    if (m.selected[i]) arr.push_back(m.feature_names[i]);
  return arr.dump();
}

inline void apply_mask_json(FeatureMatrix& m, std::string_view json_text) {
  nlohmann::json arr;
  try {
    arr = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("mask", e.what());
  }
  if (!arr.is_array()) throw ParseError("mask", "expected an array of names");
  std::vector<bool> mask(m.width(), false);
  for (const auto& n : arr) {
    if (!n.is_string()) throw ParseError("mask", "expected feature names");
    auto it = std::find(m.feature_names.begin(), m.feature_names.end(),
                        n.get<std::string>());
    if (it == m.feature_names.end())
      throw ParseError("mask", "unknown feature '" + n.get<std::string>() + "'");
    mask[static_cast<std::size_t>(it - m.feature_names.begin())] = true;
  }
  if (std::find(mask.begin(), mask.end(), true) == mask.end())
    throw ParseError("mask", "at least one feature must be selected");
  m.selected = std::move(mask);
}

}  // namespace iat
