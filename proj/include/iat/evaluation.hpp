#pragma once

// Cross-validation harness, evaluation reports and cohort summary statistics.

#include <iat/detectors.hpp>
#include <iat/errors.hpp>
#include <iat/features.hpp>
#include <iat/metrics.hpp>
#include <iat/scoring.hpp>
#include <iat/session.hpp>
#include <iat/stats.hpp>

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace iat {

struct Scheme {
  enum class Kind { Loocv, KFold };
  Kind kind = Kind::Loocv;
  int k = 10;

  static Scheme loocv() { return {Kind::Loocv, 0}; }
  static Scheme kfold(int k) { return {Kind::KFold, k}; }

  std::string name() const {
    return kind == Kind::Loocv ? "loocv" : "kfold(" + std::to_string(k) + ")";
  }
};

/// Held-out row indices per fold. k-fold folds are stratified: each label's
/// rows are shuffled with `seed` and dealt round-robin.
inline std::vector<std::vector<std::size_t>> make_folds(
    const FeatureMatrix& m, const Scheme& scheme, std::uint64_t seed) {
  const auto n = m.rows.size();
  std::vector<std::vector<std::size_t>> folds;
  if (scheme.kind == Scheme::Kind::Loocv) {
    if (n < 3) throw DataError("LOOCV needs at least 3 rows");
    for (std::size_t i = 0; i < n; ++i) folds.push_back({i});
    return folds;
  }
  if (scheme.k < 2) throw DataError("k-fold needs k >= 2");
  if (n < static_cast<std::size_t>(scheme.k))
    throw DataError("fewer rows than folds");
  std::array<std::vector<std::size_t>, 2> by_label;
  for (std::size_t i = 0; i < n; ++i)
    by_label[m.rows[i].label == Label::Second ? 1 : 0].push_back(i);
  std::mt19937_64 rng(seed);
  folds.resize(static_cast<std::size_t>(scheme.k));
  std::size_t next = 0;
  for (auto& group : by_label) {
    std::shuffle(group.begin(), group.end(), rng);
    for (auto i : group) {
      folds[next].push_back(i);
      next = (next + 1) % folds.size();
    }
  }
  for (auto& f : folds) std::sort(f.begin(), f.end());
  return folds;
}

struct CvOptions {
  /// Recompute the correlation mask on each fold's training rows.
  bool per_fold_selection = false;
  double selection_threshold = 0.75;
};

/// Training matrix for a fold: every row not held out, with the fold's mask.
inline FeatureMatrix training_rows(const FeatureMatrix& m,
                                   std::span<const std::size_t> held_out,
                                   const CvOptions& opt = {}) {
  std::vector<std::size_t> train;
  train.reserve(m.rows.size());
  for (std::size_t i = 0; i < m.rows.size(); ++i)
    if (!std::binary_search(held_out.begin(), held_out.end(), i)) train.push_back(i);
  FeatureMatrix t = m.subset(train);
  if (opt.per_fold_selection) t = select_features(std::move(t), opt.selection_threshold);
  return t;
}

/// Fits the model for one fold using only the training rows.
inline DetectorModel fit_fold(DetectorKind kind, const FeatureMatrix& m,
                              const TrainConfig& cfg,
                              std::span<const std::size_t> held_out,
                              const CvOptions& opt = {}) {
  return fit(kind, training_rows(m, held_out, opt), cfg);
}

struct Prediction {
  std::string session_id;
  Label truth = Label::First;
  double proba = 0.0;
  bool predicted_second = false;

  friend bool operator==(const Prediction&, const Prediction&) = default;
};

struct EvalReport {
  DetectorKind detector = DetectorKind::NaiveBayes;
  Variant variant = Variant::Unpruned;
  Scheme scheme;
  std::vector<Prediction> predictions;
  Confusion confusion;
  Metrics metrics;
  std::uint64_t seed = 0;
  std::size_t selected_features = 0;
  std::size_t folds = 0;
};

inline EvalReport cross_validate(DetectorKind kind, const FeatureMatrix& m,
                                 const TrainConfig& cfg, const Scheme& scheme,
                                 const CvOptions& opt = {}) {
  const auto folds = make_folds(m, scheme, cfg.seed);
  EvalReport rep;
  rep.detector = kind;
  rep.variant = m.variant;
  rep.scheme = scheme;
  rep.seed = cfg.seed;
  rep.selected_features = m.selected_count();
  rep.folds = folds.size();
  for (std::size_t f = 0; f < folds.size(); ++f) {
    DetectorModel model;
    try {
      model = fit_fold(kind, m, cfg, folds[f], opt);
    } catch (const DataError& e) {
      throw DataError("fold " + std::to_string(f) + ": " + e.what());
    }
    for (auto i : folds[f]) {
      const auto& row = m.rows[i];
      const double p = predict_proba(model, row);
      rep.predictions.push_back({row.session_id, row.label, p, p >= cfg.threshold});
    }
  }
  std::stable_sort(rep.predictions.begin(), rep.predictions.end(),
                   [](const Prediction& a, const Prediction& b) {
                     return a.session_id < b.session_id;
                   });
  for (const auto& p : rep.predictions)
    rep.confusion.add(p.truth == Label::Second, p.predicted_second);
  rep.metrics = metrics(rep.confusion);
  return rep;
}

inline nlohmann::ordered_json report_to_json(const EvalReport& r) {
  using J = nlohmann::ordered_json;
  J preds = J::array();
  for (const auto& p : r.predictions)
    preds.push_back({{"session_id", p.session_id},
                     {"label", to_string(p.truth)},
                     {"proba", p.proba},
                     {"predicted", p.predicted_second ? "second" : "first"}});
  return {{"detector", to_string(r.detector)},
          {"variant", to_string(r.variant)},
          {"scheme", r.scheme.name()},
          {"seed", r.seed},
          {"n", r.predictions.size()},
          {"folds", r.folds},
          {"selected_features", r.selected_features},
          {"confusion",
           {{"tn", r.confusion.tn}, {"fp", r.confusion.fp},
            {"fn", r.confusion.fn}, {"tp", r.confusion.tp}}},
          {"accuracy", r.metrics.accuracy},
          {"precision", r.metrics.precision},
          {"recall", r.metrics.recall},
          {"weighted_f1", r.metrics.weighted_f1},
          {"per_fold_predictions", preds}};
}

/// Weighted-F1 table, one line per detector, unpruned and pruned columns.
inline std::string render_f1_table(const std::vector<EvalReport>& reports) {
  std::vector<DetectorKind> kinds;
  std::size_t n_unpruned = 0, n_pruned = 0;
  for (const auto& r : reports) {
    if (std::find(kinds.begin(), kinds.end(), r.detector) == kinds.end())
      kinds.push_back(r.detector);
    (r.variant == Variant::Unpruned ? n_unpruned : n_pruned) = r.predictions.size();
  }
  auto cell = [&](DetectorKind k, Variant v) -> std::string {
    for (const auto& r : reports)
      if (r.detector == k && r.variant == v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.3f", r.metrics.weighted_f1);
        return buf;
      }
    return "-";
  };
  char line[160];
  std::ostringstream os;
  std::snprintf(line, sizeof line, "%-14s | %-18s | %-18s\n", "Method",
                ("Unpruned (n=" + std::to_string(n_unpruned) + ")").c_str(),
                ("Pruned (n=" + std::to_string(n_pruned) + ")").c_str());
  os << line << std::string(56, '-') << '\n';
  for (auto k : kinds) {
    std::snprintf(line, sizeof line, "%-14s | %-18s | %-18s\n",
                  std::string(to_string(k)).c_str(),
                  cell(k, Variant::Unpruned).c_str(), cell(k, Variant::Pruned).c_str());
    os << line;
  }
  return os.str();
}

// ---- cohort summary ----

struct MeanSd {
  double mean = 0.0;
  double sd = 0.0;
};

struct AttemptSummary {
  MeanSd response_time_s;
  MeanSd error_rate;
  MeanSd score;
  double positive_fraction = 0.0;
};

struct CohortStats {
  std::size_t pairs = 0;
  AttemptSummary first;
  AttemptSummary second;
  double p_response_time = 1.0;
  double p_error_rate = 1.0;
  double p_score = 1.0;
  std::size_t first_positive = 0;
  std::size_t reversals = 0;
  double first_score_sd = 0.0;
  std::vector<std::string> warnings;
};

namespace detail {

inline MeanSd mean_sd(std::span<const double> x) {
  return {stats::mean(x), stats::sample_sd(x)};
}

inline double positive_fraction(std::span<const double> x) {
  return static_cast<double>(std::count_if(x.begin(), x.end(),
                                           [](double v) { return v > 0.0; })) /
         static_cast<double>(x.size());
}

}  // namespace detail

/// Critical-block means/SDs per attempt, paired t-tests and reversal counts.
/// Pairs with an unscorable session are skipped with a warning.
inline CohortStats cohort_stats(const Cohort& c) {
  CohortStats out;
  std::vector<double> rt1, rt2, er1, er2, d1, d2;
  for (const auto& p : c.pairs) {
    ScoreResult a, b;
    try {
      a = d_score(p.first);
      b = d_score(p.second);
    } catch (const UnscorableError& e) {
      out.warnings.push_back("skipping participant " + p.first.participant_id +
                             ": " + e.what());
      continue;
    }
    rt1.push_back(a.mean_rt_s);
    rt2.push_back(b.mean_rt_s);
    er1.push_back(a.error_rate);
    er2.push_back(b.error_rate);
    d1.push_back(a.d_score);
    d2.push_back(b.d_score);
  }
  if (d1.size() < 2) throw DataError("cohort stats need at least 2 scorable pairs");
  out.pairs = d1.size();
  out.first = {detail::mean_sd(rt1), detail::mean_sd(er1), detail::mean_sd(d1),
               detail::positive_fraction(d1)};
  out.second = {detail::mean_sd(rt2), detail::mean_sd(er2), detail::mean_sd(d2),
                detail::positive_fraction(d2)};
  out.p_response_time = stats::paired_t_test(rt1, rt2).p_two_tailed;
  out.p_error_rate = stats::paired_t_test(er1, er2).p_two_tailed;
  out.p_score = stats::paired_t_test(d1, d2).p_two_tailed;
  out.first_positive = static_cast<std::size_t>(
      std::count_if(d1.begin(), d1.end(), [](double v) { return v > 0.0; }));
  out.first_score_sd = out.first.score.sd;
  for (std::size_t i = 0; i < d1.size(); ++i)
    if (is_reversal(d1[i], d2[i], out.first_score_sd)) ++out.reversals;
  return out;
}

inline nlohmann::ordered_json cohort_stats_to_json(const CohortStats& s) {
  using J = nlohmann::ordered_json;
  auto ms = [](const MeanSd& m) { return J{{"mean", m.mean}, {"sd", m.sd}}; };
  auto att = [&](const AttemptSummary& a) {
    return J{{"response_time_s", ms(a.response_time_s)},
             {"error_rate", ms(a.error_rate)},
             {"score", ms(a.score)},
             {"positive_fraction", a.positive_fraction}};
  };
  return {{"pairs", s.pairs},
          {"first", att(s.first)},
          {"second", att(s.second)},
          {"p_values",
           {{"response_time_s", s.p_response_time},
            {"error_rate", s.p_error_rate},
            {"score", s.p_score}}},
          {"first_positive", s.first_positive},
          {"first_score_sd", s.first_score_sd},
          {"reversals", s.reversals},
          {"warnings", s.warnings}};
}

/// Table of critical-block means (SD) per attempt plus the p-value row.
inline std::string render_cohort_table(const CohortStats& s) {
  std::ostringstream os;
  char line[160];
  std::snprintf(line, sizeof line, "%-8s | %-16s | %-16s | %-16s\n", "Attempt",
                "Response Time", "Error Rate", "Score");
  os << line << std::string(66, '-') << '\n';
  auto row = [&](const char* name, const AttemptSummary& a) {
    char c1[40], c2[40], c3[40];
    std::snprintf(c1, sizeof c1, "%.3f (%.3f)", a.response_time_s.mean, a.response_time_s.sd);
    std::snprintf(c2, sizeof c2, "%.3f (%.3f)", a.error_rate.mean, a.error_rate.sd);
    std::snprintf(c3, sizeof c3, "%.3f (%.3f)", a.score.mean, a.score.sd);
    std::snprintf(line, sizeof line, "%-8s | %-16s | %-16s | %-16s\n", name, c1, c2, c3);
    os << line;
  };
  row("First", s.first);
  row("Second", s.second);
  auto pv = [](double p) {
    char buf[32];
    if (p < 1e-4)
      std::snprintf(buf, sizeof buf, "<0.0001");
    else
      std::snprintf(buf, sizeof buf, "%.4f", p);
    return std::string(buf);
  };
  std::snprintf(line, sizeof line, "%-8s | %-16s | %-16s | %-16s\n", "p-value",
                pv(s.p_response_time).c_str(), pv(s.p_error_rate).c_str(),
                pv(s.p_score).c_str());
  os << line;
  os << "pairs: " << s.pairs << ", first attempts above zero: " << s.first_positive
     << ", 1-SD reversals: " << s.reversals << '\n';
  return os.str();
}

}  // namespace iat
