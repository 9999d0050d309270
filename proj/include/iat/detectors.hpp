#pragma once

// First-vs-second attempt classifiers: Gaussian naive Bayes, L2 logistic
// regression, a one-hidden-layer MLP and the latency-ratio baseline. All share
// fit(kind, matrix, config) / predict_proba(model, row).

#include <iat/errors.hpp>
#include <iat/features.hpp>
#include <iat/metrics.hpp>
#include <iat/scoring.hpp>
#include <iat/session.hpp>
#include <iat/stats.hpp>

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace iat {

enum class DetectorKind { NaiveBayes, Logistic, Mlp, Ratio };

inline constexpr std::string_view to_string(DetectorKind k) {
  switch (k) {
    case DetectorKind::NaiveBayes: return "naive_bayes";
    case DetectorKind::Logistic: return "logistic";
    case DetectorKind::Mlp: return "mlp";
    case DetectorKind::Ratio: return "ratio";
  }
  return "";
}

inline std::optional<DetectorKind> detector_from_string(std::string_view s) {
  for (auto k : {DetectorKind::NaiveBayes, DetectorKind::Logistic,
                 DetectorKind::Mlp, DetectorKind::Ratio})
    if (to_string(k) == s) return k;
  return std::nullopt;
}

inline constexpr double kVarianceFloor = 1e-9;

struct TrainConfig {
  int epochs = 200;
  double keep_prob = 0.7;
  double learning_rate = 1e-3;  // MLP adaptive-moment step
  int batch_size = 16;
  double l2 = 1e-2;
  std::uint64_t seed = 0;
  double threshold = 0.5;
  int hidden_units = 13;
  // Full-batch gradient descent for the logistic model.
  double gd_learning_rate = 0.1;
  int gd_max_iterations = 5000;
  double gd_tolerance = 1e-6;
  // Ratio baseline: fixed threshold instead of the fitted one.
  std::optional<double> ratio_threshold;

  void validate() const {
    if (epochs <= 0) throw DataError("epochs must be positive");
    if (!(keep_prob > 0.0 && keep_prob <= 1.0))
      throw DataError("keep_prob must be in (0, 1]");
    if (!(learning_rate > 0.0)) throw DataError("learning_rate must be positive");
    if (batch_size <= 0) throw DataError("batch_size must be positive");
    if (!(l2 >= 0.0)) throw DataError("l2 must be nonnegative");
    if (!(threshold > 0.0 && threshold < 1.0))
      throw DataError("threshold must be in (0, 1)");
    if (hidden_units <= 0) throw DataError("hidden_units must be positive");
    if (!(gd_learning_rate > 0.0) || gd_max_iterations <= 0)
      throw DataError("gradient-descent settings must be positive");
  }
};

struct NormStats {
  std::vector<double> mean;
  std::vector<double> sd;

  friend bool operator==(const NormStats&, const NormStats&) = default;
};

struct NaiveBayesParams {
  std::array<double, 2> prior{};  // first, second
  std::array<std::vector<double>, 2> mean;
  std::array<std::vector<double>, 2> var;

  friend bool operator==(const NaiveBayesParams&, const NaiveBayesParams&) = default;
};

struct LogisticParams {
  std::vector<double> weights;
  double bias = 0.0;
  int iterations = 0;

  friend bool operator==(const LogisticParams&, const LogisticParams&) = default;
};

/// w1 is hidden x inputs, row-major.
struct MlpParams {
  std::size_t inputs = 0;
  std::size_t hidden = 0;
  std::vector<double> w1;
  std::vector<double> b1;
  std::vector<double> w2;
  double b2 = 0.0;

  std::size_t parameter_count() const { return w1.size() + b1.size() + w2.size() + 1; }

  friend bool operator==(const MlpParams&, const MlpParams&) = default;
};

struct RatioParams {
  double threshold = 1.0;

  friend bool operator==(const RatioParams&, const RatioParams&) = default;
};

using DetectorParams =
    std::variant<NaiveBayesParams, LogisticParams, MlpParams, RatioParams>;

struct DetectorModel {
  DetectorKind kind = DetectorKind::NaiveBayes;
  std::vector<std::string> feature_names;  // full row layout expected
  std::vector<std::size_t> inputs;         // selected columns, in order
  NormStats norm;
  DetectorParams params;
  TrainConfig config;

  friend bool operator==(const DetectorModel& a, const DetectorModel& b) {
    return a.kind == b.kind && a.feature_names == b.feature_names &&
           a.inputs == b.inputs && a.norm == b.norm && a.params == b.params;
  }
};

// ---------------------------------------------------------------------------

namespace detail {

inline double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

/// Dense row-major design matrix over the selected columns.
struct Design {
  std::size_t rows = 0, cols = 0;
  std::vector<double> x;
  std::vector<double> y;  // 1 = second

  std::span<const double> row(std::size_t i) const {
    return {x.data() + i * cols, cols};
  }
};

inline void check_finite(const FeatureMatrix& m, std::span<const std::size_t> cols) {
  for (std::size_t i = 0; i < m.rows.size(); ++i) {
    const auto& r = m.rows[i];
    if (r.values.size() != m.width())
      throw DataError("row " + std::to_string(i) + " (" + r.session_id +
                      ") has " + std::to_string(r.values.size()) +
                      " values, expected " + std::to_string(m.width()));
    for (auto j : cols)
      if (!std::isfinite(r.values[j]))
        throw DataError("non-finite feature at row " + std::to_string(i) + " (" +
                        r.session_id + "), column " + m.feature_names[j]);
  }
}

/// Per-column mean and sample SD. A column that is constant on the training
/// rows gets SD 1 so unseen values stay in raw units instead of exploding.
inline NormStats fit_norm(const FeatureMatrix& m, std::span<const std::size_t> cols) {
  NormStats ns;
  for (auto j : cols) {
    const auto c = m.column(j);
    const double mu = stats::mean(c);
    double sd = c.size() >= 2 ? stats::sample_sd(c) : 0.0;
    if (!(sd > kVarianceFloor)) sd = 1.0;
    ns.mean.push_back(mu);
    ns.sd.push_back(sd);
  }
  return ns;
}

inline NormStats identity_norm(std::size_t n) {
  return {std::vector<double>(n, 0.0), std::vector<double>(n, 1.0)};
}

inline std::vector<double> normalize_row(std::span<const double> values,
                                         std::span<const std::size_t> cols,
                                         const NormStats& ns) {
  std::vector<double> out(cols.size());
  for (std::size_t k = 0; k < cols.size(); ++k)
    out[k] = (values[cols[k]] - ns.mean[k]) / ns.sd[k];
  return out;
}

inline Design make_design(const FeatureMatrix& m, std::span<const std::size_t> cols,
                          const NormStats& ns) {
  Design d;
  d.rows = m.rows.size();
  d.cols = cols.size();
  d.x.reserve(d.rows * d.cols);
  for (const auto& r : m.rows) {
    const auto z = normalize_row(r.values, cols, ns);
    d.x.insert(d.x.end(), z.begin(), z.end());
    d.y.push_back(r.label == Label::Second ? 1.0 : 0.0);
  }
  return d;
}

inline NaiveBayesParams fit_naive_bayes(const Design& d) {
  NaiveBayesParams p;
  std::array<double, 2> count{};
  for (int c = 0; c < 2; ++c) {
    p.mean[c].assign(d.cols, 0.0);
    p.var[c].assign(d.cols, 0.0);
  }
  for (std::size_t i = 0; i < d.rows; ++i) {
    const int c = d.y[i] > 0.5 ? 1 : 0;
    count[c] += 1.0;
    const auto r = d.row(i);
    for (std::size_t j = 0; j < d.cols; ++j) p.mean[c][j] += r[j];
  }
  for (int c = 0; c < 2; ++c)
    for (auto& v : p.mean[c]) v /= count[c];
  for (std::size_t i = 0; i < d.rows; ++i) {
    const int c = d.y[i] > 0.5 ? 1 : 0;
    const auto r = d.row(i);
    for (std::size_t j = 0; j < d.cols; ++j) {
      const double dv = r[j] - p.mean[c][j];
      p.var[c][j] += dv * dv;
    }
  }
  // Maximum-likelihood (population) variances, floored.
  for (int c = 0; c < 2; ++c)
    for (auto& v : p.var[c]) v = std::max(v / count[c], kVarianceFloor);
  const double n = count[0] + count[1];
  p.prior = {count[0] / n, count[1] / n};
  return p;
}

inline double naive_bayes_proba(const NaiveBayesParams& p, std::span<const double> z) {
  std::array<double, 2> ll{};
  for (int c = 0; c < 2; ++c) {
    double s = std::log(p.prior[c]);
    for (std::size_t j = 0; j < z.size(); ++j) {
      const double dv = z[j] - p.mean[c][j];
      s += -0.5 * std::log(2.0 * M_PI * p.var[c][j]) - dv * dv / (2.0 * p.var[c][j]);
    }
    ll[c] = s;
  }
  return sigmoid(ll[1] - ll[0]);
}

inline double logistic_loss(const LogisticParams& p, const Design& d, double l2) {
  double loss = 0.0;
  for (std::size_t i = 0; i < d.rows; ++i) {
    const auto r = d.row(i);
    double zval = p.bias;
    for (std::size_t j = 0; j < d.cols; ++j) zval += p.weights[j] * r[j];
    // log(1 + e^z) - y z, stable form
    loss += std::max(zval, 0.0) + std::log1p(std::exp(-std::abs(zval))) - d.y[i] * zval;
  }
  loss /= static_cast<double>(d.rows);
  double w2 = 0.0;
  for (double w : p.weights) w2 += w * w;
  return loss + 0.5 * l2 * w2;
}

/// Full-batch gradient of mean cross-entropy + (l2 / 2) |w|^2.
inline void logistic_gradient(const LogisticParams& p, const Design& d, double l2,
                              std::vector<double>& gw, double& gb) {
  gw.assign(d.cols, 0.0);
  gb = 0.0;
  for (std::size_t i = 0; i < d.rows; ++i) {
    const auto r = d.row(i);
    double zval = p.bias;
    for (std::size_t j = 0; j < d.cols; ++j) zval += p.weights[j] * r[j];
    const double e = sigmoid(zval) - d.y[i];
    for (std::size_t j = 0; j < d.cols; ++j) gw[j] += e * r[j];
    gb += e;
  }
  const auto n = static_cast<double>(d.rows);
  for (std::size_t j = 0; j < d.cols; ++j) gw[j] = gw[j] / n + l2 * p.weights[j];
  gb /= n;
}

inline LogisticParams fit_logistic(const Design& d, const TrainConfig& cfg,
                                   std::vector<double>* loss_trace = nullptr) {
  LogisticParams p;
  p.weights.assign(d.cols, 0.0);
  std::vector<double> gw;
  double gb = 0.0;
  for (int it = 0; it < cfg.gd_max_iterations; ++it) {
    if (loss_trace) loss_trace->push_back(logistic_loss(p, d, cfg.l2));
    logistic_gradient(p, d, cfg.l2, gw, gb);
    double norm2 = gb * gb;
    for (double g : gw) norm2 += g * g;
    if (std::sqrt(norm2) < cfg.gd_tolerance) break;
    for (std::size_t j = 0; j < d.cols; ++j) p.weights[j] -= cfg.gd_learning_rate * gw[j];
    p.bias -= cfg.gd_learning_rate * gb;
    p.iterations = it + 1;
  }
  return p;
}

inline double logistic_proba(const LogisticParams& p, std::span<const double> z) {
  double s = p.bias;
  for (std::size_t j = 0; j < z.size(); ++j) s += p.weights[j] * z[j];
  return sigmoid(s);
}

inline MlpParams init_mlp(std::size_t inputs, std::size_t hidden, std::mt19937_64& rng) {
  MlpParams p;
  p.inputs = inputs;
  p.hidden = hidden;
  const double a1 = 1.0 / std::sqrt(static_cast<double>(inputs));
  const double a2 = 1.0 / std::sqrt(static_cast<double>(hidden));
  std::uniform_real_distribution<double> u1(-a1, a1), u2(-a2, a2);
  p.w1.resize(hidden * inputs);
  for (auto& w : p.w1) w = u1(rng);
  p.b1.assign(hidden, 0.0);
  p.w2.resize(hidden);
  for (auto& w : p.w2) w = u2(rng);
  p.b2 = 0.0;
  return p;
}

/// Output probability; `hidden_out` receives post-activation hidden units.
inline double mlp_forward(const MlpParams& p, std::span<const double> z,
                          std::vector<double>& hidden_out) {
  hidden_out.resize(p.hidden);
  double out = p.b2;
  for (std::size_t h = 0; h < p.hidden; ++h) {
    const double* w = p.w1.data() + h * p.inputs;
    double a = p.b1[h];
    for (std::size_t j = 0; j < p.inputs; ++j) a += w[j] * z[j];
    hidden_out[h] = a > 0.0 ? a : 0.0;
    out += p.w2[h] * hidden_out[h];
  }
  return sigmoid(out);
}

}  // namespace detail

/// Gradients of mean binary cross-entropy w.r.t. every MLP parameter, laid out
/// like MlpParams.
struct MlpGradients {
  std::vector<double> w1;
  std::vector<double> b1;
  std::vector<double> w2;
  double b2 = 0.0;
};

namespace detail {

/// Accumulates mean-BCE gradients over rows of `d` listed in `batch`.
/// `drop` (hidden-sized per row, already scaled by 1/keep) may be empty.
inline void mlp_backprop(const MlpParams& p, const Design& d,
                         std::span<const std::size_t> batch,
                         std::span<const double> drop, MlpGradients& g) {
  g.w1.assign(p.w1.size(), 0.0);
  g.b1.assign(p.hidden, 0.0);
  g.w2.assign(p.hidden, 0.0);
  g.b2 = 0.0;
  std::vector<double> pre(p.hidden), act(p.hidden);
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  for (std::size_t bi = 0; bi < batch.size(); ++bi) {
    const auto z = d.row(batch[bi]);
    double out = p.b2;
    for (std::size_t h = 0; h < p.hidden; ++h) {
      const double* w = p.w1.data() + h * p.inputs;
      double a = p.b1[h];
      for (std::size_t j = 0; j < p.inputs; ++j) a += w[j] * z[j];
      pre[h] = a;
      double v = a > 0.0 ? a : 0.0;
      if (!drop.empty()) v *= drop[bi * p.hidden + h];
      act[h] = v;
      out += p.w2[h] * v;
    }
    const double e = (sigmoid(out) - d.y[batch[bi]]) * inv_n;
    g.b2 += e;
    for (std::size_t h = 0; h < p.hidden; ++h) {
      g.w2[h] += e * act[h];
      if (pre[h] <= 0.0) continue;
      double back = e * p.w2[h];
      if (!drop.empty()) back *= drop[bi * p.hidden + h];
      if (back == 0.0) continue;
      g.b1[h] += back;
      double* gw = g.w1.data() + h * p.inputs;
      for (std::size_t j = 0; j < p.inputs; ++j) gw[j] += back * z[j];
    }
  }
}

struct Adam {
  double lr, beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  std::vector<double> m, v;
  long step_count = 0;

  explicit Adam(double rate, std::size_t n) : lr(rate), m(n, 0.0), v(n, 0.0) {}

  /// Applies one update to the parameters listed in order.
  void step(std::span<double* const> params, std::span<const double> grads) {
    ++step_count;
    const double c1 = 1.0 - std::pow(beta1, static_cast<double>(step_count));
    const double c2 = 1.0 - std::pow(beta2, static_cast<double>(step_count));
    for (std::size_t i = 0; i < params.size(); ++i) {
      m[i] = beta1 * m[i] + (1.0 - beta1) * grads[i];
      v[i] = beta2 * v[i] + (1.0 - beta2) * grads[i] * grads[i];
      *params[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps);
    }
  }
};

inline MlpParams fit_mlp(const Design& d, const TrainConfig& cfg) {
  std::mt19937_64 rng(cfg.seed);
  MlpParams p = init_mlp(d.cols, static_cast<std::size_t>(cfg.hidden_units), rng);

  std::vector<double*> handles;
  for (auto& w : p.w1) handles.push_back(&w);
  for (auto& b : p.b1) handles.push_back(&b);
  for (auto& w : p.w2) handles.push_back(&w);
  handles.push_back(&p.b2);
  Adam adam(cfg.learning_rate, handles.size());

  std::vector<std::size_t> order(d.rows);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::bernoulli_distribution keep(cfg.keep_prob);
  const double scale = 1.0 / cfg.keep_prob;
  const bool dropout = cfg.keep_prob < 1.0;
  const auto bs = static_cast<std::size_t>(cfg.batch_size);

  MlpGradients g;
  std::vector<double> drop, flat(handles.size());
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < d.rows; start += bs) {
      const auto batch = std::span<const std::size_t>(order).subspan(
          start, std::min(bs, d.rows - start));
      drop.clear();
      if (dropout) {
        drop.resize(batch.size() * p.hidden);
        for (auto& v : drop) v = keep(rng) ? scale : 0.0;
      }
      mlp_backprop(p, d, batch, drop, g);
      std::size_t k = 0;
      for (std::size_t i = 0; i < g.w1.size(); ++i) flat[k++] = g.w1[i] + cfg.l2 * p.w1[i];
      for (double v : g.b1) flat[k++] = v;
      for (std::size_t i = 0; i < g.w2.size(); ++i) flat[k++] = g.w2[i] + cfg.l2 * p.w2[i];
      flat[k++] = g.b2;
      adam.step(handles, flat);
    }
  }
  return p;
}

inline std::vector<double> ratio_column(const FeatureMatrix& m) {
  if (m.selected_count() != 1)
    throw DataError("ratio detector expects exactly one selected column");
  return m.column(m.selected_indices().front());
}

inline RatioParams fit_ratio(const FeatureMatrix& m, const TrainConfig& cfg) {
  if (cfg.ratio_threshold) return {*cfg.ratio_threshold};
  const auto ratios = ratio_column(m);
  RatioParams best{0.5};
  double best_f1 = -1.0;
  for (int step = 0; step <= 150; ++step) {
    const double thr = 0.5 + 0.01 * step;
    Confusion c;
    for (std::size_t i = 0; i < ratios.size(); ++i)
      c.add(m.rows[i].label == Label::Second, ratios[i] >= thr);
    const double f1 = metrics(c).weighted_f1;
    if (f1 > best_f1) {
      best_f1 = f1;
      best.threshold = thr;
    }
  }
  return best;
}

}  // namespace detail

// ---------------------------------------------------------------------------

/// Fits a detector on the selected columns of `m`. Normalization statistics
/// come from these rows only.
inline DetectorModel fit(DetectorKind kind, const FeatureMatrix& m,
                         const TrainConfig& cfg) {
  cfg.validate();
  if (m.rows.size() < 2) throw DataError("training needs at least 2 rows");
  std::size_t seconds = 0;
  for (const auto& r : m.rows) seconds += r.label == Label::Second ? 1 : 0;
  if (seconds == 0 || seconds == m.rows.size())
    throw DataError("training data contains a single class");
  const auto cols = m.selected_indices();
  if (cols.empty()) throw DataError("no features selected");
  detail::check_finite(m, cols);

  DetectorModel model;
  model.kind = kind;
  model.feature_names = m.feature_names;
  model.inputs = cols;
  model.config = cfg;

  if (kind == DetectorKind::Ratio) {
    model.norm = detail::identity_norm(cols.size());
    model.params = detail::fit_ratio(m, cfg);
    return model;
  }
  model.norm = detail::fit_norm(m, cols);
  const auto design = detail::make_design(m, cols, model.norm);
  switch (kind) {
    case DetectorKind::NaiveBayes: model.params = detail::fit_naive_bayes(design); break;
    case DetectorKind::Logistic: model.params = detail::fit_logistic(design, cfg); break;
    case DetectorKind::Mlp: model.params = detail::fit_mlp(design, cfg); break;
    case DetectorKind::Ratio: break;
  }
  return model;
}

/// Probability that the row is a second attempt. Dropout is never applied.
inline double predict_proba(const DetectorModel& model, std::span<const double> values) {
  if (values.size() != model.feature_names.size())
    throw DataError("row has " + std::to_string(values.size()) +
                    " features, model expects " +
                    std::to_string(model.feature_names.size()));
  for (auto j : model.inputs)
    if (!std::isfinite(values[j]))
      throw DataError("non-finite feature " + model.feature_names[j]);
  const auto z = detail::normalize_row(values, model.inputs, model.norm);
  return std::visit(
      [&](const auto& p) -> double {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, NaiveBayesParams>) {
          return detail::naive_bayes_proba(p, z);
        } else if constexpr (std::is_same_v<P, LogisticParams>) {
          return detail::logistic_proba(p, z);
        } else if constexpr (std::is_same_v<P, MlpParams>) {
          std::vector<double> h;
          return detail::mlp_forward(p, z, h);
        } else {
          return z.front() >= p.threshold ? 1.0 : 0.0;
        }
      },
      model.params);
}

inline double predict_proba(const DetectorModel& model, const FeatureVector& row) {
  return predict_proba(model, std::span<const double>(row.values));
}

inline bool predict_second(const DetectorModel& model, const FeatureVector& row) {
  return predict_proba(model, row) >= model.config.threshold;
}

/// Backpropagated gradients of mean BCE over `batch` (raw feature rows),
/// without dropout or weight decay.
inline MlpGradients mlp_gradients(const DetectorModel& model,
                                  std::span<const FeatureVector> batch) {
  const auto* p = std::get_if<MlpParams>(&model.params);
  if (!p) throw DataError("mlp_gradients needs an MLP model");
  if (batch.empty()) throw DataError("empty batch");
  detail::Design d;
  d.rows = batch.size();
  d.cols = model.inputs.size();
  for (const auto& r : batch) {
    if (r.values.size() != model.feature_names.size())
      throw DataError("row arity does not match the model");
    const auto z = detail::normalize_row(r.values, model.inputs, model.norm);
    d.x.insert(d.x.end(), z.begin(), z.end());
    d.y.push_back(r.label == Label::Second ? 1.0 : 0.0);
  }
  std::vector<std::size_t> idx(d.rows);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  MlpGradients g;
  detail::mlp_backprop(*p, d, idx, {}, g);
  return g;
}

// ---- ratio baseline ----

namespace detail {

inline void collect_correct(const Block& b, double& sum, std::size_t& n) {
  for (const auto& t : b.trials)
    if (t.correct) {
      sum += t.latency_ms;
      ++n;
    }
}

inline double mean_correct(const Session& s, std::initializer_list<int> blocks) {
  double sum = 0.0;
  std::size_t n = 0;
  for (int b : blocks) collect_correct(s.block(b), sum, n);
  if (n == 0) throw UnscorableError("no correct trials in ratio blocks");
  return sum / static_cast<double>(n);
}

}  // namespace detail

/// Mean correct latency of the faster critical pair over that of its practice
/// blocks: B3+B4 against B1+B2, B6+B7 against B5.
inline double ratio_score(const Session& s) {
  const auto cleaned = clean_trials(s).session;
  const double pair_a = detail::mean_correct(cleaned, {3, 4});
  const double pair_b = detail::mean_correct(cleaned, {6, 7});
  if (pair_a <= pair_b) return pair_a / detail::mean_correct(cleaned, {1, 2});
  return pair_b / detail::mean_correct(cleaned, {5});
}

/// One-column matrix ("ratio") for the baseline detector.
inline FeatureMatrix ratio_matrix(std::span<const Session> sessions,
                                  Variant variant = Variant::Unpruned) {
  FeatureMatrix m{{}, {"ratio"}, {true}, variant};
  for (const auto& s : sessions)
    m.rows.push_back({s.session_id, s.attempt == 1 ? Label::First : Label::Second,
                      {ratio_score(s)}});
  return m;
}

// ---- model file ----

inline constexpr int kModelFormatVersion = 1;

namespace detail {

inline nlohmann::ordered_json config_to_json(const TrainConfig& c) {
  nlohmann::ordered_json j{{"epochs", c.epochs},
                           {"keep_prob", c.keep_prob},
                           {"learning_rate", c.learning_rate},
                           {"batch_size", c.batch_size},
                           {"l2", c.l2},
                           {"seed", c.seed},
                           {"threshold", c.threshold},
                           {"hidden_units", c.hidden_units},
                           {"gd_learning_rate", c.gd_learning_rate},
                           {"gd_max_iterations", c.gd_max_iterations},
                           {"gd_tolerance", c.gd_tolerance}};
  if (c.ratio_threshold) j["ratio_threshold"] = *c.ratio_threshold;
  return j;
}

template <class Json>
TrainConfig config_from_json(const Json& j) {
  TrainConfig c;
  c.epochs = j.at("epochs").template get<int>();
  c.keep_prob = j.at("keep_prob").template get<double>();
  c.learning_rate = j.at("learning_rate").template get<double>();
  c.batch_size = j.at("batch_size").template get<int>();
  c.l2 = j.at("l2").template get<double>();
  c.seed = j.at("seed").template get<std::uint64_t>();
  c.threshold = j.at("threshold").template get<double>();
  c.hidden_units = j.at("hidden_units").template get<int>();
  c.gd_learning_rate = j.at("gd_learning_rate").template get<double>();
  c.gd_max_iterations = j.at("gd_max_iterations").template get<int>();
  c.gd_tolerance = j.at("gd_tolerance").template get<double>();
  if (j.contains("ratio_threshold"))
    c.ratio_threshold = j.at("ratio_threshold").template get<double>();
  return c;
}

inline nlohmann::ordered_json matrix_to_json(const std::vector<double>& flat,
                                             std::size_t rows, std::size_t cols) {
  auto out = nlohmann::ordered_json::array();
  for (std::size_t r = 0; r < rows; ++r)
    out.push_back(std::vector<double>(flat.begin() + static_cast<long>(r * cols),
                                      flat.begin() + static_cast<long>((r + 1) * cols)));
  return out;
}

}  // namespace detail

inline nlohmann::ordered_json model_to_json(const DetectorModel& m) {
  using J = nlohmann::ordered_json;
  J j;
  j["format_version"] = kModelFormatVersion;
  j["kind"] = to_string(m.kind);
  j["feature_names"] = m.feature_names;
  J inputs = J::array();
  for (auto i : m.inputs) inputs.push_back(m.feature_names[i]);
  j["inputs"] = inputs;
  j["norm_stats"] = {{"mean", m.norm.mean}, {"sd", m.norm.sd}};
  J params;
  std::visit(
      [&](const auto& p) {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, NaiveBayesParams>) {
          params = {{"prior", p.prior},
                    {"mean", {p.mean[0], p.mean[1]}},
                    {"var", {p.var[0], p.var[1]}}};
        } else if constexpr (std::is_same_v<P, LogisticParams>) {
          params = {{"weights", p.weights}, {"bias", p.bias}, {"iterations", p.iterations}};
        } else if constexpr (std::is_same_v<P, MlpParams>) {
          params = {{"inputs", p.inputs},
                    {"hidden", p.hidden},
                    {"w1", detail::matrix_to_json(p.w1, p.hidden, p.inputs)},
                    {"b1", p.b1},
                    {"w2", p.w2},
                    {"b2", p.b2}};
        } else {
          params = {{"threshold", p.threshold}};
        }
      },
      m.params);
  j["parameters"] = params;
  j["config"] = detail::config_to_json(m.config);
  return j;
}

template <class Json>
DetectorModel model_from_json(const Json& j) {
  try {
    if (j.at("format_version").template get<int>() != kModelFormatVersion)
      throw ParseError("format_version", "unsupported model format");
    DetectorModel m;
    const auto kind = detector_from_string(j.at("kind").template get<std::string>());
    if (!kind) throw ParseError("kind", "unknown detector kind");
    m.kind = *kind;
    m.feature_names = j.at("feature_names").template get<std::vector<std::string>>();
    for (const auto& name : j.at("inputs")) {
      auto it = std::find(m.feature_names.begin(), m.feature_names.end(),
                          name.template get<std::string>());
      if (it == m.feature_names.end()) throw ParseError("inputs", "unknown feature");
      m.inputs.push_back(static_cast<std::size_t>(it - m.feature_names.begin()));
    }
    m.norm.mean = j.at("norm_stats").at("mean").template get<std::vector<double>>();
    m.norm.sd = j.at("norm_stats").at("sd").template get<std::vector<double>>();
    const auto& p = j.at("parameters");
    switch (m.kind) {
      case DetectorKind::NaiveBayes: {
        NaiveBayesParams nb;
        nb.prior = p.at("prior").template get<std::array<double, 2>>();
        for (int c = 0; c < 2; ++c) {
          nb.mean[c] = p.at("mean").at(c).template get<std::vector<double>>();
          nb.var[c] = p.at("var").at(c).template get<std::vector<double>>();
        }
        m.params = nb;
        break;
      }
      case DetectorKind::Logistic: {
        LogisticParams lp;
        lp.weights = p.at("weights").template get<std::vector<double>>();
        lp.bias = p.at("bias").template get<double>();
        lp.iterations = p.at("iterations").template get<int>();
        m.params = lp;
        break;
      }
      case DetectorKind::Mlp: {
        MlpParams mp;
        mp.inputs = p.at("inputs").template get<std::size_t>();
        mp.hidden = p.at("hidden").template get<std::size_t>();
        for (const auto& row : p.at("w1"))
          for (const auto& v : row) mp.w1.push_back(v.template get<double>());
        mp.b1 = p.at("b1").template get<std::vector<double>>();
        mp.w2 = p.at("w2").template get<std::vector<double>>();
        mp.b2 = p.at("b2").template get<double>();
        if (mp.w1.size() != mp.inputs * mp.hidden || mp.b1.size() != mp.hidden ||
            mp.w2.size() != mp.hidden || mp.inputs != m.inputs.size())
          throw ParseError("parameters", "MLP tensor shapes are inconsistent");
        m.params = mp;
        break;
      }
      case DetectorKind::Ratio:
        m.params = RatioParams{p.at("threshold").template get<double>()};
        break;
    }
    if (m.norm.mean.size() != m.inputs.size() || m.norm.sd.size() != m.inputs.size())
      throw ParseError("norm_stats", "length differs from inputs");
    m.config = detail::config_from_json(j.at("config"));
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("model", e.what());
  }
}

}  // namespace iat
