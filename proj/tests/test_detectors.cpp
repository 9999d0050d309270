#include "support.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

using namespace iat;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;
using iat::testing::make_session;

namespace {

FeatureMatrix toy_matrix(const std::vector<std::vector<double>>& rows,
                         const std::vector<int>& labels) {
  FeatureMatrix m;
  for (std::size_t j = 0; j < rows[0].size(); ++j) m.feature_names.push_back("x" + std::to_string(j));
  m.selected.assign(rows[0].size(), true);
  for (std::size_t i = 0; i < rows.size(); ++i)
    m.rows.push_back({"r" + std::to_string(i), labels[i] ? Label::Second : Label::First, rows[i]});
  return m;
}

double training_accuracy(const DetectorModel& model, const FeatureMatrix& m) {
  std::size_t ok = 0;
  for (const auto& r : m.rows) ok += predict_second(model, r) == (r.label == Label::Second);
  return static_cast<double>(ok) / static_cast<double>(m.rows.size());
}

FeatureMatrix xor_matrix() {
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  for (int copy = 0; copy < 50; ++copy)
    for (int a : {0, 1})
      for (int b : {0, 1}) {
        rows.push_back({double(a), double(b)});
        labels.push_back(a ^ b);
      }
  return toy_matrix(rows, labels);
}

DetectorModel random_mlp(std::size_t inputs, std::size_t hidden, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, 0.7);
  DetectorModel m;
  m.kind = DetectorKind::Mlp;
  for (std::size_t j = 0; j < inputs; ++j) {
    m.feature_names.push_back("x" + std::to_string(j));
    m.inputs.push_back(j);
  }
  m.norm = {std::vector<double>(inputs, 0.0), std::vector<double>(inputs, 1.0)};
  MlpParams p;
  p.inputs = inputs;
  p.hidden = hidden;
  for (std::size_t i = 0; i < inputs * hidden; ++i) p.w1.push_back(z(rng));
  for (std::size_t i = 0; i < hidden; ++i) p.b1.push_back(z(rng));
  for (std::size_t i = 0; i < hidden; ++i) p.w2.push_back(z(rng));
  p.b2 = z(rng);
  m.params = p;
  return m;
}

// Test-local forward pass and mean binary cross-entropy.
double reference_loss(const MlpParams& p, const std::vector<FeatureVector>& batch) {
  double loss = 0.0;
  for (const auto& r : batch) {
    double out = p.b2;
    for (std::size_t h = 0; h < p.hidden; ++h) {
      double a = p.b1[h];
      for (std::size_t j = 0; j < p.inputs; ++j) a += p.w1[h * p.inputs + j] * r.values[j];
      out += p.w2[h] * std::max(0.0, a);
    }
    const double y = r.label == Label::Second ? 1.0 : 0.0;
    const double prob = 1.0 / (1.0 + std::exp(-out));
    loss -= y * std::log(prob) + (1.0 - y) * std::log(1.0 - prob);
  }
  return loss / static_cast<double>(batch.size());
}

std::vector<FeatureVector> random_batch(std::size_t n, std::size_t inputs, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<FeatureVector> out;
  for (std::size_t i = 0; i < n; ++i) {
    FeatureVector r{"b" + std::to_string(i), i % 2 ? Label::Second : Label::First, {}};
    for (std::size_t j = 0; j < inputs; ++j) r.values.push_back(z(rng));
    out.push_back(r);
  }
  return out;
}

}  // namespace

TEST_CASE("logistic separates a separable line", "[detectors]") {
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  for (int i = 0; i < 20; ++i) {
    rows.push_back({-1.0});
    labels.push_back(0);
    rows.push_back({1.0});
    labels.push_back(1);
  }
  const auto m = toy_matrix(rows, labels);
  const auto model = fit(DetectorKind::Logistic, m, {});
  CHECK(training_accuracy(model, m) == 1.0);
}

TEST_CASE("only the network learns exclusive or", "[detectors]") {
  const auto m = xor_matrix();
  TrainConfig cfg;
  cfg.seed = 3;
  const auto mlp = fit(DetectorKind::Mlp, m, cfg);
  CHECK(training_accuracy(mlp, m) == 1.0);
  const auto lr = fit(DetectorKind::Logistic, m, cfg);
  CHECK(training_accuracy(lr, m) <= 0.75);
}

TEST_CASE("naive Bayes closed form on a hand dataset", "[detectors]") {
  detail::Design d;
  d.rows = 5;
  d.cols = 2;
  d.x = {1, 2, 2, 2, 3, 5, 4, 1, 6, 3};
  d.y = {0, 0, 0, 1, 1};
  const auto p = detail::fit_naive_bayes(d);
  CHECK(p.prior[0] == 3.0 / 5.0);
  CHECK(p.prior[1] == 2.0 / 5.0);
  CHECK(p.mean[0] == std::vector<double>{2.0, 3.0});
  CHECK(p.mean[1] == std::vector<double>{5.0, 2.0});
  CHECK(p.var[0][0] == (1.0 + 0.0 + 1.0) / 3.0);
  CHECK(p.var[0][1] == (1.0 + 1.0 + 4.0) / 3.0);
  CHECK(p.var[1][0] == 1.0);
  CHECK(p.var[1][1] == 1.0);

  // the posterior for one point, written out by hand
  const std::vector<double> z{3.0, 3.0};
  auto log_normal = [](double x, double mu, double var) {
    return -0.5 * std::log(2 * M_PI * var) - (x - mu) * (x - mu) / (2 * var);
  };
  const double l0 = std::log(0.6) + log_normal(3, 2, 2.0 / 3) + log_normal(3, 3, 2);
  const double l1 = std::log(0.4) + log_normal(3, 5, 1) + log_normal(3, 2, 1);
  CHECK_THAT(detail::naive_bayes_proba(p, z),
             WithinAbs(std::exp(l1) / (std::exp(l0) + std::exp(l1)), 1e-12));
}

TEST_CASE("naive Bayes through fit uses normalized columns", "[detectors]") {
  const auto m = toy_matrix({{1, 2}, {2, 2}, {3, 5}, {4, 1}, {6, 3}}, {0, 0, 0, 1, 1});
  const auto model = fit(DetectorKind::NaiveBayes, m, {});
  const auto& p = std::get<NaiveBayesParams>(model.params);
  CHECK_THAT(model.norm.mean[0], WithinAbs(3.2, 1e-12));
  CHECK_THAT(model.norm.sd[0], WithinAbs(std::sqrt(14.8 / 4), 1e-12));
  CHECK_THAT(p.mean[0][0], WithinAbs((2.0 - 3.2) / std::sqrt(14.8 / 4), 1e-12));
}

TEST_CASE("symmetric inputs give even odds", "[detectors]") {
  SECTION("naive Bayes with identical classes") {
    const auto m = toy_matrix({{1}, {2}, {3}, {4}, {1}, {2}, {3}, {4}}, {0, 0, 0, 0, 1, 1, 1, 1});
    const auto model = fit(DetectorKind::NaiveBayes, m, {});
    for (double x : {-3.0, 0.0, 2.5, 10.0})
      CHECK_THAT(predict_proba(model, std::vector<double>{x}), WithinAbs(0.5, 1e-12));
  }
  SECTION("logistic with zero weights") {
    DetectorModel model;
    model.kind = DetectorKind::Logistic;
    model.feature_names = {"a", "b"};
    model.inputs = {0, 1};
    model.norm = {{0, 0}, {1, 1}};
    model.params = LogisticParams{{0.0, 0.0}, 0.0, 0};
    for (double x : {-5.0, 0.0, 7.0})
      CHECK(predict_proba(model, std::vector<double>{x, -x}) == 0.5);
  }
}

TEST_CASE("fitted network is on the right side of one half", "[detectors]") {
  const auto m = toy_matrix({{-2}, {-1.5}, {-1}, {1}, {1.5}, {2}}, {0, 0, 0, 1, 1, 1});
  TrainConfig cfg;
  cfg.epochs = 400;
  const auto model = fit(DetectorKind::Mlp, m, cfg);
  for (const auto& r : m.rows)
    CHECK((predict_proba(model, r) > 0.5) == (r.label == Label::Second));
}

TEST_CASE("zero network on a balanced batch has zero output-bias gradient", "[detectors]") {
  auto model = random_mlp(3, 13, 1);
  auto& p = std::get<MlpParams>(model.params);
  std::fill(p.w1.begin(), p.w1.end(), 0.0);
  std::fill(p.b1.begin(), p.b1.end(), 0.0);
  std::fill(p.w2.begin(), p.w2.end(), 0.0);
  p.b2 = 0.0;
  const auto batch = random_batch(6, 3, 2);
  const auto g = mlp_gradients(model, batch);
  CHECK(g.b2 == 0.0);
}

TEST_CASE("network gradients match central differences", "[detectors][property]") {
  for (std::uint64_t seed : {11u, 12u, 13u}) {
    auto model = random_mlp(4, 13, seed);
    const auto batch = random_batch(5, 4, seed + 100);
    const auto g = mlp_gradients(model, batch);
    auto& p = std::get<MlpParams>(model.params);

    std::vector<double*> params;
    std::vector<double> analytic;
    for (std::size_t i = 0; i < p.w1.size(); ++i) {
      params.push_back(&p.w1[i]);
      analytic.push_back(g.w1[i]);
    }
    for (std::size_t i = 0; i < p.b1.size(); ++i) {
      params.push_back(&p.b1[i]);
      analytic.push_back(g.b1[i]);
    }
    for (std::size_t i = 0; i < p.w2.size(); ++i) {
      params.push_back(&p.w2[i]);
      analytic.push_back(g.w2[i]);
    }
    params.push_back(&p.b2);
    analytic.push_back(g.b2);

    const double h = 1e-5;
    double worst = 0.0;
    for (std::size_t k = 0; k < params.size(); ++k) {
      const double saved = *params[k];
      *params[k] = saved + h;
      const double up = reference_loss(p, batch);
      *params[k] = saved - h;
      const double down = reference_loss(p, batch);
      *params[k] = saved;
      const double numeric = (up - down) / (2 * h);
      const double scale = std::max(std::abs(numeric), std::abs(analytic[k]));
      if (scale < 1e-8) {
        CHECK(std::abs(numeric - analytic[k]) < 1e-9);
        continue;
      }
      worst = std::max(worst, std::abs(numeric - analytic[k]) / scale);
    }
    CHECK(worst <= 1e-4);
  }
}

TEST_CASE("duplicating the batch leaves gradients unchanged", "[detectors][property]") {
  const auto model = random_mlp(4, 13, 5);
  const auto batch = random_batch(5, 4, 6);
  auto doubled = batch;
  doubled.insert(doubled.end(), batch.begin(), batch.end());
  const auto a = mlp_gradients(model, batch);
  const auto b = mlp_gradients(model, doubled);
  for (std::size_t i = 0; i < a.w1.size(); ++i) CHECK_THAT(b.w1[i], WithinAbs(a.w1[i], 1e-15));
  for (std::size_t i = 0; i < a.w2.size(); ++i) CHECK_THAT(b.w2[i], WithinAbs(a.w2[i], 1e-15));
  for (std::size_t i = 0; i < a.b1.size(); ++i) CHECK_THAT(b.b1[i], WithinAbs(a.b1[i], 1e-15));
  CHECK_THAT(b.b2, WithinAbs(a.b2, 1e-15));
}

TEST_CASE("training is deterministic given the seed", "[detectors]") {
  const auto sim = simulate_cohort(10, {}, {}, 3);
  const auto m = select_features(assemble_datasets(sim.cohort).unpruned);
  for (auto kind : {DetectorKind::NaiveBayes, DetectorKind::Logistic, DetectorKind::Mlp}) {
    TrainConfig cfg;
    cfg.seed = 9;
    const auto a = fit(kind, m, cfg);
    const auto b = fit(kind, m, cfg);
    CHECK(a == b);
    CHECK(model_to_json(a).dump() == model_to_json(b).dump());
  }
  TrainConfig c1, c2;
  c1.seed = 1;
  c2.seed = 2;
  CHECK_FALSE(fit(DetectorKind::Mlp, m, c1) == fit(DetectorKind::Mlp, m, c2));
}

TEST_CASE("naive Bayes decisions survive affine rescaling", "[detectors][property]") {
  const auto sim = simulate_cohort(15, {}, {}, 4);
  const auto m = select_features(assemble_datasets(sim.cohort).unpruned);
  const auto base = fit(DetectorKind::NaiveBayes, m, {});
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> scale(0.01, 100.0), shift(-1000.0, 1000.0);
  auto t = m;
  for (std::size_t j = 0; j < t.width(); ++j) {
    const double a = (j % 3 == 0 ? -1.0 : 1.0) * scale(rng), b = shift(rng);
    for (auto& r : t.rows) r.values[j] = a * r.values[j] + b;
  }
  const auto moved = fit(DetectorKind::NaiveBayes, t, {});
  for (std::size_t i = 0; i < m.rows.size(); ++i)
    CHECK(predict_second(base, m.rows[i]) == predict_second(moved, t.rows[i]));
}

TEST_CASE("logistic loss never rises during training", "[detectors][property]") {
  const auto sim = simulate_cohort(10, {}, {}, 5);
  const auto m = select_features(assemble_datasets(sim.cohort).unpruned);
  const auto cols = m.selected_indices();
  const auto norm = detail::fit_norm(m, cols);
  const auto design = detail::make_design(m, cols, norm);
  TrainConfig cfg;
  cfg.gd_learning_rate = 0.05;
  cfg.gd_max_iterations = 500;
  std::vector<double> trace;
  detail::fit_logistic(design, cfg, &trace);
  REQUIRE(trace.size() > 10);
  for (std::size_t i = 1; i < trace.size(); ++i) CHECK(trace[i] <= trace[i - 1] + 1e-15);
  CHECK(trace.back() < trace.front());
}

TEST_CASE("model files round trip", "[detectors][io]") {
  const auto sim = simulate_cohort(10, {}, {}, 6);
  const auto d = assemble_datasets(sim.cohort);
  const auto m = select_features(d.unpruned);
  for (auto kind : {DetectorKind::NaiveBayes, DetectorKind::Logistic, DetectorKind::Mlp,
                    DetectorKind::Ratio}) {
    const auto& mat = kind == DetectorKind::Ratio ? ratio_matrix(d.unpruned_sessions) : m;
    const auto model = fit(kind, mat, {});
    const auto text = model_to_json(model).dump();
    const auto back = model_from_json(nlohmann::ordered_json::parse(text));
    CHECK(back == model);
    CHECK(model_to_json(back).dump() == text);
    for (const auto& r : mat.rows) CHECK(predict_proba(back, r) == predict_proba(model, r));
  }
  auto j = model_to_json(fit(DetectorKind::Logistic, m, {}));
  j["format_version"] = 99;
  CHECK_THROWS_AS(model_from_json(j), ParseError);
}

TEST_CASE("fit and predict reject bad input", "[detectors]") {
  SECTION("one class") {
    const auto m = toy_matrix({{1}, {2}, {3}}, {0, 0, 0});
    CHECK_THROWS_AS(fit(DetectorKind::Logistic, m, {}), DataError);
  }
  SECTION("non-finite value names row and column") {
    auto m = toy_matrix({{1, 2}, {2, 3}, {3, 4}}, {0, 1, 0});
    m.rows[1].values[1] = std::nan("");
    try {
      fit(DetectorKind::NaiveBayes, m, {});
      FAIL("expected an error");
    } catch (const DataError& e) {
      const std::string msg = e.what();
      CHECK(msg.find("r1") != std::string::npos);
      CHECK(msg.find("x1") != std::string::npos);
    }
  }
  SECTION("arity") {
    const auto m = toy_matrix({{1, 2}, {2, 3}, {3, 4}}, {0, 1, 0});
    const auto model = fit(DetectorKind::Logistic, m, {});
    CHECK_THROWS_AS(predict_proba(model, std::vector<double>{1.0}), DataError);
  }
  SECTION("bad config") {
    const auto m = toy_matrix({{1}, {2}, {3}}, {0, 1, 0});
    TrainConfig cfg;
    cfg.keep_prob = 0.0;
    CHECK_THROWS_AS(fit(DetectorKind::Mlp, m, cfg), DataError);
  }
}

TEST_CASE("ratio of the faster pair to its practice blocks", "[detectors]") {
  SECTION("all blocks equal") {
    const auto s = make_session([](int, std::size_t) { return 600.0; });
    CHECK(ratio_score(s) == 1.0);
  }
  SECTION("hand arithmetic") {
    const auto s = make_session([](int b, std::size_t) {
      switch (b) {
        case 1: case 2: return 600.0;
        case 3: case 4: return 650.0;
        case 5: return 900.0;
        default: return 700.0;
      }
    });
    CHECK_THAT(ratio_score(s), WithinRel(650.0 / 600.0, 1e-15));
  }
  SECTION("the other pair uses block 5") {
    const auto s = make_session([](int b, std::size_t) {
      return b == 5 ? 800.0 : (b == 6 || b == 7) ? 600.0 : 700.0;
    });
    CHECK_THAT(ratio_score(s), WithinRel(0.75, 1e-15));
  }
  SECTION("errors are left out") {
    const auto s = make_session(
        [](int b, std::size_t i) { return (b == 1 && i == 0) ? 5000.0 : 600.0; },
        [](int b, std::size_t i) { return !(b == 1 && i == 0); });
    CHECK(ratio_score(s) == 1.0);
  }
  SECTION("honest simulated sessions mostly fall below one") {
    int below = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed)
      below += ratio_score(simulate_attempt(draw_profile(Calibration{}, seed, 0), 1)) < 1.0;
    CHECK(below >= 80);
  }
}

TEST_CASE("ratio detector fits a threshold on the grid", "[detectors]") {
  const auto m = toy_matrix({{0.8}, {0.85}, {0.9}, {1.1}, {1.2}, {1.3}}, {0, 0, 0, 1, 1, 1});
  const auto model = fit(DetectorKind::Ratio, m, {});
  const double t = std::get<RatioParams>(model.params).threshold;
  CHECK(t > 0.9);
  CHECK(t <= 1.1);
  CHECK(training_accuracy(model, m) == 1.0);
  CHECK(predict_proba(model, std::vector<double>{2.0}) == 1.0);
  CHECK(predict_proba(model, std::vector<double>{0.5}) == 0.0);

  TrainConfig fixed;
  fixed.ratio_threshold = 1.25;
  CHECK(std::get<RatioParams>(fit(DetectorKind::Ratio, m, fixed).params).threshold == 1.25);
}
