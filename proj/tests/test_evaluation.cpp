#include "support.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <set>

using namespace iat;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;

namespace {

FeatureMatrix noise_matrix(std::size_t n, std::size_t width, std::uint64_t seed,
                           double separation) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  FeatureMatrix m;
  for (std::size_t j = 0; j < width; ++j) m.feature_names.push_back("f" + std::to_string(j));
  m.selected.assign(width, true);
  for (std::size_t i = 0; i < n; ++i) {
    const bool second = i % 2 == 1;
    FeatureVector r{"s" + std::to_string(1000 + i), second ? Label::Second : Label::First, {}};
    for (std::size_t j = 0; j < width; ++j)
      r.values.push_back(z(rng) + (second && j == 0 ? separation : 0.0));
    m.rows.push_back(r);
  }
  return m;
}

Confusion confusion(std::size_t tn, std::size_t fp, std::size_t fn, std::size_t tp) {
  Confusion c;
  c.tn = tn;
  c.fp = fp;
  c.fn = fn;
  c.tp = tp;
  return c;
}

}  // namespace

TEST_CASE("metrics on small confusion matrices", "[evaluation]") {
  SECTION("perfect") {
    const auto m = metrics(confusion(5, 0, 0, 5));
    CHECK(m.accuracy == 1.0);
    CHECK(m.weighted_f1 == 1.0);
    CHECK(m.precision == 1.0);
    CHECK(m.recall == 1.0);
  }
  SECTION("rows are truth, second is positive") {
    const auto m = metrics(confusion(3, 2, 1, 4));
    CHECK_THAT(m.accuracy, WithinAbs(0.7, 1e-15));
    CHECK_THAT(m.precision, WithinAbs(4.0 / 6.0, 1e-15));
    CHECK_THAT(m.recall, WithinAbs(0.8, 1e-15));
    CHECK_THAT(m.f1_first, WithinAbs(6.0 / 9.0, 1e-15));
    CHECK_THAT(m.f1_second, WithinAbs(8.0 / 11.0, 1e-15));
    CHECK_THAT(m.weighted_f1, WithinAbs(0.5 * (6.0 / 9.0) + 0.5 * (8.0 / 11.0), 1e-15));
    CHECK_THAT(m.weighted_f1, WithinAbs(0.69697, 1e-5));
  }
  SECTION("one class present") {
    const auto m = metrics(confusion(5, 0, 0, 0));
    CHECK(m.accuracy == 1.0);
    CHECK(m.precision == 0.0);
    CHECK(m.recall == 0.0);
    CHECK(m.weighted_f1 == 1.0);
  }
  SECTION("empty") { CHECK_THROWS_AS(metrics(Confusion{}), DataError); }
}

TEST_CASE("LOOCV on separable data is perfect", "[evaluation]") {
  const auto m = noise_matrix(40, 2, 1, 12.0);
  for (auto kind : {DetectorKind::NaiveBayes, DetectorKind::Logistic}) {
    const auto rep = cross_validate(kind, m, {}, Scheme::loocv());
    CHECK(rep.metrics.accuracy == 1.0);
    CHECK(rep.folds == 40);
    CHECK(rep.predictions.size() == 40);
  }
}

TEST_CASE("shuffled labels give chance accuracy", "[evaluation][property]") {
  auto m = noise_matrix(400, 3, 2, 0.0);
  std::mt19937_64 rng(5);
  std::vector<Label> labels;
  for (const auto& r : m.rows) labels.push_back(r.label);
  std::shuffle(labels.begin(), labels.end(), rng);
  for (std::size_t i = 0; i < labels.size(); ++i) m.rows[i].label = labels[i];
  for (auto kind : {DetectorKind::NaiveBayes, DetectorKind::Logistic}) {
    const auto rep = cross_validate(kind, m, {}, Scheme::kfold(10));
    CHECK_THAT(rep.metrics.accuracy, WithinAbs(0.5, 0.1));
  }
}

TEST_CASE("held-out rows never reach the fold's model", "[evaluation][property]") {
  const auto sim = simulate_cohort(8, {}, {}, 2);
  const auto m = select_features(assemble_datasets(sim.cohort).unpruned);
  TrainConfig cfg;
  cfg.epochs = 20;
  for (auto kind : {DetectorKind::NaiveBayes, DetectorKind::Logistic, DetectorKind::Mlp}) {
    for (std::size_t held : {std::size_t{0}, std::size_t{5}, m.rows.size() - 1}) {
      const std::vector<std::size_t> fold{held};
      const auto base = model_to_json(fit_fold(kind, m, cfg, fold)).dump();
      auto poisoned = m;
      for (auto& v : poisoned.rows[held].values) v = v * -37.0 + 1e6;
      poisoned.rows[held].label =
          poisoned.rows[held].label == Label::First ? Label::Second : Label::First;
      CHECK(model_to_json(fit_fold(kind, poisoned, cfg, fold)).dump() == base);
    }
  }
}

TEST_CASE("per-fold selection sees only training rows", "[evaluation]") {
  const auto sim = simulate_cohort(8, {}, {}, 3);
  const auto m = assemble_datasets(sim.cohort).unpruned;
  CvOptions opt;
  opt.per_fold_selection = true;
  const std::vector<std::size_t> fold{3};
  const auto t = training_rows(m, fold, opt);
  std::vector<std::size_t> rest;
  for (std::size_t i = 0; i < m.rows.size(); ++i)
    if (i != 3) rest.push_back(i);
  CHECK(t.selected == select_features(m.subset(rest)).selected);
  CHECK(t.rows.size() == m.rows.size() - 1);
}

TEST_CASE("fold construction", "[evaluation]") {
  SECTION("stratified k-fold partitions the rows") {
    FeatureMatrix m = noise_matrix(40, 1, 3, 0.0);
    for (std::size_t i = 0; i < 40; ++i)
      m.rows[i].label = i < 30 ? Label::First : Label::Second;
    const auto folds = make_folds(m, Scheme::kfold(5), 7);
    REQUIRE(folds.size() == 5);
    std::set<std::size_t> seen;
    for (const auto& f : folds) {
      std::size_t seconds = 0;
      for (auto i : f) {
        CHECK(seen.insert(i).second);
        seconds += m.rows[i].label == Label::Second;
      }
      CHECK(f.size() == 8);
      CHECK(seconds == 2);
    }
    CHECK(seen.size() == 40);
    CHECK(make_folds(m, Scheme::kfold(5), 7) == folds);
  }
  SECTION("bad schemes") {
    const auto m = noise_matrix(4, 1, 3, 0.0);
    CHECK_THROWS_AS(make_folds(m, Scheme::kfold(1), 0), DataError);
    CHECK_THROWS_AS(make_folds(m, Scheme::kfold(5), 0), DataError);
    CHECK_THROWS_AS(make_folds(noise_matrix(2, 1, 3, 0.0), Scheme::loocv(), 0), DataError);
  }
  SECTION("a failing fold is named") {
    auto m = noise_matrix(10, 2, 4, 1.0);
    m.rows[4].values[1] = std::numeric_limits<double>::infinity();
    CHECK_THROWS_WITH(cross_validate(DetectorKind::NaiveBayes, m, {}, Scheme::loocv()),
                      ContainsSubstring("fold 0") && ContainsSubstring("f1"));
  }
}

TEST_CASE("paired t-test matches closed forms", "[evaluation][property]") {
  SECTION("four degrees of freedom") {
    const std::vector<double> a{1, 2, 3, 4, 5}, b{2, 4, 5, 4, 7};
    const auto r = stats::paired_t_test(a, b);
    CHECK_THAT(r.t, WithinAbs(3.5, 1e-12));
    CHECK(r.df == 4.0);
    // Student t with four degrees of freedom: P(|T| < t) = s (1 + c^2 / 2)
    const double s = 3.5 / std::sqrt(3.5 * 3.5 + 4), c2 = 4 / (3.5 * 3.5 + 4);
    CHECK_THAT(r.p_two_tailed, WithinAbs(1 - s * (1 + c2 / 2), 1e-12));
  }
  SECTION("two degrees of freedom") {
    const std::vector<double> a{0, 0, 0}, b{1, 3, 2};
    const auto r = stats::paired_t_test(a, b);
    CHECK_THAT(r.t, WithinAbs(2.0 / (1.0 / std::sqrt(3.0)), 1e-12));
    CHECK_THAT(r.p_two_tailed, WithinAbs(1 - r.t / std::sqrt(r.t * r.t + 2), 1e-12));
  }
  SECTION("no difference") {
    const std::vector<double> a{1, 2, 3};
    CHECK(stats::paired_t_test(a, a).p_two_tailed == 1.0);
  }
}

TEST_CASE("cohort statistics", "[evaluation]") {
  SECTION("a repeated attempt shows no change") {
    const auto sim = simulate_cohort(20, {}, {}, 4);
    Cohort c;
    for (const auto& p : sim.cohort.pairs) {
      auto again = p.first;
      again.attempt = 2;
      again.strategy_id = 1;
      again.session_id = p.first.participant_id + "-A2";
      c.pairs.push_back({p.first, again});
    }
    const auto s = cohort_stats(c);
    CHECK(s.p_score == 1.0);
    CHECK(s.p_response_time == 1.0);
    CHECK(s.reversals == 0);
  }
  SECTION("without instructions the score does not move") {
    const auto sim = simulate_cohort(300, ModeMix{0.0, 1.0, 0.0, 0.0}, {}, 5);
    const auto s = cohort_stats(sim.cohort);
    CHECK(s.pairs == 300);
    CHECK(s.p_score > 0.01);
  }
  SECTION("instructed cohort reverses") {
    const auto sim = simulate_cohort(200, {}, {}, 6);
    const auto s = cohort_stats(sim.cohort);
    CHECK(s.p_score < 0.01);
    CHECK(s.reversals > 60);
    const auto j = cohort_stats_to_json(s);
    CHECK(j["pairs"] == 200);
    CHECK_THAT(render_cohort_table(s), ContainsSubstring("p-value"));
  }
}

TEST_CASE("evaluation report formats", "[evaluation]") {
  const auto sim = simulate_cohort(10, {}, {}, 7);
  const auto d = assemble_datasets(sim.cohort);
  TrainConfig cfg;
  cfg.seed = 3;
  std::vector<EvalReport> reps;
  for (auto v : {Variant::Unpruned, Variant::Pruned})
    reps.push_back(evaluate(d, DetectorKind::NaiveBayes, v, cfg, Scheme::loocv()));
  const auto j = report_to_json(reps[0]);
  CHECK(j["detector"] == "naive_bayes");
  CHECK(j["variant"] == "unpruned");
  CHECK(j["scheme"] == "loocv");
  CHECK(j["n"] == 20);
  CHECK(j["per_fold_predictions"].size() == 20);
  CHECK(j["weighted_f1"].get<double>() == reps[0].metrics.weighted_f1);
  const auto table = render_f1_table(reps);
  CHECK_THAT(table, ContainsSubstring("Unpruned (n=20)"));
  CHECK_THAT(table, ContainsSubstring("Pruned (n=" + std::to_string(reps[1].predictions.size()) + ")"));
  CHECK_THAT(table, ContainsSubstring("naive_bayes"));

  const auto again = evaluate(d, DetectorKind::NaiveBayes, Variant::Unpruned, cfg, Scheme::loocv());
  CHECK(report_to_json(again).dump() == j.dump());
}
