#pragma once

// Synthetic respondents: honest first attempts and second attempts under the
// five deception strategies, with correct, absent or misapplied compliance.

#include <iat/calibration.hpp>
#include <iat/errors.hpp>
#include <iat/scoring.hpp>
#include <iat/session.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <ctime>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace iat {

enum class ComplianceMode { Correct, None, PracticeMisapplied, WrongCritical };

inline constexpr std::string_view to_string(ComplianceMode m) {
  switch (m) {
    case ComplianceMode::Correct: return "correct";
    case ComplianceMode::None: return "none";
    case ComplianceMode::PracticeMisapplied: return "practice_misapplied";
    case ComplianceMode::WrongCritical: return "wrong_critical";
  }
  return "";
}

struct RespondentProfile {
  std::string participant_id = "P0001";
  double base_log_latency_mu = 6.5;
  double base_log_latency_sigma = 0.3;
  double congruency_effect_ms = 100.0;  // > 0: ComputerScience-Male association
  double base_error_rate = 0.07;
  double practice_slowdown_ms = 100.0;
  double practice_retention = 1.0;  // share of practice_slowdown_ms left on attempt 2
  double switch_cost_ms = 0.0;  // extra on block 5, where the concept keys swap
  double fatigue_ms = 0.0;
  double familiarity = 0.0;    // fractional speedup of attempt 2
  double fatigue_error = 0.0;  // extra error probability on attempt 2
  double anticipation_rate = 0.0;  // premature presses, 150-300 ms, either key
  std::uint64_t seed = 0;
  std::int64_t start_time = 1464782400;  // 2016-06-01T12:00:00Z
};

struct CompliancePlan {
  int strategy_id = 1;
  ComplianceMode mode = ComplianceMode::Correct;
  StrategyIntensity intensity = default_intensity(1);
  double adherence = 1.0;  // fraction of targeted trials delayed; error counts are not scaled
  /// Association the instructions work against; defaults to the profile's.
  std::optional<bool> instructed_cs_male;
};

inline CompliancePlan make_plan(int strategy_id, ComplianceMode mode,
                                double adherence = 1.0) {
  return {strategy_id, mode, default_intensity(strategy_id), adherence, {}};
}

namespace detail {

inline std::string iso8601(std::int64_t epoch_seconds) {
  const std::time_t t = static_cast<std::time_t>(epoch_seconds);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline std::mt19937_64 stream_rng(std::uint64_t seed, std::uint64_t a,
                                  std::uint64_t b = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(a),
                    static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b)};
  return std::mt19937_64(seq);
}

/// Item order: concatenated shuffles of the block's items, with no item shown
/// twice in a row.
inline std::vector<StimulusItem> item_sequence(const BlockSpec& spec,
                                               std::mt19937_64& rng) {
  std::vector<StimulusItem> pool;
  for (const auto& it : stimulus_items())
    if (spec.side_of(it.category)) pool.push_back(it);
  std::vector<StimulusItem> seq;
  while (static_cast<int>(seq.size()) < spec.trial_count) {
    auto perm = pool;
    std::shuffle(perm.begin(), perm.end(), rng);
    if (!seq.empty() && perm.front().text == seq.back().text)
      std::swap(perm[0], perm[1]);
    seq.insert(seq.end(), perm.begin(), perm.end());
  }
  seq.resize(static_cast<std::size_t>(spec.trial_count));
  return seq;
}

inline double beta_draw(std::mt19937_64& rng, double a, double b) {
  std::gamma_distribution<double> ga(a, 1.0), gb(b, 1.0);
  const double x = ga(rng), y = gb(rng);
  return x / (x + y);
}

inline double clamp_warn(double v, double lo, double hi, const char* name,
                         std::vector<std::string>* warnings) {
  if (v < lo || v > hi || std::isnan(v)) {
    if (warnings)
      warnings->push_back(std::string(name) + " clamped to [" + std::to_string(lo) +
                          ", " + std::to_string(hi) + "]");
    return std::isnan(v) ? lo : std::clamp(v, lo, hi);
  }
  return v;
}

inline std::vector<int> targeted_blocks(ComplianceMode mode, bool cs_male) {
  const std::vector<int> cs_male_pair{3, 4}, cs_female_pair{6, 7};
  switch (mode) {
    case ComplianceMode::Correct: return cs_male ? cs_male_pair : cs_female_pair;
    case ComplianceMode::WrongCritical: return cs_male ? cs_female_pair : cs_male_pair;
    case ComplianceMode::PracticeMisapplied: return {1, 2, 5};
    case ComplianceMode::None: return {};
  }
  return {};
}

}  // namespace detail

/// One complete seven-block attempt. Deterministic given profile.seed.
/// Out-of-range parameters are clamped and reported through `warnings`.
inline Session simulate_attempt(const RespondentProfile& profile, int attempt,
                                const std::optional<CompliancePlan>& plan_in = {},
                                std::vector<std::string>* warnings = nullptr) {
  if (attempt != 1 && attempt != 2) throw DataError("attempt must be 1 or 2");
  std::optional<CompliancePlan> plan = plan_in;
  if (plan && attempt == 1) {
    if (warnings) warnings->push_back("compliance plan ignored on attempt 1");
    plan.reset();
  }
  const double sigma = detail::clamp_warn(profile.base_log_latency_sigma, 0.01, 2.0,
                                          "base_log_latency_sigma", warnings);
  const double err = detail::clamp_warn(profile.base_error_rate, 0.0, 0.3,
                                        "base_error_rate", warnings);
  const double slow = detail::clamp_warn(profile.practice_slowdown_ms, 0.0, 5000.0,
                                         "practice_slowdown_ms", warnings);
  const double switch_cost = detail::clamp_warn(profile.switch_cost_ms, 0.0, 5000.0,
                                                "switch_cost_ms", warnings);
  const bool second = attempt == 2;
  const double retention = detail::clamp_warn(profile.practice_retention, 0.0, 1.0,
                                              "practice_retention", warnings);
  const double familiarity =
      second ? detail::clamp_warn(profile.familiarity, -0.5, 0.5, "familiarity", warnings)
             : 0.0;
  const double fatigue = second ? profile.fatigue_ms : 0.0;
  const double err_attempt =
      std::clamp(err + (second ? profile.fatigue_error : 0.0), 0.0, 0.5);

  const double anticipation = detail::clamp_warn(profile.anticipation_rate, 0.0, 0.5,
                                                 "anticipation_rate", warnings);

  const bool cs_male = profile.congruency_effect_ms >= 0.0;
  const std::vector<int> slowed_pair =
      cs_male ? std::vector<int>{6, 7} : std::vector<int>{3, 4};
  const double effect = std::abs(profile.congruency_effect_ms);

  std::vector<int> targets;
  double adherence = 0.0;
  if (plan) {
    if (plan->strategy_id < 1 || plan->strategy_id > 5)
      throw DataError("strategy_id must be in 1..5");
    adherence = detail::clamp_warn(plan->adherence, 0.0, 1.0, "adherence", warnings);
    targets = detail::targeted_blocks(plan->mode,
                                      plan->instructed_cs_male.value_or(cs_male));
  }

  auto rng = detail::stream_rng(profile.seed, static_cast<std::uint64_t>(attempt));
  std::normal_distribution<double> log_lat(profile.base_log_latency_mu, sigma);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  Session s;
  s.participant_id = profile.participant_id;
  s.session_id = profile.participant_id + "-A" + std::to_string(attempt);
  s.attempt = attempt;
  s.strategy_id = plan ? plan->strategy_id : 0;
  s.created_at = detail::iso8601(profile.start_time + (second ? 1200 : 0));

  for (const auto& spec : standard_block_layout()) {
    Block b{spec, {}};
    const bool targeted =
        std::find(targets.begin(), targets.end(), spec.index) != targets.end();
    const bool applying = targeted && plan && plan->mode != ComplianceMode::None;
    const auto items = detail::item_sequence(spec, rng);

    for (const auto& item : items) {
      Trial t;
      t.item = std::string(item.text);
      t.category = item.category;
      t.correct_side = *spec.side_of(item.category);
      double lat = std::exp(log_lat(rng)) * (1.0 - familiarity) + fatigue;
      if (spec.role == BlockRole::Practice) lat += second ? slow * retention : slow;
      if (spec.index == 5) lat += switch_cost;
      if (std::find(slowed_pair.begin(), slowed_pair.end(), spec.index) !=
          slowed_pair.end())
        lat += effect;

      if (anticipation > 0.0 && unif(rng) < anticipation) {
        t.latency_ms = std::round((150.0 + 150.0 * unif(rng)) * 10.0) / 10.0;
        t.correct = unif(rng) < 0.5;
        b.trials.push_back(std::move(t));
        continue;
      }

      double p_err = err_attempt;
      if (applying && unif(rng) < adherence) {
        const auto& in = plan->intensity;
        if (in.delay_mean_ms > 0.0) {
          std::normal_distribution<double> delay(in.delay_mean_ms, in.delay_sd_ms);
          lat += std::max(0.0, delay(rng));
        }
        if (in.error_odds_multiplier != 1.0 && p_err > 0.0) {
          const double odds = p_err / (1.0 - p_err) * in.error_odds_multiplier;
          p_err = odds / (1.0 + odds);
        }
      }
      t.correct = !(unif(rng) < p_err);
      t.latency_ms = std::max(1.0, std::round(lat * 10.0) / 10.0);
      b.trials.push_back(std::move(t));
    }

    // Intentional errors spread over the targeted blocks.
    if (applying && plan->intensity.error_count > 0.0) {
      int n_targeted = 0;
      for (int idx : targets) n_targeted += standard_block_layout()[idx - 1].trial_count;
      const double p = std::min(1.0, plan->intensity.error_count /
                                         static_cast<double>(n_targeted));
      std::binomial_distribution<int> count(spec.trial_count, p);
      const int k = count(rng);
      std::vector<std::size_t> candidates;
      for (std::size_t i = 0; i < b.trials.size(); ++i)
        if (b.trials[i].correct) candidates.push_back(i);
      std::shuffle(candidates.begin(), candidates.end(), rng);
      std::normal_distribution<double> bump(plan->intensity.hesitation_mean_ms,
                                            plan->intensity.hesitation_sd_ms);
      for (int i = 0; i < k && i < static_cast<int>(candidates.size()); ++i) {
        const auto pos = candidates[static_cast<std::size_t>(i)];
        auto& t = b.trials[pos];
        t.correct = false;
        const double h = std::max(0.0, bump(rng));
        t.latency_ms = std::round((t.latency_ms + h) * 10.0) / 10.0;
        // post-error slowing carries the hesitation into the next response
        if (pos + 1 < b.trials.size()) {
          auto& next = b.trials[pos + 1];
          next.latency_ms = std::round((next.latency_ms + h) * 10.0) / 10.0;
        }
      }
    }
    for (auto& t : b.trials) t.key = t.correct ? t.correct_side : opposite(t.correct_side);
    s.blocks.push_back(std::move(b));
  }
  return s;
}

/// Draws one participant from the population hyperparameters.
inline RespondentProfile draw_profile(const Calibration& c, std::uint64_t seed,
                                      std::size_t index) {
  auto rng = detail::stream_rng(seed, index, 0xC0FFEE);
  std::normal_distribution<double> n01(0.0, 1.0);
  RespondentProfile p;
  char id[32];
  std::snprintf(id, sizeof id, "P%04zu", index + 1);
  p.participant_id = id;
  p.base_log_latency_mu = c.log_mu_mean + c.log_mu_sd * n01(rng);
  p.base_log_latency_sigma =
      std::clamp(c.log_sigma_mean + c.log_sigma_sd * n01(rng), 0.1, 0.8);
  p.congruency_effect_ms = c.congruency_mean_ms + c.congruency_sd_ms * n01(rng);
  p.base_error_rate = std::min(0.3, detail::beta_draw(rng, c.error_beta_a, c.error_beta_b));
  p.practice_slowdown_ms = std::max(
      0.0, c.practice_slowdown_mean_ms + c.practice_slowdown_sd_ms * n01(rng));
  p.practice_retention =
      std::clamp(c.practice_retention_mean + c.practice_retention_sd * n01(rng), 0.0, 1.0);
  p.switch_cost_ms = std::max(0.0, c.switch_cost_mean_ms + c.switch_cost_sd_ms * n01(rng));
  p.fatigue_ms = c.fatigue_mean_ms + c.fatigue_sd_ms * n01(rng);
  p.familiarity = std::clamp(c.familiarity_mean + c.familiarity_sd * n01(rng), -0.2, 0.3);
  p.fatigue_error = std::clamp(c.fatigue_error_mean + c.fatigue_error_sd * n01(rng),
                               -0.05, 0.1);
  p.anticipation_rate =
      detail::beta_draw(rng, c.anticipation_beta_a, c.anticipation_beta_b);
  p.seed = rng();
  p.start_time = 1464782400 + static_cast<std::int64_t>(index) * 3600;
  return p;
}

inline void validate_mix(const ModeMix& m) {
  const double v[] = {m.correct, m.none, m.practice_misapplied, m.wrong_critical};
  double sum = 0.0;
  for (double x : v) {
    if (!(x >= 0.0 && x <= 1.0)) throw DataError("mode probabilities must be in [0, 1]");
    sum += x;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw DataError("mode probabilities must sum to 1");
}

struct SimulatedCohort {
  Cohort cohort;
  std::vector<Session> extra_firsts;
  std::vector<RespondentProfile> profiles;
  std::vector<CompliancePlan> plans;
};

/// Pair i depends only on (master_seed, i), so pairs can be generated in any
/// order. The strategy is uniform over 1..5 and the instructions target the
/// pairing matching the sign of the first-attempt score (zero counts as
/// positive).
inline SimulatedCohort simulate_cohort(std::size_t n_pairs, const ModeMix& mix = {},
                                       const Calibration& cal = {},
                                       std::uint64_t master_seed = 1,
                                       std::size_t extra_firsts = 0) {
  if (n_pairs < 2) throw DataError("a cohort needs at least 2 pairs");
  validate_mix(mix);
  SimulatedCohort out;
  for (std::size_t i = 0; i < n_pairs + extra_firsts; ++i) {
    const auto profile = draw_profile(cal, master_seed, i);
    auto first = simulate_attempt(profile, 1);
    if (i >= n_pairs) {
      out.extra_firsts.push_back(std::move(first));
      continue;
    }
    auto rng = detail::stream_rng(master_seed, i, 0x57A7);
    std::uniform_int_distribution<int> strategy(1, 5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const int sid = strategy(rng);
    const double r = u(rng);
    ComplianceMode mode = ComplianceMode::WrongCritical;
    if (r < mix.correct)
      mode = ComplianceMode::Correct;
    else if (r < mix.correct + mix.none)
      mode = ComplianceMode::None;
    else if (r < mix.correct + mix.none + mix.practice_misapplied)
      mode = ComplianceMode::PracticeMisapplied;
    CompliancePlan plan = make_plan(
        sid, mode, detail::beta_draw(rng, cal.adherence_beta_a, cal.adherence_beta_b));
    double d1 = 0.0;
    try {
      d1 = d_score(first).d_score;
    } catch (const UnscorableError&) {
      d1 = profile.congruency_effect_ms;
    }
    plan.instructed_cs_male = d1 >= 0.0;
    auto second = simulate_attempt(profile, 2, plan);
    out.cohort.pairs.push_back({std::move(first), std::move(second)});
    out.profiles.push_back(profile);
    out.plans.push_back(plan);
  }
  return out;
}

inline nlohmann::ordered_json simulation_manifest(std::size_t n_pairs,
                                                  std::size_t extra_firsts,
                                                  const ModeMix& mix,
                                                  const Calibration& cal,
                                                  std::uint64_t seed) {
  return {{"master_seed", seed},
          {"pairs", n_pairs},
          {"extra_firsts", extra_firsts},
          {"mode_mix", mode_mix_to_json(mix)},
          {"calibration", calibration_to_json(cal)}};
}

}  // namespace iat
