#pragma once

// Tuning constants for the synthetic respondent model.
//
// Defaults are tuned so a large simulated cohort reproduces the reference
// critical-block summary: first attempts 0.802 s mean latency, 0.069 error
// rate and 0.395 mean D-score; second attempts near-neutral (0.010) with roughly
// 70% of participants reversing by one first-attempt SD.
//
// Latency model per trial (milliseconds):
//   exp(N(mu, sigma)) * (1 - familiarity on attempt 2)
//     + practice_slowdown          (blocks 1, 2, 5; times practice_retention on attempt 2)
//     + switch_cost                (block 5)
//     + |congruency_effect|        (critical pair opposing the association)
//     + fatigue                    (attempt 2)
//     + strategy delay             (targeted trials, see StrategyIntensity)
// except anticipatory presses, which land uniformly in 150-300 ms on a random key.

#include <json.hpp>

#include <array>

namespace iat {

struct StrategyIntensity {
  double delay_mean_ms = 0.0;
  double delay_sd_ms = 0.0;
  double error_count = 0.0;           // intended errors over the targeted blocks
  double error_odds_multiplier = 1.0;
  double hesitation_mean_ms = 0.0;    // added to each intentional error
  double hesitation_sd_ms = 0.0;
};

/// Per-strategy effect sizes for full adherence, strategies 1..5.
inline StrategyIntensity default_intensity(int strategy_id) {
  switch (strategy_id) {
    case 1: return {0.0, 0.0, 10.0, 1.0, 300.0, 100.0};  // intentional errors
    case 2: return {1000.0, 150.0, 0.0, 1.0, 0.0, 0.0};  // "one Mississippi"
    case 3: return {900.0, 300.0, 0.0, 1.0, 0.0, 0.0};   // hands in lap
    case 4: return {400.0, 150.0, 0.0, 3.0, 0.0, 0.0};   // crossed hands
    case 5: return {800.0, 200.0, 0.0, 1.0, 0.0, 0.0};   // touch nose
    default: return {};
  }
}

struct ModeMix {
  double correct = 0.70;
  double none = 0.15;
  double practice_misapplied = 0.075;
  double wrong_critical = 0.075;
};

/// Population hyperparameters; each participant's profile is drawn from these.
struct Calibration {
  // log-latency location and per-trial spread
  double log_mu_mean = 6.55;
  double log_mu_sd = 0.14;
  double log_sigma_mean = 0.30;
  double log_sigma_sd = 0.05;
  // association strength, positive = ComputerScience with Male
  double congruency_mean_ms = 110.0;
  double congruency_sd_ms = 85.0;
  // base error rate ~ Beta(a, b)
  double error_beta_a = 1.3;
  double error_beta_b = 19.6;
  double practice_slowdown_mean_ms = 120.0;
  double practice_slowdown_sd_ms = 100.0;
  // share of the practice slowdown still present on attempt 2
  double practice_retention_mean = 0.5;
  double practice_retention_sd = 0.2;
  double switch_cost_mean_ms = 170.0;
  double switch_cost_sd_ms = 60.0;
  // second-attempt drift
  double fatigue_mean_ms = 40.0;
  double fatigue_sd_ms = 60.0;
  double familiarity_mean = 0.04;
  double familiarity_sd = 0.03;
  double fatigue_error_mean = 0.015;
  double fatigue_error_sd = 0.02;
  // premature key presses ~ Beta(a, b)
  double anticipation_beta_a = 1.0;
  double anticipation_beta_b = 80.0;
  // fraction of targeted trials on which the strategy is carried out ~ Beta(a, b)
  double adherence_beta_a = 12.0;
  double adherence_beta_b = 12.0;
};

inline nlohmann::ordered_json calibration_to_json(const Calibration& c) {
  return {{"log_mu_mean", c.log_mu_mean},
          {"log_mu_sd", c.log_mu_sd},
          {"log_sigma_mean", c.log_sigma_mean},
          {"log_sigma_sd", c.log_sigma_sd},
          {"congruency_mean_ms", c.congruency_mean_ms},
          {"congruency_sd_ms", c.congruency_sd_ms},
          {"error_beta_a", c.error_beta_a},
          {"error_beta_b", c.error_beta_b},
          {"practice_slowdown_mean_ms", c.practice_slowdown_mean_ms},
          {"practice_slowdown_sd_ms", c.practice_slowdown_sd_ms},
          {"practice_retention_mean", c.practice_retention_mean},
          {"practice_retention_sd", c.practice_retention_sd},
          {"switch_cost_mean_ms", c.switch_cost_mean_ms},
          {"switch_cost_sd_ms", c.switch_cost_sd_ms},
          {"fatigue_mean_ms", c.fatigue_mean_ms},
          {"fatigue_sd_ms", c.fatigue_sd_ms},
          {"familiarity_mean", c.familiarity_mean},
          {"familiarity_sd", c.familiarity_sd},
          {"fatigue_error_mean", c.fatigue_error_mean},
          {"fatigue_error_sd", c.fatigue_error_sd},
          {"anticipation_beta_a", c.anticipation_beta_a},
          {"anticipation_beta_b", c.anticipation_beta_b},
          {"adherence_beta_a", c.adherence_beta_a},
          {"adherence_beta_b", c.adherence_beta_b}};
}

inline nlohmann::ordered_json mode_mix_to_json(const ModeMix& m) {
  return {{"correct", m.correct},
          {"none", m.none},
          {"practice_misapplied", m.practice_misapplied},
          {"wrong_critical", m.wrong_critical}};
}

}  // namespace iat
