#pragma once

// Improved-algorithm D-score with the block-mean + 600 ms error penalty.

#include <iat/errors.hpp>
#include <iat/session.hpp>
#include <iat/stats.hpp>

#include <json.hpp>

#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace iat {

inline constexpr double kLongTrialMs = 10000.0;
inline constexpr double kFastTrialMs = 300.0;
inline constexpr double kFastResponderFraction = 0.10;
inline constexpr double kErrorPenaltyMs = 600.0;

enum class ScoreFlag { FastResponder, LongTrialsDropped };

inline constexpr std::string_view to_string(ScoreFlag f) {
  return f == ScoreFlag::FastResponder ? "fast_responder" : "long_trials_dropped";
}

struct ScoreResult {
  double d_score = 0.0;
  double d_practice_pair = 0.0;  // B3 vs B6
  double d_test_pair = 0.0;      // B4 vs B7
  std::set<ScoreFlag> flags;
  double mean_rt_s = 0.0;
  double error_rate = 0.0;

  bool has(ScoreFlag f) const { return flags.count(f) != 0; }
};

struct CleanedSession {
  Session session;
  std::set<ScoreFlag> flags;
};

/// Drops trials over 10 s and flags fast responders. Never drops a trial for
/// being fast.
inline CleanedSession clean_trials(const Session& s) {
  CleanedSession out{s, {}};
  std::size_t critical = 0, fast = 0;
  for (auto& b : out.session.blocks) {
    const auto before = b.trials.size();
    std::erase_if(b.trials,
                  [](const Trial& t) { return t.latency_ms > kLongTrialMs; });
    if (b.trials.size() != before) out.flags.insert(ScoreFlag::LongTrialsDropped);
    if (b.spec.role != BlockRole::Critical) continue;
    critical += b.trials.size();
    for (const auto& t : b.trials)
      if (t.latency_ms < kFastTrialMs) ++fast;
    std::size_t correct = 0;
    for (const auto& t : b.trials) correct += t.correct ? 1 : 0;
    if (correct < 2)
      throw UnscorableError("block " + std::to_string(b.spec.index) +
                            " has fewer than 2 correct trials after cleaning");
  }
  if (critical > 0 && static_cast<double>(fast) >
                          kFastResponderFraction * static_cast<double>(critical))
    out.flags.insert(ScoreFlag::FastResponder);
  return out;
}

namespace detail {

/// Latencies of one block with errors replaced by mean(correct) + 600 ms.
inline std::vector<double> penalized_latencies(const Block& b) {
  std::vector<double> correct;
  for (const auto& t : b.trials)
    if (t.correct) correct.push_back(t.latency_ms);
  const double penalty = stats::mean(correct) + kErrorPenaltyMs;
  std::vector<double> out;
  out.reserve(b.trials.size());
  for (const auto& t : b.trials) out.push_back(t.correct ? t.latency_ms : penalty);
  return out;
}

inline double pair_score(const Block& congruent_cs_male,
                         const Block& cs_female) {
  const auto a = penalized_latencies(congruent_cs_male);
  const auto b = penalized_latencies(cs_female);
  std::vector<double> pooled(a);
  pooled.insert(pooled.end(), b.begin(), b.end());
  const double sd = stats::sample_sd(pooled);
  if (!(sd > 0.0))
    throw UnscorableError("zero pooled SD in blocks " +
                          std::to_string(congruent_cs_male.spec.index) + "/" +
                          std::to_string(cs_female.spec.index));
  return (stats::mean(b) - stats::mean(a)) / sd;
}

}  // namespace detail

/// Positive scores mean faster responses when ComputerScience and Male share
/// a side.
inline ScoreResult d_score(const Session& s) {
  const auto cleaned = clean_trials(s);
  const auto& cs = cleaned.session;
  ScoreResult r;
  r.flags = cleaned.flags;
  r.d_practice_pair = detail::pair_score(cs.block(3), cs.block(6));
  r.d_test_pair = detail::pair_score(cs.block(4), cs.block(7));
  r.d_score = (r.d_practice_pair + r.d_test_pair) / 2.0;

  double sum = 0.0;
  std::size_t n = 0, errors = 0;
  for (const auto& b : cs.blocks) {
    if (b.spec.role != BlockRole::Critical) continue;
    for (const auto& t : b.trials) {
      sum += t.latency_ms;
      errors += t.correct ? 0 : 1;
      ++n;
    }
  }
  r.mean_rt_s = sum / static_cast<double>(n) / 1000.0;
  r.error_rate = static_cast<double>(errors) / static_cast<double>(n);
  return r;
}

enum class Association { CsMale, CsFemale, Neutral };

inline constexpr std::string_view to_string(Association a) {
  switch (a) {
    case Association::CsMale: return "CS-Male";
    case Association::CsFemale: return "CS-Female";
    case Association::Neutral: return "neutral";
  }
  return "";
}

inline Association association_label(const ScoreResult& r) {
  if (r.d_score > 0.0) return Association::CsMale;
  if (r.d_score < 0.0) return Association::CsFemale;
  return Association::Neutral;
}

/// The `score` wire object: {session_id, d_score, subscores, flags,
/// mean_rt_s, error_rate}.
inline nlohmann::ordered_json score_to_json(const std::string& session_id,
                                            const ScoreResult& r) {
  nlohmann::ordered_json flags = nlohmann::ordered_json::array();
  for (auto f : r.flags) flags.push_back(to_string(f));
  return {{"session_id", session_id},
          {"d_score", r.d_score},
          {"subscores",
           {{"d_practice_pair", r.d_practice_pair},
            {"d_test_pair", r.d_test_pair}}},
          {"flags", flags},
          {"mean_rt_s", r.mean_rt_s},
          {"error_rate", r.error_rate}};
}

}  // namespace iat
