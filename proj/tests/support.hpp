#pragma once

#include <iat/iat.hpp>

#include <functional>
#include <string>
#include <vector>

namespace iat::testing {

/// Items of a block's categories, cycled in table order.
inline std::vector<StimulusItem> block_items(const BlockSpec& spec) {
  std::vector<StimulusItem> pool;
  for (const auto& it : stimulus_items())
    if (spec.side_of(it.category)) pool.push_back(it);
  std::vector<StimulusItem> out;
  for (int i = 0; i < spec.trial_count; ++i)
    out.push_back(pool[static_cast<std::size_t>(i) % pool.size()]);
  return out;
}

using LatencyFn = std::function<double(int block, std::size_t trial)>;
using CorrectFn = std::function<bool(int block, std::size_t trial)>;

/// A valid all-correct session whose latencies come from `lat`.
inline Session make_session(const LatencyFn& lat, const CorrectFn& correct = {},
                            std::string id = "S1", int attempt = 1) {
  Session s;
  s.session_id = std::move(id);
  s.participant_id = "P1";
  s.attempt = attempt;
  s.strategy_id = attempt == 1 ? 0 : 2;
  s.created_at = "2016-06-01T12:00:00Z";
  for (const auto& spec : standard_block_layout()) {
    Block b{spec, {}};
    const auto items = block_items(spec);
    for (std::size_t i = 0; i < items.size(); ++i) {
      Trial t;
      t.item = std::string(items[i].text);
      t.category = items[i].category;
      t.correct_side = *spec.side_of(t.category);
      t.correct = correct ? correct(spec.index, i) : true;
      t.key = t.correct ? t.correct_side : opposite(t.correct_side);
      t.latency_ms = lat(spec.index, i);
      b.trials.push_back(t);
    }
    s.blocks.push_back(std::move(b));
  }
  return s;
}

/// Deterministic, varied, error-free latencies inside [400, 1500] ms.
inline double wavy(int block, std::size_t i) {
  return 600.0 + 40.0 * block + 97.0 * static_cast<double>((i * 7 + block * 3) % 11);
}

inline Session simulated_session(std::uint64_t seed, int attempt = 1) {
  auto profile = draw_profile(Calibration{}, seed, 0);
  if (attempt == 1) return simulate_attempt(profile, 1);
  return simulate_attempt(profile, 2, make_plan(2, ComplianceMode::Correct));
}

}  // namespace iat::testing
