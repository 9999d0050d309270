#pragma once

// Second-attempt instructions for the five deception strategies.

#include <iat/errors.hpp>

#include <array>
#include <string>
#include <string_view>
#include <vector>

namespace iat {

struct StrategyInstruction {
  int strategy_id = 0;
  std::string title;
  std::string instruction;
  std::string target_pairing;  // pairing whose blocks the strategy is used in
  std::vector<int> target_blocks;
};

inline constexpr std::array<std::string_view, 5> kStrategyTitles = {
    "Make about 10 errors intentionally",
    "Say \"one Mississippi\" before pressing the appropriate key",
    "Put your hands in your lap between keypresses",
    "Cross your hands on the keyboard",
    "Touch your nose before pressing the appropriate key"};

/// Instruction text for a strategy, aimed at the pairing that matches the sign
/// of the first score. A zero score gets the positive-direction wording.
inline StrategyInstruction strategy_instruction(int strategy_id, double first_score) {
  if (strategy_id < 1 || strategy_id > 5) throw DataError("strategy_id must be in 1..5");
  const bool cs_male = first_score >= 0.0;
  StrategyInstruction s;
  s.strategy_id = strategy_id;
  s.title = std::string(kStrategyTitles[static_cast<std::size_t>(strategy_id - 1)]);
  s.target_pairing = cs_male ? "ComputerScience+Male" : "ComputerScience+Female";
  s.target_blocks = cs_male ? std::vector<int>{3, 4} : std::vector<int>{6, 7};
  const std::string when =
      cs_male ? "Computer Science and Male share a side (and Biology and Female share the other)"
              : "Computer Science and Female share a side (and Biology and Male share the other)";
  const std::string goal =
      cs_male ? "Your first score associated Computer Science with Male. "
              : "Your first score associated Computer Science with Female. ";
  static constexpr std::array<std::string_view, 5> actions = {
      "make about 10 errors on purpose by pressing the wrong key",
      "silently say \"one Mississippi\" before pressing the correct key",
      "put your hands in your lap after every keypress before reaching for the next key",
      "cross your hands on the keyboard so your left hand presses the right key and your "
      "right hand presses the left key",
      "touch your nose before pressing the correct key"};
  s.instruction = goal + "On your second attempt, only during the blocks where " + when +
                  ", " + std::string(actions[static_cast<std::size_t>(strategy_id - 1)]) +
                  ". Respond normally in every other block.";
  return s;
}

}  // namespace iat
