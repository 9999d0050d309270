#pragma once

// IAT structure: categories, stimuli, block layout, trials and sessions.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <regex>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace iat {

enum class Category { ComputerScience, Biology, Male, Female };
enum class CategoryKind { Concept, Attribute };
enum class Side { Left, Right };
enum class BlockRole { Practice, Critical };

inline constexpr std::array<Category, 4> kAllCategories = {
    Category::ComputerScience, Category::Biology, Category::Male,
    Category::Female};

inline constexpr CategoryKind kind_of(Category c) {
  return (c == Category::ComputerScience || c == Category::Biology)
             ? CategoryKind::Concept
             : CategoryKind::Attribute;
}

inline constexpr std::string_view to_string(Category c) {
  switch (c) {
    case Category::ComputerScience: return "ComputerScience";
    case Category::Biology: return "Biology";
    case Category::Male: return "Male";
    case Category::Female: return "Female";
  }
  return "";
}

inline std::optional<Category> category_from_string(std::string_view s) {
  for (auto c : kAllCategories)
    if (to_string(c) == s) return c;
  return std::nullopt;
}

inline constexpr std::string_view to_string(Side s) {
  return s == Side::Left ? "left" : "right";
}

inline std::optional<Side> side_from_string(std::string_view s) {
  if (s == "left") return Side::Left;
  if (s == "right") return Side::Right;
  return std::nullopt;
}

inline constexpr Side opposite(Side s) {
  return s == Side::Left ? Side::Right : Side::Left;
}

inline constexpr std::string_view to_string(BlockRole r) {
  return r == BlockRole::Practice ? "practice" : "critical";
}

inline std::optional<BlockRole> role_from_string(std::string_view s) {
  if (s == "practice") return BlockRole::Practice;
  if (s == "critical") return BlockRole::Critical;
  return std::nullopt;
}

struct StimulusItem {
  std::string_view text;
  Category category;
};

inline constexpr std::size_t kItemsPerCategory = 8;

/// The 32 stimulus words, eight per category.
inline const std::array<StimulusItem, 32>& stimulus_items() {
  static const std::array<StimulusItem, 32> items = {{
      {"Apps", Category::ComputerScience},
      {"Computer", Category::ComputerScience},
      {"Algorithm", Category::ComputerScience},
      {"Database", Category::ComputerScience},
      {"Internet", Category::ComputerScience},
      {"Programming", Category::ComputerScience},
      {"Software", Category::ComputerScience},
      {"Technology", Category::ComputerScience},
      {"Nature", Category::Biology},
      {"Life", Category::Biology},
      {"Photosynthesis", Category::Biology},
      {"Habitat", Category::Biology},
      {"Organs", Category::Biology},
      {"Plants", Category::Biology},
      {"Species", Category::Biology},
      {"Protein", Category::Biology},
      {"James", Category::Male},
      {"John", Category::Male},
      {"Robert", Category::Male},
      {"Michael", Category::Male},
      {"William", Category::Male},
      {"David", Category::Male},
      {"Richard", Category::Male},
      {"Joseph", Category::Male},
      {"Mary", Category::Female},
      {"Patricia", Category::Female},
      {"Jennifer", Category::Female},
      {"Elizabeth", Category::Female},
      {"Linda", Category::Female},
      {"Barbara", Category::Female},
      {"Susan", Category::Female},
      {"Margaret", Category::Female},
  }};
  return items;
}

inline std::optional<StimulusItem> find_item(std::string_view text) {
  for (const auto& it : stimulus_items())
    if (it.text == text) return it;
  return std::nullopt;
}

struct BlockSpec {
  int index = 0;
  BlockRole role = BlockRole::Practice;
  std::vector<Category> left;
  std::vector<Category> right;
  int trial_count = 0;

  bool contains(Side side, Category c) const {
    const auto& cats = side == Side::Left ? left : right;
    return std::find(cats.begin(), cats.end(), c) != cats.end();
  }

  /// Side holding the category, if either does.
  std::optional<Side> side_of(Category c) const {
    if (contains(Side::Left, c)) return Side::Left;
    if (contains(Side::Right, c)) return Side::Right;
    return std::nullopt;
  }

  friend bool operator==(const BlockSpec&, const BlockSpec&) = default;
};

inline constexpr int kBlockCount = 7;
inline constexpr int kTotalTrials = 200;

/// The fixed seven-block layout. Blocks 3/4 pair ComputerScience with Male,
/// blocks 6/7 pair ComputerScience with Female.
inline const std::vector<BlockSpec>& standard_block_layout() {
  using C = Category;
  using R = BlockRole;
  static const std::vector<BlockSpec> layout = {
      {1, R::Practice, {C::Male}, {C::Female}, 20},
      {2, R::Practice, {C::ComputerScience}, {C::Biology}, 20},
      {3, R::Critical, {C::ComputerScience, C::Male}, {C::Biology, C::Female}, 20},
      {4, R::Critical, {C::ComputerScience, C::Male}, {C::Biology, C::Female}, 40},
      {5, R::Practice, {C::Biology}, {C::ComputerScience}, 40},
      {6, R::Critical, {C::Biology, C::Male}, {C::ComputerScience, C::Female}, 20},
      {7, R::Critical, {C::Biology, C::Male}, {C::ComputerScience, C::Female}, 40},
  };
  return layout;
}

/// Critical blocks where ComputerScience shares a side with Male.
inline constexpr std::array<int, 2> kCsMaleBlocks = {3, 4};
/// Critical blocks where ComputerScience shares a side with Female.
inline constexpr std::array<int, 2> kCsFemaleBlocks = {6, 7};
inline constexpr std::array<int, 3> kPracticeBlocks = {1, 2, 5};

struct Trial {
  std::string item;
  Category category = Category::ComputerScience;
  Side correct_side = Side::Left;
  Side key = Side::Left;
  double latency_ms = 0.0;
  bool correct = true;

  friend bool operator==(const Trial&, const Trial&) = default;
};

struct Block {
  BlockSpec spec;
  std::vector<Trial> trials;

  friend bool operator==(const Block&, const Block&) = default;
};

struct Session {
  std::string session_id;
  std::string participant_id;
  int attempt = 1;
  int strategy_id = 0;
  std::string created_at;
  std::vector<Block> blocks;

  /// Block with the given 1-based index; throws std::out_of_range.
  const Block& block(int index) const {
    for (const auto& b : blocks)
      if (b.spec.index == index) return b;
    throw std::out_of_range("session has no block " + std::to_string(index));
  }
  Block& block(int index) {
    return const_cast<Block&>(std::as_const(*this).block(index));
  }

  friend bool operator==(const Session&, const Session&) = default;
};

struct SessionPair {
  Session first;
  Session second;
};

struct Cohort {
  std::vector<SessionPair> pairs;
};

namespace detail {

inline bool is_iso8601_utc(const std::string& s) {
  static const std::regex re(
      R"(^\d{4}-\d{2}-\d{2}T\d{2}:\d{2}:\d{2}(\.\d+)?(Z|[+-]\d{2}:\d{2})$)");
  return std::regex_match(s, re);
}

inline std::string where(int block, std::optional<std::size_t> trial = {}) {
  std::string w = "block " + std::to_string(block);
  if (trial) w += " trial " + std::to_string(*trial + 1);
  return w;
}

}  // namespace detail

/// All broken session invariants, each naming the block/trial and the rule.
/// An empty result means the session is well formed.
inline std::vector<std::string> validate_session(const Session& s) {
  std::vector<std::string> out;
  auto violation = [&](std::string w, std::string rule) {
    out.push_back(std::move(w) + ": " + std::move(rule));
  };

  if (s.session_id.empty()) violation("session", "session_id must be nonempty");
  if (s.participant_id.empty())
    violation("session", "participant_id must be nonempty");
  if (s.attempt != 1 && s.attempt != 2)
    violation("session", "attempt must be 1 or 2, got " +
                             std::to_string(s.attempt));
  if (s.strategy_id < 0 || s.strategy_id > 5)
    violation("session", "strategy_id must be in 0..5, got " +
                             std::to_string(s.strategy_id));
  if (s.attempt == 1 && s.strategy_id != 0)
    violation("session", "attempt 1 requires strategy_id 0");
  if (!detail::is_iso8601_utc(s.created_at))
    violation("session", "created_at must be an ISO-8601 timestamp");

  const auto& layout = standard_block_layout();
  if (s.blocks.size() != layout.size()) {
    violation("session", "expected 7 blocks, got " +
                             std::to_string(s.blocks.size()));
    std::set<int> seen;
    for (const auto& b : s.blocks) seen.insert(b.spec.index);
    for (const auto& spec : layout)
      if (!seen.count(spec.index))
        violation(detail::where(spec.index), "block missing");
  }

  std::size_t total = 0;
  for (std::size_t pos = 0; pos < s.blocks.size(); ++pos) {
    const auto& b = s.blocks[pos];
    const int idx = b.spec.index;
    total += b.trials.size();
    if (idx != static_cast<int>(pos) + 1) {
      violation(detail::where(idx), "block at position " +
                                        std::to_string(pos + 1) +
                                        " has out-of-order index");
    }
    if (idx < 1 || idx > kBlockCount) {
      violation(detail::where(idx), "block index outside 1..7");
      continue;
    }
    const auto& want = layout[idx - 1];
    if (b.spec.role != want.role)
      violation(detail::where(idx), "role must be " +
                                        std::string(to_string(want.role)));
    if (b.spec.left != want.left || b.spec.right != want.right)
      violation(detail::where(idx),
                "left/right categories differ from the standard layout");
    if (static_cast<int>(b.trials.size()) != want.trial_count)
      violation(detail::where(idx),
                "expected " + std::to_string(want.trial_count) +
                    " trials, got " + std::to_string(b.trials.size()));

    for (std::size_t t = 0; t < b.trials.size(); ++t) {
      const auto& tr = b.trials[t];
      const auto w = detail::where(idx, t);
      const auto item = find_item(tr.item);
      if (!item) {
        violation(w, "unknown stimulus item '" + tr.item + "'");
      } else if (item->category != tr.category) {
        violation(w, "item '" + tr.item + "' belongs to " +
                         std::string(to_string(item->category)));
      }
      const auto side = want.side_of(tr.category);
      if (!side) {
        violation(w, "category " + std::string(to_string(tr.category)) +
                         " is not shown in this block");
      } else if (*side != tr.correct_side) {
        violation(w, "correct_side does not hold the item's category");
      }
      if (!(tr.latency_ms > 0.0) || !std::isfinite(tr.latency_ms))
        violation(w, "latency_ms must be positive and finite");
      if ((tr.key == tr.correct_side) != tr.correct)
        violation(w, "correct flag disagrees with key and correct_side");
    }
  }
  if (s.blocks.size() == layout.size() && total != kTotalTrials)
    violation("session", "expected 200 trials in total, got " +
                             std::to_string(total));
  return out;
}

/// Cohort invariants: attempt numbers within pairs and unique participants.
inline std::vector<std::string> validate_cohort(const Cohort& c) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (std::size_t i = 0; i < c.pairs.size(); ++i) {
    const auto& p = c.pairs[i];
    const auto w = "pair " + std::to_string(i) + ": ";
    if (p.first.attempt != 1) out.push_back(w + "first session is not attempt 1");
    if (p.second.attempt != 2)
      out.push_back(w + "second session is not attempt 2");
    if (p.first.participant_id != p.second.participant_id)
      out.push_back(w + "participant ids differ within pair");
    if (!seen.insert(p.first.participant_id).second)
      out.push_back(w + "duplicate participant " + p.first.participant_id);
  }
  return out;
}

}  // namespace iat
