#pragma once

// Canonical JSON session format and the JSON Lines cohort archive.

#include <iat/errors.hpp>
#include <iat/session.hpp>

#include <json.hpp>

#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace iat {

using ojson = nlohmann::ordered_json;

inline ojson session_to_json(const Session& s) {
  ojson j;
  j["session_id"] = s.session_id;
  j["participant_id"] = s.participant_id;
  j["attempt"] = s.attempt;
  j["strategy_id"] = s.strategy_id;
  j["created_at"] = s.created_at;
  ojson blocks = ojson::array();
  for (const auto& b : s.blocks) {
    ojson jb;
    jb["index"] = b.spec.index;
    jb["role"] = to_string(b.spec.role);
    ojson left = ojson::array(), right = ojson::array();
    for (auto c : b.spec.left) left.push_back(to_string(c));
    for (auto c : b.spec.right) right.push_back(to_string(c));
    jb["left"] = std::move(left);
    jb["right"] = std::move(right);
    ojson trials = ojson::array();
    for (const auto& t : b.trials) {
      trials.push_back(ojson{{"item", t.item},
                             {"category", to_string(t.category)},
                             {"correct_side", to_string(t.correct_side)},
                             {"key", to_string(t.key)},
                             {"latency_ms", t.latency_ms},
                             {"correct", t.correct}});
    }
    jb["trials"] = std::move(trials);
    blocks.push_back(std::move(jb));
  }
  j["blocks"] = std::move(blocks);
  return j;
}

namespace detail {

template <class Json>
const Json& require(const Json& obj, const std::string& key,
                    const std::string& path) {
  if (!obj.is_object()) throw ParseError(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end())
    throw ParseError(path.empty() ? key : path + "." + key, "missing field");
  return *it;
}

template <class Json>
std::string get_string(const Json& obj, const std::string& key,
                       const std::string& path) {
  const auto& v = require(obj, key, path);
  if (!v.is_string())
    throw ParseError(path.empty() ? key : path + "." + key, "expected a string");
  return v.template get<std::string>();
}

template <class Json>
int get_int(const Json& obj, const std::string& key, const std::string& path) {
  const auto& v = require(obj, key, path);
  if (!v.is_number_integer())
    throw ParseError(path.empty() ? key : path + "." + key,
                     "expected an integer");
  return v.template get<int>();
}

template <class Json>
std::vector<Category> get_categories(const Json& obj, const std::string& key,
                                     const std::string& path) {
  const auto& v = require(obj, key, path);
  const auto p = path + "." + key;
  if (!v.is_array()) throw ParseError(p, "expected an array");
  std::vector<Category> out;
  for (const auto& e : v) {
    if (!e.is_string()) throw ParseError(p, "expected category names");
    auto c = category_from_string(e.template get<std::string>());
    if (!c) throw ParseError(p, "unknown category '" + e.template get<std::string>() + "'");
    out.push_back(*c);
  }
  return out;
}

template <class Json>
Side get_side(const Json& obj, const std::string& key, const std::string& path) {
  auto s = get_string(obj, key, path);
  auto side = side_from_string(s);
  if (!side) throw ParseError(path + "." + key, "expected \"left\" or \"right\"");
  return *side;
}

}  // namespace detail

/// Decode a session from parsed JSON without validating invariants.
template <class Json>
Session session_from_json_unchecked(const Json& j) {
  using namespace detail;
  Session s;
  s.session_id = get_string(j, "session_id", "");
  s.participant_id = get_string(j, "participant_id", "");
  s.attempt = get_int(j, "attempt", "");
  s.strategy_id = get_int(j, "strategy_id", "");
  s.created_at = get_string(j, "created_at", "");
  const auto& blocks = require(j, "blocks", "");
  if (!blocks.is_array()) throw ParseError("blocks", "expected an array");
  const auto& layout = standard_block_layout();
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const auto path = "blocks[" + std::to_string(i) + "]";
    const auto& jb = blocks[i];
    Block b;
    b.spec.index = get_int(jb, "index", path);
    auto role = role_from_string(get_string(jb, "role", path));
    if (!role) throw ParseError(path + ".role", "expected practice|critical");
    b.spec.role = *role;
    b.spec.left = get_categories(jb, "left", path);
    b.spec.right = get_categories(jb, "right", path);
    const auto& trials = require(jb, "trials", path);
    if (!trials.is_array()) throw ParseError(path + ".trials", "expected an array");
    for (std::size_t t = 0; t < trials.size(); ++t) {
      const auto tp = path + ".trials[" + std::to_string(t) + "]";
      const auto& jt = trials[t];
      Trial tr;
      tr.item = get_string(jt, "item", tp);
      auto cat = category_from_string(get_string(jt, "category", tp));
      if (!cat) throw ParseError(tp + ".category", "unknown category");
      tr.category = *cat;
      tr.correct_side = get_side(jt, "correct_side", tp);
      tr.key = get_side(jt, "key", tp);
      const auto& lat = require(jt, "latency_ms", tp);
      if (!lat.is_number()) throw ParseError(tp + ".latency_ms", "expected a number");
      tr.latency_ms = lat.template get<double>();
      const auto& ok = require(jt, "correct", tp);
      if (!ok.is_boolean()) throw ParseError(tp + ".correct", "expected a boolean");
      tr.correct = ok.template get<bool>();
      b.trials.push_back(std::move(tr));
    }
    b.spec.trial_count =
        (b.spec.index >= 1 && b.spec.index <= kBlockCount)
            ? layout[b.spec.index - 1].trial_count
            : static_cast<int>(b.trials.size());
    s.blocks.push_back(std::move(b));
  }
  return s;
}

/// Decode and validate; throws ParseError or ValidationError.
template <class Json>
Session session_from_json(const Json& j) {
  Session s = session_from_json_unchecked(j);
  if (auto v = validate_session(s); !v.empty()) throw ValidationError(std::move(v));
  return s;
}

inline std::string write_session(const Session& s) {
  return session_to_json(s).dump();
}

inline Session read_session(std::string_view bytes) {
  ojson j;
  try {
    j = ojson::parse(bytes.begin(), bytes.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("<document>", e.what());
  }
  return session_from_json(j);
}

/// One session per line.
inline void write_archive(std::ostream& os, const std::vector<Session>& sessions) {
  for (const auto& s : sessions) os << write_session(s) << '\n';
}

inline std::vector<Session> read_archive(std::istream& is) {
  std::vector<Session> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(read_session(line));
    } catch (const ParseError& e) {
      throw ParseError("line " + std::to_string(lineno) + ": " + e.field(),
                       e.what());
    }
  }
  return out;
}

/// Flattens a cohort to first/second order per pair, followed by extras.
inline std::vector<Session> cohort_sessions(
    const Cohort& c, const std::vector<Session>& extra_firsts = {}) {
  std::vector<Session> out;
  out.reserve(c.pairs.size() * 2 + extra_firsts.size());
  for (const auto& p : c.pairs) {
    out.push_back(p.first);
    out.push_back(p.second);
  }
  out.insert(out.end(), extra_firsts.begin(), extra_firsts.end());
  return out;
}

struct GroupedSessions {
  Cohort cohort;
  std::vector<Session> extra_firsts;
  std::vector<Session> orphan_seconds;
};

/// Pairs sessions by participant_id. Attempt-1 sessions without a partner are
/// returned as extra first attempts; pair order follows first appearance.
inline GroupedSessions group_sessions(const std::vector<Session>& sessions) {
  std::vector<std::string> order;
  std::map<std::string, const Session*> firsts, seconds;
  for (const auto& s : sessions) {
    auto& slot = s.attempt == 1 ? firsts : seconds;
    if (!firsts.count(s.participant_id) && !seconds.count(s.participant_id))
      order.push_back(s.participant_id);
    if (slot.count(s.participant_id))
      throw ValidationError({"participant " + s.participant_id +
                             " has more than one attempt " +
                             std::to_string(s.attempt)});
    slot[s.participant_id] = &s;
  }
  GroupedSessions g;
  for (const auto& pid : order) {
    auto f = firsts.find(pid);
    auto sc = seconds.find(pid);
    if (f != firsts.end() && sc != seconds.end())
      g.cohort.pairs.push_back({*f->second, *sc->second});
    else if (f != firsts.end())
      g.extra_firsts.push_back(*f->second);
    else
      g.orphan_seconds.push_back(*sc->second);
  }
  return g;
}

}  // namespace iat
