#pragma once

// Append-only JSON Lines session store with an in-memory id index.

#include <iat/errors.hpp>
#include <iat/session.hpp>
#include <iat/session_io.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace iat {

enum class RecordSource { Ui, Simulator, Import };

inline constexpr std::string_view to_string(RecordSource s) {
  switch (s) {
    case RecordSource::Ui: return "ui";
    case RecordSource::Simulator: return "simulator";
    case RecordSource::Import: return "import";
  }
  return "";
}

inline std::optional<RecordSource> source_from_string(std::string_view s) {
  for (auto v : {RecordSource::Ui, RecordSource::Simulator, RecordSource::Import})
    if (to_string(v) == s) return v;
  return std::nullopt;
}

struct StoreRecord {
  Session session;
  std::string received_at;
  RecordSource source = RecordSource::Ui;
};

inline std::string utc_now_iso8601() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

class SessionStore {
 public:
  /// Opens (creating if needed) the store file and indexes existing records.
  explicit SessionStore(std::filesystem::path path) : path_(std::move(path)) {
    if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
    std::ifstream in(path_);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      try {
        const auto j = ojson::parse(line);
        StoreRecord r;
        r.received_at = j.at("received_at").get<std::string>();
        auto src = source_from_string(j.at("source").get<std::string>());
        r.source = src.value_or(RecordSource::Import);
        r.session = session_from_json(j.at("session"));
        index_.emplace(r.session.session_id, records_.size());
        records_.push_back(std::move(r));
      } catch (const std::exception& e) {
        throw ParseError(path_.string() + ":" + std::to_string(lineno), e.what());
      }
    }
    std::ofstream touch(path_, std::ios::app);
    if (!touch) throw Error("store path is not writable: " + path_.string());
  }

  SessionStore(const SessionStore&) = delete;
  SessionStore& operator=(const SessionStore&) = delete;

  /// Appends unless the session id is already stored; returns false then.
  bool append(const Session& s, RecordSource source,
              std::string received_at = utc_now_iso8601()) {
    std::lock_guard lock(mu_);
    if (index_.count(s.session_id)) return false;
    ojson line{{"received_at", received_at},
               {"source", to_string(source)},
               {"session", session_to_json(s)}};
    std::ofstream out(path_, std::ios::app);
    out << line.dump() << '\n';
    out.flush();
    if (!out) throw Error("failed to append to " + path_.string());
    index_.emplace(s.session_id, records_.size());
    records_.push_back({s, std::move(received_at), source});
    return true;
  }

  std::optional<StoreRecord> find(const std::string& session_id) const {
    std::lock_guard lock(mu_);
    auto it = index_.find(session_id);
    if (it == index_.end()) return std::nullopt;
    return records_[it->second];
  }

  std::vector<StoreRecord> list() const {
    std::lock_guard lock(mu_);
    return records_;
  }

  std::size_t size() const {
    std::lock_guard lock(mu_);
    return records_.size();
  }

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  mutable std::mutex mu_;
  std::vector<StoreRecord> records_;
  std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace iat
