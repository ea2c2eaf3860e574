#pragma once

#include <condition_variable>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "xaip/service/session.hpp"

namespace xaip::service {

using Clock = std::function<Millis()>;

/// Wall-clock milliseconds since the epoch.
Millis system_clock_ms();

/// Append-only journal file. Each append writes whole lines and fsyncs.
class JournalWriter {
 public:
  explicit JournalWriter(const std::filesystem::path& path);
  ~JournalWriter();
  JournalWriter(const JournalWriter&) = delete;
  JournalWriter& operator=(const JournalWriter&) = delete;

  void append(const std::vector<std::string>& lines);

 private:
  int fd_ = -1;
  std::filesystem::path path_;
};

/// Complete lines of a journal file. A trailing line without a newline (an
/// interrupted write) is dropped.
std::vector<std::string> read_journal(const std::filesystem::path& path);

/// Owns every live session. Commands to one session are serialized by that
/// session's mutex; different sessions proceed in parallel.
class SessionManager {
 public:
  SessionManager(std::shared_ptr<const SessionEnvironment> env, xai::XaiMode default_mode,
                 std::filesystem::path journal_dir = {}, Clock clock = system_clock_ms);

  /// Returns the new session's id. A random opaque id is generated when
  /// `id` is empty. Throws ProtocolError(InvalidPayload) for a taken id.
  std::string create(std::optional<xai::XaiMode> mode = std::nullopt, std::string id = {});

  nlohmann::ordered_json command(const std::string& id, const nlohmann::json& command);
  nlohmann::ordered_json state(const std::string& id) const;
  nlohmann::ordered_json quiz_sheet(const std::string& id) const;
  nlohmann::ordered_json report(const std::string& id) const;
  std::vector<std::string> journal(const std::string& id) const;

  /// Applies an auto-Skip to every session whose step deadline has passed.
  /// Returns the number of skips applied.
  std::size_t tick();

  /// Blocks until the session's state changes past `seen` or `timeout`
  /// elapses. Returns the new version and state update, or nullopt on
  /// timeout.
  std::optional<std::pair<std::uint64_t, nlohmann::ordered_json>> wait_update(const std::string& id,
                                                                               std::uint64_t seen,
                                                                               std::chrono::milliseconds timeout) const;
  std::uint64_t version(const std::string& id) const;

  /// Rebuilds sessions from the journal directory. Returns how many.
  std::size_t recover();

  std::vector<std::string> ids() const;
  Millis now() const { return clock_(); }

 private:
  struct Entry {
    explicit Entry(Session s) : session(std::move(s)) {}
    mutable std::mutex mutex;
    mutable std::condition_variable changed;
    Session session;
    std::uint64_t version = 0;
    std::unique_ptr<JournalWriter> writer;
  };

  std::shared_ptr<Entry> find(const std::string& id) const;
  void persist(Entry& entry);

  std::shared_ptr<const SessionEnvironment> env_;
  xai::XaiMode default_mode_;
  std::filesystem::path journal_dir_;
  Clock clock_;
  mutable std::shared_mutex map_mutex_;
  std::map<std::string, std::shared_ptr<Entry>> sessions_;
};

}  // namespace xaip::service
