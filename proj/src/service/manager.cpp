#include "xaip/service/manager.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <chrono>
#include <cstring>
#include <fstream>
#include <random>

#include <fmt/format.h>

namespace xaip::service {

namespace fs = std::filesystem;

Millis system_clock_ms() {
  using namespace std::chrono;
  return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

JournalWriter::JournalWriter(const fs::path& path) : path_(path) {
  fd_ = ::open(path.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (fd_ < 0) throw std::runtime_error(fmt::format("cannot open journal {}: {}", path.string(), std::strerror(errno)));
}

JournalWriter::~JournalWriter() {
  if (fd_ >= 0) ::close(fd_);
}

void JournalWriter::append(const std::vector<std::string>& lines) {
  if (lines.empty()) return;
  std::string buf;
  for (const auto& l : lines) {
    buf += l;
    buf += '\n';
  }
  const char* p = buf.data();
  std::size_t left = buf.size();
  while (left > 0) {
    const ssize_t n = ::write(fd_, p, left);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw std::runtime_error(fmt::format("journal write {}: {}", path_.string(), std::strerror(errno)));
    }
    p += n;
    left -= static_cast<std::size_t>(n);
  }
  if (::fsync(fd_) != 0) throw std::runtime_error(fmt::format("fsync {}: {}", path_.string(), std::strerror(errno)));
}

std::vector<std::string> read_journal(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(fmt::format("cannot read journal {}", path.string()));
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::vector<std::string> lines;
  std::size_t start = 0;
  for (std::size_t nl = content.find('\n'); nl != std::string::npos; nl = content.find('\n', start)) {
    lines.push_back(content.substr(start, nl - start));
    start = nl + 1;
  }
  return lines;
}

namespace {

std::string random_id() {
  std::random_device rd;
  return fmt::format("{:08x}{:08x}{:08x}{:08x}", rd(), rd(), rd(), rd());
}

bool valid_id(const std::string& id) {
  if (id.empty() || id.size() > 64) return false;
  for (char c : id) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_')) return false;
  }
  return true;
}

}  // namespace

SessionManager::SessionManager(std::shared_ptr<const SessionEnvironment> env, xai::XaiMode default_mode,
                               fs::path journal_dir, Clock clock)
    : env_(std::move(env)), default_mode_(default_mode), journal_dir_(std::move(journal_dir)), clock_(std::move(clock)) {
  if (!journal_dir_.empty()) fs::create_directories(journal_dir_);
}

std::shared_ptr<SessionManager::Entry> SessionManager::find(const std::string& id) const {
  std::shared_lock lock(map_mutex_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw ProtocolError(ErrorCode::UnknownSession, fmt::format("no session '{}'", id));
  return it->second;
}

void SessionManager::persist(Entry& entry) {
  auto lines = entry.session.take_pending();
  if (entry.writer) entry.writer->append(lines);
}

std::string SessionManager::create(std::optional<xai::XaiMode> mode, std::string id) {
  if (id.empty()) id = random_id();
  if (!valid_id(id)) throw ProtocolError(ErrorCode::InvalidPayload, "session ids use letters, digits, '-' and '_'");
  auto entry = std::make_shared<Entry>(Session(id, mode.value_or(default_mode_), env_, clock_()));
  {
    std::unique_lock lock(map_mutex_);
    if (sessions_.count(id)) throw ProtocolError(ErrorCode::InvalidPayload, fmt::format("session '{}' exists", id));
    sessions_.emplace(id, entry);
  }
  std::lock_guard lock(entry->mutex);
  if (!journal_dir_.empty()) entry->writer = std::make_unique<JournalWriter>(journal_dir_ / (id + ".jsonl"));
  persist(*entry);
  return id;
}

nlohmann::ordered_json SessionManager::command(const std::string& id, const nlohmann::json& command) {
  auto entry = find(id);
  std::lock_guard lock(entry->mutex);
  try {
    auto result = entry->session.apply(command, clock_());
    persist(*entry);
    ++entry->version;
    entry->changed.notify_all();
    return result;
  } catch (const ProtocolError&) {
    persist(*entry);
    throw;
  }
}

nlohmann::ordered_json SessionManager::state(const std::string& id) const {
  auto entry = find(id);
  std::lock_guard lock(entry->mutex);
  return entry->session.state_update();
}

nlohmann::ordered_json SessionManager::quiz_sheet(const std::string& id) const {
  auto entry = find(id);
  std::lock_guard lock(entry->mutex);
  return entry->session.quiz_sheet();
}

nlohmann::ordered_json SessionManager::report(const std::string& id) const {
  auto entry = find(id);
  std::lock_guard lock(entry->mutex);
  return entry->session.report();
}

std::vector<std::string> SessionManager::journal(const std::string& id) const {
  auto entry = find(id);
  std::lock_guard lock(entry->mutex);
  return entry->session.journal();
}

std::size_t SessionManager::tick() {
  std::vector<std::shared_ptr<Entry>> entries;
  {
    std::shared_lock lock(map_mutex_);
    for (const auto& [id, e] : sessions_) entries.push_back(e);
  }
  std::size_t applied = 0;
  for (auto& entry : entries) {
    std::lock_guard lock(entry->mutex);
    const Millis now = clock_();
    if (!entry->session.expired(now)) continue;
    entry->session.apply(nlohmann::json{{"op", "expire"}}, now);
    persist(*entry);
    ++entry->version;
    entry->changed.notify_all();
    ++applied;
  }
  return applied;
}

std::uint64_t SessionManager::version(const std::string& id) const {
  auto entry = find(id);
  std::lock_guard lock(entry->mutex);
  return entry->version;
}

std::optional<std::pair<std::uint64_t, nlohmann::ordered_json>> SessionManager::wait_update(
    const std::string& id, std::uint64_t seen, std::chrono::milliseconds timeout) const {
  auto entry = find(id);
  std::unique_lock lock(entry->mutex);
  if (!entry->changed.wait_for(lock, timeout, [&] { return entry->version != seen; })) return std::nullopt;
  return std::make_pair(entry->version, entry->session.state_update());
}

std::size_t SessionManager::recover() {
  if (journal_dir_.empty()) return 0;
  std::vector<fs::path> files;
  for (const auto& f : fs::directory_iterator(journal_dir_)) {
    if (f.is_regular_file() && f.path().extension() == ".jsonl") files.push_back(f.path());
  }
  std::sort(files.begin(), files.end());
  std::size_t restored = 0;
  for (const auto& path : files) {
    const auto lines = read_journal(path);
    if (lines.empty()) continue;
    auto entry = std::make_shared<Entry>(Session::replay(lines, env_));
    // Drop a torn trailing write so later appends start on a fresh line.
    std::uintmax_t intact = 0;
    for (const auto& l : lines) intact += l.size() + 1;
    if (fs::file_size(path) != intact) fs::resize_file(path, intact);
    entry->writer = std::make_unique<JournalWriter>(path);
    std::unique_lock lock(map_mutex_);
    sessions_[entry->session.id()] = entry;
    ++restored;
  }
  return restored;
}

std::vector<std::string> SessionManager::ids() const {
  std::shared_lock lock(map_mutex_);
  std::vector<std::string> out;
  for (const auto& [id, e] : sessions_) out.push_back(id);
  return out;
}

}  // namespace xaip::service
