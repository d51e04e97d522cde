#include "fascai/event_log.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <map>

#include "fascai/errors.hpp"

namespace fascai {

std::string to_line(const EventLogRecord& r)
{
    Json j = event_to_json(r.event);
    j["session_id"] = r.session_id;
    j["trial_id"] = r.trial_id;
    return j.dump() + "\n";
}

EventLogRecord parse_line(std::string_view line)
{
    const Json j = Json::parse(line);
    EventLogRecord r;
    r.session_id = j.at("session_id").get<std::string>();
    r.trial_id = j.at("trial_id").get<std::string>();
    r.event = event_from_json(j);
    return r;
}

std::vector<EventLogRecord> records_of(const std::string& session_id,
                                       const InteractionTranscript& t, std::size_t from)
{
    std::vector<EventLogRecord> out;
    for (std::size_t i = from; i < t.events.size(); ++i)
        out.push_back({session_id, t.trial_id, t.events[i]});
    return out;
}

EventLog::EventLog(const std::filesystem::path& path, bool durable)
    : path_(path), durable_(durable)
{
    if (path_.has_parent_path())
        std::filesystem::create_directories(path_.parent_path());
    fd_ = ::open(path_.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
    if (fd_ < 0)
        throw StorageError("cannot open event log " + path_.string() + ": " +
                           std::strerror(errno));
}

EventLog::~EventLog()
{
    if (fd_ >= 0)
        ::close(fd_);
}

void EventLog::append(const std::vector<EventLogRecord>& records)
{
    std::lock_guard lock(mutex_);
    for (const auto& r : records) {
        const std::string line = to_line(r);
        const ssize_t n = ::write(fd_, line.data(), line.size());
        if (n != static_cast<ssize_t>(line.size()))
            throw StorageError("short write to event log " + path_.string());
    }
    if (durable_ && ::fsync(fd_) != 0)
        throw StorageError("fsync failed on event log " + path_.string() + ": " +
                           std::strerror(errno));
}

LogReplay replay_records(const std::vector<EventLogRecord>& records)
{
    LogReplay out;
    struct Trial {
        std::string session_id;
        std::string trial_id;
        std::vector<Event> events;
        std::string error;
    };
    std::vector<Trial> trials;
    std::map<std::pair<std::string, std::string>, std::size_t> index;

    for (const auto& r : records) {
        const auto key = std::make_pair(r.session_id, r.trial_id);
        auto [it, fresh] = index.try_emplace(key, trials.size());
        if (fresh)
            trials.push_back({r.session_id, r.trial_id, {}, {}});
        Trial& t = trials[it->second];

        auto dup = std::find_if(t.events.begin(), t.events.end(), [&](const Event& e) {
            return e.sequence_no == r.event.sequence_no;
        });
        if (dup == t.events.end()) {
            t.events.push_back(r.event);
        } else if (dup->kind != r.event.kind || dup->payload != r.event.payload) {
            t.error = "trial " + t.trial_id + ": conflicting records for sequence " +
                      std::to_string(r.event.sequence_no);
        }
        // identical duplicates are retried writes and are ignored
    }

    for (auto& t : trials) {
        if (!t.error.empty()) {
            out.errors.push_back(t.error);
            continue;
        }
        std::stable_sort(t.events.begin(), t.events.end(), [](const Event& a, const Event& b) {
            return a.sequence_no < b.sequence_no;
        });
        try {
            InteractionTranscript transcript = transcript_from_events(t.trial_id, std::move(t.events));
            if (replay(transcript) == TrialPhase::Finalized) {
                out.complete.push_back(std::move(transcript));
                out.session_of.push_back(t.session_id);
            } else {
                out.incomplete.push_back(t.trial_id);
            }
        } catch (const std::exception& e) {
            out.errors.push_back(e.what());
        }
    }
    return out;
}

LogReplay replay_log(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw StorageError("cannot read event log " + path.string());

    std::vector<std::string> lines;
    for (std::string line; std::getline(in, line);)
        if (!line.empty())
            lines.push_back(std::move(line));

    std::vector<EventLogRecord> records;
    std::vector<std::string> bad;
    std::size_t torn = 0;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        try {
            records.push_back(parse_line(lines[i]));
        } catch (const std::exception& e) {
            if (i + 1 == lines.size())
                ++torn; // interrupted final write
            else
                bad.push_back("line " + std::to_string(i + 1) + ": " + e.what());
        }
    }
    LogReplay out = replay_records(records);
    out.torn_lines = torn;
    out.errors.insert(out.errors.begin(), bad.begin(), bad.end());
    return out;
}

} // namespace fascai
