#pragma once

#include <filesystem>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "fascai/protocol.hpp"

namespace fascai {

// One line of the event log:
// {"kind":..,"payload":{..},"sequence_no":N,"session_id":..,"trial_id":..,"wall_time":"..Z"}
struct EventLogRecord {
    std::string session_id;
    std::string trial_id;
    Event event;
};

std::string to_line(const EventLogRecord& r);
EventLogRecord parse_line(std::string_view line);

std::vector<EventLogRecord> records_of(const std::string& session_id,
                                       const InteractionTranscript& t, std::size_t from = 0);

class EventSink {
public:
    virtual ~EventSink() = default;
    // Appends the records in order. Returns only once they are durable;
    // throws StorageError otherwise.
    virtual void append(const std::vector<EventLogRecord>& records) = 0;
};

// Append-only UTF-8 JSON-lines file. Each record is written with a single
// write(2) on an O_APPEND descriptor; with `durable` every append ends with
// fsync.
class EventLog final : public EventSink {
public:
    explicit EventLog(const std::filesystem::path& path, bool durable = true);
    ~EventLog() override;
    EventLog(const EventLog&) = delete;
    EventLog& operator=(const EventLog&) = delete;

    void append(const std::vector<EventLogRecord>& records) override;
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
    bool durable_;
    int fd_ = -1;
    std::mutex mutex_;
};

struct LogReplay {
    std::vector<InteractionTranscript> complete; // finalized and valid, in order of first appearance
    std::vector<std::string> session_of;        // session id per complete transcript
    std::vector<std::string> incomplete;        // trials cut off before finalization (dropped)
    std::vector<std::string> errors;            // protocol violations or corrupt records, naming the trial
    std::size_t torn_lines = 0;                 // unparseable trailing line from an interrupted write
};

LogReplay replay_log(const std::filesystem::path& path);
LogReplay replay_records(const std::vector<EventLogRecord>& records);

} // namespace fascai
