#pragma once

#include <mutex>
#include <vector>

#include "fascai/event_log.hpp"
#include "fascai/records.hpp"

namespace fascai::test {

struct MemorySink final : EventSink {
    std::vector<EventLogRecord> records;
    bool fail = false;
    std::mutex mutex;

    void append(const std::vector<EventLogRecord>& r) override
    {
        std::lock_guard lock(mutex);
        if (fail)
            throw StorageError("disk full");
        records.insert(records.end(), r.begin(), r.end());
    }
};

inline TrackRecord record_of(std::size_t correct, std::size_t n, std::size_t window = 50)
{
    TrackRecord r("t", window);
    for (std::size_t i = 0; i < n; ++i)
        r.record(i < correct);
    return r;
}

} // namespace fascai::test
