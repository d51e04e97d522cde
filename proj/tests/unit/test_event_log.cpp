#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <thread>
#include <unistd.h>

#include "fascai/errors.hpp"
#include "fascai/event_log.hpp"
#include "fascai/harness.hpp"

using namespace fascai;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir()
    {
        path = fs::temp_directory_path() /
               ("fascai-log-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    static inline int counter = 0;
};

std::vector<InteractionTranscript> sample(std::size_t n)
{
    ExperimentConfig cfg;
    cfg.phases = {0, n, 0};
    cfg.arms = {{"fascai", ArmKind::Fascai, std::nullopt}};
    return run_experiment(cfg).transcripts();
}

std::vector<std::string> lines_of(const fs::path& p)
{
    std::ifstream in(p);
    std::vector<std::string> out;
    for (std::string l; std::getline(in, l);)
        out.push_back(l);
    return out;
}

void write_lines(const fs::path& p, const std::vector<std::string>& lines, bool trailing_newline = true)
{
    std::ofstream out(p, std::ios::trunc);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        out << lines[i];
        if (i + 1 < lines.size() || trailing_newline)
            out << "\n";
    }
}

} // namespace

TEST_CASE("record lines round trip")
{
    const auto ts = sample(3);
    for (const auto& r : records_of("s1", ts[0])) {
        const std::string line = to_line(r);
        CHECK(line.back() == '\n');
        const EventLogRecord back = parse_line(line);
        CHECK(back.session_id == "s1");
        CHECK(back.trial_id == ts[0].trial_id);
        CHECK(back.event.sequence_no == r.event.sequence_no);
        CHECK(back.event.payload == r.event.payload);
        const Json j = Json::parse(line);
        for (const char* key : {"session_id", "trial_id", "sequence_no", "wall_time", "kind", "payload"})
            CHECK(j.contains(key));
    }
}

TEST_CASE("append and replay")
{
    TempDir dir;
    const auto ts = sample(50);
    {
        EventLog log(dir.path / "events.jsonl");
        for (const auto& t : ts)
            log.append(records_of("s1", t));
    }
    const LogReplay r = replay_log(dir.path / "events.jsonl");
    CHECK(r.errors.empty());
    CHECK(r.complete.size() == 50);
    CHECK(r.torn_lines == 0);
    CHECK(r.session_of.front() == "s1");
    CHECK(transcript_to_json(r.complete[7]) == transcript_to_json(ts[7]));
}

TEST_CASE("crash mid-trial truncates to the last complete trial")
{
    TempDir dir;
    const fs::path p = dir.path / "events.jsonl";
    const auto ts = sample(5);
    std::vector<std::string> lines;
    for (const auto& t : ts)
        for (const auto& r : records_of("s", t))
            lines.push_back(to_line(r).substr(0, to_line(r).size() - 1));

    // drop the last event and tear the one before it
    lines.pop_back();
    lines.back() = lines.back().substr(0, lines.back().size() / 2);
    write_lines(p, lines, false);
    const LogReplay r = replay_log(p);
    CHECK(r.errors.empty());
    CHECK(r.torn_lines == 1);
    CHECK(r.complete.size() == 4);
    CHECK(r.incomplete == std::vector<std::string>{ts.back().trial_id});
}

TEST_CASE("corrupted order names the trial")
{
    TempDir dir;
    const fs::path p = dir.path / "events.jsonl";
    const auto ts = sample(4);
    const InteractionTranscript* target = nullptr;
    for (const auto& t : ts)
        if (t.events.size() >= 3 && !target)
            target = &t;
    REQUIRE(target);

    std::vector<std::string> lines;
    for (const auto& t : ts) {
        auto recs = records_of("s", t);
        if (&t == target)
            std::swap(recs[1].event.kind, recs[2].event.kind);
        for (const auto& r : recs)
            lines.push_back(to_line(r).substr(0, to_line(r).size() - 1));
    }
    write_lines(p, lines);
    const LogReplay r = replay_log(p);
    REQUIRE(r.errors.size() == 1);
    CHECK(r.errors[0].find(target->trial_id) != std::string::npos);
    CHECK(r.complete.size() == 3);
}

TEST_CASE("duplicate records")
{
    const auto ts = sample(2);
    auto recs = records_of("s", ts[0]);
    auto doubled = recs;
    doubled.insert(doubled.end(), recs.begin(), recs.end());
    CHECK(replay_records(doubled).complete.size() == 1);

    auto conflicting = recs;
    EventLogRecord bad = recs.back();
    bad.event.payload = Json{{"option", 99}};
    conflicting.push_back(bad);
    const LogReplay r = replay_records(conflicting);
    CHECK(r.complete.empty());
    CHECK(r.errors.size() == 1);
}

TEST_CASE("concurrent appends keep per-trial order")
{
    TempDir dir;
    const fs::path p = dir.path / "events.jsonl";
    const auto ts = sample(200);
    {
        EventLog log(p, false);
        std::vector<std::thread> workers;
        for (int w = 0; w < 4; ++w)
            workers.emplace_back([&, w] {
                for (std::size_t i = w; i < ts.size(); i += 4)
                    for (const auto& r : records_of("s" + std::to_string(w), ts[i]))
                        log.append({r});
            });
        for (auto& w : workers)
            w.join();
    }
    CHECK(lines_of(p).size() > 200);
    const LogReplay r = replay_log(p);
    CHECK(r.errors.empty());
    CHECK(r.complete.size() == 200);
}

TEST_CASE("empty log is valid")
{
    TempDir dir;
    const fs::path p = dir.path / "events.jsonl";
    { EventLog log(p); }
    const LogReplay r = replay_log(p);
    CHECK(r.complete.empty());
    CHECK(r.errors.empty());
    CHECK_THROWS_AS(replay_log(dir.path / "missing.jsonl"), StorageError);
}
