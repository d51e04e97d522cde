#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "fascai/config.hpp"
#include "fascai/event_log.hpp"
#include "fascai/harness.hpp"

namespace fascai {

struct ApiResponse {
    int status = 200;
    Json body = Json::object();
};

using Clock = std::function<Timestamp()>;
Timestamp system_now();

// Live-trial API. JSON bodies:
//
//   POST /sessions                      {"participant_id": str}
//        -> 201 {"session_id", "participant_id", "created_at"}
//   GET  /sessions/{id}/next-trial
//        -> 200 trial view (below); repeats the open trial until it is finalized
//   POST /sessions/{id}/initial-decision {"trial_id": str, "option": int}
//   POST /sessions/{id}/reveal-request   {"trial_id": str, "reveal": bool}
//   POST /sessions/{id}/final-decision   {"trial_id": str, "option": int}
//        -> 200 trial view
//   GET  /sessions/{id}/transcript
//        -> 200 {"session_id", "transcripts": [...]}; the open trial is redacted
//   GET  /metrics -> 200 metrics over all finalized live trials
//
// Trial view: {"session_id", "trial_id", "modality", "phase",
//   "task": {"instance_id", "options": [{"index", "features"}]},
//   "recommendation"?: {"option", "disclosure"?: {"confidence_level",
//                        "machine_accuracy", "sample_count"}},
//   "machine_decision"?: {"option"}, "reveal_offered": bool,
//   "min_think_ms": int, "outcome"?: {"correct", "best_option"}}
//
// "recommendation" appears only once the protocol has emitted
// recommendation_shown (or machine_decision) for the trial and that event is
// durable in the log.
//
// Errors: {"error": "protocol_error" | "not_found" | "bad_request" |
//          "storage_error", "message": str} with 409 / 404 / 400 / 500.
//
// Retrying an accepted submission with the same body returns the same view;
// a conflicting resubmission is a 409.
class Service {
public:
    Service(ExperimentConfig experiment, ServiceOptions options, std::shared_ptr<EventSink> sink,
            Clock clock = system_now);

    // Restores shared state (machine track record, finalized transcripts)
    // from an earlier log.
    void recover(const LogReplay& replay);

    ApiResponse create_session(const Json& body);
    ApiResponse next_trial(const std::string& session_id);
    ApiResponse initial_decision(const std::string& session_id, const Json& body);
    ApiResponse reveal_request(const std::string& session_id, const Json& body);
    ApiResponse final_decision(const std::string& session_id, const Json& body);
    ApiResponse transcript(const std::string& session_id);
    ApiResponse metrics();

    // Routes a raw request (used by the HTTP front end and tests).
    ApiResponse dispatch(const std::string& method, const std::string& path,
                         const std::string& body);

    const ExperimentConfig& experiment() const { return experiment_; }

private:
    struct Session {
        std::string id;
        std::string participant_id;
        Timestamp created_at;
        std::mutex mutex;
        Rng rng{0};
        TrackRecord human_record;
        ControllerState controller;
        std::optional<TrialState> current;
        std::vector<InteractionTranscript> completed;
        std::uint64_t trial_counter = 0;
    };

    std::shared_ptr<Session> find(const std::string& session_id);
    Json trial_view(const Session& s, const TrialState& state) const;
    void persist(const Session& s, const TrialState& before, const TrialState& after);
    void finish_trial(Session& s, const InteractionTranscript& t);
    template <typename Step>
    ApiResponse advance(const std::string& session_id, const Json& body, Step step);

    ExperimentConfig experiment_;
    ServiceOptions options_;
    std::shared_ptr<EventSink> sink_;
    Clock clock_;
    SyntheticSolver solver_;

    std::mutex sessions_mutex_;
    std::map<std::string, std::shared_ptr<Session>> sessions_;
    std::vector<std::string> session_order_;
    std::uint64_t session_counter_ = 0;

    std::mutex shared_mutex_;
    TrackRecord machine_record_;
    std::vector<InteractionTranscript> finalized_;
};

// Blocking HTTP front end over a Service.
class HttpServer {
public:
    explicit HttpServer(Service& service);
    ~HttpServer();
    HttpServer(const HttpServer&) = delete;
    HttpServer& operator=(const HttpServer&) = delete;

    // Binds; port 0 picks a free port. Returns the bound port.
    int bind(const std::string& host, int port);
    // Serves until stop(); call after bind().
    void listen();
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace fascai
