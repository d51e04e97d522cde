#include "fascai/service.hpp"

#include <algorithm>
#include <random>
#include <variant>

#include "fascai/errors.hpp"

namespace fascai {

Timestamp system_now()
{
    return std::chrono::time_point_cast<std::chrono::milliseconds>(
        std::chrono::system_clock::now());
}

namespace {

using StepResult = std::variant<ApiResponse, TrialState>;

ApiResponse error(int status, std::string_view code, const std::string& message)
{
    return {status, Json{{"error", code}, {"message", message}}};
}

std::string random_token()
{
    std::random_device rd;
    std::uniform_int_distribution<std::uint32_t> dist;
    char buf[33];
    std::snprintf(buf, sizeof buf, "%08x%08x%08x%08x", dist(rd), dist(rd), dist(rd), dist(rd));
    return buf;
}

// Payload of a participant-submitted event of `kind`, if the transcript has
// one. A final decision counts only when it answered a shown recommendation;
// otherwise the protocol generated it.
std::optional<Json> submitted(const InteractionTranscript& t, EventKind kind)
{
    for (std::size_t i = 0; i < t.events.size(); ++i) {
        if (t.events[i].kind != kind)
            continue;
        if (kind == EventKind::FinalDecision &&
            (i == 0 || t.events[i - 1].kind != EventKind::RecommendationShown))
            continue;
        return t.events[i].payload;
    }
    return std::nullopt;
}

} // namespace

Service::Service(ExperimentConfig experiment, ServiceOptions options,
                 std::shared_ptr<EventSink> sink, Clock clock)
    : experiment_(std::move(experiment)),
      options_(std::move(options)),
      sink_(std::move(sink)),
      clock_(std::move(clock)),
      solver_(experiment_.solver),
      machine_record_("machine", experiment_.controller.window_size)
{
    experiment_.validate();
    if (!sink_)
        throw ValidationError("service needs an event sink");
}

void Service::recover(const LogReplay& replay)
{
    std::lock_guard lock(shared_mutex_);
    for (const auto& t : replay.complete) {
        if (t.context.stage != TrialStage::Live)
            continue;
        if (t.recommendation)
            machine_record_.record(t.recommendation->option == t.instance.best_option);
        finalized_.push_back(t);
    }
}

std::shared_ptr<Service::Session> Service::find(const std::string& session_id)
{
    std::lock_guard lock(sessions_mutex_);
    auto it = sessions_.find(session_id);
    return it == sessions_.end() ? nullptr : it->second;
}

ApiResponse Service::create_session(const Json& body)
{
    if (!body.is_object())
        return error(400, "bad_request", "body must be a JSON object");
    std::string participant;
    if (body.contains("participant_id")) {
        if (!body.at("participant_id").is_string())
            return error(400, "bad_request", "participant_id must be a string");
        participant = body.at("participant_id").get<std::string>();
    }

    auto s = std::make_shared<Session>();
    s->participant_id = participant;
    s->created_at = clock_();
    s->human_record = TrackRecord("human:" + participant, experiment_.controller.window_size);
    s->controller = experiment_.controller.make_state();
    {
        std::lock_guard lock(sessions_mutex_);
        do {
            s->id = random_token();
        } while (sessions_.contains(s->id));
        s->rng = Rng::stream(experiment_.seed, StreamTag::Session, session_counter_++);
        sessions_.emplace(s->id, s);
        session_order_.push_back(s->id);
    }
    return {201, Json{{"session_id", s->id},
                      {"participant_id", s->participant_id},
                      {"created_at", format_timestamp(s->created_at)}}};
}

Json Service::trial_view(const Session& s, const TrialState& state) const
{
    const auto& t = state.transcript;
    Json options = Json::array();
    for (std::size_t i = 0; i < t.instance.options.size(); ++i)
        options.push_back({{"index", i}, {"features", t.instance.options[i]}});

    Json view{{"session_id", s.id},
              {"trial_id", t.trial_id},
              {"modality", std::string(to_string(t.modality))},
              {"phase", std::string(to_string(state.phase))},
              {"task", {{"instance_id", t.instance.instance_id}, {"options", std::move(options)}}},
              {"reveal_offered", state.phase == TrialPhase::AwaitingRevealChoice},
              {"min_think_ms", options_.min_think_ms}};

    // Only what the protocol has already emitted is shown.
    for (const auto& e : t.events) {
        if (e.kind == EventKind::RecommendationShown)
            view["recommendation"] = e.payload;
        if (e.kind == EventKind::MachineDecision) {
            view["machine_decision"] = e.payload;
            view["recommendation"] = e.payload;
        }
    }
    if (state.phase == TrialPhase::Finalized && t.context.outcome_feedback) {
        view["outcome"] = {{"correct", *t.final_option() == t.instance.best_option},
                           {"best_option", t.instance.best_option}};
    }
    return view;
}

void Service::persist(const Session& s, const TrialState& before, const TrialState& after)
{
    const std::size_t from =
        before.transcript.trial_id == after.transcript.trial_id ? before.transcript.events.size()
                                                                : 0;
    sink_->append(records_of(s.id, after.transcript, from));
}

void Service::finish_trial(Session& s, const InteractionTranscript& t)
{
    if (const auto initial = t.initial_option())
        s.human_record.record(*initial == t.instance.best_option);
    {
        std::lock_guard lock(shared_mutex_);
        if (t.recommendation)
            machine_record_.record(t.recommendation->option == t.instance.best_option);
        finalized_.push_back(t);
    }
    if (s.controller.feedback_config.enabled && t.context.cell) {
        const TrialOutcome outcome = outcome_of(t);
        const ValueScores scores =
            score_trial(outcome, std::nullopt, outcome.elapsed_steps, experiment_.step_budget);
        s.controller = apply_feedback(s.controller, *t.context.cell, t.modality, scores).state;
    }
    s.completed.push_back(t);
}

ApiResponse Service::next_trial(const std::string& session_id)
{
    auto s = find(session_id);
    if (!s)
        return error(404, "not_found", "unknown session " + session_id);
    std::lock_guard lock(s->mutex);

    if (s->current && s->current->phase != TrialPhase::Finalized)
        return {200, trial_view(*s, *s->current)};

    const std::uint64_t n = s->trial_counter;
    Rng rng = s->rng; // committed only once the trial is durable
    ProblemInstance inst =
        generate_instance(rng, experiment_.task, s->id + "-task-" + std::to_string(n));
    Recommendation rec = solver_.recommend(inst, rng);
    TrackRecord machine_snapshot;
    {
        std::lock_guard shared(shared_mutex_);
        machine_snapshot = machine_record_;
    }
    rec.disclosure = {bin_confidence(rec.confidence, s->controller.thresholds),
                      machine_snapshot.accuracy().value_or(0.0), machine_snapshot.window_length()};
    const ModalitySelection sel =
        select_modality(s->controller, rec.confidence, s->human_record, machine_snapshot, rng);

    TrialContext ctx;
    ctx.arm = "live";
    ctx.stage = TrialStage::Live;
    ctx.index = n;
    ctx.cell = sel.cell;
    ctx.explored = sel.explored;
    ctx.outcome_feedback = experiment_.outcome_feedback;
    ctx.protocol = experiment_.protocol;

    const TrialState state = start_trial(s->id + "-" + std::to_string(n), sel.modality,
                                         std::move(inst), std::move(rec), std::move(ctx), clock_());
    try {
        persist(*s, TrialState{}, state);
    } catch (const StorageError& e) {
        return error(500, "storage_error", e.what());
    }
    s->rng = rng;
    s->trial_counter = n + 1;
    s->current = state;
    if (state.phase == TrialPhase::Finalized)
        finish_trial(*s, state.transcript);
    return {200, trial_view(*s, state)};
}

template <typename Step>
ApiResponse Service::advance(const std::string& session_id, const Json& body, Step step)
{
    auto s = find(session_id);
    if (!s)
        return error(404, "not_found", "unknown session " + session_id);
    if (!body.is_object() || !body.contains("trial_id") || !body.at("trial_id").is_string())
        return error(400, "bad_request", "body must carry a string trial_id");
    const std::string trial_id = body.at("trial_id").get<std::string>();

    std::lock_guard lock(s->mutex);
    if (!s->current || s->current->transcript.trial_id != trial_id)
        return error(409, "protocol_error", "trial " + trial_id + " is not the open trial");
    const TrialState& before = *s->current;

    TrialState after;
    try {
        auto r = step(*s, before);
        if (std::holds_alternative<ApiResponse>(r))
            return std::get<ApiResponse>(r);
        after = std::move(std::get<TrialState>(r));
    } catch (const ProtocolError& e) {
        return error(409, "protocol_error", e.what());
    } catch (const ValidationError& e) {
        return error(400, "bad_request", e.what());
    } catch (const Json::exception& e) {
        return error(400, "bad_request", e.what());
    }

    try {
        persist(*s, before, after);
    } catch (const StorageError& e) {
        return error(500, "storage_error", e.what());
    }
    s->current = after;
    if (after.phase == TrialPhase::Finalized)
        finish_trial(*s, after.transcript);
    return {200, trial_view(*s, after)};
}

namespace {

std::optional<OptionIndex> option_field(const Json& body)
{
    if (!body.contains("option") || !body.at("option").is_number_unsigned())
        return std::nullopt;
    return body.at("option").get<OptionIndex>();
}

Timestamp monotone(Timestamp now, const TrialState& s)
{
    return s.transcript.events.empty() ? now : std::max(now, s.transcript.events.back().wall_time);
}

} // namespace

ApiResponse Service::initial_decision(const std::string& session_id, const Json& body)
{
    return advance(session_id, body, [&](Session& s, const TrialState& st) -> StepResult {
        const auto option = option_field(body);
        if (!option)
            return error(400, "bad_request", "option must be a non-negative integer");
        if (const auto prior = submitted(st.transcript, EventKind::InitialDecision)) {
            if (prior->at("option").get<OptionIndex>() == *option)
                return ApiResponse{200, trial_view(s, st)};
            return error(409, "protocol_error", "initial decision already recorded");
        }
        const Timestamp now = monotone(clock_(), st);
        if (st.phase == TrialPhase::AwaitingInitialDecision && options_.min_think_ms > 0) {
            const auto shown = st.transcript.events.front().wall_time;
            if (now - shown < std::chrono::milliseconds(options_.min_think_ms))
                return error(409, "protocol_error",
                             "initial decision submitted before the minimum think time");
        }
        return submit_initial(st, *option, now);
    });
}

ApiResponse Service::reveal_request(const std::string& session_id, const Json& body)
{
    return advance(session_id, body, [&](Session& s, const TrialState& st) -> StepResult {
        if (!body.contains("reveal") || !body.at("reveal").is_boolean())
            return error(400, "bad_request", "reveal must be a boolean");
        const bool reveal = body.at("reveal").get<bool>();
        if (const auto prior = submitted(st.transcript, EventKind::RevealRequested)) {
            if (prior->at("reveal").get<bool>() == reveal)
                return ApiResponse{200, trial_view(s, st)};
            return error(409, "protocol_error", "reveal choice already recorded");
        }
        return submit_reveal_choice(st, reveal, monotone(clock_(), st));
    });
}

ApiResponse Service::final_decision(const std::string& session_id, const Json& body)
{
    return advance(session_id, body, [&](Session& s, const TrialState& st) -> StepResult {
        const auto option = option_field(body);
        if (!option)
            return error(400, "bad_request", "option must be a non-negative integer");
        if (const auto prior = submitted(st.transcript, EventKind::FinalDecision)) {
            if (prior->at("option").get<OptionIndex>() == *option)
                return ApiResponse{200, trial_view(s, st)};
            return error(409, "protocol_error", "final decision already recorded");
        }
        return submit_final(st, *option, monotone(clock_(), st));
    });
}

ApiResponse Service::transcript(const std::string& session_id)
{
    auto s = find(session_id);
    if (!s)
        return error(404, "not_found", "unknown session " + session_id);
    std::lock_guard lock(s->mutex);
    Json list = Json::array();
    for (const auto& t : s->completed)
        list.push_back(transcript_to_json(t));
    if (s->current && s->current->phase != TrialPhase::Finalized)
        list.push_back(transcript_to_json(s->current->transcript, true));
    return {200, Json{{"session_id", s->id},
                      {"participant_id", s->participant_id},
                      {"transcripts", std::move(list)}}};
}

ApiResponse Service::metrics()
{
    std::vector<InteractionTranscript> all;
    {
        std::lock_guard lock(shared_mutex_);
        all = finalized_;
    }
    Json body = metrics_json(compute_metrics(all, experiment_.metrics_params()));
    body["finalized_trials"] = all.size();
    return {200, std::move(body)};
}

ApiResponse Service::dispatch(const std::string& method, const std::string& path,
                              const std::string& raw_body)
{
    Json body = Json::object();
    if (method == "POST" && !raw_body.empty()) {
        try {
            body = Json::parse(raw_body);
        } catch (const Json::exception& e) {
            return error(400, "bad_request", std::string("malformed JSON body: ") + e.what());
        }
    }

    std::vector<std::string> parts;
    for (std::size_t pos = 0; pos < path.size();) {
        const std::size_t next = path.find('/', pos);
        const std::size_t end = next == std::string::npos ? path.size() : next;
        if (end > pos)
            parts.push_back(path.substr(pos, end - pos));
        pos = end + 1;
    }

    if (method == "POST" && parts == std::vector<std::string>{"sessions"})
        return create_session(body);
    if (method == "GET" && parts == std::vector<std::string>{"metrics"})
        return metrics();
    if (parts.size() == 3 && parts[0] == "sessions") {
        const std::string& id = parts[1];
        const std::string& action = parts[2];
        if (method == "GET" && action == "next-trial")
            return next_trial(id);
        if (method == "GET" && action == "transcript")
            return transcript(id);
        if (method == "POST" && action == "initial-decision")
            return initial_decision(id, body);
        if (method == "POST" && action == "reveal-request")
            return reveal_request(id, body);
        if (method == "POST" && action == "final-decision")
            return final_decision(id, body);
    }
    return error(404, "not_found", "no route for " + method + " " + path);
}

} // namespace fascai

#include <httplib.h>

namespace fascai {

struct HttpServer::Impl {
    Service& service;
    httplib::Server server;
    explicit Impl(Service& s) : service(s) {}
};

HttpServer::HttpServer(Service& service) : impl_(std::make_unique<Impl>(service))
{
    auto handle = [this](const httplib::Request& req, httplib::Response& res) {
        const ApiResponse r = impl_->service.dispatch(req.method, req.path, req.body);
        res.status = r.status;
        res.set_content(r.body.dump(), "application/json");
    };
    impl_->server.Get(".*", handle);
    impl_->server.Post(".*", handle);
    impl_->server.Options(".*", [](const httplib::Request&, httplib::Response& res) {
        res.status = 204;
    });
    impl_->server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                                       {"Access-Control-Allow-Headers", "Content-Type"},
                                       {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
}

HttpServer::~HttpServer() = default;

int HttpServer::bind(const std::string& host, int port)
{
    const int bound = port == 0 ? impl_->server.bind_to_any_port(host)
                                : (impl_->server.bind_to_port(host, port) ? port : -1);
    if (bound < 0)
        throw StorageError("cannot bind " + host + ":" + std::to_string(port));
    return bound;
}

void HttpServer::listen()
{
    impl_->server.listen_after_bind();
}

void HttpServer::stop()
{
    impl_->server.stop();
}

} // namespace fascai
