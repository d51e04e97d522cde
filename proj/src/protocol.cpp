#include "fascai/protocol.hpp"

#include <cstdio>
#include <ctime>

#include "fascai/errors.hpp"

namespace fascai {

std::string format_timestamp(Timestamp t)
{
    using namespace std::chrono;
    const auto secs = floor<seconds>(t);
    const auto millis = (t - secs).count();
    const std::time_t tt = secs.time_since_epoch().count();
    std::tm tm{};
    gmtime_r(&tt, &tm);
    char buf[40];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", tm.tm_year + 1900,
                  tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec,
                  static_cast<int>(millis));
    return buf;
}

Timestamp parse_timestamp(std::string_view s)
{
    int y, mo, d, h, mi, sec, ms = 0;
    const std::string str(s);
    if (std::sscanf(str.c_str(), "%4d-%2d-%2dT%2d:%2d:%2d.%3dZ", &y, &mo, &d, &h, &mi, &sec,
                    &ms) < 6)
        throw ValidationError("malformed timestamp '" + str + "'");
    using namespace std::chrono;
    const auto date = year_month_day{year{y}, month{static_cast<unsigned>(mo)},
                                     day{static_cast<unsigned>(d)}};
    if (!date.ok())
        throw ValidationError("malformed timestamp '" + str + "'");
    return sys_days{date} + hours{h} + minutes{mi} + seconds{sec} + milliseconds{ms};
}

std::string_view to_string(TrialPhase p)
{
    switch (p) {
    case TrialPhase::Assigned: return "assigned";
    case TrialPhase::AwaitingInitialDecision: return "awaiting_initial_decision";
    case TrialPhase::RecommendationVisible: return "recommendation_visible";
    case TrialPhase::AwaitingRevealChoice: return "awaiting_reveal_choice";
    case TrialPhase::Finalized: return "finalized";
    }
    return "?";
}

namespace {

constexpr std::array<EventKind, 7> kAllEventKinds = {
    EventKind::TaskShown,       EventKind::RecommendationShown, EventKind::InitialDecision,
    EventKind::RevealOffered,   EventKind::RevealRequested,     EventKind::FinalDecision,
    EventKind::MachineDecision,
};

} // namespace

std::string_view to_string(EventKind k)
{
    switch (k) {
    case EventKind::TaskShown: return "task_shown";
    case EventKind::RecommendationShown: return "recommendation_shown";
    case EventKind::InitialDecision: return "initial_decision";
    case EventKind::RevealOffered: return "reveal_offered";
    case EventKind::RevealRequested: return "reveal_requested";
    case EventKind::FinalDecision: return "final_decision";
    case EventKind::MachineDecision: return "machine_decision";
    }
    return "?";
}

EventKind parse_event_kind(std::string_view s)
{
    for (EventKind k : kAllEventKinds)
        if (to_string(k) == s)
            return k;
    throw ValidationError("unknown event kind '" + std::string(s) + "'");
}

std::string_view to_string(TrialStage s)
{
    switch (s) {
    case TrialStage::PreTest: return "pre_test";
    case TrialStage::Collaboration: return "collaboration";
    case TrialStage::PostTest: return "post_test";
    case TrialStage::Live: return "live";
    }
    return "?";
}

TrialStage parse_trial_stage(std::string_view s)
{
    for (TrialStage t : {TrialStage::PreTest, TrialStage::Collaboration, TrialStage::PostTest,
                         TrialStage::Live})
        if (to_string(t) == s)
            return t;
    throw ValidationError("unknown trial stage '" + std::string(s) + "'");
}

// ---------------------------------------------------------------------------
// transcript queries

namespace {

std::optional<OptionIndex> last_option(const std::vector<Event>& events, EventKind kind)
{
    for (auto it = events.rbegin(); it != events.rend(); ++it)
        if (it->kind == kind)
            return it->payload.at("option").get<OptionIndex>();
    return std::nullopt;
}

} // namespace

bool InteractionTranscript::finalized() const
{
    for (const auto& e : events)
        if (e.kind == EventKind::FinalDecision || e.kind == EventKind::MachineDecision)
            return true;
    return false;
}

std::optional<OptionIndex> InteractionTranscript::initial_option() const
{
    return last_option(events, EventKind::InitialDecision);
}

std::optional<OptionIndex> InteractionTranscript::final_option() const
{
    if (auto f = last_option(events, EventKind::FinalDecision))
        return f;
    return last_option(events, EventKind::MachineDecision);
}

std::optional<OptionIndex> InteractionTranscript::shown_machine_option() const
{
    if (auto r = last_option(events, EventKind::RecommendationShown))
        return r;
    return last_option(events, EventKind::MachineDecision);
}

std::optional<bool> InteractionTranscript::reveal_requested() const
{
    for (const auto& e : events)
        if (e.kind == EventKind::RevealRequested)
            return e.payload.at("reveal").get<bool>();
    return std::nullopt;
}

bool InteractionTranscript::recommendation_shown() const
{
    for (const auto& e : events)
        if (e.kind == EventKind::RecommendationShown)
            return true;
    return false;
}

std::optional<OptionIndex> InteractionTranscript::machine_option() const
{
    if (auto shown = shown_machine_option())
        return shown;
    if (recommendation)
        return recommendation->option;
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// state machine

namespace {

void append(InteractionTranscript& t, EventKind kind, Json payload, Timestamp at)
{
    Event e;
    e.sequence_no = t.events.size();
    e.wall_time = at;
    e.kind = kind;
    e.payload = std::move(payload);
    t.events.push_back(std::move(e));
}

Json option_payload(OptionIndex option)
{
    return Json{{"option", option}};
}

[[noreturn]] void reject(const TrialState& s, std::string_view action)
{
    throw ProtocolError("trial " + s.transcript.trial_id + " (" +
                        std::string(to_string(s.transcript.modality)) + "): " +
                        std::string(action) + " is not allowed in phase " +
                        std::string(to_string(s.phase)));
}

void check_option(const TrialState& s, OptionIndex option)
{
    if (option >= s.transcript.instance.option_count())
        throw ValidationError("trial " + s.transcript.trial_id + ": option " +
                              std::to_string(option) + " out of range");
}

Json assignment_json(const InteractionTranscript& t)
{
    Json a{{"arm", t.context.arm},
           {"stage", std::string(to_string(t.context.stage))},
           {"index", t.context.index},
           {"explored", t.context.explored},
           {"outcome_feedback", t.context.outcome_feedback},
           {"protocol", t.context.protocol},
           {"true_utilities", t.instance.true_utilities},
           {"best_option", t.instance.best_option}};
    if (t.context.cell)
        a["cell"] = t.context.cell->key();
    if (t.recommendation)
        a["recommendation"] = *t.recommendation;
    return a;
}

Json task_payload(const InteractionTranscript& t)
{
    return Json{{"modality", std::string(to_string(t.modality))},
                {"task", {{"instance_id", t.instance.instance_id}, {"options", t.instance.options}}},
                {"assignment", assignment_json(t)}};
}

// Option actually presented, after optional re-selection around the human's pick.
OptionIndex presented_option(const InteractionTranscript& t, std::optional<OptionIndex> initial)
{
    const auto& rec = *t.recommendation;
    const auto& sel = t.context.protocol.selection;
    if (!sel.enabled || !initial)
        return rec.option;
    return select_recommendation(rec.estimated_utilities, sel.epsilon, sel.strategy, initial);
}

Json recommendation_payload(const InteractionTranscript& t, std::optional<OptionIndex> initial)
{
    Json p = option_payload(presented_option(t, initial));
    const auto& rec = *t.recommendation;
    if (t.modality == Modality::MetacognitionNudge) {
        p["disclosure"] = rec.disclosure;
    } else if (t.modality == Modality::System2Nudge &&
               t.context.protocol.show_confidence_under_system2) {
        p["disclosure"] = {
            {"confidence_level", std::string(to_string(rec.disclosure.confidence_level))}};
    }
    return p;
}

} // namespace

TrialState start_trial(std::string trial_id, Modality modality, ProblemInstance instance,
                       std::optional<Recommendation> rec, TrialContext context, Timestamp at)
{
    if (instance.option_count() < 2 || instance.best_option >= instance.option_count())
        throw ValidationError("trial " + trial_id + ": malformed problem instance");
    if (!rec && modality != Modality::HumanOnly)
        throw ProtocolError("trial " + trial_id + ": modality " +
                            std::string(to_string(modality)) + " requires a recommendation");
    if (rec && (rec->option >= instance.option_count() ||
                rec->estimated_utilities.size() != instance.option_count()))
        throw ValidationError("trial " + trial_id + ": recommendation does not fit the task");

    TrialState s;
    auto& t = s.transcript;
    t.trial_id = std::move(trial_id);
    t.modality = modality;
    t.context = std::move(context);
    t.instance = std::move(instance);
    t.recommendation = std::move(rec);

    append(t, EventKind::TaskShown, task_payload(t), at);
    switch (modality) {
    case Modality::System1Nudge:
        append(t, EventKind::RecommendationShown, recommendation_payload(t, std::nullopt), at);
        s.phase = TrialPhase::RecommendationVisible;
        break;
    case Modality::MachineOnly:
        append(t, EventKind::MachineDecision, option_payload(t.recommendation->option), at);
        s.phase = TrialPhase::Finalized;
        break;
    default:
        s.phase = TrialPhase::AwaitingInitialDecision;
    }
    return s;
}

TrialState submit_initial(const TrialState& state, OptionIndex option, Timestamp at)
{
    if (state.phase != TrialPhase::AwaitingInitialDecision)
        reject(state, "initial decision");
    check_option(state, option);

    TrialState s = state;
    auto& t = s.transcript;
    append(t, EventKind::InitialDecision, option_payload(option), at);
    switch (t.modality) {
    case Modality::System2Nudge:
        append(t, EventKind::RecommendationShown, recommendation_payload(t, option), at);
        s.phase = TrialPhase::RecommendationVisible;
        break;
    case Modality::MetacognitionNudge:
        append(t, EventKind::RevealOffered, Json::object(), at);
        s.phase = TrialPhase::AwaitingRevealChoice;
        break;
    case Modality::HumanOnly:
        append(t, EventKind::FinalDecision, option_payload(option), at);
        s.phase = TrialPhase::Finalized;
        break;
    default:
        reject(state, "initial decision");
    }
    return s;
}

TrialState submit_reveal_choice(const TrialState& state, bool want_reveal, Timestamp at)
{
    if (state.phase != TrialPhase::AwaitingRevealChoice ||
        state.transcript.modality != Modality::MetacognitionNudge)
        reject(state, "reveal choice");

    TrialState s = state;
    auto& t = s.transcript;
    const auto initial = t.initial_option();
    append(t, EventKind::RevealRequested, Json{{"reveal", want_reveal}}, at);
    if (want_reveal) {
        append(t, EventKind::RecommendationShown, recommendation_payload(t, initial), at);
        s.phase = TrialPhase::RecommendationVisible;
    } else {
        append(t, EventKind::FinalDecision, option_payload(*initial), at);
        s.phase = TrialPhase::Finalized;
    }
    return s;
}

TrialState submit_final(const TrialState& state, OptionIndex option, Timestamp at)
{
    if (state.phase != TrialPhase::RecommendationVisible)
        reject(state, "final decision");
    check_option(state, option);

    TrialState s = state;
    append(s.transcript, EventKind::FinalDecision, option_payload(option), at);
    s.phase = TrialPhase::Finalized;
    return s;
}

// ---------------------------------------------------------------------------
// replay

namespace {

[[noreturn]] void corrupt(const InteractionTranscript& t, const std::string& why)
{
    throw ProtocolError("trial " + t.trial_id + ": " + why);
}

} // namespace

TrialPhase replay(const InteractionTranscript& recorded)
{
    const auto& events = recorded.events;
    if (events.empty())
        corrupt(recorded, "empty transcript");
    for (std::size_t i = 0; i < events.size(); ++i) {
        if (events[i].sequence_no != i)
            corrupt(recorded, "sequence number " + std::to_string(events[i].sequence_no) +
                                  " at position " + std::to_string(i));
        if (i > 0 && events[i].wall_time < events[i - 1].wall_time)
            corrupt(recorded, "wall time goes backwards at sequence " + std::to_string(i));
    }
    if (events.front().kind != EventKind::TaskShown)
        corrupt(recorded, "first event is " + std::string(to_string(events.front().kind)));

    TrialState state;
    try {
        state = start_trial(recorded.trial_id, recorded.modality, recorded.instance,
                            recorded.recommendation, recorded.context, events.front().wall_time);
    } catch (const std::exception& e) {
        corrupt(recorded, e.what());
    }

    // false when the log ends part-way through what one step emits (a crash
    // between writes): the trial is then cut off, not corrupt
    auto check_emitted = [&](std::size_t from) {
        const auto& produced = state.transcript.events;
        for (std::size_t i = from; i < produced.size(); ++i) {
            if (i >= events.size())
                return false;
            if (events[i].kind != produced[i].kind || events[i].payload != produced[i].payload)
                corrupt(recorded, "expected " + std::string(to_string(produced[i].kind)) +
                                      " at sequence " + std::to_string(i) + ", found " +
                                      std::string(to_string(events[i].kind)));
        }
        return true;
    };
    if (!check_emitted(0))
        return TrialPhase::Assigned;

    while (state.transcript.events.size() < events.size()) {
        const std::size_t i = state.transcript.events.size();
        const Event& e = events[i];
        const TrialPhase before = state.phase;
        try {
            switch (e.kind) {
            case EventKind::InitialDecision:
                state = submit_initial(state, e.payload.at("option").get<OptionIndex>(), e.wall_time);
                break;
            case EventKind::RevealRequested:
                state = submit_reveal_choice(state, e.payload.at("reveal").get<bool>(), e.wall_time);
                break;
            case EventKind::FinalDecision:
                state = submit_final(state, e.payload.at("option").get<OptionIndex>(), e.wall_time);
                break;
            default:
                corrupt(recorded, "unexpected " + std::string(to_string(e.kind)) +
                                      " at sequence " + std::to_string(i));
            }
        } catch (const ProtocolError& err) {
            if (std::string_view(err.what()).starts_with("trial " + recorded.trial_id + ": "))
                throw;
            corrupt(recorded, err.what());
        } catch (const std::exception& err) {
            corrupt(recorded, err.what());
        }
        if (!check_emitted(i))
            return before;
    }
    return state.phase;
}

TrialOutcome outcome_of(const InteractionTranscript& t)
{
    const auto final_option = t.final_option();
    if (!final_option)
        throw ValidationError("trial " + t.trial_id + " is not finalized");
    TrialOutcome o;
    o.trial_id = t.trial_id;
    o.modality = t.modality;
    o.final_option = *final_option;
    o.correct = *final_option == t.instance.best_option;
    if (t.modality != Modality::HumanOnly)
        o.machine_option = t.machine_option();
    if (records_initial_decision(t.modality))
        o.human_initial_option = t.initial_option();
    if (t.modality == Modality::MetacognitionNudge)
        o.reveal_requested = t.reveal_requested();
    o.elapsed_steps = t.events.empty() ? 0 : t.events.size() - 1;
    return o;
}

// ---------------------------------------------------------------------------
// serialization

Json event_to_json(const Event& e)
{
    return Json{{"sequence_no", e.sequence_no},
                {"wall_time", format_timestamp(e.wall_time)},
                {"kind", std::string(to_string(e.kind))},
                {"payload", e.payload}};
}

Event event_from_json(const Json& j)
{
    Event e;
    e.sequence_no = j.at("sequence_no").get<std::uint64_t>();
    e.wall_time = parse_timestamp(j.at("wall_time").get<std::string>());
    e.kind = parse_event_kind(j.at("kind").get<std::string>());
    e.payload = j.value("payload", Json::object());
    return e;
}

Json transcript_to_json(const InteractionTranscript& t, bool redact_hidden)
{
    Json events = Json::array();
    for (const auto& e : t.events) {
        Json ej = event_to_json(e);
        if (redact_hidden && e.kind == EventKind::TaskShown)
            ej["payload"].erase("assignment");
        events.push_back(std::move(ej));
    }
    return Json{{"trial_id", t.trial_id},
                {"modality", std::string(to_string(t.modality))},
                {"events", std::move(events)}};
}

InteractionTranscript transcript_from_events(std::string trial_id, std::vector<Event> events)
{
    InteractionTranscript t;
    t.trial_id = std::move(trial_id);
    if (events.empty() || events.front().kind != EventKind::TaskShown)
        throw ProtocolError("trial " + t.trial_id + ": transcript does not start with task_shown");
    try {
        const Json& p = events.front().payload;
        t.modality = parse_modality(p.at("modality").get<std::string>());
        const Json& task = p.at("task");
        const Json& a = p.at("assignment");
        t.instance.instance_id = task.at("instance_id").get<std::string>();
        t.instance.options = task.at("options").get<std::vector<std::vector<double>>>();
        t.instance.true_utilities = a.at("true_utilities").get<std::vector<double>>();
        t.instance.best_option = a.at("best_option").get<OptionIndex>();
        t.context.arm = a.at("arm").get<std::string>();
        t.context.stage = parse_trial_stage(a.at("stage").get<std::string>());
        t.context.index = a.at("index").get<std::uint64_t>();
        t.context.explored = a.at("explored").get<bool>();
        t.context.outcome_feedback = a.at("outcome_feedback").get<bool>();
        t.context.protocol = a.at("protocol").get<ProtocolOptions>();
        if (a.contains("cell"))
            t.context.cell = Cell::parse_key(a.at("cell").get<std::string>());
        if (a.contains("recommendation"))
            t.recommendation = a.at("recommendation").get<Recommendation>();
    } catch (const Json::exception& e) {
        throw ProtocolError("trial " + t.trial_id + ": malformed task_shown payload: " + e.what());
    } catch (const ValidationError& e) {
        throw ProtocolError("trial " + t.trial_id + ": malformed task_shown payload: " + e.what());
    }
    t.events = std::move(events);
    return t;
}

void to_json(Json& j, const ProtocolOptions& o)
{
    j = Json{{"show_confidence_under_system2", o.show_confidence_under_system2},
             {"selection",
              {{"enabled", o.selection.enabled},
               {"strategy", std::string(to_string(o.selection.strategy))},
               {"epsilon", o.selection.epsilon}}}};
}

void from_json(const Json& j, ProtocolOptions& o)
{
    ProtocolOptions out;
    out.show_confidence_under_system2 =
        j.value("show_confidence_under_system2", out.show_confidence_under_system2);
    if (j.contains("selection")) {
        const Json& s = j.at("selection");
        out.selection.enabled = s.value("enabled", out.selection.enabled);
        out.selection.strategy =
            parse_selection_strategy(s.value("strategy", std::string("confirm")));
        out.selection.epsilon = s.value("epsilon", out.selection.epsilon);
        if (!(out.selection.epsilon >= 0.0))
            throw ValidationError("selection epsilon must be non-negative");
    }
    o = out;
}

} // namespace fascai
