#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fascai/core.hpp"
#include "fascai/environment.hpp"

namespace fascai {

using Timestamp = std::chrono::sys_time<std::chrono::milliseconds>;

// ISO-8601 UTC with millisecond precision, e.g. 2024-01-01T00:00:00.000Z.
std::string format_timestamp(Timestamp t);
Timestamp parse_timestamp(std::string_view s);

enum class TrialPhase {
    Assigned,
    AwaitingInitialDecision,
    RecommendationVisible,
    AwaitingRevealChoice,
    Finalized,
};

enum class EventKind {
    TaskShown,
    RecommendationShown,
    InitialDecision,
    RevealOffered,
    RevealRequested,
    FinalDecision,
    MachineDecision,
};

std::string_view to_string(TrialPhase p);
std::string_view to_string(EventKind k);
EventKind parse_event_kind(std::string_view s);

enum class TrialStage { PreTest, Collaboration, PostTest, Live };

std::string_view to_string(TrialStage s);
TrialStage parse_trial_stage(std::string_view s);

struct Event {
    std::uint64_t sequence_no = 0;
    Timestamp wall_time{};
    EventKind kind = EventKind::TaskShown;
    Json payload = Json::object();
};

// Re-selection among comparable options once the human's initial decision is
// known (System 2 reveal and metacognition reveal only).
struct RecommendationSelection {
    bool enabled = false;
    SelectionStrategy strategy = SelectionStrategy::Confirm;
    double epsilon = 0.05;
};

struct ProtocolOptions {
    // Attach the confidence level to a System 2 reveal.
    bool show_confidence_under_system2 = false;
    RecommendationSelection selection;
};

// Assignment data recorded with the trial. It travels inside the TaskShown
// payload under "assignment" and must be redacted from anything a participant
// sees before the trial is finalized.
struct TrialContext {
    std::string arm;
    TrialStage stage = TrialStage::Live;
    std::uint64_t index = 0;
    std::optional<Cell> cell;
    bool explored = false;
    bool outcome_feedback = false;
    ProtocolOptions protocol;
};

struct InteractionTranscript {
    std::string trial_id;
    Modality modality = Modality::HumanOnly;
    TrialContext context;
    ProblemInstance instance;
    std::optional<Recommendation> recommendation;
    std::vector<Event> events;

    bool finalized() const;
    std::optional<OptionIndex> initial_option() const;
    std::optional<OptionIndex> final_option() const;     // FinalDecision or MachineDecision
    std::optional<OptionIndex> shown_machine_option() const;
    std::optional<bool> reveal_requested() const;
    bool recommendation_shown() const;
    // Option the machine stands behind: the one shown, else the original recommendation.
    std::optional<OptionIndex> machine_option() const;
};

struct TrialState {
    TrialPhase phase = TrialPhase::Assigned;
    InteractionTranscript transcript;
};

// Every recommendation-bearing modality needs `rec`; HumanOnly may pass one
// (it is recorded but never shown).
TrialState start_trial(std::string trial_id, Modality modality, ProblemInstance instance,
                       std::optional<Recommendation> rec, TrialContext context, Timestamp at);
TrialState submit_initial(const TrialState& state, OptionIndex option, Timestamp at);
TrialState submit_reveal_choice(const TrialState& state, bool want_reveal, Timestamp at);
TrialState submit_final(const TrialState& state, OptionIndex option, Timestamp at);

// Re-runs the state machine over the recorded human inputs and checks that
// every recorded event matches what the protocol would have emitted. Throws
// ProtocolError naming the trial on any violation; returns the phase reached.
// A log that stops part-way through the events of one step yields the phase
// before that step.
TrialPhase replay(const InteractionTranscript& transcript);

// Decision record of a finalized trial.
TrialOutcome outcome_of(const InteractionTranscript& transcript);

Json event_to_json(const Event& e);
Event event_from_json(const Json& j);

// Full transcript, or with hidden assignment data stripped.
Json transcript_to_json(const InteractionTranscript& t, bool redact_hidden = false);
InteractionTranscript transcript_from_events(std::string trial_id, std::vector<Event> events);

void to_json(Json& j, const ProtocolOptions& o);
void from_json(const Json& j, ProtocolOptions& o);

} // namespace fascai
