#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fascai/cogmodel.hpp"
#include "fascai/controller.hpp"
#include "fascai/environment.hpp"
#include "fascai/metrics.hpp"
#include "fascai/protocol.hpp"

namespace fascai {

enum class ArmKind {
    Fascai,          // controller-driven modality selection
    HumanOnly,       // human-only baseline
    MachineOnly,     // machine-only baseline
    FixedModality,   // one modality for every collaboration trial (e.g. reveal-timing control)
};

std::string_view to_string(ArmKind k);
ArmKind parse_arm_kind(std::string_view s);

struct ArmConfig {
    std::string name;
    ArmKind kind = ArmKind::Fascai;
    std::optional<Modality> modality; // FixedModality only

    Modality fixed_modality() const;
};

struct PhaseCounts {
    std::size_t pre_test = 0;
    std::size_t collaboration = 1000;
    std::size_t post_test = 0;
};

struct ExperimentConfig {
    std::uint64_t seed = 1;
    PhaseCounts phases;
    ControllerConfig controller;
    HumanParams human;
    SyntheticSolverParams solver;
    TaskParams task;
    ProtocolOptions protocol;
    std::vector<ArmConfig> arms = {{"fascai", ArmKind::Fascai, std::nullopt},
                                   {"human_only_baseline", ArmKind::HumanOnly, std::nullopt},
                                   {"machine_only_baseline", ArmKind::MachineOnly, std::nullopt}};
    // Show the participant the correct option after each collaboration trial.
    bool outcome_feedback = false;
    std::size_t step_budget = 6;

    std::size_t trial_count() const
    {
        return phases.pre_test + phases.collaboration + phases.post_test;
    }
    void validate() const;
    MetricsParams metrics_params() const;
};

void to_json(Json& j, const ExperimentConfig& c);
void from_json(const Json& j, ExperimentConfig& c);

// Learning exposure a finished collaboration trial gives its human: watching a
// correct machine-only decision, or ground-truth feedback after a wrong final
// decision when outcome feedback is on.
LearningExposure exposure_of(const InteractionTranscript& t);

struct ArmRun {
    std::string arm;
    std::vector<InteractionTranscript> transcripts;
    HumanState final_human;
    ControllerState final_controller;
    std::size_t exposures = 0;
};

// Simulates one arm. Trial g of every arm uses the same task, solver and
// human random streams, so arms are paired on identical tasks.
ArmRun run_arm(const ExperimentConfig& cfg, const ArmConfig& arm);

struct ExperimentResult {
    std::vector<ArmRun> arms;
    MetricsReport report;

    std::vector<InteractionTranscript> transcripts() const;
};

ExperimentResult run_experiment(const ExperimentConfig& cfg);

std::string simulation_session_id(const std::string& arm);

} // namespace fascai
