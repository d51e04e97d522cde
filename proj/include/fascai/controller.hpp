#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "fascai/core.hpp"
#include "fascai/records.hpp"
#include "fascai/rng.hpp"

namespace fascai {

struct FeedbackConfig {
    bool enabled = false;
    double learning_rate = 0.2;   // EMA step, in (0, 1]
    double exploration = 0.0;     // probability of exploring a random allowed modality, in [0, 1)
    double switch_margin = 0.1;   // EMA lead needed before the table entry changes
    std::size_t min_samples = 5;  // observations both modalities need before a switch

    void validate() const;
};

struct ModalityStats {
    double ema = 0.0;
    std::size_t count = 0;
};

using CellFeedback = std::array<ModalityStats, 5>;

struct ControllerState {
    AllocationTable table;
    ValueProfile profile;
    ComparisonPolicy policy;
    ConfidenceThresholds thresholds;
    FeedbackConfig feedback_config;
    std::array<CellFeedback, kCellCount> feedback{};

    // Table from the profile's preset; validates every component.
    static ControllerState make(ValueProfile profile, ComparisonPolicy policy = {},
                                ConfidenceThresholds thresholds = {},
                                FeedbackConfig feedback = {});
    static ControllerState make(AllocationTable table, ValueProfile profile,
                                ComparisonPolicy policy = {}, ConfidenceThresholds thresholds = {},
                                FeedbackConfig feedback = {});

    const ModalityStats& stats(Cell c, Modality m) const
    {
        return feedback[c.index()][static_cast<std::size_t>(m)];
    }
    std::vector<Modality> allowed_modalities() const;
    void validate() const;
};

struct ModalitySelection {
    Modality modality = Modality::HumanOnly;
    Cell cell;
    bool explored = false;
};

ModalitySelection select_modality(const ControllerState& state, double rec_confidence,
                                  const TrackRecord& human, const TrackRecord& machine, Rng& rng);

struct ValueScores {
    double decision_quality = 0.0;
    double agency = 0.0;
    double upskilling = 0.0;
    double speed = 0.0;
};

// Agency: HumanOnly 1, MachineOnly 0; nudged trials score 1 when the final
// decision deviates from the machine or the human committed to an initial
// decision first, else 0 (System 1 adoption).
ValueScores score_trial(const TrialOutcome& outcome, std::optional<double> pre_post_skill_delta,
                        std::size_t elapsed_steps, std::size_t step_budget);

double weighted_reward(const ValueProfile& profile, const ValueScores& scores);

struct FeedbackResult {
    ControllerState state;
    bool applied = false;
    std::optional<Modality> switched_to;
    std::string diagnostic;
};

FeedbackResult apply_feedback(const ControllerState& state, Cell cell, Modality modality,
                              const ValueScores& scores);

// Controller block of the config file.
struct ControllerConfig {
    AllocationTable table;
    ValueProfile profile;
    ComparisonPolicy policy;
    ConfidenceThresholds thresholds;
    FeedbackConfig feedback;
    std::size_t window_size = 50;

    ControllerState make_state() const;
};

void to_json(Json& j, const FeedbackConfig& f);
void from_json(const Json& j, FeedbackConfig& f);
void to_json(Json& j, const ControllerConfig& c);
// Accepts either {"preset": name} or an explicit {"table": {...}}; without
// either the table follows the value profile.
void from_json(const Json& j, ControllerConfig& c);

} // namespace fascai
