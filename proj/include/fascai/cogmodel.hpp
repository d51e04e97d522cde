#pragma once

#include "fascai/core.hpp"
#include "fascai/environment.hpp"
#include "fascai/rng.hpp"

namespace fascai {

// Synthetic human decision maker.
struct HumanParams {
    double skill = 0.7;              // solo accuracy when deliberating
    double fast_skill = 0.55;        // solo accuracy of a fast, heuristic decision
    double anchoring = 0.8;          // P(adopt an immediately shown recommendation)
    double reconsider_trust = 0.5;   // P(switch to a conflicting recommendation after deliberating)
    double metacog_calibration = 0.8; // P(self-confidence signal matches actual correctness)
    double reveal_threshold = 0.5;   // ask for help when self-confidence falls below this
    double learning_rate = 0.0;
    double skill_ceiling = 0.9;

    void validate() const;
};

// Self-confidence draws: a "my answer is right" signal yields Uniform[0.6, 1],
// a "my answer is wrong" signal yields Uniform[0, 0.4]. Any reveal threshold
// strictly inside (0.4, 0.6) therefore follows the signal exactly.
inline constexpr double kSelfConfidenceLowMax = 0.4;
inline constexpr double kSelfConfidenceHighMin = 0.6;

struct HumanState {
    HumanParams params;
    double current_skill = 0.0;

    explicit HumanState(HumanParams p);
    HumanState() : HumanState(HumanParams{}) {}
};

enum class LearningExposure { None, ObservedCorrectMachine, FeedbackOnOwnError };

std::string_view to_string(LearningExposure e);

OptionIndex decide_solo(const HumanState& state, const ProblemInstance& inst, bool deliberate,
                        Rng& rng);
OptionIndex respond_system1(const HumanState& state, const ProblemInstance& inst,
                            OptionIndex recommended, Rng& rng);
OptionIndex respond_system2(const HumanState& state, const ProblemInstance& inst,
                            OptionIndex initial, OptionIndex recommended, Rng& rng);
// Returns whether the human asks to see the machine's recommendation.
bool respond_metacog(const HumanState& state, const ProblemInstance& inst, OptionIndex initial,
                     Rng& rng);
HumanState learn(const HumanState& state, LearningExposure exposure);

void to_json(Json& j, const HumanParams& p);
void from_json(const Json& j, HumanParams& p);

} // namespace fascai
