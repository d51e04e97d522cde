#include "fascai/cogmodel.hpp"

#include "fascai/errors.hpp"

namespace fascai {

namespace {

bool unit(double v) { return v >= 0.0 && v <= 1.0; }

OptionIndex pick_wrong(const ProblemInstance& inst, Rng& rng)
{
    OptionIndex pick = rng.index(inst.option_count() - 1);
    if (pick >= inst.best_option)
        ++pick;
    return pick;
}

} // namespace

void HumanParams::validate() const
{
    if (!unit(skill) || !unit(fast_skill) || !unit(anchoring) || !unit(reconsider_trust) ||
        !unit(metacog_calibration) || !unit(reveal_threshold) || !unit(skill_ceiling))
        throw ValidationError("human parameters must lie in [0, 1]");
    if (!(learning_rate >= 0.0 && learning_rate < 1.0))
        throw ValidationError("human learning rate must lie in [0, 1)");
    if (!(fast_skill <= skill && skill <= skill_ceiling))
        throw ValidationError("human parameters must satisfy fast_skill <= skill <= skill_ceiling");
}

HumanState::HumanState(HumanParams p) : params(p), current_skill(p.skill)
{
    params.validate();
}

std::string_view to_string(LearningExposure e)
{
    switch (e) {
    case LearningExposure::None: return "none";
    case LearningExposure::ObservedCorrectMachine: return "observed_correct_machine";
    case LearningExposure::FeedbackOnOwnError: return "feedback_on_own_error";
    }
    return "?";
}

OptionIndex decide_solo(const HumanState& state, const ProblemInstance& inst, bool deliberate,
                        Rng& rng)
{
    const double p = deliberate ? state.current_skill : state.params.fast_skill;
    return rng.bernoulli(p) ? inst.best_option : pick_wrong(inst, rng);
}

OptionIndex respond_system1(const HumanState& state, const ProblemInstance& inst,
                            OptionIndex recommended, Rng& rng)
{
    if (rng.bernoulli(state.params.anchoring))
        return recommended;
    return decide_solo(state, inst, false, rng);
}

OptionIndex respond_system2(const HumanState& state, const ProblemInstance&, OptionIndex initial,
                            OptionIndex recommended, Rng& rng)
{
    if (recommended == initial)
        return initial;
    return rng.bernoulli(state.params.reconsider_trust) ? recommended : initial;
}

bool respond_metacog(const HumanState& state, const ProblemInstance& inst, OptionIndex initial,
                     Rng& rng)
{
    const bool actually_right = initial == inst.best_option;
    const bool feels_right =
        rng.bernoulli(state.params.metacog_calibration) ? actually_right : !actually_right;
    const double self_confidence = feels_right ? rng.uniform(kSelfConfidenceHighMin, 1.0)
                                               : rng.uniform(0.0, kSelfConfidenceLowMax);
    return self_confidence < state.params.reveal_threshold;
}

HumanState learn(const HumanState& state, LearningExposure exposure)
{
    if (exposure == LearningExposure::None)
        return state;
    HumanState next = state;
    next.current_skill += state.params.learning_rate *
                          (state.params.skill_ceiling - state.current_skill);
    return next;
}

void to_json(Json& j, const HumanParams& p)
{
    j = Json{{"skill", p.skill},
             {"fast_skill", p.fast_skill},
             {"anchoring", p.anchoring},
             {"reconsider_trust", p.reconsider_trust},
             {"metacog_calibration", p.metacog_calibration},
             {"reveal_threshold", p.reveal_threshold},
             {"learning_rate", p.learning_rate},
             {"skill_ceiling", p.skill_ceiling}};
}

void from_json(const Json& j, HumanParams& p)
{
    HumanParams out;
    out.skill = j.value("skill", out.skill);
    out.fast_skill = j.value("fast_skill", out.fast_skill);
    out.anchoring = j.value("anchoring", out.anchoring);
    out.reconsider_trust = j.value("reconsider_trust", out.reconsider_trust);
    out.metacog_calibration = j.value("metacog_calibration", out.metacog_calibration);
    out.reveal_threshold = j.value("reveal_threshold", out.reveal_threshold);
    out.learning_rate = j.value("learning_rate", out.learning_rate);
    out.skill_ceiling = j.value("skill_ceiling", out.skill_ceiling);
    out.validate();
    p = out;
}

} // namespace fascai
