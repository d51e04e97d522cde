#include "fascai/controller.hpp"

#include <algorithm>
#include <cmath>

#include "fascai/errors.hpp"

namespace fascai {

void FeedbackConfig::validate() const
{
    if (!(learning_rate > 0.0 && learning_rate <= 1.0))
        throw ValidationError("feedback learning rate must lie in (0, 1]");
    if (!(exploration >= 0.0 && exploration < 1.0))
        throw ValidationError("feedback exploration must lie in [0, 1)");
    if (!(switch_margin >= 0.0) || !std::isfinite(switch_margin))
        throw ValidationError("feedback switch margin must be non-negative");
}

ControllerState ControllerState::make(ValueProfile profile, ComparisonPolicy policy,
                                      ConfidenceThresholds thresholds, FeedbackConfig feedback)
{
    return make(default_table(profile), profile, policy, thresholds, feedback);
}

ControllerState ControllerState::make(AllocationTable table, ValueProfile profile,
                                      ComparisonPolicy policy, ConfidenceThresholds thresholds,
                                      FeedbackConfig feedback)
{
    ControllerState s;
    s.table = std::move(table);
    s.profile = profile;
    s.policy = policy;
    s.thresholds = thresholds;
    s.feedback_config = feedback;
    s.validate();
    return s;
}

std::vector<Modality> ControllerState::allowed_modalities() const
{
    std::vector<Modality> out;
    for (Modality m : kAllModalities)
        if (profile.allows(m))
            out.push_back(m);
    return out;
}

void ControllerState::validate() const
{
    policy.validate();
    thresholds.validate();
    feedback_config.validate();
    for (Modality m : table.entries())
        if (!profile.allows(m))
            throw ValidationError("allocation table uses " + std::string(to_string(m)) +
                                  ", which the value profile rules out");
}

ModalitySelection select_modality(const ControllerState& state, double rec_confidence,
                                  const TrackRecord& human, const TrackRecord& machine, Rng& rng)
{
    ModalitySelection sel;
    sel.cell = Cell{compare(human, machine, state.policy),
                    bin_confidence(rec_confidence, state.thresholds)};
    sel.modality = state.table.at(sel.cell);

    const auto& fb = state.feedback_config;
    if (fb.enabled && fb.exploration > 0.0 && rng.bernoulli(fb.exploration)) {
        const auto allowed = state.allowed_modalities();
        sel.modality = allowed[rng.index(allowed.size())];
        sel.explored = true;
    }
    return sel;
}

ValueScores score_trial(const TrialOutcome& outcome, std::optional<double> pre_post_skill_delta,
                        std::size_t elapsed_steps, std::size_t step_budget)
{
    if (step_budget == 0)
        throw ValidationError("step budget must be positive");

    ValueScores s;
    s.decision_quality = outcome.correct ? 1.0 : 0.0;

    switch (outcome.modality) {
    case Modality::HumanOnly: s.agency = 1.0; break;
    case Modality::MachineOnly: s.agency = 0.0; break;
    default: {
        const bool deviated =
            outcome.machine_option && outcome.final_option != *outcome.machine_option;
        const bool deliberated = outcome.human_initial_option.has_value();
        s.agency = (deviated || deliberated) ? 1.0 : 0.0;
    }
    }

    s.upskilling = pre_post_skill_delta ? std::clamp(*pre_post_skill_delta, 0.0, 1.0) : 0.0;
    s.speed = std::clamp(1.0 - static_cast<double>(elapsed_steps) /
                                   static_cast<double>(step_budget),
                         0.0, 1.0);
    return s;
}

double weighted_reward(const ValueProfile& profile, const ValueScores& scores)
{
    const auto& w = profile.weights();
    return w.decision_quality * scores.decision_quality + w.agency * scores.agency +
           w.upskilling * scores.upskilling + w.speed * scores.speed;
}

FeedbackResult apply_feedback(const ControllerState& state, Cell cell, Modality modality,
                              const ValueScores& scores)
{
    FeedbackResult result{state, false, std::nullopt, {}};
    const auto& fb = state.feedback_config;
    if (!fb.enabled) {
        result.diagnostic = "feedback disabled; controller state unchanged";
        return result;
    }
    if (!state.profile.allows(modality)) {
        result.diagnostic = "modality " + std::string(to_string(modality)) +
                            " is not allowed by the value profile; ignored";
        return result;
    }

    ControllerState& next = result.state;
    auto& row = next.feedback[cell.index()];
    auto& observed = row[static_cast<std::size_t>(modality)];
    const double reward = weighted_reward(state.profile, scores);
    // the first observation seeds the average so it never leaves the range of observed rewards
    observed.ema = observed.count == 0 ? reward
                                       : (1.0 - fb.learning_rate) * observed.ema +
                                             fb.learning_rate * reward;
    ++observed.count;
    result.applied = true;

    const Modality current = next.table.at(cell);
    const auto& incumbent = row[static_cast<std::size_t>(current)];
    if (incumbent.count < fb.min_samples)
        return result;

    std::optional<Modality> best;
    for (Modality m : next.allowed_modalities()) {
        if (m == current)
            continue;
        const auto& challenger = row[static_cast<std::size_t>(m)];
        if (challenger.count < fb.min_samples || !(challenger.ema > incumbent.ema + fb.switch_margin))
            continue;
        if (!best || challenger.ema > row[static_cast<std::size_t>(*best)].ema)
            best = m;
    }
    if (best) {
        next.table.set(cell, *best);
        result.switched_to = best;
    }
    return result;
}

void to_json(Json& j, const FeedbackConfig& f)
{
    j = Json{{"enabled", f.enabled},
             {"learning_rate", f.learning_rate},
             {"exploration", f.exploration},
             {"switch_margin", f.switch_margin},
             {"min_samples", f.min_samples}};
}

void from_json(const Json& j, FeedbackConfig& f)
{
    FeedbackConfig out;
    out.enabled = j.value("enabled", out.enabled);
    out.learning_rate = j.value("learning_rate", out.learning_rate);
    out.exploration = j.value("exploration", out.exploration);
    out.switch_margin = j.value("switch_margin", out.switch_margin);
    out.min_samples = j.value("min_samples", out.min_samples);
    out.validate();
    f = out;
}

ControllerState ControllerConfig::make_state() const
{
    return ControllerState::make(table, profile, policy, thresholds, feedback);
}

void to_json(Json& j, const ControllerConfig& c)
{
    j = Json{{"table", c.table},         {"values", c.profile},
             {"policy", c.policy},       {"thresholds", c.thresholds},
             {"feedback", c.feedback},   {"window_size", c.window_size}};
}

void from_json(const Json& j, ControllerConfig& c)
{
    ControllerConfig out;
    if (j.contains("values"))
        out.profile = j.at("values").get<ValueProfile>();
    if (j.contains("table"))
        out.table = j.at("table").get<AllocationTable>();
    else if (j.contains("preset"))
        out.table = AllocationTable::preset(j.at("preset").get<std::string>());
    else
        out.table = default_table(out.profile);
    if (j.contains("policy"))
        out.policy = j.at("policy").get<ComparisonPolicy>();
    if (j.contains("thresholds"))
        out.thresholds = j.at("thresholds").get<ConfidenceThresholds>();
    if (j.contains("feedback"))
        out.feedback = j.at("feedback").get<FeedbackConfig>();
    out.window_size = j.value("window_size", out.window_size);
    if (out.window_size == 0)
        throw ValidationError("track record window must hold at least one result");
    out.make_state(); // validates the combination
    c = out;
}

} // namespace fascai
