#include "fascai/environment.hpp"

#include <algorithm>
#include <cmath>

#include "fascai/errors.hpp"

namespace fascai {

void TaskParams::validate() const
{
    if (option_count < 2)
        throw ValidationError("a task needs at least two options");
    if (feature_dim < 1)
        throw ValidationError("feature dimension must be at least one");
    if (!(utility_gap >= 0.0) || !std::isfinite(utility_gap))
        throw ValidationError("utility gap must be finite and non-negative");
}

OptionIndex argmax_lowest(const std::vector<double>& values)
{
    if (values.empty())
        throw ValidationError("argmax of an empty list");
    OptionIndex best = 0;
    for (OptionIndex i = 1; i < values.size(); ++i)
        if (values[i] > values[best])
            best = i;
    return best;
}

ProblemInstance generate_instance(Rng& rng, const TaskParams& params, std::string instance_id)
{
    params.validate();
    ProblemInstance inst;
    inst.instance_id = std::move(instance_id);
    inst.options.resize(params.option_count);
    for (auto& features : inst.options) {
        features.resize(params.feature_dim);
        for (double& f : features)
            f = rng.uniform(-1.0, 1.0);
    }
    inst.true_utilities.resize(params.option_count);
    for (double& u : inst.true_utilities)
        u = rng.uniform();

    OptionIndex best = argmax_lowest(inst.true_utilities);
    if (params.utility_gap > 0.0) {
        double runner_up = -INFINITY;
        for (OptionIndex i = 0; i < inst.true_utilities.size(); ++i)
            if (i != best)
                runner_up = std::max(runner_up, inst.true_utilities[i]);
        double& top = inst.true_utilities[best];
        if (top - runner_up < params.utility_gap)
            top = runner_up + params.utility_gap;
        // rounding can leave the difference one ulp short
        while (top - runner_up < params.utility_gap)
            top = std::nextafter(top, INFINITY);
    }
    inst.best_option = argmax_lowest(inst.true_utilities);
    return inst;
}

ProblemInstance generate_instance(std::uint64_t seed, std::size_t k, std::size_t d,
                                  double utility_gap)
{
    Rng rng(seed);
    return generate_instance(rng, TaskParams{k, d, utility_gap},
                             "instance-" + std::to_string(seed));
}

void SyntheticSolverParams::validate() const
{
    if (!(accuracy >= 0.0 && accuracy <= 1.0))
        throw ValidationError("solver accuracy must lie in [0, 1]");
    if (!(calibration >= 0.0) || !std::isfinite(calibration))
        throw ValidationError("solver calibration must be finite and non-negative");
}

Recommendation synthetic_recommend(const ProblemInstance& instance,
                                   const SyntheticSolverParams& params, Rng& rng)
{
    params.validate();
    const std::size_t k = instance.option_count();
    Recommendation rec;

    const bool correct = rng.bernoulli(params.accuracy);
    if (correct) {
        rec.option = instance.best_option;
    } else {
        OptionIndex pick = rng.index(k - 1);
        if (pick >= instance.best_option)
            ++pick;
        rec.option = pick;
    }

    const double signal = correct ? 1.0 : -1.0;
    const double raw = kConfidenceBase + kConfidenceSignalScale * params.calibration * signal +
                       kConfidenceNoise * rng.normal();
    rec.confidence = std::clamp(raw, 0.0, 1.0);

    rec.estimated_utilities.resize(k);
    double best_other = -INFINITY;
    for (OptionIndex i = 0; i < k; ++i) {
        if (i == rec.option)
            continue;
        rec.estimated_utilities[i] = instance.true_utilities[i] + kEstimateNoise * rng.normal();
        best_other = std::max(best_other, rec.estimated_utilities[i]);
    }
    rec.estimated_utilities[rec.option] = best_other + kEstimateMarginScale * rec.confidence;

    rec.disclosure.confidence_level = bin_confidence(rec.confidence, ConfidenceThresholds{});
    return rec;
}

SyntheticSolver::SyntheticSolver(SyntheticSolverParams params) : params_(params)
{
    params_.validate();
}

Recommendation SyntheticSolver::recommend(const ProblemInstance& instance, Rng& rng) const
{
    return synthetic_recommend(instance, params_, rng);
}

std::string_view to_string(SelectionStrategy s)
{
    return s == SelectionStrategy::Confirm ? "confirm" : "challenge";
}

SelectionStrategy parse_selection_strategy(std::string_view s)
{
    if (s == "confirm")
        return SelectionStrategy::Confirm;
    if (s == "challenge")
        return SelectionStrategy::Challenge;
    throw ValidationError("unknown selection strategy '" + std::string(s) + "'");
}

OptionIndex select_recommendation(const std::vector<double>& utilities, double epsilon,
                                  SelectionStrategy strategy,
                                  std::optional<OptionIndex> human_initial)
{
    if (utilities.empty())
        throw ValidationError("cannot select from an empty list of utilities");
    if (!(epsilon >= 0.0))
        throw ValidationError("epsilon must be non-negative");

    const OptionIndex top = argmax_lowest(utilities);
    const double floor = utilities[top] - epsilon;
    auto acceptable = [&](OptionIndex i) { return utilities[i] >= floor; };

    bool clear_winner = true;
    for (OptionIndex i = 0; i < utilities.size(); ++i)
        if (i != top && acceptable(i))
            clear_winner = false;
    if (clear_winner || !human_initial)
        return top;

    const OptionIndex initial = *human_initial;
    if (strategy == SelectionStrategy::Confirm)
        return (initial < utilities.size() && acceptable(initial)) ? initial : top;

    std::optional<OptionIndex> alternative;
    for (OptionIndex i = 0; i < utilities.size(); ++i) {
        if (i == initial || !acceptable(i))
            continue;
        if (!alternative || utilities[i] > utilities[*alternative])
            alternative = i;
    }
    return alternative.value_or(top);
}

void to_json(Json& j, const ProblemInstance& inst)
{
    j = Json{{"instance_id", inst.instance_id},
             {"options", inst.options},
             {"true_utilities", inst.true_utilities},
             {"best_option", inst.best_option}};
}

void from_json(const Json& j, ProblemInstance& inst)
{
    inst.instance_id = j.at("instance_id").get<std::string>();
    inst.options = j.at("options").get<std::vector<std::vector<double>>>();
    inst.true_utilities = j.at("true_utilities").get<std::vector<double>>();
    inst.best_option = j.at("best_option").get<OptionIndex>();
    if (inst.true_utilities.size() < 2 || inst.options.size() != inst.true_utilities.size() ||
        inst.best_option >= inst.true_utilities.size())
        throw ValidationError("malformed problem instance '" + inst.instance_id + "'");
}

void to_json(Json& j, const Disclosure& d)
{
    j = Json{{"confidence_level", std::string(to_string(d.confidence_level))},
             {"machine_accuracy", d.machine_accuracy},
             {"sample_count", d.sample_count}};
}

void from_json(const Json& j, Disclosure& d)
{
    d.confidence_level = parse_confidence_bin(j.at("confidence_level").get<std::string>());
    d.machine_accuracy = j.at("machine_accuracy").get<double>();
    d.sample_count = j.at("sample_count").get<std::size_t>();
}

void to_json(Json& j, const Recommendation& rec)
{
    j = Json{{"option", rec.option},
             {"confidence", rec.confidence},
             {"estimated_utilities", rec.estimated_utilities},
             {"disclosure", rec.disclosure}};
}

void from_json(const Json& j, Recommendation& rec)
{
    rec.option = j.at("option").get<OptionIndex>();
    rec.confidence = j.at("confidence").get<double>();
    rec.estimated_utilities = j.at("estimated_utilities").get<std::vector<double>>();
    rec.disclosure = j.at("disclosure").get<Disclosure>();
}

} // namespace fascai
