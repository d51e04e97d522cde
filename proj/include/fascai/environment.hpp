#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fascai/core.hpp"
#include "fascai/rng.hpp"

namespace fascai {

// A k-option choice task. Utilities are hidden from the deciders and used
// only to score decisions.
struct ProblemInstance {
    std::string instance_id;
    std::vector<std::vector<double>> options; // k feature vectors of dimension d
    std::vector<double> true_utilities;
    OptionIndex best_option = 0;

    std::size_t option_count() const { return true_utilities.size(); }
};

struct TaskParams {
    std::size_t option_count = 2;
    std::size_t feature_dim = 3;
    double utility_gap = 0.0;

    void validate() const;
};

// Utilities are i.i.d. Uniform[0, 1); if gap > 0 the maximum is lifted to
// exactly (runner-up + gap) whenever it is closer than that. Features are
// i.i.d. Uniform[-1, 1). Ties in the argmax go to the lowest index.
ProblemInstance generate_instance(std::uint64_t seed, std::size_t k, std::size_t d,
                                  double utility_gap);
ProblemInstance generate_instance(Rng& rng, const TaskParams& params, std::string instance_id);

OptionIndex argmax_lowest(const std::vector<double>& values);

struct Disclosure {
    ConfidenceBin confidence_level = ConfidenceBin::Low;
    double machine_accuracy = 0.0;
    std::size_t sample_count = 0;
};

struct Recommendation {
    OptionIndex option = 0;
    double confidence = 0.0;
    std::vector<double> estimated_utilities;
    Disclosure disclosure;
};

struct SyntheticSolverParams {
    double accuracy = 0.8;
    double calibration = 1.0;

    void validate() const;
};

// Pluggable recommender. Implementations fill option, confidence and
// estimated utilities; the disclosure block is attached by the caller from
// the machine's track record.
class Solver {
public:
    virtual ~Solver() = default;
    virtual Recommendation recommend(const ProblemInstance& instance, Rng& rng) const = 0;
};

// Confidence scheme:
//   confidence = clamp(0.5 + 0.15 * calibration * s + 0.15 * Z, 0, 1)
// with s = +1 when the recommendation is correct, -1 otherwise, and Z a
// standard normal draw. calibration = 0 makes confidence independent of
// correctness.
inline constexpr double kConfidenceBase = 0.5;
inline constexpr double kConfidenceSignalScale = 0.15;
inline constexpr double kConfidenceNoise = 0.15;
// Estimated utilities: true utility + N(0, kEstimateNoise^2) for the other
// options; the recommended option sits kEstimateMarginScale * confidence
// above the best of them.
inline constexpr double kEstimateNoise = 0.1;
inline constexpr double kEstimateMarginScale = 0.1;

Recommendation synthetic_recommend(const ProblemInstance& instance,
                                   const SyntheticSolverParams& params, Rng& rng);

class SyntheticSolver final : public Solver {
public:
    explicit SyntheticSolver(SyntheticSolverParams params);
    Recommendation recommend(const ProblemInstance& instance, Rng& rng) const override;
    const SyntheticSolverParams& params() const { return params_; }

private:
    SyntheticSolverParams params_;
};

enum class SelectionStrategy { Confirm, Challenge };

std::string_view to_string(SelectionStrategy s);
SelectionStrategy parse_selection_strategy(std::string_view s);

// Picks the option to present. A clear winner (better than every other
// option by more than epsilon) is always returned; among comparable options
// Confirm keeps the human's pick and Challenge offers the best alternative.
OptionIndex select_recommendation(const std::vector<double>& estimated_utilities, double epsilon,
                                  SelectionStrategy strategy,
                                  std::optional<OptionIndex> human_initial);

void to_json(Json& j, const ProblemInstance& inst);
void from_json(const Json& j, ProblemInstance& inst);
void to_json(Json& j, const Recommendation& rec);
void from_json(const Json& j, Recommendation& rec);
void to_json(Json& j, const Disclosure& d);
void from_json(const Json& j, Disclosure& d);

} // namespace fascai
