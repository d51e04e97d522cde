#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fascai/core.hpp"
#include "fascai/protocol.hpp"
#include "fascai/records.hpp"

namespace fascai {

inline constexpr double kZ95 = 1.959963984540054;

struct Proportion {
    std::size_t successes = 0;
    std::size_t trials = 0;

    std::optional<double> rate() const;
};

struct Interval {
    double low = 0.0;
    double high = 0.0;
};

// Wilson score interval at 95%.
Interval wilson_interval(const Proportion& p);

struct DifferenceTest {
    double difference = 0.0; // a - b
    Interval ci;             // Wald interval at 95%
    double z = 0.0;          // pooled two-proportion statistic
    double p_value = 1.0;    // two-sided
    bool significant = false;
};

DifferenceTest compare_proportions(const Proportion& a, const Proportion& b, double alpha_sig);

struct MetricsParams {
    ConfidenceThresholds thresholds;
    double alpha_sig = 0.05;
};

struct AgencyMetrics {
    std::map<Modality, Proportion> deviation; // per nudge modality, over trials where the recommendation was shown
    Proportion opt_out;                       // pooled over all nudged trials with a shown recommendation
    Proportion reveal_request;                // over metacognition trials
    double mean_agency = 0.0;                 // agency value score averaged over the trials
};

AgencyMetrics agency_metrics(const std::vector<InteractionTranscript>& transcripts);

// Adoption (final == shown machine option) under immediate reveal minus
// adoption under delayed reveal.
double anchoring_effect(const std::vector<InteractionTranscript>& immediate,
                        const std::vector<InteractionTranscript>& delayed);

// Solo accuracy after minus before; both sets must be human-only trials.
double upskilling_delta(const std::vector<InteractionTranscript>& pre_test,
                        const std::vector<InteractionTranscript>& post_test);

struct UpskillingReport {
    Proportion pre;
    Proportion post;
    DifferenceTest delta; // post - pre
    std::size_t exposures = 0;
};

struct ArmMetrics {
    std::string arm;
    Proportion decision_quality;
    Interval decision_quality_ci;
    AgencyMetrics agency;
    std::map<Modality, std::size_t> modality_usage;
    std::size_t explored = 0;
    std::optional<UpskillingReport> upskilling;
    std::optional<CalibrationReport> calibration;
};

struct AnchoringReport {
    std::string immediate_arm;
    std::string delayed_arm;
    Proportion immediate_adoption;
    Proportion delayed_adoption;
    DifferenceTest effect;
};

struct ArmComparison {
    std::string arm;
    std::string baseline;
    DifferenceTest decision_quality; // arm - baseline
};

struct MetricsReport {
    std::vector<ArmMetrics> arms;
    std::optional<AnchoringReport> anchoring;
    std::vector<ArmComparison> comparisons;

    const ArmMetrics& arm(const std::string& name) const;
};

// Pure function of the transcripts: every number is recomputed from events.
// Arms appear in order of first appearance. Arms whose trials carry a
// controller cell are compared against every other arm; the anchoring effect
// uses the first all-System-1 arm against the first all-System-2 arm.
MetricsReport compute_metrics(const std::vector<InteractionTranscript>& transcripts,
                              const MetricsParams& params);

// Long-format CSV: arm,metric,value,ci_low,ci_high,n
std::string metrics_csv(const MetricsReport& report);
std::string metrics_summary(const MetricsReport& report);
Json metrics_json(const MetricsReport& report);

} // namespace fascai
