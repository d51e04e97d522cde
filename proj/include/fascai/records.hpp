#pragma once

#include <array>
#include <cstddef>
#include <deque>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fascai/core.hpp"

namespace fascai {

// Rolling correctness history of one decision maker.
class TrackRecord {
public:
    explicit TrackRecord(std::string agent_id = {}, std::size_t window_size = 50);

    static TrackRecord restore(std::string agent_id, std::size_t window_size,
                               const std::vector<bool>& window, std::size_t total_count);

    // Value-style transition: returns the record with `correct` appended.
    TrackRecord recorded(bool correct) const;
    void record(bool correct);

    const std::string& agent_id() const { return agent_id_; }
    std::size_t window_size() const { return window_size_; }
    std::size_t window_length() const { return window_.size(); }
    std::size_t correct_in_window() const { return correct_in_window_; }
    std::size_t total_count() const { return total_count_; }
    const std::deque<bool>& window() const { return window_; }

    // Empty window has no accuracy.
    std::optional<double> accuracy() const;

private:
    std::string agent_id_;
    std::size_t window_size_;
    std::deque<bool> window_;
    std::size_t correct_in_window_ = 0;
    std::size_t total_count_ = 0;
};

enum class ComparisonMode { MeanOnly, SignificanceTest };

std::string_view to_string(ComparisonMode m);
ComparisonMode parse_comparison_mode(std::string_view s);

struct ComparisonPolicy {
    ComparisonMode mode = ComparisonMode::MeanOnly;
    double alpha_sig = 0.05;
    std::size_t min_samples = 10;

    void validate() const;
};

// Pooled two-proportion z statistic for (machine - human); 0 when the pooled
// variance vanishes (both samples all-correct or all-wrong).
double two_proportion_z(std::size_t human_correct, std::size_t human_n,
                        std::size_t machine_correct, std::size_t machine_n);

// One-sided upper critical value z_{1 - alpha} of the standard normal.
double normal_upper_critical(double alpha);

// Cold start (fewer than min_samples in either window) and ties resolve to
// HumanBetter.
PerformanceComparison compare(const TrackRecord& human, const TrackRecord& machine,
                              const ComparisonPolicy& policy);

struct CalibrationReport {
    double brier = 0.0;
    std::array<std::optional<double>, 3> bin_accuracy;
    std::array<std::size_t, 3> bin_count{};
};

CalibrationReport calibration_report(const std::vector<std::pair<double, bool>>& pairs,
                                     const ConfidenceThresholds& thresholds = {});

void to_json(Json& j, const TrackRecord& tr);
void from_json(const Json& j, TrackRecord& tr);
void to_json(Json& j, const ComparisonPolicy& p);
void from_json(const Json& j, ComparisonPolicy& p);

} // namespace fascai
