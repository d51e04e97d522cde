#include "fascai/records.hpp"

#include <cmath>

#include <boost/math/distributions/normal.hpp>

#include "fascai/errors.hpp"

namespace fascai {

TrackRecord::TrackRecord(std::string agent_id, std::size_t window_size)
    : agent_id_(std::move(agent_id)), window_size_(window_size)
{
    if (window_size_ == 0)
        throw ValidationError("track record window must hold at least one result");
}

void TrackRecord::record(bool correct)
{
    window_.push_back(correct);
    correct_in_window_ += correct ? 1 : 0;
    if (window_.size() > window_size_) {
        correct_in_window_ -= window_.front() ? 1 : 0;
        window_.pop_front();
    }
    ++total_count_;
}

TrackRecord TrackRecord::restore(std::string agent_id, std::size_t window_size,
                                 const std::vector<bool>& window, std::size_t total_count)
{
    TrackRecord tr(std::move(agent_id), window_size);
    if (window.size() > window_size)
        throw ValidationError("track record window longer than its size");
    if (total_count < window.size())
        throw ValidationError("track record total count smaller than its window");
    for (bool b : window)
        tr.record(b);
    tr.total_count_ = total_count;
    return tr;
}

TrackRecord TrackRecord::recorded(bool correct) const
{
    TrackRecord next = *this;
    next.record(correct);
    return next;
}

std::optional<double> TrackRecord::accuracy() const
{
    if (window_.empty())
        return std::nullopt;
    return static_cast<double>(correct_in_window_) / static_cast<double>(window_.size());
}

std::string_view to_string(ComparisonMode m)
{
    return m == ComparisonMode::MeanOnly ? "mean_only" : "significance_test";
}

ComparisonMode parse_comparison_mode(std::string_view s)
{
    if (s == "mean_only")
        return ComparisonMode::MeanOnly;
    if (s == "significance_test")
        return ComparisonMode::SignificanceTest;
    throw ValidationError("unknown comparison mode '" + std::string(s) + "'");
}

void ComparisonPolicy::validate() const
{
    if (!(alpha_sig > 0.0 && alpha_sig < 1.0))
        throw ValidationError("significance level must lie in (0, 1)");
}

double two_proportion_z(std::size_t human_correct, std::size_t human_n,
                        std::size_t machine_correct, std::size_t machine_n)
{
    if (human_n == 0 || machine_n == 0)
        throw ValidationError("two-proportion test needs non-empty samples");
    const double nh = static_cast<double>(human_n);
    const double nm = static_cast<double>(machine_n);
    const double ph = static_cast<double>(human_correct) / nh;
    const double pm = static_cast<double>(machine_correct) / nm;
    const double pooled = static_cast<double>(human_correct + machine_correct) / (nh + nm);
    const double variance = pooled * (1.0 - pooled) * (1.0 / nh + 1.0 / nm);
    if (!(variance > 0.0))
        return 0.0;
    return (pm - ph) / std::sqrt(variance);
}

double normal_upper_critical(double alpha)
{
    if (!(alpha > 0.0 && alpha < 1.0))
        throw ValidationError("significance level must lie in (0, 1)");
    return boost::math::quantile(boost::math::normal_distribution<double>(), 1.0 - alpha);
}

PerformanceComparison compare(const TrackRecord& human, const TrackRecord& machine,
                              const ComparisonPolicy& policy)
{
    policy.validate();
    const std::size_t min_n = std::max<std::size_t>(policy.min_samples, 1);
    if (human.window_length() < min_n || machine.window_length() < min_n)
        return PerformanceComparison::HumanBetter;

    if (policy.mode == ComparisonMode::MeanOnly)
        return *machine.accuracy() > *human.accuracy() ? PerformanceComparison::MachineBetter
                                                       : PerformanceComparison::HumanBetter;

    const double z = two_proportion_z(human.correct_in_window(), human.window_length(),
                                      machine.correct_in_window(), machine.window_length());
    return z > normal_upper_critical(policy.alpha_sig) ? PerformanceComparison::MachineBetter
                                                       : PerformanceComparison::HumanBetter;
}

CalibrationReport calibration_report(const std::vector<std::pair<double, bool>>& pairs,
                                     const ConfidenceThresholds& thresholds)
{
    if (pairs.empty())
        throw ValidationError("calibration report needs at least one prediction");
    CalibrationReport report;
    std::array<std::size_t, 3> correct{};
    double squared = 0.0;
    for (const auto& [confidence, ok] : pairs) {
        const auto bin = static_cast<std::size_t>(bin_confidence(confidence, thresholds));
        const double outcome = ok ? 1.0 : 0.0;
        squared += (confidence - outcome) * (confidence - outcome);
        ++report.bin_count[bin];
        correct[bin] += ok ? 1 : 0;
    }
    report.brier = squared / static_cast<double>(pairs.size());
    for (std::size_t b = 0; b < 3; ++b)
        if (report.bin_count[b] > 0)
            report.bin_accuracy[b] =
                static_cast<double>(correct[b]) / static_cast<double>(report.bin_count[b]);
    return report;
}

void to_json(Json& j, const TrackRecord& tr)
{
    j = Json{{"agent_id", tr.agent_id()},
             {"window_size", tr.window_size()},
             {"total_count", tr.total_count()},
             {"window", std::vector<bool>(tr.window().begin(), tr.window().end())}};
}

void from_json(const Json& j, TrackRecord& tr)
{
    const auto window = j.at("window").get<std::vector<bool>>();
    const auto total = j.value("total_count", window.size());
    tr = TrackRecord::restore(j.at("agent_id").get<std::string>(),
                              j.at("window_size").get<std::size_t>(), window, total);
}

void to_json(Json& j, const ComparisonPolicy& p)
{
    j = Json{{"mode", std::string(to_string(p.mode))},
             {"alpha_sig", p.alpha_sig},
             {"min_samples", p.min_samples}};
}

void from_json(const Json& j, ComparisonPolicy& p)
{
    ComparisonPolicy out;
    out.mode = parse_comparison_mode(j.value("mode", std::string("mean_only")));
    out.alpha_sig = j.value("alpha_sig", out.alpha_sig);
    out.min_samples = j.value("min_samples", out.min_samples);
    out.validate();
    p = out;
}

} // namespace fascai
