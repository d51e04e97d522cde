#include "fascai/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "fascai/controller.hpp"
#include "fascai/errors.hpp"
#include "fascai/harness.hpp"

namespace fascai {

std::optional<double> Proportion::rate() const
{
    if (trials == 0)
        return std::nullopt;
    return static_cast<double>(successes) / static_cast<double>(trials);
}

Interval wilson_interval(const Proportion& p)
{
    if (p.trials == 0)
        return {0.0, 1.0};
    const double n = static_cast<double>(p.trials);
    const double phat = *p.rate();
    const double z2 = kZ95 * kZ95;
    const double denom = 1.0 + z2 / n;
    const double center = (phat + z2 / (2.0 * n)) / denom;
    const double half = kZ95 * std::sqrt(phat * (1.0 - phat) / n + z2 / (4.0 * n * n)) / denom;
    return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

DifferenceTest compare_proportions(const Proportion& a, const Proportion& b, double alpha_sig)
{
    if (a.trials == 0 || b.trials == 0)
        throw ValidationError("proportion comparison needs non-empty samples");
    DifferenceTest t;
    const double pa = *a.rate();
    const double pb = *b.rate();
    const double na = static_cast<double>(a.trials);
    const double nb = static_cast<double>(b.trials);
    t.difference = pa - pb;
    const double se = std::sqrt(pa * (1.0 - pa) / na + pb * (1.0 - pb) / nb);
    t.ci = {t.difference - kZ95 * se, t.difference + kZ95 * se};
    // two_proportion_z is oriented as (second - first)
    t.z = two_proportion_z(b.successes, b.trials, a.successes, a.trials);
    t.p_value = std::erfc(std::fabs(t.z) / std::sqrt(2.0));
    t.significant = t.p_value < alpha_sig;
    return t;
}

// ---------------------------------------------------------------------------

namespace {

bool adopted(const InteractionTranscript& t)
{
    const auto machine = t.machine_option();
    const auto final_option = t.final_option();
    if (!machine || !final_option)
        throw ValidationError("trial " + t.trial_id + " has no machine option or final decision");
    return *machine == *final_option;
}

Proportion adoption(const std::vector<InteractionTranscript>& ts)
{
    Proportion p;
    for (const auto& t : ts) {
        ++p.trials;
        p.successes += adopted(t) ? 1 : 0;
    }
    return p;
}

Proportion solo_accuracy(const std::vector<InteractionTranscript>& ts, const char* phase)
{
    if (ts.empty())
        throw ValidationError(std::string(phase) + " has no trials");
    Proportion p;
    for (const auto& t : ts) {
        if (t.modality != Modality::HumanOnly)
            throw ValidationError(std::string(phase) + " trial " + t.trial_id +
                                  " is not a human-only trial");
        const auto f = t.final_option();
        if (!f)
            throw ValidationError("trial " + t.trial_id + " is not finalized");
        ++p.trials;
        p.successes += *f == t.instance.best_option ? 1 : 0;
    }
    return p;
}

} // namespace

AgencyMetrics agency_metrics(const std::vector<InteractionTranscript>& transcripts)
{
    AgencyMetrics m;
    double agency_sum = 0.0;
    std::size_t finalized = 0;
    for (const auto& t : transcripts) {
        const auto final_option = t.final_option();
        if (!final_option)
            continue;
        ++finalized;
        agency_sum += score_trial(outcome_of(t), std::nullopt, 0, 1).agency;

        if (is_nudge(t.modality)) {
            if (const auto shown = t.shown_machine_option()) {
                const bool deviated = *final_option != *shown;
                auto& d = m.deviation[t.modality];
                ++d.trials;
                d.successes += deviated ? 1 : 0;
                ++m.opt_out.trials;
                m.opt_out.successes += deviated ? 1 : 0;
            }
        }
        if (t.modality == Modality::MetacognitionNudge) {
            ++m.reveal_request.trials;
            m.reveal_request.successes += t.reveal_requested().value_or(false) ? 1 : 0;
        }
    }
    m.mean_agency = finalized ? agency_sum / static_cast<double>(finalized) : 0.0;
    return m;
}

double anchoring_effect(const std::vector<InteractionTranscript>& immediate,
                        const std::vector<InteractionTranscript>& delayed)
{
    if (immediate.empty() || delayed.empty())
        throw ValidationError("anchoring effect needs trials under both reveal timings");
    return *adoption(immediate).rate() - *adoption(delayed).rate();
}

double upskilling_delta(const std::vector<InteractionTranscript>& pre_test,
                        const std::vector<InteractionTranscript>& post_test)
{
    const Proportion pre = solo_accuracy(pre_test, "pre-test");
    const Proportion post = solo_accuracy(post_test, "post-test");
    return *post.rate() - *pre.rate();
}

const ArmMetrics& MetricsReport::arm(const std::string& name) const
{
    for (const auto& a : arms)
        if (a.arm == name)
            return a;
    throw ValidationError("no metrics for arm '" + name + "'");
}

MetricsReport compute_metrics(const std::vector<InteractionTranscript>& transcripts,
                              const MetricsParams& params)
{
    struct Group {
        std::string name;
        std::vector<InteractionTranscript> pre, collab, post;
    };
    std::vector<Group> groups;
    for (const auto& t : transcripts) {
        if (!t.finalized())
            continue;
        auto it = std::find_if(groups.begin(), groups.end(),
                               [&](const Group& g) { return g.name == t.context.arm; });
        if (it == groups.end()) {
            groups.push_back({t.context.arm, {}, {}, {}});
            it = std::prev(groups.end());
        }
        switch (t.context.stage) {
        case TrialStage::PreTest: it->pre.push_back(t); break;
        case TrialStage::PostTest: it->post.push_back(t); break;
        default: it->collab.push_back(t);
        }
    }

    MetricsReport report;
    std::vector<bool> controller_driven;
    std::optional<std::size_t> immediate_arm, delayed_arm;

    for (const auto& g : groups) {
        ArmMetrics am;
        am.arm = g.name;
        bool has_cell = false;
        bool all_s1 = !g.collab.empty();
        bool all_s2 = !g.collab.empty();
        std::vector<std::pair<double, bool>> calibration_pairs;
        std::size_t exposures = 0;

        for (const auto& t : g.collab) {
            ++am.decision_quality.trials;
            am.decision_quality.successes += *t.final_option() == t.instance.best_option ? 1 : 0;
            ++am.modality_usage[t.modality];
            am.explored += t.context.explored ? 1 : 0;
            has_cell = has_cell || t.context.cell.has_value();
            all_s1 = all_s1 && t.modality == Modality::System1Nudge;
            all_s2 = all_s2 && t.modality == Modality::System2Nudge;
            if (t.recommendation)
                calibration_pairs.emplace_back(t.recommendation->confidence,
                                               t.recommendation->option == t.instance.best_option);
            exposures += exposure_of(t) != LearningExposure::None ? 1 : 0;
        }
        am.decision_quality_ci = wilson_interval(am.decision_quality);
        am.agency = agency_metrics(g.collab);
        if (!calibration_pairs.empty())
            am.calibration = calibration_report(calibration_pairs, params.thresholds);
        if (!g.pre.empty() && !g.post.empty()) {
            UpskillingReport up;
            up.pre = solo_accuracy(g.pre, "pre-test");
            up.post = solo_accuracy(g.post, "post-test");
            up.delta = compare_proportions(up.post, up.pre, params.alpha_sig);
            up.exposures = exposures;
            am.upskilling = up;
        }

        if (all_s1 && !immediate_arm)
            immediate_arm = report.arms.size();
        if (all_s2 && !delayed_arm)
            delayed_arm = report.arms.size();
        controller_driven.push_back(has_cell);
        report.arms.push_back(std::move(am));
    }

    if (immediate_arm && delayed_arm) {
        AnchoringReport a;
        a.immediate_arm = groups[*immediate_arm].name;
        a.delayed_arm = groups[*delayed_arm].name;
        a.immediate_adoption = adoption(groups[*immediate_arm].collab);
        a.delayed_adoption = adoption(groups[*delayed_arm].collab);
        a.effect = compare_proportions(a.immediate_adoption, a.delayed_adoption, params.alpha_sig);
        report.anchoring = a;
    }

    for (std::size_t i = 0; i < report.arms.size(); ++i) {
        if (!controller_driven[i] || report.arms[i].decision_quality.trials == 0)
            continue;
        for (std::size_t j = 0; j < report.arms.size(); ++j) {
            if (j == i || report.arms[j].decision_quality.trials == 0)
                continue;
            report.comparisons.push_back(
                {report.arms[i].arm, report.arms[j].arm,
                 compare_proportions(report.arms[i].decision_quality,
                                     report.arms[j].decision_quality, params.alpha_sig)});
        }
    }
    return report;
}

// ---------------------------------------------------------------------------
// output

namespace {

struct Row {
    std::string arm;
    std::string metric;
    double value = 0.0;
    bool integral = false;
    std::optional<Interval> ci;
    std::optional<std::size_t> n;
};

std::vector<Row> rows(const MetricsReport& r)
{
    std::vector<Row> out;
    auto rate = [&](const std::string& arm, const std::string& metric, const Proportion& p) {
        if (p.trials == 0)
            return;
        out.push_back({arm, metric, *p.rate(), false, wilson_interval(p), p.trials});
    };
    auto count = [&](const std::string& arm, const std::string& metric, std::size_t v) {
        out.push_back({arm, metric, static_cast<double>(v), true, std::nullopt, std::nullopt});
    };

    for (const auto& a : r.arms) {
        rate(a.arm, "decision_quality", a.decision_quality);
        if (a.decision_quality.trials > 0)
            out.push_back({a.arm, "mean_agency", a.agency.mean_agency, false, std::nullopt,
                           a.decision_quality.trials});
        for (const auto& [m, p] : a.agency.deviation) {
            const std::string name(to_string(m));
            rate(a.arm, "deviation_rate." + name, p);
            rate(a.arm, "adoption_rate." + name, Proportion{p.trials - p.successes, p.trials});
        }
        rate(a.arm, "opt_out_rate", a.agency.opt_out);
        rate(a.arm, "reveal_request_rate", a.agency.reveal_request);
        for (const auto& [m, c] : a.modality_usage)
            count(a.arm, "modality_usage." + std::string(to_string(m)), c);
        count(a.arm, "explored_trials", a.explored);
        if (a.upskilling) {
            const auto& u = *a.upskilling;
            rate(a.arm, "upskilling.pre_accuracy", u.pre);
            rate(a.arm, "upskilling.post_accuracy", u.post);
            out.push_back({a.arm, "upskilling.delta", u.delta.difference, false, u.delta.ci,
                           std::nullopt});
            out.push_back({a.arm, "upskilling.p_value", u.delta.p_value, false, std::nullopt,
                           std::nullopt});
            count(a.arm, "upskilling.exposures", u.exposures);
        }
        if (a.calibration) {
            const auto& c = *a.calibration;
            out.push_back({a.arm, "calibration.brier", c.brier, false, std::nullopt,
                           a.decision_quality.trials});
            for (ConfidenceBin b : kAllBins) {
                const auto i = static_cast<std::size_t>(b);
                if (c.bin_accuracy[i])
                    out.push_back({a.arm, "calibration.accuracy." + std::string(to_string(b)),
                                   *c.bin_accuracy[i], false, std::nullopt, c.bin_count[i]});
            }
        }
    }
    if (r.anchoring) {
        const auto& a = *r.anchoring;
        const std::string label = a.immediate_arm + "/" + a.delayed_arm;
        out.push_back({label, "anchoring_effect", a.effect.difference, false, a.effect.ci,
                       a.immediate_adoption.trials + a.delayed_adoption.trials});
        out.push_back({label, "anchoring_p_value", a.effect.p_value, false, std::nullopt,
                       std::nullopt});
    }
    for (const auto& c : r.comparisons) {
        out.push_back({c.arm, "decision_quality_vs." + c.baseline, c.decision_quality.difference,
                       false, c.decision_quality.ci, std::nullopt});
        out.push_back({c.arm, "decision_quality_p_value_vs." + c.baseline,
                       c.decision_quality.p_value, false, std::nullopt, std::nullopt});
    }
    return out;
}

std::string fmt(double v, bool integral)
{
    char buf[64];
    if (integral)
        std::snprintf(buf, sizeof buf, "%.0f", v);
    else
        std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

} // namespace

std::string metrics_csv(const MetricsReport& report)
{
    std::ostringstream out;
    out << "arm,metric,value,ci_low,ci_high,n\n";
    for (const auto& row : rows(report)) {
        out << row.arm << ',' << row.metric << ',' << fmt(row.value, row.integral) << ',';
        if (row.ci)
            out << fmt(row.ci->low, false) << ',' << fmt(row.ci->high, false);
        else
            out << ',';
        out << ',';
        if (row.n)
            out << *row.n;
        out << '\n';
    }
    return out.str();
}

Json metrics_json(const MetricsReport& report)
{
    Json arms = Json::object();
    for (const auto& row : rows(report)) {
        Json entry{{"value", row.value}};
        if (row.ci) {
            entry["ci_low"] = row.ci->low;
            entry["ci_high"] = row.ci->high;
        }
        if (row.n)
            entry["n"] = *row.n;
        arms[row.arm][row.metric] = std::move(entry);
    }
    return Json{{"arms", std::move(arms)}};
}

std::string metrics_summary(const MetricsReport& report)
{
    std::ostringstream out;
    auto pct = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.2f%%", 100.0 * v);
        return std::string(buf);
    };
    for (const auto& a : report.arms) {
        out << "arm " << a.arm << "\n";
        if (const auto q = a.decision_quality.rate())
            out << "  decision quality   " << pct(*q) << "  (95% CI " << pct(a.decision_quality_ci.low)
                << " .. " << pct(a.decision_quality_ci.high) << ", n=" << a.decision_quality.trials
                << ")\n";
        for (const auto& [m, c] : a.modality_usage)
            out << "  used " << to_string(m) << ": " << c << "\n";
        for (const auto& [m, p] : a.agency.deviation)
            out << "  deviation rate " << to_string(m) << ": " << pct(*p.rate()) << "\n";
        if (const auto r = a.agency.reveal_request.rate())
            out << "  reveal request rate: " << pct(*r) << "\n";
        if (a.upskilling)
            out << "  upskilling: pre " << pct(*a.upskilling->pre.rate()) << ", post "
                << pct(*a.upskilling->post.rate()) << ", delta "
                << fmt(a.upskilling->delta.difference, false) << " after "
                << a.upskilling->exposures << " learning exposures\n";
        if (a.calibration)
            out << "  machine Brier score: " << fmt(a.calibration->brier, false) << "\n";
    }
    if (report.anchoring)
        out << "anchoring effect (" << report.anchoring->immediate_arm << " vs "
            << report.anchoring->delayed_arm
            << "): " << fmt(report.anchoring->effect.difference, false)
            << (report.anchoring->effect.significant ? " (significant)" : " (not significant)")
            << "\n";
    for (const auto& c : report.comparisons)
        out << "decision quality " << c.arm << " - " << c.baseline << ": "
            << fmt(c.decision_quality.difference, false)
            << (c.decision_quality.significant ? " (significant)" : " (not significant)") << "\n";
    return out.str();
}

} // namespace fascai
