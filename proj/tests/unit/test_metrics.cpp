#include <doctest.h>

#include "fascai/errors.hpp"
#include "fascai/harness.hpp"
#include "fascai/metrics.hpp"

using namespace fascai;

namespace {

// A finalized trial with the given modality; the machine recommends `rec`
// and the human ends on `final_option` (best option is 0).
InteractionTranscript trial(Modality m, OptionIndex rec_option, OptionIndex final_option,
                            std::string arm = "a", TrialStage stage = TrialStage::Collaboration)
{
    static int counter = 0;
    ProblemInstance inst;
    inst.instance_id = "i";
    inst.options = {{0.0}, {0.0}};
    inst.true_utilities = {0.9, 0.1};
    inst.best_option = 0;
    Recommendation r;
    r.option = rec_option;
    r.confidence = 0.7;
    r.estimated_utilities = {0.5, 0.5};
    TrialContext ctx;
    ctx.arm = std::move(arm);
    ctx.stage = stage;
    TrialState s = start_trial("t" + std::to_string(counter++), m, inst, r, ctx, Timestamp{});
    switch (m) {
    case Modality::System1Nudge: s = submit_final(s, final_option, Timestamp{}); break;
    case Modality::System2Nudge:
        s = submit_initial(s, final_option, Timestamp{});
        s = submit_final(s, final_option, Timestamp{});
        break;
    case Modality::MetacognitionNudge:
        s = submit_initial(s, final_option, Timestamp{});
        s = submit_reveal_choice(s, false, Timestamp{});
        break;
    case Modality::HumanOnly: s = submit_initial(s, final_option, Timestamp{}); break;
    case Modality::MachineOnly: break;
    }
    return s.transcript;
}

std::vector<InteractionTranscript> many(Modality m, int adopt, int deviate, std::string arm = "a",
                                        TrialStage stage = TrialStage::Collaboration)
{
    std::vector<InteractionTranscript> out;
    for (int i = 0; i < adopt; ++i)
        out.push_back(trial(m, 0, 0, arm, stage));
    for (int i = 0; i < deviate; ++i)
        out.push_back(trial(m, 0, 1, arm, stage));
    return out;
}

} // namespace

TEST_CASE("wilson interval")
{
    const Interval i = wilson_interval({8, 10});
    CHECK(i.low == doctest::Approx(0.490162471537));
    CHECK(i.high == doctest::Approx(0.943317848546));
    const Interval z = wilson_interval({0, 10});
    CHECK(z.low == doctest::Approx(0.0));
    CHECK(z.high == doctest::Approx(0.277532799863));
}

TEST_CASE("two proportion difference")
{
    const DifferenceTest d = compare_proportions({60, 100}, {50, 100}, 0.05);
    CHECK(d.difference == doctest::Approx(0.1));
    CHECK(d.z == doctest::Approx(1.421338109037));
    CHECK(d.p_value == doctest::Approx(0.155218489685));
    CHECK(d.ci.low == doctest::Approx(-0.037197478918));
    CHECK(d.ci.high == doctest::Approx(0.237197478918));
    CHECK_FALSE(d.significant);
}

TEST_CASE("anchoring effect")
{
    CHECK(anchoring_effect(many(Modality::System1Nudge, 9, 1), many(Modality::System2Nudge, 6, 4)) ==
          doctest::Approx(0.3));
    const auto same = many(Modality::System1Nudge, 7, 3);
    CHECK(anchoring_effect(same, same) == 0.0);
    CHECK_THROWS_AS(anchoring_effect({}, same), ValidationError);
}

TEST_CASE("upskilling delta")
{
    const auto pre = many(Modality::HumanOnly, 11, 9);
    const auto post = many(Modality::HumanOnly, 14, 6);
    CHECK(upskilling_delta(pre, post) == doctest::Approx(0.15));
    CHECK_THROWS_AS(upskilling_delta(pre, many(Modality::System1Nudge, 1, 0)), ValidationError);
    CHECK_THROWS_AS(upskilling_delta({}, post), ValidationError);
}

TEST_CASE("agency metrics")
{
    auto ts = many(Modality::System1Nudge, 7, 3);
    const AgencyMetrics m = agency_metrics(ts);
    CHECK(*m.deviation.at(Modality::System1Nudge).rate() == doctest::Approx(0.3));
    CHECK(*m.opt_out.rate() == doctest::Approx(0.3));
    CHECK(m.mean_agency == doctest::Approx(0.3));

    // declined metacognition reveals count toward the reveal rate, not deviation
    auto meta = many(Modality::MetacognitionNudge, 2, 2);
    const AgencyMetrics mm = agency_metrics(meta);
    CHECK(mm.reveal_request.trials == 4);
    CHECK(mm.reveal_request.successes == 0);
    CHECK_FALSE(mm.deviation.contains(Modality::MetacognitionNudge));
}

TEST_CASE("report is a pure function of the transcripts")
{
    std::vector<InteractionTranscript> all;
    auto add = [&](std::vector<InteractionTranscript> v) { all.insert(all.end(), v.begin(), v.end()); };
    add(many(Modality::HumanOnly, 5, 5, "fixed", TrialStage::PreTest));
    add(many(Modality::System1Nudge, 8, 2, "fixed"));
    add(many(Modality::HumanOnly, 7, 3, "fixed", TrialStage::PostTest));
    add(many(Modality::System2Nudge, 4, 6, "slow"));

    const MetricsReport r = compute_metrics(all, {});
    CHECK(r.arms.size() == 2);
    const ArmMetrics& fixed = r.arm("fixed");
    CHECK(fixed.decision_quality.successes == 8);
    CHECK(fixed.decision_quality.trials == 10);
    CHECK(fixed.upskilling->delta.difference == doctest::Approx(0.2));
    REQUIRE(r.anchoring);
    CHECK(r.anchoring->immediate_arm == "fixed");
    CHECK(r.anchoring->delayed_arm == "slow");
    CHECK(r.anchoring->effect.difference == doctest::Approx(0.4));
    CHECK(r.comparisons.empty()); // no controller-driven arm
    CHECK_THROWS_AS(r.arm("missing"), ValidationError);

    // reordering the input does not change the numbers
    std::vector<InteractionTranscript> reversed(all.rbegin(), all.rend());
    CHECK(metrics_csv(compute_metrics(reversed, {})).size() == metrics_csv(r).size());
}

TEST_CASE("csv layout")
{
    const MetricsReport r = compute_metrics(many(Modality::System1Nudge, 3, 1, "x"), {});
    const std::string csv = metrics_csv(r);
    CHECK(csv.rfind("arm,metric,value,ci_low,ci_high,n\n", 0) == 0);
    CHECK(csv.find("x,decision_quality,0.750000,") != std::string::npos);
    CHECK(csv.find("x,deviation_rate.system1_nudge,0.250000,") != std::string::npos);
    CHECK(csv.find("x,modality_usage.system1_nudge,4,,,\n") != std::string::npos);
    const Json j = metrics_json(r);
    CHECK(j.at("arms").at("x").at("decision_quality").at("n") == 4);
    CHECK(metrics_summary(r).find("75.00%") != std::string::npos);
}

TEST_CASE("calibrated metacognition asks for help exactly when wrong")
{
    ExperimentConfig cfg;
    cfg.seed = 9;
    cfg.phases = {0, 5000, 0};
    cfg.human.skill = 0.7;
    cfg.human.fast_skill = 0.5;
    cfg.human.metacog_calibration = 1.0;
    cfg.human.reveal_threshold = 0.5;
    cfg.arms = {{"meta", ArmKind::FixedModality, Modality::MetacognitionNudge}};
    const auto result = run_experiment(cfg);
    std::size_t wrong = 0;
    for (const auto& t : result.arms[0].transcripts)
        wrong += *t.initial_option() != t.instance.best_option;
    const Proportion reveals = result.report.arm("meta").agency.reveal_request;
    CHECK(reveals.trials == 5000);
    CHECK(reveals.successes == wrong);
    CHECK(*reveals.rate() == doctest::Approx(0.3).epsilon(0.1));
}
