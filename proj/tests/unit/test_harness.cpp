#include <doctest.h>

#include "fascai/errors.hpp"
#include "fascai/harness.hpp"

using namespace fascai;

namespace {

std::string dump(const ExperimentResult& r)
{
    std::string out;
    for (const auto& t : r.transcripts())
        out += transcript_to_json(t).dump() + "\n";
    return out;
}

} // namespace

TEST_CASE("runs are deterministic in the seed")
{
    ExperimentConfig cfg;
    cfg.phases = {20, 300, 20};
    cfg.controller.feedback.enabled = true;
    cfg.controller.feedback.exploration = 0.2;
    const std::string a = dump(run_experiment(cfg));
    CHECK(a == dump(run_experiment(cfg)));
    cfg.seed = 2;
    CHECK(a != dump(run_experiment(cfg)));
}

TEST_CASE("perfect humans alone are always right")
{
    ExperimentConfig cfg;
    cfg.phases = {0, 500, 0};
    cfg.human.skill = 1.0;
    cfg.human.skill_ceiling = 1.0;
    cfg.arms = {{"human_only_baseline", ArmKind::HumanOnly, std::nullopt}};
    const auto r = run_experiment(cfg);
    CHECK(*r.report.arm("human_only_baseline").decision_quality.rate() == 1.0);
}

TEST_CASE("fascai arm matches its per-modality mixture")
{
    // closed-form mixture 0.811393 (a=0.8, s=0.6, s1=0.55, alpha=0.9, tau=0.5)
    ExperimentConfig cfg;
    cfg.seed = 31;
    cfg.phases = {0, 20000, 0};
    cfg.solver.accuracy = 0.8;
    cfg.human.skill = 0.6;
    cfg.human.fast_skill = 0.55;
    cfg.human.anchoring = 0.9;
    cfg.human.reconsider_trust = 0.5;
    const auto r = run_experiment(cfg);
    const double fascai = *r.report.arm("fascai").decision_quality.rate();
    const double human = *r.report.arm("human_only_baseline").decision_quality.rate();
    CHECK(fascai == doctest::Approx(0.811393).epsilon(0.02));
    CHECK(fascai > human);
    CHECK(r.report.comparisons.size() == 2);
    for (const auto& c : r.report.comparisons)
        CHECK(c.arm == "fascai");
}

TEST_CASE("arms are paired on identical tasks")
{
    ExperimentConfig cfg;
    cfg.phases = {5, 50, 5};
    const auto r = run_experiment(cfg);
    REQUIRE(r.arms.size() == 3);
    for (std::size_t g = 0; g < 60; ++g) {
        const auto& a = r.arms[0].transcripts[g];
        const auto& b = r.arms[1].transcripts[g];
        const auto& c = r.arms[2].transcripts[g];
        CHECK(a.instance.true_utilities == b.instance.true_utilities);
        CHECK(a.instance.true_utilities == c.instance.true_utilities);
        CHECK(a.recommendation->option == c.recommendation->option);
    }
}

TEST_CASE("phase structure")
{
    ExperimentConfig cfg;
    cfg.phases = {10, 30, 10};
    cfg.human.learning_rate = 0.2;
    cfg.outcome_feedback = true;
    cfg.arms = {{"machine_only_baseline", ArmKind::MachineOnly, std::nullopt}};
    const auto r = run_experiment(cfg);
    const auto& ts = r.arms[0].transcripts;
    std::size_t exposures = 0;
    for (std::size_t g = 0; g < ts.size(); ++g) {
        const TrialStage want = g < 10 ? TrialStage::PreTest : g < 40 ? TrialStage::Collaboration : TrialStage::PostTest;
        CHECK(ts[g].context.stage == want);
        if (want != TrialStage::Collaboration) {
            CHECK(ts[g].modality == Modality::HumanOnly);
            CHECK(exposure_of(ts[g]) == LearningExposure::None);
        }
        exposures += exposure_of(ts[g]) != LearningExposure::None;
    }
    CHECK(exposures == r.arms[0].exposures);
    CHECK(r.arms[0].final_human.current_skill > cfg.human.skill);
}

TEST_CASE("invalid configs are rejected before running")
{
    ExperimentConfig cfg;
    cfg.arms.clear();
    CHECK_THROWS_AS(run_experiment(cfg), ValidationError);
    cfg = ExperimentConfig{};
    cfg.phases = {0, 0, 0};
    CHECK_THROWS_AS(run_experiment(cfg), ValidationError);
    cfg = ExperimentConfig{};
    cfg.arms = {{"a", ArmKind::Fascai, std::nullopt}, {"a", ArmKind::HumanOnly, std::nullopt}};
    CHECK_THROWS_AS(run_experiment(cfg), ValidationError);
    cfg = ExperimentConfig{};
    cfg.arms = {{"f", ArmKind::FixedModality, std::nullopt}};
    CHECK_THROWS_AS(run_experiment(cfg), ValidationError);
}

TEST_CASE("config json round trip")
{
    const Json j = Json::parse(R"({"seed": 4,
        "phases": {"pre_test_trials": 3, "collaboration_trials": 40, "post_test_trials": 3},
        "human": {"skill": 0.65, "fast_skill": 0.5},
        "solver": {"accuracy": 0.9, "calibration": 0.5},
        "task": {"option_count": 4, "feature_dim": 2, "utility_gap": 0.1},
        "arms": [{"name": "imm", "kind": "fixed", "modality": "system1_nudge"}],
        "outcome_feedback": true, "step_budget": 8})");
    const ExperimentConfig cfg = j.get<ExperimentConfig>();
    CHECK(cfg.seed == 4);
    CHECK(cfg.trial_count() == 46);
    CHECK(cfg.task.option_count == 4);
    CHECK(cfg.arms.at(0).fixed_modality() == Modality::System1Nudge);
    const ExperimentConfig back = Json(cfg).get<ExperimentConfig>();
    CHECK(Json(back) == Json(cfg));
}
