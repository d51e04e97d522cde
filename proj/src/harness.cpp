#include "fascai/harness.hpp"

#include <cstdio>
#include <set>

#include "fascai/errors.hpp"

namespace fascai {

std::string_view to_string(ArmKind k)
{
    switch (k) {
    case ArmKind::Fascai: return "fascai";
    case ArmKind::HumanOnly: return "human_only";
    case ArmKind::MachineOnly: return "machine_only";
    case ArmKind::FixedModality: return "fixed";
    }
    return "?";
}

ArmKind parse_arm_kind(std::string_view s)
{
    for (ArmKind k : {ArmKind::Fascai, ArmKind::HumanOnly, ArmKind::MachineOnly,
                      ArmKind::FixedModality})
        if (to_string(k) == s)
            return k;
    throw ValidationError("unknown arm kind '" + std::string(s) + "'");
}

Modality ArmConfig::fixed_modality() const
{
    switch (kind) {
    case ArmKind::HumanOnly: return Modality::HumanOnly;
    case ArmKind::MachineOnly: return Modality::MachineOnly;
    case ArmKind::FixedModality: return modality.value();
    case ArmKind::Fascai: break;
    }
    throw ValidationError("arm " + name + " has no fixed modality");
}

void ExperimentConfig::validate() const
{
    if (phases.collaboration == 0 && phases.pre_test == 0 && phases.post_test == 0)
        throw ValidationError("experiment has no trials");
    if (arms.empty())
        throw ValidationError("experiment needs at least one arm");
    if (step_budget == 0)
        throw ValidationError("step budget must be positive");
    std::set<std::string> names;
    for (const auto& arm : arms) {
        if (arm.name.empty())
            throw ValidationError("arm names must be non-empty");
        if (!names.insert(arm.name).second)
            throw ValidationError("duplicate arm name '" + arm.name + "'");
        if (arm.kind == ArmKind::FixedModality && !arm.modality)
            throw ValidationError("fixed arm '" + arm.name + "' needs a modality");
        if (arm.kind != ArmKind::Fascai && !controller.profile.allows(arm.fixed_modality()))
            throw ValidationError("arm '" + arm.name + "' uses a modality the value profile rules out");
    }
    controller.make_state();
    human.validate();
    solver.validate();
    task.validate();
}

MetricsParams ExperimentConfig::metrics_params() const
{
    return MetricsParams{controller.thresholds, controller.policy.alpha_sig};
}

void to_json(Json& j, const ExperimentConfig& c)
{
    Json arms = Json::array();
    for (const auto& a : c.arms) {
        Json aj{{"name", a.name}, {"kind", std::string(to_string(a.kind))}};
        if (a.modality)
            aj["modality"] = std::string(to_string(*a.modality));
        arms.push_back(std::move(aj));
    }
    j = Json{{"seed", c.seed},
             {"phases",
              {{"pre_test_trials", c.phases.pre_test},
               {"collaboration_trials", c.phases.collaboration},
               {"post_test_trials", c.phases.post_test}}},
             {"controller", c.controller},
             {"human", c.human},
             {"solver", {{"accuracy", c.solver.accuracy}, {"calibration", c.solver.calibration}}},
             {"task",
              {{"option_count", c.task.option_count},
               {"feature_dim", c.task.feature_dim},
               {"utility_gap", c.task.utility_gap}}},
             {"protocol", c.protocol},
             {"arms", std::move(arms)},
             {"outcome_feedback", c.outcome_feedback},
             {"step_budget", c.step_budget}};
}

void from_json(const Json& j, ExperimentConfig& c)
{
    ExperimentConfig out;
    out.seed = j.value("seed", out.seed);
    if (j.contains("phases")) {
        const Json& p = j.at("phases");
        out.phases.pre_test = p.value("pre_test_trials", out.phases.pre_test);
        out.phases.collaboration = p.value("collaboration_trials", out.phases.collaboration);
        out.phases.post_test = p.value("post_test_trials", out.phases.post_test);
    }
    if (j.contains("controller"))
        out.controller = j.at("controller").get<ControllerConfig>();
    if (j.contains("human"))
        out.human = j.at("human").get<HumanParams>();
    if (j.contains("solver")) {
        const Json& s = j.at("solver");
        out.solver.accuracy = s.value("accuracy", out.solver.accuracy);
        out.solver.calibration = s.value("calibration", out.solver.calibration);
    }
    if (j.contains("task")) {
        const Json& t = j.at("task");
        out.task.option_count = t.value("option_count", out.task.option_count);
        out.task.feature_dim = t.value("feature_dim", out.task.feature_dim);
        out.task.utility_gap = t.value("utility_gap", out.task.utility_gap);
    }
    if (j.contains("protocol"))
        out.protocol = j.at("protocol").get<ProtocolOptions>();
    if (j.contains("arms")) {
        out.arms.clear();
        for (const Json& aj : j.at("arms")) {
            ArmConfig a;
            a.name = aj.at("name").get<std::string>();
            a.kind = parse_arm_kind(aj.value("kind", std::string("fascai")));
            if (aj.contains("modality"))
                a.modality = parse_modality(aj.at("modality").get<std::string>());
            out.arms.push_back(std::move(a));
        }
    }
    out.outcome_feedback = j.value("outcome_feedback", out.outcome_feedback);
    out.step_budget = j.value("step_budget", out.step_budget);
    out.validate();
    c = std::move(out);
}

LearningExposure exposure_of(const InteractionTranscript& t)
{
    if (t.context.stage != TrialStage::Collaboration && t.context.stage != TrialStage::Live)
        return LearningExposure::None;
    const auto final_option = t.final_option();
    if (!final_option)
        return LearningExposure::None;
    const bool correct = *final_option == t.instance.best_option;
    if (t.modality == Modality::MachineOnly)
        return correct ? LearningExposure::ObservedCorrectMachine : LearningExposure::None;
    if (t.context.outcome_feedback && !correct)
        return LearningExposure::FeedbackOnOwnError;
    return LearningExposure::None;
}

std::string simulation_session_id(const std::string& arm)
{
    return "sim-" + arm;
}

namespace {

// Deterministic clock for simulated trials: trial g starts g minutes after
// the epoch below and each human action takes one second.
const Timestamp kSimulationEpoch = std::chrono::sys_days{std::chrono::year{2024} /
                                                         std::chrono::January / 1};

std::string trial_id(const std::string& arm, std::size_t g)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "-%07zu", g);
    return arm + buf;
}

// Drives one trial through the protocol with the synthetic human.
TrialState play_trial(TrialState state, const HumanState& human, Rng& rng, Timestamp& clock)
{
    const auto& inst = state.transcript.instance;
    auto tick = [&] { return clock += std::chrono::seconds(1); };

    while (state.phase != TrialPhase::Finalized) {
        switch (state.phase) {
        case TrialPhase::AwaitingInitialDecision:
            state = submit_initial(state, decide_solo(human, inst, true, rng), tick());
            break;
        case TrialPhase::AwaitingRevealChoice: {
            const bool want = respond_metacog(human, inst, *state.transcript.initial_option(), rng);
            state = submit_reveal_choice(state, want, tick());
            break;
        }
        case TrialPhase::RecommendationVisible: {
            const OptionIndex shown = *state.transcript.shown_machine_option();
            const auto initial = state.transcript.initial_option();
            const OptionIndex final_option =
                initial ? respond_system2(human, inst, *initial, shown, rng)
                        : respond_system1(human, inst, shown, rng);
            state = submit_final(state, final_option, tick());
            break;
        }
        default:
            throw ProtocolError("simulated trial stuck in phase " +
                                std::string(to_string(state.phase)));
        }
    }
    return state;
}

} // namespace

ArmRun run_arm(const ExperimentConfig& cfg, const ArmConfig& arm)
{
    ArmRun run{arm.name, {}, HumanState(cfg.human), cfg.controller.make_state(), 0};
    run.transcripts.reserve(cfg.trial_count());

    const SyntheticSolver solver(cfg.solver);
    TrackRecord human_record("human", cfg.controller.window_size);
    TrackRecord machine_record("machine", cfg.controller.window_size);
    auto& controller = run.final_controller;
    auto& human = run.final_human;

    const std::size_t collab_begin = cfg.phases.pre_test;
    const std::size_t post_begin = collab_begin + cfg.phases.collaboration;

    for (std::size_t g = 0; g < cfg.trial_count(); ++g) {
        const TrialStage stage = g < collab_begin  ? TrialStage::PreTest
                                 : g < post_begin ? TrialStage::Collaboration
                                                  : TrialStage::PostTest;

        Rng task_rng = Rng::stream(cfg.seed, StreamTag::Task, g);
        Rng solver_rng = Rng::stream(cfg.seed, StreamTag::Solver, g);
        Rng human_rng = Rng::stream(cfg.seed, StreamTag::Human, g);
        Rng controller_rng = Rng::stream(cfg.seed, StreamTag::Controller, g);

        ProblemInstance inst = generate_instance(task_rng, cfg.task, "task-" + std::to_string(g));
        Recommendation rec = solver.recommend(inst, solver_rng);
        rec.disclosure = {bin_confidence(rec.confidence, cfg.controller.thresholds),
                          machine_record.accuracy().value_or(0.0),
                          machine_record.window_length()};
        const bool machine_correct = rec.option == inst.best_option;

        TrialContext ctx;
        ctx.arm = arm.name;
        ctx.stage = stage;
        ctx.index = g;
        ctx.protocol = cfg.protocol;
        ctx.outcome_feedback = cfg.outcome_feedback && stage == TrialStage::Collaboration;

        Modality modality = Modality::HumanOnly;
        if (stage == TrialStage::Collaboration) {
            if (arm.kind == ArmKind::Fascai) {
                const auto sel = select_modality(controller, rec.confidence, human_record,
                                                 machine_record, controller_rng);
                modality = sel.modality;
                ctx.cell = sel.cell;
                ctx.explored = sel.explored;
            } else {
                modality = arm.fixed_modality();
            }
        }

        Timestamp clock = kSimulationEpoch + std::chrono::minutes(g);
        TrialState state = start_trial(trial_id(arm.name, g), modality, std::move(inst), rec,
                                       std::move(ctx), clock);
        state = play_trial(std::move(state), human, human_rng, clock);
        InteractionTranscript& t = state.transcript;

        if (stage == TrialStage::Collaboration) {
            machine_record.record(machine_correct);
            if (const auto initial = t.initial_option())
                human_record.record(*initial == t.instance.best_option);

            const LearningExposure exposure = exposure_of(t);
            if (exposure != LearningExposure::None) {
                human = learn(human, exposure);
                ++run.exposures;
            }

            if (arm.kind == ArmKind::Fascai && controller.feedback_config.enabled) {
                const TrialOutcome outcome = outcome_of(t);
                const ValueScores scores =
                    score_trial(outcome, std::nullopt, outcome.elapsed_steps, cfg.step_budget);
                controller = apply_feedback(controller, *t.context.cell, t.modality, scores).state;
            }
        }
        run.transcripts.push_back(std::move(t));
    }
    return run;
}

std::vector<InteractionTranscript> ExperimentResult::transcripts() const
{
    std::vector<InteractionTranscript> all;
    for (const auto& a : arms)
        all.insert(all.end(), a.transcripts.begin(), a.transcripts.end());
    return all;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg)
{
    cfg.validate();
    ExperimentResult result;
    for (const auto& arm : cfg.arms)
        result.arms.push_back(run_arm(cfg, arm));
    result.report = compute_metrics(result.transcripts(), cfg.metrics_params());
    return result;
}

} // namespace fascai
