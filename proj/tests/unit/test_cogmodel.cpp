#include <doctest.h>

#include <cmath>

#include "fascai/cogmodel.hpp"
#include "fascai/errors.hpp"

using namespace fascai;

namespace {

HumanParams params(double skill, double fast)
{
    HumanParams p;
    p.skill = skill;
    p.fast_skill = fast;
    p.skill_ceiling = std::max(skill, 0.9);
    return p;
}

} // namespace

TEST_CASE("solo decisions at the extremes")
{
    Rng rng(1);
    const HumanState perfect(params(1.0, 0.5));
    const HumanState hopeless(params(0.0, 0.0));
    for (int i = 0; i < 200; ++i) {
        const ProblemInstance inst = generate_instance(rng, {2, 2, 0.0}, "x");
        CHECK(decide_solo(perfect, inst, true, rng) == inst.best_option);
        CHECK(decide_solo(hopeless, inst, true, rng) == 1 - inst.best_option);
    }
}

TEST_CASE("solo accuracy matches skill")
{
    Rng rng(2);
    const HumanState h(params(0.7, 0.5));
    std::size_t correct = 0;
    for (int i = 0; i < 100000; ++i) {
        const ProblemInstance inst = generate_instance(rng, {2, 1, 0.0}, "x");
        correct += decide_solo(h, inst, true, rng) == inst.best_option;
    }
    CHECK(std::abs(correct / 100000.0 - 0.7) <= 0.005);
}

TEST_CASE("system 1 anchoring")
{
    Rng rng(3);
    HumanParams p = params(0.6, 0.6);
    p.anchoring = 1.0;
    const HumanState full(p);
    p.anchoring = 0.5;
    const HumanState half(p);

    std::size_t correct = 0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const ProblemInstance inst = generate_instance(rng, {2, 1, 0.0}, "x");
        const OptionIndex rec = rng.bernoulli(0.8) ? inst.best_option : 1 - inst.best_option;
        REQUIRE(respond_system1(full, inst, rec, rng) == rec);
        correct += respond_system1(half, inst, rec, rng) == inst.best_option;
    }
    // 0.5 * 0.8 + 0.5 * 0.6
    CHECK(std::abs(correct / static_cast<double>(n) - 0.70) <= 0.01);
}

TEST_CASE("system 1 without anchoring is a fast solo decision")
{
    HumanParams p = params(0.6, 0.4);
    p.anchoring = 0.0;
    const HumanState h(p);
    Rng a(9), b(9);
    const ProblemInstance inst = generate_instance(5, 3, 1, 0.0);
    for (int i = 0; i < 1000; ++i) {
        // the anchoring draw comes first, then the same solo draw
        a.uniform();
        CHECK(respond_system1(h, inst, 0, b) == decide_solo(h, inst, false, a));
    }
}

TEST_CASE("system 2 reconsideration")
{
    Rng rng(4);
    HumanParams p = params(0.6, 0.5);
    p.reconsider_trust = 1.0;
    const HumanState trusting(p);
    const ProblemInstance inst = generate_instance(1, 3, 1, 0.0);
    CHECK(respond_system2(trusting, inst, 1, 1, rng) == 1);
    CHECK(respond_system2(trusting, inst, 1, 2, rng) == 2);

    // tau = 0.5, s = 0.6, a = 0.8 -> 0.70 by enumeration
    p.reconsider_trust = 0.5;
    const HumanState h(p);
    std::size_t correct = 0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const ProblemInstance t = generate_instance(rng, {2, 1, 0.0}, "x");
        const OptionIndex initial = decide_solo(h, t, true, rng);
        const OptionIndex rec = rng.bernoulli(0.8) ? t.best_option : 1 - t.best_option;
        correct += respond_system2(h, t, initial, rec, rng) == t.best_option;
    }
    CHECK(std::abs(correct / static_cast<double>(n) - 0.70) <= 0.01);
}

TEST_CASE("metacognitive reveal choice")
{
    Rng rng(5);
    HumanParams p = params(0.6, 0.5);
    p.metacog_calibration = 1.0;
    p.reveal_threshold = 0.5;
    const HumanState calibrated(p);
    const ProblemInstance inst = generate_instance(2, 2, 1, 0.0);
    for (int i = 0; i < 500; ++i) {
        CHECK_FALSE(respond_metacog(calibrated, inst, inst.best_option, rng));
        CHECK(respond_metacog(calibrated, inst, 1 - inst.best_option, rng));
    }

    p.metacog_calibration = 0.5;
    const HumanState coin(p);
    std::size_t right = 0, wrong = 0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        right += respond_metacog(coin, inst, inst.best_option, rng);
        wrong += respond_metacog(coin, inst, 1 - inst.best_option, rng);
    }
    CHECK(std::abs(right / static_cast<double>(n) - wrong / static_cast<double>(n)) < 0.01);
}

TEST_CASE("learning recurrence")
{
    HumanParams p = params(0.5, 0.5);
    p.learning_rate = 0.1;
    p.skill_ceiling = 0.9;
    HumanState h(p);
    double oracle = 0.5;
    for (int i = 0; i < 10; ++i) {
        h = learn(h, LearningExposure::ObservedCorrectMachine);
        oracle += 0.1 * (0.9 - oracle);
    }
    CHECK(h.current_skill == doctest::Approx(0.9 - 0.4 * std::pow(0.9, 10)));
    CHECK(h.current_skill == doctest::Approx(oracle));
    CHECK(h.current_skill == doctest::Approx(0.7605286240));
    CHECK(learn(h, LearningExposure::None).current_skill == h.current_skill);

    HumanParams still = params(0.5, 0.5);
    HumanState s(still);
    for (int i = 0; i < 50; ++i)
        s = learn(s, LearningExposure::FeedbackOnOwnError);
    CHECK(s.current_skill == 0.5);

    HumanParams top = params(0.9, 0.5);
    top.learning_rate = 0.3;
    CHECK(learn(HumanState(top), LearningExposure::ObservedCorrectMachine).current_skill == 0.9);
}

TEST_CASE("human params validated")
{
    CHECK_THROWS_AS(HumanState(params(0.5, 0.7)), ValidationError);
    HumanParams p;
    p.learning_rate = 1.0;
    CHECK_THROWS_AS(HumanState{p}, ValidationError);
    p = HumanParams{};
    p.anchoring = 1.5;
    CHECK_THROWS_AS(HumanState{p}, ValidationError);
}
