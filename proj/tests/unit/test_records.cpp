#include <doctest.h>

#include "fascai/errors.hpp"
#include "fascai/records.hpp"
#include "helpers.hpp"

using namespace fascai;
using test::record_of;

TEST_CASE("track record window")
{
    TrackRecord r("h", 50);
    CHECK_FALSE(r.accuracy().has_value());
    r.record(true);
    CHECK(*r.accuracy() == 1.0);
    CHECK(r.total_count() == 1);

    TrackRecord w("h", 2);
    w.record(true);
    w.record(true);
    w.record(false);
    CHECK(w.window() == std::deque<bool>{true, false});
    CHECK(*w.accuracy() == 0.5);
    CHECK(w.total_count() == 3);

    TrackRecord one = record_of(5, 5, 1);
    one.record(false);
    CHECK(*one.accuracy() == 0.0);
    CHECK_THROWS_AS(TrackRecord("h", 0), ValidationError);
}

TEST_CASE("recorded leaves the original untouched")
{
    const TrackRecord r = record_of(3, 4);
    const TrackRecord next = r.recorded(false);
    CHECK(r.window_length() == 4);
    CHECK(next.window_length() == 5);
    CHECK(next.correct_in_window() == 3);
}

TEST_CASE("comparison policies")
{
    const ComparisonPolicy mean{ComparisonMode::MeanOnly, 0.05, 10};
    CHECK(compare(record_of(8, 10), record_of(5, 10), mean) == PerformanceComparison::HumanBetter);
    CHECK(compare(record_of(5, 10), record_of(8, 10), mean) == PerformanceComparison::MachineBetter);
    CHECK(compare(record_of(5, 10), record_of(5, 10), mean) == PerformanceComparison::HumanBetter);

    const ComparisonPolicy sig{ComparisonMode::SignificanceTest, 0.05, 10};
    CHECK(two_proportion_z(5, 10, 6, 10) == doctest::Approx(0.449466575));
    CHECK(compare(record_of(5, 10), record_of(6, 10), sig) == PerformanceComparison::HumanBetter);
    CHECK(compare(record_of(20, 50), record_of(30, 50), sig) == PerformanceComparison::MachineBetter);

    CHECK(compare(TrackRecord("h"), record_of(9, 10), mean) == PerformanceComparison::HumanBetter);
}

TEST_CASE("critical value")
{
    CHECK(normal_upper_critical(0.05) == doctest::Approx(1.644853626951));
    CHECK(normal_upper_critical(0.01) == doctest::Approx(2.326347874041));
    CHECK_THROWS_AS(normal_upper_critical(0.0), ValidationError);
}

TEST_CASE("brier score")
{
    CHECK(calibration_report({{1.0, true}}).brier == 0.0);
    CHECK(calibration_report({{0.0, true}}).brier == 1.0);
    const CalibrationReport r = calibration_report({{0.8, true}, {0.6, false}});
    CHECK(r.brier == doctest::Approx(0.20));
    CHECK(r.bin_count[2] == 1);
    CHECK(r.bin_count[1] == 1);
    CHECK(*r.bin_accuracy[2] == 1.0);
    CHECK(*r.bin_accuracy[1] == 0.0);
    CHECK_FALSE(r.bin_accuracy[0].has_value());
    CHECK_THROWS_AS(calibration_report({}), ValidationError);
}

TEST_CASE("track record json")
{
    const TrackRecord r = record_of(7, 12, 10);
    const Json j = r;
    const TrackRecord back = j.get<TrackRecord>();
    CHECK(back.window() == r.window());
    CHECK(back.total_count() == 12);
    CHECK(back.window_size() == 10);
}
