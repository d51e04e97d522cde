#include "fascai/core.hpp"

#include <cmath>

#include "fascai/errors.hpp"

namespace fascai {

std::string_view to_string(Modality m)
{
    switch (m) {
    case Modality::MachineOnly: return "machine_only";
    case Modality::System1Nudge: return "system1_nudge";
    case Modality::System2Nudge: return "system2_nudge";
    case Modality::MetacognitionNudge: return "metacognition_nudge";
    case Modality::HumanOnly: return "human_only";
    }
    return "?";
}

std::string_view to_string(ConfidenceBin b)
{
    switch (b) {
    case ConfidenceBin::Low: return "low";
    case ConfidenceBin::Medium: return "medium";
    case ConfidenceBin::High: return "high";
    }
    return "?";
}

std::string_view to_string(PerformanceComparison p)
{
    return p == PerformanceComparison::HumanBetter ? "human_better" : "machine_better";
}

Modality parse_modality(std::string_view s)
{
    for (Modality m : kAllModalities)
        if (to_string(m) == s)
            return m;
    throw ValidationError("unknown modality '" + std::string(s) + "'");
}

ConfidenceBin parse_confidence_bin(std::string_view s)
{
    for (ConfidenceBin b : kAllBins)
        if (to_string(b) == s)
            return b;
    throw ValidationError("unknown confidence bin '" + std::string(s) + "'");
}

PerformanceComparison parse_comparison(std::string_view s)
{
    for (PerformanceComparison p : kAllComparisons)
        if (to_string(p) == s)
            return p;
    throw ValidationError("unknown performance comparison '" + std::string(s) + "'");
}

bool is_nudge(Modality m)
{
    return m == Modality::System1Nudge || m == Modality::System2Nudge ||
           m == Modality::MetacognitionNudge;
}

bool records_initial_decision(Modality m)
{
    return m == Modality::System2Nudge || m == Modality::MetacognitionNudge ||
           m == Modality::HumanOnly;
}

void ConfidenceThresholds::validate() const
{
    if (!(low > 0.0 && low < high && high < 1.0))
        throw ValidationError("confidence thresholds must satisfy 0 < low < high < 1");
}

ConfidenceBin bin_confidence(double confidence, const ConfidenceThresholds& thresholds)
{
    thresholds.validate();
    if (!(confidence >= 0.0 && confidence <= 1.0))
        throw ValidationError("confidence must lie in [0, 1]");
    if (confidence < thresholds.low)
        return ConfidenceBin::Low;
    if (confidence < thresholds.high)
        return ConfidenceBin::Medium;
    return ConfidenceBin::High;
}

ConfidenceBin bin_confidence(double confidence, double t_low, double t_high)
{
    return bin_confidence(confidence, ConfidenceThresholds{t_low, t_high});
}

std::size_t Cell::index() const
{
    return static_cast<std::size_t>(comparison) * 3 + static_cast<std::size_t>(bin);
}

Cell Cell::from_index(std::size_t i)
{
    if (i >= kCellCount)
        throw ValidationError("cell index out of range");
    return Cell{static_cast<PerformanceComparison>(i / 3), static_cast<ConfidenceBin>(i % 3)};
}

std::string Cell::key() const
{
    std::string k(to_string(comparison));
    k += '.';
    k += to_string(bin);
    return k;
}

Cell Cell::parse_key(std::string_view key)
{
    const auto dot = key.find('.');
    if (dot == std::string_view::npos)
        throw ValidationError("malformed cell key '" + std::string(key) + "'");
    return Cell{parse_comparison(key.substr(0, dot)), parse_confidence_bin(key.substr(dot + 1))};
}

ValueProfile::ValueProfile() : ValueProfile(Weights{}, true) {}

ValueProfile::ValueProfile(Weights w, bool allow_machine_autonomy)
    : allow_machine_autonomy_(allow_machine_autonomy)
{
    for (double v : {w.decision_quality, w.upskilling, w.agency, w.speed})
        if (!(v >= 0.0) || !std::isfinite(v))
            throw ValidationError("value weights must be finite and non-negative");
    const double total = w.decision_quality + w.upskilling + w.agency + w.speed;
    if (!(total > 0.0))
        throw ValidationError("at least one value weight must be positive");
    weights_ = {w.decision_quality / total, w.upskilling / total, w.agency / total,
                w.speed / total};
}

bool ValueProfile::allows(Modality m) const
{
    return allow_machine_autonomy_ || m != Modality::MachineOnly;
}

AllocationTable::AllocationTable() : AllocationTable(standard()) {}

AllocationTable::AllocationTable(std::array<Modality, kCellCount> entries, std::string preset_name)
    : entries_(entries), preset_name_(std::move(preset_name))
{
}

AllocationTable AllocationTable::standard()
{
    // Rows: human_better, machine_better; columns: low, medium, high.
    return AllocationTable({Modality::HumanOnly, Modality::MetacognitionNudge,
                            Modality::System2Nudge, Modality::System2Nudge,
                            Modality::System1Nudge, Modality::MachineOnly},
                           "standard");
}

AllocationTable AllocationTable::no_autonomy()
{
    auto t = standard();
    t.entries_[Cell{PerformanceComparison::MachineBetter, ConfidenceBin::High}.index()] =
        Modality::System1Nudge;
    t.preset_name_ = "no-autonomy";
    return t;
}

AllocationTable AllocationTable::preset(std::string_view name)
{
    if (name == "standard")
        return standard();
    if (name == "no-autonomy")
        return no_autonomy();
    throw ValidationError("unknown allocation preset '" + std::string(name) + "'");
}

void AllocationTable::set(Cell c, Modality m)
{
    entries_[c.index()] = m;
}

bool AllocationTable::contains(Modality m) const
{
    for (Modality e : entries_)
        if (e == m)
            return true;
    return false;
}

AllocationTable default_table(const ValueProfile& profile)
{
    return profile.allow_machine_autonomy() ? AllocationTable::standard()
                                            : AllocationTable::no_autonomy();
}

void TrialOutcome::validate() const
{
    if (human_initial_option.has_value() != records_initial_decision(modality))
        throw ValidationError("trial " + trial_id +
                              ": initial decision must be present exactly for "
                              "system2, metacognition and human-only trials");
    if (reveal_requested.has_value() != (modality == Modality::MetacognitionNudge))
        throw ValidationError("trial " + trial_id +
                              ": reveal choice must be present exactly for metacognition trials");
}

void to_json(Json& j, const AllocationTable& t)
{
    Json cells = Json::object();
    for (std::size_t i = 0; i < kCellCount; ++i)
        cells[Cell::from_index(i).key()] = std::string(to_string(t.entries()[i]));
    j = Json{{"preset", t.preset_name()}, {"cells", cells}};
}

void from_json(const Json& j, AllocationTable& t)
{
    if (!j.is_object())
        throw ValidationError("allocation table must be an object");
    if (!j.contains("cells")) {
        t = AllocationTable::preset(j.value("preset", std::string("standard")));
        return;
    }
    const Json& cells = j.at("cells");
    if (!cells.is_object() || cells.size() != kCellCount)
        throw ValidationError("allocation table must list exactly six cells");
    std::array<Modality, kCellCount> entries{};
    std::array<bool, kCellCount> seen{};
    for (const auto& [key, value] : cells.items()) {
        const Cell c = Cell::parse_key(key);
        if (seen[c.index()])
            throw ValidationError("duplicate allocation cell '" + key + "'");
        seen[c.index()] = true;
        entries[c.index()] = parse_modality(value.get<std::string>());
    }
    t = AllocationTable(entries, j.value("preset", std::string("custom")));
}

void to_json(Json& j, const ValueProfile& p)
{
    const auto& w = p.weights();
    j = Json{{"weights",
              {{"decision_quality", w.decision_quality},
               {"upskilling", w.upskilling},
               {"agency", w.agency},
               {"speed", w.speed}}},
             {"allow_machine_autonomy", p.allow_machine_autonomy()}};
}

void from_json(const Json& j, ValueProfile& p)
{
    ValueProfile::Weights w{0.0, 0.0, 0.0, 0.0};
    if (j.contains("weights")) {
        for (const auto& [key, value] : j.at("weights").items()) {
            const double v = value.get<double>();
            if (key == "decision_quality") w.decision_quality = v;
            else if (key == "upskilling") w.upskilling = v;
            else if (key == "agency") w.agency = v;
            else if (key == "speed") w.speed = v;
            else throw ValidationError("unknown value name '" + key + "'");
        }
    } else {
        w = ValueProfile::Weights{};
    }
    p = ValueProfile(w, j.value("allow_machine_autonomy", true));
}

void to_json(Json& j, const ConfidenceThresholds& t)
{
    j = Json{{"low", t.low}, {"high", t.high}};
}

void from_json(const Json& j, ConfidenceThresholds& t)
{
    ConfidenceThresholds out;
    out.low = j.value("low", out.low);
    out.high = j.value("high", out.high);
    out.validate();
    t = out;
}

} // namespace fascai
