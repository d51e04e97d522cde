#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

namespace fascai {

using Json = nlohmann::json;
using OptionIndex = std::size_t;

// Interaction modalities, ordered by increasing human cognitive load and autonomy.
enum class Modality {
    MachineOnly,
    System1Nudge,
    System2Nudge,
    MetacognitionNudge,
    HumanOnly,
};

inline constexpr std::array<Modality, 5> kAllModalities = {
    Modality::MachineOnly,        Modality::System1Nudge, Modality::System2Nudge,
    Modality::MetacognitionNudge, Modality::HumanOnly,
};

enum class ConfidenceBin { Low, Medium, High };

inline constexpr std::array<ConfidenceBin, 3> kAllBins = {
    ConfidenceBin::Low, ConfidenceBin::Medium, ConfidenceBin::High};

enum class PerformanceComparison { HumanBetter, MachineBetter };

inline constexpr std::array<PerformanceComparison, 2> kAllComparisons = {
    PerformanceComparison::HumanBetter, PerformanceComparison::MachineBetter};

std::string_view to_string(Modality m);
std::string_view to_string(ConfidenceBin b);
std::string_view to_string(PerformanceComparison p);

Modality parse_modality(std::string_view s);
ConfidenceBin parse_confidence_bin(std::string_view s);
PerformanceComparison parse_comparison(std::string_view s);

// True for the three modalities where the machine nudges a deciding human.
bool is_nudge(Modality m);
// True when the human commits to an unaided decision before seeing the machine.
bool records_initial_decision(Modality m);

struct ConfidenceThresholds {
    double low = 1.0 / 3.0;
    double high = 2.0 / 3.0;

    void validate() const;
};

// Half-open binning: [0, low) -> Low, [low, high) -> Medium, [high, 1] -> High.
ConfidenceBin bin_confidence(double confidence, const ConfidenceThresholds& thresholds);
ConfidenceBin bin_confidence(double confidence, double t_low, double t_high);

struct Cell {
    PerformanceComparison comparison = PerformanceComparison::HumanBetter;
    ConfidenceBin bin = ConfidenceBin::Low;

    std::size_t index() const;
    static Cell from_index(std::size_t i);
    // "human_better.low" etc.
    std::string key() const;
    static Cell parse_key(std::string_view key);

    friend bool operator==(const Cell&, const Cell&) = default;
};

inline constexpr std::size_t kCellCount = 6;

class ValueProfile {
public:
    struct Weights {
        double decision_quality = 1.0;
        double upskilling = 0.0;
        double agency = 0.0;
        double speed = 0.0;
    };

    ValueProfile();
    // Weights must be non-negative with at least one positive; they are
    // normalized to sum to one.
    ValueProfile(Weights weights, bool allow_machine_autonomy);

    const Weights& weights() const { return weights_; }
    bool allow_machine_autonomy() const { return allow_machine_autonomy_; }
    bool allows(Modality m) const;

private:
    Weights weights_;
    bool allow_machine_autonomy_ = true;
};

class AllocationTable {
public:
    AllocationTable();
    AllocationTable(std::array<Modality, kCellCount> entries, std::string preset_name);

    static AllocationTable standard();
    static AllocationTable no_autonomy();
    static AllocationTable preset(std::string_view name);

    Modality at(Cell c) const { return entries_[c.index()]; }
    Modality at(PerformanceComparison p, ConfidenceBin b) const { return at(Cell{p, b}); }
    void set(Cell c, Modality m);

    const std::string& preset_name() const { return preset_name_; }
    const std::array<Modality, kCellCount>& entries() const { return entries_; }
    bool contains(Modality m) const;

    friend bool operator==(const AllocationTable&, const AllocationTable&) = default;

private:
    std::array<Modality, kCellCount> entries_;
    std::string preset_name_;
};

AllocationTable default_table(const ValueProfile& profile);

struct TrialOutcome {
    std::string trial_id;
    Modality modality = Modality::HumanOnly;
    OptionIndex final_option = 0;
    bool correct = false;
    std::optional<OptionIndex> machine_option;
    std::optional<OptionIndex> human_initial_option;
    std::optional<bool> reveal_requested;
    std::size_t elapsed_steps = 0;

    void validate() const;
};

void to_json(Json& j, const AllocationTable& t);
void from_json(const Json& j, AllocationTable& t);
void to_json(Json& j, const ValueProfile& p);
void from_json(const Json& j, ValueProfile& p);
void to_json(Json& j, const ConfidenceThresholds& t);
void from_json(const Json& j, ConfidenceThresholds& t);

} // namespace fascai
