#pragma once

#include <chrono>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "redos/ambiguity.hpp"
#include "redos/engines.hpp"

namespace redos {

struct InconsistentGrowth : std::runtime_error {
    InconsistentGrowth() : std::runtime_error("step growth fits neither model") {}
};

struct GrowthSample {
    std::size_t pumps = 0;
    std::uint64_t steps = 0;
    std::chrono::duration<double> elapsed{0};
};

struct DynamicClassification {
    enum class Class { Linear, Polynomial, Exponential };
    enum class Severity { High, Low };

    Class cls = Class::Linear;
    int degree = 0;  // Polynomial only
    Severity severity = Severity::Low;
    std::vector<GrowthSample> samples;
    double slope = 0.0;               // log-log fit over the sampled tail
    double steps_per_second = 0.0;    // measured locally
    std::uint64_t second_equivalent_steps = 0;

    bool super_linear() const { return cls != Class::Linear; }
    nlohmann::json to_json() const;
};

std::string to_string(DynamicClassification::Class c);

struct ClassifyOptions {
    std::uint64_t step_budget = kDefaultStepBudget;
    std::size_t max_pumps = 160;
};

// Measure reference-engine steps at growing pump counts and fit the growth.
// Throws InconsistentGrowth when neither model fits.
DynamicClassification classify_dynamic(const AttackTemplate& tmpl, const RegexAst& ast,
                                       const ClassifyOptions& opts = {});

// Local reference-engine throughput in steps per second (measured once).
double reference_steps_per_second();

struct CalibrationEntry {
    std::chrono::duration<double> target{0};
    std::size_t pump_count = 0;
    std::uint64_t predicted_steps = 0;
    std::chrono::duration<double> measured{0};
};

struct PumpCalibration {
    std::vector<CalibrationEntry> ladder;
    bool over_budget = false;  // largest target unreachable under the step cap
};

inline const std::vector<std::chrono::duration<double>>& default_ladder() {
    static const std::vector<std::chrono::duration<double>> l{
        std::chrono::duration<double>(0.2), std::chrono::duration<double>(0.4),
        std::chrono::duration<double>(0.8), std::chrono::duration<double>(1.6),
        std::chrono::duration<double>(3.0)};
    return l;
}

// For each target duration, the smallest pump count whose locally measured
// reference-engine match time reaches the target. Requires a super-linear
// classification; throws std::invalid_argument otherwise.
PumpCalibration calibrate_pumps(const AttackTemplate& tmpl, const RegexAst& ast,
                                const DynamicClassification& cls,
                                const std::vector<std::chrono::duration<double>>& targets =
                                    default_ladder());

}  // namespace redos
