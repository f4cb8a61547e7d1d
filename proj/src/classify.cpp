#include "redos/classify.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace redos {

std::string to_string(DynamicClassification::Class c) {
    switch (c) {
        case DynamicClassification::Class::Linear: return "linear";
        case DynamicClassification::Class::Polynomial: return "polynomial";
        case DynamicClassification::Class::Exponential: return "exponential";
    }
    return "?";
}

nlohmann::json DynamicClassification::to_json() const {
    nlohmann::json j;
    j["class"] = to_string(cls);
    j["degree"] = degree;
    j["severity"] = severity == Severity::High ? "high" : "low";
    j["slope"] = slope;
    j["steps_per_second"] = steps_per_second;
    auto arr = nlohmann::json::array();
    for (const auto& s : samples)
        arr.push_back({{"pumps", s.pumps}, {"steps", s.steps}, {"elapsed_s", s.elapsed.count()}});
    j["samples"] = arr;
    return j;
}

double reference_steps_per_second() {
    static const double rate = [] {
        // Linear workload: a*c against a long run of a's ending in a mismatch.
        CompiledRegex re = compile_regex("a*c", AnchorMode::FullMatch);
        std::u32string input(200000, U'a');
        input += U'b';
        BacktrackLimits lim;
        lim.step_budget = UINT64_MAX;
        double best = 0;
        for (int i = 0; i < 3; ++i) {
            MatchOutcome o = backtrack_match(re, input, lim);
            double r = double(o.steps) / std::max(o.elapsed.count(), 1e-9);
            best = std::max(best, r);
        }
        return best;
    }();
    return rate;
}

namespace {

// Least-squares slope of log(steps) vs log(pumps).
double loglog_slope(const std::vector<GrowthSample>& pts, double& r2) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    const double n = double(pts.size());
    for (const auto& p : pts) {
        double x = std::log(double(p.pumps));
        double y = std::log(double(std::max<std::uint64_t>(p.steps, 1)));
        sx += x; sy += y; sxx += x * x; sxy += x * y; syy += y * y;
    }
    double denom = n * sxx - sx * sx;
    if (denom <= 0) {
        r2 = 0;
        return 0;
    }
    double slope = (n * sxy - sx * sy) / denom;
    double ryden = (n * sxx - sx * sx) * (n * syy - sy * sy);
    double rnum = n * sxy - sx * sy;
    r2 = ryden > 0 ? (rnum * rnum) / ryden : 1.0;
    return slope;
}

}  // namespace

DynamicClassification classify_dynamic(const AttackTemplate& tmpl, const RegexAst& ast,
                                       const ClassifyOptions& opts) {
    CompiledRegex re = compile_regex(ast);
    DynamicClassification out;
    out.steps_per_second = reference_steps_per_second();
    out.second_equivalent_steps = std::uint64_t(out.steps_per_second);

    BacktrackLimits lim;
    lim.step_budget = opts.step_budget;
    for (std::size_t k = 1; k <= opts.max_pumps; ++k) {
        auto input = utf8_decode(tmpl.instantiate(k));
        MatchOutcome o = backtrack_match(re, input, lim);
        if (o.budget_exhausted) {
            out.samples.push_back({k, o.steps, o.elapsed});
            break;
        }
        out.samples.push_back({k, o.steps, o.elapsed});
    }

    // Exponential: per-pump ratio >= 1.5 sustained over >= 4 increments,
    // judged past the noise floor.
    int streak = 0;
    bool exponential = false;
    for (std::size_t i = 1; i < out.samples.size(); ++i) {
        double ratio = double(out.samples[i].steps) / double(out.samples[i - 1].steps);
        if (ratio >= 1.5 && out.samples[i].steps > 1000) {
            if (++streak >= 4) exponential = true;
        } else {
            streak = 0;
        }
    }

    if (exponential) {
        out.cls = DynamicClassification::Class::Exponential;
    } else {
        std::vector<GrowthSample> tail;
        for (const auto& s : out.samples)
            if (s.pumps >= 8) tail.push_back(s);
        if (tail.size() < 3) {
            tail = out.samples;
            if (tail.size() > 2) tail.erase(tail.begin(), tail.begin() + tail.size() / 2);
        }
        double r2 = 0;
        out.slope = loglog_slope(tail, r2);
        if (out.slope < 1.2) {
            out.cls = DynamicClassification::Class::Linear;
        } else {
            int d = int(std::lround(out.slope));
            if (d < 2 || std::abs(out.slope - d) > 0.5 || r2 < 0.25) throw InconsistentGrowth();
            out.cls = DynamicClassification::Class::Polynomial;
            out.degree = d;
        }
    }

    // Severity: High iff the 1-second-equivalent step count is reached within
    // 100 pumps (extrapolated from the fitted model when unsampled).
    const double threshold = double(out.second_equivalent_steps);
    bool high = false;
    for (const auto& s : out.samples)
        if (s.pumps <= 100 && double(s.steps) >= threshold) high = true;
    if (!high && !out.samples.empty()) {
        const auto& last = out.samples.back();
        if (last.pumps < 100) {
            double predicted;
            if (out.cls == DynamicClassification::Class::Exponential) {
                // Conservative doubling-rate extrapolation from the tail ratio.
                double ratio = out.samples.size() > 1
                                   ? double(last.steps) /
                                         double(out.samples[out.samples.size() - 2].steps)
                                   : 2.0;
                ratio = std::max(ratio, 1.5);
                predicted = double(last.steps) * std::pow(ratio, 100.0 - double(last.pumps));
            } else {
                predicted = double(last.steps) * std::pow(100.0 / double(last.pumps), out.slope);
            }
            high = predicted >= threshold;
        }
    }
    out.severity = high ? DynamicClassification::Severity::High
                        : DynamicClassification::Severity::Low;
    return out;
}

PumpCalibration calibrate_pumps(const AttackTemplate& tmpl, const RegexAst& ast,
                                const DynamicClassification& cls,
                                const std::vector<std::chrono::duration<double>>& targets) {
    if (!cls.super_linear())
        throw std::invalid_argument("calibrate_pumps requires a super-linear classification");

    CompiledRegex re = compile_regex(ast);
    auto sorted = targets;
    std::sort(sorted.begin(), sorted.end());
    const double largest = sorted.empty() ? 0.0 : sorted.back().count();

    auto measure = [&](std::size_t pumps) {
        auto input = utf8_decode(tmpl.instantiate(pumps));
        BacktrackLimits lim;
        lim.step_budget = UINT64_MAX;
        lim.deadline = std::chrono::steady_clock::now() +
                       std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                           std::chrono::duration<double>(largest * 4 + 1.0));
        return backtrack_match(re, input, lim);
    };

    PumpCalibration out;
    std::size_t k = 1;
    MatchOutcome last = measure(k);
    std::map<std::size_t, MatchOutcome> memo{{k, last}};
    constexpr std::size_t kMaxPumpCount = 1 << 22;
    for (const auto& target : sorted) {
        // Pump counts are monotone in the target; resume from the last count.
        while (last.elapsed.count() < target.count() && !last.budget_exhausted &&
               k < kMaxPumpCount) {
            // Geometric advance sized by the remaining gap for polynomial
            // growth; exponential growth steps one pump at a time.
            std::size_t next;
            if (cls.cls == DynamicClassification::Class::Exponential) {
                next = k + 1;
            } else {
                double factor = std::pow(std::max(target.count(), 1e-3) /
                                             std::max(last.elapsed.count(), 1e-4),
                                         1.0 / std::max(cls.slope, 1.2));
                factor = std::clamp(factor, 1.1, 4.0);
                next = std::max(k + 1, std::size_t(double(k) * factor));
            }
            k = next;
            last = measure(k);
            memo[k] = last;
        }
        CalibrationEntry e;
        e.target = target;
        e.pump_count = std::max<std::size_t>(k, 1);
        e.predicted_steps = last.steps;
        e.measured = last.elapsed;
        // Measurement noise can push the first count past 2x the target; the
        // previous count, when it sits in [target/2, target), is the better
        // ladder entry.
        if (auto it = memo.find(k - 1);
            k > 1 && it != memo.end() && e.measured.count() > 2 * target.count() &&
            it->second.elapsed.count() >= 0.5 * target.count()) {
            e.pump_count = k - 1;
            e.predicted_steps = it->second.steps;
            e.measured = it->second.elapsed;
        }
        if (last.budget_exhausted || k >= kMaxPumpCount) {
            if (last.elapsed.count() < target.count()) out.over_budget = true;
        }
        out.ladder.push_back(e);
    }
    return out;
}

}  // namespace redos
