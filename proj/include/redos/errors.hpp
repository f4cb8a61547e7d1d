#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace redos {

struct RegexSyntaxError : std::runtime_error {
    std::size_t position;
    RegexSyntaxError(std::size_t pos, const std::string& msg)
        : std::runtime_error("syntax error at offset " + std::to_string(pos) + ": " + msg),
          position(pos) {}
};

struct UnsupportedFeature : std::runtime_error {
    std::string feature;
    explicit UnsupportedFeature(const std::string& name)
        : std::runtime_error("unsupported regex feature: " + name), feature(name) {}
};

struct ExpansionLimit : std::runtime_error {
    explicit ExpansionLimit(std::size_t cap)
        : std::runtime_error("bounded-repetition expansion exceeds state cap " +
                             std::to_string(cap)) {}
};

struct NoWitnessWithinLength : std::runtime_error {
    explicit NoWitnessWithinLength(std::size_t max_len)
        : std::runtime_error("no accepted string of length <= " + std::to_string(max_len)) {}
};

struct AnalysisBudgetExceeded : std::runtime_error {
    explicit AnalysisBudgetExceeded(std::size_t cap)
        : std::runtime_error("ambiguity analysis exceeded product-state budget " +
                             std::to_string(cap)) {}
};

}  // namespace redos
