#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <string_view>
#include <vector>

#include "redos/ast.hpp"
#include "redos/nfa.hpp"
#include "redos/parser.hpp"

namespace redos {

struct MatchOutcome {
    bool matched = false;
    bool budget_exhausted = false;  // when set, `matched` is unknown
    std::uint64_t steps = 0;        // state-visits, including backtracked ones
    std::chrono::duration<double> elapsed{0};
};

inline constexpr std::uint64_t kDefaultStepBudget = 100'000'000;  // classification
inline constexpr std::uint64_t kFuzzStepBudget = 1'000'000;       // differential fuzzing

// Backtracking program. Compiled from the AST (not the NFA) so that
// greedy/lazy ordering mirrors production engines.
struct Inst {
    enum class Op : std::uint8_t { Char, Split, Jmp, AssertStart, AssertEnd, Match };
    Op op;
    CharSet on;          // Char
    std::uint32_t x = 0;  // Split: preferred; Jmp: target
    std::uint32_t y = 0;  // Split: alternative
};

struct CompiledRegex {
    RegexAst ast;
    Nfa nfa;
    std::vector<Inst> program;
    AnchorMode anchor_mode = AnchorMode::FullMatch;
    bool starts_anchored = false;
    bool ends_anchored = false;
};

CompiledRegex compile_regex(std::string_view pattern, AnchorMode mode,
                            std::size_t state_cap = kDefaultStateCap);
CompiledRegex compile_regex(const RegexAst& ast, std::size_t state_cap = kDefaultStateCap);

struct BacktrackLimits {
    std::uint64_t step_budget = kDefaultStepBudget;
    std::optional<std::chrono::steady_clock::time_point> deadline;
    std::size_t max_stack = 4'000'000;  // pending-alternative cap; overflow = exhausted
};

// Spencer-style predictive parse with backtracking; every instruction
// dispatch counts one step. UnanchoredSearch retries at each start offset.
MatchOutcome backtrack_match(const CompiledRegex& re, std::u32string_view input,
                             const BacktrackLimits& limits = {});
MatchOutcome backtrack_match(const RegexAst& ast, std::string_view input, AnchorMode mode,
                             std::uint64_t step_budget = kDefaultStepBudget);

// Thompson breadth simulation on the epsilon-free NFA; steps is the summed
// frontier size and never exceeds (|input|+1) * |states|.
MatchOutcome linear_match(const CompiledRegex& re, std::u32string_view input);
MatchOutcome linear_match(const Nfa& nfa, std::u32string_view input, AnchorMode mode,
                          bool starts_anchored = false, bool ends_anchored = false);
MatchOutcome linear_match(const Nfa& nfa, std::string_view input, AnchorMode mode,
                          bool starts_anchored = false, bool ends_anchored = false);

// Whole-string membership of the NFA body language, ignoring anchor mode.
bool nfa_accepts(const Nfa& nfa, std::u32string_view word);

enum class EngineKind { Backtracking, LinearSafe };

std::optional<EngineKind> engine_kind_from_string(std::string_view name);
std::string to_string(EngineKind k);

class Matcher {
public:
    virtual ~Matcher() = default;
    virtual MatchOutcome match(const CompiledRegex& re, std::string_view input) = 0;
};

// Yields matcher instances on demand; the backtracking matcher carries the
// configured step budget.
class EngineFactory {
public:
    explicit EngineFactory(EngineKind kind, std::uint64_t budget = kDefaultStepBudget)
        : kind_(kind), budget_(budget) {}
    EngineKind kind() const { return kind_; }
    std::uint64_t budget() const { return budget_; }
    std::unique_ptr<Matcher> make() const;

private:
    EngineKind kind_;
    std::uint64_t budget_;
};

}  // namespace redos
