#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gen.hpp"
#include "oracle.hpp"
#include "redos/classify.hpp"
#include "redos/engines.hpp"

using namespace redos;
using namespace redos::testing;

TEST_CASE("backtracking explodes on Fig. 3 regex") {
    CompiledRegex re = compile_regex("(a|a)*b", AnchorMode::FullMatch);
    std::u32string input(20, U'a');
    BacktrackLimits lim;
    lim.step_budget = 1ull << 40;
    MatchOutcome o = backtrack_match(re, input, lim);
    CHECK(!o.matched);
    CHECK(!o.budget_exhausted);
    CHECK(o.steps >= (1ull << 20));
}

TEST_CASE("step ratio doubles per character on Fig. 3 regex") {
    CompiledRegex re = compile_regex("(a|a)*b", AnchorMode::FullMatch);
    BacktrackLimits lim;
    lim.step_budget = 1ull << 40;
    std::uint64_t prev = 0;
    for (int k = 9; k <= 14; ++k) {
        MatchOutcome o = backtrack_match(re, std::u32string(k, U'a'), lim);
        if (prev) {
            double ratio = double(o.steps) / double(prev);
            CHECK(ratio >= 1.8);
            CHECK(ratio <= 2.2);
        }
        prev = o.steps;
    }
}

TEST_CASE("trivial match is cheap") {
    CompiledRegex re = compile_regex("abc", AnchorMode::FullMatch);
    MatchOutcome o = backtrack_match(re, U"abc");
    CHECK(o.matched);
    CHECK(o.steps <= 10);
}

TEST_CASE("a*a* quadratic golden") {
    CompiledRegex re = compile_regex("a*a*", AnchorMode::FullMatch);
    std::u32string input(100, U'a');
    input += U'b';
    MatchOutcome o1 = backtrack_match(re, input);
    MatchOutcome o2 = backtrack_match(re, input);
    CHECK(o1.steps == o2.steps);  // deterministic
    CHECK(!o1.matched);
    // Quadratic scale: n^2/2 state-visits up to the per-visit constant.
    CHECK(o1.steps >= 100 * 100 / 2);
    CHECK(o1.steps <= 8 * 100 * 100 / 2 + 1000);
    CHECK(o1.steps == 20805);  // frozen from an instrumented run
}

TEST_CASE("budget exhaustion is an outcome, not an error") {
    CompiledRegex re = compile_regex("(a|a)*b", AnchorMode::FullMatch);
    BacktrackLimits lim;
    lim.step_budget = 1000;
    MatchOutcome o = backtrack_match(re, std::u32string(40, U'a'), lim);
    CHECK(o.budget_exhausted);
    CHECK(o.steps <= 1001);
}

TEST_CASE("matched full-match runs visit at least one state per symbol") {
    std::mt19937_64 rng(3);
    for (int i = 0; i < 100; ++i) {
        RegexAst ast = gen_ast(rng);
        CompiledRegex re;
        try {
            re = compile_regex(ast);
        } catch (const ExpansionLimit&) {
            continue;
        }
        std::u32string w = gen_input(rng, 8);
        MatchOutcome o = backtrack_match(re, w);
        if (o.matched && !o.budget_exhausted) CHECK(o.steps >= w.size());
    }
}

TEST_CASE("linear engine bound and big-input behavior") {
    CompiledRegex re = compile_regex("(a|a)*b", AnchorMode::FullMatch);
    std::u32string input(1'000'000, U'a');
    MatchOutcome o = linear_match(re, input);
    CHECK(!o.matched);
    CHECK(o.steps <= (input.size() + 1) * re.nfa.size());
}

TEST_CASE("differential fuzz: engines agree; linear bound holds") {
    std::mt19937_64 rng(1234);
    int ran = 0;
    while (ran < 2000) {
        RegexAst ast = gen_ast(rng);
        CompiledRegex re;
        try {
            re = compile_regex(ast);
        } catch (const ExpansionLimit&) {
            continue;
        }
        std::u32string w = gen_input(rng, 10);
        MatchOutcome lin = linear_match(re, w);
        CHECK(lin.steps <= (w.size() + 1) * re.nfa.size());
        BacktrackLimits lim;
        lim.step_budget = kFuzzStepBudget;
        MatchOutcome bt = backtrack_match(re, w, lim);
        if (!bt.budget_exhausted) {
            CAPTURE(print_ast(ast));
            CAPTURE(utf8_encode(w));
            CHECK(bt.matched == lin.matched);
        }
        ++ran;
    }
}

TEST_CASE("unanchored search retries start offsets") {
    CompiledRegex re = compile_regex("a*b", AnchorMode::UnanchoredSearch);
    CHECK(backtrack_match(re, U"xxab").matched);
    CHECK(linear_match(re, U"xxab").matched);
    CHECK(!backtrack_match(re, U"xxaa").matched);
    CHECK(!linear_match(re, U"xxaa").matched);

    CompiledRegex anchored = compile_regex("^ab$", AnchorMode::UnanchoredSearch);
    CHECK(backtrack_match(anchored, U"ab").matched);
    CHECK(!backtrack_match(anchored, U"xab").matched);
    CHECK(!linear_match(anchored, U"abx").matched);
}

TEST_CASE("lazy vs greedy do not change acceptance") {
    for (auto [greedy, lazy] : std::initializer_list<std::pair<const char*, const char*>>{
             {"a*b", "a*?b"}, {"a+b", "a+?b"}, {"ab?c", "ab??c"}}) {
        CompiledRegex g = compile_regex(greedy, AnchorMode::FullMatch);
        CompiledRegex l = compile_regex(lazy, AnchorMode::FullMatch);
        for (const auto& w : enumerate_strings({U'a', U'b', U'c'}, 4)) {
            CHECK(backtrack_match(g, w).matched == backtrack_match(l, w).matched);
        }
    }
}

TEST_CASE("classify: exponential, high severity") {
    StaticReport r = analyze("(a|a)*b", AnchorMode::FullMatch);
    REQUIRE(r.attack.has_value());
    RegexAst ast = parse("(a|a)*b", AnchorMode::FullMatch);
    ClassifyOptions opts;
    opts.step_budget = 20'000'000;
    DynamicClassification c = classify_dynamic(*r.attack, ast, opts);
    CHECK(c.cls == DynamicClassification::Class::Exponential);
    CHECK(c.severity == DynamicClassification::Severity::High);
    CHECK(c.samples.size() >= 5);
}

TEST_CASE("classify: a*a* is quadratic") {
    StaticReport r = analyze("a*a*", AnchorMode::FullMatch);
    REQUIRE(r.attack.has_value());
    RegexAst ast = parse("a*a*", AnchorMode::FullMatch);
    ClassifyOptions opts;
    opts.step_budget = 20'000'000;
    DynamicClassification c = classify_dynamic(*r.attack, ast, opts);
    CHECK(c.cls == DynamicClassification::Class::Polynomial);
    CHECK(c.degree == 2);
}

TEST_CASE("classify: linear pattern") {
    AttackTemplate t;
    t.prefix = "";
    t.pump = "a";
    t.suffix = "!";
    t.anchor_mode = AnchorMode::FullMatch;
    RegexAst ast = parse("a*", AnchorMode::FullMatch);
    DynamicClassification c = classify_dynamic(t, ast);
    CHECK(c.cls == DynamicClassification::Class::Linear);
}

TEST_CASE("calibrate: degenerate target clamps to one pump") {
    StaticReport r = analyze("(a|a)*b", AnchorMode::FullMatch);
    REQUIRE(r.attack.has_value());
    RegexAst ast = parse("(a|a)*b", AnchorMode::FullMatch);
    ClassifyOptions opts;
    opts.step_budget = 10'000'000;
    DynamicClassification c = classify_dynamic(*r.attack, ast, opts);
    PumpCalibration cal =
        calibrate_pumps(*r.attack, ast, c, {std::chrono::duration<double>(0.0)});
    REQUIRE(cal.ladder.size() == 1);
    CHECK(cal.ladder[0].pump_count >= 1);
}

TEST_CASE("calibrate: linear classification is a precondition violation") {
    AttackTemplate t;
    t.pump = "a";
    t.suffix = "!";
    t.anchor_mode = AnchorMode::FullMatch;
    RegexAst ast = parse("a*", AnchorMode::FullMatch);
    DynamicClassification c = classify_dynamic(t, ast);
    CHECK_THROWS_AS(calibrate_pumps(t, ast, c, default_ladder()), std::invalid_argument);
}

TEST_CASE("engine factory: both engines agree; config names round-trip") {
    CHECK(engine_kind_from_string("backtracking") == EngineKind::Backtracking);
    CHECK(engine_kind_from_string("linear") == EngineKind::LinearSafe);
    CHECK(!engine_kind_from_string("pcre"));
    EngineFactory fb(EngineKind::Backtracking, 1'000'000);
    EngineFactory fl(EngineKind::LinearSafe);
    auto mb = fb.make();
    auto ml = fl.make();
    CompiledRegex re = compile_regex("[ab]+c", AnchorMode::FullMatch);
    for (std::string_view in : {"abc", "ac", "c", "abca", "ababc"}) {
        MatchOutcome ob = mb->match(re, in);
        MatchOutcome ol = ml->match(re, in);
        REQUIRE(!ob.budget_exhausted);
        CHECK(ob.matched == ol.matched);
    }
}
