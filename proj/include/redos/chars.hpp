#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace redos {

using Codepoint = char32_t;

inline constexpr Codepoint kMaxCodepoint = 0x10FFFF;

// Inclusive codepoint range.
struct CharRange {
    Codepoint lo = 0;
    Codepoint hi = 0;
    friend bool operator==(const CharRange&, const CharRange&) = default;
};

// A set of codepoints kept as sorted, disjoint, non-adjacent ranges.
class CharSet {
public:
    CharSet() = default;
    explicit CharSet(std::vector<CharRange> ranges);
    static CharSet single(Codepoint c) { return CharSet({{c, c}}); }
    static CharSet range(Codepoint lo, Codepoint hi) { return CharSet({{lo, hi}}); }
    static CharSet any() { return CharSet({{0, kMaxCodepoint}}); }

    void add(Codepoint lo, Codepoint hi);
    bool contains(Codepoint c) const;
    bool empty() const { return ranges_.empty(); }
    std::uint64_t size() const;

    CharSet complement() const;
    CharSet intersect(const CharSet& other) const;
    CharSet unite(const CharSet& other) const;

    const std::vector<CharRange>& ranges() const { return ranges_; }
    Codepoint first() const { return ranges_.front().lo; }

    friend bool operator==(const CharSet&, const CharSet&) = default;

private:
    void normalize();
    std::vector<CharRange> ranges_;
};

// UTF-8 <-> codepoint conversions. Invalid bytes decode as U+FFFD.
std::u32string utf8_decode(std::string_view s);
std::string utf8_encode(std::u32string_view s);
std::string utf8_encode(Codepoint c);

}  // namespace redos
