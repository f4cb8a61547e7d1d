#include "redos/chars.hpp"

#include <algorithm>

namespace redos {

CharSet::CharSet(std::vector<CharRange> ranges) : ranges_(std::move(ranges)) {
    normalize();
}

void CharSet::normalize() {
    std::sort(ranges_.begin(), ranges_.end(),
              [](const CharRange& a, const CharRange& b) { return a.lo < b.lo; });
    std::vector<CharRange> merged;
    for (const auto& r : ranges_) {
        if (r.lo > r.hi) continue;
        if (!merged.empty() && r.lo <= merged.back().hi + 1 && merged.back().hi + 1 != 0) {
            merged.back().hi = std::max(merged.back().hi, r.hi);
        } else {
            merged.push_back(r);
        }
    }
    ranges_ = std::move(merged);
}

void CharSet::add(Codepoint lo, Codepoint hi) {
    ranges_.push_back({lo, hi});
    normalize();
}

bool CharSet::contains(Codepoint c) const {
    auto it = std::upper_bound(ranges_.begin(), ranges_.end(), c,
                               [](Codepoint v, const CharRange& r) { return v < r.lo; });
    if (it == ranges_.begin()) return false;
    --it;
    return c <= it->hi;
}

std::uint64_t CharSet::size() const {
    std::uint64_t n = 0;
    for (const auto& r : ranges_) n += std::uint64_t(r.hi) - r.lo + 1;
    return n;
}

CharSet CharSet::complement() const {
    std::vector<CharRange> out;
    Codepoint next = 0;
    for (const auto& r : ranges_) {
        if (r.lo > next) out.push_back({next, r.lo - 1});
        next = r.hi + 1;
        if (r.hi == kMaxCodepoint) return CharSet(std::move(out));
    }
    if (next <= kMaxCodepoint) out.push_back({next, kMaxCodepoint});
    return CharSet(std::move(out));
}

CharSet CharSet::intersect(const CharSet& other) const {
    std::vector<CharRange> out;
    size_t i = 0, j = 0;
    while (i < ranges_.size() && j < other.ranges_.size()) {
        const auto& a = ranges_[i];
        const auto& b = other.ranges_[j];
        Codepoint lo = std::max(a.lo, b.lo);
        Codepoint hi = std::min(a.hi, b.hi);
        if (lo <= hi) out.push_back({lo, hi});
        if (a.hi < b.hi) ++i; else ++j;
    }
    return CharSet(std::move(out));
}

CharSet CharSet::unite(const CharSet& other) const {
    std::vector<CharRange> out = ranges_;
    out.insert(out.end(), other.ranges_.begin(), other.ranges_.end());
    return CharSet(std::move(out));
}

std::u32string utf8_decode(std::string_view s) {
    std::u32string out;
    out.reserve(s.size());
    size_t i = 0;
    while (i < s.size()) {
        unsigned char c = s[i];
        Codepoint cp = 0xFFFD;
        size_t len = 1;
        if (c < 0x80) {
            cp = c;
        } else if ((c & 0xE0) == 0xC0 && i + 1 < s.size() && (s[i + 1] & 0xC0) == 0x80) {
            cp = (Codepoint(c & 0x1F) << 6) | (s[i + 1] & 0x3F);
            len = 2;
            if (cp < 0x80) cp = 0xFFFD;
        } else if ((c & 0xF0) == 0xE0 && i + 2 < s.size() && (s[i + 1] & 0xC0) == 0x80 &&
                   (s[i + 2] & 0xC0) == 0x80) {
            cp = (Codepoint(c & 0x0F) << 12) | (Codepoint(s[i + 1] & 0x3F) << 6) | (s[i + 2] & 0x3F);
            len = 3;
            if (cp < 0x800) cp = 0xFFFD;
        } else if ((c & 0xF8) == 0xF0 && i + 3 < s.size() && (s[i + 1] & 0xC0) == 0x80 &&
                   (s[i + 2] & 0xC0) == 0x80 && (s[i + 3] & 0xC0) == 0x80) {
            cp = (Codepoint(c & 0x07) << 18) | (Codepoint(s[i + 1] & 0x3F) << 12) |
                 (Codepoint(s[i + 2] & 0x3F) << 6) | (s[i + 3] & 0x3F);
            len = 4;
            if (cp < 0x10000 || cp > kMaxCodepoint) cp = 0xFFFD;
        }
        out.push_back(cp);
        i += len;
    }
    return out;
}

std::string utf8_encode(Codepoint c) {
    std::string out;
    if (c < 0x80) {
        out.push_back(char(c));
    } else if (c < 0x800) {
        out.push_back(char(0xC0 | (c >> 6)));
        out.push_back(char(0x80 | (c & 0x3F)));
    } else if (c < 0x10000) {
        out.push_back(char(0xE0 | (c >> 12)));
        out.push_back(char(0x80 | ((c >> 6) & 0x3F)));
        out.push_back(char(0x80 | (c & 0x3F)));
    } else {
        out.push_back(char(0xF0 | (c >> 18)));
        out.push_back(char(0x80 | ((c >> 12) & 0x3F)));
        out.push_back(char(0x80 | ((c >> 6) & 0x3F)));
        out.push_back(char(0x80 | (c & 0x3F)));
    }
    return out;
}

std::string utf8_encode(std::u32string_view s) {
    std::string out;
    for (Codepoint c : s) out += utf8_encode(c);
    return out;
}

}  // namespace redos
