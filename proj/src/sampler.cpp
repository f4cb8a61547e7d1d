#include "redos/sampler.hpp"

#include <queue>
#include <random>

#include "redos/engines.hpp"

namespace redos {

namespace {

// Minimum number of symbols from each state to an accept state.
std::vector<std::uint32_t> accept_distance(const Nfa& nfa) {
    constexpr std::uint32_t inf = UINT32_MAX;
    std::vector<std::uint32_t> dist(nfa.size(), inf);
    std::vector<std::vector<StateId>> rev(nfa.size());
    for (StateId q = 0; q < nfa.size(); ++q)
        for (const auto& e : nfa.edges[q]) rev[e.to].push_back(q);
    std::queue<StateId> bfs;
    for (StateId q = 0; q < nfa.size(); ++q)
        if (nfa.accept[q]) {
            dist[q] = 0;
            bfs.push(q);
        }
    while (!bfs.empty()) {
        StateId v = bfs.front();
        bfs.pop();
        for (StateId p : rev[v])
            if (dist[p] == inf) {
                dist[p] = dist[v] + 1;
                bfs.push(p);
            }
    }
    return dist;
}

Codepoint random_member_of(const CharSet& s, std::mt19937_64& rng) {
    // Prefer printable ASCII members.
    CharSet printable = s.intersect(CharSet::range(0x20, 0x7E));
    const CharSet& pool = printable.empty() ? s : printable;
    std::uniform_int_distribution<std::uint64_t> pick(0, pool.size() - 1);
    std::uint64_t idx = pick(rng);
    for (const auto& r : pool.ranges()) {
        std::uint64_t span = std::uint64_t(r.hi) - r.lo + 1;
        if (idx < span) return Codepoint(r.lo + idx);
        idx -= span;
    }
    return pool.first();
}

}  // namespace

std::string sample_member(const Nfa& nfa, std::size_t max_len, std::uint64_t seed) {
    auto dist = accept_distance(nfa);
    if (nfa.empty_language() || dist[nfa.start] == UINT32_MAX || dist[nfa.start] > max_len)
        throw NoWitnessWithinLength(max_len);

    std::mt19937_64 rng(seed);
    std::u32string word;
    StateId cur = nfa.start;
    while (true) {
        std::size_t remaining = max_len - word.size();
        bool may_stop = nfa.accept[cur];
        // Viable continuations keep an accept state within reach.
        std::vector<const NfaEdge*> viable;
        for (const auto& e : nfa.edges[cur])
            if (remaining > 0 && dist[e.to] != UINT32_MAX && dist[e.to] <= remaining - 1)
                viable.push_back(&e);
        if (viable.empty() || (may_stop && std::uniform_int_distribution<int>(0, 2)(rng) == 0)) {
            if (may_stop) break;
            // Walked into a corner length-wise; follow the shortest way out.
            const NfaEdge* best = nullptr;
            for (const auto& e : nfa.edges[cur])
                if (dist[e.to] != UINT32_MAX && (!best || dist[e.to] < dist[best->to])) best = &e;
            if (!best || word.size() >= max_len) throw NoWitnessWithinLength(max_len);
            word.push_back(random_member_of(best->on, rng));
            cur = best->to;
            continue;
        }
        const NfaEdge* e = viable[std::uniform_int_distribution<std::size_t>(0, viable.size() - 1)(rng)];
        word.push_back(random_member_of(e->on, rng));
        cur = e->to;
    }
    if (!nfa_accepts(nfa, word)) throw NoWitnessWithinLength(max_len);
    return utf8_encode(word);
}

}  // namespace redos
