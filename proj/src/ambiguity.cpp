#include "redos/ambiguity.hpp"

#include <algorithm>
#include <cstring>
#include <map>
#include <queue>
#include <unordered_map>
#include <unordered_set>

namespace redos {

std::string AttackTemplate::instantiate(std::size_t pumps) const {
    std::string out = prefix;
    for (std::size_t i = 0; i < pumps; ++i) out += pump;
    out += suffix;
    return out;
}

namespace {

Codepoint pick_char(const CharSet& s) {
    for (const auto& r : s.ranges()) {
        for (Codepoint c = std::max<Codepoint>(r.lo, 0x21); c <= r.hi && c <= 0x7E; ++c) return c;
    }
    return s.first();
}

// ---- exponential: self-product SCC test ----

struct ProductGraph {
    // Explored ordered pairs (p,q), adjacency with representative labels.
    // An edge is "mixed" when the two underlying NFA transitions differ
    // (different source states, or distinct parallel edges of one state);
    // a cycle through a diagonal pair using a mixed step certifies two
    // distinct loops on the same word.
    struct Edge {
        std::uint32_t to;
        Codepoint label;
        bool mixed;
    };
    std::vector<std::uint64_t> key;                 // node -> p*n+q
    std::unordered_map<std::uint64_t, std::uint32_t> id;
    std::vector<std::vector<Edge>> adj;
};

ProductGraph explore_product(const Nfa& nfa, std::size_t cap) {
    const std::uint64_t n = nfa.size();
    ProductGraph g;
    std::vector<std::uint32_t> work;
    auto intern = [&](std::uint64_t key) {
        auto it = g.id.find(key);
        if (it != g.id.end()) return it->second;
        if (g.key.size() >= cap) throw AnalysisBudgetExceeded(cap);
        std::uint32_t v = std::uint32_t(g.key.size());
        g.id.emplace(key, v);
        g.key.push_back(key);
        g.adj.emplace_back();
        work.push_back(v);
        return v;
    };
    for (StateId q = 0; q < n; ++q) intern(std::uint64_t(q) * n + q);
    while (!work.empty()) {
        std::uint32_t v = work.back();
        work.pop_back();
        StateId p = StateId(g.key[v] / n), q = StateId(g.key[v] % n);
        for (std::size_t i = 0; i < nfa.edges[p].size(); ++i) {
            const auto& e1 = nfa.edges[p][i];
            for (std::size_t j = 0; j < nfa.edges[q].size(); ++j) {
                const auto& e2 = nfa.edges[q][j];
                CharSet common = e1.on.intersect(e2.on);
                if (common.empty()) continue;
                std::uint32_t t = intern(std::uint64_t(e1.to) * n + e2.to);
                g.adj[v].push_back({t, pick_char(common), p != q || i != j});
            }
        }
    }
    return g;
}

// Iterative Tarjan.
std::vector<int> scc_ids(const std::vector<std::vector<ProductGraph::Edge>>& adj, int& count) {
    const int n = int(adj.size());
    std::vector<int> index(n, -1), low(n, 0), comp(n, -1);
    std::vector<bool> on_stack(n, false);
    std::vector<int> stack;
    int next_index = 0;
    count = 0;
    struct Frame {
        int v;
        std::size_t ei;
    };
    for (int root = 0; root < n; ++root) {
        if (index[root] != -1) continue;
        std::vector<Frame> call{{root, 0}};
        index[root] = low[root] = next_index++;
        stack.push_back(root);
        on_stack[root] = true;
        while (!call.empty()) {
            auto& fr = call.back();
            if (fr.ei < adj[fr.v].size()) {
                int w = int(adj[fr.v][fr.ei++].to);
                if (index[w] == -1) {
                    index[w] = low[w] = next_index++;
                    stack.push_back(w);
                    on_stack[w] = true;
                    call.push_back({w, 0});
                } else if (on_stack[w]) {
                    low[fr.v] = std::min(low[fr.v], index[w]);
                }
            } else {
                int v = fr.v;
                call.pop_back();
                if (!call.empty()) low[call.back().v] = std::min(low[call.back().v], low[v]);
                if (low[v] == index[v]) {
                    while (true) {
                        int w = stack.back();
                        stack.pop_back();
                        on_stack[w] = false;
                        comp[w] = count;
                        if (w == v) break;
                    }
                    ++count;
                }
            }
        }
    }
    return comp;
}

// BFS inside one SCC; returns parent/label arrays (-1 = unreached).
void scc_bfs(const ProductGraph& g, const std::vector<int>& comp, int target_comp,
             std::uint32_t from, std::vector<int>& parent, std::vector<Codepoint>& via,
             bool reversed, const std::vector<std::vector<ProductGraph::Edge>>& radj) {
    parent.assign(g.key.size(), -1);
    via.assign(g.key.size(), 0);
    std::queue<std::uint32_t> q;
    parent[from] = int(from);
    q.push(from);
    const auto& adj = reversed ? radj : g.adj;
    while (!q.empty()) {
        std::uint32_t v = q.front();
        q.pop();
        for (const auto& e : adj[v]) {
            if (comp[e.to] != target_comp || parent[e.to] != -1) continue;
            parent[e.to] = int(v);
            via[e.to] = e.label;
            q.push(e.to);
        }
    }
}

std::u32string trace(const std::vector<int>& parent, const std::vector<Codepoint>& via,
                     std::uint32_t from, std::uint32_t to) {
    std::u32string w;
    for (std::uint32_t v = to; v != from; v = std::uint32_t(parent[v])) w.push_back(via[v]);
    std::reverse(w.begin(), w.end());
    return w;
}

}  // namespace

std::optional<AmbiguityWitness> detect_exponential(const Nfa& nfa, std::size_t product_cap) {
    if (nfa.empty_language()) return std::nullopt;
    const std::uint64_t n = nfa.size();
    ProductGraph g = explore_product(nfa, product_cap);
    int ncomp = 0;
    std::vector<int> comp = scc_ids(g.adj, ncomp);

    // An SCC certifies exponential ambiguity when it contains a diagonal
    // pair and an internal mixed edge: the cycle diagonal -> mixed step ->
    // diagonal spells two distinct loops on the same pump word.
    std::vector<bool> has_diag(ncomp, false), has_mixed(ncomp, false);
    for (std::size_t v = 0; v < g.key.size(); ++v) {
        StateId p = StateId(g.key[v] / n), q = StateId(g.key[v] % n);
        if (p == q) has_diag[comp[v]] = true;
        for (const auto& e : g.adj[v])
            if (e.mixed && comp[e.to] == comp[v]) has_mixed[comp[v]] = true;
    }

    std::vector<std::vector<ProductGraph::Edge>> radj(g.adj.size());
    for (std::uint32_t v = 0; v < g.adj.size(); ++v)
        for (const auto& e : g.adj[v]) radj[e.to].push_back({v, e.label, e.mixed});

    std::optional<AmbiguityWitness> best;
    std::vector<int> pf, pb;
    std::vector<Codepoint> vf, vb;
    for (std::uint32_t d = 0; d < g.key.size(); ++d) {
        StateId p = StateId(g.key[d] / n), q = StateId(g.key[d] % n);
        if (p != q) continue;
        int c = comp[d];
        if (!has_diag[c] || !has_mixed[c]) continue;
        scc_bfs(g, comp, c, d, pf, vf, false, radj);
        scc_bfs(g, comp, c, d, pb, vb, true, radj);
        for (std::uint32_t u = 0; u < g.key.size(); ++u) {
            if (comp[u] != int(c) || pf[u] == -1) continue;
            for (const auto& e : g.adj[u]) {
                if (!e.mixed || comp[e.to] != c || pb[e.to] == -1) continue;
                std::u32string w = trace(pf, vf, d, u);
                w.push_back(e.label);
                std::u32string back = trace(pb, vb, d, e.to);  // reversed path d->to = to->d
                std::reverse(back.begin(), back.end());
                w += back;
                if (w.empty() || w.size() > kMaxPumpLength) continue;
                if (!best || utf8_decode(best->pump).size() > w.size()) {
                    StateId a = StateId(g.key[e.to] / n), b = StateId(g.key[e.to] % n);
                    AmbiguityWitness wit;
                    wit.kind = WitnessKind::Exponential;
                    wit.pivot_states = {p, a, b};
                    wit.pump = utf8_encode(w);
                    best = wit;
                }
            }
        }
    }
    return best;
}

std::optional<AmbiguityWitness> detect_polynomial(const Nfa& nfa, std::size_t product_cap) {
    if (nfa.empty_language()) return std::nullopt;
    const std::uint64_t n = nfa.size();

    // Candidate pivots must lie on a cycle.
    std::vector<std::vector<ProductGraph::Edge>> single(n);
    for (StateId q = 0; q < n; ++q)
        for (const auto& e : nfa.edges[q]) single[q].push_back({e.to, 0, false});
    int ncomp = 0;
    std::vector<int> comp = scc_ids(single, ncomp);
    std::vector<int> comp_size(ncomp, 0);
    for (StateId q = 0; q < n; ++q) ++comp_size[comp[q]];
    std::vector<bool> cyclic(n, false);
    for (StateId q = 0; q < n; ++q) {
        if (comp_size[comp[q]] > 1) cyclic[q] = true;
        for (const auto& e : nfa.edges[q])
            if (e.to == q) cyclic[q] = true;
    }

    // Reachability from each cyclic state.
    std::vector<std::vector<bool>> reach(n);
    for (StateId p = 0; p < n; ++p) {
        if (!cyclic[p]) continue;
        reach[p].assign(n, false);
        std::vector<StateId> stack{p};
        reach[p][p] = true;
        while (!stack.empty()) {
            StateId v = stack.back();
            stack.pop_back();
            for (const auto& e : nfa.edges[v])
                if (!reach[p][e.to]) {
                    reach[p][e.to] = true;
                    stack.push_back(e.to);
                }
        }
    }

    std::size_t budget = product_cap;
    std::optional<AmbiguityWitness> best;
    for (StateId p = 0; p < n; ++p) {
        if (!cyclic[p]) continue;
        for (StateId q = 0; q < n; ++q) {
            if (!cyclic[q] || !reach[p][q]) continue;
            // BFS in the triple product from (p,p,q) to (p,q,q). Two flag
            // bits record whether paths 1/2 (and 2/3) have taken different
            // NFA transitions at some step; requiring both at the target
            // keeps the three paths distinct even when p == q (parallel
            // loops on a single state).
            auto enc = [n](StateId a, StateId b, StateId c, std::uint64_t flags) {
                return ((std::uint64_t(a) * n + b) * n + c) * 4 + flags;
            };
            const std::uint64_t src = enc(p, p, q, 0), dst = enc(p, q, q, 3);
            std::unordered_map<std::uint64_t, std::pair<std::uint64_t, Codepoint>> parent;
            parent.emplace(src, std::make_pair(src, 0));
            std::queue<std::pair<std::uint64_t, std::size_t>> bfs;
            bfs.push({src, 0});
            bool found = false;
            while (!bfs.empty() && !found) {
                auto [cur, depth] = bfs.front();
                bfs.pop();
                if (depth >= kMaxPumpLength) continue;
                std::uint64_t flags = cur % 4, triple = cur / 4;
                StateId a = StateId(triple / (n * n)), b = StateId((triple / n) % n),
                        c = StateId(triple % n);
                for (std::size_t i1 = 0; i1 < nfa.edges[a].size() && !found; ++i1) {
                    const auto& e1 = nfa.edges[a][i1];
                    for (std::size_t i2 = 0; i2 < nfa.edges[b].size() && !found; ++i2) {
                        const auto& e2 = nfa.edges[b][i2];
                        CharSet i12 = e1.on.intersect(e2.on);
                        if (i12.empty()) continue;
                        for (std::size_t i3 = 0; i3 < nfa.edges[c].size(); ++i3) {
                            const auto& e3 = nfa.edges[c][i3];
                            CharSet i = i12.intersect(e3.on);
                            if (i.empty()) continue;
                            std::uint64_t nf = flags;
                            if (a != b || i1 != i2) nf |= 1;
                            if (b != c || i2 != i3) nf |= 2;
                            std::uint64_t nx = enc(e1.to, e2.to, e3.to, nf);
                            if (parent.count(nx)) continue;
                            if (budget == 0) throw AnalysisBudgetExceeded(product_cap);
                            --budget;
                            parent.emplace(nx, std::make_pair(cur, pick_char(i)));
                            if (nx == dst) {
                                found = true;
                                break;
                            }
                            bfs.push({nx, depth + 1});
                        }
                    }
                }
            }
            if (!found) continue;
            std::u32string w;
            for (std::uint64_t v = dst; v != src; v = parent[v].first) w.push_back(parent[v].second);
            std::reverse(w.begin(), w.end());
            if (w.empty() || w.size() > kMaxPumpLength) continue;
            if (!best || utf8_decode(best->pump).size() > w.size()) {
                AmbiguityWitness wit;
                wit.kind = WitnessKind::Polynomial;
                wit.degree = 2;
                wit.pivot_states = {p, q};
                wit.pump = utf8_encode(w);
                best = wit;
            }
            if (best && utf8_decode(best->pump).size() == 1) return best;
        }
    }
    return best;
}

namespace {

using Subset = std::vector<StateId>;  // sorted, unique

Subset move_subset(const Nfa& nfa, const Subset& s, Codepoint c, bool inject_start) {
    Subset out;
    for (StateId q : s)
        for (const auto& e : nfa.edges[q])
            if (e.on.contains(c)) out.push_back(e.to);
    if (inject_start) out.push_back(nfa.start);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

Subset move_word(const Nfa& nfa, Subset s, std::u32string_view w, bool inject) {
    for (Codepoint c : w) s = move_subset(nfa, s, c, inject);
    return s;
}

bool subset_accepts(const Nfa& nfa, const Subset& s) {
    return std::any_of(s.begin(), s.end(), [&](StateId q) { return nfa.accept[q]; });
}

std::string subset_key(const Subset& s) {
    std::string k;
    k.reserve(s.size() * 4);
    for (StateId q : s) k.append(reinterpret_cast<const char*>(&q), 4);
    return k;
}

// Shortest word from `start_set` to a non-accepting subset, traversing only
// non-accepting subsets when `avoid_accepting` (search semantics: touching an
// accepting subset means the string already matched).
std::optional<std::u32string> rejecting_suffix(const Nfa& nfa, const Subset& start_set,
                                               bool inject, bool avoid_accepting) {
    if (avoid_accepting && subset_accepts(nfa, start_set)) return std::nullopt;
    std::vector<Codepoint> alpha = alphabet_representatives(nfa);
    Codepoint dead;
    if (dead_codepoint(nfa, dead)) alpha.push_back(dead);

    struct Node {
        Subset s;
        std::u32string word;
    };
    std::queue<Node> bfs;
    std::unordered_set<std::string> seen;
    bfs.push({start_set, {}});
    seen.insert(subset_key(start_set));
    std::size_t explored = 0;
    while (!bfs.empty()) {
        Node cur = std::move(bfs.front());
        bfs.pop();
        if (!subset_accepts(nfa, cur.s)) return cur.word;
        if (cur.word.size() >= 64 || ++explored > 100000) break;
        for (Codepoint c : alpha) {
            Subset nx = move_subset(nfa, cur.s, c, inject);
            if (avoid_accepting && subset_accepts(nfa, nx)) continue;
            auto key = subset_key(nx);
            if (!seen.insert(std::move(key)).second) continue;
            auto word = cur.word;
            word.push_back(c);
            bfs.push({std::move(nx), std::move(word)});
        }
    }
    return std::nullopt;
}

// Shortest word start -> pivot in the plain NFA.
std::u32string shortest_prefix(const Nfa& nfa, StateId pivot) {
    std::vector<int> parent(nfa.size(), -1);
    std::vector<Codepoint> via(nfa.size(), 0);
    std::queue<StateId> q;
    parent[nfa.start] = int(nfa.start);
    q.push(nfa.start);
    while (!q.empty()) {
        StateId v = q.front();
        q.pop();
        if (v == pivot) break;
        for (const auto& e : nfa.edges[v]) {
            if (parent[e.to] != -1) continue;
            parent[e.to] = int(v);
            via[e.to] = pick_char(e.on);
            q.push(e.to);
        }
    }
    std::u32string w;
    for (StateId v = pivot; v != nfa.start; v = StateId(parent[v])) w.push_back(via[v]);
    std::reverse(w.begin(), w.end());
    return w;
}

}  // namespace

std::optional<AttackTemplate> build_attack_template(const Nfa& nfa, const AmbiguityWitness& w,
                                                    AnchorMode anchor_mode, bool starts_anchored,
                                                    bool ends_anchored) {
    const bool search = anchor_mode == AnchorMode::UnanchoredSearch;
    const bool inject = search && !starts_anchored;
    const bool avoid_accepting = search && !ends_anchored;

    const StateId pivot = w.pivot_states.front();
    std::u32string prefix = shortest_prefix(nfa, pivot);
    std::u32string pump = utf8_decode(w.pump);
    if (pump.empty()) return std::nullopt;

    // All states live after the prefix and any number of pumps.
    Subset u{nfa.start};
    u = move_word(nfa, u, prefix, inject);
    if (avoid_accepting) {
        // Intermediate acceptance during the prefix itself would mean every
        // instantiation matches before the pumps even start.
        Subset probe{nfa.start};
        for (Codepoint c : prefix) {
            if (subset_accepts(nfa, probe)) return std::nullopt;
            probe = move_subset(nfa, probe, c, inject);
        }
    }
    while (true) {
        Subset stepped = move_word(nfa, u, pump, inject);
        Subset merged = u;
        merged.insert(merged.end(), stepped.begin(), stepped.end());
        std::sort(merged.begin(), merged.end());
        merged.erase(std::unique(merged.begin(), merged.end()), merged.end());
        if (merged == u) break;
        u = std::move(merged);
    }

    auto suffix = rejecting_suffix(nfa, u, inject, avoid_accepting);
    if (!suffix) return std::nullopt;

    AttackTemplate t;
    t.prefix = utf8_encode(prefix);
    t.pump = w.pump;
    t.suffix = utf8_encode(*suffix);
    t.anchor_mode = anchor_mode;

    // Rejection invariant, re-checked with the linear engine.
    for (std::size_t i = 0; i <= 5; ++i) {
        auto s = utf8_decode(t.instantiate(i));
        if (linear_match(nfa, std::u32string_view(s), anchor_mode, starts_anchored, ends_anchored)
                .matched)
            return std::nullopt;
    }
    return t;
}

StaticReport analyze(std::string_view pattern, AnchorMode anchor_mode) {
    StaticReport r;
    r.pattern = std::string(pattern);
    r.anchor_mode = anchor_mode;

    RegexAst ast;
    Nfa nfa;
    try {
        ast = parse(pattern, anchor_mode);
        nfa = compile_nfa(ast);
    } catch (const UnsupportedFeature& e) {
        r.dialect_ok = false;
        r.skip_reason = e.what();
        return r;
    } catch (const RegexSyntaxError& e) {
        r.dialect_ok = false;
        r.skip_reason = e.what();
        return r;
    } catch (const ExpansionLimit& e) {
        r.skip_reason = e.what();
        return r;
    }

    try {
        r.exp_witness = detect_exponential(nfa);
        r.poly_witness = detect_polynomial(nfa);
    } catch (const AnalysisBudgetExceeded& e) {
        r.skip_reason = e.what();
        return r;
    }

    const AmbiguityWitness* chosen = nullptr;
    if (r.exp_witness) {
        chosen = &*r.exp_witness;
        r.kind = "exponential";
    } else if (r.poly_witness) {
        chosen = &*r.poly_witness;
        r.kind = "polynomial";
        r.degree = r.poly_witness->degree;
        if (anchor_mode == AnchorMode::UnanchoredSearch && !ast.starts_anchored)
            ++r.degree;  // the start-offset loop adds one factor
    }
    if (chosen) {
        r.attack = build_attack_template(nfa, *chosen, anchor_mode, ast.starts_anchored,
                                         ast.ends_anchored);
        if (!r.attack) r.template_absence = "no-rejecting-suffix";
    }
    return r;
}

nlohmann::json StaticReport::to_json() const {
    nlohmann::json j;
    j["pattern"] = pattern;
    j["anchor_mode"] = to_string(anchor_mode);
    j["dialect"] = dialect_ok ? "ok" : "unsupported";
    j["kind"] = kind;
    j["degree"] = degree;
    if (attack) {
        j["prefix"] = attack->prefix;
        j["pump"] = attack->pump;
        j["suffix"] = attack->suffix;
    } else {
        j["prefix"] = nullptr;
        j["pump"] = nullptr;
        j["suffix"] = nullptr;
    }
    j["skip_reason"] = skip_reason.empty() ? (template_absence.empty() ? "" : template_absence)
                                           : skip_reason;
    return j;
}

}  // namespace redos
