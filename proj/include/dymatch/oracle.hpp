#pragma once

#include <algorithm>
#include <cstdlib>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "dymatch/graph.hpp"
#include "dymatch/phase_context.hpp"

namespace dymatch {
namespace oracle {

/// Edge cap for the exhaustive matcher; DYMATCH_ORACLE_CAP overrides.
inline int default_cap() {
    if (const char* env = std::getenv("DYMATCH_ORACLE_CAP")) {
        int v = std::atoi(env);
        if (v > 0) return v;
    }
    return 24;
}

namespace detail {

/// Branch and bound over free vertices: either the first eligible vertex stays
/// unmatched or it is matched to one of its free neighbors.
inline void bb_search(const std::vector<std::vector<VertexId>>& adj, std::vector<char>& free,
                      int current, int& best) {
    int candidates = 0;
    VertexId pivot = kNoVertex;
    for (VertexId v = 0; v < static_cast<VertexId>(adj.size()); ++v) {
        if (!free[v]) continue;
        bool has_free_nb = false;
        for (VertexId nb : adj[v])
            if (free[nb]) {
                has_free_nb = true;
                break;
            }
        if (has_free_nb) {
            ++candidates;
            if (pivot == kNoVertex) pivot = v;
        }
    }
    if (pivot == kNoVertex) {
        best = std::max(best, current);
        return;
    }
    if (current + candidates / 2 <= best) return;  // even a perfect finish cannot improve
    free[pivot] = 0;
    for (VertexId nb : adj[pivot]) {
        if (!free[nb]) continue;
        free[nb] = 0;
        bb_search(adj, free, current + 1, best);
        free[nb] = 1;
    }
    bb_search(adj, free, current, best);
    free[pivot] = 1;
}

}  // namespace detail

/// Exact maximum matching cardinality by exhaustive branch and bound.
/// Rejects graphs with more than `cap` edges.
inline int max_matching_size(const Graph& g, int cap = default_cap()) {
    if (g.edge_count() > cap)
        throw TooLarge("graph has " + std::to_string(g.edge_count()) +
                       " edges, exhaustive cap is " + std::to_string(cap));
    std::vector<std::vector<VertexId>> adj(g.vertex_count());
    for (VertexId v = 0; v < g.vertex_count(); ++v)
        adj[v].assign(g.neighbors(v).begin(), g.neighbors(v).end());
    std::vector<char> free(g.vertex_count(), 1);
    int best = 0;
    detail::bb_search(adj, free, 0, best);
    return best;
}

/// Independent exact matcher: augmenting-path search with blossom contraction
/// on general graphs. Cross-checks the exhaustive matcher and handles larger
/// instances.
inline int blossom_max_matching(const Graph& g) {
    const int n = g.vertex_count();
    std::vector<std::vector<VertexId>> adj(n);
    for (VertexId v = 0; v < n; ++v)
        adj[v].assign(g.neighbors(v).begin(), g.neighbors(v).end());
    std::vector<VertexId> match(n, kNoVertex), parent(n), base(n);
    std::vector<char> used(n), blossom(n);

    auto mark_path = [&](VertexId v, VertexId b, VertexId child) {
        while (base[v] != b) {
            blossom[base[v]] = 1;
            blossom[base[match[v]]] = 1;
            parent[v] = child;
            child = match[v];
            v = parent[match[v]];
        }
    };
    auto lca = [&](VertexId a, VertexId b) {
        std::vector<char> path(n, 0);
        for (;;) {
            a = base[a];
            path[a] = 1;
            if (match[a] == kNoVertex) break;
            a = parent[match[a]];
        }
        for (;;) {
            b = base[b];
            if (path[b]) return b;
            b = parent[match[b]];
        }
    };
    auto find_path = [&](VertexId root) -> VertexId {
        std::fill(used.begin(), used.end(), 0);
        std::fill(parent.begin(), parent.end(), kNoVertex);
        for (VertexId v = 0; v < n; ++v) base[v] = v;
        used[root] = 1;
        std::vector<VertexId> queue{root};
        for (std::size_t qi = 0; qi < queue.size(); ++qi) {
            VertexId v = queue[qi];
            for (VertexId to : adj[v]) {
                if (base[v] == base[to] || match[v] == to) continue;
                if (to == root || (match[to] != kNoVertex && parent[match[to]] != kNoVertex)) {
                    VertexId cur = lca(v, to);
                    std::fill(blossom.begin(), blossom.end(), 0);
                    mark_path(v, cur, to);
                    mark_path(to, cur, v);
                    for (VertexId u = 0; u < n; ++u)
                        if (blossom[base[u]]) {
                            base[u] = cur;
                            if (!used[u]) {
                                used[u] = 1;
                                queue.push_back(u);
                            }
                        }
                } else if (parent[to] == kNoVertex) {
                    parent[to] = v;
                    if (match[to] == kNoVertex) return to;
                    used[match[to]] = 1;
                    queue.push_back(match[to]);
                }
            }
        }
        return kNoVertex;
    };

    int result = 0;
    for (VertexId v = 0; v < n; ++v) {
        if (match[v] != kNoVertex) continue;
        VertexId end = find_path(v);
        if (end == kNoVertex) continue;
        ++result;
        while (end != kNoVertex) {
            VertexId pv = parent[end];
            VertexId ppv = match[pv];
            match[end] = pv;
            match[pv] = end;
            end = ppv;
        }
    }
    return result;
}

/// True iff no edge joins two free vertices; returns a witness edge otherwise.
inline bool is_maximal(const Graph& g, const Matching& m,
                       std::optional<Edge>* witness = nullptr) {
    for (VertexId u = 0; u < g.vertex_count(); ++u) {
        if (m.is_matched(u)) continue;
        for (VertexId v : g.neighbors(u)) {
            if (u < v && !m.is_matched(v)) {
                if (witness) *witness = Edge(u, v);
                return false;
            }
        }
    }
    if (witness) *witness = std::nullopt;
    return true;
}

struct AugPath {
    VertexId a, b, c, d;  // {b,c} matched, a and d free, b < c
    friend bool operator==(const AugPath&, const AugPath&) = default;
};

/// All 3-augmenting paths (a,b,c,d): {b,c} matched, a,d free and distinct,
/// {a,b} and {c,d} edges. Each geometric path is reported once with b < c.
inline std::vector<AugPath> find_3aug_paths(const Graph& g, const Matching& m) {
    std::vector<AugPath> out;
    for (VertexId b = 0; b < g.vertex_count(); ++b) {
        VertexId c = m.partner(b);
        if (c == kNoVertex || c < b) continue;
        for (VertexId a : g.neighbors(b)) {
            if (m.is_matched(a)) continue;
            for (VertexId d : g.neighbors(c)) {
                if (m.is_matched(d) || d == a) continue;
                out.push_back({a, b, c, d});
            }
        }
    }
    return out;
}

/// Certified ratio: a maximal matching without 3-augmenting paths has
/// |M| >= (2/3)|M*|. Checked exactly in integers as 3|M| >= 2|M*|.
inline bool ratio_ok(int matching_size, int mcm) { return 3 * matching_size >= 2 * mcm; }

inline bool valid_matching(const Graph& g, const std::vector<VertexId>& partner) {
    for (VertexId v = 0; v < static_cast<VertexId>(partner.size()); ++v) {
        VertexId p = partner[v];
        if (p == kNoVertex) continue;
        if (p < 0 || p >= static_cast<VertexId>(partner.size())) return false;
        if (partner[p] != v || p == v) return false;
        if (!g.has_edge(v, p)) return false;
    }
    return true;
}

struct LemmaResult {
    std::string name;
    bool pass = true;
    std::string witness;
};

struct PhaseReport {
    std::vector<LemmaResult> results;

    bool all_pass() const {
        for (const auto& r : results)
            if (!r.pass) return false;
        return true;
    }

    std::string failures() const {
        std::ostringstream os;
        for (const auto& r : results)
            if (!r.pass) os << r.name << ": " << r.witness << "\n";
        return os.str();
    }
};

namespace detail {

inline bool edge_in(const std::vector<Edge>& es, Edge e) {
    return std::find(es.begin(), es.end(), e) != es.end();
}

struct BatchView {
    const Graph& g;
    std::set<Edge> new_edges;  // active only

    BatchView(const Graph& graph, const std::vector<Edge>& active) : g(graph) {
        new_edges.insert(active.begin(), active.end());
    }

    bool is_new(VertexId a, VertexId b) const { return new_edges.count(Edge(a, b)) > 0; }

    bool has_new_free_neighbor(VertexId v, const std::vector<VertexId>& partner) const {
        for (const Edge& e : new_edges) {
            VertexId other = e.u == v ? e.v : (e.v == v ? e.u : kNoVertex);
            if (other != kNoVertex && partner[other] == kNoVertex) return true;
        }
        return false;
    }

    std::set<VertexId> new_free_neighbors(VertexId v, const std::vector<VertexId>& partner) const {
        std::set<VertexId> out;
        for (const Edge& e : new_edges) {
            VertexId other = e.u == v ? e.v : (e.v == v ? e.u : kNoVertex);
            if (other != kNoVertex && partner[other] == kNoVertex) out.insert(other);
        }
        return out;
    }

    std::set<VertexId> old_free_neighbors(VertexId v, const std::vector<VertexId>& partner) const {
        std::set<VertexId> out;
        for (VertexId nb : g.neighbors(v))
            if (partner[nb] == kNoVertex && !is_new(v, nb)) out.insert(nb);
        return out;
    }
};

/// Derives the augmenting-candidate edge set from scratch, mirroring the
/// membership rule the distributed algorithm implements: a matched edge whose
/// one endpoint has a new free neighbor while the other has an old free
/// neighbor distinct from it. When both endpoints carry new free neighbors,
/// the lower endpoint that owns an old free witness takes the w role.
inline std::vector<std::pair<VertexId, VertexId>> derive_I(const BatchView& bv,
                                                           const std::vector<VertexId>& m1) {
    std::vector<std::pair<VertexId, VertexId>> out;
    for (VertexId a = 0; a < static_cast<VertexId>(m1.size()); ++a) {
        VertexId b = m1[a];
        if (b == kNoVertex || b < a) continue;
        auto valid = [&](VertexId w, VertexId u) {
            auto nf_u = bv.new_free_neighbors(u, m1);
            if (nf_u.empty()) return false;
            auto of_w = bv.old_free_neighbors(w, m1);
            if (of_w.empty()) return false;
            for (VertexId x : of_w)
                for (VertexId v : nf_u)
                    if (x != v) return true;
            return false;
        };
        bool ab = valid(a, b), ba = valid(b, a);
        if (ab)
            out.emplace_back(a, b);
        else if (ba)
            out.emplace_back(b, a);
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace detail

/// Re-derives the batch algorithm's per-phase claims from ground truth and
/// reports one pass/fail entry per named property, with a witness on failure.
inline PhaseReport check_phase_invariants(const PhaseContext& ctx, const Graph& g,
                                          const Matching& m, const std::string& phase_tag) {
    PhaseReport rep;
    auto add = [&rep](const std::string& name, bool pass, const std::string& witness = "") {
        rep.results.push_back({name, pass, witness});
    };
    detail::BatchView bv(g, ctx.active);

    auto free_in = [](const std::vector<VertexId>& partner, VertexId v) {
        return partner[v] == kNoVertex;
    };

    if (phase_tag == "phase1") {
        // part1(a): every vertex matched before the mini-batch stays matched.
        {
            bool ok = true;
            std::string w;
            for (VertexId v = 0; v < static_cast<VertexId>(ctx.m0.size()); ++v)
                if (ctx.m0[v] != kNoVertex && ctx.m1[v] == kNoVertex) {
                    ok = false;
                    w = "vertex " + std::to_string(v) + " lost its match";
                    break;
                }
            add("part1a", ok, w);
        }
        // part1(b): no edge of the collected subgraph joins two free vertices.
        {
            bool ok = true;
            std::string w;
            for (const Edge& e : ctx.G1_edges)
                if (free_in(ctx.m1, e.u) && free_in(ctx.m1, e.v)) {
                    ok = false;
                    w = "free-free edge {" + std::to_string(e.u) + "," + std::to_string(e.v) + "}";
                    break;
                }
            add("part1b", ok, w);
        }
        // part1(c): no 3-augmenting path within the collected subgraph.
        {
            bool ok = true;
            std::string w;
            std::set<Edge> g1(ctx.G1_edges.begin(), ctx.G1_edges.end());
            for (const Edge& e : ctx.G1_edges) {
                if (!(ctx.m1[e.u] == e.v)) continue;
                for (const Edge& ea : ctx.G1_edges) {
                    VertexId a = ea.u == e.u ? ea.v : (ea.v == e.u ? ea.u : kNoVertex);
                    if (a == kNoVertex || !free_in(ctx.m1, a)) continue;
                    for (const Edge& ed : ctx.G1_edges) {
                        VertexId d = ed.u == e.v ? ed.v : (ed.v == e.v ? ed.u : kNoVertex);
                        if (d == kNoVertex || d == a || !free_in(ctx.m1, d)) continue;
                        ok = false;
                        w = "path (" + std::to_string(a) + "," + std::to_string(e.u) + "," +
                            std::to_string(e.v) + "," + std::to_string(d) + ")";
                    }
                }
            }
            add("part1c", ok, w);
        }
        // part1(d): every triangle that was harmful at mini-batch start had its
        // edges collected, and no triangle admits a 3-augmenting path inside
        // the collected subgraph afterwards (part1c covers the latter).
        {
            bool ok = true;
            std::string w;
            std::set<Edge> g1(ctx.G1_edges.begin(), ctx.G1_edges.end());
            for (VertexId a = 0; a < g.vertex_count() && ok; ++a) {
                VertexId b = ctx.m0[a];
                if (b == kNoVertex || b < a) continue;
                bool side_new = bv.has_new_free_neighbor(a, ctx.m0) ||
                                bv.has_new_free_neighbor(b, ctx.m0);
                if (!side_new) continue;
                for (VertexId c : g.neighbors(a)) {
                    if (c == b || !free_in(ctx.m0, c)) continue;
                    if (!g.has_edge(b, c)) continue;
                    // harmful triangle {a,b,c} at classification time
                    if (!g1.count(Edge(a, b)) || !g1.count(Edge(a, c)) || !g1.count(Edge(b, c))) {
                        ok = false;
                        w = "triangle (" + std::to_string(c) + "," + std::to_string(a) + "," +
                            std::to_string(b) + ") not fully collected";
                        break;
                    }
                }
            }
            add("part1d", ok, w);
        }
        add("m1_valid", valid_matching(g, ctx.m1), "phase-1 matching invalid");
    }

    if (phase_tag == "phase2_start") {
        auto derived = detail::derive_I(bv, ctx.m1);
        {
            bool ok = derived == ctx.I_edges;
            std::ostringstream os;
            if (!ok) {
                os << "derived {";
                for (auto& [w, u] : derived) os << " (" << w << "," << u << ")";
                os << " } got {";
                for (auto& [w, u] : ctx.I_edges) os << " (" << w << "," << u << ")";
                os << " }";
            }
            add("I_agreement", ok, os.str());
        }
        // X_and_V: the free endpoints on both sides form an independent set.
        {
            bool ok = true;
            std::string w;
            std::vector<VertexId> xv(ctx.X.begin(), ctx.X.end());
            xv.insert(xv.end(), ctx.V.begin(), ctx.V.end());
            std::sort(xv.begin(), xv.end());
            xv.erase(std::unique(xv.begin(), xv.end()), xv.end());
            for (std::size_t i = 0; i < xv.size() && ok; ++i)
                for (std::size_t j = i + 1; j < xv.size(); ++j)
                    if (g.has_edge(xv[i], xv[j])) {
                        ok = false;
                        w = "edge {" + std::to_string(xv[i]) + "," + std::to_string(xv[j]) + "}";
                        break;
                    }
            add("X_and_V", ok, w);
        }
        // W_U: every free neighbor of a W- or U-node lies inside X or V, so the
        // later phases see every path endpoint they may need.
        {
            bool ok = true;
            std::string w;
            for (VertexId s : ctx.W) {
                for (VertexId nb : g.neighbors(s))
                    if (free_in(ctx.m1, nb) && !ctx.X.count(nb) && !ctx.V.count(nb)) {
                        ok = false;
                        w = "W-node " + std::to_string(s) + " has stray free neighbor " +
                            std::to_string(nb);
                    }
            }
            for (VertexId s : ctx.U) {
                for (VertexId nb : g.neighbors(s))
                    if (free_in(ctx.m1, nb) && !ctx.V.count(nb) && !ctx.X.count(nb)) {
                        ok = false;
                        w = "U-node " + std::to_string(s) + " has stray free neighbor " +
                            std::to_string(nb);
                    }
            }
            add("W_U", ok, w);
        }
        // all_in_I: every 3-augmenting path at this point traverses an I-edge.
        {
            Matching m1(static_cast<int>(ctx.m1.size()));
            for (VertexId v = 0; v < static_cast<VertexId>(ctx.m1.size()); ++v)
                if (ctx.m1[v] > v) m1.match(v, ctx.m1[v]);
            std::set<Edge> iset;
            for (auto& [w, u] : ctx.I_edges) iset.insert(Edge(w, u));
            bool ok = true;
            std::string w;
            for (const AugPath& p : find_3aug_paths(g, m1))
                if (!iset.count(Edge(p.b, p.c))) {
                    ok = false;
                    w = "path (" + std::to_string(p.a) + "," + std::to_string(p.b) + "," +
                        std::to_string(p.c) + "," + std::to_string(p.d) + ") misses I";
                    break;
                }
            add("all_in_I", ok, w);
        }
        add("WU_disjoint_XV", [&] {
            for (VertexId v : ctx.X)
                if (ctx.W.count(v) || ctx.U.count(v)) return false;
            for (VertexId v : ctx.V)
                if (ctx.W.count(v) || ctx.U.count(v)) return false;
            return true;
        }(), "vertex shared between free-side and matched-side sets");
    }

    if (phase_tag == "phase2") {
        // The virtual matching must be a maximal matching of the bipartite
        // helper graph, and the real matching must be untouched.
        std::set<VertexId> vx, vw;
        bool valid = true;
        for (auto& [x, w] : ctx.M_XW) {
            if (!ctx.X.count(x) || !ctx.W.count(w) || !g.has_edge(x, w) || bv.is_new(x, w))
                valid = false;
            if (!vx.insert(x).second || !vw.insert(w).second) valid = false;
        }
        add("mxw_valid", valid, "virtual pair outside the bipartite helper graph");
        {
            bool ok = true;
            std::string wit;
            for (VertexId x : ctx.X) {
                if (vx.count(x)) continue;
                for (VertexId w : ctx.W) {
                    if (vw.count(w)) continue;
                    if (g.has_edge(x, w) && !bv.is_new(x, w)) {
                        ok = false;
                        wit = "addable pair {" + std::to_string(x) + "," + std::to_string(w) + "}";
                    }
                }
            }
            add("mxw_maximal", ok, wit);
        }
        {
            bool ok = true;
            for (VertexId v = 0; v < static_cast<VertexId>(ctx.m1.size()); ++v)
                if (m.partner(v) != ctx.m1[v]) ok = false;
            add("real_matching_untouched", ok, "real matching modified during virtual phase");
        }
    }

    if (phase_tag == "phase3") {
        // p3(A): no vertex of the working subgraph matched after phase 1 is free now.
        {
            bool ok = true;
            std::string w;
            for (VertexId v = 0; v < static_cast<VertexId>(ctx.m1.size()); ++v)
                if (ctx.m1[v] != kNoVertex && !m.is_matched(v)) {
                    ok = false;
                    w = "vertex " + std::to_string(v) + " was unmatched";
                    break;
                }
            add("p3A", ok, w);
        }
        // p3(B): every I-edge either survives or both endpoints re-match into
        // the free sides; a skipped virtual partner must not stay free.
        {
            bool ok = true;
            std::string wtn;
            for (auto& [w, u] : ctx.I_edges) {
                if (m.partner(w) == u) continue;
                VertexId x = m.partner(w);
                VertexId v = m.partner(u);
                if (x == kNoVertex || v == kNoVertex || !ctx.X.count(x) || !ctx.V.count(v)) {
                    ok = false;
                    wtn = "I-edge (" + std::to_string(w) + "," + std::to_string(u) +
                          ") endpoints not re-matched into X and V";
                    break;
                }
                auto it = ctx.x_of_w.find(w);
                if (it != ctx.x_of_w.end() && it->second != x && !m.is_matched(it->second)) {
                    ok = false;
                    wtn = "virtual partner " + std::to_string(it->second) + " of " +
                          std::to_string(w) + " left free";
                    break;
                }
            }
            add("p3B", ok, wtn);
        }
        // p3(C): the final matching is maximal on the full working subgraph.
        std::set<VertexId> gstar;
        gstar.insert(ctx.X.begin(), ctx.X.end());
        gstar.insert(ctx.W.begin(), ctx.W.end());
        gstar.insert(ctx.U.begin(), ctx.U.end());
        gstar.insert(ctx.V.begin(), ctx.V.end());
        {
            bool ok = true;
            std::string w;
            for (VertexId a : gstar) {
                if (m.is_matched(a)) continue;
                for (VertexId nb : g.neighbors(a))
                    if (gstar.count(nb) && !m.is_matched(nb)) {
                        ok = false;
                        w = "free edge {" + std::to_string(a) + "," + std::to_string(nb) + "}";
                    }
            }
            add("p3C", ok, w);
        }
        // nofree: working-subgraph vertices have no free neighbors outside it.
        {
            bool ok = true;
            std::string w;
            for (VertexId a : gstar)
                for (VertexId nb : g.neighbors(a))
                    if (!gstar.count(nb) && !m.is_matched(nb)) {
                        ok = false;
                        w = "vertex " + std::to_string(a) + " has outside free neighbor " +
                            std::to_string(nb);
                        break;
                    }
            add("nofree", ok, w);
        }
        // gstar: maximal and no 3-augmenting path within the induced subgraph.
        {
            bool ok = true;
            std::string w;
            for (VertexId b : gstar) {
                VertexId c = m.partner(b);
                if (c == kNoVertex || c < b || !gstar.count(c)) continue;
                for (VertexId a : g.neighbors(b)) {
                    if (!gstar.count(a) || m.is_matched(a)) continue;
                    for (VertexId d : g.neighbors(c)) {
                        if (!gstar.count(d) || m.is_matched(d) || d == a) continue;
                        ok = false;
                        w = "path (" + std::to_string(a) + "," + std::to_string(b) + "," +
                            std::to_string(c) + "," + std::to_string(d) + ")";
                    }
                }
            }
            add("gstar", ok, w);
        }
        // correct: globally maximal with no 3-augmenting paths.
        {
            std::optional<Edge> wit;
            bool mx = is_maximal(g, m, &wit);
            std::string w;
            if (!mx)
                w = "free-free edge {" + std::to_string(wit->u) + "," + std::to_string(wit->v) +
                    "}";
            auto paths = find_3aug_paths(g, m);
            if (!paths.empty())
                w += " 3-aug path (" + std::to_string(paths[0].a) + "," +
                     std::to_string(paths[0].b) + "," + std::to_string(paths[0].c) + "," +
                     std::to_string(paths[0].d) + ")";
            add("correct", mx && paths.empty(), w);
        }
        add("vertex_monotonic", [&] {
            for (VertexId v = 0; v < static_cast<VertexId>(ctx.m0.size()); ++v)
                if (ctx.m0[v] != kNoVertex && !m.is_matched(v)) return false;
            return true;
        }(), "matched vertex set shrank across the mini-batch");
    }

    return rep;
}

}  // namespace oracle
}  // namespace dymatch
