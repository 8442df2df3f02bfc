#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "dymatch/phase_context.hpp"
#include "dymatch/sim.hpp"
#include "dymatch/spreading.hpp"

namespace dymatch {

/// Batch-incremental maintenance of a maximal matching without 3-augmenting
/// paths. A batch of edge insertions is split into mini-batches of
/// b = floor(sqrt(k*beta)) edges, each processed through three phases that
/// keep every spreading payload at O(k*beta) tokens.
namespace batchinc {

inline int minibatch_size(int k, int beta) {
    int b = static_cast<int>(std::sqrt(static_cast<double>(k) * beta));
    while (static_cast<long long>(b + 1) * (b + 1) <= static_cast<long long>(k) * beta) ++b;
    while (static_cast<long long>(b) * b > static_cast<long long>(k) * beta) --b;
    return std::max(b, 1);
}

struct PhaseObserver {
    virtual ~PhaseObserver() = default;
    virtual void after_phase1(const Simulation&, const PhaseContext&) {}
    virtual void after_important_sets(const Simulation&, const PhaseContext&) {}
    virtual void after_phase2(const Simulation&, const PhaseContext&) {}
    virtual void after_phase3(const Simulation&, const PhaseContext&) {}
};

struct MiniBatchReport {
    long long rounds = 0;
    long long spreads_total = 0;
    long long spreads_phase2 = 0;
    long long phase2_iterations = 0;
    long long requery_trips = 0;
    int w_size = 0;
};

struct BatchReport {
    long long rounds = 0;
    std::vector<MiniBatchReport> minibatches;
};

namespace detail {

/// Information every player holds after the mini-batch spreads. All entries
/// are reconstructed from spread tokens, so the replicated local computations
/// stay within each player's legal knowledge.
struct Shared {
    std::set<Edge> batch_all;
    std::set<Edge> batch_active;
    std::map<VertexId, VertexId> m0;      // announced statuses at mini-batch start
    std::map<VertexId, VertexId> m1;      // statuses after the phase-1 diff
    std::map<VertexId, VertexId> g1_partner;  // replicated single-player computation

    std::set<VertexId> endpoints;

    bool is_new(VertexId a, VertexId b) const { return batch_active.count(Edge(a, b)) > 0; }

    VertexId m0_partner(VertexId v) const {
        auto it = m0.find(v);
        if (it == m0.end())
            throw StateCorrupt("status of vertex " + std::to_string(v) + " was never announced");
        return it->second;
    }

    bool m1_free(VertexId v) const {
        auto it = m1.find(v);
        if (it == m1.end())
            throw StateCorrupt("post-repair status of vertex " + std::to_string(v) +
                               " is unknown");
        return it->second == kNoVertex;
    }

    std::set<VertexId> new_free_neighbors_m1(VertexId v) const {
        std::set<VertexId> out;
        for (const Edge& e : batch_active) {
            VertexId other = e.u == v ? e.v : (e.v == v ? e.u : kNoVertex);
            if (other != kNoVertex && m1_free(other)) out.insert(other);
        }
        return out;
    }
};

inline void add_edge_unique(std::vector<Edge>& es, Edge e) {
    if (std::find(es.begin(), es.end(), e) == es.end()) es.push_back(e);
}

/// Lowest hosted old-edge free neighbor of `s`, skipping `exclude`; freeness
/// is read from the host's own view of the real matching.
inline VertexId hosted_old_free_neighbor(const Simulation& sim, PlayerId p, VertexId s,
                                         VertexId exclude, const std::set<Edge>& new_edges) {
    for (VertexId x : sim.graph().neighbors(s)) {
        if (sim.owner(x) != p || x == exclude) continue;
        if (new_edges.count(Edge(x, s))) continue;
        if (!sim.matching().is_matched(x)) return x;
    }
    return kNoVertex;
}

}  // namespace detail

/// One mini-batch in flight: the oracle-facing context plus the replicated
/// player knowledge.
struct MiniBatchRun {
    PhaseContext ctx;
    detail::Shared shared;
    MiniBatchReport report;
    long long spreads_at_start = 0;
};

/// Applies the chunk to the graph and records starting statuses. Edges whose
/// both endpoints are already matched stay in the graph but take no part in
/// the repair phases.
inline MiniBatchRun begin_minibatch(Simulation& sim, const std::vector<Edge>& chunk) {
    MiniBatchRun run;
    run.ctx.batch = chunk;
    std::sort(run.ctx.batch.begin(), run.ctx.batch.end());
    run.ctx.m0 = sim.matching().partners();
    for (const Edge& e : run.ctx.batch) {
        sim.apply_insert(e.u, e.v);
        if (!sim.matching().is_matched(e.u) || !sim.matching().is_matched(e.v))
            run.ctx.active.push_back(e);
    }
    run.spreads_at_start = sim.current_update().spreading_invocations;
    return run;
}

/// Phase 1: broadcast the mini-batch with endpoint statuses, classify the
/// small repair subgraph, collect it (new free-free edges, matched edges with
/// new edges at both ends, harmful triangles), and replicate the single-player
/// maximality-and-rotation computation. Ends by spreading the matching diff.
inline void phase1(Simulation& sim, MiniBatchRun& run, int b) {
    const int k = sim.players();
    PhaseContext& ctx = run.ctx;
    detail::Shared& sh = run.shared;
    long long r0 = sim.current_update().rounds;

    // Spread 1: batch edges (both endpoint hosts contribute; receipt dedups)
    // plus one status record per distinct endpoint.
    std::set<VertexId> endpoints;
    for (const Edge& e : ctx.batch) {
        endpoints.insert(e.u);
        endpoints.insert(e.v);
    }
    TokenBatch b1(k);
    for (const Edge& e : ctx.batch) {
        b1.add(sim.owner(e.u), Token::make(TokenKind::EdgeRecord, e.u, e.v));
        b1.add(sim.owner(e.v), Token::make(TokenKind::EdgeRecord, e.u, e.v));
    }
    for (VertexId x : endpoints)
        b1.add(sim.owner(x), Token::make(TokenKind::StatusRecord, x, ctx.m0[x]));
    spread(sim, b1);

    sh.endpoints = endpoints;
    for (const Edge& e : ctx.batch) sh.batch_all.insert(e);
    for (VertexId x : endpoints) sh.m0[x] = ctx.m0[x];
    for (const Edge& e : ctx.batch) {
        bool fu = sh.m0[e.u] == kNoVertex, fv = sh.m0[e.v] == kNoVertex;
        if (fu || fv) sh.batch_active.insert(e);
    }
    // Partners of matched endpoints are matched by definition.
    for (VertexId x : endpoints) {
        VertexId p = sh.m0[x];
        if (p != kNoVertex && !sh.m0.count(p)) sh.m0[p] = x;
    }

    // Local classification, identical at every player.
    for (const Edge& e : sh.batch_active)
        if (sh.m0[e.u] == kNoVertex && sh.m0[e.v] == kNoVertex) ctx.F.push_back(e);

    auto new_edges_at = [&](VertexId v) {
        std::vector<VertexId> out;
        for (const Edge& e : sh.batch_active) {
            if (e.u == v) out.push_back(e.v);
            if (e.v == v) out.push_back(e.u);
        }
        return out;
    };

    std::vector<std::pair<VertexId, VertexId>> matched_pairs;  // announced, u < v
    for (VertexId x : endpoints) {
        VertexId p = sh.m0[x];
        if (p != kNoVertex) {
            VertexId lo = std::min(x, p), hi = std::max(x, p);
            if (std::find(matched_pairs.begin(), matched_pairs.end(),
                          std::make_pair(lo, hi)) == matched_pairs.end())
                matched_pairs.emplace_back(lo, hi);
        }
    }
    std::sort(matched_pairs.begin(), matched_pairs.end());

    for (auto& [w, u] : matched_pairs) {
        auto aw = new_edges_at(w);
        auto au = new_edges_at(u);
        bool in_i1 = false;
        for (VertexId a : aw)
            for (VertexId bb : au)
                if (a != bb) in_i1 = true;
        if (in_i1) ctx.I1.emplace_back(w, u);
    }
    ctx.I1_hat = ctx.I1;
    for (const Edge& e : ctx.I1) {
        for (VertexId a : new_edges_at(e.u)) detail::add_edge_unique(ctx.I1_hat, Edge(e.u, a));
        for (VertexId a : new_edges_at(e.v)) detail::add_edge_unique(ctx.I1_hat, Edge(e.v, a));
    }

    // Harmful-pair candidates: matched pairs where an endpoint gained a new
    // edge to a free vertex. Every free vertex's host checks which candidate
    // pairs it completes into a triangle and reports the closing edges.
    std::vector<std::pair<VertexId, VertexId>> harmful_candidates;
    for (auto& [w, u] : matched_pairs) {
        bool side = false;
        for (VertexId a : new_edges_at(w))
            if (sh.m0.count(a) && sh.m0[a] == kNoVertex) side = true;
        for (VertexId a : new_edges_at(u))
            if (sh.m0.count(a) && sh.m0[a] == kNoVertex) side = true;
        if (side) harmful_candidates.emplace_back(w, u);
    }

    TokenBatch b2(k);
    for (PlayerId p = 0; p < k; ++p) {
        for (VertexId c : sim.partition().hosted[p]) {
            if (sim.matching().is_matched(c)) continue;  // host reads its own status
            for (auto& [w, u] : harmful_candidates) {
                if (c == w || c == u) continue;
                if (sim.graph().has_edge(c, w) && sim.graph().has_edge(c, u))
                    b2.add(p, Token::make(TokenKind::ControlRecord, c, w, u));
            }
        }
    }
    SpreadResult tri = spread(sim, b2);

    for (const Token& t : tri.tokens) {
        VertexId c = static_cast<VertexId>(t.f[0]);
        VertexId w = static_cast<VertexId>(t.f[1]);
        VertexId u = static_cast<VertexId>(t.f[2]);
        sh.m0[c] = kNoVertex;  // only hosts of free vertices report
        detail::add_edge_unique(ctx.T, Edge(w, u));
        detail::add_edge_unique(ctx.T, Edge(c, w));
        detail::add_edge_unique(ctx.T, Edge(c, u));
        for (VertexId s : {w, u})
            for (VertexId a : new_edges_at(s))
                if (sh.m0.count(a) && sh.m0[a] == kNoVertex)
                    detail::add_edge_unique(ctx.T, Edge(s, a));
    }

    ctx.G1_edges = ctx.F;
    for (const Edge& e : ctx.I1_hat) detail::add_edge_unique(ctx.G1_edges, e);
    for (const Edge& e : ctx.T) detail::add_edge_unique(ctx.G1_edges, e);
    std::sort(ctx.G1_edges.begin(), ctx.G1_edges.end());
    if (static_cast<int>(ctx.G1_edges.size()) > 6 * b)
        throw G1Overflow("collected repair subgraph has " +
                         std::to_string(ctx.G1_edges.size()) + " edges, guard is " +
                         std::to_string(6 * b));

    // Replicated single-player computation: extend to a maximal matching on
    // the collected subgraph, then resolve its 3-augmenting paths in fixed
    // lexicographic order. Rotations never free a vertex, so the loop ends.
    std::set<VertexId> g1_vs;
    for (const Edge& e : ctx.G1_edges) {
        g1_vs.insert(e.u);
        g1_vs.insert(e.v);
    }
    auto& lp = sh.g1_partner;
    for (VertexId v : g1_vs) lp[v] = sh.m0.count(v) ? sh.m0[v] : kNoVertex;
    for (const Edge& e : ctx.G1_edges)
        if (lp[e.u] == kNoVertex && lp[e.v] == kNoVertex) {
            lp[e.u] = e.v;
            lp[e.v] = e.u;
        }
    for (;;) {
        bool rotated = false;
        for (const Edge& e : ctx.G1_edges) {
            if (lp[e.u] != e.v) continue;
            std::optional<std::pair<VertexId, VertexId>> best;
            for (const Edge& ea : ctx.G1_edges) {
                VertexId a = ea.u == e.u ? ea.v : (ea.v == e.u ? ea.u : kNoVertex);
                if (a == kNoVertex || lp[a] != kNoVertex) continue;
                for (const Edge& ed : ctx.G1_edges) {
                    VertexId d = ed.u == e.v ? ed.v : (ed.v == e.v ? ed.u : kNoVertex);
                    if (d == kNoVertex || d == a || lp[d] != kNoVertex) continue;
                    std::pair<VertexId, VertexId> cand{a, d};
                    if (!best || cand < *best) best = cand;
                }
            }
            if (best) {
                lp[e.u] = best->first;
                lp[best->first] = e.u;
                lp[e.v] = best->second;
                lp[best->second] = e.v;
                rotated = true;
                break;
            }
        }
        if (!rotated) break;
    }

    // Spread 3: matching diff, announced by the designated player.
    TokenBatch b3(k);
    std::vector<std::pair<VertexId, VertexId>> to_unmatch, to_match;
    for (VertexId v : g1_vs) {
        VertexId before = sh.m0.count(v) ? sh.m0[v] : kNoVertex;
        VertexId after = lp[v];
        if (before != after) {
            if (before != kNoVertex && v < before) to_unmatch.emplace_back(v, before);
            if (after != kNoVertex && v < after) to_match.emplace_back(v, after);
        }
    }
    for (auto& [a, bb] : to_unmatch)
        b3.add(0, Token::make(TokenKind::ControlRecord, 0, a, bb));
    for (auto& [a, bb] : to_match)
        b3.add(0, Token::make(TokenKind::ControlRecord, 1, a, bb));
    spread(sim, b3);

    for (auto& [a, bb] : to_unmatch) sim.matching().unmatch(a, bb);
    for (auto& [a, bb] : to_match) sim.matching().match(a, bb);

    // Statuses after the diff, known to every player.
    sh.m1 = sh.m0;
    for (VertexId v : g1_vs) sh.m1[v] = lp[v];
    ctx.m1 = sim.matching().partners();
    ctx.has_m1 = true;
    run.report.rounds = sim.current_update().rounds - r0;
}

/// Identifies the matched edges that can still lie on a 3-augmenting path: one
/// endpoint reaches a new free vertex, the other reaches an old free witness
/// distinct from it. Witness existence is established by per-candidate direct
/// replies capped at one witness per responder.
inline void compute_important_sets(Simulation& sim, MiniBatchRun& run) {
    const int k = sim.players();
    const int beta = sim.config().beta;
    PhaseContext& ctx = run.ctx;
    detail::Shared& sh = run.shared;
    long long r0 = sim.current_update().rounds;

    // Candidate pairs, computable by every player from the spread statuses.
    std::vector<std::pair<VertexId, VertexId>> pairs;  // (lo, hi), matched in m1
    {
        std::set<std::pair<VertexId, VertexId>> seen;
        for (auto& [v, p] : sh.m1) {
            if (p == kNoVertex) continue;
            VertexId lo = std::min(v, p), hi = std::max(v, p);
            if (!seen.insert({lo, hi}).second) continue;
            if (!sh.new_free_neighbors_m1(lo).empty() || !sh.new_free_neighbors_m1(hi).empty())
                pairs.emplace_back(lo, hi);
        }
        std::sort(pairs.begin(), pairs.end());
    }

    // Spread 4: witness queries (endpoint, excluded new-free vertex).
    struct Query {
        VertexId s;
        VertexId other;
        VertexId vexcl;
    };
    std::vector<Query> queries;
    for (auto& [a, bb] : pairs) {
        auto nf_a = sh.new_free_neighbors_m1(a);
        auto nf_b = sh.new_free_neighbors_m1(bb);
        if (!nf_b.empty())
            queries.push_back({a, bb, nf_b.size() == 1 ? *nf_b.begin() : kNoVertex});
        if (!nf_a.empty())
            queries.push_back({bb, a, nf_a.size() == 1 ? *nf_a.begin() : kNoVertex});
    }
    if (!pairs.empty()) {
        TokenBatch b4(k);
        for (const Query& q : queries)
            b4.add(0, Token::make(TokenKind::QueryRecord, q.s, q.other, q.vexcl));
        spread(sim, b4);

        // Direct replies to each queried endpoint's host, at most one witness
        // per (responder, endpoint); then the hosts announce the results.
        std::vector<Send> sends;
        std::map<VertexId, VertexId> witness;
        for (const Query& q : queries) witness[q.s] = kNoVertex;
        for (PlayerId p = 0; p < k; ++p) {
            for (const Query& q : queries) {
                VertexId cand =
                    detail::hosted_old_free_neighbor(sim, p, q.s, q.vexcl, sh.batch_all);
                if (cand == kNoVertex) continue;
                if (p == sim.owner(q.s)) {
                    if (witness[q.s] == kNoVertex || cand < witness[q.s]) witness[q.s] = cand;
                } else {
                    sends.push_back(
                        {p, sim.owner(q.s), Token::make(TokenKind::StatusRecord, q.s, cand)});
                }
            }
        }
        auto [inboxes, paced] =
            run_paced(sim, sends, ceil_div(static_cast<long long>(queries.size()), beta));
        for (PlayerId p = 0; p < k; ++p)
            for (const Delivery& d : inboxes[p]) {
                VertexId s = static_cast<VertexId>(d.token.f[0]);
                VertexId x = static_cast<VertexId>(d.token.f[1]);
                if (witness.count(s) && (witness[s] == kNoVertex || x < witness[s]))
                    witness[s] = x;
            }

        // Spread 5: witness announcements; every player then derives the same
        // important-edge set and roles.
        TokenBatch b5(k);
        for (const Query& q : queries)
            b5.add(sim.owner(q.s),
                   Token::make(TokenKind::StatusRecord, q.s, witness[q.s]));
        spread(sim, b5);

        for (auto& [a, bb] : pairs) {
            auto nf_a = sh.new_free_neighbors_m1(a);
            auto nf_b = sh.new_free_neighbors_m1(bb);
            bool valid_ab = !nf_b.empty() && witness[a] != kNoVertex;
            bool valid_ba = !nf_a.empty() && witness[bb] != kNoVertex;
            VertexId w = kNoVertex, u = kNoVertex;
            if (valid_ab) {
                w = a;
                u = bb;
            } else if (valid_ba) {
                w = bb;
                u = a;
            } else {
                continue;
            }
            ctx.I_edges.emplace_back(w, u);
            ctx.W.insert(w);
            ctx.U.insert(u);
            for (VertexId v : sh.new_free_neighbors_m1(u)) ctx.V.insert(v);
        }
        std::sort(ctx.I_edges.begin(), ctx.I_edges.end());
    }

    // Ground-truth X for the verification context; the protocol itself keeps
    // X distributed across the hosts.
    for (VertexId w : ctx.W)
        for (VertexId x : sim.graph().neighbors(w))
            if (!sim.matching().is_matched(x) && !sh.batch_all.count(Edge(x, w)))
                ctx.X.insert(x);

    run.report.rounds = sim.current_update().rounds - r0 + run.report.rounds;
}

struct BipartiteResult {
    std::vector<std::pair<VertexId, VertexId>> pairs;  // (x, w)
    long long iterations = 0;
};

/// Proposal protocol for a maximal matching on a bipartite helper graph. Each
/// iteration: spread the still-unmatched W-side, every player proposes its
/// lowest eligible hosted vertex per target, each target accepts the lowest
/// proposer, accepted pairs are spread, and everybody applies them in
/// target order (skipping proposers already taken). Terminates when an
/// iteration matches nothing.
template <typename Eligible>
inline BipartiteResult bipartite_maximal_matching(Simulation& sim,
                                                  const std::vector<VertexId>& w_side,
                                                  Eligible&& eligible) {
    const int k = sim.players();
    const int beta = sim.config().beta;
    BipartiteResult res;
    std::set<VertexId> matched_w, matched_x;
    for (;;) {
        std::vector<VertexId> unmatched_w;
        for (VertexId w : w_side)
            if (!matched_w.count(w)) unmatched_w.push_back(w);
        if (!unmatched_w.empty() || res.iterations == 0) {
            ++res.iterations;
            TokenBatch wlist(sim.players());
            for (VertexId w : unmatched_w)
                wlist.add(0, Token::make(TokenKind::QueryRecord, w));
            spread(sim, wlist);

            // Proposals, at most |unmatched W| tokens per link.
            std::vector<Send> sends;
            std::map<VertexId, VertexId> accepted;  // w -> lowest proposer
            for (PlayerId p = 0; p < k; ++p) {
                for (VertexId w : unmatched_w) {
                    VertexId best = kNoVertex;
                    for (VertexId x : sim.partition().hosted[p]) {
                        if (matched_x.count(x)) continue;
                        if (!eligible(x, w)) continue;
                        best = x;
                        break;  // hosted lists are sorted ascending
                    }
                    if (best == kNoVertex) continue;
                    if (p == sim.owner(w)) {
                        auto it = accepted.find(w);
                        if (it == accepted.end() || best < it->second) accepted[w] = best;
                    } else {
                        sends.push_back(
                            {p, sim.owner(w), Token::make(TokenKind::ControlRecord, w, best)});
                    }
                }
            }
            auto [inboxes, paced] = run_paced(
                sim, sends, ceil_div(static_cast<long long>(unmatched_w.size()), beta));
            for (PlayerId p = 0; p < k; ++p)
                for (const Delivery& d : inboxes[p]) {
                    VertexId w = static_cast<VertexId>(d.token.f[0]);
                    VertexId x = static_cast<VertexId>(d.token.f[1]);
                    auto it = accepted.find(w);
                    if (it == accepted.end() || x < it->second) accepted[w] = x;
                }

            TokenBatch acc(sim.players());
            for (auto& [w, x] : accepted)
                acc.add(sim.owner(w), Token::make(TokenKind::ControlRecord, w, x));
            spread(sim, acc);

            // Deterministic merge in target order; duplicate proposers lose.
            long long applied = 0;
            for (auto& [w, x] : accepted) {
                if (matched_x.count(x)) continue;
                matched_w.insert(w);
                matched_x.insert(x);
                res.pairs.emplace_back(x, w);
                ++applied;
            }
            if (applied == 0) break;
        } else {
            break;
        }
    }
    std::sort(res.pairs.begin(), res.pairs.end());
    return res;
}

/// Phase 2: a virtual maximal matching between the old free witnesses and the
/// W-side. The real matching is untouched.
inline void phase2(Simulation& sim, MiniBatchRun& run) {
    PhaseContext& ctx = run.ctx;
    detail::Shared& sh = run.shared;
    long long r0 = sim.current_update().rounds;
    long long s0 = sim.current_update().spreading_invocations;
    if (!ctx.W.empty()) {
        std::vector<VertexId> w_side(ctx.W.begin(), ctx.W.end());
        auto eligible = [&](VertexId x, VertexId w) {
            if (!ctx.W.count(w)) return false;
            if (sim.matching().is_matched(x)) return false;
            if (!sim.graph().has_edge(x, w)) return false;
            return sh.batch_all.count(Edge(x, w)) == 0;
        };
        BipartiteResult bp = bipartite_maximal_matching(sim, w_side, eligible);
        ctx.M_XW = bp.pairs;
        ctx.phase2_iterations = bp.iterations;
        for (auto& [x, w] : bp.pairs) {
            ctx.X_prime.insert(x);
            ctx.x_of_w[w] = x;
        }
    }
    long long spreads = sim.current_update().spreading_invocations - s0;
    sim.current_update().spreading_invocations_phase2 += spreads;
    sim.current_update().proposal_iterations += ctx.phase2_iterations;
    run.report.spreads_phase2 = spreads;
    run.report.phase2_iterations = ctx.phase2_iterations;
    run.report.w_size = static_cast<int>(ctx.W.size());
    run.report.rounds = sim.current_update().rounds - r0 + run.report.rounds;
}

/// Phase 3: gather the subgraph induced by the re-matching candidates at the
/// designated player, rotate 3-augmenting paths in two fixed-order stages,
/// requery hosts directly for fresh witnesses where virtual partners were
/// consumed, and spread the final diff.
inline void phase3(Simulation& sim, MiniBatchRun& run, int b) {
    const int k = sim.players();
    const int beta = sim.config().beta;
    PhaseContext& ctx = run.ctx;
    detail::Shared& sh = run.shared;
    long long r0 = sim.current_update().rounds;

    if (ctx.I_edges.empty()) {
        ctx.has_final = true;
        run.report.rounds = sim.current_update().rounds - r0 + run.report.rounds;
        return;
    }

    std::set<VertexId>& vset = ctx.g_star_vertices;
    vset.insert(ctx.X_prime.begin(), ctx.X_prime.end());
    vset.insert(ctx.W.begin(), ctx.W.end());
    vset.insert(ctx.U.begin(), ctx.U.end());
    vset.insert(ctx.V.begin(), ctx.V.end());
    if (static_cast<int>(vset.size()) > 6 * b)
        throw GStarOverflow("induced working subgraph has " + std::to_string(vset.size()) +
                            " vertices, guard is " + std::to_string(6 * b));

    // Spread 6: induced edges, each reported by the host of the endpoint with
    // the lower owner id (single report when one player hosts both).
    TokenBatch b6(k);
    for (VertexId a : vset)
        for (VertexId nb : sim.graph().neighbors(a)) {
            if (!vset.count(nb)) continue;
            PlayerId pa = sim.owner(a), pb = sim.owner(nb);
            bool reporter = pa < pb || (pa == pb && a < nb);
            if (!reporter) continue;
            long long matched = sim.matching().partner(a) == nb ? 1 : 0;
            b6.add(pa, Token::make(TokenKind::EdgeRecord, std::min(a, nb), std::max(a, nb),
                                   matched));
        }
    SpreadResult sp6 = spread(sim, b6);

    std::map<VertexId, std::set<VertexId>> adj;
    for (const Token& t : sp6.tokens) {
        VertexId a = static_cast<VertexId>(t.f[0]);
        VertexId bb = static_cast<VertexId>(t.f[1]);
        adj[a].insert(bb);
        adj[bb].insert(a);
    }

    // Replicated local state: current partners of the working vertices, plus
    // any outside witness a requery rotation matches.
    std::map<VertexId, VertexId> cur;
    for (VertexId v : vset) cur[v] = sh.m1.count(v) ? sh.m1[v] : kNoVertex;
    auto is_free = [&](VertexId v) {
        auto it = cur.find(v);
        return it != cur.end() && it->second == kNoVertex;
    };
    auto rotate = [&](VertexId w, VertexId u, VertexId x, VertexId v) {
        cur[w] = x;
        cur[x] = w;
        cur[u] = v;
        cur[v] = u;
    };

    // Stage 1: try each edge's own virtual partner.
    for (auto& [w, u] : ctx.I_edges) {
        if (cur[w] != u) continue;
        auto it = ctx.x_of_w.find(w);
        if (it == ctx.x_of_w.end()) continue;
        VertexId xi = it->second;
        if (!is_free(xi) || !adj[w].count(xi)) continue;
        VertexId pick = kNoVertex;
        for (VertexId v : ctx.V)
            if (v != xi && is_free(v) && adj[u].count(v)) {
                pick = v;
                break;
            }
        if (pick != kNoVertex) rotate(w, u, xi, pick);
    }
    // Stage 2: any free virtually-matched witness completes the path.
    for (auto& [w, u] : ctx.I_edges) {
        if (cur[w] != u) continue;
        VertexId px = kNoVertex, pv = kNoVertex;
        for (VertexId x : ctx.X_prime) {
            if (!is_free(x) || !adj[w].count(x)) continue;
            for (VertexId v : ctx.V)
                if (v != x && is_free(v) && adj[u].count(v)) {
                    px = x;
                    pv = v;
                    break;
                }
            if (px != kNoVertex) break;
        }
        if (px != kNoVertex) rotate(w, u, px, pv);
    }

    // Requery: a still-matched edge with a live new free neighbor may have a
    // fresh old witness that never entered the collected sets (its virtual
    // partner may have been consumed as another edge's path endpoint, or the
    // sole witness may double as the path's other end). Direct round-trips
    // through the designated player resolve these. When only one completing
    // vertex remains on the u side, the query names it so responders skip it;
    // otherwise any witness admits a distinct completion.
    for (;;) {
        struct Pending {
            VertexId w, u, v_avoid;
        };
        std::vector<Pending> pending;
        for (auto& [w, u] : ctx.I_edges) {
            if (cur[w] != u) continue;
            std::vector<VertexId> sv;
            for (VertexId v : ctx.V)
                if (is_free(v) && adj[u].count(v)) sv.push_back(v);
            if (sv.empty()) continue;
            pending.push_back({w, u, sv.size() == 1 ? sv[0] : kNoVertex});
        }
        if (pending.empty()) break;
        ++ctx.phase3_requery_trips;

        std::vector<Send> ask;
        for (const Pending& pd : pending)
            for (PlayerId p = 0; p < k; ++p)
                if (p != 0)
                    ask.push_back(
                        {0, p, Token::make(TokenKind::QueryRecord, pd.w, pd.u, pd.v_avoid)});
        run_paced(sim, ask, ceil_div(static_cast<long long>(pending.size()), beta));

        std::map<VertexId, std::vector<VertexId>> fresh;
        std::vector<Send> reply;
        for (PlayerId p = 0; p < k; ++p) {
            for (const Pending& pd : pending) {
                VertexId cand =
                    detail::hosted_old_free_neighbor(sim, p, pd.w, pd.v_avoid, sh.batch_all);
                if (cand == kNoVertex) continue;
                if (p == 0)
                    fresh[pd.w].push_back(cand);
                else
                    reply.push_back({p, 0, Token::make(TokenKind::StatusRecord, pd.w, cand)});
            }
        }
        auto [inb, paced] =
            run_paced(sim, reply, ceil_div(static_cast<long long>(pending.size()), beta));
        for (const Delivery& d : inb[0])
            fresh[static_cast<VertexId>(d.token.f[0])].push_back(
                static_cast<VertexId>(d.token.f[1]));

        long long rotations = 0;
        for (const Pending& pd : pending) {
            if (cur[pd.w] != pd.u) continue;
            auto& cands = fresh[pd.w];
            std::sort(cands.begin(), cands.end());
            VertexId x = kNoVertex, v = kNoVertex;
            for (VertexId c : cands) {
                if (cur.count(c) && cur[c] != kNoVertex) continue;
                for (VertexId vv : ctx.V)
                    if (vv != c && is_free(vv) && adj[pd.u].count(vv)) {
                        x = c;
                        v = vv;
                        break;
                    }
                if (x != kNoVertex) break;
            }
            if (x == kNoVertex) continue;
            cur[pd.w] = x;
            cur[x] = pd.w;
            cur[pd.u] = v;
            cur[v] = pd.u;
            ++rotations;
        }
        if (rotations == 0) break;
    }

    // Spread 7: final diff against the phase-1 matching.
    struct Op {
        int op;
        VertexId a, b;
    };
    std::vector<Op> ops;
    std::set<std::pair<VertexId, VertexId>> done;
    for (auto& [w, u] : ctx.I_edges) {
        if (cur[w] == u) continue;
        ops.push_back({0, std::min(w, u), std::max(w, u)});
    }
    auto record_match = [&](VertexId a, VertexId bb) {
        auto key = std::make_pair(std::min(a, bb), std::max(a, bb));
        if (done.insert(key).second) ops.push_back({1, key.first, key.second});
    };
    for (auto& [v, p] : cur) {
        VertexId before = sh.m1.count(v) ? sh.m1[v] : kNoVertex;
        if (p != before && p != kNoVertex) record_match(v, p);
    }
    TokenBatch b7(k);
    for (const Op& o : ops)
        b7.add(0, Token::make(TokenKind::ControlRecord, o.op, o.a, o.b));
    spread(sim, b7);

    for (const Op& o : ops)
        if (o.op == 0) sim.matching().unmatch(o.a, o.b);
    for (const Op& o : ops)
        if (o.op == 1) sim.matching().match(o.a, o.b);

    // Oracle-facing copy of the induced subgraph with final statuses.
    for (const Token& t : sp6.tokens)
        detail::add_edge_unique(ctx.g_star_edges,
                                Edge(static_cast<VertexId>(t.f[0]), static_cast<VertexId>(t.f[1])));
    ctx.has_final = true;
    run.report.requery_trips = ctx.phase3_requery_trips;
    run.report.rounds = sim.current_update().rounds - r0 + run.report.rounds;
}

inline MiniBatchReport process_minibatch(Simulation& sim, const std::vector<Edge>& chunk,
                                         PhaseObserver* observer = nullptr) {
    const int b = minibatch_size(sim.config().k, sim.config().beta);
    MiniBatchRun run = begin_minibatch(sim, chunk);
    phase1(sim, run, b);
    if (observer) observer->after_phase1(sim, run.ctx);
    compute_important_sets(sim, run);
    if (observer) observer->after_important_sets(sim, run.ctx);
    phase2(sim, run);
    if (observer) observer->after_phase2(sim, run.ctx);
    phase3(sim, run, b);
    if (observer) observer->after_phase3(sim, run.ctx);
    run.report.spreads_total =
        sim.current_update().spreading_invocations - run.spreads_at_start;
    return run.report;
}

/// Validates and applies a batch of insertions in mini-batches of
/// b = floor(sqrt(k*beta)) edges. The matching is maximal without
/// 3-augmenting paths after every mini-batch.
inline BatchReport process_batch(Simulation& sim, const std::vector<Edge>& edges,
                                 PhaseObserver* observer = nullptr) {
    std::set<Edge> seen;
    for (const Edge& e : edges) {
        if (e.u == e.v) throw SelfLoop(e.u);
        if (!seen.insert(e).second) throw DuplicateEdge(e.u, e.v);
        if (sim.graph().has_edge(e.u, e.v)) throw DuplicateEdge(e.u, e.v);
    }
    BatchReport report;
    const int b = minibatch_size(sim.config().k, sim.config().beta);
    for (std::size_t at = 0; at < edges.size(); at += b) {
        std::size_t stop = std::min(edges.size(), at + b);
        std::vector<Edge> chunk(edges.begin() + at, edges.begin() + stop);
        MiniBatchReport mb = process_minibatch(sim, chunk, observer);
        report.rounds += mb.rounds;
        report.minibatches.push_back(mb);
    }
    sim.current_update().minibatches = static_cast<long long>(report.minibatches.size());
    for (const auto& mb : report.minibatches)
        sim.current_update().minibatch_rounds.push_back(mb.rounds);
    return report;
}

}  // namespace batchinc
}  // namespace dymatch
