#pragma once

#include <algorithm>
#include <optional>
#include <vector>

#include "dymatch/sim.hpp"
#include "dymatch/spreading.hpp"

namespace dymatch {

/// Memoryless single-update maintenance of a maximal matching without
/// 3-augmenting paths. Handlers are invoked after the graph mutation has been
/// applied (and, for deletions, after the matched pair was cleared); they
/// return the number of rounds used.
namespace fullydyn {

namespace detail {

/// Lowest free neighbor of `center` hosted by player p, skipping up to two
/// excluded vertices.
inline VertexId local_free_neighbor(const Simulation& sim, PlayerId p, VertexId center,
                                    VertexId ex1, VertexId ex2 = kNoVertex) {
    for (VertexId x : sim.graph().neighbors(center)) {
        if (x == ex1 || x == ex2 || sim.owner(x) != p) continue;
        if (!sim.matching().is_matched(x)) return x;  // neighbors ascend
    }
    return kNoVertex;
}

/// Asks every player for a free neighbor of `center` (excluding `exclude`).
/// Round 1: the asker broadcasts the query, carrying its own best hosted
/// candidate. Round 2: every positive responder broadcasts one witness on all
/// its links, so the lowest-ID winner is computable by every participant
/// without a third round.
inline std::pair<VertexId, long long> query_free_neighbor(Simulation& sim, VertexId center,
                                                          VertexId exclude) {
    if (sim.graph().degree(center) == 0) return {kNoVertex, 0};
    const int k = sim.players();
    const PlayerId asker = sim.owner(center);
    VertexId local = local_free_neighbor(sim, asker, center, exclude);
    {
        RoundPlan plan(k);
        for (PlayerId j = 0; j < k; ++j)
            if (j != asker)
                plan.send(asker, j, Token::make(TokenKind::QueryRecord, center, exclude, local));
        sim.run_round(plan);
    }
    VertexId best = local;
    {
        RoundPlan plan(k);
        for (PlayerId p = 0; p < k; ++p) {
            if (p == asker) continue;
            VertexId cand = local_free_neighbor(sim, p, center, exclude);
            if (cand == kNoVertex) continue;
            for (PlayerId j = 0; j < k; ++j)
                if (j != p) plan.send(p, j, Token::make(TokenKind::StatusRecord, center, cand));
            if (best == kNoVertex || cand < best) best = cand;
        }
        sim.run_round(plan);
    }
    return {best, 2};
}

struct AugCandidate {
    VertexId v, w, x;
    friend bool operator<(const AugCandidate& a, const AugCandidate& b) {
        return std::tie(a.v, a.w, a.x) < std::tie(b.v, b.w, b.x);
    }
};

/// Low-degree repair: spread the center's neighborhood, run the parallel
/// second-hop free-neighbor checks via merged spreading, and rotate the
/// lexicographically smallest 3-augmenting path if one exists. Witnesses never
/// include the center or the still-unrepaired sibling endpoint `pending`:
/// matching the sibling here would end the update while it may still have
/// free neighbors of its own.
inline long long repair_low_degree(Simulation& sim, VertexId c, VertexId pending) {
    const int k = sim.players();
    long long rounds = 0;

    // The neighborhood tokens establish the episode context (center and
    // pending exclusion) at every player.
    TokenBatch nbrs(k);
    for (VertexId v : sim.graph().neighbors(c))
        nbrs.add(sim.owner(c), Token::make(TokenKind::QueryRecord, c, v, pending));
    SpreadResult sp1 = spread(sim, nbrs);
    rounds += sp1.rounds;

    // Hosts of vertices matched to a neighbor of c ask, in parallel, whether
    // their vertex has an admissible free neighbor. Each query carries the
    // asker's own best hosted candidate.
    TokenBatch queries(k);
    for (const Token& t : sp1.tokens) {
        VertexId v = static_cast<VertexId>(t.f[1]);
        VertexId w = sim.matching().partner(v);
        if (w == kNoVertex) continue;
        PlayerId host = sim.owner(w);
        VertexId local = local_free_neighbor(sim, host, w, c, pending);
        queries.add(host, Token::make(TokenKind::QueryRecord, w, v, local));
    }
    SpreadResult sp2 = spread(sim, queries);
    rounds += sp2.rounds;

    TokenBatch replies(k);
    for (PlayerId p = 0; p < k; ++p) {
        for (const Token& q : sp2.tokens) {
            VertexId w = static_cast<VertexId>(q.f[0]);
            if (sim.owner(w) == p) continue;  // asker folded its candidate into the query
            VertexId cand = local_free_neighbor(sim, p, w, c, pending);
            if (cand != kNoVertex)
                replies.add(p, Token::make(TokenKind::StatusRecord, w, cand));
        }
    }
    SpreadResult sp3 = spread(sim, replies);
    rounds += sp3.rounds;

    std::optional<AugCandidate> pick;
    for (const Token& q : sp2.tokens) {
        VertexId w = static_cast<VertexId>(q.f[0]);
        VertexId v = static_cast<VertexId>(q.f[1]);
        VertexId best = static_cast<VertexId>(q.f[2]);
        for (const Token& r : sp3.tokens) {
            if (static_cast<VertexId>(r.f[0]) != w) continue;
            VertexId x = static_cast<VertexId>(r.f[1]);
            if (best == kNoVertex || x < best) best = x;
        }
        if (best == kNoVertex) continue;
        AugCandidate cand{v, w, best};
        if (!pick || cand < *pick) pick = cand;
    }
    if (pick) {
        sim.matching().unmatch(pick->v, pick->w);
        sim.matching().match(c, pick->v);
        sim.matching().match(pick->w, pick->x);
    }
    return rounds;
}

/// High-degree repair: sample neighbors, locate a low-degree vertex matched to
/// one of them (repeating the sample until one is found), rotate, then repair
/// the freed vertex.
inline long long repair_high_degree(Simulation& sim, VertexId u, VertexId pending) {
    const int k = sim.players();
    const int n = sim.config().n;
    long long rounds = 0;
    const int log_n = std::max(ilog2_ceil(static_cast<unsigned long long>(n)), 1);
    const int gamma = 4 * log_n;
    const long long attempt_cap = 64LL * log_n;
    const long long m = sim.graph().edge_count();
    const PlayerId pu = sim.owner(u);

    std::vector<VertexId> nbrs(sim.graph().neighbors(u).begin(), sim.graph().neighbors(u).end());
    VertexId picked_v = kNoVertex, picked_w = kNoVertex;
    long long attempts = 0;
    while (picked_v == kNoVertex) {
        if (++attempts > attempt_cap)
            throw SamplingExhausted("no low-degree partner after " +
                                    std::to_string(attempts - 1) + " samples around vertex " +
                                    std::to_string(u));
        ++sim.current_update().sampling_attempts;

        std::vector<VertexId> sample = nbrs;
        if (static_cast<int>(sample.size()) > gamma) {
            auto& rng = sim.player_rng(pu);
            for (int i = 0; i < gamma; ++i) {
                std::uniform_int_distribution<std::size_t> dist(i, sample.size() - 1);
                std::swap(sample[i], sample[dist(rng)]);
            }
            sample.resize(gamma);
            std::sort(sample.begin(), sample.end());
        }

        TokenBatch sample_batch(k);
        for (VertexId v : sample)
            sample_batch.add(pu, Token::make(TokenKind::QueryRecord, u, v));
        SpreadResult sp1 = spread(sim, sample_batch);
        rounds += sp1.rounds;

        TokenBatch asks(k);
        for (const Token& t : sp1.tokens) {
            VertexId v = static_cast<VertexId>(t.f[1]);
            VertexId w = sim.matching().partner(v);
            if (w == kNoVertex) continue;
            asks.add(sim.owner(v), Token::make(TokenKind::ControlRecord, v, w));
        }
        SpreadResult sp2 = spread(sim, asks);
        rounds += sp2.rounds;

        TokenBatch reports(k);
        for (const Token& t : sp2.tokens) {
            VertexId w = static_cast<VertexId>(t.f[1]);
            reports.add(sim.owner(w),
                        Token::make(TokenKind::StatusRecord, w, sim.graph().degree(w)));
        }
        SpreadResult sp3 = spread(sim, reports);
        rounds += sp3.rounds;

        for (const Token& t : sp2.tokens) {
            VertexId v = static_cast<VertexId>(t.f[0]);
            VertexId w = static_cast<VertexId>(t.f[1]);
            long long dw = -1;
            for (const Token& r : sp3.tokens)
                if (static_cast<VertexId>(r.f[0]) == w) dw = r.f[1];
            if (dw < 0 || dw * dw > 4 * m) continue;
            if (picked_v == kNoVertex || std::tie(v, w) < std::tie(picked_v, picked_w)) {
                picked_v = v;
                picked_w = w;
            }
        }
    }

    sim.matching().unmatch(picked_v, picked_w);
    sim.matching().match(u, picked_v);

    auto [y, qr] = query_free_neighbor(sim, picked_w, pending);
    rounds += qr;
    if (y != kNoVertex)
        sim.matching().match(picked_w, y);
    else
        rounds += repair_low_degree(sim, picked_w, pending);
    return rounds;
}

inline long long free_repair_impl(Simulation& sim, VertexId u, VertexId pending) {
    if (sim.matching().is_matched(u)) return 0;
    if (sim.graph().degree(u) == 0) return 0;

    auto [w, rounds] = detail::query_free_neighbor(sim, u, pending);
    if (w != kNoVertex) {
        sim.matching().match(u, w);
        return rounds;
    }
    long long d = sim.graph().degree(u);
    if (d * d <= 4 * sim.graph().edge_count())
        return rounds + detail::repair_low_degree(sim, u, pending);
    return rounds + detail::repair_high_degree(sim, u, pending);
}

}  // namespace detail

/// Re-establishes maximality and the absence of 3-augmenting paths around a
/// free vertex. No-op when the vertex has been matched by an earlier repair.
inline long long free_repair(Simulation& sim, VertexId u) {
    return detail::free_repair_impl(sim, u, kNoVertex);
}

/// Handles the insertion of {u,v} (already applied to the graph).
inline long long on_insert(Simulation& sim, VertexId u, VertexId v) {
    const int k = sim.players();
    long long rounds = 0;
    PlayerId pu = sim.owner(u), pv = sim.owner(v);
    if (pu != pv) {
        RoundPlan plan(k);
        plan.send(pu, pv, Token::make(TokenKind::StatusRecord, u, sim.matching().partner(u)));
        plan.send(pv, pu, Token::make(TokenKind::StatusRecord, v, sim.matching().partner(v)));
        sim.run_round(plan);
        rounds += 1;
    }
    bool mu = sim.matching().is_matched(u);
    bool mv = sim.matching().is_matched(v);
    if (mu && mv) return rounds;
    if (!mu && !mv) {
        sim.matching().match(u, v);
        return rounds;
    }

    VertexId fre = mu ? v : u;
    VertexId mat = mu ? u : v;
    VertexId w = sim.matching().partner(mat);
    if (sim.owner(mat) != sim.owner(w)) {
        RoundPlan plan(k);
        plan.send(sim.owner(mat), sim.owner(w), Token::make(TokenKind::QueryRecord, w, fre));
        sim.run_round(plan);
        rounds += 1;
    }
    auto [x, qr] = detail::query_free_neighbor(sim, w, fre);
    rounds += qr;
    if (x != kNoVertex) {
        sim.matching().unmatch(mat, w);
        sim.matching().match(fre, mat);
        sim.matching().match(w, x);
    }
    return rounds;
}

/// Handles the deletion of {u,v} (already removed; a matched pair was cleared
/// beforehand, signaled by was_matched). The two endpoint repairs run in
/// sequence; the first treats the second endpoint as pending and never
/// matches it, so the second repair sees every path it terminates.
inline long long on_delete(Simulation& sim, VertexId u, VertexId v, bool was_matched) {
    if (!was_matched) return 0;
    long long rounds = detail::free_repair_impl(sim, u, v);
    rounds += detail::free_repair_impl(sim, v, kNoVertex);
    return rounds;
}

}  // namespace fullydyn
}  // namespace dymatch
