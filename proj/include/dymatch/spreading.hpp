#pragma once

#include <algorithm>
#include <vector>

#include "dymatch/sim.hpp"

namespace dymatch {

/// Tokens to disseminate, listed per holding player. Duplicate content within
/// one player's list is collapsed before counting.
struct TokenBatch {
    std::vector<std::vector<Token>> per_player;

    explicit TokenBatch(int k) : per_player(k) {}

    void add(PlayerId p, Token t) { per_player[p].push_back(t); }

    long long total() const {
        long long n = 0;
        for (const auto& v : per_player) n += static_cast<long long>(v.size());
        return n;
    }
};

struct SpreadResult {
    std::vector<Token> tokens;  // deduplicated union, sorted; same at every player
    long long rounds = 0;
};

/// Delivers every token in the batch to every player.
///
/// Three stages: (1) one round exchanging per-player token counts, (2)
/// deterministic rebalancing so each player holds at most ceil(N/k) tokens,
/// (3) every player broadcasts its share at beta tokens per link per round.
/// Total rounds <= 2*ceil(N/(beta*k)) + 3 <= 3*(ceil(N/(beta*k)) + 2).
inline SpreadResult spread(Simulation& sim, const TokenBatch& batch) {
    const int k = sim.players();
    const int beta = sim.config().beta;
    ++sim.current_update().spreading_invocations;
    ++sim.metrics().spreading_invocations;

    // Stage 0: canonical per-player holdings.
    std::vector<std::vector<Token>> hold(k);
    for (PlayerId p = 0; p < k; ++p) {
        hold[p] = batch.per_player[p];
        std::sort(hold[p].begin(), hold[p].end());
        hold[p].erase(std::unique(hold[p].begin(), hold[p].end()), hold[p].end());
    }

    SpreadResult res;
    for (PlayerId p = 0; p < k; ++p)
        res.tokens.insert(res.tokens.end(), hold[p].begin(), hold[p].end());
    std::sort(res.tokens.begin(), res.tokens.end());
    res.tokens.erase(std::unique(res.tokens.begin(), res.tokens.end()), res.tokens.end());

    // Stage 1: counts. After this round every player can compute the same
    // rebalancing schedule and the exact number of remaining rounds.
    {
        RoundPlan plan(k);
        for (PlayerId i = 0; i < k; ++i)
            for (PlayerId j = 0; j < k; ++j)
                if (i != j)
                    plan.send(i, j,
                              Token::make(TokenKind::ControlRecord,
                                          static_cast<std::int64_t>(hold[i].size())));
        sim.run_round(plan);
        res.rounds += 1;
    }

    long long total = 0;
    std::vector<long long> cnt(k), prefix(k + 1, 0);
    for (PlayerId p = 0; p < k; ++p) {
        cnt[p] = static_cast<long long>(hold[p].size());
        prefix[p + 1] = prefix[p] + cnt[p];
        total += cnt[p];
    }
    if (total == 0) return res;

    // Stage 2: rebalance to contiguous rank chunks of size ceil(N/k).
    const long long chunk = ceil_div(total, k);
    auto target_of = [&](long long rank) { return static_cast<PlayerId>(rank / chunk); };
    std::vector<std::vector<std::vector<Token>>> outgoing(
        k, std::vector<std::vector<Token>>(k));
    std::vector<std::vector<Token>> share(k);
    for (PlayerId i = 0; i < k; ++i)
        for (long long idx = 0; idx < cnt[i]; ++idx) {
            long long rank = prefix[i] + idx;
            PlayerId tgt = target_of(rank);
            if (tgt == i)
                share[i].push_back(hold[i][idx]);
            else
                outgoing[i][tgt].push_back(hold[i][idx]);
        }
    long long rebalance_rounds = 0;
    for (PlayerId i = 0; i < k; ++i)
        for (PlayerId j = 0; j < k; ++j)
            rebalance_rounds = std::max(
                rebalance_rounds,
                ceil_div(static_cast<long long>(outgoing[i][j].size()), beta));
    std::vector<std::vector<std::size_t>> cursor(k, std::vector<std::size_t>(k, 0));
    for (long long r = 0; r < rebalance_rounds; ++r) {
        RoundPlan plan(k);
        for (PlayerId i = 0; i < k; ++i)
            for (PlayerId j = 0; j < k; ++j) {
                if (i == j) continue;
                auto& out = outgoing[i][j];
                auto& c = cursor[i][j];
                for (int b = 0; b < beta && c < out.size(); ++b, ++c)
                    plan.send(i, j, out[c]);
            }
        Inboxes got = sim.run_round(plan);
        for (PlayerId p = 0; p < k; ++p)
            for (const Delivery& d : got[p]) share[p].push_back(d.token);
    }
    res.rounds += rebalance_rounds;
    for (PlayerId p = 0; p < k; ++p) std::sort(share[p].begin(), share[p].end());

    // Stage 3: every player broadcasts its share on all links in parallel.
    long long broadcast_rounds = 0;
    for (PlayerId p = 0; p < k; ++p)
        broadcast_rounds = std::max(
            broadcast_rounds, ceil_div(static_cast<long long>(share[p].size()), beta));
    std::vector<std::size_t> bc(k, 0);
    for (long long r = 0; r < broadcast_rounds; ++r) {
        RoundPlan plan(k);
        for (PlayerId i = 0; i < k; ++i) {
            std::size_t start = bc[i];
            std::size_t stop = std::min(share[i].size(), start + beta);
            for (PlayerId j = 0; j < k; ++j) {
                if (i == j) continue;
                for (std::size_t c = start; c < stop; ++c) plan.send(i, j, share[i][c]);
            }
            bc[i] = stop;
        }
        sim.run_round(plan);
    }
    res.rounds += broadcast_rounds;
    return res;
}

/// Upper bound the postcondition guarantees for a spread of N tokens.
inline long long spread_round_bound(long long n_tokens, int k, int beta) {
    return 3 * (ceil_div(std::max(n_tokens, 0LL), static_cast<long long>(beta) * k) + 2);
}

}  // namespace dymatch
