#pragma once

#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "dymatch/graph.hpp"
#include "dymatch/metrics.hpp"
#include "dymatch/types.hpp"

namespace dymatch {

/// Tokens scheduled for one synchronous round, keyed by ordered link (from, to).
class RoundPlan {
public:
    explicit RoundPlan(int k) : k_(k), sends_(static_cast<std::size_t>(k) * k) {}

    void send(PlayerId from, PlayerId to, Token t) {
        if (from == to) throw StateCorrupt("token addressed to its own sender");
        at(from, to).push_back(t);
    }

    const std::vector<Token>& tokens(PlayerId from, PlayerId to) const {
        return sends_[static_cast<std::size_t>(from) * k_ + to];
    }

    bool empty() const {
        for (const auto& v : sends_)
            if (!v.empty()) return false;
        return true;
    }

    int players() const { return k_; }

private:
    std::vector<Token>& at(PlayerId from, PlayerId to) {
        return sends_[static_cast<std::size_t>(from) * k_ + to];
    }

    int k_;
    std::vector<std::vector<Token>> sends_;
};

struct Delivery {
    PlayerId from;
    Token token;
};

using Inbox = std::vector<Delivery>;      // sorted by sender, then send order
using Inboxes = std::vector<Inbox>;       // one per player

/// Deterministic synchronous round engine for k fully-connected players with a
/// per-link budget of beta tokens per round. Owns the ground-truth graph,
/// partition, matching and metrics. Single-threaded per instance.
class Simulation {
public:
    Simulation(SimConfig cfg, Partition part)
        : cfg_(cfg),
          partition_(std::move(part)),
          graph_(cfg.n),
          matching_(cfg.n),
          metrics_(cfg.k),
          notes_(cfg.k) {
        cfg_.validate();
        validate_partition(partition_, cfg_.n, cfg_.k);
    }

    Simulation(const Simulation&) = delete;
    Simulation& operator=(const Simulation&) = delete;

    const SimConfig& config() const { return cfg_; }
    const Partition& partition() const { return partition_; }
    PlayerId owner(VertexId v) const { return partition_.owner[v]; }
    int players() const { return cfg_.k; }
    int token_bits() const { return cfg_.effective_token_bits(); }

    Graph& graph() { return graph_; }
    const Graph& graph() const { return graph_; }
    Matching& matching() { return matching_; }
    const Matching& matching() const { return matching_; }
    Metrics& metrics() { return metrics_; }
    const Metrics& metrics() const { return metrics_; }

    long long round() const { return round_; }
    long long update_index() const { return update_index_; }

    /// Executes one synchronous round. Validates the per-link budget before
    /// delivering anything; a violation is an algorithm bug and aborts the
    /// update.
    Inboxes run_round(const RoundPlan& plan) {
        const int k = cfg_.k;
        for (PlayerId i = 0; i < k; ++i)
            for (PlayerId j = 0; j < k; ++j) {
                if (i == j) continue;
                long long c = static_cast<long long>(plan.tokens(i, j).size());
                if (c > cfg_.beta) throw LinkOverflow(i, j, c, cfg_.beta);
            }
        Inboxes inboxes(k);
        long long round_tokens = 0;
        for (PlayerId j = 0; j < k; ++j) {
            long long received = 0;
            for (PlayerId i = 0; i < k; ++i) {
                if (i == j) continue;
                for (const Token& t : plan.tokens(i, j)) {
                    inboxes[j].push_back({i, t});
                    ++received;
                }
            }
            metrics_.bits_received_per_player[j] += received * token_bits();
            round_tokens += received;
        }
        for (PlayerId i = 0; i < k; ++i)
            for (PlayerId j = 0; j < k; ++j) {
                if (i == j) continue;
                long long c = static_cast<long long>(plan.tokens(i, j).size());
                if (c > metrics_.max_link_tokens_per_round)
                    metrics_.max_link_tokens_per_round = c;
                if (c > current_.max_link_tokens) current_.max_link_tokens = c;
            }
        ++round_;
        ++metrics_.rounds_total;
        ++current_.rounds;
        metrics_.tokens_total += round_tokens;
        current_.tokens += round_tokens;
        return inboxes;
    }

    /// Byte-identical serialization of player p's persistent memory: its legal
    /// local view plus anything an algorithm stashed in its note store. A
    /// memoryless algorithm leaves the note store empty, so the snapshot is a
    /// pure function of (hosted input, output matching).
    std::string snapshot_player_state(PlayerId p) const {
        std::string s = local_view(graph_, matching_, partition_, p).serialize();
        for (const auto& [key, val] : notes_[p]) s += "note " + key + "=" + val + "\n";
        return s;
    }

    LocalView view(PlayerId p) const { return local_view(graph_, matching_, partition_, p); }

    /// Persistent per-player key-value store. Memoryless algorithms must never
    /// write here; the harness checks it stays empty.
    std::map<std::string, std::string>& notes(PlayerId p) { return notes_[p]; }
    const std::map<std::string, std::string>& notes(PlayerId p) const { return notes_[p]; }

    /// Per-player RNG stream for the current update, derived by hashing
    /// (seed, player, update_index).
    std::mt19937_64& player_rng(PlayerId p) {
        if (!rngs_[p])
            rngs_[p].emplace(derive_seed(cfg_.seed, static_cast<std::uint64_t>(p),
                                         static_cast<std::uint64_t>(update_index_)));
        return *rngs_[p];
    }

    void begin_update() {
        ++update_index_;
        rngs_.assign(cfg_.k, std::nullopt);
        current_ = UpdateStats{};
    }

    const UpdateStats& end_update() {
        metrics_.rounds_per_update.push_back(current_.rounds);
        metrics_.tokens_per_update.push_back(current_.tokens);
        metrics_.spreading_invocations += current_.spreading_invocations;
        metrics_.sampling_attempts += current_.sampling_attempts;
        return current_;
    }

    UpdateStats& current_update() { return current_; }
    const UpdateStats& current_update() const { return current_; }

    // Graph mutations; matching entries on a deleted edge are cleared before
    // any repair protocol runs.
    void apply_insert(VertexId u, VertexId v) { graph_.insert_edge(u, v); }

    /// Removes the edge; returns true when {u,v} was matched (entry cleared).
    bool apply_delete(VertexId u, VertexId v) {
        graph_.remove_edge(u, v);
        if (matching_.has_pair(u, v)) {
            matching_.unmatch(u, v);
            return true;
        }
        return false;
    }

private:
    SimConfig cfg_;
    Partition partition_;
    Graph graph_;
    Matching matching_;
    Metrics metrics_;
    std::vector<std::map<std::string, std::string>> notes_;
    std::vector<std::optional<std::mt19937_64>> rngs_;
    long long round_ = 0;
    long long update_index_ = -1;
    UpdateStats current_;
};

struct Send {
    PlayerId from;
    PlayerId to;
    Token token;
};

/// Runs a batch of direct sends over as many rounds as the per-link budget
/// requires. forced_rounds pins the round count when it must be derived from
/// globally known quantities; the actual token load never exceeds it.
inline std::pair<Inboxes, long long> run_paced(Simulation& sim, const std::vector<Send>& sends,
                                               long long forced_rounds = -1) {
    const int k = sim.players();
    const int beta = sim.config().beta;
    std::vector<std::vector<const Send*>> per_link(static_cast<std::size_t>(k) * k);
    for (const Send& s : sends) per_link[static_cast<std::size_t>(s.from) * k + s.to].push_back(&s);
    long long needed = 0;
    for (const auto& q : per_link)
        needed = std::max(needed, ceil_div(static_cast<long long>(q.size()), beta));
    long long rounds = forced_rounds >= 0 ? forced_rounds : needed;
    if (needed > rounds)
        throw StateCorrupt("paced send exceeds its declared round budget");
    Inboxes all(k);
    std::vector<std::size_t> cursor(per_link.size(), 0);
    for (long long r = 0; r < rounds; ++r) {
        RoundPlan plan(k);
        for (PlayerId i = 0; i < k; ++i)
            for (PlayerId j = 0; j < k; ++j) {
                if (i == j) continue;
                auto& q = per_link[static_cast<std::size_t>(i) * k + j];
                auto& c = cursor[static_cast<std::size_t>(i) * k + j];
                for (int b = 0; b < beta && c < q.size(); ++b, ++c)
                    plan.send(i, j, q[c]->token);
            }
        Inboxes got = sim.run_round(plan);
        for (PlayerId p = 0; p < k; ++p)
            all[p].insert(all[p].end(), got[p].begin(), got[p].end());
    }
    return {std::move(all), rounds};
}

}  // namespace dymatch
