#pragma once

#include <vector>

namespace dymatch {

/// Per-update counters, finalized at end_update().
struct UpdateStats {
    long long rounds = 0;
    long long tokens = 0;
    long long max_link_tokens = 0;
    long long spreading_invocations = 0;
    long long spreading_invocations_phase2 = 0;
    long long proposal_iterations = 0;
    long long sampling_attempts = 0;
    long long minibatches = 0;
    std::vector<long long> minibatch_rounds;
};

struct Metrics {
    long long rounds_total = 0;
    long long tokens_total = 0;
    long long max_link_tokens_per_round = 0;
    long long spreading_invocations = 0;
    long long sampling_attempts = 0;
    std::vector<long long> bits_received_per_player;  // exact: tokens * token_bits
    std::vector<long long> rounds_per_update;
    std::vector<long long> tokens_per_update;

    explicit Metrics(int k) : bits_received_per_player(k, 0) {}
};

}  // namespace dymatch
