#include "dymatch/sim.hpp"

#include <gtest/gtest.h>

namespace dymatch {
namespace {

SimConfig cfg(int n, int k, int beta, std::uint64_t seed = 1) {
    SimConfig c;
    c.n = n;
    c.k = k;
    c.beta = beta;
    c.seed = seed;
    return c;
}

TEST(SimConfig, RejectsDegenerateParameters) {
    EXPECT_THROW(Simulation(cfg(10, 1, 1), Partition::contiguous(10, 1)), BadConfig);
    EXPECT_THROW(Simulation(cfg(10, 2, 0), Partition::contiguous(10, 2)), BadConfig);
    EXPECT_THROW(Simulation(cfg(1, 2, 1), Partition::contiguous(1, 2)), BadConfig);
}

TEST(SimConfig, DefaultTokenBitsIsCeilOfThreeLogN) {
    EXPECT_EQ(cfg(10, 2, 1).effective_token_bits(), 10);  // ceil(3*log2(10)) = 10
    EXPECT_EQ(cfg(2, 2, 1).effective_token_bits(), 3);
    EXPECT_EQ(cfg(64, 2, 1).effective_token_bits(), 18);
}

TEST(Simulation, FreshInstanceStartsEmptyAtRoundZero) {
    Simulation sim(cfg(10, 2, 1), Partition::contiguous(10, 2));
    EXPECT_EQ(sim.round(), 0);
    EXPECT_EQ(sim.graph().edge_count(), 0);
    EXPECT_EQ(sim.matching().size(), 0);
}

TEST(Simulation, AcceptsSkewedPartitionWithinLogFactor) {
    // bound = ceil(10/2)*ceil(log2 10) = 5*4 = 20 >= 10, so one player may
    // host everything.
    std::vector<PlayerId> owner(10, 1);
    Simulation sim(cfg(10, 2, 1), Partition::from_owner(owner, 2));
    EXPECT_EQ(sim.partition().hosted[1].size(), 10u);
}

TEST(Simulation, EmptyRoundDeliversNothingAndAdvancesCounter) {
    Simulation sim(cfg(10, 2, 1), Partition::contiguous(10, 2));
    RoundPlan plan(2);
    Inboxes in = sim.run_round(plan);
    EXPECT_TRUE(in[0].empty());
    EXPECT_TRUE(in[1].empty());
    EXPECT_EQ(sim.round(), 1);
}

TEST(Simulation, DeliversTokensGroupedBySender) {
    Simulation sim(cfg(12, 3, 2), Partition::contiguous(12, 3));
    RoundPlan plan(3);
    plan.send(1, 2, Token::make(TokenKind::EdgeRecord, 1, 2));
    plan.send(1, 2, Token::make(TokenKind::EdgeRecord, 3, 4));
    Inboxes in = sim.run_round(plan);
    ASSERT_EQ(in[2].size(), 2u);
    EXPECT_EQ(in[2][0].from, 1);
    EXPECT_EQ(sim.metrics().max_link_tokens_per_round, 2);
}

TEST(Simulation, OverfullLinkThrowsBeforeDelivery) {
    Simulation sim(cfg(12, 3, 2), Partition::contiguous(12, 3));
    RoundPlan plan(3);
    for (int i = 0; i < 3; ++i) plan.send(1, 2, Token::make(TokenKind::ControlRecord, i));
    try {
        sim.run_round(plan);
        FAIL() << "expected LinkOverflow";
    } catch (const LinkOverflow& e) {
        EXPECT_EQ(e.from, 1);
        EXPECT_EQ(e.to, 2);
        EXPECT_EQ(e.count, 3);
    }
    EXPECT_EQ(sim.round(), 0);  // aborted before any effect
}

TEST(Simulation, BitsReceivedAreTokensTimesTokenBits) {
    Simulation sim(cfg(10, 3, 4), Partition::contiguous(10, 3));
    RoundPlan plan(3);
    plan.send(0, 2, Token::make(TokenKind::ControlRecord, 7));
    plan.send(1, 2, Token::make(TokenKind::ControlRecord, 8));
    plan.send(2, 0, Token::make(TokenKind::ControlRecord, 9));
    sim.run_round(plan);
    EXPECT_EQ(sim.metrics().bits_received_per_player[2], 2LL * sim.token_bits());
    EXPECT_EQ(sim.metrics().bits_received_per_player[0], 1LL * sim.token_bits());
    EXPECT_EQ(sim.metrics().bits_received_per_player[1], 0);
}

TEST(Simulation, SnapshotIsStableAcrossIdleRounds) {
    Simulation sim(cfg(10, 2, 1), Partition::contiguous(10, 2));
    sim.apply_insert(0, 7);
    std::string a = sim.snapshot_player_state(1);
    RoundPlan plan(2);
    sim.run_round(plan);
    std::string b = sim.snapshot_player_state(1);
    EXPECT_EQ(a, b);
    EXPECT_NE(a.find("v 7"), std::string::npos);
}

TEST(Simulation, SnapshotReflectsOnlyInputAndOutputUnlessNotesWritten) {
    Simulation sim(cfg(10, 2, 1), Partition::contiguous(10, 2));
    EXPECT_EQ(sim.snapshot_player_state(0), sim.view(0).serialize());
    sim.notes(0)["scratch"] = "x";
    EXPECT_NE(sim.snapshot_player_state(0), sim.view(0).serialize());
}

TEST(Simulation, PlayerRngStreamsAreReproducibleAndPerUpdate) {
    Simulation a(cfg(10, 2, 1, 42), Partition::contiguous(10, 2));
    Simulation b(cfg(10, 2, 1, 42), Partition::contiguous(10, 2));
    a.begin_update();
    b.begin_update();
    EXPECT_EQ(a.player_rng(0)(), b.player_rng(0)());
    EXPECT_NE(a.player_rng(0)(), a.player_rng(1)());
    std::uint64_t first = a.player_rng(0)();
    a.begin_update();
    EXPECT_NE(a.player_rng(0)(), first);  // fresh stream per update index
}

TEST(RunPaced, SplitsLoadAcrossRoundsAtBudget) {
    Simulation sim(cfg(10, 2, 2), Partition::contiguous(10, 2));
    std::vector<Send> sends;
    for (int i = 0; i < 5; ++i)
        sends.push_back({0, 1, Token::make(TokenKind::ControlRecord, i)});
    auto [inboxes, rounds] = run_paced(sim, sends);
    EXPECT_EQ(rounds, 3);  // ceil(5/2)
    EXPECT_EQ(inboxes[1].size(), 5u);
    EXPECT_LE(sim.metrics().max_link_tokens_per_round, 2);
}

}  // namespace
}  // namespace dymatch
