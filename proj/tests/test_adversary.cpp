#include "dymatch/adversary.hpp"

#include <gtest/gtest.h>

#include <sstream>

#include "dymatch/oracle.hpp"
#include "dymatch/runner.hpp"

namespace dymatch {
namespace {

TEST(RandomWorkload, PureIncrementalStreamWhenDeletionsDisabled) {
    std::mt19937_64 rng(1);
    auto seq = adversary::random_workload(rng, 20, 50, 0.0, 1);
    ASSERT_EQ(seq.size(), 50u);
    for (const auto& up : seq) EXPECT_EQ(up.kind, adversary::Update::Kind::Insert);
}

TEST(RandomWorkload, SameSeedSameSequence) {
    std::mt19937_64 a(42), b(42), c(43);
    auto sa = adversary::random_workload(a, 16, 40, 0.3, 3);
    auto sb = adversary::random_workload(b, 16, 40, 0.3, 3);
    auto sc = adversary::random_workload(c, 16, 40, 0.3, 3);
    EXPECT_EQ(adversary::to_jsonl(sa), adversary::to_jsonl(sb));
    EXPECT_NE(adversary::to_jsonl(sa), adversary::to_jsonl(sc));
}

TEST(RandomWorkload, EveryUpdateValidAgainstEvolvingGraph) {
    std::mt19937_64 rng(7);
    auto seq = adversary::random_workload(rng, 30, 10000, 0.45, 4);
    Graph g(30);
    for (const auto& up : seq) {
        ASSERT_NO_THROW(adversary::validate_update(g, up));
        switch (up.kind) {
            case adversary::Update::Kind::Insert:
                g.insert_edge(up.u, up.v);
                break;
            case adversary::Update::Kind::Delete:
                g.remove_edge(up.u, up.v);
                break;
            case adversary::Update::Kind::Batch:
                for (const Edge& e : up.edges) g.insert_edge(e.u, e.v);
                break;
        }
    }
}

TEST(Updates, InvalidOnesAreRejected) {
    Graph g(5);
    g.insert_edge(0, 1);
    EXPECT_THROW(adversary::validate_update(g, adversary::Update::insert(0, 1)), InvalidUpdate);
    EXPECT_THROW(adversary::validate_update(g, adversary::Update::del(2, 3)), InvalidUpdate);
    EXPECT_THROW(adversary::validate_update(g, adversary::Update::insert(2, 2)), InvalidUpdate);
    EXPECT_THROW(
        adversary::validate_update(g, adversary::Update::batch({Edge(1, 2), Edge(2, 1)})),
        InvalidUpdate);
}

TEST(DeleteMatched, AlwaysTargetsTheLowestMatchedEdge) {
    SimConfig c;
    c.n = 8;
    c.k = 2;
    c.beta = 1;
    c.seed = 3;
    Simulation sim(c, Partition::contiguous(8, 2));
    sim.apply_insert(2, 3);
    sim.apply_insert(5, 6);
    sim.matching().match(5, 6);
    sim.matching().match(2, 3);
    adversary::DeleteMatchedStrategy strat(9);
    adversary::Update up = strat.next(sim);
    EXPECT_EQ(up.kind, adversary::Update::Kind::Delete);
    EXPECT_EQ(Edge(up.u, up.v), Edge(2, 3));
}

TEST(Jsonl, RoundTripsAllVariants) {
    std::vector<adversary::Update> seq{
        adversary::Update::insert(1, 2), adversary::Update::del(3, 4),
        adversary::Update::batch({Edge(5, 6), Edge(7, 8)})};
    std::string text = adversary::to_jsonl(seq);
    std::istringstream in(text);
    auto back = adversary::from_jsonl(in);
    EXPECT_EQ(adversary::to_jsonl(back), text);
}

TEST(LowerBound, DimensionsAreChecked) {
    std::mt19937_64 rng(5);
    EXPECT_THROW(adversary::build_lb_instance(12, 4, 1, rng), BadDimensions);  // 5 does not divide
    EXPECT_THROW(adversary::build_lb_instance(10, 3, 1, rng), BadDimensions);  // 3 does not divide 2
    EXPECT_THROW(adversary::build_lb_instance(40, 2, 1, rng), BadDimensions);  // k=2 impossible
    EXPECT_THROW(adversary::build_lb_instance(40, 4, 3, rng), BadDimensions);  // ell > n/(5k)
    EXPECT_NO_THROW(adversary::build_lb_instance(40, 4, 2, rng));
}

TEST(LowerBound, ConstructionMeetsItsInvariants) {
    std::mt19937_64 rng(11);
    adversary::LBInstance lb = adversary::build_lb_instance(40, 4, 2, rng);
    EXPECT_EQ(lb.q, 8);
    EXPECT_NO_THROW(validate_partition(lb.partition, 40, 4));
    // every player hosts exactly n/k vertices; designated player holds
    // n/(5k) = 2 middle vertices
    for (const auto& h : lb.partition.hosted) EXPECT_EQ(h.size(), 10u);
    EXPECT_GE(lb.middle_segments.size(), 2u);
    EXPECT_EQ(lb.challenge_segments.size(), 2u);
    for (int seg : lb.challenge_segments) {
        EXPECT_EQ(lb.partition.owner[lb.v(seg)], lb.designated);
        // at most one of u,v,w per player
        PlayerId ou = lb.partition.owner[lb.u(seg)];
        PlayerId ov = lb.partition.owner[lb.v(seg)];
        PlayerId ow = lb.partition.owner[lb.w(seg)];
        EXPECT_NE(ou, ov);
        EXPECT_NE(ov, ow);
        EXPECT_NE(ou, ow);
    }
    EXPECT_EQ(lb.setup_updates.size(), 2u * 8u);
}

TEST(LowerBound, ForcedZeroBitsChallengeInsertsHeadEdges) {
    std::mt19937_64 rng(13);
    adversary::LBInstance lb =
        adversary::build_lb_instance(40, 4, 2, rng, adversary::GammaMode::AllZeros);
    ASSERT_EQ(lb.challenge.kind, adversary::Update::Kind::Batch);
    ASSERT_EQ(lb.challenge.edges.size(), 2u);
    for (int idx = 0; idx < lb.ell; ++idx) {
        int seg = lb.challenge_segments[idx];
        EXPECT_EQ(lb.challenge.edges[idx], Edge(lb.t(seg), lb.u(seg)));
    }
}

TEST(LowerBound, SetupLeavesMaximumMatchingOnSegments) {
    std::mt19937_64 rng(17);
    adversary::LBInstance lb = adversary::build_lb_instance(40, 4, 2, rng);
    SimConfig c;
    c.n = 40;
    c.k = 4;
    c.beta = 1;
    c.seed = 21;
    Simulation sim(c, lb.partition);
    Runner runner(sim, Algorithm::fullydyn, VerifyLevel::post);
    for (const auto& up : lb.setup_updates) runner.apply(up);
    // each segment is a two-edge path: any maximal matching is maximum here
    EXPECT_EQ(sim.matching().size(), 8);
    EXPECT_EQ(oracle::blossom_max_matching(sim.graph()), 8);
    for (int i = 0; i < lb.q; ++i) EXPECT_TRUE(sim.matching().has_pair(lb.u(i), lb.v(i)));
}

TEST(LowerBound, ChallengeForcesTheStatusFlip) {
    for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
        std::mt19937_64 rng(seed);
        adversary::LBInstance lb = adversary::build_lb_instance(40, 4, 2, rng);
        SimConfig c;
        c.n = 40;
        c.k = 4;
        c.beta = 1;
        c.seed = seed;
        Simulation sim(c, lb.partition);
        Runner setup(sim, Algorithm::fullydyn, VerifyLevel::post);
        for (const auto& up : lb.setup_updates) setup.apply(up);
        long long bits_before = sim.metrics().bits_received_per_player[lb.designated];

        Runner challenge(sim, Algorithm::batchinc, VerifyLevel::post);
        if (lb.ell > 0) challenge.apply(lb.challenge);

        for (int idx = 0; idx < lb.ell; ++idx) {
            int seg = lb.challenge_segments[idx];
            if (lb.gamma[idx] == 0) {
                EXPECT_FALSE(sim.matching().has_pair(lb.u(seg), lb.v(seg)));
                EXPECT_TRUE(sim.matching().has_pair(lb.v(seg), lb.w(seg)));
                EXPECT_TRUE(sim.matching().has_pair(lb.t(seg), lb.u(seg)));
            } else {
                EXPECT_TRUE(sim.matching().has_pair(lb.u(seg), lb.v(seg)));
                EXPECT_TRUE(sim.matching().has_pair(lb.w(seg), lb.x(seg)));
            }
        }
        long long bits_to_p =
            sim.metrics().bits_received_per_player[lb.designated] - bits_before;
        EXPECT_GE(bits_to_p, lb.ell);
    }
}

}  // namespace
}  // namespace dymatch
