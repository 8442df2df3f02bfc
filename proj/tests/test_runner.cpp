#include "dymatch/runner.hpp"

#include <gtest/gtest.h>

#include "dymatch/config.hpp"

namespace dymatch {
namespace {

Simulation make_sim(int n, int k, int beta, std::uint64_t seed = 3) {
    SimConfig c;
    c.n = n;
    c.k = k;
    c.beta = beta;
    c.seed = seed;
    return Simulation(c, Partition::contiguous(n, k));
}

TEST(Config, ParsesFlatKeyValueText) {
    Config cfg = Config::parse("n = 10\nk=2 # players\n\nbeta = 1\nname = trial\n");
    EXPECT_EQ(cfg.require_int("n"), 10);
    EXPECT_EQ(cfg.get_int("k", 0), 2);
    EXPECT_EQ(cfg.get_string("name", ""), "trial");
    EXPECT_EQ(cfg.get_int("missing", 7), 7);
    EXPECT_THROW(cfg.require_int("absent"), ConfigError);
    EXPECT_THROW(Config::parse("just a line\n"), ConfigError);
    EXPECT_THROW(Config::parse("n = ten\n").require_int("n"), ConfigError);
}

TEST(Runner, RecordsCarryRoundAndOracleFields) {
    Simulation sim = make_sim(10, 2, 1);
    Runner runner(sim, Algorithm::fullydyn, VerifyLevel::post);
    UpdateRecord rec = runner.apply(adversary::Update::insert(0, 1));
    EXPECT_EQ(rec.kind, "insert");
    EXPECT_TRUE(rec.oracle_present);
    EXPECT_TRUE(rec.maximal);
    EXPECT_EQ(rec.three_aug_count, 0);
    ASSERT_TRUE(rec.mcm.has_value());
    EXPECT_EQ(*rec.mcm, 1);
    EXPECT_EQ(rec.matching_size, 1);
    nlohmann::json j = rec.to_json();
    EXPECT_EQ(j["oracle"]["mcm"], 1);
}

TEST(Runner, VerifyOffOmitsOracleFields) {
    Simulation sim = make_sim(10, 2, 1);
    Runner runner(sim, Algorithm::fullydyn, VerifyLevel::off);
    UpdateRecord rec = runner.apply(adversary::Update::insert(0, 1));
    EXPECT_FALSE(rec.oracle_present);
    EXPECT_EQ(rec.to_json().count("oracle"), 0u);
}

TEST(Runner, McmSkippedBeyondOracleCap) {
    Simulation sim = make_sim(30, 2, 1);
    Runner runner(sim, Algorithm::fullydyn, VerifyLevel::post, false, 4);
    for (int i = 0; i < 5; ++i) {
        UpdateRecord rec = runner.apply(adversary::Update::insert(2 * i, 2 * i + 1));
        if (i < 4)
            EXPECT_TRUE(rec.mcm.has_value());
        else
            EXPECT_FALSE(rec.mcm.has_value());
    }
}

TEST(Runner, WrongAlgorithmForUpdateKindIsRejected) {
    Simulation sim = make_sim(10, 2, 1);
    Runner fd(sim, Algorithm::fullydyn, VerifyLevel::off);
    EXPECT_THROW(fd.apply(adversary::Update::batch({Edge(0, 1), Edge(2, 3)})), InvalidUpdate);
    Simulation sim2 = make_sim(10, 2, 1);
    Runner bi(sim2, Algorithm::batchinc, VerifyLevel::off);
    bi.apply(adversary::Update::insert(0, 1));  // singles run as one-edge batches
    EXPECT_THROW(bi.apply(adversary::Update::del(0, 1)), InvalidUpdate);
}

TEST(Runner, BrokenMatchingIsCaughtByPostVerification) {
    Simulation sim = make_sim(10, 2, 1);
    Runner runner(sim, Algorithm::fullydyn, VerifyLevel::post);
    runner.apply(adversary::Update::insert(0, 1));
    sim.matching().unmatch(0, 1);  // corrupt the output behind the runner's back
    EXPECT_THROW(runner.apply(adversary::Update::insert(2, 3)), VerifyFailure);
}

TEST(Runner, MemorylessCheckFlagsStashedState) {
    Simulation sim = make_sim(10, 2, 1);
    Runner runner(sim, Algorithm::fullydyn, VerifyLevel::post, true);
    runner.apply(adversary::Update::insert(0, 1));
    sim.notes(1)["leftover"] = "1";
    EXPECT_THROW(runner.apply(adversary::Update::insert(2, 3)), VerifyFailure);
}

}  // namespace
}  // namespace dymatch
