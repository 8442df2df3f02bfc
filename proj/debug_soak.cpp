// Extended randomized soak across both algorithms, far past the acceptance
// sweep sizes. Not part of the test suite; used to gain confidence in the
// zero-tolerance gates.
#include <iostream>
#include <memory>

#include "dymatch/adversary.hpp"
#include "dymatch/oracle.hpp"
#include "dymatch/runner.hpp"

using namespace dymatch;

struct Gate : batchinc::PhaseObserver {
    void check(const Simulation& sim, const PhaseContext& ctx, const std::string& tag) {
        oracle::PhaseReport rep =
            oracle::check_phase_invariants(ctx, sim.graph(), sim.matching(), tag);
        if (!rep.all_pass()) {
            std::cout << "=== " << tag << "\n" << rep.failures();
            std::cout << "batch:";
            for (auto& e : ctx.batch) std::cout << " {" << e.u << "," << e.v << "}";
            std::cout << "\nm0:";
            for (std::size_t v = 0; v < ctx.m0.size(); ++v)
                if (ctx.m0[v] != kNoVertex && ctx.m0[v] > (VertexId)v)
                    std::cout << " {" << v << "," << ctx.m0[v] << "}";
            std::cout << "\nm1:";
            for (std::size_t v = 0; v < ctx.m1.size(); ++v)
                if (ctx.m1[v] != kNoVertex && ctx.m1[v] > (VertexId)v)
                    std::cout << " {" << v << "," << ctx.m1[v] << "}";
            std::cout << "\nG1:";
            for (auto& e : ctx.G1_edges) std::cout << " {" << e.u << "," << e.v << "}";
            std::cout << "\nI:";
            for (auto& [w, u] : ctx.I_edges) std::cout << " (" << w << "," << u << ")";
            std::cout << "\nM_XW:";
            for (auto& [x, w] : ctx.M_XW) std::cout << " (" << x << "," << w << ")";
            std::cout << "\nW:";
            for (auto v : ctx.W) std::cout << " " << v;
            std::cout << " U:";
            for (auto v : ctx.U) std::cout << " " << v;
            std::cout << " V:";
            for (auto v : ctx.V) std::cout << " " << v;
            std::cout << " X:";
            for (auto v : ctx.X) std::cout << " " << v;
            std::cout << " X':";
            for (auto v : ctx.X_prime) std::cout << " " << v;
            std::cout << "\nrequery trips: " << ctx.phase3_requery_trips;
            std::cout << "\ngraph:";
            for (auto& e : sim.graph().edges()) std::cout << " {" << e.u << "," << e.v << "}";
            std::cout << "\ncur M:";
            for (auto& e : sim.matching().edges()) std::cout << " {" << e.u << "," << e.v << "}";
            std::cout << "\n";
            throw VerifyFailure(tag + ":\n" + rep.failures());
        }
    }
    void after_phase1(const Simulation& s, const PhaseContext& c) override { check(s, c, "phase1"); }
    void after_important_sets(const Simulation& s, const PhaseContext& c) override {
        check(s, c, "phase2_start");
    }
    void after_phase2(const Simulation& s, const PhaseContext& c) override { check(s, c, "phase2"); }
    void after_phase3(const Simulation& s, const PhaseContext& c) override { check(s, c, "phase3"); }
};

int main(int argc, char** argv) {
    long long fd_sequences = argc > 1 ? std::atoll(argv[1]) : 3000;
    long long bi_sequences = argc > 2 ? std::atoll(argv[2]) : 3000;
    std::mt19937_64 master(777777);

    for (long long s = 0; s < fd_sequences; ++s) {
        int n = std::uniform_int_distribution<int>(6, 60)(master);
        int k = std::min(n, std::uniform_int_distribution<int>(2, 8)(master));
        int beta = std::uniform_int_distribution<int>(1, 8)(master);
        double pd = std::uniform_real_distribution<double>(0.15, 0.8)(master);
        SimConfig cfg;
        cfg.n = n;
        cfg.k = k;
        cfg.beta = beta;
        cfg.seed = master();
        bool rrobin = master() & 1;
        Simulation sim(cfg, rrobin ? Partition::round_robin(n, k) : Partition::contiguous(n, k));
        Runner runner(sim, Algorithm::fullydyn, VerifyLevel::post, true, 24);
        std::unique_ptr<adversary::Strategy> strat;
        if (s % 4 == 3)
            strat = std::make_unique<adversary::DeleteMatchedStrategy>(master());
        else
            strat = std::make_unique<adversary::RandomStrategy>(master(), pd, 1);
        try {
            for (int i = 0; i < 100; ++i) runner.apply(strat->next(sim));
        } catch (const std::exception& e) {
            std::cout << "FD FAIL s=" << s << " n=" << n << " k=" << k << " beta=" << beta
                      << ": " << e.what() << "\n";
            return 1;
        }
        if ((s + 1) % 500 == 0) std::cout << "fd " << (s + 1) << std::endl;
    }

    for (long long s = 0; s < bi_sequences; ++s) {
        int n = std::uniform_int_distribution<int>(6, 60)(master);
        int k = std::min(n, std::uniform_int_distribution<int>(2, 8)(master));
        int beta = std::uniform_int_distribution<int>(1, 8)(master);
        SimConfig cfg;
        cfg.n = n;
        cfg.k = k;
        cfg.beta = beta;
        cfg.seed = master();
        bool rrobin = master() & 1;
        Simulation sim(cfg, rrobin ? Partition::round_robin(n, k) : Partition::contiguous(n, k));
        Gate gate;
        std::mt19937_64 rng(master());
        int b = batchinc::minibatch_size(k, beta);
        try {
            // optionally warm up with single-edge inserts through the other
            // algorithm so batches hit structured matchings
            if (s % 3 == 0) {
                Runner warm(sim, Algorithm::fullydyn, VerifyLevel::post);
                adversary::RandomStrategy ws(master(), 0.2, 1);
                for (int i = 0; i < 15; ++i) warm.apply(ws.next(sim));
            }
            for (int step = 0; step < 8; ++step) {
                int ell = std::uniform_int_distribution<int>(1, 3 * b + 1)(master);
                Graph shadow = sim.graph();
                std::vector<Edge> edges;
                for (int i = 0; i < ell; ++i) {
                    auto e = adversary::detail::random_absent_edge(shadow, rng);
                    if (!e) break;
                    shadow.insert_edge(e->u, e->v);
                    edges.push_back(*e);
                }
                if (edges.empty()) break;
                sim.begin_update();
                batchinc::process_batch(sim, edges, &gate);
                sim.end_update();
                if (!oracle::is_maximal(sim.graph(), sim.matching()))
                    throw VerifyFailure("not maximal");
                if (!oracle::find_3aug_paths(sim.graph(), sim.matching()).empty())
                    throw VerifyFailure("3-aug path");
                if (sim.graph().edge_count() <= 24 &&
                    !oracle::ratio_ok(sim.matching().size(),
                                      oracle::max_matching_size(sim.graph())))
                    throw VerifyFailure("ratio");
                if (sim.metrics().max_link_tokens_per_round > beta)
                    throw VerifyFailure("bandwidth");
            }
        } catch (const std::exception& e) {
            std::cout << "BI FAIL s=" << s << " n=" << n << " k=" << k << " beta=" << beta
                      << ": " << e.what() << "\n";
            return 1;
        }
        if ((s + 1) % 500 == 0) std::cout << "bi " << (s + 1) << std::endl;
    }
    std::cout << "soak clean\n";
    return 0;
}
