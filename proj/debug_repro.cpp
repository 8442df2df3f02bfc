#include <iostream>

#include "dymatch/adversary.hpp"
#include "dymatch/batchinc.hpp"
#include "dymatch/oracle.hpp"

using namespace dymatch;

struct Gate : batchinc::PhaseObserver {
    bool verbose = false;
    void check(const Simulation& sim, const PhaseContext& ctx, const std::string& tag) {
        oracle::PhaseReport rep =
            oracle::check_phase_invariants(ctx, sim.graph(), sim.matching(), tag);
        if (!rep.all_pass()) {
            std::cout << "=== FAILURE at " << tag << "\n" << rep.failures();
            std::cout << "batch:";
            for (auto& e : ctx.batch) std::cout << " {" << e.u << "," << e.v << "}";
            std::cout << "\nactive:";
            for (auto& e : ctx.active) std::cout << " {" << e.u << "," << e.v << "}";
            std::cout << "\nm0:";
            for (std::size_t v = 0; v < ctx.m0.size(); ++v)
                if (ctx.m0[v] != kNoVertex) std::cout << " " << v << "-" << ctx.m0[v];
            std::cout << "\nm1:";
            for (std::size_t v = 0; v < ctx.m1.size(); ++v)
                if (ctx.m1[v] != kNoVertex) std::cout << " " << v << "-" << ctx.m1[v];
            std::cout << "\nG1:";
            for (auto& e : ctx.G1_edges) std::cout << " {" << e.u << "," << e.v << "}";
            std::cout << "\nI:";
            for (auto& [w, u] : ctx.I_edges) std::cout << " (" << w << "," << u << ")";
            std::cout << "\nW:";
            for (auto v : ctx.W) std::cout << " " << v;
            std::cout << " U:";
            for (auto v : ctx.U) std::cout << " " << v;
            std::cout << " V:";
            for (auto v : ctx.V) std::cout << " " << v;
            std::cout << " X:";
            for (auto v : ctx.X) std::cout << " " << v;
            std::cout << "\ngraph edges:";
            for (auto& e : sim.graph().edges()) std::cout << " {" << e.u << "," << e.v << "}";
            std::cout << "\ncur matching:";
            for (auto& e : sim.matching().edges()) std::cout << " {" << e.u << "," << e.v << "}";
            std::cout << "\n";
            throw VerifyFailure("stop");
        }
    }
    void after_phase1(const Simulation& s, const PhaseContext& c) override { check(s, c, "phase1"); }
    void after_important_sets(const Simulation& s, const PhaseContext& c) override {
        check(s, c, "phase2_start");
    }
    void after_phase2(const Simulation& s, const PhaseContext& c) override { check(s, c, "phase2"); }
    void after_phase3(const Simulation& s, const PhaseContext& c) override { check(s, c, "phase3"); }
};

int main() {
    std::mt19937_64 rng(1234);
    for (int seq = 0; seq < 120; ++seq) {
        int n = std::uniform_int_distribution<int>(6, 24)(rng);
        int k = std::uniform_int_distribution<int>(2, 4)(rng);
        int beta = std::uniform_int_distribution<int>(1, 4)(rng);
        SimConfig c;
        c.n = n;
        c.k = std::min(k, n);
        c.beta = beta;
        c.seed = rng();
        Simulation sim(c, Partition::round_robin(n, c.k));
        Gate gate;
        int b = batchinc::minibatch_size(c.k, beta);
        for (int step = 0; step < 8; ++step) {
            int ell = std::uniform_int_distribution<int>(1, 3 * b + 1)(rng);
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
            try {
                batchinc::process_batch(sim, edges, &gate);
            } catch (const VerifyFailure&) {
                std::cout << "seq=" << seq << " step=" << step << " n=" << n << " k=" << c.k
                          << " beta=" << beta << "\n";
                return 1;
            }
            sim.end_update();
            auto paths = oracle::find_3aug_paths(sim.graph(), sim.matching());
            if (!paths.empty()) {
                std::cout << "residual path after batch: (" << paths[0].a << "," << paths[0].b
                          << "," << paths[0].c << "," << paths[0].d << ") seq=" << seq
                          << " step=" << step << "\n";
                return 1;
            }
        }
    }
    std::cout << "no failure\n";
    return 0;
}
