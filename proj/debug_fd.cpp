#include <iostream>
#include <memory>

#include "dymatch/adversary.hpp"
#include "dymatch/oracle.hpp"
#include "dymatch/runner.hpp"

using namespace dymatch;

int main() {
    const int ks[] = {2, 4, 8};
    const int betas[] = {1, 4};
    const int ns[] = {12, 24, 40, 60};
    for (int s = 0; s < 500; ++s) {
        int k = ks[s % 3], beta = betas[s % 2], n = ns[s % 4];
        SimConfig cfg;
        cfg.n = n;
        cfg.k = k;
        cfg.beta = beta;
        cfg.seed = 1000 + s;
        Simulation sim(cfg, Partition::round_robin(n, k));
        Runner runner(sim, Algorithm::fullydyn, VerifyLevel::post, true, 24);
        std::unique_ptr<adversary::Strategy> strat;
        if (s % 5 < 3)
            strat = std::make_unique<adversary::RandomStrategy>(derive_seed(77, s, 0), 0.35, 1);
        else
            strat = std::make_unique<adversary::DeleteMatchedStrategy>(derive_seed(78, s, 0));
        std::vector<adversary::Update> history;
        for (int i = 0; i < 100; ++i) {
            adversary::Update up = strat->next(sim);
            std::string pre_graph = to_edge_list(sim.graph(), sim.matching());
            history.push_back(up);
            try {
                runner.apply(up);
            } catch (const std::exception& e) {
                std::cout << "seq=" << s << " update=" << i << " n=" << n << " k=" << k
                          << " beta=" << beta << "\n"
                          << e.what() << "\n";
                std::cout << "update: " << adversary::to_json(up).dump() << "\n";
                std::cout << "pre-state edge list (M = matched):\n" << pre_graph;
                std::cout << "post graph:\n" << to_edge_list(sim.graph(), sim.matching());
                return 1;
            }
        }
    }
    std::cout << "no failure\n";
    return 0;
}
