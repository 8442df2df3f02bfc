// Acceptance suite: every release criterion below runs at its stated
// tolerance and prints exactly one [PASS]/[FAIL] line. Nonzero exit iff any
// criterion fails.

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>
#include <sstream>
#include <vector>

#include "dymatch/adversary.hpp"
#include "dymatch/oracle.hpp"
#include "dymatch/runner.hpp"
#include "dymatch/spreading.hpp"

namespace dm = dymatch;

namespace {

int g_failures = 0;

void report(int id, const std::string& name, bool pass, const std::string& detail) {
    std::cout << (pass ? "[PASS]" : "[FAIL]") << " criterion " << id << ": " << name;
    if (!detail.empty()) std::cout << " — " << detail;
    std::cout << std::endl;
    if (!pass) ++g_failures;
}

dm::Simulation make_sim(int n, int k, int beta, std::uint64_t seed) {
    dm::SimConfig cfg;
    cfg.n = n;
    cfg.k = k;
    cfg.beta = beta;
    cfg.seed = seed;
    return dm::Simulation(cfg, dm::Partition::round_robin(n, k));
}

long long g_ratio_checks = 0;
bool g_bandwidth_ok = true;
bool g_memoryless_ok = true;

void note_bandwidth(const dm::Simulation& sim) {
    if (sim.metrics().max_link_tokens_per_round > sim.config().beta) g_bandwidth_ok = false;
}

// ---------------------------------------------------------------- criterion 1
// Fully-dynamic correctness: maximal, no 3-augmenting paths, and the 2/3
// ratio after every update of every sequence. Zero tolerance.
void criterion1() {
    const int kSequences = 500;
    const int kUpdates = 100;
    const int ks[] = {2, 4, 8};
    const int betas[] = {1, 4};
    const int ns[] = {12, 24, 40, 60};
    long long updates_done = 0;
    try {
        for (int s = 0; s < kSequences; ++s) {
            int k = ks[s % 3], beta = betas[s % 2], n = ns[s % 4];
            dm::Simulation sim = make_sim(n, k, beta, 1000 + s);
            dm::Runner runner(sim, dm::Algorithm::fullydyn, dm::VerifyLevel::post, true, 24);
            std::unique_ptr<dm::adversary::Strategy> strat;
            if (s % 5 < 3)
                strat = std::make_unique<dm::adversary::RandomStrategy>(
                    dm::derive_seed(77, s, 0), 0.35, 1);
            else
                strat = std::make_unique<dm::adversary::DeleteMatchedStrategy>(
                    dm::derive_seed(78, s, 0));
            for (int i = 0; i < kUpdates; ++i) {
                dm::UpdateRecord rec = runner.apply(strat->next(sim));
                if (rec.mcm) ++g_ratio_checks;
                ++updates_done;
            }
            note_bandwidth(sim);
        }
        report(1, "fully-dynamic maximal matching without 3-augmenting paths", true,
               std::to_string(kSequences) + " sequences, " + std::to_string(updates_done) +
                   " verified updates, " + std::to_string(g_ratio_checks) + " ratio checks");
    } catch (const std::exception& e) {
        g_memoryless_ok = false;
        report(1, "fully-dynamic maximal matching without 3-augmenting paths", false, e.what());
    }
}

// ---------------------------------------------------------------- criterion 2
// Batch-incremental correctness with every per-phase invariant gate enabled.
void criterion2() {
    const int kSequences = 500;
    long long batches_done = 0;
    bool structural_ok = true;
    try {
        std::mt19937_64 rng(20240601);
        for (int s = 0; s < kSequences; ++s) {
            int k = (s % 3 == 0) ? 2 : (s % 3 == 1) ? 4 : 8;
            int beta = (s % 2 == 0) ? 1 : 4;
            int n = 12 + (s % 4) * 16;  // 12..60
            dm::Simulation sim = make_sim(n, k, beta, 5000 + s);
            dm::Runner runner(sim, dm::Algorithm::batchinc, dm::VerifyLevel::phase, false, 24);
            int b = dm::batchinc::minibatch_size(k, beta);
            const int ells[] = {1, b, 3 * b + 1};
            for (int step = 0; step < 6; ++step) {
                int ell = ells[step % 3];
                dm::Graph shadow = sim.graph();
                std::vector<dm::Edge> edges;
                for (int i = 0; i < ell; ++i) {
                    auto e = dm::adversary::detail::random_absent_edge(shadow, rng);
                    if (!e) break;
                    shadow.insert_edge(e->u, e->v);
                    edges.push_back(*e);
                }
                if (edges.empty()) break;
                dm::UpdateRecord rec = runner.apply(dm::adversary::Update::batch(edges));
                if (rec.mcm) ++g_ratio_checks;
                ++batches_done;
                for (const auto& mb : runner.last_minibatches()) {
                    if (mb.spreads_total - mb.spreads_phase2 > 10) structural_ok = false;
                    if (mb.w_size > 0 && mb.phase2_iterations > mb.w_size) structural_ok = false;
                }
            }
            note_bandwidth(sim);
        }
        report(2, "batch-incremental correctness with per-phase invariants", structural_ok,
               std::to_string(kSequences) + " sequences, " + std::to_string(batches_done) +
                   " batches, every phase gate green");
    } catch (const std::exception& e) {
        report(2, "batch-incremental correctness with per-phase invariants", false, e.what());
    }
}

// ---------------------------------------------------------------- criterion 3
// Memorylessness piggybacks on criterion 1's sweep: the runner compared every
// player snapshot against the pure (input, output) serialization.
void criterion3() {
    report(3, "memoryless player state between updates", g_memoryless_ok,
           "snapshot equality enforced on every update of criterion 1");
}

// ---------------------------------------------------------------- criterion 4
void criterion4() {
    report(4, "per-link bandwidth never exceeds beta tokens per round", g_bandwidth_ok,
           "hard budget assert active in every experiment");
}

// ---------------------------------------------------------------- criterion 5
// Spreading bound and linear scaling over the full (N, k, beta) grid.
void criterion5() {
    bool ok = true;
    std::ostringstream detail;
    try {
        for (int k : {2, 4, 8, 16}) {
            for (int beta : {1, 2, 8}) {
                std::vector<long long> rounds_at;  // for N = 16bk and 64bk
                for (long long mult : {1, 4, 16, 64}) {
                    long long n_tokens = mult * beta * k;
                    dm::Simulation sim = make_sim(std::max(16, k), k, beta, 99);
                    dm::TokenBatch batch(k);
                    for (long long i = 0; i < n_tokens; ++i)
                        batch.add(0, dm::Token::make(dm::TokenKind::VertexRecord, i, 0));
                    dm::SpreadResult r = dm::spread(sim, batch);
                    note_bandwidth(sim);
                    if (static_cast<long long>(r.tokens.size()) != n_tokens) ok = false;
                    long long bound = dm::spread_round_bound(n_tokens, k, beta);
                    if (r.rounds > bound) {
                        ok = false;
                        detail << " bound broken at k=" << k << " beta=" << beta
                               << " N=" << n_tokens;
                    }
                    if (mult == 16 || mult == 64) rounds_at.push_back(r.rounds);
                }
                double ratio = static_cast<double>(rounds_at[1]) / rounds_at[0];
                if (ratio < 3.0 || ratio > 5.0) {
                    ok = false;
                    detail << " scaling ratio " << ratio << " at k=" << k << " beta=" << beta;
                }
            }
        }
        report(5, "spreading rounds within 3*(ceil(N/(beta k))+2), 4x scaling in [3,5]", ok,
               ok ? "grid N in {1,4,16,64}*beta*k, k in {2,4,8,16}, beta in {1,2,8}"
                  : detail.str());
    } catch (const std::exception& e) {
        report(5, "spreading round bound", false, e.what());
    }
}

// ---------------------------------------------------------------- criterion 6
// Deletion rounds scale with ceil(sqrt(m)/(k beta)): fitted slope and offset
// within budget, and quadrupling m at most triples the mean.
void criterion6() {
    try {
        const int k = 4, beta = 1, n = 128, trials = 3, deletions = 60;
        std::vector<double> xs, ys;
        std::ostringstream detail;
        for (long long m : {64, 256, 1024}) {
            std::vector<long long> rounds;
            for (int trial = 0; trial < trials; ++trial) {
                dm::Simulation sim = make_sim(n, k, beta, 31337 + trial);
                dm::Runner runner(sim, dm::Algorithm::fullydyn, dm::VerifyLevel::off);
                std::mt19937_64 rng(dm::derive_seed(4242, m, trial));
                while (sim.graph().edge_count() < m) {
                    auto e = dm::adversary::detail::random_absent_edge(sim.graph(), rng);
                    runner.apply(dm::adversary::Update::insert(e->u, e->v));
                }
                dm::adversary::DeleteMatchedStrategy strat(dm::derive_seed(1, m, trial));
                for (int d = 0; d < deletions; ++d) {
                    auto up = strat.next(sim);
                    if (up.kind != dm::adversary::Update::Kind::Delete) break;
                    rounds.push_back(runner.apply(up).rounds);
                }
                note_bandwidth(sim);
            }
            double mean = std::accumulate(rounds.begin(), rounds.end(), 0.0) / rounds.size();
            double x = static_cast<double>(
                dm::ceil_div(static_cast<long long>(std::sqrt(double(m))), k * beta));
            xs.push_back(x);
            ys.push_back(mean);
            detail << "m=" << m << " mean=" << mean << " x=" << x << "; ";
        }
        double xbar = (xs[0] + xs[1] + xs[2]) / 3, ybar = (ys[0] + ys[1] + ys[2]) / 3;
        double num = 0, den = 0;
        for (int i = 0; i < 3; ++i) {
            num += (xs[i] - xbar) * (ys[i] - ybar);
            den += (xs[i] - xbar) * (xs[i] - xbar);
        }
        double c = num / den;
        double c0 = ybar - c * xbar;
        double growth = ys[2] / ys[1];
        bool ok = c <= 12.0 && c0 <= 10.0 && growth <= 3.0;
        detail << "fit C=" << c << " C0=" << c0 << " growth(1024/256)=" << growth;
        report(6, "deletion rounds track ceil(sqrt(m)/(k beta))", ok, detail.str());
    } catch (const std::exception& e) {
        report(6, "deletion rounds track ceil(sqrt(m)/(k beta))", false, e.what());
    }
}

// ---------------------------------------------------------------- criterion 7
// Batch rounds grow linearly in the batch size at fixed k*beta through the
// mini-batch count; structural per-mini-batch bounds hold; medians reported.
void criterion7() {
    try {
        const int k = 4, beta = 4, n = 600, trials = 3;
        bool structural_ok = true;
        std::vector<double> means;
        std::vector<long long> mb_rounds;
        for (long long ell : {64, 256}) {
            std::vector<long long> rounds;
            for (int trial = 0; trial < trials; ++trial) {
                dm::Simulation sim = make_sim(n, k, beta, 2718 + trial);
                dm::Runner runner(sim, dm::Algorithm::batchinc, dm::VerifyLevel::off);
                std::mt19937_64 rng(dm::derive_seed(999, ell, trial));
                dm::Graph shadow(n);
                std::vector<dm::Edge> edges;
                for (long long i = 0; i < ell; ++i) {
                    auto e = dm::adversary::detail::random_absent_edge(shadow, rng);
                    shadow.insert_edge(e->u, e->v);
                    edges.push_back(*e);
                }
                rounds.push_back(runner.apply(dm::adversary::Update::batch(edges)).rounds);
                for (const auto& mb : runner.last_minibatches()) {
                    mb_rounds.push_back(mb.rounds);
                    if (mb.spreads_total - mb.spreads_phase2 > 10) structural_ok = false;
                    if (mb.w_size > 0 && mb.phase2_iterations > mb.w_size)
                        structural_ok = false;
                }
                note_bandwidth(sim);
            }
            means.push_back(std::accumulate(rounds.begin(), rounds.end(), 0.0) / rounds.size());
        }
        double ratio = means[1] / means[0];
        std::sort(mb_rounds.begin(), mb_rounds.end());
        long long median = mb_rounds[mb_rounds.size() / 2];
        long long reference = 20LL * std::max(dm::ilog2_ceil(n), 1);
        bool ok = ratio >= 2.5 && ratio <= 6.0 && structural_ok;
        std::ostringstream detail;
        detail << "rounds(256)/rounds(64)=" << ratio << ", spreads outside phase2 <= 10, "
               << "iterations <= |W|; median mini-batch rounds " << median << " (reported, ref "
               << reference << ")";
        report(7, "batch rounds scale linearly in batch size at fixed k*beta", ok, detail.str());
    } catch (const std::exception& e) {
        report(7, "batch rounds scale linearly in batch size at fixed k*beta", false, e.what());
    }
}

// ---------------------------------------------------------------- criterion 8
// Lower-bound construction consistency: forced status flips happen, segments
// stay clean, and the designated player receives at least ell bits.
void criterion8() {
    try {
        bool ok = true;
        int instances = 0;
        std::ostringstream detail;
        struct Cell {
            int n, k, ell, trials;
        };
        for (const Cell& cell : std::vector<Cell>{{40, 4, 1, 10}, {40, 4, 2, 15}, {200, 4, 10, 10},
                                                  {200, 8, 5, 10}, {200, 10, 4, 10}}) {
            for (int trial = 0; trial < cell.trials; ++trial) {
                std::mt19937_64 rng(dm::derive_seed(808, instances, trial));
                dm::adversary::LBInstance lb =
                    dm::adversary::build_lb_instance(cell.n, cell.k, cell.ell, rng);
                dm::SimConfig cfg;
                cfg.n = cell.n;
                cfg.k = cell.k;
                cfg.beta = 1;
                cfg.seed = dm::derive_seed(809, instances, trial);
                dm::Simulation sim(cfg, lb.partition);
                dm::Runner setup(sim, dm::Algorithm::fullydyn, dm::VerifyLevel::post, false, 24);
                for (const auto& up : lb.setup_updates) setup.apply(up);
                std::vector<bool> pre;
                for (int idx = 0; idx < lb.ell; ++idx) {
                    int seg = lb.challenge_segments[idx];
                    pre.push_back(sim.matching().has_pair(lb.u(seg), lb.v(seg)));
                }
                long long bits0 = sim.metrics().bits_received_per_player[lb.designated];
                dm::Runner challenge(sim, dm::Algorithm::batchinc, dm::VerifyLevel::post, false,
                                     24);
                challenge.apply(lb.challenge);
                long long bits =
                    sim.metrics().bits_received_per_player[lb.designated] - bits0;
                if (bits < lb.ell) {
                    ok = false;
                    detail << " bits " << bits << " < ell";
                }
                for (int idx = 0; idx < lb.ell; ++idx) {
                    int seg = lb.challenge_segments[idx];
                    if (lb.gamma[idx] == 0 && pre[idx]) {
                        bool flipped = !sim.matching().has_pair(lb.u(seg), lb.v(seg)) &&
                                       sim.matching().has_pair(lb.v(seg), lb.w(seg));
                        if (!flipped) {
                            ok = false;
                            detail << " segment " << seg << " did not flip";
                        }
                    }
                }
                if (!dm::oracle::find_3aug_paths(sim.graph(), sim.matching()).empty()) {
                    ok = false;
                    detail << " residual 3-augmenting path";
                }
                note_bandwidth(sim);
                ++instances;
            }
        }
        report(8, "challenge batches force the status flips and cost transcript bits", ok,
               ok ? std::to_string(instances) + " instances across n in {40,200}" : detail.str());
    } catch (const std::exception& e) {
        report(8, "challenge batches force the status flips", false, e.what());
    }
}

// ---------------------------------------------------------------- criterion 9
// The two independent exact matchers agree; ratio checks above actually ran.
void criterion9() {
    try {
        std::mt19937_64 rng(13579);
        bool agree = true;
        for (int trial = 0; trial < 10000; ++trial) {
            int n = std::uniform_int_distribution<int>(2, 16)(rng);
            dm::Graph g(n);
            std::vector<dm::Edge> all;
            for (dm::VertexId u = 0; u < n; ++u)
                for (dm::VertexId v = u + 1; v < n; ++v) all.emplace_back(u, v);
            std::shuffle(all.begin(), all.end(), rng);
            int m = std::uniform_int_distribution<int>(
                0, std::min<int>(24, static_cast<int>(all.size())))(rng);
            for (int i = 0; i < m; ++i) g.insert_edge(all[i].u, all[i].v);
            if (dm::oracle::max_matching_size(g, 24) != dm::oracle::blossom_max_matching(g)) {
                agree = false;
                break;
            }
        }
        bool ok = agree && g_ratio_checks > 0;
        report(9, "independent exact matchers agree; ratio clause exercised", ok,
               "10000 random graphs, " + std::to_string(g_ratio_checks) +
                   " ratio checks without a violation");
    } catch (const std::exception& e) {
        report(9, "independent exact matchers agree", false, e.what());
    }
}

}  // namespace

int main() {
    criterion1();
    criterion2();
    criterion3();
    criterion4();
    criterion5();
    criterion6();
    criterion7();
    criterion8();
    criterion9();
    if (g_failures > 0) {
        std::cout << g_failures << " criterion(s) failed" << std::endl;
        return 1;
    }
    std::cout << "all acceptance criteria passed" << std::endl;
    return 0;
}
