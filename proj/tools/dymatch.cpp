#include <algorithm>
#include <fstream>
#include <iostream>
#include <memory>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "dymatch/adversary.hpp"
#include "dymatch/config.hpp"
#include "dymatch/oracle.hpp"
#include "dymatch/runner.hpp"

namespace dm = dymatch;

namespace {

std::unique_ptr<std::ofstream> file_sink;

std::ostream& open_out(const std::string& path) {
    if (path.empty() || path == "-") return std::cout;
    file_sink = std::make_unique<std::ofstream>(path);
    if (!*file_sink) throw dm::ConfigError("cannot open output file '" + path + "'");
    return *file_sink;
}

dm::Simulation make_sim(int n, int k, int beta, std::uint64_t seed) {
    dm::SimConfig cfg;
    cfg.n = n;
    cfg.k = k;
    cfg.beta = beta;
    cfg.seed = seed;
    return dm::Simulation(cfg, dm::Partition::contiguous(n, k));
}

std::unique_ptr<dm::adversary::Strategy> make_strategy(const std::string& name,
                                                       std::uint64_t seed, double p_delete,
                                                       int max_batch) {
    if (name == "random")
        return std::make_unique<dm::adversary::RandomStrategy>(
            dm::derive_seed(seed, 0xad, 1), p_delete, max_batch);
    if (name == "delete-matched")
        return std::make_unique<dm::adversary::DeleteMatchedStrategy>(
            dm::derive_seed(seed, 0xad, 2));
    throw dm::ConfigError("unknown adversary '" + name + "'");
}

int cmd_run(const std::string& config_path, long long seed_override, std::string verify_override,
            const std::string& out_path) {
    dm::Config cfg = dm::Config::parse_file(config_path);
    int n = static_cast<int>(cfg.require_int("n"));
    int k = static_cast<int>(cfg.get_int("k", 2));
    int beta = static_cast<int>(cfg.get_int("beta", 1));
    std::uint64_t seed = seed_override >= 0 ? static_cast<std::uint64_t>(seed_override)
                                            : static_cast<std::uint64_t>(cfg.get_int("seed", 1));
    dm::Algorithm algo = dm::algorithm_from_string(cfg.get_string("algorithm", "fullydyn"));
    std::string verify_name =
        verify_override.empty() ? cfg.get_string("verify", "post") : verify_override;
    dm::VerifyLevel verify = dm::verify_from_string(verify_name);
    int updates = static_cast<int>(cfg.get_int("updates", 100));
    double p_delete = cfg.get_double("p_delete", 0.3);
    int max_batch = static_cast<int>(cfg.get_int("max_batch", 1));
    std::string adversary_name = cfg.get_string("adversary", "random");
    if (algo == dm::Algorithm::batchinc) p_delete = 0.0;

    dm::Simulation sim = make_sim(n, k, beta, seed);
    dm::Runner runner(sim, algo, verify, algo == dm::Algorithm::fullydyn);
    auto strategy = make_strategy(adversary_name, seed, p_delete, max_batch);
    std::ostream& out = open_out(out_path);
    for (int i = 0; i < updates; ++i) {
        dm::adversary::Update up = strategy->next(sim);
        dm::UpdateRecord rec = runner.apply(up);
        out << rec.to_json().dump() << "\n";
    }
    return 0;
}

std::vector<long long> parse_list(const std::string& csv) {
    std::vector<long long> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(std::stoll(item));
    return out;
}

int cmd_bench(const std::string& algo_name, int n, const std::string& m_list,
              const std::string& l_list, const std::string& k_list, const std::string& beta_list,
              int trials, int deletions, std::uint64_t seed, const std::string& out_path) {
    dm::Algorithm algo = dm::algorithm_from_string(algo_name);
    std::ostream& out = open_out(out_path);
    out << "algorithm,n,k,beta,m,l,updates,mean_rounds,max_rounds,bound,mean_over_bound,"
           "median_minibatch_rounds,max_spreads_outside_p2,max_p2_iter_over_w\n";
    auto ks = parse_list(k_list), betas = parse_list(beta_list);
    auto sizes = parse_list(algo == dm::Algorithm::fullydyn ? m_list : l_list);
    for (long long size : sizes) {
        for (long long k : ks) {
            for (long long beta : betas) {
                std::vector<long long> rounds;
                std::vector<long long> mb_rounds;
                long long max_spreads = 0;
                double max_iter_ratio = 0.0;
                for (int trial = 0; trial < trials; ++trial) {
                    std::uint64_t s = dm::derive_seed(seed, size * 1315423911ull + k * 2654435761ull + beta,
                                                      static_cast<std::uint64_t>(trial));
                    dm::Simulation sim =
                        make_sim(n, static_cast<int>(k), static_cast<int>(beta), s);
                    dm::Runner runner(sim, algo, dm::VerifyLevel::off);
                    std::mt19937_64 rng(dm::derive_seed(s, 0xbe, 0));
                    if (algo == dm::Algorithm::fullydyn) {
                        // Build a graph with `size` edges, then measure a
                        // delete-matched sweep against it.
                        while (sim.graph().edge_count() < size) {
                            auto e = dm::adversary::detail::random_absent_edge(sim.graph(), rng);
                            if (!e) break;
                            runner.apply(dm::adversary::Update::insert(e->u, e->v));
                        }
                        dm::adversary::DeleteMatchedStrategy strat(dm::derive_seed(s, 0xde, 1));
                        for (int d = 0; d < deletions; ++d) {
                            auto up = strat.next(sim);
                            if (up.kind != dm::adversary::Update::Kind::Delete) break;
                            rounds.push_back(runner.apply(up).rounds);
                        }
                    } else {
                        std::vector<dm::Edge> edges;
                        dm::Graph shadow = sim.graph();
                        for (long long i = 0; i < size; ++i) {
                            auto e = dm::adversary::detail::random_absent_edge(shadow, rng);
                            if (!e) break;
                            shadow.insert_edge(e->u, e->v);
                            edges.push_back(*e);
                        }
                        rounds.push_back(runner.apply(dm::adversary::Update::batch(edges)).rounds);
                        for (const auto& mb : runner.last_minibatches()) {
                            mb_rounds.push_back(mb.rounds);
                            max_spreads = std::max(max_spreads,
                                                   mb.spreads_total - mb.spreads_phase2);
                            if (mb.w_size > 0)
                                max_iter_ratio =
                                    std::max(max_iter_ratio, static_cast<double>(mb.phase2_iterations) /
                                                                 mb.w_size);
                        }
                    }
                }
                if (rounds.empty()) continue;
                double mean = std::accumulate(rounds.begin(), rounds.end(), 0.0) / rounds.size();
                long long mx = *std::max_element(rounds.begin(), rounds.end());
                long long bound;
                if (algo == dm::Algorithm::fullydyn) {
                    long long root = static_cast<long long>(std::sqrt(static_cast<double>(size)));
                    bound = std::max<long long>(1, dm::ceil_div(root, k * beta));
                } else {
                    long long b = dm::batchinc::minibatch_size(static_cast<int>(k),
                                                               static_cast<int>(beta));
                    bound = std::max<long long>(1, dm::ceil_div(size, b));
                }
                double median_mb = 0.0;
                if (!mb_rounds.empty()) {
                    std::sort(mb_rounds.begin(), mb_rounds.end());
                    median_mb = static_cast<double>(mb_rounds[mb_rounds.size() / 2]);
                }
                out << algo_name << "," << n << "," << k << "," << beta << ","
                    << (algo == dm::Algorithm::fullydyn ? size : 0) << ","
                    << (algo == dm::Algorithm::batchinc ? size : 0) << "," << rounds.size() << ","
                    << mean << "," << mx << "," << bound << "," << mean / bound << ","
                    << median_mb << "," << max_spreads << "," << max_iter_ratio << "\n";
            }
        }
    }
    return 0;
}

int cmd_lbexp(int n, int k, int ell, int trials, std::uint64_t seed, const std::string& gamma_mode,
              const std::string& out_path) {
    dm::adversary::GammaMode mode = dm::adversary::GammaMode::Random;
    if (gamma_mode == "zeros") mode = dm::adversary::GammaMode::AllZeros;
    else if (gamma_mode == "ones") mode = dm::adversary::GammaMode::AllOnes;
    else if (gamma_mode != "random") throw dm::ConfigError("gamma must be random|zeros|ones");

    std::ostream& out = open_out(out_path);
    bool all_ok = true;
    for (int trial = 0; trial < trials; ++trial) {
        std::mt19937_64 rng(dm::derive_seed(seed, 0x1b, static_cast<std::uint64_t>(trial)));
        dm::adversary::LBInstance lb = dm::adversary::build_lb_instance(n, k, ell, rng, mode);
        dm::SimConfig cfg;
        cfg.n = n;
        cfg.k = k;
        cfg.beta = 1;
        cfg.seed = dm::derive_seed(seed, 0x51, static_cast<std::uint64_t>(trial));
        dm::Simulation sim(cfg, lb.partition);
        dm::Runner setup(sim, dm::Algorithm::fullydyn, dm::VerifyLevel::post);
        for (const auto& up : lb.setup_updates) setup.apply(up);

        std::vector<bool> pre_matched_uv;
        for (int idx = 0; idx < lb.ell; ++idx) {
            int seg = lb.challenge_segments[idx];
            pre_matched_uv.push_back(sim.matching().has_pair(lb.u(seg), lb.v(seg)));
        }
        long long bits_before = sim.metrics().bits_received_per_player[lb.designated];
        long long rounds = 0;
        if (lb.ell > 0) {
            dm::Runner challenge(sim, dm::Algorithm::batchinc, dm::VerifyLevel::post);
            rounds = challenge.apply(lb.challenge).rounds;
        }
        long long bits_to_p =
            sim.metrics().bits_received_per_player[lb.designated] - bits_before;

        int flips_required = 0, flips_seen = 0;
        bool segments_clean = true;
        for (int idx = 0; idx < lb.ell; ++idx) {
            int seg = lb.challenge_segments[idx];
            if (lb.gamma[idx] == 0 && pre_matched_uv[idx]) {
                ++flips_required;
                bool flipped = !sim.matching().has_pair(lb.u(seg), lb.v(seg)) &&
                               sim.matching().has_pair(lb.v(seg), lb.w(seg));
                if (flipped) ++flips_seen;
            }
        }
        for (const auto& p : dm::oracle::find_3aug_paths(sim.graph(), sim.matching())) {
            (void)p;
            segments_clean = false;
        }
        bool bits_ok = lb.ell == 0 || bits_to_p >= lb.ell;
        bool ok = flips_seen == flips_required && segments_clean && bits_ok;
        all_ok = all_ok && ok;
        nlohmann::json j{{"trial", trial},
                         {"n", n},
                         {"k", k},
                         {"l", ell},
                         {"designated_player", lb.designated},
                         {"rounds", rounds},
                         {"bits_to_p", bits_to_p},
                         {"l_times_token_bits", static_cast<long long>(lb.ell) * sim.token_bits()},
                         {"flips_required", flips_required},
                         {"flips_seen", flips_seen},
                         {"no_three_aug", segments_clean},
                         {"ok", ok}};
        out << j.dump() << "\n";
    }
    return all_ok ? 0 : 1;
}

int cmd_verify_replay(const std::string& in_path, int n, int k, int beta, std::uint64_t seed,
                      const std::string& algo_name, const std::string& verify_name) {
    std::ifstream in(in_path);
    if (!in) throw dm::ConfigError("cannot open replay file '" + in_path + "'");
    auto updates = dm::adversary::from_jsonl(in);
    dm::Simulation sim = make_sim(n, k, beta, seed);
    dm::Runner runner(sim, dm::algorithm_from_string(algo_name),
                      dm::verify_from_string(verify_name),
                      algo_name == "fullydyn");
    for (const auto& up : updates) runner.apply(up);
    std::cout << "replayed " << updates.size() << " updates, matching size "
              << sim.matching().size() << ", rounds " << sim.metrics().rounds_total << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"round-accurate dynamic matching simulator for bandwidth-limited player cliques"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "drive one experiment from a config file");
    std::string config_path, out_path, verify_override;
    long long seed_override = -1;
    run->add_option("--config", config_path, "flat key = value config file")->required();
    run->add_option("--seed", seed_override, "override the config seed");
    run->add_option("--verify", verify_override, "off | post | phase");
    run->add_option("--out", out_path, "JSONL output path (default stdout)");

    auto* bench = app.add_subcommand("bench", "round-complexity grids, CSV output");
    std::string b_algo = "fullydyn", b_m = "64,256,1024", b_l = "16,64,256", b_k = "4",
                b_beta = "1", b_out;
    int b_n = 128, b_trials = 3, b_deletions = 40;
    std::uint64_t b_seed = 1;
    bench->add_option("--algorithm", b_algo, "fullydyn | batchinc");
    bench->add_option("--n", b_n, "vertex count");
    bench->add_option("--m", b_m, "edge-count grid (fullydyn)");
    bench->add_option("--l", b_l, "batch-size grid (batchinc)");
    bench->add_option("--k", b_k, "player-count grid");
    bench->add_option("--beta", b_beta, "bandwidth grid");
    bench->add_option("--trials", b_trials, "trials per cell");
    bench->add_option("--deletions", b_deletions, "deletions measured per trial");
    bench->add_option("--seed", b_seed, "root seed");
    bench->add_option("--out", b_out, "CSV output path (default stdout)");

    auto* lbexp = app.add_subcommand("lbexp", "challenge-batch transcript measurement");
    int lb_n = 40, lb_k = 4, lb_l = 2, lb_trials = 10;
    std::uint64_t lb_seed = 1;
    std::string lb_gamma = "random", lb_out;
    lbexp->add_option("--n", lb_n, "vertex count (multiple of 5, k | n/5)");
    lbexp->add_option("--k", lb_k, "player count (>= 3)");
    lbexp->add_option("--l", lb_l, "challenge size (<= n/(5k))");
    lbexp->add_option("--trials", lb_trials, "instances to run");
    lbexp->add_option("--seed", lb_seed, "root seed");
    lbexp->add_option("--gamma", lb_gamma, "random | zeros | ones");
    lbexp->add_option("--out", lb_out, "JSONL output path (default stdout)");

    auto* replay = app.add_subcommand("verify-replay", "re-run a serialized update sequence");
    std::string r_in, r_algo = "fullydyn", r_verify = "post";
    int r_n = 0, r_k = 2, r_beta = 1;
    std::uint64_t r_seed = 1;
    replay->add_option("--in", r_in, "updates JSONL")->required();
    replay->add_option("--n", r_n, "vertex count")->required();
    replay->add_option("--k", r_k, "player count");
    replay->add_option("--beta", r_beta, "bandwidth");
    replay->add_option("--seed", r_seed, "seed");
    replay->add_option("--algorithm", r_algo, "fullydyn | batchinc");
    replay->add_option("--verify", r_verify, "off | post | phase");

    try {
        app.parse(argc, argv);
        if (run->parsed()) return cmd_run(config_path, seed_override, verify_override, out_path);
        if (bench->parsed())
            return cmd_bench(b_algo, b_n, b_m, b_l, b_k, b_beta, b_trials, b_deletions, b_seed,
                             b_out);
        if (lbexp->parsed())
            return cmd_lbexp(lb_n, lb_k, lb_l, lb_trials, lb_seed, lb_gamma, lb_out);
        if (replay->parsed())
            return cmd_verify_replay(r_in, r_n, r_k, r_beta, r_seed, r_algo, r_verify);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const dm::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const dm::VerifyFailure& e) {
        std::cerr << "verification failure: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
