#pragma once

#include <optional>
#include <string>

#include "dymatch/adversary.hpp"
#include "dymatch/batchinc.hpp"
#include "dymatch/fullydyn.hpp"
#include "dymatch/oracle.hpp"
#include "dymatch/sim.hpp"

#include "json.hpp"

namespace dymatch {

enum class Algorithm { fullydyn, batchinc };
enum class VerifyLevel { off, post, phase };

inline Algorithm algorithm_from_string(const std::string& s) {
    if (s == "fullydyn") return Algorithm::fullydyn;
    if (s == "batchinc") return Algorithm::batchinc;
    throw ConfigError("unknown algorithm '" + s + "'");
}

inline VerifyLevel verify_from_string(const std::string& s) {
    if (s == "off") return VerifyLevel::off;
    if (s == "post" || s == "post-update") return VerifyLevel::post;
    if (s == "phase" || s == "per-phase") return VerifyLevel::phase;
    throw ConfigError("unknown verify level '" + s + "'");
}

struct UpdateRecord {
    long long index = 0;
    std::string kind;
    long long ell = 1;
    long long rounds = 0;
    long long max_link_tokens = 0;
    long long spreading_invocations = 0;
    long long matching_size = 0;
    bool oracle_present = false;
    bool maximal = false;
    long long three_aug_count = 0;
    std::optional<int> mcm;
    std::optional<double> ratio;

    nlohmann::json to_json() const {
        nlohmann::json j{{"update_index", index}, {"kind", kind},      {"l", ell},
                         {"rounds", rounds},      {"max_link_tokens", max_link_tokens},
                         {"spreading_invocations", spreading_invocations},
                         {"matching_size", matching_size}};
        if (oracle_present) {
            nlohmann::json o{{"maximal", maximal}, {"three_aug_count", three_aug_count}};
            if (mcm) {
                o["mcm"] = *mcm;
                o["ratio"] = *ratio;
            }
            j["oracle"] = o;
        }
        return j;
    }
};

/// Applies updates through the selected algorithm with the selected amount of
/// verification; throws VerifyFailure with a witness when a check fails.
class Runner {
public:
    Runner(Simulation& sim, Algorithm algo, VerifyLevel verify, bool check_memoryless = false,
           int oracle_cap = oracle::default_cap())
        : sim_(sim),
          algo_(algo),
          verify_(verify),
          check_memoryless_(check_memoryless),
          cap_(oracle_cap) {}

    UpdateRecord apply(const adversary::Update& up) {
        adversary::validate_update(sim_.graph(), up);
        sim_.begin_update();
        UpdateRecord rec;
        rec.index = sim_.update_index();
        rec.ell = up.size();
        switch (up.kind) {
            case adversary::Update::Kind::Insert:
                if (algo_ == Algorithm::batchinc) {
                    rec.kind = "batch";
                    run_batch({Edge(up.u, up.v)});
                } else {
                    rec.kind = "insert";
                    sim_.apply_insert(up.u, up.v);
                    rec.rounds = fullydyn::on_insert(sim_, up.u, up.v);
                }
                break;
            case adversary::Update::Kind::Delete: {
                if (algo_ == Algorithm::batchinc)
                    throw InvalidUpdate("the batch-incremental algorithm takes insertions only");
                rec.kind = "delete";
                bool was_matched = sim_.apply_delete(up.u, up.v);
                rec.rounds = fullydyn::on_delete(sim_, up.u, up.v, was_matched);
                break;
            }
            case adversary::Update::Kind::Batch: {
                if (algo_ == Algorithm::fullydyn)
                    throw InvalidUpdate("the single-update algorithm takes single edges only");
                rec.kind = "batch";
                run_batch(up.edges);
                break;
            }
        }
        const UpdateStats& stats = sim_.end_update();
        rec.rounds = stats.rounds;
        rec.max_link_tokens = stats.max_link_tokens;
        rec.spreading_invocations = stats.spreading_invocations;
        rec.matching_size = sim_.matching().size();

        if (verify_ != VerifyLevel::off) {
            rec.oracle_present = true;
            std::optional<Edge> witness;
            rec.maximal = oracle::is_maximal(sim_.graph(), sim_.matching(), &witness);
            auto paths = oracle::find_3aug_paths(sim_.graph(), sim_.matching());
            rec.three_aug_count = static_cast<long long>(paths.size());
            if (!rec.maximal)
                throw VerifyFailure("matching not maximal after update " +
                                    std::to_string(rec.index) + ": free edge {" +
                                    std::to_string(witness->u) + "," +
                                    std::to_string(witness->v) + "}");
            if (!paths.empty())
                throw VerifyFailure("3-augmenting path after update " + std::to_string(rec.index) +
                                    ": (" + std::to_string(paths[0].a) + "," +
                                    std::to_string(paths[0].b) + "," + std::to_string(paths[0].c) +
                                    "," + std::to_string(paths[0].d) + ")");
            if (sim_.graph().edge_count() <= cap_) {
                int mcm = oracle::max_matching_size(sim_.graph(), cap_);
                rec.mcm = mcm;
                rec.ratio = mcm == 0 ? 1.0
                                     : static_cast<double>(rec.matching_size) /
                                           static_cast<double>(mcm);
                if (!oracle::ratio_ok(static_cast<int>(rec.matching_size), mcm))
                    throw VerifyFailure("approximation ratio violated after update " +
                                        std::to_string(rec.index) + ": |M|=" +
                                        std::to_string(rec.matching_size) +
                                        " mcm=" + std::to_string(mcm));
            }
        }
        if (check_memoryless_) check_memoryless();
        if (!oracle::valid_matching(sim_.graph(), sim_.matching().partners()))
            throw VerifyFailure("matching structurally invalid after update " +
                                std::to_string(rec.index));
        return rec;
    }

    const std::vector<batchinc::MiniBatchReport>& last_minibatches() const {
        return last_minibatches_;
    }

private:
    void run_batch(const std::vector<Edge>& edges) {
        if (verify_ == VerifyLevel::phase) {
            OracleObserver obs{cap_};
            batchinc::BatchReport rep = batchinc::process_batch(sim_, edges, &obs);
            last_minibatches_ = rep.minibatches;
        } else {
            batchinc::BatchReport rep = batchinc::process_batch(sim_, edges, nullptr);
            last_minibatches_ = rep.minibatches;
        }
    }

    struct OracleObserver : batchinc::PhaseObserver {
        int cap;
        explicit OracleObserver(int c) : cap(c) {}

        void check(const Simulation& sim, const PhaseContext& ctx, const std::string& tag) {
            oracle::PhaseReport rep =
                oracle::check_phase_invariants(ctx, sim.graph(), sim.matching(), tag);
            if (!rep.all_pass())
                throw VerifyFailure("phase invariants failed at " + tag + " (mini-batch " +
                                    std::to_string(ctx.minibatch_index) + "):\n" +
                                    rep.failures());
        }
        void after_phase1(const Simulation& sim, const PhaseContext& ctx) override {
            check(sim, ctx, "phase1");
        }
        void after_important_sets(const Simulation& sim, const PhaseContext& ctx) override {
            check(sim, ctx, "phase2_start");
        }
        void after_phase2(const Simulation& sim, const PhaseContext& ctx) override {
            check(sim, ctx, "phase2");
        }
        void after_phase3(const Simulation& sim, const PhaseContext& ctx) override {
            check(sim, ctx, "phase3");
        }
    };

    void check_memoryless() {
        for (PlayerId p = 0; p < sim_.players(); ++p) {
            std::string snap = sim_.snapshot_player_state(p);
            std::string expected = sim_.view(p).serialize();
            if (snap != expected)
                throw VerifyFailure("player " + std::to_string(p) +
                                    " keeps state beyond input and output");
        }
    }

    Simulation& sim_;
    Algorithm algo_;
    VerifyLevel verify_;
    bool check_memoryless_;
    int cap_;
    std::vector<batchinc::MiniBatchReport> last_minibatches_;
};

}  // namespace dymatch
