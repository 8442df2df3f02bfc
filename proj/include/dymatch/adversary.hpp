#pragma once

#include <istream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "dymatch/graph.hpp"
#include "dymatch/sim.hpp"

#include "json.hpp"

namespace dymatch {
namespace adversary {

struct Update {
    enum class Kind { Insert, Delete, Batch };
    Kind kind = Kind::Insert;
    VertexId u = kNoVertex;
    VertexId v = kNoVertex;
    std::vector<Edge> edges;  // batch payload

    static Update insert(VertexId a, VertexId b) { return {Kind::Insert, a, b, {}}; }
    static Update del(VertexId a, VertexId b) { return {Kind::Delete, a, b, {}}; }
    static Update batch(std::vector<Edge> es) {
        return {Kind::Batch, kNoVertex, kNoVertex, std::move(es)};
    }

    long long size() const {
        return kind == Kind::Batch ? static_cast<long long>(edges.size()) : 1;
    }
};

inline void validate_update(const Graph& g, const Update& up) {
    auto check_range = [&](VertexId a) {
        if (a < 0 || a >= g.vertex_count())
            throw InvalidUpdate("vertex " + std::to_string(a) + " out of range");
    };
    switch (up.kind) {
        case Update::Kind::Insert:
            check_range(up.u);
            check_range(up.v);
            if (up.u == up.v) throw InvalidUpdate("self loop in insert");
            if (g.has_edge(up.u, up.v)) throw InvalidUpdate("duplicate insert");
            break;
        case Update::Kind::Delete:
            check_range(up.u);
            check_range(up.v);
            if (!g.has_edge(up.u, up.v)) throw InvalidUpdate("delete of absent edge");
            break;
        case Update::Kind::Batch: {
            std::set<Edge> seen;
            for (const Edge& e : up.edges) {
                check_range(e.u);
                check_range(e.v);
                if (e.u == e.v) throw InvalidUpdate("self loop in batch");
                if (!seen.insert(e).second) throw InvalidUpdate("duplicate edge in batch");
                if (g.has_edge(e.u, e.v)) throw InvalidUpdate("batch edge already present");
            }
            break;
        }
    }
}

namespace detail {

inline std::optional<Edge> random_absent_edge(const Graph& g, std::mt19937_64& rng) {
    const int n = g.vertex_count();
    long long full = static_cast<long long>(n) * (n - 1) / 2;
    if (g.edge_count() >= full) return std::nullopt;
    std::uniform_int_distribution<int> dist(0, n - 1);
    for (int tries = 0; tries < 64; ++tries) {
        VertexId a = dist(rng), b = dist(rng);
        if (a != b && !g.has_edge(a, b)) return Edge(a, b);
    }
    std::vector<Edge> absent;
    for (VertexId a = 0; a < n; ++a)
        for (VertexId b = a + 1; b < n; ++b)
            if (!g.has_edge(a, b)) absent.emplace_back(a, b);
    std::uniform_int_distribution<std::size_t> pick(0, absent.size() - 1);
    return absent[pick(rng)];
}

inline std::optional<Edge> random_present_edge(const Graph& g, std::mt19937_64& rng) {
    if (g.edge_count() == 0) return std::nullopt;
    auto es = g.edges();
    std::uniform_int_distribution<std::size_t> pick(0, es.size() - 1);
    return es[pick(rng)];
}

}  // namespace detail

/// Reproducible random workload: every update is valid against the evolving
/// graph. With max_batch > 1 insertions arrive as batches of random size.
inline std::vector<Update> random_workload(std::mt19937_64& rng, int n, int num_updates,
                                           double p_delete, int max_batch) {
    Graph shadow(n);
    std::vector<Update> out;
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    for (int i = 0; i < num_updates; ++i) {
        bool want_delete = shadow.edge_count() > 0 && coin(rng) < p_delete;
        if (want_delete) {
            auto e = detail::random_present_edge(shadow, rng);
            shadow.remove_edge(e->u, e->v);
            out.push_back(Update::del(e->u, e->v));
            continue;
        }
        int batch = 1;
        if (max_batch > 1) {
            std::uniform_int_distribution<int> bs(1, max_batch);
            batch = bs(rng);
        }
        std::vector<Edge> edges;
        for (int j = 0; j < batch; ++j) {
            auto e = detail::random_absent_edge(shadow, rng);
            if (!e) break;
            shadow.insert_edge(e->u, e->v);
            edges.push_back(*e);
        }
        if (edges.empty()) {
            auto e = detail::random_present_edge(shadow, rng);
            if (!e) break;  // n < 2; nothing to do
            shadow.remove_edge(e->u, e->v);
            out.push_back(Update::del(e->u, e->v));
        } else if (max_batch > 1) {
            out.push_back(Update::batch(std::move(edges)));
        } else {
            out.push_back(Update::insert(edges[0].u, edges[0].v));
        }
    }
    return out;
}

/// Chooses each update as an arbitrary function of the full simulator state;
/// the simulation exposes player snapshots and outputs to it.
class Strategy {
public:
    virtual ~Strategy() = default;
    virtual Update next(const Simulation& sim) = 0;
};

class RandomStrategy : public Strategy {
public:
    RandomStrategy(std::uint64_t seed, double p_delete, int max_batch)
        : rng_(seed), p_delete_(p_delete), max_batch_(max_batch) {}

    Update next(const Simulation& sim) override {
        std::uniform_real_distribution<double> coin(0.0, 1.0);
        const Graph& g = sim.graph();
        if (g.edge_count() > 0 && coin(rng_) < p_delete_) {
            auto e = detail::random_present_edge(g, rng_);
            return Update::del(e->u, e->v);
        }
        int batch = 1;
        if (max_batch_ > 1) {
            std::uniform_int_distribution<int> bs(1, max_batch_);
            batch = bs(rng_);
        }
        Graph shadow = g;
        std::vector<Edge> edges;
        for (int j = 0; j < batch; ++j) {
            auto e = detail::random_absent_edge(shadow, rng_);
            if (!e) break;
            shadow.insert_edge(e->u, e->v);
            edges.push_back(*e);
        }
        if (edges.empty()) {
            auto e = detail::random_present_edge(g, rng_);
            if (e) return Update::del(e->u, e->v);
            throw InvalidUpdate("graph admits no further updates");
        }
        if (max_batch_ > 1) return Update::batch(std::move(edges));
        return Update::insert(edges[0].u, edges[0].v);
    }

private:
    std::mt19937_64 rng_;
    double p_delete_;
    int max_batch_;
};

/// Deletes the lowest-ID currently matched edge, reading the players' outputs
/// between updates; inserts a random absent edge when nothing is matched.
class DeleteMatchedStrategy : public Strategy {
public:
    explicit DeleteMatchedStrategy(std::uint64_t seed) : rng_(seed) {}

    Update next(const Simulation& sim) override {
        auto matched = sim.matching().edges();
        if (!matched.empty()) return Update::del(matched[0].u, matched[0].v);
        auto e = detail::random_absent_edge(sim.graph(), rng_);
        if (!e) throw InvalidUpdate("graph is complete and nothing is matched");
        return Update::insert(e->u, e->v);
    }

private:
    std::mt19937_64 rng_;
};

/// Lower-bound instance: n/5 five-vertex line segments tiled onto a 5 x (n/5)
/// grid of player rectangles, a designated player hosting n/(5k) middle
/// vertices, and a challenge batch that flips segment states chosen by a
/// random bit vector.
struct LBInstance {
    int n = 0, k = 0, ell = 0, q = 0;  // q = n/5 segments
    Partition partition;
    PlayerId designated = 0;
    std::vector<int> middle_segments;  // I_P: segment indices with middle hosted by P
    std::vector<int> challenge_segments;  // J_P, sorted
    std::vector<int> gamma;               // bit per challenge segment, same order
    std::vector<Update> setup_updates;
    Update challenge;

    VertexId t(int i) const { return i; }
    VertexId u(int i) const { return q + i; }
    VertexId v(int i) const { return 2 * q + i; }
    VertexId w(int i) const { return 3 * q + i; }
    VertexId x(int i) const { return 4 * q + i; }
};

enum class GammaMode { Random, AllZeros, AllOnes };

/// Builds the grid construction. Requires 5 | n, k | (n/5) and k >= 3 (two
/// players cannot avoid hosting two of {u_i, v_i, w_i} for some segment).
inline LBInstance build_lb_instance(int n, int k, int ell, std::mt19937_64& rng,
                                    GammaMode mode = GammaMode::Random) {
    if (n <= 0 || n % 5 != 0) throw BadDimensions("n must be a positive multiple of 5");
    int q = n / 5;
    if (k < 3) throw BadDimensions("construction needs k >= 3 to separate u,v,w owners");
    if (q % k != 0) throw BadDimensions("k must divide n/5");
    int block = q / k;
    if (ell < 0 || ell > block)
        throw BadDimensions("challenge size must be at most n/(5k) = " + std::to_string(block));

    LBInstance lb;
    lb.n = n;
    lb.k = k;
    lb.ell = ell;
    lb.q = q;

    // Row r of the grid is split into k rectangles of n/(5k) columns; player j
    // takes rectangle (j + r) mod k of row r. For any segment the owners of
    // u, v, w are then (c-1), (c-2), (c-3) mod k for its column block c:
    // pairwise distinct once k >= 3.
    std::vector<PlayerId> owner(n);
    for (int r = 0; r < 5; ++r)
        for (int j = 0; j < k; ++j) {
            int rect = (j + r) % k;
            for (int c = rect * block; c < (rect + 1) * block; ++c)
                owner[r * q + c] = j;
        }
    lb.partition = Partition::from_owner(std::move(owner), k);
    for (int i = 0; i < q; ++i) {
        PlayerId ou = lb.partition.owner[lb.u(i)];
        PlayerId ov = lb.partition.owner[lb.v(i)];
        PlayerId ow = lb.partition.owner[lb.w(i)];
        if (ou == ov || ov == ow || ou == ow)
            throw BadDimensions("rectangle tiling failed to separate segment owners");
    }

    lb.designated = 0;
    for (int i = 0; i < q; ++i)
        if (lb.partition.owner[lb.v(i)] == lb.designated) lb.middle_segments.push_back(i);

    std::vector<int> pool = lb.middle_segments;
    for (int i = 0; i < ell; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
        std::swap(pool[i], pool[pick(rng)]);
    }
    lb.challenge_segments.assign(pool.begin(), pool.begin() + ell);
    std::sort(lb.challenge_segments.begin(), lb.challenge_segments.end());

    std::uniform_int_distribution<int> bit(0, 1);
    for (int i = 0; i < ell; ++i) {
        int g = mode == GammaMode::AllZeros ? 0 : mode == GammaMode::AllOnes ? 1 : bit(rng);
        lb.gamma.push_back(g);
    }

    for (int i = 0; i < q; ++i) {
        lb.setup_updates.push_back(Update::insert(lb.u(i), lb.v(i)));
        lb.setup_updates.push_back(Update::insert(lb.v(i), lb.w(i)));
    }
    std::vector<Edge> challenge_edges;
    for (int i = 0; i < ell; ++i) {
        int seg = lb.challenge_segments[i];
        if (lb.gamma[i] == 0)
            challenge_edges.emplace_back(lb.t(seg), lb.u(seg));
        else
            challenge_edges.emplace_back(lb.w(seg), lb.x(seg));
    }
    lb.challenge = Update::batch(std::move(challenge_edges));
    return lb;
}

inline nlohmann::json to_json(const Update& up) {
    nlohmann::json j;
    switch (up.kind) {
        case Update::Kind::Insert:
            j = {{"op", "insert"}, {"u", up.u}, {"v", up.v}};
            break;
        case Update::Kind::Delete:
            j = {{"op", "delete"}, {"u", up.u}, {"v", up.v}};
            break;
        case Update::Kind::Batch: {
            nlohmann::json edges = nlohmann::json::array();
            for (const Edge& e : up.edges) edges.push_back({e.u, e.v});
            j = {{"op", "batch"}, {"edges", edges}};
            break;
        }
    }
    return j;
}

inline std::string to_jsonl(const std::vector<Update>& updates) {
    std::ostringstream os;
    for (const Update& up : updates) os << to_json(up).dump() << "\n";
    return os.str();
}

inline Update update_from_json(const nlohmann::json& j) {
    std::string op = j.at("op").get<std::string>();
    if (op == "insert") return Update::insert(j.at("u").get<int>(), j.at("v").get<int>());
    if (op == "delete") return Update::del(j.at("u").get<int>(), j.at("v").get<int>());
    if (op == "batch") {
        std::vector<Edge> edges;
        for (const auto& e : j.at("edges")) edges.emplace_back(e[0].get<int>(), e[1].get<int>());
        return Update::batch(std::move(edges));
    }
    throw InvalidUpdate("unknown op '" + op + "'");
}

inline std::vector<Update> from_jsonl(std::istream& in) {
    std::vector<Update> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        out.push_back(update_from_json(nlohmann::json::parse(line)));
    }
    return out;
}

}  // namespace adversary
}  // namespace dymatch
