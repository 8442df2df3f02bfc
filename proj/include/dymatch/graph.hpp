#pragma once

#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "dymatch/errors.hpp"
#include "dymatch/types.hpp"

namespace dymatch {

/// Simple undirected graph on vertices 0..n-1 with sorted adjacency sets.
class Graph {
public:
    explicit Graph(int n) : adj_(n) {}

    int vertex_count() const { return static_cast<int>(adj_.size()); }
    long long edge_count() const { return m_; }

    bool has_edge(VertexId u, VertexId v) const {
        if (u == v) return false;
        return adj_[u].count(v) > 0;
    }

    void insert_edge(VertexId u, VertexId v) {
        if (u == v) throw SelfLoop(u);
        if (has_edge(u, v)) throw DuplicateEdge(u, v);
        adj_[u].insert(v);
        adj_[v].insert(u);
        ++m_;
    }

    void remove_edge(VertexId u, VertexId v) {
        if (!has_edge(u, v)) throw MissingEdge(u, v);
        adj_[u].erase(v);
        adj_[v].erase(u);
        --m_;
    }

    const std::set<VertexId>& neighbors(VertexId v) const { return adj_[v]; }
    int degree(VertexId v) const { return static_cast<int>(adj_[v].size()); }

    std::vector<Edge> edges() const {
        std::vector<Edge> out;
        out.reserve(m_);
        for (VertexId u = 0; u < vertex_count(); ++u)
            for (VertexId v : adj_[u])
                if (u < v) out.emplace_back(u, v);
        return out;
    }

private:
    std::vector<std::set<VertexId>> adj_;
    long long m_ = 0;
};

/// partner(u) = v iff {u,v} is matched; every matched pair must be a graph edge.
class Matching {
public:
    explicit Matching(int n) : partner_(n, kNoVertex) {}

    int vertex_count() const { return static_cast<int>(partner_.size()); }
    bool is_matched(VertexId v) const { return partner_[v] != kNoVertex; }
    VertexId partner(VertexId v) const { return partner_[v]; }
    bool has_pair(VertexId u, VertexId v) const { return partner_[u] == v && partner_[v] == u; }

    void match(VertexId u, VertexId v) {
        if (u == v || is_matched(u) || is_matched(v))
            throw StateCorrupt("invalid match {" + std::to_string(u) + "," +
                               std::to_string(v) + "}");
        partner_[u] = v;
        partner_[v] = u;
    }

    void unmatch(VertexId u, VertexId v) {
        if (!has_pair(u, v))
            throw StateCorrupt("pair {" + std::to_string(u) + "," + std::to_string(v) +
                               "} not matched");
        partner_[u] = kNoVertex;
        partner_[v] = kNoVertex;
    }

    int size() const {
        int s = 0;
        for (VertexId v = 0; v < vertex_count(); ++v)
            if (partner_[v] > v) ++s;
        return s;
    }

    std::vector<Edge> edges() const {
        std::vector<Edge> out;
        for (VertexId v = 0; v < vertex_count(); ++v)
            if (partner_[v] > v) out.emplace_back(v, partner_[v]);
        return out;
    }

    const std::vector<VertexId>& partners() const { return partner_; }

private:
    std::vector<VertexId> partner_;
};

/// Load bound accepted by the balance validator: max(ceil(n/k)*ceil(log2 n), 1).
inline long long partition_load_bound(int n, int k) {
    long long b = ceil_div(n, k) * std::max(ilog2_ceil(n), 1);
    return b > 0 ? b : 1;
}

/// Vertex-to-player assignment; total and disjoint over 0..n-1.
struct Partition {
    std::vector<PlayerId> owner;                // size n
    std::vector<std::vector<VertexId>> hosted;  // size k, each sorted ascending

    static Partition from_owner(std::vector<PlayerId> own, int k) {
        Partition p;
        p.owner = std::move(own);
        p.hosted.assign(k, {});
        for (VertexId v = 0; v < static_cast<VertexId>(p.owner.size()); ++v) {
            PlayerId pl = p.owner[v];
            if (pl < 0 || pl >= k)
                throw BadConfig("vertex " + std::to_string(v) + " assigned to invalid player");
            p.hosted[pl].push_back(v);
        }
        return p;
    }

    /// Contiguous blocks of ceil(n/k) vertices per player.
    static Partition contiguous(int n, int k) {
        std::vector<PlayerId> own(n);
        long long block = ceil_div(n, k);
        for (VertexId v = 0; v < n; ++v)
            own[v] = static_cast<PlayerId>(std::min<long long>(v / block, k - 1));
        return from_owner(std::move(own), k);
    }

    /// Round-robin assignment, useful for spreading load in tests.
    static Partition round_robin(int n, int k) {
        std::vector<PlayerId> own(n);
        for (VertexId v = 0; v < n; ++v) own[v] = v % k;
        return from_owner(std::move(own), k);
    }
};

inline void validate_partition(const Partition& p, int n, int k) {
    if (static_cast<int>(p.owner.size()) != n)
        throw BadConfig("partition does not cover all vertices");
    if (static_cast<int>(p.hosted.size()) != k)
        throw BadConfig("partition has wrong player count");
    long long bound = partition_load_bound(n, k);
    for (PlayerId pl = 0; pl < k; ++pl) {
        long long load = static_cast<long long>(p.hosted[pl].size());
        if (load > bound) throw UnbalancedPartition(pl, load, bound);
    }
}

/// What a player legitimately knows: its hosted vertices, their adjacency with
/// neighbor owners, and matched status of hosted vertices only.
struct LocalView {
    struct HostedVertex {
        VertexId id;
        std::vector<std::pair<VertexId, PlayerId>> neighbors;  // (neighbor, owner)
        VertexId partner;                                      // kNoVertex if free
    };
    PlayerId player;
    std::vector<HostedVertex> vertices;  // sorted by id

    std::string serialize() const {
        std::ostringstream os;
        os << "p " << player << "\n";
        for (const auto& hv : vertices) {
            os << "v " << hv.id << " m " << hv.partner;
            for (const auto& [nb, own] : hv.neighbors) os << " " << nb << ":" << own;
            os << "\n";
        }
        return os.str();
    }
};

inline LocalView local_view(const Graph& g, const Matching& m, const Partition& part,
                            PlayerId p) {
    LocalView lv;
    lv.player = p;
    for (VertexId v : part.hosted[p]) {
        LocalView::HostedVertex hv;
        hv.id = v;
        hv.partner = m.partner(v);
        for (VertexId nb : g.neighbors(v)) hv.neighbors.emplace_back(nb, part.owner[nb]);
        lv.vertices.push_back(std::move(hv));
    }
    return lv;
}

/// Edge-list text: one "u v" line per edge, with an M suffix when matched.
inline std::string to_edge_list(const Graph& g, const Matching& m) {
    std::ostringstream os;
    for (const Edge& e : g.edges()) {
        os << e.u << " " << e.v;
        if (m.has_pair(e.u, e.v)) os << " M";
        os << "\n";
    }
    return os.str();
}

inline void from_edge_list(const std::string& text, Graph& g, Matching& m) {
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        VertexId u, v;
        std::string flag;
        ls >> u >> v;
        g.insert_edge(u, v);
        if (ls >> flag && flag == "M") m.match(u, v);
    }
}

}  // namespace dymatch
