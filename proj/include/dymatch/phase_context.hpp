#pragma once

#include <map>
#include <set>
#include <vector>

#include "dymatch/graph.hpp"
#include "dymatch/types.hpp"

namespace dymatch {

/// Working sets of the batch algorithm for one mini-batch, exposed so the
/// verification oracle can re-derive and cross-check every classification.
struct PhaseContext {
    int minibatch_index = 0;

    std::vector<Edge> batch;         // all edges applied in this mini-batch
    std::vector<Edge> active;        // batch minus edges joining two matched vertices
    std::vector<VertexId> m0;        // partner vector at mini-batch start
    std::vector<VertexId> m1;        // partner vector after the local-repair phase

    // Subgraph collected for single-player processing in the first phase.
    std::vector<Edge> F;             // new edges between free vertices
    std::vector<Edge> I1;            // matched edges with distinct new edges at both ends
    std::vector<Edge> I1_hat;        // I1 plus incident new edges
    std::vector<Edge> T;             // harmful-triangle edges plus incident new free edges
    std::vector<Edge> G1_edges;      // F + I1_hat + T, deduplicated

    // Augmenting structure around the updated matching.
    std::vector<std::pair<VertexId, VertexId>> I_edges;  // oriented (w, u)
    std::set<VertexId> W, U, V, X, X_prime;
    std::vector<std::pair<VertexId, VertexId>> M_XW;     // virtual pairs (x, w)
    std::map<VertexId, VertexId> x_of_w;                 // w -> virtual partner

    std::set<VertexId> g_star_vertices;                  // X' + W + U + V
    std::vector<Edge> g_star_edges;                      // induced, with statuses in final M

    long long phase2_iterations = 0;
    long long phase3_requery_trips = 0;

    bool has_m1 = false;
    bool has_final = false;
};

}  // namespace dymatch
