#pragma once

#include <stdexcept>
#include <string>

namespace dymatch {

struct BadConfig : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct UnbalancedPartition : std::runtime_error {
    int player;
    long long load;
    long long bound;
    UnbalancedPartition(int p, long long l, long long b)
        : std::runtime_error("unbalanced partition: player " + std::to_string(p) +
                             " holds " + std::to_string(l) + " vertices, bound " +
                             std::to_string(b)),
          player(p), load(l), bound(b) {}
};

struct LinkOverflow : std::runtime_error {
    int from;
    int to;
    long long count;
    LinkOverflow(int f, int t, long long c, long long beta)
        : std::runtime_error("link (" + std::to_string(f) + "," + std::to_string(t) +
                             ") carries " + std::to_string(c) + " tokens, budget " +
                             std::to_string(beta)),
          from(f), to(t), count(c) {}
};

struct SelfLoop : std::runtime_error {
    explicit SelfLoop(int v)
        : std::runtime_error("self loop at vertex " + std::to_string(v)) {}
};

struct DuplicateEdge : std::runtime_error {
    DuplicateEdge(int u, int v)
        : std::runtime_error("edge {" + std::to_string(u) + "," + std::to_string(v) +
                             "} already present") {}
};

struct MissingEdge : std::runtime_error {
    MissingEdge(int u, int v)
        : std::runtime_error("edge {" + std::to_string(u) + "," + std::to_string(v) +
                             "} not present") {}
};

struct InvalidUpdate : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct BadDimensions : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct TooLarge : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct StateCorrupt : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SamplingExhausted : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct G1Overflow : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct GStarOverflow : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct VerifyFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace dymatch
