#pragma once

#include <array>
#include <cstdint>
#include <tuple>

#include "dymatch/errors.hpp"

namespace dymatch {

using VertexId = std::int32_t;
using PlayerId = std::int32_t;

inline constexpr VertexId kNoVertex = -1;

/// Ceiling of log2(x) for x >= 1 (0 for x <= 1).
inline int ilog2_ceil(unsigned long long x) {
    if (x <= 1) return 0;
    int t = 0;
    unsigned long long p = 1;
    while (p < x) {
        p <<= 1;
        ++t;
    }
    return t;
}

inline long long ceil_div(long long a, long long b) { return (a + b - 1) / b; }

/// An undirected edge, stored with u < v.
struct Edge {
    VertexId u;
    VertexId v;

    Edge(VertexId a, VertexId b) : u(a < b ? a : b), v(a < b ? b : a) {}

    friend bool operator==(const Edge&, const Edge&) = default;
    friend auto operator<=>(const Edge&, const Edge&) = default;
};

struct SimConfig {
    int n = 0;                  // vertex count
    int k = 2;                  // player count
    int beta = 1;               // tokens per directed link per round
    std::uint64_t seed = 0;     // root seed for all derived streams
    int token_bits = 0;         // 0 selects the default of ceil(3*log2(n))

    void validate() const {
        if (k < 2) throw BadConfig("player count k must be at least 2");
        if (n < k) throw BadConfig("vertex count n must be at least k");
        if (beta < 1) throw BadConfig("bandwidth beta must be at least 1");
    }

    /// Bits charged per token. One token models Theta(log n) bits.
    int effective_token_bits() const {
        if (token_bits > 0) return token_bits;
        // ceil(3*log2(n)) == ceil(log2(n^3))
        unsigned long long nn = static_cast<unsigned long long>(n);
        int bits = ilog2_ceil(nn * nn * nn);
        return bits > 0 ? bits : 1;
    }
};

enum class TokenKind : std::uint8_t {
    EdgeRecord = 0,
    VertexRecord = 1,
    StatusRecord = 2,
    QueryRecord = 3,
    ControlRecord = 4,
};

/// One fixed-size message unit: a kind tag plus up to four vertex-id-sized
/// payload fields. Tokens compare and deduplicate by content.
struct Token {
    TokenKind kind = TokenKind::ControlRecord;
    std::array<std::int64_t, 4> f{0, 0, 0, 0};
    std::uint8_t used = 0;

    static Token make(TokenKind k) { return Token{k, {0, 0, 0, 0}, 0}; }
    static Token make(TokenKind k, std::int64_t a) { return Token{k, {a, 0, 0, 0}, 1}; }
    static Token make(TokenKind k, std::int64_t a, std::int64_t b) {
        return Token{k, {a, b, 0, 0}, 2};
    }
    static Token make(TokenKind k, std::int64_t a, std::int64_t b, std::int64_t c) {
        return Token{k, {a, b, c, 0}, 3};
    }
    static Token make(TokenKind k, std::int64_t a, std::int64_t b, std::int64_t c,
                      std::int64_t d) {
        return Token{k, {a, b, c, d}, 4};
    }

    auto key() const { return std::tie(kind, f[0], f[1], f[2], f[3]); }

    friend bool operator==(const Token& x, const Token& y) { return x.key() == y.key(); }
    friend bool operator<(const Token& x, const Token& y) { return x.key() < y.key(); }
};

/// splitmix64; used to derive independent per-player per-update streams.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t root, std::uint64_t a, std::uint64_t b) {
    return mix64(mix64(root ^ mix64(a + 1)) ^ mix64(b + 0x51ed2701));
}

}  // namespace dymatch
