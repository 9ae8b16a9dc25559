#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "tgeps/tgeps.hpp"

namespace testing_support {

using tgeps::Edge;
using tgeps::Graph;
using tgeps::NodeId;

inline Graph graph_from(std::size_t n, const std::vector<std::pair<NodeId, NodeId>>& es) {
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < n; ++i) ids.push_back("n" + std::to_string(i));
    std::vector<Edge> edges;
    for (auto [a, b] : es) edges.push_back(tgeps::canonical(a, b));
    return Graph::from_edges(std::move(ids), std::move(edges));
}

/// G(n, p) with its own generator so the oracle never shares code paths
/// with the library's samplers.
inline Graph random_graph(std::size_t n, double p, std::uint64_t seed) {
    std::mt19937 gen(static_cast<std::uint32_t>(seed));
    std::bernoulli_distribution coin(p);
    std::vector<std::pair<NodeId, NodeId>> es;
    for (NodeId a = 0; a < n; ++a)
        for (NodeId b = a + 1; b < n; ++b)
            if (coin(gen)) es.emplace_back(a, b);
    return graph_from(n, es);
}

/// Random graph with roughly `avg_degree` mean degree; cheap for large n.
inline Graph sparse_random_graph(std::size_t n, double avg_degree, std::uint64_t seed) {
    std::mt19937 gen(static_cast<std::uint32_t>(seed));
    std::uniform_int_distribution<NodeId> pick(0, static_cast<NodeId>(n - 1));
    const auto m = static_cast<std::size_t>(avg_degree * static_cast<double>(n) / 2.0);
    std::vector<std::pair<NodeId, NodeId>> es;
    for (std::size_t i = 0; i < m; ++i) {
        NodeId a = pick(gen), b = pick(gen);
        if (a != b) es.emplace_back(a, b);
    }
    return graph_from(n, es);
}

inline constexpr std::uint32_t kInf = std::numeric_limits<std::uint32_t>::max();

/// Floyd-Warshall over the adjacency matrix.
inline std::vector<std::vector<std::uint32_t>> all_pairs(const Graph& g) {
    const std::size_t n = g.node_count();
    std::vector<std::vector<std::uint32_t>> d(n, std::vector<std::uint32_t>(n, kInf));
    for (NodeId v = 0; v < n; ++v) {
        d[v][v] = 0;
        for (NodeId u : g.neighbors(v)) d[v][u] = 1;
    }
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t i = 0; i < n; ++i) {
            if (d[i][k] == kInf) continue;
            for (std::size_t j = 0; j < n; ++j)
                if (d[k][j] != kInf && d[i][k] + d[k][j] < d[i][j]) d[i][j] = d[i][k] + d[k][j];
        }
    return d;
}

/// The worked PS example: center A; first order B C D E; B -> F G H,
/// D -> I, E -> J K; H -> L continues to third order.
inline Graph fig1_graph() {
    std::vector<std::string> ids = {"A", "B", "C", "D", "E", "F", "G", "H", "I", "J", "K", "L"};
    auto at = [&](const char* s) {
        for (NodeId i = 0; i < ids.size(); ++i)
            if (ids[i] == s) return i;
        return NodeId(0);
    };
    std::vector<Edge> edges;
    for (auto [a, b] : std::vector<std::pair<const char*, const char*>>{
             {"A", "B"}, {"A", "C"}, {"A", "D"}, {"A", "E"}, {"B", "F"}, {"B", "G"}, {"B", "H"},
             {"D", "I"}, {"E", "J"}, {"E", "K"}, {"H", "L"}})
        edges.push_back(tgeps::canonical(at(a), at(b)));
    return Graph::from_edges(ids, std::move(edges));
}

inline Graph star(std::size_t leaves) {
    std::vector<std::pair<NodeId, NodeId>> es;
    for (NodeId i = 1; i <= leaves; ++i) es.emplace_back(0, i);
    return graph_from(leaves + 1, es);
}

inline Graph cycle(std::size_t n) {
    std::vector<std::pair<NodeId, NodeId>> es;
    for (NodeId i = 0; i < n; ++i) es.emplace_back(i, static_cast<NodeId>((i + 1) % n));
    return graph_from(n, es);
}

inline Graph clique(std::size_t n) {
    std::vector<std::pair<NodeId, NodeId>> es;
    for (NodeId a = 0; a < n; ++a)
        for (NodeId b = a + 1; b < n; ++b) es.emplace_back(a, b);
    return graph_from(n, es);
}

/// Two n-cliques joined by one bridge edge (0, n).
inline Graph barbell(std::size_t n) {
    std::vector<std::pair<NodeId, NodeId>> es;
    for (NodeId off : {NodeId(0), static_cast<NodeId>(n)})
        for (NodeId a = 0; a < n; ++a)
            for (NodeId b = a + 1; b < n; ++b) es.emplace_back(off + a, off + b);
    es.emplace_back(0, static_cast<NodeId>(n));
    return graph_from(2 * n, es);
}

/// Fresh scratch directory under the system temp dir.
inline std::string scratch_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("tgeps_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir.string();
}

} // namespace testing_support
