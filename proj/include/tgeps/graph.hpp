#pragma once

// Undirected, unweighted graph in CSR form plus edge-list I/O, the Data@p%
// edge split and truncated BFS.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "tgeps/common.hpp"

namespace tgeps {

/// Undirected edge, stored canonically with u < v.
struct Edge {
    NodeId u = 0;
    NodeId v = 0;

    friend auto operator<=>(const Edge&, const Edge&) = default;
};

inline Edge canonical(NodeId a, NodeId b) noexcept { return a < b ? Edge{a, b} : Edge{b, a}; }

class Graph {
public:
    Graph() : offsets_(1, 0) {}

    /// Builds from external ids (index = dense id) and an arbitrary edge list.
    /// Self-loops and duplicates are removed; both directions are stored.
    static Graph from_edges(std::vector<std::string> ids, std::vector<Edge> edges) {
        Graph g;
        const std::size_t n = ids.size();
        g.ids_ = std::move(ids);
        g.index_.reserve(n);
        for (std::size_t i = 0; i < n; ++i) {
            auto [it, inserted] = g.index_.emplace(g.ids_[i], static_cast<NodeId>(i));
            if (!inserted) throw InvalidArgument("duplicate node id '" + g.ids_[i] + "'");
        }
        for (auto& e : edges) {
            if (e.u >= n || e.v >= n) throw InvalidArgument("edge references node outside graph");
            e = canonical(e.u, e.v);
        }
        std::erase_if(edges, [](const Edge& e) { return e.u == e.v; });
        std::sort(edges.begin(), edges.end());
        edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

        g.offsets_.assign(n + 1, 0);
        for (const auto& e : edges) {
            ++g.offsets_[e.u + 1];
            ++g.offsets_[e.v + 1];
        }
        for (std::size_t i = 0; i < n; ++i) g.offsets_[i + 1] += g.offsets_[i];
        g.adjacency_.resize(g.offsets_[n]);
        std::vector<std::size_t> cursor(g.offsets_.begin(), g.offsets_.end() - 1);
        for (const auto& e : edges) {
            g.adjacency_[cursor[e.u]++] = e.v;
            g.adjacency_[cursor[e.v]++] = e.u;
        }
        for (std::size_t i = 0; i < n; ++i)
            std::sort(g.adjacency_.begin() + static_cast<std::ptrdiff_t>(g.offsets_[i]),
                      g.adjacency_.begin() + static_cast<std::ptrdiff_t>(g.offsets_[i + 1]));
        g.edge_count_ = edges.size();
        return g;
    }

    std::size_t node_count() const noexcept { return ids_.size(); }
    std::size_t edge_count() const noexcept { return edge_count_; }

    std::span<const NodeId> neighbors(NodeId v) const noexcept {
        return {adjacency_.data() + offsets_[v], offsets_[v + 1] - offsets_[v]};
    }
    std::size_t degree(NodeId v) const noexcept { return offsets_[v + 1] - offsets_[v]; }

    bool has_edge(NodeId a, NodeId b) const noexcept {
        auto nb = neighbors(a);
        return std::binary_search(nb.begin(), nb.end(), b);
    }

    bool contains(NodeId v) const noexcept { return v < node_count(); }

    const std::string& external_id(NodeId v) const { return ids_.at(v); }
    const std::vector<std::string>& external_ids() const noexcept { return ids_; }

    std::optional<NodeId> find(std::string_view token) const {
        auto it = index_.find(std::string(token));
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

    NodeId id_of(std::string_view token) const {
        if (auto id = find(token)) return *id;
        throw InvalidArgument("unknown node id '" + std::string(token) + "'");
    }

    /// All edges in canonical (u < v) sorted order.
    std::vector<Edge> edges() const {
        std::vector<Edge> out;
        out.reserve(edge_count_);
        for (NodeId u = 0; u < node_count(); ++u)
            for (NodeId v : neighbors(u))
                if (u < v) out.push_back({u, v});
        return out;
    }

    std::size_t isolated_count() const noexcept {
        std::size_t c = 0;
        for (NodeId v = 0; v < node_count(); ++v) c += degree(v) == 0;
        return c;
    }

    friend bool operator==(const Graph& a, const Graph& b) {
        return a.ids_ == b.ids_ && a.offsets_ == b.offsets_ && a.adjacency_ == b.adjacency_;
    }

private:
    std::vector<std::string> ids_;
    std::unordered_map<std::string, NodeId> index_;
    std::vector<std::size_t> offsets_;
    std::vector<NodeId> adjacency_;
    std::size_t edge_count_ = 0;
};

// -----------------------------------------------------------------------------
// Edge-list ingestion
// -----------------------------------------------------------------------------

struct LoadedGraph {
    Graph graph;
    std::size_t self_loops = 0;
    std::size_t duplicate_edges = 0;
};

/// Parses an edge list: one edge per line, first two whitespace-separated
/// tokens are the endpoints, extra tokens are ignored, '#' lines and blank
/// lines are skipped. `node_order` pre-registers ids (in index order) so
/// isolated nodes survive and indices stay stable across files.
inline LoadedGraph parse_edge_list(std::istream& in, const std::string& source_name,
                                   const std::vector<std::string>& node_order = {}) {
    std::vector<std::string> ids;
    std::unordered_map<std::string, NodeId> index;
    auto intern = [&](const std::string& tok) {
        auto [it, inserted] = index.emplace(tok, static_cast<NodeId>(ids.size()));
        if (inserted) ids.push_back(tok);
        return it->second;
    };
    for (const auto& id : node_order) intern(id);

    LoadedGraph out;
    std::vector<Edge> edges;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        std::istringstream ls(line);
        std::string a, b;
        if (!(ls >> a >> b)) throw ParseError(source_name, lineno, "expected two node tokens");
        NodeId ua = intern(a);
        NodeId ub = intern(b);
        if (ua == ub) {
            ++out.self_loops;
            continue;
        }
        edges.push_back(canonical(ua, ub));
    }
    if (in.bad()) throw IoError("read failure on " + source_name);

    const std::size_t raw = edges.size();
    out.graph = Graph::from_edges(std::move(ids), std::move(edges));
    out.duplicate_edges = raw - out.graph.edge_count();
    return out;
}

inline LoadedGraph load_edge_list(const std::string& path,
                                  const std::vector<std::string>& node_order = {}) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open edge list '" + path + "'");
    return parse_edge_list(in, path, node_order);
}

/// One external id per line; blank and '#' lines skipped.
inline std::vector<std::string> load_node_list(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open node list '" + path + "'");
    std::vector<std::string> ids;
    std::string line;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::string tok;
        if (!(ls >> tok) || tok[0] == '#') continue;
        ids.push_back(tok);
    }
    return ids;
}

inline void write_edges(std::ostream& out, const Graph& g, std::span<const Edge> edges) {
    for (const auto& e : edges) out << g.external_id(e.u) << ' ' << g.external_id(e.v) << '\n';
}

inline void write_edge_list(const std::string& path, const Graph& g, std::span<const Edge> edges) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path + "'");
    write_edges(out, g, edges);
    if (!out) throw IoError("write failure on '" + path + "'");
}

inline void write_edge_list(const std::string& path, const Graph& g) {
    write_edge_list(path, g, g.edges());
}

inline void write_node_list(const std::string& path, const Graph& g) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path + "'");
    for (const auto& id : g.external_ids()) out << id << '\n';
}

// -----------------------------------------------------------------------------
// Data@p% split
// -----------------------------------------------------------------------------

struct EdgeSplit {
    Graph train_graph;
    std::vector<Edge> held_out;
    double keep_fraction = 1.0;
};

/// Number of edges kept for a fraction; round half up.
inline std::size_t kept_edge_count(std::size_t edges, double keep_fraction) {
    return static_cast<std::size_t>(std::floor(keep_fraction * static_cast<double>(edges) + 0.5));
}

inline EdgeSplit split_edges(const Graph& g, double keep_fraction, std::uint64_t seed) {
    if (!(keep_fraction > 0.0 && keep_fraction <= 1.0))
        throw InvalidArgument("keep fraction must lie in (0, 1]");
    auto edges = g.edges();
    Rng rng(seed);
    shuffle(edges, rng);
    const std::size_t keep = std::min(edges.size(), kept_edge_count(edges.size(), keep_fraction));

    EdgeSplit out;
    out.keep_fraction = keep_fraction;
    out.held_out.assign(edges.begin() + static_cast<std::ptrdiff_t>(keep), edges.end());
    std::sort(out.held_out.begin(), out.held_out.end());
    edges.resize(keep);
    out.train_graph = Graph::from_edges(g.external_ids(), std::move(edges));
    return out;
}

// -----------------------------------------------------------------------------
// Distances
// -----------------------------------------------------------------------------

inline constexpr std::uint32_t kUnreached = std::numeric_limits<std::uint32_t>::max();

/// Reusable truncated BFS. Keeps a dense distance array and resets only the
/// entries it touched, so repeated runs cost O(visited) instead of O(|V|).
class TruncatedBfs {
public:
    explicit TruncatedBfs(std::size_t node_count) : dist_(node_count, kUnreached) {}

    void run(const Graph& g, NodeId source, std::uint32_t max_depth) {
        clear();
        dist_[source] = 0;
        visited_.push_back(source);
        for (std::size_t head = 0; head < visited_.size(); ++head) {
            NodeId v = visited_[head];
            std::uint32_t d = dist_[v];
            if (d == max_depth) continue;
            for (NodeId x : g.neighbors(v)) {
                if (dist_[x] != kUnreached) continue;
                dist_[x] = d + 1;
                visited_.push_back(x);
            }
        }
    }

    std::uint32_t distance(NodeId v) const noexcept { return dist_[v]; }

    /// Nodes reached by the last run, in BFS order.
    std::span<const NodeId> visited() const noexcept { return visited_; }

private:
    void clear() {
        for (NodeId v : visited_) dist_[v] = kUnreached;
        visited_.clear();
    }

    std::vector<std::uint32_t> dist_;
    std::vector<NodeId> visited_;
};

/// Exact shortest distances from `source` to every node within `max_depth`.
inline std::unordered_map<NodeId, std::uint32_t> bfs_distances(const Graph& g, NodeId source,
                                                               std::uint32_t max_depth) {
    if (!g.contains(source)) throw InvalidArgument("bfs source out of range");
    TruncatedBfs bfs(g.node_count());
    bfs.run(g, source, max_depth);
    std::unordered_map<NodeId, std::uint32_t> out;
    out.reserve(bfs.visited().size());
    for (NodeId v : bfs.visited()) out.emplace(v, bfs.distance(v));
    return out;
}

struct DegreeStats {
    std::size_t nodes = 0;
    std::size_t edges = 0;
    double average_degree = 0.0;
};

inline DegreeStats degree_stats(const Graph& g) {
    if (g.node_count() == 0) throw InvalidArgument("degree statistics of an empty graph");
    return {g.node_count(), g.edge_count(),
            2.0 * static_cast<double>(g.edge_count()) / static_cast<double>(g.node_count())};
}

} // namespace tgeps
