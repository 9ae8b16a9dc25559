#pragma once

// Training-pair generation: Pairs Sampling (PS) and biased random walks (RW)
// with window extraction, plus the walk diagnostics (alpha, beta) and the
// closed-form RW/PS pair-count ratio.

#include <algorithm>
#include <fstream>
#include <optional>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "tgeps/common.hpp"
#include "tgeps/graph.hpp"

namespace tgeps {

struct NodePair {
    NodeId center = 0;
    NodeId neighbor = 0;

    friend auto operator<=>(const NodePair&, const NodePair&) = default;
};

enum class Provenance { pairs_sampling, random_walk };

inline const char* to_string(Provenance p) noexcept {
    return p == Provenance::pairs_sampling ? "ps" : "rw";
}

struct PairSet {
    std::vector<NodePair> pairs;
    Provenance provenance = Provenance::pairs_sampling;
    /// Window pairs whose two positions held the same node (RW revisits).
    std::size_t self_pairs_dropped = 0;

    std::size_t size() const noexcept { return pairs.size(); }
    bool empty() const noexcept { return pairs.empty(); }
};

namespace detail {

/// Runs `body(worker, begin, end, out)` over contiguous blocks of [0, n) and
/// concatenates per-worker outputs in worker order.
template <class T, class Body>
std::vector<T> parallel_blocks(std::size_t n, unsigned threads, Body body) {
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
    std::vector<std::vector<T>> parts(threads);
    auto run = [&](unsigned w) {
        std::size_t begin = n * w / threads;
        std::size_t end = n * (w + 1) / threads;
        body(w, begin, end, parts[w]);
    };
    if (threads == 1) {
        run(0);
        return std::move(parts[0]);
    }
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned w = 0; w < threads; ++w) pool.emplace_back(run, w);
    pool.clear();
    std::size_t total = 0;
    for (auto& p : parts) total += p.size();
    std::vector<T> out;
    out.reserve(total);
    for (auto& p : parts) out.insert(out.end(), p.begin(), p.end());
    return out;
}

} // namespace detail

// -----------------------------------------------------------------------------
// Pairs Sampling
// -----------------------------------------------------------------------------

/// Per-worker PS state: truncated BFS plus a stamped "selected" marker so
/// a repetition costs O(|sampled neighborhood|).
class PairsSampler {
public:
    PairsSampler(const Graph& g, std::uint32_t max_order)
        : g_(&g), max_order_(max_order), bfs_(g.node_count()), mark_(g.node_count(), 0) {
        if (max_order == 0) throw InvalidArgument("max order must be at least 1");
    }

    /// Computes exact distances from `center` up to the max order. Must be
    /// called before sample() for that center.
    void set_center(NodeId center) {
        center_ = center;
        bfs_.run(*g_, center, max_order_);
    }

    /// One repetition for the current center; appends (center, x) for every
    /// selected x.
    template <class Engine>
    void sample(Engine& rng, std::vector<NodePair>& out) {
        if (++stamp_ == 0) {
            std::fill(mark_.begin(), mark_.end(), 0);
            stamp_ = 1;
        }
        mark_[center_] = stamp_;
        frontier_.clear();
        for (NodeId x : g_->neighbors(center_)) {
            mark_[x] = stamp_;
            frontier_.push_back(x);
            out.push_back({center_, x});
        }
        for (std::uint32_t order = 1; order < max_order_ && !frontier_.empty(); ++order) {
            next_.clear();
            for (NodeId v : frontier_) {
                pool_.clear();
                for (NodeId x : g_->neighbors(v))
                    if (bfs_.distance(x) == order + 1 && mark_[x] != stamp_) pool_.push_back(x);
                if (pool_.empty()) continue;
                NodeId pick = pool_[uniform_index(rng, pool_.size())];
                mark_[pick] = stamp_;
                next_.push_back(pick);
                out.push_back({center_, pick});
            }
            frontier_.swap(next_);
        }
    }

private:
    const Graph* g_;
    std::uint32_t max_order_;
    TruncatedBfs bfs_;
    std::vector<std::uint32_t> mark_;
    std::uint32_t stamp_ = 0;
    NodeId center_ = 0;
    std::vector<NodeId> frontier_, next_, pool_;
};

/// One PS repetition around `center`: all first-order neighbors, then at most
/// one not-yet-selected next-order successor per selected node, up to order
/// `max_order`.
template <class Engine>
std::vector<NodePair> ps_sample_neighborhood(const Graph& g, NodeId center, std::uint32_t max_order,
                                             Engine& rng) {
    if (!g.contains(center)) throw InvalidArgument("center out of range");
    PairsSampler sampler(g, max_order);
    sampler.set_center(center);
    std::vector<NodePair> out;
    sampler.sample(rng, out);
    return out;
}

/// N repetitions of PS for every node. Worker w draws from
/// derive_seed(seed, w); with threads == 1 the result is bit-reproducible.
inline PairSet ps_sample_pairs(const Graph& g, std::uint32_t max_order, std::uint32_t reps,
                               std::uint64_t seed, unsigned threads = 1) {
    if (max_order == 0) throw InvalidArgument("max order must be at least 1");
    if (reps == 0) throw InvalidArgument("repetition count must be at least 1");
    PairSet out;
    out.provenance = Provenance::pairs_sampling;
    out.pairs = detail::parallel_blocks<NodePair>(
        g.node_count(), threads,
        [&](unsigned w, std::size_t begin, std::size_t end, std::vector<NodePair>& part) {
            Rng rng(derive_seed(seed, w));
            PairsSampler sampler(g, max_order);
            for (std::size_t c = begin; c < end; ++c) {
                if (g.degree(static_cast<NodeId>(c)) == 0) continue;
                sampler.set_center(static_cast<NodeId>(c));
                for (std::uint32_t r = 0; r < reps; ++r) sampler.sample(rng, part);
            }
        });
    return out;
}

// -----------------------------------------------------------------------------
// Random walks
// -----------------------------------------------------------------------------

struct Walk {
    std::vector<NodeId> nodes;
};

struct WalkParams {
    std::uint32_t length = 80;
    double p = 1.0;
    double q = 1.0;
};

/// Second-order biased walk. The first step is uniform; afterwards neighbor
/// x of the current node v (previous node t) has weight 1/p if x == t, 1 if x
/// is adjacent to t, 1/q otherwise.
template <class Engine>
Walk rw_walk(const Graph& g, NodeId start, const WalkParams& params, Engine& rng) {
    if (!g.contains(start)) throw InvalidArgument("walk start out of range");
    if (params.length == 0) throw InvalidArgument("walk length must be at least 1");
    if (!(params.p > 0.0 && params.q > 0.0)) throw InvalidArgument("p and q must be positive");

    const bool uniform = params.p == 1.0 && params.q == 1.0;
    const double w_return = 1.0 / params.p;
    const double w_out = 1.0 / params.q;

    Walk walk;
    walk.nodes.reserve(params.length);
    walk.nodes.push_back(start);
    while (walk.nodes.size() < params.length) {
        NodeId v = walk.nodes.back();
        auto nb = g.neighbors(v);
        if (nb.empty()) break;
        if (uniform || walk.nodes.size() == 1) {
            walk.nodes.push_back(nb[uniform_index(rng, nb.size())]);
            continue;
        }
        NodeId t = walk.nodes[walk.nodes.size() - 2];
        auto weight = [&](NodeId x) {
            if (x == t) return w_return;
            return g.has_edge(t, x) ? 1.0 : w_out;
        };
        double total = 0.0;
        for (NodeId x : nb) total += weight(x);
        double r = uniform_unit(rng) * total;
        NodeId next = nb.back();
        for (NodeId x : nb) {
            r -= weight(x);
            if (r < 0.0) {
                next = x;
                break;
            }
        }
        walk.nodes.push_back(next);
    }
    return walk;
}

/// `walks_per_node` walks from every non-isolated node, round-major: the
/// first walk of every node, then the second, and so on.
inline std::vector<Walk> generate_walks(const Graph& g, const WalkParams& params,
                                        std::uint32_t walks_per_node, std::uint64_t seed,
                                        unsigned threads = 1) {
    std::vector<NodeId> starts;
    for (NodeId v = 0; v < g.node_count(); ++v)
        if (g.degree(v) > 0) starts.push_back(v);
    const std::size_t total = starts.size() * walks_per_node;
    return detail::parallel_blocks<Walk>(
        total, threads, [&](unsigned w, std::size_t begin, std::size_t end, std::vector<Walk>& part) {
            Rng rng(derive_seed(seed, w));
            part.reserve(end - begin);
            for (std::size_t i = begin; i < end; ++i)
                part.push_back(rw_walk(g, starts[i % starts.size()], params, rng));
        });
}

/// Ordered (node_i, node_j) pairs for |i - j| <= window, j != i. Pairs whose
/// endpoints are the same node are dropped and counted.
inline PairSet extract_window_pairs(std::span<const Walk> walks, std::uint32_t window) {
    if (window == 0) throw InvalidArgument("window must be at least 1");
    PairSet out;
    out.provenance = Provenance::random_walk;
    std::size_t expected = 0;
    for (const auto& w : walks) {
        const std::size_t L = w.nodes.size();
        for (std::size_t i = 0; i < L; ++i)
            expected += std::min<std::size_t>(i, window) + std::min<std::size_t>(L - 1 - i, window);
    }
    out.pairs.reserve(expected);
    for (const auto& w : walks) {
        const auto& s = w.nodes;
        const std::size_t L = s.size();
        for (std::size_t i = 0; i < L; ++i) {
            const std::size_t lo = i >= window ? i - window : 0;
            const std::size_t hi = std::min(L - 1, i + window);
            for (std::size_t j = lo; j <= hi; ++j) {
                if (j == i) continue;
                if (s[j] == s[i]) {
                    ++out.self_pairs_dropped;
                    continue;
                }
                out.pairs.push_back({s[i], s[j]});
            }
        }
    }
    return out;
}

/// Window pairs produced by one revisit-free walk: k(2L - k - 1) when L > k.
constexpr std::uint64_t window_pair_count(std::uint64_t length, std::uint64_t window) noexcept {
    std::uint64_t n = 0;
    for (std::uint64_t i = 0; i < length; ++i)
        n += std::min(i, window) + std::min(length - 1 - i, window);
    return n;
}

// -----------------------------------------------------------------------------
// Diagnostics
// -----------------------------------------------------------------------------

struct SamplingStats {
    std::uint32_t walks_per_node = 0;
    /// T_i: windows centered at i inside walks that did not start at i.
    std::vector<std::uint64_t> foreign_windows;
    /// alpha_i = T_i / T.
    std::vector<double> alpha;
    /// beta_{j|i}: per center, (neighbor, probability) sorted by neighbor.
    /// Includes j == i when a walk revisits its window center.
    std::vector<std::vector<std::pair<NodeId, double>>> beta;
    /// Per center count of window slots that held the center itself.
    std::vector<std::uint64_t> self_pairs;
};

inline SamplingStats sampling_stats(std::span<const Walk> walks, std::uint32_t window,
                                    std::uint32_t walks_per_node, std::size_t node_count) {
    if (walks.empty()) throw InvalidArgument("sampling statistics need at least one walk");
    if (walks_per_node == 0) throw InvalidArgument("walks per node must be positive");
    SamplingStats st;
    st.walks_per_node = walks_per_node;
    st.foreign_windows.assign(node_count, 0);
    st.self_pairs.assign(node_count, 0);
    std::vector<std::unordered_map<NodeId, std::uint64_t>> counts(node_count);

    for (const auto& w : walks) {
        const auto& s = w.nodes;
        if (s.empty()) continue;
        const std::size_t L = s.size();
        for (std::size_t i = 0; i < L; ++i) {
            const NodeId c = s[i];
            if (c >= node_count) throw InvalidArgument("walk node outside graph");
            if (c != s.front()) ++st.foreign_windows[c];
            const std::size_t lo = i >= window ? i - window : 0;
            const std::size_t hi = std::min(L - 1, i + window);
            for (std::size_t j = lo; j <= hi; ++j) {
                if (j == i) continue;
                ++counts[c][s[j]];
                if (s[j] == c) ++st.self_pairs[c];
            }
        }
    }

    st.alpha.resize(node_count);
    st.beta.resize(node_count);
    for (std::size_t v = 0; v < node_count; ++v) {
        st.alpha[v] = static_cast<double>(st.foreign_windows[v]) / walks_per_node;
        std::uint64_t total = 0;
        for (const auto& [_, n] : counts[v]) total += n;
        auto& row = st.beta[v];
        row.reserve(counts[v].size());
        for (const auto& [j, n] : counts[v])
            row.emplace_back(j, static_cast<double>(n) / static_cast<double>(total));
        std::sort(row.begin(), row.end());
    }
    return st;
}

/// RW-to-PS pair-count ratio (2L - k - 1)kT / (N O d).
inline double sample_ratio(std::uint32_t walk_length, std::uint32_t window, std::uint32_t walks_per_node,
                           std::uint32_t reps, std::uint32_t max_order, double avg_degree) {
    if (walk_length == 0 || window == 0 || walks_per_node == 0 || reps == 0 || max_order == 0 ||
        !(avg_degree > 0.0))
        throw InvalidArgument("sample ratio arguments must be positive");
    const double span = 2.0 * walk_length - window - 1.0;
    if (span <= 0.0) throw InvalidArgument("walk length too short for window (2L - k - 1 <= 0)");
    return span * window * walks_per_node / (static_cast<double>(reps) * max_order * avg_degree);
}

// -----------------------------------------------------------------------------
// Files
// -----------------------------------------------------------------------------

inline void write_pairs(const std::string& path, const Graph& g, const PairSet& ps) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path + "'");
    out << "# provenance=" << to_string(ps.provenance) << '\n';
    for (const auto& p : ps.pairs) out << g.external_id(p.center) << '\t' << g.external_id(p.neighbor) << '\n';
    if (!out) throw IoError("write failure on '" + path + "'");
}

inline PairSet read_pairs(const std::string& path, const Graph& g) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open pairs file '" + path + "'");
    PairSet ps;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        if (line[0] == '#') {
            if (line.find("provenance=rw") != std::string::npos) ps.provenance = Provenance::random_walk;
            continue;
        }
        auto tab = line.find('\t');
        if (tab == std::string::npos) throw ParseError(path, lineno, "expected center<TAB>neighbor");
        std::string a = line.substr(0, tab);
        std::string b = line.substr(tab + 1);
        if (!b.empty() && b.back() == '\r') b.pop_back();
        auto ca = g.find(a);
        auto cb = g.find(b);
        if (!ca || !cb) throw ParseError(path, lineno, "pair references unknown node");
        ps.pairs.push_back({*ca, *cb});
    }
    return ps;
}

inline void write_walks(const std::string& path, const Graph& g, std::span<const Walk> walks) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path + "'");
    for (const auto& w : walks) {
        for (std::size_t i = 0; i < w.nodes.size(); ++i) out << (i ? " " : "") << g.external_id(w.nodes[i]);
        out << '\n';
    }
}

} // namespace tgeps
