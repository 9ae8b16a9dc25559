#pragma once

// SkipGram with negative sampling over a PairSet, optimized with AdaGrad and
// lazy (touched-rows-only) L2 decay.

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "tgeps/common.hpp"
#include "tgeps/graph.hpp"
#include "tgeps/sampler.hpp"

namespace tgeps {

struct TrainConfig {
    std::size_t dim = 128;
    std::uint32_t epochs = 5;
    double learning_rate = 0.1;
    double eps = 1e-8;
    double l2 = 1e-5;
    std::uint32_t n_neg = 5;
    std::uint64_t seed = 1;
    unsigned threads = 1;

    void validate() const {
        if (dim < 1) throw InvalidArgument("dim must be at least 1");
        if (!(learning_rate > 0.0)) throw InvalidArgument("learning rate must be positive");
        if (!(eps > 0.0)) throw InvalidArgument("eps must be positive");
        if (!(l2 >= 0.0)) throw InvalidArgument("l2 coefficient must be non-negative");
        if (n_neg < 1) throw InvalidArgument("negative count must be at least 1");
        if (threads < 1) throw InvalidArgument("thread count must be at least 1");
    }
};

/// Central (e) and context (e') lookup tables.
struct EmbeddingTable {
    Matrix<double> central;
    Matrix<double> context;

    EmbeddingTable() = default;
    EmbeddingTable(std::size_t nodes, std::size_t dim) : central(nodes, dim), context(nodes, dim) {}

    std::size_t dim() const noexcept { return central.cols(); }
    std::size_t nodes() const noexcept { return central.rows(); }

    /// tau_{i,j} = e'_j . e_i
    double score(NodeId i, NodeId j) const noexcept { return dot(context.row(j), central.row(i)); }

    /// Central rows U[-0.5/dim, 0.5/dim], context rows zero.
    template <class Engine>
    static EmbeddingTable initialized(std::size_t nodes, std::size_t dim, Engine& rng) {
        EmbeddingTable t(nodes, dim);
        const double a = 0.5 / static_cast<double>(dim);
        for (double& x : t.central.flat()) x = uniform_real(rng, -a, a);
        return t;
    }
};

// -----------------------------------------------------------------------------
// Negative sampling distribution P(v) ~ d_v^{3/4}
// -----------------------------------------------------------------------------

class NegativeSampler {
public:
    explicit NegativeSampler(std::span<const double> weights) {
        cumulative_.resize(weights.size());
        double total = 0.0;
        for (std::size_t i = 0; i < weights.size(); ++i) {
            if (!(weights[i] >= 0.0)) throw InvalidArgument("negative sampling weights must be >= 0");
            total += weights[i];
            cumulative_[i] = total;
        }
        if (!(total > 0.0)) throw InvalidArgument("negative sampling needs at least one positive weight");
        for (double& c : cumulative_) c /= total;
        cumulative_.back() = 1.0;
    }

    std::size_t size() const noexcept { return cumulative_.size(); }

    double probability(NodeId v) const noexcept {
        return cumulative_[v] - (v == 0 ? 0.0 : cumulative_[v - 1]);
    }

    template <class Engine>
    NodeId draw(Engine& rng) const {
        const double u = uniform_unit(rng);
        auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
        // u < 1 = back(), so it never reaches end(); the upper_bound skips
        // zero-width (degree 0) buckets.
        return static_cast<NodeId>(it - cumulative_.begin());
    }

private:
    std::vector<double> cumulative_;
};

inline NegativeSampler build_negative_sampler(const Graph& g) {
    if (g.edge_count() == 0) throw InvalidArgument("negative sampler needs a graph with at least one edge");
    std::vector<double> w(g.node_count());
    for (NodeId v = 0; v < g.node_count(); ++v) w[v] = std::pow(static_cast<double>(g.degree(v)), 0.75);
    return NegativeSampler(w);
}

// -----------------------------------------------------------------------------
// Loss and optimizer step
// -----------------------------------------------------------------------------

/// L = -log s(e'_p . e) - sum_k log s(-e'_k . e). Writes exact gradients
/// for every input (same shapes) and returns L. grad_negs must hold one span
/// per negative.
inline double sgns_loss_grads_into(std::span<const double> center, std::span<const double> positive,
                                   std::span<const std::span<const double>> negatives,
                                   std::span<double> grad_center, std::span<double> grad_positive,
                                   std::span<const std::span<double>> grad_negatives) {
    const std::size_t d = center.size();
    std::fill(grad_center.begin(), grad_center.end(), 0.0);

    const double sp = dot(positive, center);
    double loss = -log_sigmoid(sp);
    const double gp = sigmoid(sp) - 1.0;
    for (std::size_t i = 0; i < d; ++i) {
        grad_center[i] += gp * positive[i];
        grad_positive[i] = gp * center[i];
    }
    for (std::size_t k = 0; k < negatives.size(); ++k) {
        const auto& neg = negatives[k];
        const double sn = dot(neg, center);
        loss -= log_sigmoid(-sn);
        const double gn = sigmoid(sn);
        auto out = grad_negatives[k];
        for (std::size_t i = 0; i < d; ++i) {
            grad_center[i] += gn * neg[i];
            out[i] = gn * center[i];
        }
    }
    return loss;
}

struct SgnsGrads {
    double loss = 0.0;
    std::vector<double> center;
    std::vector<double> positive;
    std::vector<std::vector<double>> negatives;
};

inline SgnsGrads sgns_loss_grads(std::span<const double> center, std::span<const double> positive,
                                 const std::vector<std::vector<double>>& negatives) {
    const std::size_t d = center.size();
    if (positive.size() != d) throw InvalidArgument("sgns: dimension mismatch");
    SgnsGrads out;
    out.center.resize(d);
    out.positive.resize(d);
    out.negatives.assign(negatives.size(), std::vector<double>(d));
    std::vector<std::span<const double>> neg_in;
    std::vector<std::span<double>> neg_out;
    for (std::size_t k = 0; k < negatives.size(); ++k) {
        if (negatives[k].size() != d) throw InvalidArgument("sgns: dimension mismatch");
        neg_in.emplace_back(negatives[k]);
        neg_out.emplace_back(out.negatives[k]);
    }
    out.loss = sgns_loss_grads_into(center, positive, neg_in, out.center, out.positive, neg_out);
    return out;
}

/// g = grad + l2 * param; acc += g^2; param -= lr * g / (sqrt(acc) + eps).
inline void adagrad_step(std::span<double> param, std::span<const double> grad, std::span<double> accumulator,
                         double lr, double eps, double l2) noexcept {
    for (std::size_t i = 0; i < param.size(); ++i) {
        const double g = grad[i] + l2 * param[i];
        accumulator[i] += g * g;
        param[i] -= lr * g / (std::sqrt(accumulator[i]) + eps);
    }
}

// -----------------------------------------------------------------------------
// Training loop
// -----------------------------------------------------------------------------

struct TrainResult {
    EmbeddingTable table;
    std::vector<double> epoch_loss;

    double final_loss() const noexcept { return epoch_loss.empty() ? 0.0 : epoch_loss.back(); }
};

namespace detail {

/// Row access for the two concurrency modes. Shared mode goes through
/// relaxed atomic_ref loads/stores: unsynchronized, last write wins per
/// element, but free of data races.
template <bool Shared>
struct RowAccess {
    static void load(std::span<double> row, std::span<double> dst) noexcept {
        if constexpr (Shared) {
            for (std::size_t i = 0; i < row.size(); ++i)
                dst[i] = std::atomic_ref<double>(row[i]).load(std::memory_order_relaxed);
        } else {
            std::copy(row.begin(), row.end(), dst.begin());
        }
    }

    static void update(std::span<double> param, std::span<double> acc, std::span<const double> grad,
                       const TrainConfig& cfg, std::span<double> scratch_p, std::span<double> scratch_a) noexcept {
        if constexpr (Shared) {
            load(param, scratch_p);
            load(acc, scratch_a);
            adagrad_step(scratch_p, grad, scratch_a, cfg.learning_rate, cfg.eps, cfg.l2);
            for (std::size_t i = 0; i < param.size(); ++i) {
                std::atomic_ref<double>(param[i]).store(scratch_p[i], std::memory_order_relaxed);
                std::atomic_ref<double>(acc[i]).store(scratch_a[i], std::memory_order_relaxed);
            }
        } else {
            adagrad_step(param, grad, acc, cfg.learning_rate, cfg.eps, cfg.l2);
        }
    }
};

/// Buffers for one SGNS update. Reused across pairs.
struct SgnsWorkspace {
    explicit SgnsWorkspace(std::size_t dim, std::size_t n_neg)
        : center(dim), positive(dim), negatives(n_neg * dim), g_center(dim), g_positive(dim),
          g_negatives(n_neg * dim), scratch_p(dim), scratch_a(dim), neg_ids(n_neg) {
        for (std::size_t k = 0; k < n_neg; ++k) {
            neg_in.emplace_back(negatives.data() + k * dim, dim);
            neg_out.emplace_back(g_negatives.data() + k * dim, dim);
        }
    }

    std::vector<double> center, positive, negatives, g_center, g_positive, g_negatives, scratch_p, scratch_a;
    std::vector<NodeId> neg_ids;
    std::vector<std::span<const double>> neg_in;
    std::vector<std::span<double>> neg_out;
};

template <bool Shared, class Engine>
double sgns_update(EmbeddingTable& table, EmbeddingTable& accum, const NegativeSampler& negs, NodePair pair,
                   const TrainConfig& cfg, SgnsWorkspace& ws, Engine& rng) {
    using Access = RowAccess<Shared>;
    const std::size_t d = table.dim();
    Access::load(table.central.row(pair.center), ws.center);
    Access::load(table.context.row(pair.neighbor), ws.positive);
    for (std::size_t k = 0; k < ws.neg_ids.size(); ++k) {
        ws.neg_ids[k] = negs.draw(rng);
        Access::load(table.context.row(ws.neg_ids[k]), {ws.negatives.data() + k * d, d});
    }
    const double loss = sgns_loss_grads_into(ws.center, ws.positive, ws.neg_in, ws.g_center, ws.g_positive, ws.neg_out);

    Access::update(table.central.row(pair.center), accum.central.row(pair.center), ws.g_center, cfg, ws.scratch_p,
                   ws.scratch_a);
    Access::update(table.context.row(pair.neighbor), accum.context.row(pair.neighbor), ws.g_positive, cfg,
                   ws.scratch_p, ws.scratch_a);
    for (std::size_t k = 0; k < ws.neg_ids.size(); ++k)
        Access::update(table.context.row(ws.neg_ids[k]), accum.context.row(ws.neg_ids[k]), ws.neg_out[k], cfg,
                       ws.scratch_p, ws.scratch_a);
    return loss;
}

} // namespace detail

/// Trains lookup embeddings on `pairs`. Each epoch visits the pairs in a
/// fresh seeded permutation. With cfg.threads == 1 the result is a pure
/// function of (pairs, graph, cfg).
inline TrainResult train_pairs(const PairSet& pairs, const Graph& g, const TrainConfig& cfg) {
    cfg.validate();
    if (pairs.empty()) throw InvalidArgument("cannot train on an empty pair set");
    for (const auto& p : pairs.pairs)
        if (!g.contains(p.center) || !g.contains(p.neighbor))
            throw InvalidArgument("pair references a node outside the graph");

    const auto negs = build_negative_sampler(g);
    Rng rng(derive_seed(cfg.seed, 0));
    TrainResult result;
    result.table = EmbeddingTable::initialized(g.node_count(), cfg.dim, rng);
    EmbeddingTable accum(g.node_count(), cfg.dim);

    std::vector<NodePair> order = pairs.pairs;
    for (std::uint32_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        shuffle(order, rng);
        double loss_sum = 0.0;
        if (cfg.threads == 1) {
            detail::SgnsWorkspace ws(cfg.dim, cfg.n_neg);
            for (const auto& p : order) loss_sum += detail::sgns_update<false>(result.table, accum, negs, p, cfg, ws, rng);
        } else {
            std::vector<double> partial(cfg.threads, 0.0);
            {
                std::vector<std::jthread> pool;
                for (unsigned w = 0; w < cfg.threads; ++w) {
                    pool.emplace_back([&, w] {
                        Rng wrng(derive_seed(cfg.seed, 1 + static_cast<std::uint64_t>(epoch) * cfg.threads + w));
                        detail::SgnsWorkspace ws(cfg.dim, cfg.n_neg);
                        const std::size_t begin = order.size() * w / cfg.threads;
                        const std::size_t end = order.size() * (w + 1) / cfg.threads;
                        double s = 0.0;
                        for (std::size_t i = begin; i < end; ++i)
                            s += detail::sgns_update<true>(result.table, accum, negs, order[i], cfg, ws, wrng);
                        partial[w] = s;
                    });
                }
            }
            for (double s : partial) loss_sum += s;
        }
        result.epoch_loss.push_back(loss_sum / static_cast<double>(order.size()));
    }
    return result;
}

// -----------------------------------------------------------------------------
// Embedding files: "<count> <dim>" header, then "id v1 ... v_dim" per line.
// Values use the shortest round-trip decimal form.
// -----------------------------------------------------------------------------

struct NamedEmbeddings {
    std::vector<std::string> ids;
    Matrix<double> vectors;
};

inline void append_double(std::string& out, double v) {
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    out.append(buf, end);
}

inline void write_embeddings(const std::string& path, std::span<const std::string> ids, const Matrix<double>& m) {
    if (ids.size() != m.rows()) throw InvalidArgument("embedding id count does not match rows");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path + "'");
    std::string line;
    out << m.rows() << ' ' << m.cols() << '\n';
    for (std::size_t r = 0; r < m.rows(); ++r) {
        line = ids[r];
        for (double v : m.row(r)) {
            line.push_back(' ');
            append_double(line, v);
        }
        line.push_back('\n');
        out << line;
    }
    if (!out) throw IoError("write failure on '" + path + "'");
}

inline NamedEmbeddings read_embeddings(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open embeddings '" + path + "'");
    std::string line;
    std::size_t lineno = 1;
    if (!std::getline(in, line)) throw ParseError(path, 1, "missing header");
    std::size_t count = 0, dim = 0;
    {
        std::istringstream hs(line);
        if (!(hs >> count >> dim) || dim == 0) throw ParseError(path, 1, "header must be '<count> <dim>'");
    }
    NamedEmbeddings out;
    out.vectors = Matrix<double>(count, dim);
    out.ids.reserve(count);
    for (std::size_t r = 0; r < count; ++r) {
        ++lineno;
        if (!std::getline(in, line)) throw ParseError(path, lineno, "fewer rows than the header declares");
        const char* p = line.data();
        const char* end = p + line.size();
        while (p < end && *p != ' ') ++p;
        out.ids.emplace_back(static_cast<const char*>(line.data()), p);
        for (std::size_t c = 0; c < dim; ++c) {
            while (p < end && *p == ' ') ++p;
            double v = 0.0;
            auto [next, ec] = std::from_chars(p, end, v);
            if (ec != std::errc()) throw ParseError(path, lineno, "expected " + std::to_string(dim) + " values");
            out.vectors(r, c) = v;
            p = next;
        }
    }
    return out;
}

/// Reorders named rows into graph index order. Every graph node must have
/// a row.
inline Matrix<double> align_embeddings(const NamedEmbeddings& named, const Graph& g) {
    Matrix<double> out(g.node_count(), named.vectors.cols());
    std::vector<bool> seen(g.node_count(), false);
    for (std::size_t r = 0; r < named.ids.size(); ++r) {
        auto id = g.find(named.ids[r]);
        if (!id) continue;
        std::copy_n(named.vectors.row(r).begin(), out.cols(), out.row(*id).begin());
        seen[*id] = true;
    }
    for (NodeId v = 0; v < g.node_count(); ++v)
        if (!seen[v]) throw InvalidArgument("missing embedding for node '" + g.external_id(v) + "'");
    return out;
}

} // namespace tgeps
