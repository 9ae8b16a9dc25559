#pragma once

// Link-prediction evaluation: paired AUC over (center, positive, negative)
// triples, AUC of a logistic-regression classifier on Hadamard edge
// features, the Text Matching baseline and the zero-shot node split.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "tgeps/common.hpp"
#include "tgeps/graph.hpp"
#include "tgeps/text.hpp"

namespace tgeps {

struct EvalTriple {
    NodeId center = 0;
    NodeId positive = 0;
    NodeId negative = 0;

    friend bool operator==(const EvalTriple&, const EvalTriple&) = default;
};

struct EvalTriples {
    std::vector<EvalTriple> triples;
    /// Centers that had a positive but no admissible negative (or, for
    /// zero-shot, no surviving positive partner).
    std::size_t skipped = 0;
};

namespace detail {

inline constexpr int kNegativeRetries = 100;

/// Uniform node from `pool` (or [0, n) when pool is empty) accepted by
/// `ok`: rejection sampling first, then a full scan.
template <class Ok, class Engine>
std::optional<NodeId> pick_negative(std::size_t n, std::span<const NodeId> pool, Ok ok, Engine& rng) {
    const std::size_t m = pool.empty() ? n : pool.size();
    if (m == 0) return std::nullopt;
    auto at = [&](std::size_t i) { return pool.empty() ? static_cast<NodeId>(i) : pool[i]; };
    for (int t = 0; t < kNegativeRetries; ++t) {
        NodeId v = at(uniform_index(rng, m));
        if (ok(v)) return v;
    }
    std::vector<NodeId> admissible;
    for (std::size_t i = 0; i < m; ++i)
        if (ok(at(i))) admissible.push_back(at(i));
    if (admissible.empty()) return std::nullopt;
    return admissible[uniform_index(rng, admissible.size())];
}

} // namespace detail

/// One triple per node with a held-out edge: a uniformly chosen held-out
/// partner and a uniformly chosen node adjacent to the center in neither the
/// train graph nor the held-out set.
inline EvalTriples build_eval_triples(const EdgeSplit& split, std::uint64_t seed) {
    if (split.held_out.empty()) throw InvalidArgument("evaluation needs at least one held-out edge");
    const Graph& train = split.train_graph;
    const Graph held = Graph::from_edges(train.external_ids(), split.held_out);
    const std::size_t n = train.node_count();
    Rng rng(seed);
    EvalTriples out;
    for (NodeId c = 0; c < n; ++c) {
        auto partners = held.neighbors(c);
        if (partners.empty()) continue;
        NodeId pos = partners[uniform_index(rng, partners.size())];
        auto neg = detail::pick_negative(
            n, {}, [&](NodeId v) { return v != c && !train.has_edge(c, v) && !held.has_edge(c, v); }, rng);
        if (!neg) {
            ++out.skipped;
            continue;
        }
        out.triples.push_back({c, pos, *neg});
    }
    return out;
}

/// Fraction of index-paired comparisons with pos > neg; ties count 1/2.
inline double auc_from_scores(std::span<const double> pos, std::span<const double> neg) {
    if (pos.size() != neg.size()) throw InvalidArgument("auc: score lists differ in length");
    if (pos.empty()) throw InvalidArgument("auc: empty score lists");
    double wins = 0.0;
    for (std::size_t i = 0; i < pos.size(); ++i) {
        if (pos[i] > neg[i])
            wins += 1.0;
        else if (pos[i] == neg[i])
            wins += 0.5;
    }
    return wins / static_cast<double>(pos.size());
}

inline void check_covers(const Matrix<double>& emb, std::span<const EvalTriple> triples) {
    for (const auto& t : triples)
        if (std::max({t.center, t.positive, t.negative}) >= emb.rows())
            throw InvalidArgument("missing embedding for a triple node");
}

/// Paired AUC of inner products e_c . e_p against e_c . e_n.
inline double auc_pair(const Matrix<double>& emb, std::span<const EvalTriple> triples) {
    check_covers(emb, triples);
    std::vector<double> pos, neg;
    pos.reserve(triples.size());
    neg.reserve(triples.size());
    for (const auto& t : triples) {
        pos.push_back(dot(emb.row(t.center), emb.row(t.positive)));
        neg.push_back(dot(emb.row(t.center), emb.row(t.negative)));
    }
    return auc_from_scores(pos, neg);
}

// -----------------------------------------------------------------------------
// Logistic regression
// -----------------------------------------------------------------------------

struct LRModel {
    std::vector<double> weights;
    double bias = 0.0;

    double predict(std::span<const double> x) const { return sigmoid(dot(std::span<const double>(weights), x) + bias); }
};

struct LrConfig {
    double learning_rate = 1.0;
    std::uint32_t epochs = 500;
    double l2 = 1e-4;
    double split_fraction = 0.5;
};

/// Full-batch gradient descent on the mean log-loss plus (l2/2)|w|^2,
/// from zero weights. Deterministic.
inline LRModel train_logistic(const Matrix<double>& features, std::span<const int> labels, double lr,
                              std::uint32_t epochs, double l2) {
    const std::size_t n = features.rows(), d = features.cols();
    if (labels.size() != n) throw InvalidArgument("logistic: label count does not match features");
    std::size_t positives = 0;
    for (int y : labels) {
        if (y != 0 && y != 1) throw InvalidArgument("logistic: labels must be 0 or 1");
        positives += y;
    }
    if (positives == 0 || positives == n) throw InvalidArgument("logistic: need examples of both classes");

    LRModel m;
    m.weights.assign(d, 0.0);
    std::vector<double> gw(d);
    for (std::uint32_t e = 0; e < epochs; ++e) {
        std::fill(gw.begin(), gw.end(), 0.0);
        double gb = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            auto x = features.row(i);
            const double r = m.predict(x) - labels[i];
            gb += r;
            for (std::size_t k = 0; k < d; ++k) gw[k] += r * x[k];
        }
        const double inv = 1.0 / static_cast<double>(n);
        for (std::size_t k = 0; k < d; ++k) m.weights[k] -= lr * (gw[k] * inv + l2 * m.weights[k]);
        m.bias -= lr * gb * inv;
    }
    return m;
}

inline void hadamard(std::span<const double> a, std::span<const double> b, std::span<double> out) noexcept {
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
}

/// Shuffles the triples (seeded), fits logistic regression on Hadamard
/// features of the first split_fraction of them (positive and negative edge
/// per triple) and returns the paired AUC of predicted probabilities on the
/// rest.
inline double auc_lr(const Matrix<double>& emb, std::span<const EvalTriple> triples, const LrConfig& cfg,
                     std::uint64_t seed) {
    if (triples.size() < 4) throw InvalidArgument("auc_lr needs at least 4 triples");
    check_covers(emb, triples);
    std::vector<EvalTriple> order(triples.begin(), triples.end());
    Rng rng(seed);
    shuffle(order, rng);
    const auto n_train = static_cast<std::size_t>(std::floor(cfg.split_fraction * order.size() + 0.5));
    if (n_train == 0 || n_train >= order.size()) throw InvalidArgument("auc_lr: degenerate train/test split");

    const std::size_t d = emb.cols();
    Matrix<double> x(2 * n_train, d);
    std::vector<int> y(2 * n_train);
    for (std::size_t i = 0; i < n_train; ++i) {
        const auto& t = order[i];
        hadamard(emb.row(t.center), emb.row(t.positive), x.row(2 * i));
        hadamard(emb.row(t.center), emb.row(t.negative), x.row(2 * i + 1));
        y[2 * i] = 1;
        y[2 * i + 1] = 0;
    }
    const LRModel model = train_logistic(x, y, cfg.learning_rate, cfg.epochs, cfg.l2);

    std::vector<double> pos, neg, buf(d);
    for (std::size_t i = n_train; i < order.size(); ++i) {
        const auto& t = order[i];
        hadamard(emb.row(t.center), emb.row(t.positive), buf);
        pos.push_back(model.predict(buf));
        hadamard(emb.row(t.center), emb.row(t.negative), buf);
        neg.push_back(model.predict(buf));
    }
    return auc_from_scores(pos, neg);
}

// -----------------------------------------------------------------------------
// Text Matching baseline
// -----------------------------------------------------------------------------

struct WordVectors {
    std::unordered_map<std::string, std::size_t> index;
    Matrix<double> vectors;

    std::size_t dim() const noexcept { return vectors.cols(); }
};

/// GloVe text format: "word v1 ... v_d" per line. A word2vec-style
/// "<count> <dim>" first line is tolerated and skipped.
inline WordVectors load_word_vectors(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open word vectors '" + path + "'");
    std::vector<std::string> words;
    std::vector<double> values;
    std::size_t dim = 0;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ls(line);
        std::string word;
        if (!(ls >> word)) continue;
        std::vector<double> row;
        double v;
        while (ls >> v) row.push_back(v);
        if (lineno == 1 && row.size() == 1) continue;  // word2vec header
        if (row.empty()) throw ParseError(path, lineno, "word without vector");
        if (dim == 0) dim = row.size();
        if (row.size() != dim) throw ParseError(path, lineno, "inconsistent vector dimension");
        words.push_back(word);
        values.insert(values.end(), row.begin(), row.end());
    }
    if (dim == 0) throw ParseError(path, lineno, "no vectors");
    WordVectors wv;
    wv.vectors = Matrix<double>(words.size(), dim);
    std::copy(values.begin(), values.end(), wv.vectors.flat().begin());
    for (std::size_t i = 0; i < words.size(); ++i) wv.index.emplace(words[i], i);
    return wv;
}

/// Mean of the available word vectors per node; nodes whose words are all
/// missing (or that have no text) get the zero vector.
inline Matrix<double> text_matching_embed(const std::vector<std::optional<Tokens>>& texts, const WordVectors& wv) {
    Matrix<double> out(texts.size(), wv.dim());
    for (std::size_t v = 0; v < texts.size(); ++v) {
        if (!texts[v]) continue;
        std::size_t hits = 0;
        auto row = out.row(v);
        for (const auto& tok : *texts[v]) {
            auto it = wv.index.find(tok);
            if (it == wv.index.end()) continue;
            auto src = wv.vectors.row(it->second);
            for (std::size_t k = 0; k < row.size(); ++k) row[k] += src[k];
            ++hits;
        }
        if (hits)
            for (double& x : row) x /= static_cast<double>(hits);
    }
    return out;
}

// -----------------------------------------------------------------------------
// Zero-shot protocol
// -----------------------------------------------------------------------------

struct UnseenNode {
    NodeId node = 0;                       // index in the original graph
    std::vector<NodeId> removed_partners;  // original indices
};

struct ZeroShotSplit {
    Graph train_graph;
    /// train index -> original index.
    std::vector<NodeId> to_original;
    /// original index -> train index, or kUnreached for removed nodes.
    std::vector<std::uint32_t> to_train;
    std::vector<UnseenNode> unseen;
};

inline std::size_t zero_shot_count(std::size_t nodes, double fraction) {
    // The epsilon keeps exact products such as 0.005 * 1000 from rounding up.
    return static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(nodes) - 1e-9));
}

/// Removes ceil(fraction * |V|) uniformly chosen nodes and their edges.
inline ZeroShotSplit zero_shot_split(const Graph& g, double fraction, std::uint64_t seed) {
    if (!(fraction >= 0.0 && fraction < 1.0)) throw InvalidArgument("zero-shot fraction must lie in [0, 1)");
    const std::size_t n = g.node_count();
    const std::size_t m = std::min(n, zero_shot_count(n, fraction));
    std::vector<NodeId> perm(n);
    for (NodeId v = 0; v < n; ++v) perm[v] = v;
    Rng rng(seed);
    shuffle(perm, rng);
    std::vector<bool> removed(n, false);
    for (std::size_t i = 0; i < m; ++i) removed[perm[i]] = true;

    ZeroShotSplit out;
    out.to_train.assign(n, kUnreached);
    std::vector<std::string> ids;
    for (NodeId v = 0; v < n; ++v) {
        if (removed[v]) {
            out.unseen.push_back({v, {g.neighbors(v).begin(), g.neighbors(v).end()}});
            continue;
        }
        out.to_train[v] = static_cast<std::uint32_t>(out.to_original.size());
        out.to_original.push_back(v);
        ids.push_back(g.external_id(v));
    }
    std::vector<Edge> edges;
    for (const auto& e : g.edges())
        if (!removed[e.u] && !removed[e.v]) edges.push_back({out.to_train[e.u], out.to_train[e.v]});
    out.train_graph = Graph::from_edges(std::move(ids), std::move(edges));
    return out;
}

/// Triples (original indices) for the unseen nodes: a removed-edge partner
/// that survived in the train graph, and a surviving node not adjacent to
/// the unseen node in the original graph.
inline EvalTriples build_zero_shot_triples(const Graph& original, const ZeroShotSplit& split, std::uint64_t seed) {
    Rng rng(seed);
    EvalTriples out;
    for (const auto& u : split.unseen) {
        std::vector<NodeId> partners;
        for (NodeId p : u.removed_partners)
            if (split.to_train[p] != kUnreached) partners.push_back(p);
        if (partners.empty()) {
            ++out.skipped;
            continue;
        }
        NodeId pos = partners[uniform_index(rng, partners.size())];
        auto neg = detail::pick_negative(
            original.node_count(), split.to_original,
            [&](NodeId v) { return v != u.node && !original.has_edge(u.node, v); }, rng);
        if (!neg) {
            ++out.skipped;
            continue;
        }
        out.triples.push_back({u.node, pos, *neg});
    }
    return out;
}

// -----------------------------------------------------------------------------
// Report
// -----------------------------------------------------------------------------

struct EvalReport {
    double auc_lr = 0.0;
    double auc_pair = 0.0;
    std::size_t triple_count = 0;
    std::size_t skipped = 0;
    /// Echo of the resolved configuration, in insertion order.
    std::vector<std::pair<std::string, std::string>> config;

    /// Single tab-separated record: auc_lr, auc_pair, triples, skipped, then
    /// key=value config entries.
    std::string tsv() const {
        std::ostringstream s;
        s.precision(6);
        s << std::fixed << auc_lr << '\t' << auc_pair << '\t' << triple_count << '\t' << skipped;
        for (const auto& [k, v] : config) s << '\t' << k << '=' << v;
        return s.str();
    }

    std::string summary() const {
        std::ostringstream s;
        s.precision(4);
        s << std::fixed << "AUC_LR   " << auc_lr << "\nAUC_pair " << auc_pair << "\ntriples  " << triple_count
          << " (skipped " << skipped << ")\n";
        return s.str();
    }
};

} // namespace tgeps
