#pragma once

// Seeded synthetic graphs for experiments and tests.
//
// citation_graph: a growing citation network with topic homophily,
// preferential attachment and triadic closure. Default sizes match the
// 2,211-node / 5,214-edge Cora citation graph.
//
// keyword_text_graph: nodes carry short texts; two nodes are adjacent iff
// their texts share a keyword.

#include <algorithm>
#include <string>
#include <unordered_set>
#include <vector>

#include "tgeps/common.hpp"
#include "tgeps/graph.hpp"
#include "tgeps/text.hpp"

namespace tgeps::synthetic {

struct CitationParams {
    std::size_t nodes = 2211;
    std::size_t edges = 5214;
    std::size_t topics = 7;
    /// Probability that a fresh (non-closure) citation stays in-topic.
    double homophily = 0.85;
    /// Probability that a citation copies a neighbor of an already cited
    /// paper.
    double closure = 0.5;
};

/// `topics_out`, when given, receives each node's topic.
inline Graph citation_graph(const CitationParams& prm, std::uint64_t seed,
                            std::vector<std::size_t>* topics_out = nullptr) {
    const std::size_t n = prm.nodes;
    if (n < 2 || prm.topics == 0) throw InvalidArgument("citation graph needs >= 2 nodes and >= 1 topic");
    if (prm.edges < n - 1 || prm.edges > n * (n - 1) / 2) throw InvalidArgument("edge count out of range");
    Rng rng(seed);

    std::vector<std::size_t> topic(n);
    for (auto& t : topic) t = uniform_index(rng, prm.topics);

    // Each paper after the first cites at least once; the remaining
    // citations go to uniformly chosen papers.
    std::vector<std::size_t> budget(n, 0);
    for (std::size_t v = 1; v < n; ++v) budget[v] = 1;
    for (std::size_t e = n - 1; e < prm.edges; ++e) ++budget[1 + uniform_index(rng, n - 1)];

    // Urns hold each node once plus once per incident edge, so a uniform
    // draw is proportional to degree + 1.
    std::vector<std::vector<NodeId>> topic_urn(prm.topics);
    std::vector<NodeId> urn;
    std::vector<std::vector<NodeId>> adj(n);
    std::unordered_set<std::uint64_t> present;
    auto key = [](NodeId a, NodeId b) { return (std::uint64_t(std::min(a, b)) << 32) | std::max(a, b); };

    std::vector<Edge> edges;
    auto add_edge = [&](NodeId a, NodeId b) {
        edges.push_back(canonical(a, b));
        present.insert(key(a, b));
        adj[a].push_back(b);
        adj[b].push_back(a);
        for (NodeId x : {a, b}) {
            urn.push_back(x);
            topic_urn[topic[x]].push_back(x);
        }
    };

    std::size_t deficit = 0;
    for (NodeId v = 0; v < n; ++v) {
        for (std::size_t c = 0; c < budget[v]; ++c) {
            bool placed = false;
            for (int attempt = 0; attempt < 50 && !placed; ++attempt) {
                NodeId target;
                if (!adj[v].empty() && uniform_unit(rng) < prm.closure) {
                    NodeId via = adj[v][uniform_index(rng, adj[v].size())];
                    target = adj[via][uniform_index(rng, adj[via].size())];
                } else if (!topic_urn[topic[v]].empty() && uniform_unit(rng) < prm.homophily) {
                    const auto& u = topic_urn[topic[v]];
                    target = u[uniform_index(rng, u.size())];
                } else {
                    if (urn.empty()) break;
                    target = urn[uniform_index(rng, urn.size())];
                }
                if (target == v || present.contains(key(v, target))) continue;
                add_edge(v, target);
                placed = true;
            }
            if (!placed) ++deficit;
        }
        urn.push_back(v);
        topic_urn[topic[v]].push_back(v);
    }
    while (deficit > 0) {
        NodeId a = static_cast<NodeId>(uniform_index(rng, n));
        NodeId b = urn[uniform_index(rng, urn.size())];
        if (a == b || present.contains(key(a, b))) continue;
        add_edge(a, b);
        --deficit;
    }

    if (topics_out) *topics_out = topic;
    std::vector<std::string> ids(n);
    for (std::size_t v = 0; v < n; ++v) ids[v] = std::to_string(v);
    return Graph::from_edges(std::move(ids), std::move(edges));
}

struct KeywordGraphParams {
    std::size_t nodes = 1000;
    std::size_t keywords = 200;
    std::size_t keywords_per_node = 2;
    std::size_t filler_words = 400;
    std::size_t min_filler = 3;
    std::size_t max_filler = 6;
};

struct TextGraph {
    Graph graph;
    std::vector<NodeText> texts;
    /// Keyword indices of each node.
    std::vector<std::vector<std::size_t>> node_keywords;
    std::vector<std::string> keywords;
};

/// Distinct random lowercase words of length 5-8 that are not stopwords.
inline std::vector<std::string> random_words(std::size_t count, Rng& rng, std::unordered_set<std::string>& taken) {
    std::vector<std::string> out;
    while (out.size() < count) {
        std::string w(5 + uniform_index(rng, 4), 'a');
        for (char& c : w) c = static_cast<char>('a' + uniform_index(rng, 26));
        if (stopwords().contains(w) || !taken.insert(w).second) continue;
        out.push_back(w);
    }
    return out;
}

inline TextGraph keyword_text_graph(const KeywordGraphParams& prm, std::uint64_t seed) {
    if (prm.keywords_per_node == 0 || prm.keywords_per_node > prm.keywords)
        throw InvalidArgument("keywords per node out of range");
    if (prm.min_filler > prm.max_filler || (prm.max_filler > 0 && prm.filler_words == 0))
        throw InvalidArgument("filler range invalid");
    Rng rng(seed);
    std::unordered_set<std::string> taken;
    TextGraph tg;
    tg.keywords = random_words(prm.keywords, rng, taken);
    const auto filler = random_words(prm.filler_words, rng, taken);

    const std::size_t n = prm.nodes;
    tg.node_keywords.resize(n);
    std::vector<std::vector<NodeId>> members(prm.keywords);
    for (NodeId v = 0; v < n; ++v) {
        auto& kws = tg.node_keywords[v];
        while (kws.size() < prm.keywords_per_node) {
            std::size_t k = uniform_index(rng, prm.keywords);
            if (std::find(kws.begin(), kws.end(), k) == kws.end()) kws.push_back(k);
        }
        std::sort(kws.begin(), kws.end());
        for (auto k : kws) members[k].push_back(v);
    }

    std::vector<Edge> edges;
    for (const auto& m : members)
        for (std::size_t i = 0; i < m.size(); ++i)
            for (std::size_t j = i + 1; j < m.size(); ++j) edges.push_back({m[i], m[j]});

    std::vector<std::string> ids(n);
    tg.texts.resize(n);
    for (NodeId v = 0; v < n; ++v) {
        ids[v] = "t" + std::to_string(v);
        std::vector<std::string> words;
        for (auto k : tg.node_keywords[v]) words.push_back(tg.keywords[k]);
        const std::size_t nf = prm.min_filler + uniform_index(rng, prm.max_filler - prm.min_filler + 1);
        for (std::size_t i = 0; i < nf; ++i) words.push_back(filler[uniform_index(rng, filler.size())]);
        shuffle(words, rng);
        std::string text;
        for (const auto& w : words) text += (text.empty() ? "" : " ") + w;
        tg.texts[v] = {ids[v], text};
    }
    tg.graph = Graph::from_edges(std::move(ids), std::move(edges));
    return tg;
}

} // namespace tgeps::synthetic
