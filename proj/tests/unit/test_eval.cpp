#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <random>
#include <set>

#include "helpers.hpp"

using namespace tgeps;
using namespace testing_support;

namespace {

double brute_auc(const std::vector<double>& pos, const std::vector<double>& neg) {
    long twice = 0;
    for (std::size_t i = 0; i < pos.size(); ++i) twice += pos[i] > neg[i] ? 2 : pos[i] == neg[i] ? 1 : 0;
    return static_cast<double>(twice) / (2.0 * static_cast<double>(pos.size()));
}

Matrix<double> random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> nd(0.0, 1.0);
    Matrix<double> m(rows, cols);
    for (double& x : m.flat()) x = nd(gen);
    return m;
}

} // namespace

// ---- AUC ----------------------------------------------------------------------

TEST(Auc, Examples) {
    std::vector<double> p{0.9, 0.8, 0.7}, n{0.1, 0.2, 0.3};
    EXPECT_DOUBLE_EQ(auc_from_scores(p, n), 1.0);
    EXPECT_DOUBLE_EQ(auc_from_scores(n, p), 0.0);
    EXPECT_DOUBLE_EQ(auc_from_scores(p, p), 0.5);
    std::vector<double> a{1, 2, 3, 4}, b{0, 2, 5, 1};
    EXPECT_DOUBLE_EQ(auc_from_scores(a, b), 2.5 / 4.0);
}

TEST(Auc, MatchesBruteForce) {
    std::mt19937_64 gen(1);
    std::uniform_int_distribution<int> len(1, 100), val(0, 5);
    for (int t = 0; t < 1000; ++t) {
        const int n = len(gen);
        std::vector<double> p(n), q(n);
        for (int i = 0; i < n; ++i) {
            p[i] = val(gen);
            q[i] = val(gen);
        }
        ASSERT_DOUBLE_EQ(auc_from_scores(p, q), brute_auc(p, q));
    }
}

TEST(Auc, SymmetryAndMonotoneInvariance) {
    std::mt19937_64 gen(2);
    std::normal_distribution<double> nd;
    for (int t = 0; t < 50; ++t) {
        std::vector<double> p(40), q(40), ep(40), eq(40);
        for (int i = 0; i < 40; ++i) {
            p[i] = nd(gen);
            q[i] = i % 5 == 0 ? p[i] : nd(gen);
            ep[i] = std::exp(3 * p[i]) + 1;
            eq[i] = std::exp(3 * q[i]) + 1;
        }
        EXPECT_NEAR(auc_from_scores(p, q) + auc_from_scores(q, p), 1.0, 1e-12);
        EXPECT_DOUBLE_EQ(auc_from_scores(ep, eq), auc_from_scores(p, q));
    }
}

TEST(Auc, Errors) {
    std::vector<double> a{1, 2}, b{1};
    EXPECT_THROW(auc_from_scores(a, b), InvalidArgument);
    EXPECT_THROW(auc_from_scores({}, {}), InvalidArgument);
}

TEST(Auc, RandomEmbeddingsNearHalf) {
    const Graph g = sparse_random_graph(3000, 4.0, 3);
    auto split = split_edges(g, 0.5, 4);
    auto tr = build_eval_triples(split, 5);
    auto emb = random_matrix(g.node_count(), 32, 6);
    EXPECT_NEAR(auc_pair(emb, tr.triples), 0.5, 0.05);
    EXPECT_NEAR(auc_lr(emb, tr.triples, {}, 7), 0.5, 0.05);
}

TEST(Auc, PairUsesInnerProducts) {
    Matrix<double> emb(3, 2);
    emb(0, 0) = 1.0;
    emb(1, 0) = 2.0;
    emb(2, 1) = 5.0;
    std::vector<EvalTriple> t{{0, 1, 2}, {0, 2, 1}};
    EXPECT_DOUBLE_EQ(auc_pair(emb, t), 0.5);
    std::vector<EvalTriple> bad{{0, 1, 7}};
    EXPECT_THROW(auc_pair(emb, bad), InvalidArgument);
}

// ---- Triples ------------------------------------------------------------------

TEST(Triples, Invariants) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const Graph g = random_graph(80, 0.06, 10 + seed);
        auto split = split_edges(g, 0.5, seed);
        auto tr = build_eval_triples(split, seed);
        std::set<NodeId> with_heldout;
        for (const auto& e : split.held_out) with_heldout.insert(e.u), with_heldout.insert(e.v);
        EXPECT_EQ(tr.triples.size() + tr.skipped, with_heldout.size());
        std::set<NodeId> centers;
        for (const auto& t : tr.triples) {
            EXPECT_TRUE(centers.insert(t.center).second);
            EXPECT_TRUE(g.has_edge(t.center, t.positive));
            EXPECT_FALSE(split.train_graph.has_edge(t.center, t.positive));
            EXPECT_NE(t.negative, t.center);
            EXPECT_FALSE(g.has_edge(t.center, t.negative));
        }
        EXPECT_EQ(build_eval_triples(split, seed).triples, tr.triples);
    }
}

TEST(Triples, SkipsCentersWithoutNegatives) {
    // In a triangle every other node is a neighbor.
    auto split = split_edges(clique(3), 0.5, 1);
    auto tr = build_eval_triples(split, 1);
    EXPECT_TRUE(tr.triples.empty());
    EXPECT_EQ(tr.skipped, 2u);
    EXPECT_THROW(build_eval_triples(split_edges(clique(3), 1.0, 1), 1), InvalidArgument);
}

// ---- Logistic regression ------------------------------------------------------

TEST(Logistic, LabelFlipNegatesModel) {
    auto x = random_matrix(30, 4, 8);
    std::vector<int> y(30), flipped(30);
    for (int i = 0; i < 30; ++i) {
        y[i] = x(i, 0) + 0.3 * x(i, 1) > 0 ? 1 : 0;
        flipped[i] = 1 - y[i];
    }
    auto a = train_logistic(x, y, 1.0, 200, 1e-4);
    auto b = train_logistic(x, flipped, 1.0, 200, 1e-4);
    for (std::size_t k = 0; k < 4; ++k) EXPECT_NEAR(a.weights[k], -b.weights[k], 1e-10);
    EXPECT_NEAR(a.bias, -b.bias, 1e-10);
    EXPECT_GT(a.weights[0], 0.0);
}

TEST(Logistic, IdenticalFeaturesGiveHalf) {
    Matrix<double> emb(6, 3, 0.4);
    std::vector<EvalTriple> t{{0, 1, 2}, {1, 2, 3}, {2, 3, 4}, {3, 4, 5}, {4, 5, 0}, {5, 0, 1}};
    EXPECT_DOUBLE_EQ(auc_lr(emb, t, {}, 1), 0.5);
}

TEST(Logistic, Errors) {
    Matrix<double> x(2, 1);
    std::vector<int> same{1, 1}, bad{0, 2}, short_y{1};
    EXPECT_THROW(train_logistic(x, same, 1, 1, 0), InvalidArgument);
    EXPECT_THROW(train_logistic(x, bad, 1, 1, 0), InvalidArgument);
    EXPECT_THROW(train_logistic(x, short_y, 1, 1, 0), InvalidArgument);
    Matrix<double> emb(4, 2);
    std::vector<EvalTriple> three{{0, 1, 2}, {1, 2, 3}, {2, 3, 0}};
    EXPECT_THROW(auc_lr(emb, three, {}, 1), InvalidArgument);
}

TEST(Logistic, PipelineMatchesHandComputation) {
    auto emb = random_matrix(12, 3, 9);
    std::vector<EvalTriple> triples;
    for (NodeId c = 0; c < 10; ++c) triples.push_back({c, (c + 1) % 12, (c + 5) % 12});
    LrConfig cfg;
    cfg.epochs = 50;
    const std::uint64_t seed = 77;

    auto order = triples;
    Rng rng(seed);
    shuffle(order, rng);
    std::vector<std::array<double, 3>> xs;
    std::vector<int> ys;
    auto feat = [&](NodeId a, NodeId b) {
        return std::array<double, 3>{emb(a, 0) * emb(b, 0), emb(a, 1) * emb(b, 1), emb(a, 2) * emb(b, 2)};
    };
    for (int i = 0; i < 5; ++i) {
        xs.push_back(feat(order[i].center, order[i].positive));
        ys.push_back(1);
        xs.push_back(feat(order[i].center, order[i].negative));
        ys.push_back(0);
    }
    std::array<double, 3> w{};
    double b = 0.0;
    auto prob = [&](const std::array<double, 3>& x) { return 1.0 / (1.0 + std::exp(-(w[0] * x[0] + w[1] * x[1] + w[2] * x[2] + b))); };
    for (std::uint32_t e = 0; e < cfg.epochs; ++e) {
        std::array<double, 3> gw{};
        double gb = 0.0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            const double r = prob(xs[i]) - ys[i];
            for (int k = 0; k < 3; ++k) gw[k] += r * xs[i][k];
            gb += r;
        }
        for (int k = 0; k < 3; ++k) w[k] -= cfg.learning_rate * (gw[k] / xs.size() + cfg.l2 * w[k]);
        b -= cfg.learning_rate * gb / xs.size();
    }
    std::vector<double> pos, neg;
    for (int i = 5; i < 10; ++i) {
        pos.push_back(prob(feat(order[i].center, order[i].positive)));
        neg.push_back(prob(feat(order[i].center, order[i].negative)));
    }
    EXPECT_DOUBLE_EQ(auc_lr(emb, triples, cfg, seed), brute_auc(pos, neg));
}

// ---- Text matching ------------------------------------------------------------

TEST(TextMatching, MeanOfKnownWords) {
    const auto dir = scratch_dir("glove");
    {
        std::ofstream out(dir + "/v.txt");
        out << "3 2\nheart 1 2\nlung 3 -2\nbrain 0.5 0.5\n";
    }
    auto wv = load_word_vectors(dir + "/v.txt");
    EXPECT_EQ(wv.dim(), 2u);
    std::vector<std::optional<Tokens>> texts{Tokens{"heart"}, Tokens{"heart", "lung", "zzz"}, Tokens{"zzz"},
                                             std::nullopt, Tokens{"lung", "heart"}};
    auto m = text_matching_embed(texts, wv);
    EXPECT_EQ(m(0, 0), 1.0);
    EXPECT_EQ(m(0, 1), 2.0);
    EXPECT_EQ(m(1, 0), 2.0);
    EXPECT_EQ(m(1, 1), 0.0);
    EXPECT_EQ(m(2, 0), 0.0);
    EXPECT_EQ(m(3, 1), 0.0);
    EXPECT_EQ(m(4, 0), m(1, 0));
    EXPECT_EQ(m(4, 1), m(1, 1));
}

TEST(TextMatching, FileErrors) {
    const auto dir = scratch_dir("glove_bad");
    {
        std::ofstream(dir + "/dims.txt") << "a 1 2\nb 1\n";
        std::ofstream(dir + "/empty.txt") << "";
    }
    EXPECT_THROW(load_word_vectors(dir + "/dims.txt"), ParseError);
    EXPECT_THROW(load_word_vectors(dir + "/empty.txt"), ParseError);
    EXPECT_THROW(load_word_vectors(dir + "/none.txt"), IoError);
}

// ---- Zero-shot ----------------------------------------------------------------

TEST(ZeroShot, Counts) {
    EXPECT_EQ(zero_shot_count(2211, 0.005), 12u);
    EXPECT_EQ(zero_shot_count(1000, 0.005), 5u);
    EXPECT_EQ(zero_shot_count(100, 0.0), 0u);
    EXPECT_EQ(zero_shot_count(10, 0.15), 2u);
}

TEST(ZeroShot, SplitRemovesNodesAndEdges) {
    const Graph g = random_graph(200, 0.04, 12);
    auto zs = zero_shot_split(g, 0.05, 3);
    ASSERT_EQ(zs.unseen.size(), 10u);
    EXPECT_EQ(zs.train_graph.node_count(), 190u);
    std::set<NodeId> removed;
    for (const auto& u : zs.unseen) {
        removed.insert(u.node);
        EXPECT_FALSE(zs.train_graph.find(g.external_id(u.node)).has_value());
        EXPECT_EQ(zs.to_train[u.node], kUnreached);
        EXPECT_EQ(u.removed_partners.size(), g.degree(u.node));
    }
    std::size_t kept = 0;
    for (const auto& e : g.edges()) kept += !removed.contains(e.u) && !removed.contains(e.v);
    EXPECT_EQ(zs.train_graph.edge_count(), kept);
    for (const auto& e : zs.train_graph.edges())
        EXPECT_TRUE(g.has_edge(zs.to_original[e.u], zs.to_original[e.v]));
    for (NodeId t = 0; t < zs.to_original.size(); ++t) EXPECT_EQ(zs.to_train[zs.to_original[t]], t);
}

TEST(ZeroShot, FractionZeroIsIdentity) {
    const Graph g = random_graph(50, 0.1, 13);
    auto zs = zero_shot_split(g, 0.0, 1);
    EXPECT_TRUE(zs.unseen.empty());
    EXPECT_EQ(zs.train_graph, g);
    EXPECT_THROW(zero_shot_split(g, 1.0, 1), InvalidArgument);
}

TEST(ZeroShot, TriplesInvariants) {
    const Graph g = random_graph(300, 0.03, 14);
    auto zs = zero_shot_split(g, 0.05, 2);
    auto tr = build_zero_shot_triples(g, zs, 4);
    EXPECT_EQ(tr.triples.size() + tr.skipped, zs.unseen.size());
    for (const auto& t : tr.triples) {
        EXPECT_EQ(zs.to_train[t.center], kUnreached);
        EXPECT_TRUE(g.has_edge(t.center, t.positive));
        EXPECT_NE(zs.to_train[t.positive], kUnreached);
        EXPECT_NE(zs.to_train[t.negative], kUnreached);
        EXPECT_FALSE(g.has_edge(t.center, t.negative));
    }
}

// ---- Report -------------------------------------------------------------------

TEST(Report, TsvAndSummary) {
    EvalReport r;
    r.auc_lr = 0.75;
    r.auc_pair = 0.5;
    r.triple_count = 10;
    r.skipped = 2;
    r.config = {{"seed", "1"}, {"mode", "tge"}};
    EXPECT_EQ(r.tsv(), "0.750000\t0.500000\t10\t2\tseed=1\tmode=tge");
    EXPECT_NE(r.summary().find("AUC_pair 0.5000"), std::string::npos);
}
