#pragma once

// Text-driven node encoder. A character BiLSTM summarizes each word, the
// summary is concatenated with the word's own embedding, a word BiLSTM runs
// over the sequence, its outputs are pooled and projected through tanh:
//
//   e_i = tanh(W_proj . pool(BiLSTM_w([e^w ; BiLSTM_c(e^c)])) + b)
//
// Training matches e_i against context lookup rows with the SGNS loss.

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <optional>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "tgeps/common.hpp"
#include "tgeps/graph.hpp"
#include "tgeps/lstm.hpp"
#include "tgeps/sampler.hpp"
#include "tgeps/text.hpp"
#include "tgeps/trainer.hpp"

namespace tgeps {

enum class Pooling { mean, final_state };

struct EncoderDims {
    std::size_t char_dim = 16;
    std::size_t char_hidden = 32;
    std::size_t word_dim = 64;
    std::size_t word_hidden = 64;
    std::size_t dim = 128;
    std::size_t max_len = 128;
    /// Ablations: a disabled path feeds zeros of the same width.
    bool use_char = true;
    bool use_word = true;
    Pooling pooling = Pooling::mean;

    std::size_t word_input() const noexcept { return word_dim + 2 * char_hidden; }

    void validate() const {
        if (!char_dim || !char_hidden || !word_dim || !word_hidden || !dim || !max_len)
            throw InvalidArgument("encoder dimensions must be positive");
        if (!use_char && !use_word) throw InvalidArgument("encoder needs the word path, the char path, or both");
    }

    friend bool operator==(const EncoderDims&, const EncoderDims&) = default;
};

struct TextEncoderParams {
    EncoderDims dims;
    Matrix<double> char_emb;  // |D^c| x char_dim
    Matrix<double> word_emb;  // |D^w| x word_dim
    LstmParams char_fwd, char_bwd;
    LstmParams word_fwd, word_bwd;
    Matrix<double> proj;      // dim x 2*word_hidden
    std::vector<double> proj_b;

    static TextEncoderParams zeros(const EncoderDims& d, std::size_t words, std::size_t chars) {
        d.validate();
        TextEncoderParams p;
        p.dims = d;
        p.char_emb = Matrix<double>(chars, d.char_dim);
        p.word_emb = Matrix<double>(words, d.word_dim);
        p.char_fwd = p.char_bwd = LstmParams(d.char_dim, d.char_hidden);
        p.word_fwd = p.word_bwd = LstmParams(d.word_input(), d.word_hidden);
        p.proj = Matrix<double>(d.dim, 2 * d.word_hidden);
        p.proj_b.assign(d.dim, 0.0);
        return p;
    }

    /// Embeddings U(+-sqrt(3/d)); LSTM and projection weights Xavier
    /// uniform; forget-gate bias 1; other biases 0.
    template <class Engine>
    static TextEncoderParams initialized(const EncoderDims& d, std::size_t words, std::size_t chars, Engine& rng) {
        auto p = zeros(d, words, chars);
        auto fill = [&](std::span<double> v, double a) {
            for (double& x : v) x = uniform_real(rng, -a, a);
        };
        fill(p.char_emb.flat(), std::sqrt(3.0 / static_cast<double>(d.char_dim)));
        fill(p.word_emb.flat(), std::sqrt(3.0 / static_cast<double>(d.word_dim)));
        for (LstmParams* l : {&p.char_fwd, &p.char_bwd, &p.word_fwd, &p.word_bwd}) {
            const double a = std::sqrt(6.0 / static_cast<double>(l->input() + 2 * l->hidden()));
            fill(l->wx.flat(), a);
            fill(l->wh.flat(), a);
            std::fill(l->b.begin() + static_cast<std::ptrdiff_t>(l->hidden()),
                      l->b.begin() + static_cast<std::ptrdiff_t>(2 * l->hidden()), 1.0);
        }
        fill(p.proj.flat(), std::sqrt(6.0 / static_cast<double>(p.proj.rows() + p.proj.cols())));
        return p;
    }

    friend bool operator==(const TextEncoderParams&, const TextEncoderParams&) = default;
};

/// Every dense (non-embedding) parameter block, in a fixed order.
template <class Params>
auto dense_blocks(Params& p) {
    using T = std::conditional_t<std::is_const_v<Params>, const double, double>;
    std::array<std::span<T>, 14> out;
    std::size_t i = 0;
    for (auto* l : {&p.char_fwd, &p.char_bwd, &p.word_fwd, &p.word_bwd}) {
        out[i++] = l->wx.flat();
        out[i++] = l->wh.flat();
        out[i++] = std::span<T>(l->b);
    }
    out[i++] = p.proj.flat();
    out[i++] = std::span<T>(p.proj_b);
    return out;
}

/// Row-sparse gradient accumulator for embedding tables.
class SparseRows {
public:
    explicit SparseRows(std::size_t cols = 0) : cols_(cols) {}

    std::span<double> row(std::uint32_t id) {
        auto [it, inserted] = slot_.emplace(id, static_cast<std::uint32_t>(ids_.size()));
        if (inserted) {
            ids_.push_back(id);
            data_.resize(data_.size() + cols_, 0.0);
        }
        return {data_.data() + static_cast<std::size_t>(it->second) * cols_, cols_};
    }

    std::size_t size() const noexcept { return ids_.size(); }
    std::uint32_t id(std::size_t i) const noexcept { return ids_[i]; }
    std::span<const double> values(std::size_t i) const noexcept { return {data_.data() + i * cols_, cols_}; }

    /// Gradient row for `id`, or empty if the row was never touched.
    std::span<const double> find(std::uint32_t id) const {
        auto it = slot_.find(id);
        if (it == slot_.end()) return {};
        return values(it->second);
    }

    void clear() {
        ids_.clear();
        data_.clear();
        slot_.clear();
    }

private:
    std::size_t cols_;
    std::vector<std::uint32_t> ids_;
    std::vector<double> data_;
    std::unordered_map<std::uint32_t, std::uint32_t> slot_;
};

struct EncoderGrads {
    SparseRows char_emb, word_emb;
    LstmParams char_fwd, char_bwd, word_fwd, word_bwd;
    Matrix<double> proj;
    std::vector<double> proj_b;

    explicit EncoderGrads(const TextEncoderParams& p)
        : char_emb(p.dims.char_dim), word_emb(p.dims.word_dim), char_fwd(p.char_fwd), char_bwd(p.char_bwd),
          word_fwd(p.word_fwd), word_bwd(p.word_bwd), proj(p.proj), proj_b(p.proj_b) {
        zero();
    }

    void zero() {
        char_emb.clear();
        word_emb.clear();
        for (auto b : dense_blocks(*this)) std::fill(b.begin(), b.end(), 0.0);
    }
};

struct EncodedNode {
    std::vector<double> embedding;
    std::size_t token_count = 0;
};

/// Forward activations needed by encoder_backward.
struct EncodeTape {
    std::vector<const TokenIds*> tokens;
    std::vector<LstmTape> char_f, char_b;
    std::vector<Matrix<double>> char_inputs;
    Matrix<double> word_inputs;
    LstmTape word_f, word_b;
    std::vector<double> pooled;
    std::vector<double> embedding;
};

namespace detail {

inline void run_char_lstms(const TextEncoderParams& p, const std::vector<std::uint32_t>& chars,
                           Matrix<double>& inputs, LstmTape& fwd, LstmTape& bwd, std::span<double> out) {
    const std::size_t dc = p.dims.char_dim, hc = p.dims.char_hidden;
    inputs = Matrix<double>(chars.size(), dc);
    for (std::size_t k = 0; k < chars.size(); ++k) {
        auto src = p.char_emb.row(chars[k]);
        std::copy(src.begin(), src.end(), inputs.row(k).begin());
    }
    lstm_forward(p.char_fwd, inputs, false, fwd);
    lstm_forward(p.char_bwd, inputs, true, bwd);
    auto hf = fwd.output(chars.size() - 1);
    auto hb = bwd.output(0);
    std::copy(hf.begin(), hf.end(), out.begin());
    std::copy(hb.begin(), hb.end(), out.begin() + static_cast<std::ptrdiff_t>(hc));
}

} // namespace detail

/// Character-based word embedding: final forward state concatenated with
/// the backward pass's final state (the one at position 0). Length
/// 2 * char_hidden.
inline std::vector<double> char_word_embedding(const std::vector<std::uint32_t>& chars, const TextEncoderParams& p) {
    if (chars.empty()) throw InvalidArgument("character sequence must be nonempty");
    std::vector<double> out(2 * p.dims.char_hidden);
    Matrix<double> inputs;
    LstmTape f, b;
    detail::run_char_lstms(p, chars, inputs, f, b, out);
    return out;
}

/// Encodes a token-id sequence (truncated to max_len). Fills `tape` when
/// given so gradients can be taken with encoder_backward.
inline EncodedNode encode_node(std::span<const TokenIds> tokens, const TextEncoderParams& p,
                               EncodeTape* tape = nullptr) {
    if (tokens.empty()) throw InvalidArgument("cannot encode an empty token sequence");
    const auto& d = p.dims;
    const std::size_t T = std::min(tokens.size(), d.max_len);
    EncodeTape local;
    EncodeTape& t = tape ? *tape : local;
    t.tokens.assign(T, nullptr);
    t.char_f.resize(T);
    t.char_b.resize(T);
    t.char_inputs.resize(T);
    t.word_inputs = Matrix<double>(T, d.word_input());

    for (std::size_t w = 0; w < T; ++w) {
        const TokenIds& tok = tokens[w];
        t.tokens[w] = &tok;
        auto x = t.word_inputs.row(w);
        if (d.use_word) {
            auto src = p.word_emb.row(tok.word);
            std::copy(src.begin(), src.end(), x.begin());
        }
        if (d.use_char) {
            if (tok.chars.empty()) throw InvalidArgument("token without characters");
            detail::run_char_lstms(p, tok.chars, t.char_inputs[w], t.char_f[w], t.char_b[w],
                                   x.subspan(d.word_dim));
        }
    }

    lstm_forward(p.word_fwd, t.word_inputs, false, t.word_f);
    lstm_forward(p.word_bwd, t.word_inputs, true, t.word_b);

    const std::size_t hw = d.word_hidden;
    t.pooled.assign(2 * hw, 0.0);
    if (d.pooling == Pooling::mean) {
        for (std::size_t w = 0; w < T; ++w) {
            auto hf = t.word_f.output(w);
            auto hb = t.word_b.output(w);
            for (std::size_t k = 0; k < hw; ++k) {
                t.pooled[k] += hf[k];
                t.pooled[hw + k] += hb[k];
            }
        }
        for (double& v : t.pooled) v /= static_cast<double>(T);
    } else {
        auto hf = t.word_f.output(T - 1);
        auto hb = t.word_b.output(0);
        std::copy(hf.begin(), hf.end(), t.pooled.begin());
        std::copy(hb.begin(), hb.end(), t.pooled.begin() + static_cast<std::ptrdiff_t>(hw));
    }

    t.embedding.assign(d.dim, 0.0);
    for (std::size_t r = 0; r < d.dim; ++r)
        t.embedding[r] = std::tanh(p.proj_b[r] + dot(p.proj.row(r), std::span<const double>(t.pooled)));
    return {t.embedding, T};
}

/// Accumulates d(loss)/d(params) into `g`, given d(loss)/d(embedding).
inline void encoder_backward(const TextEncoderParams& p, const EncodeTape& t, std::span<const double> d_embedding,
                             EncoderGrads& g) {
    const auto& d = p.dims;
    const std::size_t T = t.tokens.size();
    const std::size_t hw = d.word_hidden, hc = d.char_hidden;

    std::vector<double> d_pre(d.dim), d_pooled(2 * hw, 0.0);
    for (std::size_t r = 0; r < d.dim; ++r) {
        d_pre[r] = d_embedding[r] * (1.0 - t.embedding[r] * t.embedding[r]);
        g.proj_b[r] += d_pre[r];
        auto gw = g.proj.row(r);
        auto w = p.proj.row(r);
        for (std::size_t k = 0; k < 2 * hw; ++k) {
            gw[k] += d_pre[r] * t.pooled[k];
            d_pooled[k] += d_pre[r] * w[k];
        }
    }

    Matrix<double> d_hf(T, hw), d_hb(T, hw);
    if (d.pooling == Pooling::mean) {
        const double inv = 1.0 / static_cast<double>(T);
        for (std::size_t w = 0; w < T; ++w)
            for (std::size_t k = 0; k < hw; ++k) {
                d_hf(w, k) = d_pooled[k] * inv;
                d_hb(w, k) = d_pooled[hw + k] * inv;
            }
    } else {
        for (std::size_t k = 0; k < hw; ++k) {
            d_hf(T - 1, k) = d_pooled[k];
            d_hb(0, k) = d_pooled[hw + k];
        }
    }

    Matrix<double> dx_f, dx_b;
    lstm_backward(p.word_fwd, t.word_f, d_hf, g.word_fwd, dx_f);
    lstm_backward(p.word_bwd, t.word_b, d_hb, g.word_bwd, dx_b);

    for (std::size_t w = 0; w < T; ++w) {
        const TokenIds& tok = *t.tokens[w];
        if (d.use_word) {
            auto gr = g.word_emb.row(tok.word);
            for (std::size_t k = 0; k < d.word_dim; ++k) gr[k] += dx_f(w, k) + dx_b(w, k);
        }
        if (!d.use_char) continue;
        const std::size_t off = d.word_dim;
        const std::size_t L = tok.chars.size();
        Matrix<double> dcf(L, hc), dcb(L, hc);
        for (std::size_t k = 0; k < hc; ++k) {
            dcf(L - 1, k) = dx_f(w, off + k) + dx_b(w, off + k);
            dcb(0, k) = dx_f(w, off + hc + k) + dx_b(w, off + hc + k);
        }
        Matrix<double> dci_f, dci_b;
        lstm_backward(p.char_fwd, t.char_f[w], dcf, g.char_fwd, dci_f);
        lstm_backward(p.char_bwd, t.char_b[w], dcb, g.char_bwd, dci_b);
        for (std::size_t c = 0; c < L; ++c) {
            auto gr = g.char_emb.row(tok.chars[c]);
            for (std::size_t k = 0; k < d.char_dim; ++k) gr[k] += dci_f(c, k) + dci_b(c, k);
        }
    }
}

/// Encodes raw text for a node that was never seen in training. OOV words
/// map to the UNK word row (their characters still feed the char path);
/// empty texts become a single UNK token.
inline EncodedNode encode_unseen(std::string_view raw, const Vocabulary& vocab, const TextEncoderParams& p) {
    auto ids = encode_tokens(preprocess_text(raw), vocab, p.dims.max_len);
    return encode_node(ids, p);
}

// -----------------------------------------------------------------------------
// Training
// -----------------------------------------------------------------------------

/// Optional per-node token sequences, indexed by node.
using NodeTokens = std::vector<std::optional<Tokens>>;

struct TgeConfig {
    EncoderDims encoder;
    TrainConfig train;
    /// Words rarer than this map to UNK during training.
    std::size_t min_count = 1;
    /// Max pairs sharing one encoder forward/backward pass.
    std::size_t center_batch = 10;
};

struct TgeModel {
    Vocabulary vocab;
    TextEncoderParams params;
    Matrix<double> context;
    std::vector<double> epoch_loss;
};

namespace detail {

struct TgeChunk {
    NodeId center;
    std::size_t begin, end;  // into the epoch's positives buffer
};

/// Gradients produced by one chunk, applied after the compute phase.
struct TgeChunkResult {
    explicit TgeChunkResult(const TextEncoderParams& p) : grads(p) {}
    EncoderGrads grads;
    std::vector<NodeId> ctx_ids;
    std::vector<double> ctx_grads;  // ctx_ids.size() x dim
    double loss = 0.0;
    bool used = false;
};

inline void adagrad_encoder(TextEncoderParams& p, TextEncoderParams& acc, const EncoderGrads& g,
                            const TrainConfig& cfg) {
    auto pb = dense_blocks(p);
    auto ab = dense_blocks(acc);
    auto gb = dense_blocks(g);
    // Weights fed only by a disabled path never see a gradient and are left
    // alone (pure L2 decay would drive them subnormal). Blocks 0-5 are the
    // char LSTMs, 6 and 9 the word LSTMs' input weights.
    const auto& d = p.dims;
    const std::size_t in = d.word_input();
    const std::size_t lo = d.use_word ? 0 : d.word_dim;
    const std::size_t hi = d.use_char ? in : d.word_dim;
    for (std::size_t i = d.use_char ? 0 : 6; i < pb.size(); ++i) {
        if ((i == 6 || i == 9) && (lo != 0 || hi != in)) {
            for (std::size_t r = 0; r < pb[i].size() / in; ++r)
                adagrad_step(pb[i].subspan(r * in + lo, hi - lo), gb[i].subspan(r * in + lo, hi - lo),
                             ab[i].subspan(r * in + lo, hi - lo), cfg.learning_rate, cfg.eps, cfg.l2);
            continue;
        }
        adagrad_step(pb[i], gb[i], ab[i], cfg.learning_rate, cfg.eps, cfg.l2);
    }
    for (std::size_t i = 0; i < g.char_emb.size(); ++i)
        adagrad_step(p.char_emb.row(g.char_emb.id(i)), g.char_emb.values(i), acc.char_emb.row(g.char_emb.id(i)),
                     cfg.learning_rate, cfg.eps, cfg.l2);
    for (std::size_t i = 0; i < g.word_emb.size(); ++i)
        adagrad_step(p.word_emb.row(g.word_emb.id(i)), g.word_emb.values(i), acc.word_emb.row(g.word_emb.id(i)),
                     cfg.learning_rate, cfg.eps, cfg.l2);
}

} // namespace detail

/// Tokenized node texts for every graph node; nodes absent from `texts`
/// stay empty (std::nullopt).
inline NodeTokens tokenize_node_texts(const Graph& g, std::span<const NodeText> texts) {
    NodeTokens out(g.node_count());
    for (const auto& t : texts)
        if (auto id = g.find(t.id)) out[*id] = preprocess_text(t.text);
    return out;
}

/// Trains the encoder and the context lookup table on `pairs`. Pairs are
/// grouped by center into chunks of at most center_batch; each chunk costs
/// one encoder pass and one optimizer step. Chunks are computed
/// `threads` at a time against the same parameters and applied in order,
/// so a run is a pure function of its inputs and the thread count.
inline TgeModel tge_train(const Graph& g, const NodeTokens& texts, const PairSet& pairs, const TgeConfig& cfg) {
    cfg.train.validate();
    cfg.encoder.validate();
    if (cfg.center_batch == 0) throw InvalidArgument("center batch must be at least 1");
    if (pairs.empty()) throw InvalidArgument("cannot train on an empty pair set");
    if (texts.size() != g.node_count()) throw InvalidArgument("text table does not match graph size");
    for (const auto& p : pairs.pairs) {
        if (!g.contains(p.center) || !g.contains(p.neighbor))
            throw InvalidArgument("pair references a node outside the graph");
        if (!texts[p.center]) throw InvalidArgument("node '" + g.external_id(p.center) + "' has no text");
    }

    const std::size_t dim = cfg.encoder.dim;
    const auto& tc = cfg.train;
    TgeModel model;
    {
        std::vector<Tokens> corpus;
        for (const auto& t : texts)
            if (t) corpus.push_back(*t);
        model.vocab = build_vocab(corpus, cfg.min_count);
    }
    std::vector<std::vector<TokenIds>> ids(g.node_count());
    for (NodeId v = 0; v < g.node_count(); ++v)
        if (texts[v]) ids[v] = encode_tokens(*texts[v], model.vocab, cfg.encoder.max_len);

    Rng rng(derive_seed(tc.seed, 0));
    model.params = TextEncoderParams::initialized(cfg.encoder, model.vocab.word_count(), model.vocab.char_count(), rng);
    auto acc = TextEncoderParams::zeros(cfg.encoder, model.vocab.word_count(), model.vocab.char_count());
    model.context = Matrix<double>(g.node_count(), dim);
    Matrix<double> ctx_acc(g.node_count(), dim);
    const auto negs = build_negative_sampler(g);

    // Positives grouped by center.
    std::vector<std::size_t> offsets(g.node_count() + 1, 0);
    for (const auto& p : pairs.pairs) ++offsets[p.center + 1];
    for (std::size_t i = 0; i < g.node_count(); ++i) offsets[i + 1] += offsets[i];
    std::vector<NodeId> positives(pairs.size());
    {
        std::vector<std::size_t> cur(offsets.begin(), offsets.end() - 1);
        for (const auto& p : pairs.pairs) positives[cur[p.center]++] = p.neighbor;
    }

    const unsigned workers = tc.threads;
    std::vector<Rng> worker_rng;
    for (unsigned w = 0; w < workers; ++w) worker_rng.emplace_back(derive_seed(tc.seed, 100 + w));
    std::vector<detail::TgeChunkResult> results;
    for (unsigned w = 0; w < workers; ++w) results.emplace_back(model.params);

    auto compute = [&](const detail::TgeChunk& ch, const std::vector<NodeId>& pos, Rng& wrng,
                       detail::TgeChunkResult& out) {
        out.grads.zero();
        out.ctx_ids.clear();
        out.ctx_grads.clear();
        out.loss = 0.0;
        out.used = true;
        EncodeTape tape;
        encode_node(ids[ch.center], model.params, &tape);
        const std::span<const double> e(tape.embedding);
        std::vector<double> g_e(dim, 0.0), g_c(dim), g_p(dim), g_n(tc.n_neg * dim);
        std::vector<std::span<const double>> neg_in(tc.n_neg);
        std::vector<std::span<double>> neg_out(tc.n_neg);
        std::vector<NodeId> neg_ids(tc.n_neg);
        for (std::size_t k = 0; k < tc.n_neg; ++k) neg_out[k] = {g_n.data() + k * dim, dim};
        for (std::size_t i = ch.begin; i < ch.end; ++i) {
            for (std::size_t k = 0; k < tc.n_neg; ++k) {
                neg_ids[k] = negs.draw(wrng);
                neg_in[k] = model.context.row(neg_ids[k]);
            }
            out.loss += sgns_loss_grads_into(e, model.context.row(pos[i]), neg_in, g_c, g_p, neg_out);
            for (std::size_t k = 0; k < dim; ++k) g_e[k] += g_c[k];
            out.ctx_ids.push_back(pos[i]);
            out.ctx_grads.insert(out.ctx_grads.end(), g_p.begin(), g_p.end());
            for (std::size_t k = 0; k < tc.n_neg; ++k) {
                out.ctx_ids.push_back(neg_ids[k]);
                out.ctx_grads.insert(out.ctx_grads.end(), neg_out[k].begin(), neg_out[k].end());
            }
        }
        encoder_backward(model.params, tape, g_e, out.grads);
    };

    auto apply = [&](const detail::TgeChunkResult& r) {
        for (std::size_t i = 0; i < r.ctx_ids.size(); ++i)
            adagrad_step(model.context.row(r.ctx_ids[i]), {r.ctx_grads.data() + i * dim, dim},
                         ctx_acc.row(r.ctx_ids[i]), tc.learning_rate, tc.eps, tc.l2);
        detail::adagrad_encoder(model.params, acc, r.grads, tc);
    };

    std::vector<NodeId> epoch_pos(positives.size());
    std::vector<detail::TgeChunk> chunks;
    for (std::uint32_t epoch = 0; epoch < tc.epochs; ++epoch) {
        chunks.clear();
        for (NodeId c = 0; c < g.node_count(); ++c) {
            std::vector<NodeId> mine(positives.begin() + static_cast<std::ptrdiff_t>(offsets[c]),
                                     positives.begin() + static_cast<std::ptrdiff_t>(offsets[c + 1]));
            shuffle(mine, rng);
            std::copy(mine.begin(), mine.end(), epoch_pos.begin() + static_cast<std::ptrdiff_t>(offsets[c]));
            for (std::size_t b = offsets[c]; b < offsets[c + 1]; b += cfg.center_batch)
                chunks.push_back({c, b, std::min(offsets[c + 1], b + cfg.center_batch)});
        }
        shuffle(chunks, rng);

        double loss_sum = 0.0;
        for (std::size_t base = 0; base < chunks.size(); base += workers) {
            const std::size_t n = std::min<std::size_t>(workers, chunks.size() - base);
            if (n == 1) {
                compute(chunks[base], epoch_pos, worker_rng[0], results[0]);
            } else {
                std::vector<std::jthread> pool;
                for (std::size_t w = 0; w < n; ++w)
                    pool.emplace_back([&, w] { compute(chunks[base + w], epoch_pos, worker_rng[w], results[w]); });
            }
            for (std::size_t w = 0; w < n; ++w) {
                apply(results[w]);
                loss_sum += results[w].loss;
            }
        }
        model.epoch_loss.push_back(loss_sum / static_cast<double>(pairs.size()));
    }
    return model;
}

/// Text-derived embedding for every node with text; rows of nodes without
/// text are left zero.
inline Matrix<double> encode_all(const NodeTokens& texts, const Vocabulary& vocab, const TextEncoderParams& p) {
    Matrix<double> out(texts.size(), p.dims.dim);
    for (std::size_t v = 0; v < texts.size(); ++v) {
        if (!texts[v]) continue;
        auto ids = encode_tokens(*texts[v], vocab, p.dims.max_len);
        auto e = encode_node(ids, p).embedding;
        std::copy(e.begin(), e.end(), out.row(v).begin());
    }
    return out;
}

// -----------------------------------------------------------------------------
// Checkpoint
//
//   bytes  "TGEPSCKP"
//   u32    version (1)
//   u32 x7 char_dim char_hidden word_dim word_hidden dim max_len flags
//          flags: bit0 use_char, bit1 use_word, bit2 final-state pooling
//   u32    word count, then per word: u32 length + bytes (index 0 = "<unk>")
//   u32    char count, then that many bytes (index 0 = UNK placeholder)
//   then 14+2 matrices: char_emb, word_emb, {char_fwd, char_bwd, word_fwd,
//          word_bwd} x {wx, wh, b}, proj, proj_b; each as u64 rows, u64 cols,
//          rows*cols IEEE-754 binary64
//   All integers and doubles little-endian.
// -----------------------------------------------------------------------------

namespace detail {

inline constexpr char kCheckpointMagic[8] = {'T', 'G', 'E', 'P', 'S', 'C', 'K', 'P'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

template <class T>
void put_le(std::ostream& out, T v) {
    static_assert(std::endian::native == std::endian::little, "big-endian hosts unsupported");
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T get_le(std::istream& in, const std::string& path) {
    T v{};
    if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) throw IoError("truncated checkpoint '" + path + "'");
    return v;
}

inline void put_block(std::ostream& out, std::size_t rows, std::size_t cols, std::span<const double> data) {
    put_le<std::uint64_t>(out, rows);
    put_le<std::uint64_t>(out, cols);
    out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size() * sizeof(double)));
}

inline void get_block(std::istream& in, const std::string& path, std::size_t rows, std::size_t cols,
                      std::span<double> data) {
    auto r = get_le<std::uint64_t>(in, path);
    auto c = get_le<std::uint64_t>(in, path);
    if (r != rows || c != cols)
        throw InvalidArgument("checkpoint '" + path + "': inconsistent dimensions (" + std::to_string(r) + "x" +
                              std::to_string(c) + ", expected " + std::to_string(rows) + "x" + std::to_string(cols) +
                              ")");
    if (!in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(data.size() * sizeof(double))))
        throw IoError("truncated checkpoint '" + path + "'");
}

} // namespace detail

inline void write_checkpoint(const std::string& path, const Vocabulary& vocab, const TextEncoderParams& p) {
    using namespace detail;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path + "'");
    out.write(kCheckpointMagic, sizeof kCheckpointMagic);
    put_le(out, kCheckpointVersion);
    const auto& d = p.dims;
    for (std::size_t v : {d.char_dim, d.char_hidden, d.word_dim, d.word_hidden, d.dim, d.max_len})
        put_le<std::uint32_t>(out, static_cast<std::uint32_t>(v));
    put_le<std::uint32_t>(out, (d.use_char ? 1u : 0u) | (d.use_word ? 2u : 0u) |
                                   (d.pooling == Pooling::final_state ? 4u : 0u));
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(vocab.word_count()));
    for (const auto& w : vocab.words()) {
        put_le<std::uint32_t>(out, static_cast<std::uint32_t>(w.size()));
        out.write(w.data(), static_cast<std::streamsize>(w.size()));
    }
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(vocab.char_count()));
    out.write(reinterpret_cast<const char*>(vocab.chars().data()), static_cast<std::streamsize>(vocab.char_count()));

    put_block(out, p.char_emb.rows(), p.char_emb.cols(), p.char_emb.flat());
    put_block(out, p.word_emb.rows(), p.word_emb.cols(), p.word_emb.flat());
    for (const LstmParams* l : {&p.char_fwd, &p.char_bwd, &p.word_fwd, &p.word_bwd}) {
        put_block(out, l->wx.rows(), l->wx.cols(), l->wx.flat());
        put_block(out, l->wh.rows(), l->wh.cols(), l->wh.flat());
        put_block(out, l->b.size(), 1, l->b);
    }
    put_block(out, p.proj.rows(), p.proj.cols(), p.proj.flat());
    put_block(out, p.proj_b.size(), 1, p.proj_b);
    if (!out) throw IoError("write failure on '" + path + "'");
}

struct Checkpoint {
    Vocabulary vocab;
    TextEncoderParams params;
};

inline Checkpoint read_checkpoint(const std::string& path) {
    using namespace detail;
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open checkpoint '" + path + "'");
    char magic[8];
    if (!in.read(magic, 8) || std::memcmp(magic, kCheckpointMagic, 8) != 0)
        throw IoError("'" + path + "' is not a tgeps checkpoint");
    if (auto v = get_le<std::uint32_t>(in, path); v != kCheckpointVersion)
        throw IoError("unsupported checkpoint version " + std::to_string(v));
    EncoderDims d;
    d.char_dim = get_le<std::uint32_t>(in, path);
    d.char_hidden = get_le<std::uint32_t>(in, path);
    d.word_dim = get_le<std::uint32_t>(in, path);
    d.word_hidden = get_le<std::uint32_t>(in, path);
    d.dim = get_le<std::uint32_t>(in, path);
    d.max_len = get_le<std::uint32_t>(in, path);
    const auto flags = get_le<std::uint32_t>(in, path);
    d.use_char = flags & 1u;
    d.use_word = flags & 2u;
    d.pooling = (flags & 4u) ? Pooling::final_state : Pooling::mean;

    Checkpoint ck;
    const auto n_words = get_le<std::uint32_t>(in, path);
    if (n_words == 0) throw IoError("checkpoint '" + path + "' has an empty word vocabulary");
    for (std::uint32_t i = 0; i < n_words; ++i) {
        const auto len = get_le<std::uint32_t>(in, path);
        std::string w(len, '\0');
        if (!in.read(w.data(), len)) throw IoError("truncated checkpoint '" + path + "'");
        if (i == 0) continue;  // UNK, implicit in Vocabulary
        ck.vocab.add_word(w);
    }
    const auto n_chars = get_le<std::uint32_t>(in, path);
    if (n_chars == 0) throw IoError("checkpoint '" + path + "' has an empty char vocabulary");
    std::string chars(n_chars, '\0');
    if (!in.read(chars.data(), n_chars)) throw IoError("truncated checkpoint '" + path + "'");
    for (std::size_t i = 1; i < chars.size(); ++i) ck.vocab.add_char(static_cast<unsigned char>(chars[i]));
    if (ck.vocab.word_count() != n_words || ck.vocab.char_count() != n_chars)
        throw IoError("checkpoint '" + path + "' has duplicate vocabulary entries");

    auto& p = ck.params;
    p = TextEncoderParams::zeros(d, n_words, n_chars);
    get_block(in, path, p.char_emb.rows(), p.char_emb.cols(), p.char_emb.flat());
    get_block(in, path, p.word_emb.rows(), p.word_emb.cols(), p.word_emb.flat());
    for (LstmParams* l : {&p.char_fwd, &p.char_bwd, &p.word_fwd, &p.word_bwd}) {
        get_block(in, path, l->wx.rows(), l->wx.cols(), l->wx.flat());
        get_block(in, path, l->wh.rows(), l->wh.cols(), l->wh.flat());
        get_block(in, path, l->b.size(), 1, l->b);
    }
    get_block(in, path, p.proj.rows(), p.proj.cols(), p.proj.flat());
    get_block(in, path, p.proj_b.size(), 1, p.proj_b);
    return ck;
}

} // namespace tgeps
