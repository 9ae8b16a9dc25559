// tgeps command-line front end.
//
//   tgeps split | sample-ps | sample-rw | stats | ratio | train | train-tge |
//         eval | zero-shot | generate
//
// Every subcommand writes its resolved configuration as JSON next to its
// outputs. Runs with --threads 1 are byte-reproducible.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tgeps/tgeps.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace tgeps;

namespace {

enum ExitCode { kOk = 0, kFailure = 1, kInvalid = 3, kParse = 4, kIo = 5 };

struct Common {
    std::uint64_t seed = 1;
    unsigned threads = 1;
    std::string format = "tsv";
};

void add_common(CLI::App* app, Common& c, bool with_format = false) {
    app->add_option("--seed", c.seed, "Master seed")->capture_default_str();
    app->add_option("--threads", c.threads, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
    if (with_format)
        app->add_option("--format", c.format, "Report format")->capture_default_str()->check(
            CLI::IsMember({"tsv", "json"}));
}

json common_json(const std::string& command, const Common& c) {
    json j;
    j["command"] = command;
    j["seed"] = c.seed;
    j["threads"] = c.threads;
    return j;
}

void write_json(const fs::path& path, const json& j) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << j.dump(2) << '\n';
    if (!out) throw IoError("write failure on '" + path.string() + "'");
}

/// Config for a single-file output goes to "<file>.config.json".
fs::path config_beside(const std::string& file) { return fs::path(file + ".config.json"); }

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory '" + dir.string() + "': " + ec.message());
}

struct GraphInput {
    std::string edges;
    std::string nodes;

    void add(CLI::App* app, const std::string& flag = "--edges", const std::string& help = "Edge list") {
        app->add_option(flag, edges, help)->required();
        app->add_option("--nodes", nodes, "Node list fixing node order (keeps isolated nodes)");
    }

    Graph load() const {
        std::vector<std::string> order;
        if (!nodes.empty()) order = load_node_list(nodes);
        auto lg = load_edge_list(edges, order);
        if (lg.self_loops || lg.duplicate_edges)
            std::cerr << "note: " << edges << ": dropped " << lg.self_loops << " self-loops, " << lg.duplicate_edges
                      << " duplicate edges\n";
        return std::move(lg.graph);
    }

    void echo(json& j) const {
        j["edges"] = edges;
        j["nodes"] = nodes;
    }
};

struct SgnsFlags {
    TrainConfig cfg;

    void add(CLI::App* app) {
        app->add_option("--dim", cfg.dim, "Embedding dimension")->capture_default_str();
        app->add_option("--epochs", cfg.epochs, "Passes over the pairs")->capture_default_str();
        app->add_option("--lr", cfg.learning_rate, "AdaGrad learning rate")->capture_default_str();
        app->add_option("--eps", cfg.eps, "AdaGrad epsilon")->capture_default_str();
        app->add_option("--l2", cfg.l2, "L2 coefficient")->capture_default_str();
        app->add_option("--neg", cfg.n_neg, "Negatives per pair")->capture_default_str();
    }

    TrainConfig resolved(const Common& c) const {
        TrainConfig t = cfg;
        t.seed = derive_seed(c.seed, stage::train);
        t.threads = c.threads;
        t.validate();
        return t;
    }

    static void echo(json& j, const TrainConfig& t) {
        j["dim"] = t.dim;
        j["epochs"] = t.epochs;
        j["lr"] = t.learning_rate;
        j["eps"] = t.eps;
        j["l2"] = t.l2;
        j["neg"] = t.n_neg;
        j["train_seed"] = t.seed;
    }
};

struct EncoderFlags {
    EncoderDims dims;
    bool no_char = false;
    bool no_word = false;
    std::string pooling = "mean";
    std::size_t min_count = 1;
    std::size_t center_batch = 10;

    void add(CLI::App* app) {
        app->add_option("--char-dim", dims.char_dim)->capture_default_str();
        app->add_option("--char-hidden", dims.char_hidden)->capture_default_str();
        app->add_option("--word-dim", dims.word_dim)->capture_default_str();
        app->add_option("--word-hidden", dims.word_hidden)->capture_default_str();
        app->add_option("--max-len", dims.max_len, "Max words per node text")->capture_default_str();
        app->add_flag("--no-char", no_char, "Disable the character path");
        app->add_flag("--no-word", no_word, "Disable the word-embedding path");
        app->add_option("--pooling", pooling)->capture_default_str()->check(CLI::IsMember({"mean", "final"}));
        app->add_option("--min-count", min_count, "Words rarer than this map to <unk>")->capture_default_str();
        app->add_option("--center-batch", center_batch, "Pairs per encoder pass")->capture_default_str();
    }

    TgeConfig resolved(const TrainConfig& train) const {
        TgeConfig c;
        c.encoder = dims;
        c.encoder.dim = train.dim;
        c.encoder.use_char = !no_char;
        c.encoder.use_word = !no_word;
        c.encoder.pooling = pooling == "final" ? Pooling::final_state : Pooling::mean;
        c.encoder.validate();
        c.train = train;
        c.min_count = min_count;
        c.center_batch = center_batch;
        return c;
    }

    static void echo(json& j, const TgeConfig& c) {
        j["char_dim"] = c.encoder.char_dim;
        j["char_hidden"] = c.encoder.char_hidden;
        j["word_dim"] = c.encoder.word_dim;
        j["word_hidden"] = c.encoder.word_hidden;
        j["max_len"] = c.encoder.max_len;
        j["use_char"] = c.encoder.use_char;
        j["use_word"] = c.encoder.use_word;
        j["pooling"] = c.encoder.pooling == Pooling::mean ? "mean" : "final";
        j["min_count"] = c.min_count;
        j["center_batch"] = c.center_batch;
    }
};

struct WalkFlags {
    WalkParams params;
    std::uint32_t walks = 10;
    std::uint32_t window = 10;

    void add(CLI::App* app) {
        app->add_option("--walk-len", params.length, "Walk length L")->capture_default_str();
        app->add_option("--walks", walks, "Walks per node T")->capture_default_str();
        app->add_option("--window", window, "Window size k per side")->capture_default_str();
        app->add_option("--p", params.p, "Return parameter")->capture_default_str();
        app->add_option("--q", params.q, "In-out parameter")->capture_default_str();
    }

    void echo(json& j) const {
        j["length"] = params.length;
        j["walks"] = walks;
        j["window"] = window;
        j["p"] = params.p;
        j["q"] = params.q;
    }
};

/// Prints a report in the selected format and mirrors it to `out_file`.
void emit_report(const std::string& text, const std::string& out_file) {
    std::cout << text;
    if (!out_file.empty()) {
        std::ofstream out(out_file, std::ios::binary);
        if (!out) throw IoError("cannot write '" + out_file + "'");
        out << text;
        if (!out) throw IoError("write failure on '" + out_file + "'");
    }
}

std::string format_report(const EvalReport& r, const std::string& format) {
    if (format == "json") {
        json j;
        j["auc_lr"] = r.auc_lr;
        j["auc_pair"] = r.auc_pair;
        j["triples"] = r.triple_count;
        j["skipped"] = r.skipped;
        json cfg;
        for (const auto& [k, v] : r.config) cfg[k] = v;
        j["config"] = cfg;
        return j.dump(2) + "\n";
    }
    return r.tsv() + "\n" + r.summary();
}

double lr_auc_or_nan(const Matrix<double>& emb, std::span<const EvalTriple> triples, const LrConfig& cfg,
                     std::uint64_t seed) {
    if (triples.size() < 4) {
        std::cerr << "warning: " << triples.size() << " triples; AUC_LR needs at least 4, reported as nan\n";
        return std::numeric_limits<double>::quiet_NaN();
    }
    return auc_lr(emb, triples, cfg, seed);
}

struct LrFlags {
    LrConfig cfg;

    void add(CLI::App* app) {
        app->add_option("--lr-split", cfg.split_fraction, "Fraction of triples used to fit the classifier")
            ->capture_default_str();
        app->add_option("--lr-epochs", cfg.epochs)->capture_default_str();
        app->add_option("--lr-rate", cfg.learning_rate)->capture_default_str();
        app->add_option("--lr-l2", cfg.l2)->capture_default_str();
    }

    void echo(EvalReport& r) const {
        r.config.emplace_back("lr_split", std::to_string(cfg.split_fraction));
        r.config.emplace_back("lr_epochs", std::to_string(cfg.epochs));
        r.config.emplace_back("lr_rate", std::to_string(cfg.learning_rate));
        r.config.emplace_back("lr_l2", std::to_string(cfg.l2));
    }
};

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Pairs Sampling and text-driven graph embedding toolkit"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all");

    // split -----------------------------------------------------------------
    Common split_c;
    GraphInput split_g;
    double keep = 0.5;
    std::string split_out;
    auto* split = app.add_subcommand("split", "Keep a random fraction of edges; the rest become held-out");
    split_g.add(split);
    split->add_option("--keep", keep, "Fraction of edges kept for training")->capture_default_str();
    split->add_option("--out", split_out, "Output directory")->required();
    add_common(split, split_c);

    // sample-ps -------------------------------------------------------------
    Common ps_c;
    GraphInput ps_g;
    std::uint32_t ps_order = 2, ps_reps = 10;
    std::string ps_out;
    auto* sample_ps = app.add_subcommand("sample-ps", "Pairs Sampling over every node's neighborhood");
    ps_g.add(sample_ps);
    sample_ps->add_option("--order", ps_order, "Max neighborhood order O")->capture_default_str();
    sample_ps->add_option("--reps", ps_reps, "Repetitions per node N")->capture_default_str();
    sample_ps->add_option("--out", ps_out, "Pairs file")->required();
    add_common(sample_ps, ps_c);

    // sample-rw -------------------------------------------------------------
    Common rw_c;
    GraphInput rw_g;
    WalkFlags rw_w;
    std::string rw_out, rw_walks_out;
    auto* sample_rw = app.add_subcommand("sample-rw", "Random walks plus window pair extraction");
    rw_g.add(sample_rw);
    rw_w.add(sample_rw);
    sample_rw->add_option("--out", rw_out, "Pairs file")->required();
    sample_rw->add_option("--walks-out", rw_walks_out, "Also write the walks");
    add_common(sample_rw, rw_c);

    // stats -----------------------------------------------------------------
    Common st_c;
    GraphInput st_g;
    WalkFlags st_w;
    std::string st_out, st_beta_out;
    auto* stats = app.add_subcommand("stats", "Per-node alpha and beta statistics of random-walk sampling");
    st_g.add(stats);
    st_w.add(stats);
    stats->add_option("--out", st_out, "Per-node alpha table")->required();
    stats->add_option("--beta-out", st_beta_out, "Per-center beta distribution");
    add_common(stats, st_c, true);

    // ratio -----------------------------------------------------------------
    Common ra_c;
    GraphInput ra_g;
    WalkFlags ra_w;
    std::uint32_t ra_order = 2, ra_reps = 10;
    std::optional<double> ra_degree;
    auto* ratio = app.add_subcommand("ratio", "RW-to-PS sample ratio (2L-k-1)kT/(N O d)");
    ratio->add_option("--edges", ra_g.edges, "Edge list (supplies the average degree)");
    ratio->add_option("--nodes", ra_g.nodes, "Node list");
    ratio->add_option("--avg-degree", ra_degree, "Average degree, instead of --edges");
    ra_w.add(ratio);
    ratio->add_option("--order", ra_order)->capture_default_str();
    ratio->add_option("--reps", ra_reps)->capture_default_str();
    add_common(ratio, ra_c, true);

    // train -----------------------------------------------------------------
    Common tr_c;
    GraphInput tr_g;
    SgnsFlags tr_f;
    std::string tr_pairs, tr_out;
    auto* train = app.add_subcommand("train", "SkipGram with negative sampling on a pairs file");
    tr_g.add(train);
    train->add_option("--pairs", tr_pairs, "Pairs file")->required();
    train->add_option("--out", tr_out, "Embedding file")->required();
    tr_f.add(train);
    add_common(train, tr_c);

    // train-tge -------------------------------------------------------------
    Common tg_c;
    GraphInput tg_g;
    SgnsFlags tg_f;
    EncoderFlags tg_e;
    std::string tg_pairs, tg_texts, tg_out;
    auto* train_tge = app.add_subcommand("train-tge", "Train the text encoder against context embeddings");
    tg_g.add(train_tge);
    train_tge->add_option("--texts", tg_texts, "Node-text file")->required();
    train_tge->add_option("--pairs", tg_pairs, "Pairs file")->required();
    train_tge->add_option("--out", tg_out, "Output directory")->required();
    tg_f.add(train_tge);
    tg_e.add(train_tge);
    add_common(train_tge, tg_c);

    // eval ------------------------------------------------------------------
    Common ev_c;
    GraphInput ev_g;
    LrFlags ev_lr;
    std::string ev_heldout, ev_emb, ev_out;
    auto* eval = app.add_subcommand("eval", "Link prediction AUC_LR and AUC_pair");
    ev_g.add(eval, "--train", "Training edge list");
    eval->add_option("--heldout", ev_heldout, "Held-out edge list")->required();
    eval->add_option("--emb", ev_emb, "Embedding file")->required();
    eval->add_option("--out", ev_out, "Also write the report here");
    ev_lr.add(eval);
    add_common(eval, ev_c, true);

    // zero-shot -------------------------------------------------------------
    Common zs_c;
    GraphInput zs_g;
    SgnsFlags zs_f;
    EncoderFlags zs_e;
    LrFlags zs_lr;
    double zs_fraction = 0.005;
    std::uint32_t zs_order = 2, zs_reps = 10;
    std::string zs_texts, zs_out, zs_mode = "tge", zs_vectors;
    auto* zero_shot = app.add_subcommand("zero-shot", "Hold out nodes entirely and embed them from text");
    zs_g.add(zero_shot);
    zero_shot->add_option("--texts", zs_texts, "Node-text file")->required();
    zero_shot->add_option("--fraction", zs_fraction, "Fraction of nodes held unseen")->capture_default_str();
    zero_shot->add_option("--mode", zs_mode, "tge, structure (random unseen vectors) or text-matching")
        ->capture_default_str()
        ->check(CLI::IsMember({"tge", "structure", "text-matching"}));
    zero_shot->add_option("--word-vectors", zs_vectors, "GloVe-format vectors (text-matching mode)");
    zero_shot->add_option("--order", zs_order)->capture_default_str();
    zero_shot->add_option("--reps", zs_reps)->capture_default_str();
    zero_shot->add_option("--out", zs_out, "Output directory")->required();
    zs_f.add(zero_shot);
    zs_e.add(zero_shot);
    zs_lr.add(zero_shot);
    add_common(zero_shot, zs_c, true);

    // generate --------------------------------------------------------------
    Common ge_c;
    std::string ge_kind, ge_out;
    synthetic::CitationParams ge_cite;
    synthetic::KeywordGraphParams ge_kw;
    auto* generate = app.add_subcommand("generate", "Write a seeded synthetic graph");
    generate->add_option("kind", ge_kind, "citation or keywords")->required()->check(
        CLI::IsMember({"citation", "keywords"}));
    generate->add_option("--out", ge_out, "Output directory")->required();
    generate->add_option("--node-count", ge_cite.nodes, "citation: nodes")->capture_default_str();
    generate->add_option("--edge-count", ge_cite.edges, "citation: edges")->capture_default_str();
    generate->add_option("--topics", ge_cite.topics, "citation: topics")->capture_default_str();
    generate->add_option("--homophily", ge_cite.homophily, "citation: in-topic probability")->capture_default_str();
    generate->add_option("--closure", ge_cite.closure, "citation: triadic closure probability")
        ->capture_default_str();
    generate->add_option("--text-nodes", ge_kw.nodes, "keywords: nodes")->capture_default_str();
    generate->add_option("--keywords", ge_kw.keywords, "keywords: keyword pool")->capture_default_str();
    generate->add_option("--keywords-per-node", ge_kw.keywords_per_node)->capture_default_str();
    add_common(generate, ge_c);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*split) {
            const Graph g = split_g.load();
            const auto s = derive_seed(split_c.seed, stage::split);
            const auto sp = split_edges(g, keep, s);
            const fs::path dir(split_out);
            ensure_dir(dir);
            write_edge_list((dir / "train.edges").string(), sp.train_graph);
            write_edge_list((dir / "heldout.edges").string(), sp.train_graph, sp.held_out);
            write_node_list((dir / "nodes.txt").string(), g);
            json j = common_json("split", split_c);
            split_g.echo(j);
            j["keep"] = keep;
            j["split_seed"] = s;
            j["train_edges"] = sp.train_graph.edge_count();
            j["heldout_edges"] = sp.held_out.size();
            write_json(dir / "config.json", j);
            std::cerr << "split: " << sp.train_graph.edge_count() << " train, " << sp.held_out.size()
                      << " held-out edges\n";
        } else if (*sample_ps) {
            const Graph g = ps_g.load();
            const auto s = derive_seed(ps_c.seed, stage::sample);
            const auto pairs = ps_sample_pairs(g, ps_order, ps_reps, s, ps_c.threads);
            write_pairs(ps_out, g, pairs);
            json j = common_json("sample-ps", ps_c);
            ps_g.echo(j);
            j["order"] = ps_order;
            j["reps"] = ps_reps;
            j["sample_seed"] = s;
            j["pairs"] = pairs.size();
            write_json(config_beside(ps_out), j);
            std::cerr << "sample-ps: " << pairs.size() << " pairs\n";
        } else if (*sample_rw) {
            const Graph g = rw_g.load();
            const auto s = derive_seed(rw_c.seed, stage::sample);
            const auto walks = generate_walks(g, rw_w.params, rw_w.walks, s, rw_c.threads);
            const auto pairs = extract_window_pairs(walks, rw_w.window);
            write_pairs(rw_out, g, pairs);
            if (!rw_walks_out.empty()) write_walks(rw_walks_out, g, walks);
            json j = common_json("sample-rw", rw_c);
            rw_g.echo(j);
            rw_w.echo(j);
            j["sample_seed"] = s;
            j["walk_count"] = walks.size();
            j["pairs"] = pairs.size();
            j["self_pairs_dropped"] = pairs.self_pairs_dropped;
            write_json(config_beside(rw_out), j);
            std::cerr << "sample-rw: " << walks.size() << " walks, " << pairs.size() << " pairs, "
                      << pairs.self_pairs_dropped << " self-pairs dropped\n";
        } else if (*stats) {
            const Graph g = st_g.load();
            const auto s = derive_seed(st_c.seed, stage::sample);
            const auto walks = generate_walks(g, st_w.params, st_w.walks, s, st_c.threads);
            const auto st = sampling_stats(walks, st_w.window, st_w.walks, g.node_count());
            {
                std::ofstream out(st_out, std::ios::binary);
                if (!out) throw IoError("cannot write '" + st_out + "'");
                out << "# node\talpha\tforeign_windows\tself_pairs\n";
                std::string line;
                for (NodeId v = 0; v < g.node_count(); ++v) {
                    line = g.external_id(v) + '\t';
                    append_double(line, st.alpha[v]);
                    line += '\t' + std::to_string(st.foreign_windows[v]) + '\t' + std::to_string(st.self_pairs[v]);
                    out << line << '\n';
                }
                if (!out) throw IoError("write failure on '" + st_out + "'");
            }
            if (!st_beta_out.empty()) {
                std::ofstream out(st_beta_out, std::ios::binary);
                if (!out) throw IoError("cannot write '" + st_beta_out + "'");
                out << "# center\tneighbor\tbeta\n";
                std::string line;
                for (NodeId v = 0; v < g.node_count(); ++v)
                    for (const auto& [j, b] : st.beta[v]) {
                        line = g.external_id(v) + '\t' + g.external_id(j) + '\t';
                        append_double(line, b);
                        out << line << '\n';
                    }
                if (!out) throw IoError("write failure on '" + st_beta_out + "'");
            }
            double sum = 0.0, mx = 0.0;
            std::size_t nonzero = 0;
            std::uint64_t self = 0;
            for (NodeId v = 0; v < g.node_count(); ++v) {
                sum += st.alpha[v];
                mx = std::max(mx, st.alpha[v]);
                nonzero += st.alpha[v] > 0.0;
                self += st.self_pairs[v];
            }
            const double mean = sum / static_cast<double>(g.node_count());
            json j = common_json("stats", st_c);
            st_g.echo(j);
            st_w.echo(j);
            j["sample_seed"] = s;
            write_json(config_beside(st_out), j);
            if (st_c.format == "json") {
                json r;
                r["nodes"] = g.node_count();
                r["walks"] = walks.size();
                r["alpha_mean"] = mean;
                r["alpha_max"] = mx;
                r["alpha_nonzero"] = nonzero;
                r["self_pairs"] = self;
                std::cout << r.dump(2) << '\n';
            } else {
                std::cout << g.node_count() << '\t' << walks.size() << '\t' << mean << '\t' << mx << '\t' << nonzero
                          << '\t' << self << '\n'
                          << "nodes          " << g.node_count() << "\nwalks          " << walks.size()
                          << "\nalpha mean     " << mean << "\nalpha max      " << mx << "\nalpha > 0      "
                          << nonzero << "\nself pairs     " << self << '\n';
            }
        } else if (*ratio) {
            double d = 0.0;
            if (ra_degree) {
                d = *ra_degree;
            } else if (!ra_g.edges.empty()) {
                d = degree_stats(ra_g.load()).average_degree;
            } else {
                throw InvalidArgument("ratio needs --edges or --avg-degree");
            }
            const double r = sample_ratio(ra_w.params.length, ra_w.window, ra_w.walks, ra_reps, ra_order, d);
            if (ra_c.format == "json") {
                json j;
                j["ratio"] = r;
                j["avg_degree"] = d;
                std::cout << j.dump(2) << '\n';
            } else {
                std::cout << r << '\t' << d << "\nratio      " << r << "\navg degree " << d << '\n';
            }
        } else if (*train) {
            const Graph g = tr_g.load();
            const auto pairs = read_pairs(tr_pairs, g);
            const auto cfg = tr_f.resolved(tr_c);
            const auto res = train_pairs(pairs, g, cfg);
            write_embeddings(tr_out, g.external_ids(), res.table.central);
            json j = common_json("train", tr_c);
            tr_g.echo(j);
            j["pairs"] = tr_pairs;
            SgnsFlags::echo(j, cfg);
            j["epoch_loss"] = res.epoch_loss;
            write_json(config_beside(tr_out), j);
            std::cerr << "train: final loss " << res.final_loss() << '\n';
        } else if (*train_tge) {
            const Graph g = tg_g.load();
            const auto pairs = read_pairs(tg_pairs, g);
            const auto texts = load_node_texts(tg_texts);
            const auto cfg = tg_e.resolved(tg_f.resolved(tg_c));
            const auto tokens = tokenize_node_texts(g, texts);
            const auto model = tge_train(g, tokens, pairs, cfg);
            const fs::path dir(tg_out);
            ensure_dir(dir);
            write_checkpoint((dir / "model.ckpt").string(), model.vocab, model.params);
            write_embeddings((dir / "embeddings.txt").string(), g.external_ids(),
                             encode_all(tokens, model.vocab, model.params));
            json j = common_json("train-tge", tg_c);
            tg_g.echo(j);
            j["texts"] = tg_texts;
            j["pairs"] = tg_pairs;
            SgnsFlags::echo(j, cfg.train);
            EncoderFlags::echo(j, cfg);
            j["epoch_loss"] = model.epoch_loss;
            write_json(dir / "config.json", j);
            std::cerr << "train-tge: vocab " << model.vocab.word_count() << " words, final loss "
                      << (model.epoch_loss.empty() ? 0.0 : model.epoch_loss.back()) << '\n';
        } else if (*eval) {
            std::vector<std::string> order;
            if (!ev_g.nodes.empty()) order = load_node_list(ev_g.nodes);
            EdgeSplit sp;
            sp.train_graph = load_edge_list(ev_g.edges, order).graph;
            {
                // Held-out ids must already be known from the train graph or node list.
                auto held = load_edge_list(ev_heldout, sp.train_graph.external_ids()).graph;
                if (held.node_count() != sp.train_graph.node_count())
                    throw InvalidArgument("held-out edges mention nodes absent from the training graph; pass --nodes");
                sp.held_out = held.edges();
            }
            const auto emb = align_embeddings(read_embeddings(ev_emb), sp.train_graph);
            const auto s = derive_seed(ev_c.seed, stage::eval);
            const auto tri = build_eval_triples(sp, derive_seed(s, 0));
            if (tri.skipped) std::cerr << "warning: " << tri.skipped << " centers had no admissible negative\n";
            if (tri.triples.empty()) throw InvalidArgument("no evaluation triples");
            EvalReport r;
            r.auc_pair = auc_pair(emb, tri.triples);
            r.auc_lr = lr_auc_or_nan(emb, tri.triples, ev_lr.cfg, derive_seed(s, 1));
            r.triple_count = tri.triples.size();
            r.skipped = tri.skipped;
            r.config.emplace_back("seed", std::to_string(ev_c.seed));
            r.config.emplace_back("eval_seed", std::to_string(s));
            ev_lr.echo(r);
            emit_report(format_report(r, ev_c.format), ev_out);
            if (!ev_out.empty()) {
                json j = common_json("eval", ev_c);
                ev_g.echo(j);
                j["heldout"] = ev_heldout;
                j["emb"] = ev_emb;
                j["format"] = ev_c.format;
                j["eval_seed"] = s;
                j["lr_split"] = ev_lr.cfg.split_fraction;
                j["lr_epochs"] = ev_lr.cfg.epochs;
                j["lr_rate"] = ev_lr.cfg.learning_rate;
                j["lr_l2"] = ev_lr.cfg.l2;
                write_json(config_beside(ev_out), j);
            }
        } else if (*zero_shot) {
            const Graph g = zs_g.load();
            const auto texts = load_node_texts(zs_texts);
            const auto s = derive_seed(zs_c.seed, stage::zero_shot);
            const auto zs = zero_shot_split(g, zs_fraction, derive_seed(s, 0));
            const auto tri = build_zero_shot_triples(g, zs, derive_seed(s, 1));
            if (tri.skipped) std::cerr << "warning: " << tri.skipped << " unseen nodes contribute no triple\n";
            if (tri.triples.empty()) throw InvalidArgument("zero-shot split produced no evaluable unseen node");
            const fs::path dir(zs_out);
            ensure_dir(dir);

            const auto train_cfg = zs_f.resolved(zs_c);
            const auto sample_seed = derive_seed(zs_c.seed, stage::sample);
            json j = common_json("zero-shot", zs_c);
            zs_g.echo(j);
            j["texts"] = zs_texts;
            j["fraction"] = zs_fraction;
            j["mode"] = zs_mode;
            j["zero_shot_seed"] = s;
            j["unseen"] = zs.unseen.size();

            Matrix<double> emb;
            if (zs_mode == "text-matching") {
                if (zs_vectors.empty()) throw InvalidArgument("text-matching mode needs --word-vectors");
                emb = text_matching_embed(tokenize_node_texts(g, texts), load_word_vectors(zs_vectors));
                j["word_vectors"] = zs_vectors;
            } else {
                const auto pairs = ps_sample_pairs(zs.train_graph, zs_order, zs_reps, sample_seed, zs_c.threads);
                j["order"] = zs_order;
                j["reps"] = zs_reps;
                j["sample_seed"] = sample_seed;
                SgnsFlags::echo(j, train_cfg);
                if (zs_mode == "tge") {
                    const auto cfg = zs_e.resolved(train_cfg);
                    const auto model = tge_train(zs.train_graph, tokenize_node_texts(zs.train_graph, texts), pairs, cfg);
                    write_checkpoint((dir / "model.ckpt").string(), model.vocab, model.params);
                    emb = encode_all(tokenize_node_texts(g, texts), model.vocab, model.params);
                    EncoderFlags::echo(j, cfg);
                    j["epoch_loss"] = model.epoch_loss;
                } else {
                    const auto res = train_pairs(pairs, zs.train_graph, train_cfg);
                    emb = Matrix<double>(g.node_count(), train_cfg.dim);
                    Rng rng(derive_seed(s, 2));
                    const double a = 0.5 / static_cast<double>(train_cfg.dim);
                    for (NodeId v = 0; v < g.node_count(); ++v) {
                        auto row = emb.row(v);
                        if (zs.to_train[v] == kUnreached) {
                            for (double& x : row) x = uniform_real(rng, -a, a);
                        } else {
                            auto src = res.table.central.row(zs.to_train[v]);
                            std::copy(src.begin(), src.end(), row.begin());
                        }
                    }
                    j["epoch_loss"] = res.epoch_loss;
                }
            }
            write_embeddings((dir / "embeddings.txt").string(), g.external_ids(), emb);
            {
                std::ofstream out(dir / "unseen.txt", std::ios::binary);
                if (!out) throw IoError("cannot write '" + (dir / "unseen.txt").string() + "'");
                for (const auto& u : zs.unseen) out << g.external_id(u.node) << '\n';
            }

            EvalReport r;
            r.auc_pair = auc_pair(emb, tri.triples);
            r.auc_lr = lr_auc_or_nan(emb, tri.triples, zs_lr.cfg, derive_seed(s, 3));
            r.triple_count = tri.triples.size();
            r.skipped = tri.skipped;
            r.config.emplace_back("mode", zs_mode);
            r.config.emplace_back("fraction", std::to_string(zs_fraction));
            r.config.emplace_back("seed", std::to_string(zs_c.seed));
            zs_lr.echo(r);
            emit_report(format_report(r, zs_c.format), (dir / (zs_c.format == "json" ? "report.json" : "report.tsv")).string());
            j["format"] = zs_c.format;
            j["lr_split"] = zs_lr.cfg.split_fraction;
            j["lr_epochs"] = zs_lr.cfg.epochs;
            j["lr_rate"] = zs_lr.cfg.learning_rate;
            j["lr_l2"] = zs_lr.cfg.l2;
            write_json(dir / "config.json", j);
        } else if (*generate) {
            const auto s = derive_seed(ge_c.seed, stage::generate);
            const fs::path dir(ge_out);
            ensure_dir(dir);
            json j = common_json("generate", ge_c);
            j["kind"] = ge_kind;
            j["generate_seed"] = s;
            if (ge_kind == "citation") {
                const Graph g = synthetic::citation_graph(ge_cite, s);
                write_edge_list((dir / "graph.edges").string(), g);
                write_node_list((dir / "nodes.txt").string(), g);
                j["node_count"] = ge_cite.nodes;
                j["edge_count"] = ge_cite.edges;
                j["topics"] = ge_cite.topics;
                j["homophily"] = ge_cite.homophily;
                j["closure"] = ge_cite.closure;
            } else {
                const auto tg = synthetic::keyword_text_graph(ge_kw, s);
                write_edge_list((dir / "graph.edges").string(), tg.graph);
                write_node_list((dir / "nodes.txt").string(), tg.graph);
                write_node_texts((dir / "texts.tsv").string(), tg.texts);
                j["text_nodes"] = ge_kw.nodes;
                j["keywords"] = ge_kw.keywords;
                j["keywords_per_node"] = ge_kw.keywords_per_node;
            }
            write_json(dir / "config.json", j);
        }
    } catch (const ParseError& e) {
        std::cerr << "error: parse: " << e.what() << '\n';
        return kParse;
    } catch (const IoError& e) {
        std::cerr << "error: io: " << e.what() << '\n';
        return kIo;
    } catch (const InvalidArgument& e) {
        std::cerr << "error: invalid argument: " << e.what() << '\n';
        return kInvalid;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kFailure;
    }
    return kOk;
}
