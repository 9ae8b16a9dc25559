#include <gtest/gtest.h>

#include <filesystem>

#include "cli_runner.hpp"
#include "helpers.hpp"

using namespace testing_support;
namespace fs = std::filesystem;

namespace {

const std::string kCli = TGEPS_CLI;

CliResult cli(const std::string& args, const std::string& dir) { return run_cli(kCli, args, dir); }

/// generate -> split -> sample-ps -> train -> eval inside `dir`.
void pipeline(const std::string& dir) {
    ASSERT_EQ(cli("generate citation --node-count 150 --edge-count 300 --seed 4 --out '" + dir + "/g'", dir).code, 0);
    ASSERT_EQ(cli("split --edges '" + dir + "/g/graph.edges' --nodes '" + dir + "/g/nodes.txt' --out '" + dir +
                      "/s'",
                  dir)
                  .code,
              0);
    const std::string nodes = " --nodes '" + dir + "/s/nodes.txt'";
    ASSERT_EQ(cli("sample-ps --edges '" + dir + "/s/train.edges'" + nodes + " --out '" + dir + "/pairs.tsv'", dir).code,
              0);
    ASSERT_EQ(cli("train --edges '" + dir + "/s/train.edges'" + nodes + " --pairs '" + dir +
                      "/pairs.tsv' --dim 8 --epochs 2 --out '" + dir + "/emb.txt'",
                  dir)
                  .code,
              0);
    auto ev = cli("eval --train '" + dir + "/s/train.edges'" + nodes + " --heldout '" + dir +
                      "/s/heldout.edges' --emb '" + dir + "/emb.txt' --out '" + dir + "/report.tsv'",
                  dir);
    ASSERT_EQ(ev.code, 0) << ev.err;
    EXPECT_NE(ev.out.find("AUC_pair"), std::string::npos);
}

std::vector<std::pair<std::string, std::string>> tree(const std::string& dir) {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& e : fs::recursive_directory_iterator(dir))
        if (e.is_regular_file()) out.emplace_back(fs::relative(e.path(), dir).string(), slurp(e.path().string()));
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace

TEST(Cli, RatioPrintsSeventy) {
    const auto dir = scratch_dir("cli_ratio");
    auto r = cli("ratio --walk-len 10 --window 5 --walks 1 --reps 1 --order 1 --avg-degree 1", dir);
    EXPECT_EQ(r.code, 0);
    EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "70\t1");
    auto j = cli("ratio --walk-len 10 --window 5 --walks 1 --reps 1 --order 1 --avg-degree 1 --format json", dir);
    EXPECT_NE(j.out.find("\"ratio\": 70.0"), std::string::npos) << j.out;
}

TEST(Cli, DistinctErrors) {
    const auto dir = scratch_dir("cli_errors");
    { std::ofstream(dir + "/bad.edges") << "a b\nlonely\n"; }
    { std::ofstream(dir + "/ok.edges") << "a b\nb c\n"; }

    auto missing = cli("split --edges '" + dir + "/none.edges' --out '" + dir + "/o'", dir);
    auto parse = cli("split --edges '" + dir + "/bad.edges' --out '" + dir + "/o'", dir);
    auto invalid = cli("split --edges '" + dir + "/ok.edges' --keep 0 --out '" + dir + "/o'", dir);
    auto flag = cli("split --edges '" + dir + "/ok.edges' --out '" + dir + "/o' --bogus", dir);
    auto none = cli("", dir);

    EXPECT_NE(missing.code, 0);
    EXPECT_NE(parse.code, 0);
    EXPECT_NE(invalid.code, 0);
    EXPECT_NE(flag.code, 0);
    EXPECT_NE(none.code, 0);
    EXPECT_NE(missing.code, parse.code);
    EXPECT_NE(parse.code, invalid.code);
    EXPECT_NE(missing.code, invalid.code);
    EXPECT_NE(missing.err.find("error: io:"), std::string::npos) << missing.err;
    EXPECT_NE(parse.err.find("bad.edges:2"), std::string::npos) << parse.err;
    EXPECT_NE(invalid.err.find("error: invalid argument:"), std::string::npos) << invalid.err;
    EXPECT_FALSE(flag.err.empty());
}

TEST(Cli, SplitWritesOutputsAndConfig) {
    const auto dir = scratch_dir("cli_split");
    { std::ofstream(dir + "/g.edges") << "# toy\na b\nb c\nc d\nd e\n"; }
    ASSERT_EQ(cli("split --edges '" + dir + "/g.edges' --keep 0.5 --seed 3 --out '" + dir + "/s'", dir).code, 0);
    for (const char* f : {"train.edges", "heldout.edges", "nodes.txt", "config.json"})
        EXPECT_TRUE(fs::exists(dir + "/s/" + f)) << f;
    const auto cfg = slurp(dir + "/s/config.json");
    EXPECT_NE(cfg.find("\"keep\""), std::string::npos);
    EXPECT_NE(cfg.find("\"seed\": 3"), std::string::npos) << cfg;
}

TEST(Cli, PipelineIsByteIdentical) {
    const auto a = scratch_dir("cli_pipe_a");
    const auto b = scratch_dir("cli_pipe_b");
    pipeline(a);
    pipeline(b);
    auto ta = tree(a), tb = tree(b);
    ASSERT_EQ(ta.size(), tb.size());
    for (std::size_t i = 0; i < ta.size(); ++i) {
        EXPECT_EQ(ta[i].first, tb[i].first);
        // Configs echo their own paths; everything else must match exactly.
        if (ta[i].first.find("config.json") != std::string::npos) continue;
        EXPECT_EQ(ta[i].second, tb[i].second) << ta[i].first;
    }
    EXPECT_TRUE(fs::exists(a + "/emb.txt.config.json"));
    EXPECT_TRUE(fs::exists(a + "/report.tsv"));
}

TEST(Cli, TextPipeline) {
    const auto dir = scratch_dir("cli_text");
    ASSERT_EQ(cli("generate keywords --text-nodes 60 --keywords 6 --seed 2 --out '" + dir + "/k'", dir).code, 0);
    const std::string g = " --edges '" + dir + "/k/graph.edges' --nodes '" + dir + "/k/nodes.txt'";
    const std::string small = " --dim 8 --char-dim 3 --char-hidden 3 --word-dim 4 --word-hidden 4 --epochs 1";
    ASSERT_EQ(cli("sample-ps" + g + " --out '" + dir + "/p.tsv'", dir).code, 0);
    auto t = cli("train-tge" + g + " --texts '" + dir + "/k/texts.tsv' --pairs '" + dir + "/p.tsv'" + small +
                     " --out '" + dir + "/m'",
                 dir);
    ASSERT_EQ(t.code, 0) << t.err;
    EXPECT_TRUE(fs::exists(dir + "/m/model.ckpt"));
    EXPECT_TRUE(fs::exists(dir + "/m/embeddings.txt"));

    auto z = cli("zero-shot" + g + " --texts '" + dir + "/k/texts.tsv' --fraction 0.1 --reps 2" + small +
                     " --format json --out '" + dir + "/z'",
                 dir);
    ASSERT_EQ(z.code, 0) << z.err;
    EXPECT_NE(z.out.find("\"auc_pair\""), std::string::npos) << z.out;
    for (const char* f : {"model.ckpt", "embeddings.txt", "unseen.txt", "report.json", "config.json"})
        EXPECT_TRUE(fs::exists(dir + "/z/" + f)) << f;

    auto s = cli("zero-shot" + g + " --texts '" + dir + "/k/texts.tsv' --fraction 0.1 --reps 2 --mode structure" +
                     small + " --out '" + dir + "/zs'",
                 dir);
    EXPECT_EQ(s.code, 0) << s.err;
    auto tm = cli("zero-shot" + g + " --texts '" + dir + "/k/texts.tsv' --mode text-matching --out '" + dir + "/zt'",
                  dir);
    EXPECT_NE(tm.code, 0);
}

TEST(Cli, SamplingAndStats) {
    const auto dir = scratch_dir("cli_rw");
    { std::ofstream(dir + "/g.edges") << "a b\nb c\nc d\nd a\na c\n"; }
    const std::string g = " --edges '" + dir + "/g.edges'";
    auto rw = cli("sample-rw" + g + " --walk-len 6 --walks 2 --window 2 --out '" + dir + "/rw.tsv' --walks-out '" +
                      dir + "/walks.txt'",
                  dir);
    ASSERT_EQ(rw.code, 0) << rw.err;
    const auto walks = slurp(dir + "/walks.txt");
    EXPECT_EQ(std::count(walks.begin(), walks.end(), '\n'), 8);
    auto st = cli("stats" + g + " --walk-len 6 --walks 2 --window 2 --out '" + dir + "/alpha.tsv'", dir);
    EXPECT_EQ(st.code, 0) << st.err;
    EXPECT_TRUE(fs::exists(dir + "/alpha.tsv"));
}
