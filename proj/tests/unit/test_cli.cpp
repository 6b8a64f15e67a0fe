#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "helpers.hpp"
#include "vbpi/checkpoint.hpp"
#include "vbpi/cli.hpp"
#include "vbpi/tree_io.hpp"

#include <unistd.h>

using namespace vbpi;

namespace {

struct Result {
  int code = 0;
  std::string out, err;
};

Result Run(std::vector<std::string> args) {
  args.insert(args.begin(), "vbpimix");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  Result r;
  r.code = RunCli(int(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("vbpimix_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  std::string File(const std::string& name, const std::string& content = "") const {
    auto p = (path_ / name).string();
    if (!content.empty()) std::ofstream(p) << content;
    return p;
  }

 private:
  std::filesystem::path path_;
};

std::string Slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::string> Lines(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  return lines;
}

const char* kFasta = ">A\nACGTACGTAA\n>B\nACGTACGTAC\n>C\nACGAACGTTC\n>D\nACGAACTTTC\n";

// FASTA plus a support checkpoint over all three quartets.
struct Fixture {
  TempDir dir;
  std::string fasta = dir.File("data.fa", kFasta);
  std::string trees = dir.File("trees.nwk", "((A,B),C,D);\n((A,C),B,D);\n((A,D),B,C);\n");
  std::string support = dir.File("support.ckpt");

  Fixture() {
    auto r = Run({"build-support", "--trees", trees, "--fasta", fasta, "--out", support});
    REQUIRE(r.code == 0);
  }
};

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("build-support on a single quartet") {
  TempDir dir;
  auto trees = dir.File("q.nwk", "((A,B),(C,D));\n");
  auto out = dir.File("q.ckpt");
  auto r = Run({"build-support", "--trees", trees, "--out", out});
  REQUIRE(r.code == 0);
  auto lines = Lines(r.out);
  CHECK(lines[0] == "taxa 4");
  CHECK(lines[1] == "trees 1 (1 distinct)");
  CHECK(lines[2] == "root_splits 5");
  CHECK(lines[5] == "sbn_parameters 9");
  CHECK(LoadCheckpointFile(out).model.Support().RootSplitCount() == 5);

  auto dup = dir.File("dup.nwk", "((A,B),(C,D));\n((A,B),(C,D));\n");
  auto out2 = dir.File("dup.ckpt");
  r = Run({"build-support", "--trees", dup, "--out", out2});
  REQUIRE(r.code == 0);
  CHECK(Lines(r.out)[1] == "trees 2 (1 distinct)");
  CHECK(LoadCheckpointFile(out2).model.Support() == LoadCheckpointFile(out).model.Support());
}

TEST_CASE("build-support errors") {
  TempDir dir;
  auto empty = dir.File("empty.nwk", "\n");
  auto r = Run({"build-support", "--trees", empty, "--out", dir.File("x.ckpt")});
  CHECK(r.code == 1);
  CHECK(r.err.rfind("error: ", 0) == 0);
  r = Run({"build-support", "--trees", dir.File("missing.nwk"), "--out", dir.File("x.ckpt")});
  CHECK(r.code == 1);
  CHECK(r.err.rfind("error: io: ", 0) == 0);
  auto trees = dir.File("t.nwk", "((A,B),(C,D));\n");
  r = Run({"build-support", "--trees", trees, "--out", dir.File("x.ckpt"), "--branch-mode", "bogus"});
  CHECK(r.code == 1);
  CHECK(r.err.rfind("error: range: ", 0) == 0);
}

TEST_CASE("usage errors exit with 2") {
  auto r = Run({});
  CHECK(r.code == 2);
  CHECK(r.err.rfind("error: usage: ", 0) == 0);
  CHECK(Run({"no-such-command"}).code == 2);
  CHECK(Run({"train"}).code == 2);
  CHECK(Run({"toy", "--out", "x.csv", "--S", "9"}).code == 2);
  CHECK(Run({"--help"}).code == 0);
}

TEST_CASE("train with zero iterations keeps the support model") {
  Fixture f;
  auto model = f.dir.File("m.ckpt");
  auto r = Run({"train", "--fasta", f.fasta, "--support", f.support, "--out", model, "--iters", "0"});
  REQUIRE(r.code == 0);
  CHECK(Lines(r.out)[0] == "iterations 0");
  auto trained = LoadCheckpointFile(model);
  auto initial = LoadCheckpointFile(f.support);
  CHECK(trained.model[0].sbn.Logits() == initial.model[0].sbn.Logits());
  CHECK(trained.model[0].branch.Params() == initial.model[0].branch.Params());
  REQUIRE(trained.state.has_value());
  CHECK(trained.state->iteration == 0);
  CHECK(Slurp(model + ".log.csv") == "iteration,miselbo,beta\n");
}

TEST_CASE("train is reproducible and records S") {
  Fixture f;
  auto a = f.dir.File("a.ckpt"), b = f.dir.File("b.ckpt");
  std::vector<std::string> common{"train", "--fasta", f.fasta, "--support", f.support, "--iters", "20",
                                  "--K", "4", "--S", "3", "--eval-every", "5", "--seed", "9"};
  auto args_a = common, args_b = common;
  args_a.insert(args_a.end(), {"--out", a});
  args_b.insert(args_b.end(), {"--out", b});
  auto ra = Run(args_a), rb = Run(args_b);
  REQUIRE(ra.code == 0);
  REQUIRE(rb.code == 0);
  CHECK(ra.out == rb.out);
  CHECK(Slurp(a) == Slurp(b));
  CHECK(Slurp(a + ".log.csv") == Slurp(b + ".log.csv"));
  CHECK(Lines(ra.out)[1] == "components 3");
  CHECK(LoadCheckpointFile(a).model.Size() == 3);
  auto log = Lines(Slurp(a + ".log.csv"));
  CHECK(log.size() == 5);
  CHECK(log[0] == "iteration,miselbo,beta,bound_0,bound_1,bound_2");
}

TEST_CASE("train resume continues a run") {
  Fixture f;
  auto full = f.dir.File("full.ckpt"), part = f.dir.File("part.ckpt");
  std::vector<std::string> common{"train", "--fasta", f.fasta, "--K", "4", "--seed", "2"};
  auto args = common;
  args.insert(args.end(), {"--support", f.support, "--iters", "10", "--out", full});
  REQUIRE(Run(args).code == 0);
  args = common;
  args.insert(args.end(), {"--support", f.support, "--iters", "4", "--out", part});
  REQUIRE(Run(args).code == 0);
  args = common;
  args.insert(args.end(), {"--resume", part, "--iters", "10", "--out", part});
  auto r = Run(args);
  REQUIRE(r.code == 0);
  CHECK(Lines(r.out)[0] == "iterations 10");
  CHECK(Slurp(full) == Slurp(part));
}

TEST_CASE("train reports incompatible taxa") {
  Fixture f;
  auto other = f.dir.File("other.fa", ">B\nACGT\n>A\nACGT\n>C\nACGT\n>D\nACGT\n");
  auto r = Run({"train", "--fasta", other, "--support", f.support, "--out", f.dir.File("m.ckpt")});
  CHECK(r.code == 1);
  CHECK(r.err.rfind("error: incompatible-checkpoint: ", 0) == 0);
}

TEST_CASE("eval-ml output format") {
  Fixture f;
  auto r = Run({"eval-ml", "--model", f.support, "--fasta", f.fasta, "--samples", "50", "--runs", "1"});
  REQUIRE(r.code == 0);
  auto lines = Lines(r.out);
  REQUIRE(lines.size() == 1);
  CHECK(lines[0].find(' ') == std::string::npos);
  CHECK(std::isfinite(std::stod(lines[0])));
  r = Run({"eval-ml", "--model", f.support, "--fasta", f.fasta, "--samples", "50", "--runs", "3"});
  REQUIRE(r.code == 0);
  CHECK(r.out.find(" (") != std::string::npos);
}

TEST_CASE("eval-kl") {
  Fixture f;
  auto model = LoadCheckpointFile(f.support).model;
  ReferencePosterior ref;
  for (const auto& t : EnumerateUnrooted(4)) {
    ref.topologies.push_back(t);
    ref.probabilities.push_back(std::exp(model.LogProb(t)));
  }
  std::ostringstream text;
  WriteReferencePosterior(text, ref, model.Taxa());
  auto path = f.dir.File("ref.tsv", text.str());
  auto r = Run({"eval-kl", "--model", f.support, "--reference", path});
  REQUIRE(r.code == 0);
  CHECK(r.out == "kl 0.000000\nout_of_support_mass 0.000000\n");
  r = Run({"eval-kl", "--model", f.support, "--reference", f.dir.File("nope.tsv")});
  CHECK(r.code == 1);
  CHECK(r.err.rfind("error: io: ", 0) == 0);
}

TEST_CASE("sample") {
  TempDir dir;
  auto trees = dir.File("q.nwk", "((A,B),(C,D));\n");
  auto single = dir.File("single.ckpt");
  REQUIRE(Run({"build-support", "--trees", trees, "--out", single}).code == 0);
  auto out = dir.File("samples.nwk");
  auto r = Run({"sample", "--model", single, "--n", "25", "--out", out});
  REQUIRE(r.code == 0);
  CHECK(r.out == "samples 25\n");
  auto lines = Lines(Slurp(out));
  REQUIRE(lines.size() == 25);
  auto taxa = testutil::Letters(4);
  auto expected = testutil::Tree("((A,B),C,D);", taxa);
  for (const auto& line : lines) CHECK(ParseNewick(line, taxa).topology == expected);

  Fixture f;
  auto two = f.dir.File("two.ckpt");
  REQUIRE(Run({"train", "--fasta", f.fasta, "--support", f.support, "--out", two, "--iters", "0",
               "--S", "2"}).code == 0);
  auto freq = f.dir.File("freq.tsv");
  r = Run({"sample", "--model", two, "--n", "200", "--out", freq, "--freq", "--seed", "4"});
  REQUIRE(r.code == 0);
  std::map<std::string, size_t> totals;
  for (const auto& line : Lines(Slurp(freq))) {
    auto a = line.find('\t'), b = line.rfind('\t');
    REQUIRE(a != b);
    totals[line.substr(b + 1)] += std::stoul(line.substr(a + 1, b - a - 1));
  }
  CHECK(totals.size() == 3);
  CHECK(totals["0"] == 200);
  CHECK(totals["1"] == 200);
  CHECK(totals["mix"] == 200);
  auto again = f.dir.File("freq2.tsv");
  REQUIRE(Run({"sample", "--model", two, "--n", "200", "--out", again, "--freq", "--seed", "4"}).code == 0);
  CHECK(Slurp(freq) == Slurp(again));
}

TEST_CASE("toy") {
  TempDir dir;
  auto curve = dir.File("curve.csv");
  auto r = Run({"toy", "--n1", "3", "--n2", "4", "--S", "2", "--iters", "500", "--out", curve});
  REQUIRE(r.code == 0);
  auto lines = Lines(r.out);
  CHECK(lines[0].rfind("S 2 K 10 lr ", 0) == 0);
  CHECK(lines.size() == 5);
  auto rows = Lines(Slurp(curve));
  CHECK(rows[0] == "iter,kl");
  CHECK(rows.size() == 1 + 5);
  r = Run({"toy", "--n1", "3", "--n2", "4", "--S", "2", "--K", "4", "--iters", "100", "--out", curve});
  REQUIRE(r.code == 0);
  CHECK(r.out.rfind("S 2 K 4 ", 0) == 0);
  r = Run({"toy", "--S", "1", "--K", "1", "--iters", "100", "--out", curve});
  CHECK(r.code == 1);
  CHECK(r.err.rfind("error: baseline-undefined: ", 0) == 0);
}

TEST_CASE("simulate") {
  TempDir dir;
  auto a = dir.File("a.fa"), b = dir.File("b.fa");
  auto r = Run({"simulate", "--taxa", "6", "--sites", "40", "--seed", "3", "--out", a});
  REQUIRE(r.code == 0);
  CHECK(Lines(r.out)[0] == "taxa 6 sites 40");
  REQUIRE(Run({"simulate", "--taxa", "6", "--sites", "40", "--seed", "3", "--out", b}).code == 0);
  CHECK(Slurp(a) == Slurp(b));
  CHECK(Slurp(a + ".nwk") == Slurp(b + ".nwk"));
  auto alignment = ReadFastaFile(a);
  CHECK(alignment.taxa.Size() == 6);
  CHECK(alignment.rows[0].size() == 40);
  auto tree = ParseNewick(Lines(Slurp(a + ".nwk"))[0], alignment.taxa);
  CHECK_FALSE(tree.topology.IsRooted());
  CHECK(tree.branch_lengths.size() == tree.topology.NodeCount());
  r = Run({"simulate", "--taxa", "2", "--out", a});
  CHECK(r.code == 1);
  CHECK(r.err.rfind("error: unsupported-size: ", 0) == 0);
}

TEST_CASE("parsimony-demo") {
  auto r = Run({"parsimony-demo"});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("total\t5\t5\t6\t6") != std::string::npos);
  CHECK(r.out.find("A→2,*C→1*,G→3,T→3") != std::string::npos);
}

}  // TEST_SUITE
