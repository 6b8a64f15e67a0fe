#include <doctest.h>

#include <functional>
#include <sstream>

#include "helpers.hpp"
#include "vbpi/alignment.hpp"
#include "vbpi/newick.hpp"
#include "vbpi/tree_io.hpp"

using namespace vbpi;
using testutil::Letters;

namespace {

ErrorKind KindOf(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.Kind();
  }
  FAIL("expected an error");
  return ErrorKind::kContract;
}

Alignment FastaFrom(const std::string& text) {
  std::istringstream in(text);
  return ReadFasta(in);
}

}  // namespace

TEST_SUITE("io") {

TEST_CASE("fasta basics") {
  auto a = FastaFrom(">x\nACGT\n>y\nacgn\n");
  CHECK(a.TaxonCount() == 2);
  CHECK(a.SiteCount() == 4);
  CHECK(a.rows[1] == "ACGN");
  CHECK(StateMask(a.rows[1][3]) == 0xF);
  CHECK(StateMask('-') == 0xF);
  CHECK(StateMask('?') == 0xF);
}

TEST_CASE("fasta header whitespace and wrapped sequences") {
  auto a = FastaFrom(">alpha   \nAC\nGT\n\n>beta\t\nAAAA\n");
  CHECK(a.taxa.Name(0) == "alpha");
  CHECK(a.taxa.Name(1) == "beta");
  CHECK(a.rows[0] == "ACGT");
}

TEST_CASE("fasta errors") {
  CHECK(KindOf([] { FastaFrom(">x\nACGT\n>y\nACG\n"); }) == ErrorKind::kAlignmentShape);
  CHECK(KindOf([] { FastaFrom(">x\nACGT\n>x\nACGT\n"); }) == ErrorKind::kDuplicateTaxon);
  CHECK(KindOf([] { FastaFrom(""); }) == ErrorKind::kEmptyInput);
  CHECK(KindOf([] { FastaFrom(">x\nACGZ\n"); }) == ErrorKind::kDomain);
  CHECK(KindOf([] { FastaFrom("ACGT\n"); }) == ErrorKind::kParse);
}

TEST_CASE("fasta round trip") {
  auto a = FastaFrom(">x\nACGT-\n>y\nNN?AC\n");
  std::ostringstream out;
  WriteFasta(out, a);
  auto b = FastaFrom(out.str());
  CHECK(b.taxa == a.taxa);
  CHECK(b.rows == a.rows);
}

TEST_CASE("site pattern compression keeps multiplicities") {
  auto a = FastaFrom(">x\nAAAC\n>y\nAAAG\n");
  auto p = CompressPatterns(a);
  CHECK(p.PatternCount() == 2);
  CHECK(p.weights[0] + p.weights[1] == 4.0);
  CHECK(p.weights[0] == 3.0);
}

TEST_CASE("newick parsing and rootedness") {
  auto taxa = Letters(4);
  auto unrooted = ParseNewick("((A:0.1,B:0.2):0.3,C:0.4,D:0.5);", taxa);
  CHECK_FALSE(unrooted.topology.IsRooted());
  REQUIRE(unrooted.branch_lengths.size() == unrooted.topology.NodeCount());
  CHECK(unrooted.branch_lengths[0] == doctest::Approx(0.1));
  CHECK(unrooted.branch_lengths[3] == doctest::Approx(0.5));
  auto rooted = ParseNewick("((A,B),(C,D));", taxa);
  CHECK(rooted.topology.IsRooted());
  CHECK(rooted.branch_lengths.empty());
  CHECK(ParseNewick("('A',B,(C,D)x);", taxa).topology ==
        ParseNewick("((A,B),C,D);", taxa).topology);
}

TEST_CASE("newick round trip is lossless") {
  auto taxa = Letters(5);
  std::string text = "((A:0.125,B:0.25):0.5,C:1,(D:0.0625,E:2):0.75);";
  auto parsed = ParseNewick(text, taxa);
  auto again = ParseNewick(ToNewick(parsed.topology, taxa, parsed.branch_lengths), taxa);
  CHECK(again.topology == parsed.topology);
  CHECK(again.branch_lengths == parsed.branch_lengths);
  TaxonSet quoted({"a b", "it's", "c"});
  auto q = ParseNewick(ToNewick(ParseNewick("('a b','it''s',c);", quoted).topology, quoted), quoted);
  CHECK(q.topology.TaxonCount() == 3);
}

TEST_CASE("newick errors") {
  auto taxa = Letters(4);
  CHECK(KindOf([&] { ParseNewick("((A,B),C,D)", taxa); }) == ErrorKind::kParse);
  CHECK(KindOf([&] { ParseNewick("((A,B),C,E);", taxa); }) == ErrorKind::kTaxonSet);
  CHECK(KindOf([&] { ParseNewick("((A,B),C);", taxa); }) == ErrorKind::kTaxonSet);
  CHECK(KindOf([&] { ParseNewick("((A,A),C,D);", taxa); }) == ErrorKind::kDuplicateTaxon);
  CHECK(KindOf([&] { ParseNewick("(A,B,C,D);", taxa); }) == ErrorKind::kParse);
  CHECK(KindOf([&] { ParseNewick("((A,B):x,C,D);", taxa); }) == ErrorKind::kParse);
}

TEST_CASE("tree lists") {
  auto taxa = Letters(4);
  std::istringstream same("((A,B),C,D);\n((A,B),C,D);\n\n((B,A),D,C);\n");
  auto set = ReadTreeList(same, taxa);
  CHECK(set.trees.size() == 3);
  CHECK(set.trees[0] == set.trees[1]);
  CHECK(set.trees[0] == set.trees[2]);

  std::istringstream mixed("((A,B),(C,D));\n((A,C),B,D);\n");
  auto m = ReadTreeList(mixed, taxa);
  CHECK_FALSE(m.trees[0].IsRooted());
  CHECK(m.trees[0] == ParseNewick("((A,B),C,D);", taxa).topology);

  std::istringstream bad("((A,B),C,D);\n((A,B),C,D\n");
  try {
    ReadTreeList(bad, taxa);
    FAIL("expected a parse error");
  } catch (const Error& e) {
    CHECK(e.Kind() == ErrorKind::kParse);
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  std::istringstream mismatch("((A,B),C,X);\n");
  CHECK(KindOf([&] { ReadTreeList(mismatch, taxa); }) == ErrorKind::kTaxonSet);
  std::istringstream empty("\n\n");
  CHECK(KindOf([&] { ReadTreeList(empty, taxa); }) == ErrorKind::kEmptyInput);
}

TEST_CASE("reference posterior files") {
  auto taxa = Letters(4);
  std::istringstream ok("((A,B),C,D);\t0.5\n((A,C),B,D);\t0.5\n");
  auto ref = ReadReferencePosterior(ok, taxa);
  CHECK(ref.topologies.size() == 2);
  std::istringstream partial("((A,B),C,D);\t0.5\n((A,C),B,D);\t0.45\n");
  CHECK(ReadReferencePosterior(partial, taxa).probabilities[1] == 0.45);

  std::istringstream negative("((A,B),C,D);\t-0.5\n");
  CHECK(KindOf([&] { ReadReferencePosterior(negative, taxa); }) == ErrorKind::kRange);
  std::istringstream zero("((A,B),C,D);\t0\n");
  CHECK(KindOf([&] { ReadReferencePosterior(zero, taxa); }) == ErrorKind::kRange);
  std::istringstream dup("((A,B),C,D);\t0.5\n((B,A),(C,D));\t0.25\n");
  CHECK(KindOf([&] { ReadReferencePosterior(dup, taxa); }) == ErrorKind::kDuplicate);
  std::istringstream over("((A,B),C,D);\t0.6\n((A,C),B,D);\t0.6\n");
  CHECK(KindOf([&] { ReadReferencePosterior(over, taxa); }) == ErrorKind::kRange);

  std::ostringstream out;
  WriteReferencePosterior(out, ref, taxa);
  std::istringstream back(out.str());
  auto again = ReadReferencePosterior(back, taxa);
  CHECK(again.topologies == ref.topologies);
  CHECK(again.probabilities == ref.probabilities);
}

}  // TEST_SUITE
