#include <doctest.h>

#include <cmath>
#include <map>

#include "helpers.hpp"
#include "oracles.hpp"
#include "vbpi/mixture.hpp"
#include "vbpi/numerics.hpp"
#include "vbpi/sbn.hpp"

using namespace vbpi;
using testutil::Letters;
using testutil::Tree;

namespace {

std::shared_ptr<const SBNSupport> SupportOf(size_t n, const std::vector<Topology>& trees) {
  return std::make_shared<const SBNSupport>(SBNSupport::Build(n, trees));
}

SBN Uniform(const std::shared_ptr<const SBNSupport>& support) {
  return SBN(support, std::vector<double>(support->ParameterCount(), 0.0));
}

SBN Random(const std::shared_ptr<const SBNSupport>& support, uint64_t seed) {
  return SBN(support, testutil::Normals(support->ParameterCount(), seed));
}

std::vector<Topology> Example1Trees(const TaxonSet& taxa) {
  return {Tree("(((1,2),3),((4,5),6));", taxa), Tree("((1,(2,3)),(4,(5,6)));", taxa),
          Tree("(((1,2),3),(4,(5,6)));", taxa), Tree("((1,(2,3)),((4,5),6));", taxa)};
}

// Logits that put all mass on one rooted tree of the support.
std::vector<double> PointMassLogits(const SBNSupport& support, const Topology& rooted) {
  std::vector<double> logits(support.ParameterCount(), -1000.0);
  RootingIndex index = support.Index(rooted);
  for (int j : index.rootings.at(0)) logits[size_t(j)] = 0.0;
  return logits;
}

}  // namespace

TEST_SUITE("sbn") {

TEST_CASE("support of a single quartet") {
  auto taxa = Letters(4);
  auto support = SBNSupport::Build(4, std::vector{Tree("((A,B),C,D);", taxa)});
  CHECK(support.RootSplitCount() == 5);
  // One three-taxon table per leaf rooting, each with a single child.
  CHECK(support.Tables().size() == 5);
  CHECK(support.ParameterCount() == 9);
  for (size_t t = 1; t < support.Tables().size(); ++t) {
    const auto& table = support.Tables()[t];
    CHECK(table.end - table.begin == 1);
    CHECK(table.sister.Count() == 1);
    CHECK(table.clade.Count() == 3);
  }
}

TEST_CASE("full support at four taxa") {
  auto support = SBNSupport::Build(4, EnumerateUnrooted(4));
  CHECK(support.RootSplitCount() == 7);
  CHECK(support.Tables().size() == 5);
  CHECK(support.ParameterCount() == 7 + 4 * 3);
  for (const auto& t : EnumerateUnrooted(4)) {
    auto index = support.Index(t);
    CHECK(index.rootings.size() == 5);
    CHECK(index.total_rootings == 5);
  }
}

TEST_CASE("duplicate trees give the same support") {
  auto taxa = Letters(5);
  std::vector<Topology> once{Tree("((A,B),C,(D,E));", taxa), Tree("((A,C),B,(D,E));", taxa)};
  std::vector<Topology> twice{once[0], once[1], once[0], once[0]};
  CHECK(SBNSupport::Build(5, once) == SBNSupport::Build(5, twice));
}

TEST_CASE("frequency logits count duplicates") {
  auto taxa = Letters(4);
  std::vector<Topology> trees{Tree("((A,B),C,D);", taxa), Tree("((A,B),C,D);", taxa),
                              Tree("((A,C),B,D);", taxa)};
  auto support = SBNSupport::Build(4, trees);
  auto logits = support.FrequencyLogits(trees);
  auto ab = support.RootIndex(Subsplit::FromString("1100|0011"));
  auto ac = support.RootIndex(Subsplit::FromString("1010|0101"));
  REQUIRE(ab);
  REQUIRE(ac);
  CHECK(logits[*ab] == doctest::Approx(std::log(3.0)));
  CHECK(logits[*ac] == doctest::Approx(std::log(2.0)));
  auto a_leaf = support.RootIndex(Subsplit::FromString("1000|0111"));
  CHECK(logits[*a_leaf] == doctest::Approx(std::log(4.0)));
}

TEST_CASE("rooted log probabilities") {
  auto taxa = Letters(4);
  Topology rooted = Tree("((A,B),(C,D));", taxa);
  auto single = SupportOf(4, {rooted});
  CHECK(Uniform(single).LogProbRooted(rooted) == 0.0);

  auto two = SupportOf(4, {rooted, Tree("(((A,B),C),D);", taxa)});
  CHECK(two->RootSplitCount() == 2);
  CHECK(Uniform(two).LogProbRooted(rooted) == doctest::Approx(std::log(0.5)));
  CHECK_THROWS_AS(Uniform(two).LogProbRooted(Tree("((A,C),(B,D));", taxa)), Error);
  CHECK_THROWS_AS(Uniform(two).LogProbRooted(Tree("((A,B),C,D);", taxa)), Error);
}

TEST_CASE("hand-built three-level tables") {
  using S = Subsplit;
  auto support = std::make_shared<const SBNSupport>(SBNSupport::FromTables(
      5, {S::FromString("10000|01111"), S::FromString("11000|00111")},
      {{Clade::FromBitString("10000"), Clade::FromBitString("01111"),
        {S::FromString("01000|00111"), S::FromString("01100|00011"), S::FromString("01110|00001")}},
       {Clade::FromBitString("01000"), Clade::FromBitString("00111"),
        {S::FromString("00100|00011"), S::FromString("00110|00001")}}}));
  std::vector<double> logits(support->ParameterCount());
  // Root table (A|BCDE, AB|CDE) is ordered canonically: A|BCDE leads.
  const double p[] = {0.25, 0.75, 0.25, 0.25, 0.5, 0.2, 0.8};
  for (size_t j = 0; j < logits.size(); ++j) logits[j] = std::log(p[j]);
  SBN sbn(support, logits);
  auto taxa = Letters(5);
  Topology t = Tree("(A,(B,(C,(D,E))));", taxa);
  REQUIRE(support->Entry(0) == S::FromString("10000|01111"));
  CHECK(sbn.LogProbRooted(t) == doctest::Approx(std::log(0.25 * 0.25 * 0.2)));
  CHECK(sbn.LogProbRooted(Tree("(A,((B,C),(D,E)));", taxa)) ==
        doctest::Approx(std::log(0.25 * 0.25)));
  CHECK_THROWS_AS(sbn.LogProbRooted(Tree("(A,((B,(C,D)),E));", taxa)), Error);
}

TEST_CASE("unrooted probabilities at four taxa") {
  auto support = SupportOf(4, EnumerateUnrooted(4));
  SBN sbn = Uniform(support);
  double total = 0.0;
  for (const auto& t : EnumerateUnrooted(4)) {
    double lp = sbn.LogProb(t);
    CHECK(lp <= 0.0);
    total += std::exp(lp);
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));

  auto taxa = Letters(4);
  Topology t = Tree("((A,B),C,D);", taxa);
  CHECK(Uniform(SupportOf(4, {t})).LogProb(t) == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("normalization with random logits") {
  for (size_t n : {4, 5, 6}) {
    auto trees = EnumerateUnrooted(n);
    auto support = SupportOf(n, trees);
    for (uint64_t seed = 1; seed <= 3; ++seed) {
      SBN sbn = Random(support, seed * 100 + n);
      std::vector<double> lps;
      for (const auto& t : trees) lps.push_back(sbn.LogProb(t));
      CHECK(std::abs(std::exp(oracle::LogSumExp(lps)) - 1.0) < 1e-8);
    }
  }
}

TEST_CASE("partial support normalizes over its trees") {
  auto taxa = Letters(6);
  Rng rng(5);
  std::vector<Topology> trees;
  Topology base = RandomUnrootedTopology(6, rng);
  for (int i = 0; i < 6; ++i) trees.push_back(RandomNNI(base, rng));
  auto support = SupportOf(6, trees);
  SBN sbn = Random(support, 9);
  double total = 0.0;
  for (const auto& t : EnumerateUnrooted(6)) {
    if (!support->Index(t).Empty()) total += std::exp(sbn.LogProb(t));
  }
  CHECK(std::abs(total - 1.0) < 1e-10);
}

TEST_CASE("out of support trees raise") {
  auto taxa = Letters(5);
  auto support = SupportOf(5, {Tree("((A,B),C,(D,E));", taxa)});
  SBN sbn = Uniform(support);
  try {
    sbn.LogProb(Tree("((A,C),B,(D,E));", taxa));
    FAIL("expected support violation");
  } catch (const Error& e) {
    CHECK(e.Kind() == ErrorKind::kSupportViolation);
  }
  CHECK_THROWS_AS(sbn.GradLogProb(Tree("((A,C),B,(D,E));", taxa)), Error);
}

TEST_CASE("sampler matches densities") {
  // Chi-square critical values at alpha = 0.01.
  const std::map<size_t, double> critical{{2, 9.2103}, {14, 29.1412}};
  for (size_t n : {4, 5}) {
    auto trees = EnumerateUnrooted(n);
    auto support = SupportOf(n, trees);
    SBN sbn = Random(support, 17 + n);
    std::vector<double> expected;
    for (const auto& t : trees) expected.push_back(std::exp(sbn.LogProb(t)));
    std::unordered_map<Topology, size_t, TopologyHash> position;
    for (size_t i = 0; i < trees.size(); ++i) position[trees[i]] = i;
    std::vector<double> counts(trees.size(), 0.0);
    Rng rng(123 + n);
    const int draws = 100000;
    for (int i = 0; i < draws; ++i) counts[position.at(sbn.Sample(rng))] += 1.0;
    double chi2 = 0.0;
    for (size_t i = 0; i < trees.size(); ++i) {
      double e = expected[i] * draws;
      chi2 += (counts[i] - e) * (counts[i] - e) / e;
    }
    CHECK(chi2 < critical.at(trees.size() - 1));
  }
}

TEST_CASE("uniform quartet sampler within three sigma") {
  auto trees = EnumerateUnrooted(4);
  SBN sbn = Uniform(SupportOf(4, trees));
  Rng rng(99);
  std::vector<int> counts(3, 0);
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) {
    Topology t = sbn.Sample(rng);
    for (size_t j = 0; j < 3; ++j) counts[j] += t == trees[j];
  }
  for (size_t j = 0; j < 3; ++j) {
    double p = std::exp(sbn.LogProb(trees[j]));
    CHECK(std::abs(counts[j] - draws * p) < 3 * std::sqrt(draws * p * (1 - p)));
  }
}

TEST_CASE("deterministic tables always sample the same tree and seeds reproduce") {
  auto taxa = Letters(6);
  Topology rooted = Tree("(((A,B),C),((D,E),F));", taxa);
  SBN det = Uniform(SupportOf(6, {rooted}));
  Rng rng(3);
  for (int i = 0; i < 20; ++i) CHECK(det.SampleRooted(rng) == rooted);

  SBN sbn = Random(SupportOf(6, EnumerateUnrooted(6)), 4);
  Rng a(77), b(77);
  for (int i = 0; i < 50; ++i) CHECK(sbn.Sample(a) == sbn.Sample(b));
}

TEST_CASE("gradient matches finite differences") {
  for (size_t n : {4, 5, 6}) {
    auto trees = EnumerateUnrooted(n);
    auto support = SupportOf(n, trees);
    Rng rng(n);
    for (int trial = 0; trial < 5; ++trial) {
      auto logits = testutil::Normals(support->ParameterCount(), 1000 * n + trial);
      Topology t = trees[std::uniform_int_distribution<size_t>(0, trees.size() - 1)(rng)];
      auto grad = SBN(support, logits).GradLogProb(t);
      auto fd = oracle::FiniteDifference(
          [&](const std::vector<double>& x) { return SBN(support, x).LogProb(t); }, logits, 1e-5);
      CHECK(testutil::RelativeError(grad, fd) < 1e-4);
      for (const auto& table : support->Tables()) {
        double sum = 0.0;
        for (size_t j = table.begin; j < table.end; ++j) sum += grad[j];
        CHECK(std::abs(sum) < 1e-12);
      }
    }
  }
}

TEST_CASE("single-rooting support gives the categorical score") {
  auto taxa = Letters(5);
  std::vector<Topology> rooted{Tree("(((A,B),C),(D,E));", taxa), Tree("((A,(B,C)),(D,E));", taxa),
                               Tree("(((A,C),B),(D,E));", taxa)};
  auto support = SupportOf(5, rooted);
  auto logits = testutil::Normals(support->ParameterCount(), 5);
  SBN sbn(support, logits);
  Topology unrooted = rooted[0].Unrooted();
  auto index = support->Index(unrooted);
  REQUIRE(index.rootings.size() == 1);
  std::vector<double> expected(logits.size(), 0.0);
  for (int j : index.rootings[0]) {
    const auto& table = support->Tables()[support->TableOf(size_t(j))];
    expected[size_t(j)] += 1.0;
    for (size_t i = table.begin; i < table.end; ++i) expected[i] -= std::exp(sbn.LogProbs()[i]);
  }
  auto grad = sbn.GradLogProb(unrooted);
  for (size_t j = 0; j < grad.size(); ++j) CHECK(grad[j] == doctest::Approx(expected[j]));
  auto fd = oracle::FiniteDifference(
      [&](const std::vector<double>& x) { return SBN(support, x).LogProb(unrooted); }, logits, 1e-5);
  CHECK(testutil::RelativeError(grad, fd) < 1e-4);
}

TEST_CASE("mixture log probabilities") {
  TaxonSet taxa({"1", "2", "3", "4", "5", "6"});
  auto trees = Example1Trees(taxa);
  auto mixture = MixtureApprox::FromTrees(taxa, trees, 2, BranchMode::kSplit);
  const auto& support = mixture.Support();
  CHECK(support.RootSplitCount() == 1);
  CHECK(support.ParameterCount() == 5);
  mixture[0].sbn.SetLogits(PointMassLogits(support, trees[0]));
  mixture[1].sbn.SetLogits(PointMassLogits(support, trees[1]));
  CHECK(mixture.LogProb(trees[0]) == doctest::Approx(std::log(0.5)).epsilon(1e-12));
  CHECK(mixture.LogProb(trees[1].Unrooted()) == doctest::Approx(std::log(0.5)).epsilon(1e-12));
  CHECK(mixture.LogProb(trees[2]) < -900.0);

  auto single = MixtureApprox::FromTrees(taxa, trees, 1, BranchMode::kSplit);
  auto doubled = MixtureApprox::FromTrees(taxa, trees, 2, BranchMode::kSplit);
  for (const auto& t : trees) {
    CHECK(single.LogProb(t) == doctest::Approx(single[0].sbn.LogProb(t)));
    CHECK(doubled.LogProb(t) == doctest::Approx(single.LogProb(t)).epsilon(1e-12));
  }
}

TEST_CASE("single SBN on the four-tree family factorizes") {
  TaxonSet taxa({"1", "2", "3", "4", "5", "6"});
  auto trees = Example1Trees(taxa);
  auto support = SupportOf(6, trees);
  SBN sbn = Random(support, 31);
  double q[4];
  for (int i = 0; i < 4; ++i) q[i] = std::exp(sbn.LogProb(trees[size_t(i)]));
  CHECK(q[0] + q[1] + q[2] + q[3] == doctest::Approx(1.0));
  // q(A)q(B) * q(A')q(B') = q(A)q(B') * q(A')q(B).
  CHECK(q[0] * q[1] == doctest::Approx(q[2] * q[3]));
}

}  // TEST_SUITE
