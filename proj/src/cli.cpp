#include "vbpi/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "vbpi/checkpoint.hpp"
#include "vbpi/error.hpp"
#include "vbpi/likelihood.hpp"
#include "vbpi/numerics.hpp"
#include "vbpi/objective.hpp"
#include "vbpi/parsimony.hpp"
#include "vbpi/toy_hier.hpp"
#include "vbpi/trainer.hpp"
#include "vbpi/tree_io.hpp"

namespace vbpi {

namespace {

std::string Fixed(double x, int digits) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.*f", digits, x);
  return buffer;
}

std::string General(double x) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.10g", x);
  return buffer;
}

std::ofstream OpenOut(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) Fail(ErrorKind::kIo, "cannot write '" + path + "'");
  return out;
}

BranchMode ParseMode(const std::string& name) {
  if (name == "split") return BranchMode::kSplit;
  if (name == "psp") return BranchMode::kSplitPSP;
  Fail(ErrorKind::kRange, "branch mode must be 'split' or 'psp'");
}

// Widens or narrows a loaded model to S components, copying component 0.
MixtureApprox WithComponents(const MixtureApprox& model, size_t S) {
  if (model.Size() == S) return model;
  std::vector<Component> components(S, model[0]);
  return MixtureApprox(model.Taxa(), std::move(components));
}

struct BuildSupportArgs {
  std::string trees, fasta, out, mode = "split";
};

void BuildSupportCommand(const BuildSupportArgs& a, std::ostream& out) {
  TaxonSet taxa = a.fasta.empty() ? TaxaFromTreeListFile(a.trees) : ReadFastaFile(a.fasta).taxa;
  CandidateTreeSet set = ReadTreeListFile(a.trees, taxa);
  MixtureApprox model = MixtureApprox::FromTrees(taxa, set.trees, 1, ParseMode(a.mode));
  SaveCheckpointFile(a.out, model);
  std::set<std::vector<Split>> distinct;
  for (const auto& t : set.trees) distinct.insert(t.NontrivialSplits());
  const SBNSupport& support = model.Support();
  size_t largest = 0;
  for (size_t t = 1; t < support.Tables().size(); ++t) {
    largest = std::max(largest, support.Tables()[t].end - support.Tables()[t].begin);
  }
  out << "taxa " << taxa.Size() << '\n';
  out << "trees " << set.trees.size() << " (" << distinct.size() << " distinct)\n";
  out << "root_splits " << support.RootSplitCount() << '\n';
  out << "conditional_tables " << support.Tables().size() - 1 << '\n';
  out << "largest_table " << largest << '\n';
  out << "sbn_parameters " << support.ParameterCount() << '\n';
  out << "branch_splits " << model.Tables().Splits().size() << '\n';
  out << "branch_psps " << model.Tables().PSPs().size() << '\n';
}

struct TrainArgs {
  std::string fasta, support, out, log, resume;
  size_t S = 1;
  TrainConfig config;
  double branch_rate = 10.0;
  bool no_topology_constant = false;
  bool log_seconds = false;
};

void TrainCommand(TrainArgs a, std::ostream& out) {
  Alignment alignment = ReadFastaFile(a.fasta);
  PhyloLikelihood likelihood(alignment);
  MixtureApprox model;
  TrainerState state;
  if (!a.resume.empty()) {
    Checkpoint cp = LoadCheckpointFile(a.resume, &alignment.taxa);
    if (cp.model.Size() != a.S) Fail(ErrorKind::kIncompatibleCheckpoint, "resume checkpoint has a different S");
    model = std::move(cp.model);
    if (cp.state) state = std::move(*cp.state);
  } else {
    if (a.support.empty()) Fail(ErrorKind::kContract, "train needs --support or --resume");
    model = WithComponents(LoadCheckpointFile(a.support, &alignment.taxa).model, a.S);
  }
  PriorConfig prior{a.branch_rate, !a.no_topology_constant};
  Trainer trainer(model, likelihood, a.config, prior, std::move(state));
  auto log = trainer.Run([&](const Trainer& t) { SaveCheckpointFile(a.out, t.Model(), &t.State()); });
  SaveCheckpointFile(a.out, model, &trainer.State());
  const std::string log_path = a.log.empty() ? a.out + ".log.csv" : a.log;
  auto log_out = OpenOut(log_path);
  WriteRunLogCsv(log_out, log, a.log_seconds);
  out << "iterations " << trainer.State().iteration << '\n';
  out << "components " << model.Size() << '\n';
  if (!log.empty()) out << "final_miselbo " << Fixed(log.back().miselbo, 4) << '\n';
}

struct EvalMlArgs {
  std::string model, fasta;
  size_t samples = 1000, runs = 100;
  uint64_t seed = 0;
  double branch_rate = 10.0;
  bool no_topology_constant = false;
};

void EvalMlCommand(const EvalMlArgs& a, std::ostream& out) {
  Alignment alignment = ReadFastaFile(a.fasta);
  MixtureApprox model = LoadCheckpointFile(a.model, &alignment.taxa).model;
  PhyloLikelihood likelihood(alignment);
  ObjectiveContext ctx{model, likelihood, PriorConfig{a.branch_rate, !a.no_topology_constant}};
  MeanStd result = EstimateLogMarginalRuns(ctx, a.samples, a.runs, a.seed);
  if (a.runs == 1) {
    out << Fixed(result.mean, 2) << '\n';
  } else {
    out << Fixed(result.mean, 2) << " (" << Fixed(result.stddev, 2) << ")\n";
  }
}

void EvalKlCommand(const std::string& model_path, const std::string& reference_path,
                   std::ostream& out) {
  MixtureApprox model = LoadCheckpointFile(model_path).model;
  ReferencePosterior reference = ReadReferencePosteriorFile(reference_path, model.Taxa());
  KlResult kl = KlReferenceToModel(reference, model);
  out << "kl " << Fixed(kl.kl, 6) << '\n';
  out << "out_of_support_mass " << Fixed(kl.out_of_support_mass, 6) << '\n';
}

struct SampleArgs {
  std::string model, out;
  size_t n = 1000;
  uint64_t seed = 0;
  bool freq = false;
};

void SampleCommand(const SampleArgs& a, std::ostream& out) {
  MixtureApprox model = LoadCheckpointFile(a.model).model;
  auto sink = OpenOut(a.out);
  if (!a.freq) {
    Rng rng = StreamRng(a.seed, {0});
    std::uniform_int_distribution<size_t> pick(0, model.Size() - 1);
    for (size_t i = 0; i < a.n; ++i) sink << ToNewick(model[pick(rng)].sbn.Sample(rng), model.Taxa()) << '\n';
    out << "samples " << a.n << '\n';
    return;
  }
  auto emit = [&](const std::string& label, const std::map<std::string, size_t>& counts) {
    std::vector<std::pair<std::string, size_t>> rows(counts.begin(), counts.end());
    std::stable_sort(rows.begin(), rows.end(), [](const auto& x, const auto& y) { return x.second > y.second; });
    for (const auto& [newick, count] : rows) sink << newick << '\t' << count << '\t' << label << '\n';
    out << label << " distinct " << rows.size() << '\n';
  };
  for (size_t s = 0; s < model.Size(); ++s) {
    Rng rng = StreamRng(a.seed, {1, s});
    std::map<std::string, size_t> counts;
    for (size_t i = 0; i < a.n; ++i) ++counts[ToNewick(model[s].sbn.Sample(rng), model.Taxa())];
    emit(std::to_string(s), counts);
  }
  Rng rng = StreamRng(a.seed, {2});
  std::uniform_int_distribution<size_t> pick(0, model.Size() - 1);
  std::map<std::string, size_t> counts;
  for (size_t i = 0; i < a.n; ++i) ++counts[ToNewick(model[pick(rng)].sbn.Sample(rng), model.Taxa())];
  emit("mix", counts);
}

struct ToyArgs {
  size_t n1 = 5, n2 = 10, S = 1, K = 0, iters = 10000;
  double lr = 0.0;
  uint64_t seed = 0;
  std::string out;
};

void ToyCommand(const ToyArgs& a, std::ostream& out) {
  HierTarget target = MakeTarget(a.n1, a.n2, a.seed);
  ToyTrainConfig config;
  config.S = a.S;
  config.K = a.K > 0 ? a.K : 20 / a.S;
  config.iterations = a.iters;
  config.learning_rate = a.lr > 0.0 ? a.lr : DefaultToyLearningRate(a.S);
  config.seed = a.seed;
  ToyTrainResult result = TrainToy(target, config);
  auto sink = OpenOut(a.out);
  sink << "iter,kl\n";
  for (const auto& point : result.curve) sink << point.iteration << ',' << General(point.kl) << '\n';
  out << "S " << config.S << " K " << config.K << " lr " << General(config.learning_rate) << '\n';
  out << "final_kl_q_p " << Fixed(KlQToP(result.approx, target), 6) << '\n';
  out << "final_kl_p_q " << Fixed(KlPToQ(result.approx, target), 6) << '\n';
  for (size_t s = 0; s < result.approx.Size(); ++s) {
    const auto& c = result.approx.components[s];
    out << "component " << s << " q(z1):";
    std::vector<double> lp = c.logits1;
    double lse = LogSumExp(lp);
    for (double v : lp) out << ' ' << Fixed(std::exp(v - lse), 4);
    out << '\n';
  }
}

struct SimulateArgs {
  size_t taxa = 4, sites = 100;
  uint64_t seed = 0;
  double branch_rate = 10.0;
  std::string out, tree_out;
};

void SimulateCommand(const SimulateArgs& a, std::ostream& out) {
  if (a.taxa < 3) Fail(ErrorKind::kUnsupportedSize, "simulate needs at least 3 taxa");
  if (a.sites == 0) Fail(ErrorKind::kAlignmentShape, "simulate needs at least one site");
  Rng rng = StreamRng(a.seed, {0x51});
  Topology tree = RandomUnrootedTopology(a.taxa, rng);
  std::exponential_distribution<double> branch(a.branch_rate);
  BranchLengths branches(tree.NodeCount(), 0.0);
  for (int e : tree.Edges()) branches[size_t(e)] = branch(rng);
  std::vector<std::string> names;
  for (size_t i = 0; i < a.taxa; ++i) names.push_back("t" + std::to_string(i + 1));
  Alignment alignment{TaxonSet(names), SimulateJC69(tree, branches, a.sites, rng)};
  auto fasta = OpenOut(a.out);
  WriteFasta(fasta, alignment);
  const std::string tree_path = a.tree_out.empty() ? a.out + ".nwk" : a.tree_out;
  auto tree_sink = OpenOut(tree_path);
  tree_sink << ToNewick(tree, alignment.taxa, branches) << '\n';
  out << "taxa " << a.taxa << " sites " << a.sites << '\n';
  out << "tree " << tree_path << '\n';
}

int NodeOfClade(const Topology& t, const Clade& clade) {
  for (int v = 0; v < int(t.NodeCount()); ++v) {
    if (t.CladeOf(v) == clade) return v;
  }
  Fail(ErrorKind::kMissingEdge, "clade not found");
}

void ParsimonyDemoCommand(std::ostream& out) {
  const TaxonSet taxa({"1", "2", "3", "4", "5", "6"});
  const std::string site_i = "ACCAGG", site_j = "CCAGGA";
  struct Subtree {
    const char* label;
    const char* newick;
  };
  const Subtree subtrees[] = {{"A=((1,2),3)", "((1,2),3)"}, {"B=((4,5),6)", "((4,5),6)"},
                              {"A'=(1,(2,3))", "(1,(2,3))"}, {"B'=(4,(5,6))", "(4,(5,6))"}};
  struct Tree {
    const char* label;
    int left, right;
  };
  const Tree trees[] = {{"tau1 (A^B)", 0, 1}, {"tau2 (A'^B')", 2, 3},
                        {"tau3 (A^B')", 0, 3}, {"tau4 (A'^B)", 2, 1}};
  auto make = [&](const Tree& tree) {
    std::string text = std::string("(") + subtrees[tree.left].newick + "," +
                       subtrees[tree.right].newick + ");";
    return ParseNewick(text, taxa).topology;
  };
  const Clade left = Clade::FromBitString("111000"), right = Clade::FromBitString("000111");

  out << "Table 3: characters at sites i and j\n";
  out << "site\t(1)\t(2)\t(3)\t(4)\t(5)\t(6)\n";
  for (auto [name, col] : {std::pair{"i", site_i}, std::pair{"j", site_j}}) {
    out << name;
    for (char c : col) out << '\t' << c;
    out << '\n';
  }
  out << "\nTable 4: subtree scores (X→Y: score Y with root state X; *best*)\n";
  out << "site";
  for (const auto& s : subtrees) out << '\t' << s.label;
  out << '\n';
  for (auto [name, col] : {std::pair{"i", site_i}, std::pair{"j", site_j}}) {
    out << name;
    for (int s = 0; s < 4; ++s) {
      // Subtree s is the left half of a tree for s in {0, 2} and the right half otherwise.
      Tree host = s % 2 == 0 ? Tree{"", s, 1} : Tree{"", 0, s};
      Topology t = make(host);
      out << '\t' << FormatScores(SankoffScores(t, col, NodeOfClade(t, s % 2 == 0 ? left : right)), true);
    }
    out << '\n';
  }
  out << "\nTable 5: tree scores\n";
  out << "site";
  for (const auto& t : trees) out << '\t' << t.label;
  out << '\n';
  int totals[4] = {0, 0, 0, 0};
  for (auto [name, col] : {std::pair{"i", site_i}, std::pair{"j", site_j}}) {
    out << name;
    for (int k = 0; k < 4; ++k) {
      Topology t = make(trees[k]);
      out << '\t' << FormatScores(SankoffScores(t, col), true);
      totals[k] += ParsimonyScore(t, col);
    }
    out << '\n';
  }
  out << "total";
  for (int k = 0; k < 4; ++k) out << '\t' << totals[k];
  out << '\n';
}

}  // namespace

int RunCli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Variational phylogenetic inference with mixtures of subsplit Bayesian networks",
               "vbpimix"};
  app.require_subcommand(1);

  BuildSupportArgs bs;
  auto* build = app.add_subcommand("build-support", "Build an SBN support from candidate trees");
  build->add_option("--trees", bs.trees, "Tree list, one Newick per line")->required();
  build->add_option("--fasta", bs.fasta, "Alignment fixing the taxon order");
  build->add_option("--out", bs.out, "Output checkpoint")->required();
  build->add_option("--branch-mode", bs.mode, "split or psp");

  TrainArgs tr;
  auto* train = app.add_subcommand("train", "Train a mixture with the VIMCO estimator");
  train->set_config("--config", "", "key=value config file");
  train->add_option("--fasta", tr.fasta)->required();
  train->add_option("--support", tr.support, "Checkpoint from build-support");
  train->add_option("--resume", tr.resume, "Checkpoint with optimizer state to continue");
  train->add_option("--out", tr.out)->required();
  train->add_option("--log", tr.log, "Run log CSV (default <out>.log.csv)");
  train->add_option("--S", tr.S)->check(CLI::PositiveNumber);
  train->add_option("--K", tr.config.K);
  train->add_option("--iters", tr.config.iterations);
  train->add_option("--seed", tr.config.seed);
  train->add_option("--lr-sbn", tr.config.lr_sbn);
  train->add_option("--lr-branch", tr.config.lr_branch);
  train->add_option("--anneal-init", tr.config.annealing_init);
  train->add_option("--anneal-horizon", tr.config.annealing_horizon);
  train->add_option("--eval-every", tr.config.eval_every);
  train->add_option("--checkpoint-every", tr.config.checkpoint_every);
  train->add_option("--threads", tr.config.threads)->check(CLI::PositiveNumber);
  train->add_option("--lr-decay-every", tr.config.lr_decay_every);
  train->add_option("--lr-decay-factor", tr.config.lr_decay_factor);
  train->add_option("--branch-rate", tr.branch_rate);
  train->add_flag("--no-topology-constant", tr.no_topology_constant);
  train->add_flag("--log-seconds", tr.log_seconds, "Add wall-clock seconds to the run log");

  EvalMlArgs ml;
  auto* eval_ml = app.add_subcommand("eval-ml", "Importance-sampling marginal likelihood");
  eval_ml->add_option("--model", ml.model)->required();
  eval_ml->add_option("--fasta", ml.fasta)->required();
  eval_ml->add_option("--samples", ml.samples)->check(CLI::PositiveNumber);
  eval_ml->add_option("--runs", ml.runs)->check(CLI::PositiveNumber);
  eval_ml->add_option("--seed", ml.seed);
  eval_ml->add_option("--branch-rate", ml.branch_rate);
  eval_ml->add_flag("--no-topology-constant", ml.no_topology_constant);

  std::string kl_model, kl_reference;
  auto* eval_kl = app.add_subcommand("eval-kl", "KL from a reference topology posterior");
  eval_kl->add_option("--model", kl_model)->required();
  eval_kl->add_option("--reference", kl_reference)->required();

  SampleArgs sa;
  auto* sample = app.add_subcommand("sample", "Sample tree topologies");
  sample->add_option("--model", sa.model)->required();
  sample->add_option("--n", sa.n)->check(CLI::PositiveNumber);
  sample->add_option("--out", sa.out)->required();
  sample->add_option("--seed", sa.seed);
  sample->add_flag("--freq", sa.freq, "Write newick<TAB>count<TAB>component rows");

  ToyArgs ta;
  auto* toy = app.add_subcommand("toy", "Hierarchical categorical experiment");
  toy->add_option("--n1", ta.n1);
  toy->add_option("--n2", ta.n2);
  toy->add_option("--S", ta.S)->check(CLI::Range(1, 5));
  toy->add_option("--K", ta.K, "Default floor(20 / S)");
  toy->add_option("--iters", ta.iters);
  toy->add_option("--lr", ta.lr, "Default per-S rate");
  toy->add_option("--seed", ta.seed);
  toy->add_option("--out", ta.out, "KL curve CSV")->required();

  SimulateArgs si;
  auto* simulate = app.add_subcommand("simulate", "Simulate a JC69 alignment on a random tree");
  simulate->add_option("--taxa", si.taxa);
  simulate->add_option("--sites", si.sites);
  simulate->add_option("--seed", si.seed);
  simulate->add_option("--branch-rate", si.branch_rate);
  simulate->add_option("--out", si.out, "FASTA output")->required();
  simulate->add_option("--tree-out", si.tree_out, "Tree output (default <out>.nwk)");

  auto* demo = app.add_subcommand("parsimony-demo", "Print the conflicting-signal parsimony tables");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    std::string message = e.what();
    std::replace(message.begin(), message.end(), '\n', ' ');
    err << "error: usage: " << message << '\n';
    return 2;
  }

  try {
    if (*build) BuildSupportCommand(bs, out);
    else if (*train) TrainCommand(tr, out);
    else if (*eval_ml) EvalMlCommand(ml, out);
    else if (*eval_kl) EvalKlCommand(kl_model, kl_reference, out);
    else if (*sample) SampleCommand(sa, out);
    else if (*toy) ToyCommand(ta, out);
    else if (*simulate) SimulateCommand(si, out);
    else if (*demo) ParsimonyDemoCommand(out);
  } catch (const Error& e) {
    std::string message = e.what();
    std::replace(message.begin(), message.end(), '\n', ' ');
    err << "error: " << KindName(e.Kind()) << ": " << message << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: internal: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace vbpi
