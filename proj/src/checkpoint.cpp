#include "vbpi/checkpoint.hpp"

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "vbpi/error.hpp"

namespace vbpi {

namespace {

constexpr const char* kFormatName = "vbpimix-checkpoint";
constexpr int kFormatVersion = 1;

std::string Num(double x) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.17g", x);
  return buffer;
}

void WriteVector(std::ostream& out, const std::vector<double>& values) {
  for (size_t i = 0; i < values.size(); ++i) out << (i ? " " : "") << Num(values[i]);
  out << '\n';
}

class LineReader {
 public:
  explicit LineReader(std::istream& in) {
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      lines_.push_back(line);
    }
  }

  bool Done() const { return pos_ >= lines_.size(); }
  const std::string& Peek() const {
    if (Done()) Error("unexpected end of checkpoint");
    return lines_[pos_];
  }
  std::string Next() {
    const std::string& line = Peek();
    ++pos_;
    return line;
  }
  void Expect(const std::string& exact) {
    if (Next() != exact) Error("expected '" + exact + "'");
  }
  // "key value" line; returns value.
  std::string Field(const std::string& key) {
    std::string line = Next();
    if (line.rfind(key + " ", 0) != 0) Error("expected field '" + key + "'");
    return line.substr(key.size() + 1);
  }
  size_t Count(const std::string& key) {
    std::string value = Field(key);
    size_t n = 0;
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), n);
    if (ec != std::errc() || ptr != value.data() + value.size()) Error("bad count for " + key);
    return n;
  }
  std::vector<double> Numbers(size_t expected) {
    std::vector<double> values;
    std::string line = Next();
    const char* p = line.data();
    const char* end = p + line.size();
    while (p < end) {
      while (p < end && *p == ' ') ++p;
      if (p == end) break;
      double x = 0.0;
      auto [ptr, ec] = std::from_chars(p, end, x);
      if (ec != std::errc()) Error("bad number");
      values.push_back(x);
      p = ptr;
    }
    if (values.size() != expected) Error("wrong number of values");
    return values;
  }
  [[noreturn]] void Error(const std::string& what) const {
    Fail(ErrorKind::kParse, "checkpoint line " + std::to_string(pos_) + ": " + what);
  }

 private:
  std::vector<std::string> lines_;
  size_t pos_ = 0;
};

Subsplit ParseSubsplit(LineReader& r, const std::string& text) {
  try {
    return Subsplit::FromString(text);
  } catch (const Error&) {
    r.Error("bad subsplit '" + text + "'");
  }
}

}  // namespace

void SaveCheckpoint(std::ostream& out, const MixtureApprox& model, const TrainerState* state) {
  const size_t n = model.Taxa().Size();
  const SBNSupport& support = model.Support();
  const BranchTables& tables = model.Tables();
  out << "[meta]\n";
  out << "format " << kFormatName << '\n';
  out << "version " << kFormatVersion << '\n';
  out << "taxa " << n << '\n';
  out << "components " << model.Size() << '\n';
  out << "branch_mode " << (model[0].branch.Mode() == BranchMode::kSplitPSP ? "psp" : "split") << '\n';
  out << "[taxa]\n";
  for (const auto& name : model.Taxa().Names()) out << name << '\n';
  out << "[support]\n";
  const auto& sbn_tables = support.Tables();
  out << "root_splits " << sbn_tables[0].end << '\n';
  for (size_t j = 0; j < sbn_tables[0].end; ++j) out << support.Entry(j).ToString(n) << '\n';
  out << "tables " << sbn_tables.size() - 1 << '\n';
  for (size_t t = 1; t < sbn_tables.size(); ++t) {
    const auto& table = sbn_tables[t];
    out << "table " << table.sister.ToBitString(n) << ' ' << table.clade.ToBitString(n) << ' '
        << table.end - table.begin << '\n';
    for (size_t j = table.begin; j < table.end; ++j) out << support.Entry(j).ToString(n) << '\n';
  }
  out << "[branch_tables]\n";
  out << "splits " << tables.Splits().size() << '\n';
  for (const auto& split : tables.Splits()) out << split.ToString(n) << '\n';
  out << "psps " << tables.PSPs().size() << '\n';
  for (const auto& psp : tables.PSPs()) {
    out << psp.anchor.ToString(n) << ' ' << psp.side.ToString(n) << '\n';
  }
  for (size_t s = 0; s < model.Size(); ++s) {
    out << "[component " << s << "]\n";
    out << "[sbn]\n";
    WriteVector(out, model[s].sbn.Logits());
    out << "[branch]\n";
    WriteVector(out, model[s].branch.Params());
  }
  if (state) {
    out << "[optimizer]\n";
    out << "iteration " << state->iteration << '\n';
    auto write_adam = [&](const char* kind, size_t s, const AdamState& adam) {
      out << "adam " << kind << ' ' << s << ' ' << adam.t << ' ' << adam.m.size() << '\n';
      WriteVector(out, adam.m);
      WriteVector(out, adam.v);
    };
    for (size_t s = 0; s < state->sbn.size(); ++s) write_adam("sbn", s, state->sbn[s]);
    for (size_t s = 0; s < state->branch.size(); ++s) write_adam("branch", s, state->branch[s]);
  }
}

void SaveCheckpointFile(const std::string& path, const MixtureApprox& model,
                        const TrainerState* state) {
  const std::string temp = path + ".tmp";
  {
    std::ofstream out(temp, std::ios::binary | std::ios::trunc);
    if (!out) Fail(ErrorKind::kIo, "cannot write '" + temp + "'");
    SaveCheckpoint(out, model, state);
    out.flush();
    if (!out) Fail(ErrorKind::kIo, "write to '" + temp + "' failed");
  }
  std::error_code ec;
  std::filesystem::rename(temp, path, ec);
  if (ec) Fail(ErrorKind::kIo, "cannot rename '" + temp + "' to '" + path + "': " + ec.message());
}

Checkpoint LoadCheckpoint(std::istream& in, const TaxonSet* expected_taxa) {
  LineReader r(in);
  r.Expect("[meta]");
  if (r.Field("format") != kFormatName) {
    Fail(ErrorKind::kIncompatibleCheckpoint, "not a checkpoint file");
  }
  if (r.Field("version") != std::to_string(kFormatVersion)) {
    Fail(ErrorKind::kIncompatibleCheckpoint, "unsupported checkpoint version");
  }
  const size_t n = r.Count("taxa");
  const size_t S = r.Count("components");
  const std::string mode_name = r.Field("branch_mode");
  if (mode_name != "split" && mode_name != "psp") r.Error("unknown branch mode");
  const BranchMode mode = mode_name == "psp" ? BranchMode::kSplitPSP : BranchMode::kSplit;
  if (S == 0) r.Error("checkpoint without components");

  r.Expect("[taxa]");
  std::vector<std::string> names;
  for (size_t i = 0; i < n; ++i) names.push_back(r.Next());
  TaxonSet taxa(names);
  if (expected_taxa && !(*expected_taxa == taxa)) {
    Fail(ErrorKind::kIncompatibleCheckpoint, "checkpoint taxa differ from the expected taxon set");
  }

  r.Expect("[support]");
  std::vector<Split> roots;
  const size_t n_roots = r.Count("root_splits");
  for (size_t i = 0; i < n_roots; ++i) roots.push_back(ParseSubsplit(r, r.Next()));
  std::vector<SBNSupport::TableSpec> specs;
  const size_t n_tables = r.Count("tables");
  for (size_t t = 0; t < n_tables; ++t) {
    std::istringstream header(r.Field("table"));
    std::string sister, clade;
    size_t count = 0;
    if (!(header >> sister >> clade >> count)) r.Error("bad table header");
    SBNSupport::TableSpec spec{Clade::FromBitString(sister), Clade::FromBitString(clade), {}};
    for (size_t j = 0; j < count; ++j) spec.children.push_back(ParseSubsplit(r, r.Next()));
    specs.push_back(std::move(spec));
  }
  auto support = std::make_shared<const SBNSupport>(
      SBNSupport::FromTables(n, std::move(roots), std::move(specs)));

  r.Expect("[branch_tables]");
  std::vector<Split> splits;
  const size_t n_splits = r.Count("splits");
  for (size_t i = 0; i < n_splits; ++i) splits.push_back(ParseSubsplit(r, r.Next()));
  std::vector<PSP> psps;
  const size_t n_psps = r.Count("psps");
  for (size_t i = 0; i < n_psps; ++i) {
    std::istringstream line(r.Next());
    std::string anchor, side;
    if (!(line >> anchor >> side)) r.Error("bad PSP line");
    psps.push_back({ParseSubsplit(r, anchor), ParseSubsplit(r, side)});
  }
  auto tables = std::make_shared<const BranchTables>(n, std::move(splits), std::move(psps));

  std::vector<Component> components;
  const size_t n_branch = BranchModel::ParameterCount(*tables, mode);
  for (size_t s = 0; s < S; ++s) {
    r.Expect("[component " + std::to_string(s) + "]");
    r.Expect("[sbn]");
    SBN sbn(support, r.Numbers(support->ParameterCount()));
    r.Expect("[branch]");
    BranchModel branch(tables, mode, r.Numbers(n_branch));
    components.push_back({std::move(sbn), std::move(branch)});
  }
  Checkpoint result{MixtureApprox(std::move(taxa), std::move(components)), std::nullopt};

  if (!r.Done() && r.Peek() == "[optimizer]") {
    r.Next();
    TrainerState state;
    state.iteration = r.Count("iteration");
    state.sbn.resize(S);
    state.branch.resize(S);
    while (!r.Done() && r.Peek().rfind("adam ", 0) == 0) {
      std::istringstream header(r.Field("adam"));
      std::string kind;
      size_t s = 0, t = 0, size = 0;
      if (!(header >> kind >> s >> t >> size) || s >= S || (kind != "sbn" && kind != "branch")) {
        r.Error("bad optimizer header");
      }
      AdamState adam;
      adam.t = t;
      adam.m = r.Numbers(size);
      adam.v = r.Numbers(size);
      (kind == "sbn" ? state.sbn : state.branch)[s] = std::move(adam);
    }
    result.state = std::move(state);
  }
  while (!r.Done()) {
    if (!r.Next().empty()) r.Error("trailing content");
  }
  return result;
}

Checkpoint LoadCheckpointFile(const std::string& path, const TaxonSet* expected_taxa) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorKind::kIo, "cannot open '" + path + "'");
  return LoadCheckpoint(in, expected_taxa);
}

}  // namespace vbpi
