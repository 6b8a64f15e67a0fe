#include "vbpi/trainer.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "vbpi/error.hpp"
#include "vbpi/newick.hpp"

namespace vbpi {

namespace {

bool AllFinite(const std::vector<double>& values) {
  for (double v : values) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

std::string DescribeParticle(const MixtureApprox& model, const Particle& p, size_t k) {
  char buffer[160];
  std::snprintf(buffer, sizeof(buffer), " (component %zu particle %zu, loglik %.6g, logprior %.6g): ",
                p.component, k, p.log_likelihood, p.log_prior);
  return buffer + ToNewick(p.tree, model.Taxa(), p.branches);
}

}  // namespace

void TrainConfig::Validate() const {
  if (K < 2) Fail(ErrorKind::kBaselineUndefined, "training needs K >= 2");
  if (!(lr_sbn >= 0.0) || !(lr_branch >= 0.0)) Fail(ErrorKind::kRange, "learning rates must be >= 0");
  if (!(annealing_init > 0.0 && annealing_init <= 1.0)) {
    Fail(ErrorKind::kRange, "annealing_init must lie in (0, 1]");
  }
  if (lr_decay_every > 0 && !(lr_decay_factor > 0.0)) {
    Fail(ErrorKind::kRange, "lr_decay_factor must be positive");
  }
}

double Anneal(size_t iteration, const TrainConfig& config) {
  if (config.annealing_horizon == 0) return 1.0;
  double beta = config.annealing_init +
                double(iteration) * (1.0 - config.annealing_init) / double(config.annealing_horizon);
  return std::min(1.0, beta);
}

void WriteRunLogCsv(std::ostream& out, const std::vector<LogRecord>& log, bool with_seconds) {
  out << "iteration,miselbo,beta";
  if (with_seconds) out << ",seconds";
  size_t S = log.empty() ? 0 : log[0].component_bounds.size();
  for (size_t s = 0; s < S; ++s) out << ",bound_" << s;
  out << '\n';
  char buffer[64];
  for (const auto& r : log) {
    out << r.iteration;
    for (double v : {r.miselbo, r.beta}) {
      std::snprintf(buffer, sizeof(buffer), ",%.10g", v);
      out << buffer;
    }
    if (with_seconds) {
      std::snprintf(buffer, sizeof(buffer), ",%.3f", r.seconds);
      out << buffer;
    }
    for (double v : r.component_bounds) {
      std::snprintf(buffer, sizeof(buffer), ",%.10g", v);
      out << buffer;
    }
    out << '\n';
  }
}

Trainer::Trainer(MixtureApprox& model, const PhyloLikelihood& likelihood, TrainConfig config,
                 PriorConfig prior, TrainerState state)
    : model_(model), likelihood_(likelihood), config_(config), prior_(prior), state_(std::move(state)) {
  config_.Validate();
  state_.sbn.resize(model_.Size());
  state_.branch.resize(model_.Size());
}

LogRecord Trainer::Step() {
  const size_t it = state_.iteration;
  const double beta = Anneal(it, config_);
  ObjectiveContext ctx{model_, likelihood_, prior_};
  ParticleBatch batch = DrawBatch(ctx, config_.K, config_.seed, it, true, config_.threads);
  VimcoSignals signals;
  MixtureGradient grad = VimcoGradients(ctx, batch, beta, &signals);

  for (size_t s = 0; s < model_.Size(); ++s) {
    if (!AllFinite(grad.sbn[s]) || !AllFinite(grad.branch[s])) {
      size_t k = 0;
      for (; k + 1 < batch.K; ++k) {
        const Particle& p = batch.At(s, k);
        if (!std::isfinite(p.log_likelihood) || !AllFinite(p.dloglik_db)) break;
      }
      Fail(ErrorKind::kNonFinite, "non-finite gradient at iteration " + std::to_string(it) +
                                      DescribeParticle(model_, batch.At(s, k), k));
    }
  }

  double decay = 1.0;
  if (config_.lr_decay_every > 0) {
    decay = std::pow(config_.lr_decay_factor, double(it / config_.lr_decay_every));
  }
  for (size_t s = 0; s < model_.Size(); ++s) {
    std::vector<double> logits = model_[s].sbn.Logits();
    state_.sbn[s].Step(logits, grad.sbn[s], config_.lr_sbn * decay);
    std::vector<double> params = model_[s].branch.Params();
    state_.branch[s].Step(params, grad.branch[s], config_.lr_branch * decay);
    if (!AllFinite(logits) || !AllFinite(params)) {
      Fail(ErrorKind::kNonFinite, "parameters became non-finite at iteration " + std::to_string(it));
    }
    model_[s].sbn.SetLogits(std::move(logits));
    model_[s].branch.SetParams(std::move(params));
  }
  ++state_.iteration;

  LogRecord record;
  record.iteration = it;
  record.miselbo = signals.Miselbo();
  record.component_bounds = signals.bound;
  record.beta = beta;
  return record;
}

std::vector<LogRecord> Trainer::Run(const std::function<void(const Trainer&)>& on_checkpoint) {
  std::vector<LogRecord> log;
  const auto start = std::chrono::steady_clock::now();
  while (state_.iteration < config_.iterations) {
    LogRecord record = Step();
    const size_t done = state_.iteration;
    if (config_.eval_every > 0 && done % config_.eval_every == 0) {
      record.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      log.push_back(std::move(record));
    }
    if (on_checkpoint && config_.checkpoint_every > 0 && done % config_.checkpoint_every == 0) {
      on_checkpoint(*this);
    }
  }
  return log;
}

}  // namespace vbpi
