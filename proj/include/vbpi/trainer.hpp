#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

#include "vbpi/likelihood.hpp"
#include "vbpi/mixture.hpp"
#include "vbpi/objective.hpp"
#include "vbpi/optimizer.hpp"

namespace vbpi {

struct TrainConfig {
  size_t K = 10;
  size_t iterations = 400000;
  double lr_sbn = 0.001;
  double lr_branch = 0.001;
  double annealing_init = 0.001;
  size_t annealing_horizon = 100000;
  uint64_t seed = 0;
  size_t checkpoint_every = 0;  // 0 disables
  size_t eval_every = 0;        // 0 disables
  size_t threads = 1;
  // Optional stepwise decay: both rates are multiplied by lr_decay_factor every
  // lr_decay_every iterations. 0 disables.
  size_t lr_decay_every = 0;
  double lr_decay_factor = 0.75;

  void Validate() const;
};

// min(1, init + iteration * (1 - init) / horizon)
double Anneal(size_t iteration, const TrainConfig& config);

struct LogRecord {
  size_t iteration = 0;
  double miselbo = 0.0;
  std::vector<double> component_bounds;
  double beta = 0.0;
  double seconds = 0.0;
};

// Wall-clock seconds are written only when `with_seconds` is set, so that the default
// output is byte-identical across runs.
void WriteRunLogCsv(std::ostream& out, const std::vector<LogRecord>& log,
                    bool with_seconds = false);

// Mixture VIMCO training with Adam. The model is updated in place; `state` carries
// the iteration counter and optimizer moments so a run can resume exactly.
class Trainer {
 public:
  Trainer(MixtureApprox& model, const PhyloLikelihood& likelihood, TrainConfig config,
          PriorConfig prior = {}, TrainerState state = {});

  // Runs iteration State().iteration. Throws kNonFinite (naming the offending
  // particle) when a gradient or updated parameter is not finite.
  LogRecord Step();
  // Steps until config.iterations. `on_checkpoint` fires every checkpoint_every
  // iterations; a record is logged every eval_every iterations.
  std::vector<LogRecord> Run(const std::function<void(const Trainer&)>& on_checkpoint = {});

  const TrainerState& State() const { return state_; }
  const MixtureApprox& Model() const { return model_; }
  const TrainConfig& Config() const { return config_; }

 private:
  MixtureApprox& model_;
  const PhyloLikelihood& likelihood_;
  TrainConfig config_;
  PriorConfig prior_;
  TrainerState state_;
};

}  // namespace vbpi
