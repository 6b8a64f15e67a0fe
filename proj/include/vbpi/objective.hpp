#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "vbpi/likelihood.hpp"
#include "vbpi/mixture.hpp"
#include "vbpi/tree_io.hpp"

namespace vbpi {

// Everything the estimators need to score a particle.
struct ObjectiveContext {
  const MixtureApprox& model;
  const PhyloLikelihood& likelihood;
  PriorConfig prior;
};

// One draw (tree, B) from component `component`, with cached densities under every
// component of the mixture.
struct Particle {
  size_t component = 0;
  Topology tree;
  RootingIndex rootings;
  EdgeIndex edges;
  BranchLengths branches;
  std::vector<double> eps;
  double log_likelihood = 0.0;
  double log_prior = 0.0;
  std::vector<double> log_q_tree;    // per component
  std::vector<double> log_q_branch;  // per component
  std::vector<double> dloglik_db;    // per edge in EdgeIndex order; empty when not requested

  double LogQ(size_t j) const { return log_q_tree[j] + log_q_branch[j]; }
  // log (1/S) sum_j q_j(B | tree) q_j(tree)
  double LogMixtureJoint() const;
};

// S * K particles, particle k of component s at position s * K + k.
struct ParticleBatch {
  size_t S = 0;
  size_t K = 0;
  std::vector<Particle> particles;

  const Particle& At(size_t s, size_t k) const { return particles[s * K + k]; }
};

Particle EvaluateParticle(const ObjectiveContext& ctx, size_t component, Topology tree,
                          std::vector<double> eps, bool with_gradient);
Particle DrawParticle(const ObjectiveContext& ctx, size_t component, Rng& rng, bool with_gradient);
// Particle (s, k) draws from StreamRng(seed, {iteration, s, k}), so the batch does not
// depend on `threads`.
ParticleBatch DrawBatch(const ObjectiveContext& ctx, size_t K, uint64_t seed, uint64_t iteration,
                        bool with_gradient, size_t threads = 1);

// beta * log p(X | tree, B) + log p(B, tree) - log mixture density.
// Throws kInvalidParticle when no component supports the particle.
double LogF(const Particle& particle, double beta);

// (1/S) sum_s log (1/K) sum_k f(particle_s^k).
double Miselbo(const ParticleBatch& batch, double beta = 1.0);
// Importance weighted bound of a single approximation: log (1/K) sum_k p / q_component.
double MultiSampleElbo(std::span<const Particle> particles, size_t component, double beta = 1.0);

// Learning signals shared by the phylogenetic and the toy estimators.
struct VimcoSignals {
  size_t S = 0;
  size_t K = 0;
  std::vector<double> bound;             // per component: log (1/K) sum_k f
  // [s*K+k]: leave-one-out signal with a geometric-mean baseline; zero when every
  // other f is zero.
  std::vector<double> local;
  std::vector<double> weights;           // [s*K+k]: softmax_k log f within component s
                                         // both stay zero for a component whose f are all zero
  std::vector<double> responsibilities;  // [(s*K+k)*S+j]: q_j / sum q at particle (s, k)

  double Responsibility(size_t s, size_t k, size_t j) const {
    return responsibilities[(s * K + k) * S + j];
  }
  // Coefficient of grad log q_{phi_i}(particle_s^k) in the estimator.
  double ScoreCoefficient(size_t i, size_t s, size_t k) const;
  double Miselbo() const;
};

// log_f[s*K+k]; log_q[(s*K+k)*S+j] is log q_j of particle (s, k). Throws
// kBaselineUndefined for K < 2.
VimcoSignals ComputeVimcoSignals(size_t S, size_t K, std::span<const double> log_f,
                                 std::span<const double> log_q);

struct MixtureGradient {
  std::vector<std::vector<double>> sbn;     // per component, over logits
  std::vector<std::vector<double>> branch;  // per component, over branch parameters
};

// Mixture VIMCO for the SBN logits and reparameterized gradients for the branch
// parameters. Particles need dloglik_db.
MixtureGradient VimcoGradients(const ObjectiveContext& ctx, const ParticleBatch& batch,
                               double beta, VimcoSignals* signals = nullptr);

// One importance-sampling estimate of log p(X) from n draws of the mixture.
double EstimateLogMarginal(const ObjectiveContext& ctx, size_t n_samples, Rng& rng);

struct MeanStd {
  double mean = 0.0;
  double stddev = 0.0;
};
MeanStd EstimateLogMarginalRuns(const ObjectiveContext& ctx, size_t n_samples, size_t runs,
                                uint64_t seed);

struct KlResult {
  double kl = 0.0;
  double out_of_support_mass = 0.0;
};
// KL(reference || mixture topology marginal), skipping and reporting unsupported trees.
KlResult KlReferenceToModel(const ReferencePosterior& reference, const MixtureApprox& model);

}  // namespace vbpi
