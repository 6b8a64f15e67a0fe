#include "vbpi/objective.hpp"

#include <cmath>
#include <thread>

#include "vbpi/error.hpp"
#include "vbpi/numerics.hpp"

namespace vbpi {

double Particle::LogMixtureJoint() const {
  std::vector<double> terms(log_q_tree.size());
  for (size_t j = 0; j < terms.size(); ++j) terms[j] = LogQ(j);
  return LogSumExp(terms) - std::log(double(terms.size()));
}

Particle EvaluateParticle(const ObjectiveContext& ctx, size_t component, Topology tree,
                          std::vector<double> eps, bool with_gradient) {
  const MixtureApprox& m = ctx.model;
  Particle p;
  p.component = component;
  p.rootings = m.Support().Index(tree);
  p.edges = m.Tables().Index(tree);
  p.branches = m[component].branch.Transform(tree, p.edges, eps);
  p.eps = std::move(eps);
  p.tree = std::move(tree);
  if (with_gradient) {
    std::vector<double> grad;
    p.log_likelihood = ctx.likelihood.LogLikelihoodWithGradient(p.tree, p.branches, grad);
    p.dloglik_db.resize(p.edges.Size());
    for (size_t i = 0; i < p.edges.Size(); ++i) p.dloglik_db[i] = grad[size_t(p.edges.edges[i])];
  } else {
    p.log_likelihood = ctx.likelihood.LogLikelihood(p.tree, p.branches);
  }
  p.log_prior = LogPrior(p.tree, p.branches, ctx.prior);
  for (size_t j = 0; j < m.Size(); ++j) {
    p.log_q_tree.push_back(m[j].sbn.LogProb(p.rootings));
    p.log_q_branch.push_back(m[j].branch.LogDensity(p.edges, p.branches));
  }
  return p;
}

Particle DrawParticle(const ObjectiveContext& ctx, size_t component, Rng& rng, bool with_gradient) {
  const Component& c = ctx.model[component];
  Topology tree = c.sbn.Sample(rng);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> eps(tree.EdgeCount());
  for (double& e : eps) e = normal(rng);
  return EvaluateParticle(ctx, component, std::move(tree), std::move(eps), with_gradient);
}

ParticleBatch DrawBatch(const ObjectiveContext& ctx, size_t K, uint64_t seed, uint64_t iteration,
                        bool with_gradient, size_t threads) {
  ParticleBatch batch;
  batch.S = ctx.model.Size();
  batch.K = K;
  batch.particles.resize(batch.S * K);
  auto work = [&](size_t begin, size_t stride) {
    for (size_t i = begin; i < batch.particles.size(); i += stride) {
      size_t s = i / K, k = i % K;
      Rng rng = StreamRng(seed, {iteration, s, k});
      batch.particles[i] = DrawParticle(ctx, s, rng, with_gradient);
    }
  };
  threads = std::max<size_t>(1, std::min(threads, batch.particles.size()));
  if (threads == 1) {
    work(0, 1);
  } else {
    std::vector<std::exception_ptr> errors(threads);
    std::vector<std::thread> pool;
    for (size_t t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        try {
          work(t, threads);
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }
  return batch;
}

double LogF(const Particle& particle, double beta) {
  double denominator = particle.LogMixtureJoint();
  if (denominator == kNegInf) {
    Fail(ErrorKind::kInvalidParticle, "particle has zero density under every component");
  }
  return beta * particle.log_likelihood + particle.log_prior - denominator;
}

double Miselbo(const ParticleBatch& batch, double beta) {
  if (batch.S == 0 || batch.K == 0) Fail(ErrorKind::kContract, "empty particle batch");
  double total = 0.0;
  std::vector<double> log_f(batch.K);
  for (size_t s = 0; s < batch.S; ++s) {
    for (size_t k = 0; k < batch.K; ++k) log_f[k] = LogF(batch.At(s, k), beta);
    total += LogSumExp(log_f) - std::log(double(batch.K));
  }
  return total / double(batch.S);
}

double MultiSampleElbo(std::span<const Particle> particles, size_t component, double beta) {
  if (particles.empty()) Fail(ErrorKind::kContract, "empty particle set");
  std::vector<double> log_w;
  for (const auto& p : particles) {
    log_w.push_back(beta * p.log_likelihood + p.log_prior - p.LogQ(component));
  }
  return LogSumExp(log_w) - std::log(double(particles.size()));
}

double VimcoSignals::ScoreCoefficient(size_t i, size_t s, size_t k) const {
  double c = -weights[s * K + k] * Responsibility(s, k, i);
  if (s == i) c += local[s * K + k];
  return c / double(S);
}

double VimcoSignals::Miselbo() const {
  double total = 0.0;
  for (double b : bound) total += b;
  return total / double(S);
}

VimcoSignals ComputeVimcoSignals(size_t S, size_t K, std::span<const double> log_f,
                                 std::span<const double> log_q) {
  if (K < 2) Fail(ErrorKind::kBaselineUndefined, "leave-one-out baseline needs K >= 2");
  if (log_f.size() != S * K || log_q.size() != S * K * S) {
    Fail(ErrorKind::kContract, "signal input shape mismatch");
  }
  VimcoSignals sig;
  sig.S = S;
  sig.K = K;
  sig.bound.resize(S);
  sig.local.resize(S * K);
  sig.weights.resize(S * K);
  sig.responsibilities.resize(S * K * S);
  const double log_k = std::log(double(K));
  std::vector<double> others(K);
  for (size_t s = 0; s < S; ++s) {
    std::span<const double> f = log_f.subspan(s * K, K);
    const double lse = LogSumExp(f);
    sig.bound[s] = lse - log_k;
    if (lse == kNegInf) continue;  // every f is zero: no signal from this component
    for (size_t k = 0; k < K; ++k) {
      sig.weights[s * K + k] = std::exp(f[k] - lse);
      // Replace f_k by the geometric mean of the others.
      double sum = 0.0;
      for (size_t j = 0; j < K; ++j) {
        if (j != k) sum += f[j];
      }
      others.assign(f.begin(), f.end());
      others[k] = sum / double(K - 1);
      const double loo = LogSumExp(others);
      // No baseline exists when every other f is zero.
      sig.local[s * K + k] = loo == kNegInf ? 0.0 : sig.bound[s] - (loo - log_k);
    }
  }
  for (size_t i = 0; i < S * K; ++i) {
    std::span<const double> q = log_q.subspan(i * S, S);
    const double lse = LogSumExp(q);
    for (size_t j = 0; j < S; ++j) sig.responsibilities[i * S + j] = std::exp(q[j] - lse);
  }
  return sig;
}

MixtureGradient VimcoGradients(const ObjectiveContext& ctx, const ParticleBatch& batch,
                               double beta, VimcoSignals* signals) {
  const MixtureApprox& m = ctx.model;
  const size_t S = batch.S, K = batch.K;
  if (S != m.Size()) Fail(ErrorKind::kContract, "batch and model disagree on S");
  std::vector<double> log_f(S * K), log_q(S * K * S);
  for (size_t i = 0; i < S * K; ++i) {
    const Particle& p = batch.particles[i];
    log_f[i] = LogF(p, beta);
    for (size_t j = 0; j < S; ++j) log_q[i * S + j] = p.LogQ(j);
  }
  VimcoSignals sig = ComputeVimcoSignals(S, K, log_f, log_q);

  MixtureGradient grad;
  for (size_t j = 0; j < S; ++j) {
    grad.sbn.emplace_back(m[j].sbn.Logits().size(), 0.0);
    grad.branch.emplace_back(m[j].branch.Params().size(), 0.0);
  }
  const double prior_slope = -ctx.prior.branch_rate;
  for (size_t s = 0; s < S; ++s) {
    for (size_t k = 0; k < K; ++k) {
      const Particle& p = batch.At(s, k);
      if (p.dloglik_db.size() != p.edges.Size()) {
        Fail(ErrorKind::kContract, "particle lacks likelihood gradients");
      }
      for (size_t i = 0; i < S; ++i) {
        double c = sig.ScoreCoefficient(i, s, k);
        if (c != 0.0) m[i].sbn.AccumulateGradLogProb(p.rootings, c, grad.sbn[i]);
      }
      const double w = sig.weights[s * K + k] / double(S);
      std::vector<double> dlogf_db(p.edges.Size());
      for (size_t e = 0; e < dlogf_db.size(); ++e) {
        dlogf_db[e] = beta * p.dloglik_db[e] + prior_slope;
      }
      for (size_t j = 0; j < S; ++j) {
        const double r = sig.Responsibility(s, k, j);
        auto dq = m[j].branch.GradLogDensityBranches(p.edges, p.branches);
        for (size_t e = 0; e < dlogf_db.size(); ++e) dlogf_db[e] -= r * dq[e];
        m[j].branch.AccumulateGradLogDensity(p.edges, p.branches, -w * r, grad.branch[j]);
      }
      m[s].branch.AccumulateGradParams(p.edges, p.eps, p.branches, dlogf_db, w, grad.branch[s]);
    }
  }
  if (signals) *signals = std::move(sig);
  return grad;
}

double EstimateLogMarginal(const ObjectiveContext& ctx, size_t n_samples, Rng& rng) {
  if (n_samples == 0) Fail(ErrorKind::kContract, "need at least one sample");
  std::uniform_int_distribution<size_t> pick(0, ctx.model.Size() - 1);
  std::vector<double> log_w(n_samples);
  for (size_t i = 0; i < n_samples; ++i) {
    Particle p = DrawParticle(ctx, pick(rng), rng, false);
    log_w[i] = LogF(p, 1.0);
  }
  return LogSumExp(log_w) - std::log(double(n_samples));
}

MeanStd EstimateLogMarginalRuns(const ObjectiveContext& ctx, size_t n_samples, size_t runs,
                                uint64_t seed) {
  if (runs == 0) Fail(ErrorKind::kContract, "need at least one run");
  std::vector<double> values;
  for (size_t r = 0; r < runs; ++r) {
    Rng rng = StreamRng(seed, {r});
    values.push_back(EstimateLogMarginal(ctx, n_samples, rng));
  }
  MeanStd out;
  for (double v : values) out.mean += v;
  out.mean /= double(runs);
  if (runs > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    out.stddev = std::sqrt(ss / double(runs - 1));
  }
  return out;
}

KlResult KlReferenceToModel(const ReferencePosterior& reference, const MixtureApprox& model) {
  KlResult result;
  for (size_t i = 0; i < reference.topologies.size(); ++i) {
    const double p = reference.probabilities[i];
    RootingIndex index = model.Support().Index(reference.topologies[i]);
    if (index.Empty()) {
      result.out_of_support_mass += p;
      continue;
    }
    std::vector<double> terms;
    for (size_t j = 0; j < model.Size(); ++j) terms.push_back(model[j].sbn.LogProb(index));
    double log_q = LogSumExp(terms) - std::log(double(model.Size()));
    result.kl += p * (std::log(p) - log_q);
  }
  return result;
}

}  // namespace vbpi
