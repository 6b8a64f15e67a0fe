#include "vbpi/toy_hier.hpp"

#include <cmath>

#include "vbpi/error.hpp"
#include "vbpi/numerics.hpp"

namespace vbpi {

namespace {

std::vector<double> DirichletHalf(size_t n, Rng& rng) {
  std::gamma_distribution<double> gamma(0.5, 1.0);
  std::vector<double> x(n);
  double total = 0.0;
  for (double& v : x) {
    v = gamma(rng);
    total += v;
  }
  if (total <= 0.0) {
    // Every draw underflowed; the symmetric limit is uniform.
    for (double& v : x) v = 1.0 / double(n);
    return x;
  }
  for (double& v : x) v /= total;
  return x;
}

std::vector<double> LogSoftmax(const std::vector<double>& logits) {
  std::vector<double> out = logits;
  LogSoftmaxInPlace(out);
  return out;
}

size_t SampleCategorical(const std::vector<double>& logits, Rng& rng) {
  auto lp = LogSoftmax(logits);
  double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng), acc = 0.0;
  for (size_t i = 0; i < lp.size(); ++i) {
    acc += std::exp(lp[i]);
    if (u < acc) return i;
  }
  return lp.size() - 1;
}

}  // namespace

double HierTarget::LogProb(size_t z1, size_t z2) const {
  return std::log(p1[z1]) + std::log(p2[z1][z2]);
}

HierTarget MakeTarget(size_t n1, size_t n2, uint64_t seed) {
  if (n1 < 2 || n2 < 2) Fail(ErrorKind::kContract, "toy target needs n1, n2 >= 2");
  Rng rng = StreamRng(seed, {0x7a67});
  HierTarget target;
  target.p1 = DirichletHalf(n1, rng);
  for (size_t i = 0; i < n1; ++i) target.p2.push_back(DirichletHalf(n2, rng));
  return target;
}

double HierComponent::LogProb(size_t z1, size_t z2) const {
  return LogSoftmax(logits1)[z1] + LogSoftmax(logits2[z1])[z2];
}

std::vector<double> HierComponent::Flatten() const {
  std::vector<double> flat = logits1;
  for (const auto& row : logits2) flat.insert(flat.end(), row.begin(), row.end());
  return flat;
}

void HierComponent::Assign(std::span<const double> flat) {
  size_t pos = 0;
  for (double& v : logits1) v = flat[pos++];
  for (auto& row : logits2) {
    for (double& v : row) v = flat[pos++];
  }
  if (pos != flat.size()) Fail(ErrorKind::kContract, "toy parameter count mismatch");
}

HierApprox HierApprox::Uniform(size_t S, size_t n1, size_t n2) {
  HierApprox approx;
  for (size_t s = 0; s < S; ++s) {
    approx.components.push_back(
        {std::vector<double>(n1, 0.0), std::vector<std::vector<double>>(n1, std::vector<double>(n2, 0.0))});
  }
  return approx;
}

double HierApprox::LogProb(size_t z1, size_t z2) const {
  std::vector<double> terms;
  for (const auto& c : components) terms.push_back(c.LogProb(z1, z2));
  return LogSumExp(terms) - std::log(double(Size()));
}

std::pair<size_t, size_t> HierApprox::Sample(size_t component, Rng& rng) const {
  const auto& c = components[component];
  size_t z1 = SampleCategorical(c.logits1, rng);
  return {z1, SampleCategorical(c.logits2[z1], rng)};
}

double KlQToP(const HierApprox& approx, const HierTarget& target) {
  double kl = 0.0;
  for (size_t a = 0; a < target.N1(); ++a) {
    for (size_t b = 0; b < target.N2(); ++b) {
      double lq = approx.LogProb(a, b);
      double q = std::exp(lq);
      if (q == 0.0) continue;
      double p = target.p1[a] * target.p2[a][b];
      if (p == 0.0) return std::numeric_limits<double>::infinity();
      kl += q * (lq - target.LogProb(a, b));
    }
  }
  return kl;
}

double KlPToQ(const HierApprox& approx, const HierTarget& target) {
  double kl = 0.0;
  for (size_t a = 0; a < target.N1(); ++a) {
    for (size_t b = 0; b < target.N2(); ++b) {
      double p = target.p1[a] * target.p2[a][b];
      double lq = approx.LogProb(a, b);
      if (p == 0.0) continue;
      if (lq == kNegInf) return std::numeric_limits<double>::infinity();
      kl += p * (target.LogProb(a, b) - lq);
    }
  }
  return kl;
}

double TotalVariation(const HierComponent& a, const HierComponent& b, size_t n1, size_t n2) {
  double tv = 0.0;
  for (size_t i = 0; i < n1; ++i) {
    for (size_t j = 0; j < n2; ++j) tv += std::abs(std::exp(a.LogProb(i, j)) - std::exp(b.LogProb(i, j)));
  }
  return 0.5 * tv;
}

ToyGradient ToyVimcoGradient(const HierApprox& approx, const HierTarget& target, size_t K,
                             Rng& rng) {
  const size_t S = approx.Size(), n1 = target.N1(), n2 = target.N2();
  std::vector<std::pair<size_t, size_t>> draws(S * K);
  std::vector<double> log_f(S * K), log_q(S * K * S);
  for (size_t s = 0; s < S; ++s) {
    for (size_t k = 0; k < K; ++k) draws[s * K + k] = approx.Sample(s, rng);
  }
  for (size_t i = 0; i < S * K; ++i) {
    auto [z1, z2] = draws[i];
    for (size_t j = 0; j < S; ++j) log_q[i * S + j] = approx.components[j].LogProb(z1, z2);
    log_f[i] = target.LogProb(z1, z2) -
               (LogSumExp(std::span<const double>(log_q).subspan(i * S, S)) - std::log(double(S)));
  }
  VimcoSignals sig = ComputeVimcoSignals(S, K, log_f, log_q);

  ToyGradient out;
  out.miselbo = sig.Miselbo();
  std::vector<std::vector<double>> p1(S), p2(S * n1);
  for (size_t j = 0; j < S; ++j) {
    p1[j] = LogSoftmax(approx.components[j].logits1);
    for (double& v : p1[j]) v = std::exp(v);
    for (size_t a = 0; a < n1; ++a) {
      p2[j * n1 + a] = LogSoftmax(approx.components[j].logits2[a]);
      for (double& v : p2[j * n1 + a]) v = std::exp(v);
    }
    out.grads.emplace_back(n1 + n1 * n2, 0.0);
  }
  for (size_t s = 0; s < S; ++s) {
    for (size_t k = 0; k < K; ++k) {
      auto [z1, z2] = draws[s * K + k];
      for (size_t i = 0; i < S; ++i) {
        double c = sig.ScoreCoefficient(i, s, k);
        if (c == 0.0) continue;
        auto& g = out.grads[i];
        for (size_t a = 0; a < n1; ++a) g[a] += c * ((a == z1 ? 1.0 : 0.0) - p1[i][a]);
        const auto& row = p2[i * n1 + z1];
        for (size_t b = 0; b < n2; ++b) {
          g[n1 + z1 * n2 + b] += c * ((b == z2 ? 1.0 : 0.0) - row[b]);
        }
      }
    }
  }
  return out;
}

double DefaultToyLearningRate(size_t S) {
  static constexpr double kRates[] = {0.01, 0.1, 0.1, 0.2, 0.25};
  if (S == 0 || S > 5) Fail(ErrorKind::kRange, "no default learning rate for S = " + std::to_string(S));
  return kRates[S - 1];
}

ToyTrainResult TrainToy(const HierTarget& target, const ToyTrainConfig& config) {
  if (config.K < 2) Fail(ErrorKind::kBaselineUndefined, "leave-one-out baseline needs K >= 2");
  if (config.S == 0) Fail(ErrorKind::kContract, "need at least one component");
  ToyTrainResult result;
  result.approx = HierApprox::Uniform(config.S, target.N1(), target.N2());
  for (size_t it = 0; it < config.iterations; ++it) {
    if (config.log_every > 0 && it % config.log_every == 0) {
      result.curve.push_back({it, KlQToP(result.approx, target)});
    }
    Rng rng = StreamRng(config.seed, {it});
    ToyGradient g = ToyVimcoGradient(result.approx, target, config.K, rng);
    for (size_t s = 0; s < config.S; ++s) {
      auto flat = result.approx.components[s].Flatten();
      for (size_t j = 0; j < flat.size(); ++j) {
        flat[j] += config.learning_rate * g.grads[s][j];
        if (!std::isfinite(flat[j])) {
          Fail(ErrorKind::kNonFinite, "toy parameters became non-finite at iteration " + std::to_string(it));
        }
      }
      result.approx.components[s].Assign(flat);
    }
  }
  return result;
}

}  // namespace vbpi
