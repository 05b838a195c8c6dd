#include "dersens/dp.h"

#include <algorithm>
#include <boost/math/special_functions/beta.hpp>
#include <cmath>
#include <numbers>
#include <vector>

#include "dersens/format.h"

namespace dersens {

double DeriveB(double epsilon, double beta, double gamma) {
  if (!(epsilon > 0) || !(beta > 0) || !(gamma > 1)) {
    throw InputError("need epsilon > 0, beta > 0 and gamma > 1");
  }
  double b = epsilon / (gamma + 1.0) - beta;
  if (!(b > 0)) {
    throw InfeasibleError("epsilon " + FormatDouble(epsilon) +
                              " leaves no noise scale for beta " + FormatDouble(beta) +
                              "; epsilon must exceed " +
                              FormatDouble((gamma + 1.0) * beta),
                          beta, (gamma + 1.0) * beta);
  }
  return b;
}

NoiseParams MakeNoiseParams(double epsilon, double beta, double gamma) {
  return NoiseParams{epsilon, beta, gamma, DeriveB(epsilon, beta, gamma)};
}

GenCauchy::GenCauchy(double gamma) : gamma_(gamma) {
  if (!(gamma > 1)) throw InputError("GenCauchy needs gamma > 1");
  z_ = 2.0 * std::numbers::pi / (gamma * std::sin(std::numbers::pi / gamma));
}

double Log1pPow(double t, double gamma) {
  if (t <= 1.0) return std::log1p(std::pow(t, gamma));
  return gamma * std::log(t) + std::log1p(std::pow(t, -gamma));
}

double GenCauchy::Density(double x) const { return std::exp(LogDensity(x)); }

double GenCauchy::LogDensity(double x) const {
  return -std::log(z_) - Log1pPow(std::abs(x), gamma_);
}

// With w = t^g / (1 + t^g), the half-line integral becomes an incomplete
// beta function with parameters (1/g, 1 - 1/g).
// With v = 1 / (1 + t^gamma), P(X > t) = I_v(1 - 1/gamma, 1/gamma) / 2.
double GenCauchy::Cdf(double x) const {
  if (x == 0) return 0.5;
  if (std::isinf(x)) return x > 0 ? 1.0 : 0.0;
  double v = std::exp(-Log1pPow(std::abs(x), gamma_));
  double tail = 0.5 * boost::math::ibeta(1.0 - 1.0 / gamma_, 1.0 / gamma_, v);
  return x > 0 ? 1.0 - tail : tail;
}

double GenCauchy::Quantile(double u) const {
  if (!(u > 0 && u < 1)) throw InputError("quantile needs u in (0, 1)");
  if (u == 0.5) return 0.0;
  double tail = std::min(u, 1.0 - u);
  double one_minus_v = 0.0;
  double v = boost::math::ibeta_inv(1.0 - 1.0 / gamma_, 1.0 / gamma_, 2.0 * tail, &one_minus_v);
  double t = std::pow(one_minus_v / v, 1.0 / gamma_);
  return u > 0.5 ? t : -t;
}

uint64_t SplitMix64::Next() {
  uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double SplitMix64::Uniform() {
  return (static_cast<double>(Next() >> 11) + 0.5) * 0x1.0p-53;
}

double Sample(const GenCauchy& dist, SplitMix64& rng) {
  return dist.Quantile(rng.Uniform());
}

Release Privatize(double raw, double sensitivity, const NoiseParams& params,
                  uint64_t seed) {
  if (!(sensitivity >= 0) || std::isinf(sensitivity)) {
    throw InputError("sensitivity must be finite and nonnegative, got " +
                     FormatDouble(sensitivity));
  }
  if (!(params.b > 0)) throw InputError("noise scale b must be positive");
  Release r;
  r.raw = raw;
  r.sensitivity = sensitivity;
  r.params = params;
  r.seed = seed;
  SplitMix64 rng(seed);
  r.noise = Sample(GenCauchy(params.gamma), rng);
  r.noised = sensitivity == 0 ? raw : raw + sensitivity / params.b * r.noise;
  return r;
}

double DdpCheck(double a1, double c1, double a2, double c2, double gamma) {
  if (!(c1 > 0) || !(c2 > 0)) throw InputError("ddp check needs positive scales");
  auto log_ratio = [&](double y) {
    return std::abs(std::log(c2 / c1) + Log1pPow(std::abs(y - a2) / c2, gamma) -
                    Log1pPow(std::abs(y - a1) / c1, gamma));
  };
  const double lo = std::min(a1, a2), hi = std::max(a1, a2);
  const double c = std::max(c1, c2);
  std::vector<double> grid;
  const int dense = 20000;
  for (int i = 0; i <= dense; ++i) {
    grid.push_back(lo - 20 * c + (hi - lo + 40 * c) * i / dense);
  }
  for (double r = 20 * c; r < 1e12 * c; r *= 1.05) {
    grid.push_back(lo - r);
    grid.push_back(hi + r);
  }
  grid.push_back(a1);
  grid.push_back(a2);
  double best = 0.0;
  for (double y : grid) best = std::max(best, log_ratio(y));
  // Tails: ln(c2/c1) + gamma ln(c1/c2).
  best = std::max(best, std::abs((gamma - 1.0) * std::log(c1 / c2)));
  return best;
}

double DdpBound(double a1, double c1, double a2, double c2, double gamma) {
  return (gamma + 1.0) * (std::abs(a2 - a1) / std::max(c1, c2) + std::abs(std::log(c2 / c1)));
}

double GuessingPosteriorBound(double epsilon, double a, double prior_target,
                              double prior_other) {
  if (!(prior_target > 0 && prior_target <= 1) || !(prior_other >= 0 && prior_other <= 1)) {
    throw InputError("priors must be probabilities and the target prior positive");
  }
  if (!(a > 0) || !(epsilon >= 0)) throw InputError("need a > 0 and epsilon >= 0");
  return 1.0 / (1.0 + std::exp(-epsilon * a) * (1.0 - prior_other) / prior_target);
}

}  // namespace dersens
