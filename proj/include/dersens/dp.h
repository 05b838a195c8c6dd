#ifndef DERSENS_DP_H_
#define DERSENS_DP_H_

#include <cstdint>

#include "dersens/error.h"

namespace dersens {

struct NoiseParams {
  double epsilon = 1.0;
  double beta = 0.1;
  double gamma = 4.0;
  double b = 0.1;  // epsilon / (gamma + 1) - beta
};

// b = epsilon / (gamma + 1) - beta. A nonpositive b throws InfeasibleError
// carrying beta and the epsilon bound (gamma + 1) * beta to exceed.
double DeriveB(double epsilon, double beta, double gamma);
NoiseParams MakeNoiseParams(double epsilon, double beta, double gamma);

// Density proportional to 1 / (1 + |x|^gamma), gamma > 1.
class GenCauchy {
 public:
  explicit GenCauchy(double gamma);
  double gamma() const { return gamma_; }
  // Normalization constant: integral of 1 / (1 + |x|^gamma).
  double Z() const { return z_; }
  double Density(double x) const;
  double LogDensity(double x) const;
  double Cdf(double x) const;
  double Quantile(double u) const;  // u in (0, 1)

 private:
  double gamma_;
  double z_;
};

// ln(1 + t^gamma) for t >= 0 without overflow.
double Log1pPow(double t, double gamma);

class SplitMix64 {
 public:
  explicit SplitMix64(uint64_t seed) : state_(seed) {}
  uint64_t Next();
  double Uniform();  // in (0, 1)

 private:
  uint64_t state_;
};

double Sample(const GenCauchy& dist, SplitMix64& rng);

struct Release {
  double raw = 0.0;
  double sensitivity = 0.0;
  NoiseParams params;
  uint64_t seed = 0;
  double noise = 0.0;   // eta
  double noised = 0.0;  // raw + (sensitivity / b) * eta
};

// Throws InputError for a negative, infinite or NaN sensitivity.
Release Privatize(double raw, double sensitivity, const NoiseParams& params,
                  uint64_t seed);

// Sup over a grid of |ln p1(y) - ln p2(y)| where p_i is the density of
// a_i + c_i * eta, eta ~ GenCauchy(gamma).
double DdpCheck(double a1, double c1, double a2, double c2, double gamma);

// (gamma + 1) * (|a2 - a1| / max(c1, c2) + |ln(c2 / c1)|).
double DdpBound(double a1, double c1, double a2, double c2, double gamma);

// 1 / (1 + e^(-epsilon a) (1 - prior_other) / prior_target).
double GuessingPosteriorBound(double epsilon, double a, double prior_target,
                              double prior_other);

}  // namespace dersens

#endif  // DERSENS_DP_H_
