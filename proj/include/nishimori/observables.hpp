#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "nishimori/born_sampler.hpp"
#include "nishimori/geometry.hpp"
#include "nishimori/types.hpp"

namespace nishimori {

/// Decoded magnetization M = sum_j sigma'_j sigma_readout_j.
int magnetization(const Spins& sigma_readout, const Spins& sigma_prime);

struct ConfidenceInterval {
  double lo = 0.0;
  double hi = 0.0;
  double std_error = 0.0;  // standard deviation of the resampled statistic
};

/// Percentile bootstrap of statistic(samples). Deterministic for a given seed.
/// Throws std::invalid_argument for fewer than 10 samples or resamples < 1.
ConfidenceInterval bootstrap(std::span<const double> samples,
                             const std::function<double(std::span<const double>)>& statistic,
                             int resamples, std::uint64_t seed, double level = 0.95);

/// Running sums of M, M^2, M^4 in exact integer arithmetic. Merging partial
/// accumulators in any order gives the same totals.
struct MomentAccumulator {
  std::int64_t shots = 0;
  std::int64_t sum1 = 0;
  std::int64_t sum2 = 0;
  std::int64_t sum4 = 0;

  void add(int m) {
    const std::int64_t m2 = static_cast<std::int64_t>(m) * m;
    ++shots;
    sum1 += m;
    sum2 += m2;
    sum4 += m2 * m2;
  }
  void merge(const MomentAccumulator& o) {
    shots += o.shots;
    sum1 += o.sum1;
    sum2 += o.sum2;
    sum4 += o.sum4;
  }
  /// (<M^2> - <M>^2) / N, nonnegative by construction.
  double f(int n) const;
  /// (<M^4> - <M^2>^2) / N^3, nonnegative by construction.
  double g(int n) const;
};

struct MomentStats {
  int num_sites = 0;
  std::int64_t shots = 0;
  double mean_m = 0.0;
  double mean_m2 = 0.0;
  double mean_m4 = 0.0;
  double f = 0.0;
  double g = 0.0;
  double mean_m_stderr = 0.0;
  ConfidenceInterval f_ci;
  ConfidenceInterval g_ci;
};

double f_statistic(const MomentAccumulator& acc, int n);
double g_statistic(const MomentAccumulator& acc, int n);

/// Moments, f and g of a list of per-shot magnetizations, with bootstrap
/// intervals (resamples = 0 skips the bootstrap).
/// Throws std::invalid_argument for fewer than 2 shots.
MomentStats moment_stats(std::span<const int> m, int num_sites, int resamples = 500,
                         std::uint64_t seed = 0);

/// Per-bond <ZXZ> = <sigma_i s'_ij sigma_j> (readout bits, positive for an ordered
/// state) and per-plaquette <W> = <prod s'>, with lattice averages.
struct BondPlaquetteMeans {
  Eigen::VectorXd zxz;
  Eigen::VectorXd zxz_stderr;
  Eigen::VectorXd w;
  Eigen::VectorXd w_stderr;
  double zxz_mean = 0.0;
  double zxz_mean_stderr = 0.0;  // from the per-shot lattice average
  double w_mean = 0.0;
  double w_mean_stderr = 0.0;
  std::int64_t shots = 0;
};

class BondPlaquetteAccumulator {
 public:
  explicit BondPlaquetteAccumulator(const LatticeGeometry& geom);

  void add(const Shot& shot);
  void merge(const BondPlaquetteAccumulator& other);
  BondPlaquetteMeans result() const;

 private:
  const LatticeGeometry* geom_;
  std::int64_t shots_ = 0;
  Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1> zxz_sum_, w_sum_;
  // per-shot lattice sums and their squares
  std::int64_t zxz_tot_ = 0, zxz_tot2_ = 0, w_tot_ = 0, w_tot2_ = 0;
};

BondPlaquetteMeans bond_plaquette_means(const LatticeGeometry& geom, std::span<const Shot> shots);

/// <ZXZ> = (1-2p_s)(1-2p_sigma)^2 sin 2t_A and <W> = ((1-2p_s) sin 2t_A)^6.
double expected_zxz(double t_a, double p_s, double p_sigma);
double expected_w(double t_a, double p_s);

struct NoiseFit {
  double p_s_hat = 0.0;
  double p_s_stderr = 0.0;
  double p_sigma_hat = 0.0;
  double p_sigma_stderr = 0.0;
  double slope_w = 0.0;
  double slope_w_stderr = 0.0;
  double slope_zxz = 0.0;
  double slope_zxz_stderr = 0.0;
  Eigen::VectorXd residuals_w;
  Eigen::VectorXd residuals_zxz;
  /// A slope fell outside (0, 1]; the affected estimate is clamped into [0, 1/2).
  bool model_violation = false;
};

/// Regresses <W> on sin^6(2t_A) and <ZXZ> on sin(2t_A) through the origin and
/// inverts the slopes (1-2p_s)^6 and (1-2p_s)(1-2p_sigma)^2.
/// Throws std::invalid_argument unless there are >= 3 distinct t_A values.
NoiseFit fit_noise_model(std::span<const double> t_a, std::span<const double> zxz,
                         std::span<const double> w);

}  // namespace nishimori
