#include "nishimori/observables.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <tuple>
#include <stdexcept>

namespace nishimori {

int magnetization(const Spins& sigma_readout, const Spins& sigma_prime) {
  int m = 0;
  for (Eigen::Index j = 0; j < sigma_readout.size(); ++j) m += sigma_readout[j] * sigma_prime[j];
  return m;
}

namespace {

double quantile_sorted(const std::vector<double>& v, double q) {
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto i = static_cast<std::size_t>(std::floor(pos));
  if (i + 1 >= v.size()) return v.back();
  const double frac = pos - static_cast<double>(i);
  return v[i] + frac * (v[i + 1] - v[i]);
}

ConfidenceInterval summarize(std::vector<double> stats, double level) {
  ConfidenceInterval ci;
  const double n = static_cast<double>(stats.size());
  double mean = 0.0;
  for (double s : stats) mean += s;
  mean /= n;
  double var = 0.0;
  for (double s : stats) var += (s - mean) * (s - mean);
  ci.std_error = stats.size() > 1 ? std::sqrt(var / (n - 1.0)) : 0.0;
  std::sort(stats.begin(), stats.end());
  const double alpha = 1.0 - level;
  ci.lo = quantile_sorted(stats, alpha / 2.0);
  ci.hi = quantile_sorted(stats, 1.0 - alpha / 2.0);
  return ci;
}

}  // namespace

ConfidenceInterval bootstrap(std::span<const double> samples,
                             const std::function<double(std::span<const double>)>& statistic,
                             int resamples, std::uint64_t seed, double level) {
  if (samples.size() < 10) throw std::invalid_argument("bootstrap: need at least 10 samples");
  if (resamples < 1) throw std::invalid_argument("bootstrap: resamples must be positive");
  if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("bootstrap: level must be in (0, 1)");
  Rng rng(seed);
  std::vector<double> draw(samples.size());
  std::vector<double> stats;
  stats.reserve(static_cast<std::size_t>(resamples));
  for (int r = 0; r < resamples; ++r) {
    for (auto& d : draw) d = samples[rng.below(samples.size())];
    stats.push_back(statistic(draw));
  }
  return summarize(std::move(stats), level);
}

double MomentAccumulator::f(int n) const {
  const __int128 num = static_cast<__int128>(shots) * sum2 - static_cast<__int128>(sum1) * sum1;
  const double den = static_cast<double>(shots) * static_cast<double>(shots) * n;
  return static_cast<double>(num) / den;
}

double MomentAccumulator::g(int n) const {
  const __int128 num = static_cast<__int128>(shots) * sum4 - static_cast<__int128>(sum2) * sum2;
  const double n3 = static_cast<double>(n) * n * n;
  const double den = static_cast<double>(shots) * static_cast<double>(shots) * n3;
  return static_cast<double>(num) / den;
}

double f_statistic(const MomentAccumulator& acc, int n) {
  if (acc.shots < 2) throw std::invalid_argument("f_statistic: need at least 2 shots");
  return acc.f(n);
}

double g_statistic(const MomentAccumulator& acc, int n) {
  if (acc.shots < 2) throw std::invalid_argument("g_statistic: need at least 2 shots");
  return acc.g(n);
}

MomentStats moment_stats(std::span<const int> m, int num_sites, int resamples, std::uint64_t seed) {
  if (m.size() < 2) throw std::invalid_argument("moment_stats: need at least 2 shots");
  MomentAccumulator acc;
  for (int v : m) acc.add(v);
  MomentStats st;
  st.num_sites = num_sites;
  st.shots = acc.shots;
  const double n = static_cast<double>(acc.shots);
  st.mean_m = static_cast<double>(acc.sum1) / n;
  st.mean_m2 = static_cast<double>(acc.sum2) / n;
  st.mean_m4 = static_cast<double>(acc.sum4) / n;
  st.f = f_statistic(acc, num_sites);
  st.g = g_statistic(acc, num_sites);
  st.mean_m_stderr = std::sqrt(std::max(0.0, st.mean_m2 - st.mean_m * st.mean_m) / n);
  if (resamples > 0) {
    // f and g share each resample
    Rng rng(seed);
    std::vector<double> fs, gs;
    fs.reserve(static_cast<std::size_t>(resamples));
    gs.reserve(static_cast<std::size_t>(resamples));
    for (int r = 0; r < resamples; ++r) {
      MomentAccumulator b;
      for (std::size_t i = 0; i < m.size(); ++i) b.add(m[rng.below(m.size())]);
      fs.push_back(b.f(num_sites));
      gs.push_back(b.g(num_sites));
    }
    st.f_ci = summarize(std::move(fs), 0.95);
    st.g_ci = summarize(std::move(gs), 0.95);
  }
  return st;
}

BondPlaquetteAccumulator::BondPlaquetteAccumulator(const LatticeGeometry& geom)
    : geom_(&geom),
      zxz_sum_(decltype(zxz_sum_)::Zero(geom.num_bonds())),
      w_sum_(decltype(w_sum_)::Zero(geom.num_plaquettes())) {}

void BondPlaquetteAccumulator::add(const Shot& shot) {
  const auto& geom = *geom_;
  std::int64_t zt = 0;
  for (int b = 0; b < geom.num_bonds(); ++b) {
    const auto& bd = geom.bond(b);
    const int v = shot.sigma_readout[bd.site_a] * shot.s_prime[b] * shot.sigma_readout[bd.site_b];
    zxz_sum_[b] += v;
    zt += v;
  }
  std::int64_t wt = 0;
  for (int p = 0; p < geom.num_plaquettes(); ++p) {
    int prod = 1;
    for (int b : geom.plaquette(p)) prod *= shot.s_prime[b];
    w_sum_[p] += prod;
    wt += prod;
  }
  ++shots_;
  zxz_tot_ += zt;
  zxz_tot2_ += zt * zt;
  w_tot_ += wt;
  w_tot2_ += wt * wt;
}

void BondPlaquetteAccumulator::merge(const BondPlaquetteAccumulator& o) {
  shots_ += o.shots_;
  zxz_sum_ += o.zxz_sum_;
  w_sum_ += o.w_sum_;
  zxz_tot_ += o.zxz_tot_;
  zxz_tot2_ += o.zxz_tot2_;
  w_tot_ += o.w_tot_;
  w_tot2_ += o.w_tot2_;
}

namespace {

// Mean and standard error of a sum of +/-1 samples.
std::pair<double, double> pm1_mean(std::int64_t sum, std::int64_t n) {
  const double mean = static_cast<double>(sum) / static_cast<double>(n);
  const double var = std::max(0.0, 1.0 - mean * mean);
  return {mean, n > 1 ? std::sqrt(var / static_cast<double>(n - 1)) : 0.0};
}

std::pair<double, double> lattice_mean(std::int64_t tot, std::int64_t tot2, std::int64_t n,
                                       int terms) {
  if (terms == 0 || n == 0) return {0.0, 0.0};
  const double dn = static_cast<double>(n);
  const double mean = static_cast<double>(tot) / dn;
  const double var = std::max(0.0, static_cast<double>(tot2) / dn - mean * mean);
  const double se = n > 1 ? std::sqrt(var / (dn - 1.0)) : 0.0;
  return {mean / terms, se / terms};
}

}  // namespace

BondPlaquetteMeans BondPlaquetteAccumulator::result() const {
  BondPlaquetteMeans r;
  r.shots = shots_;
  const int nb = geom_->num_bonds();
  const int np = geom_->num_plaquettes();
  r.zxz.resize(nb);
  r.zxz_stderr.resize(nb);
  r.w.resize(np);
  r.w_stderr.resize(np);
  if (shots_ == 0) return r;
  for (int b = 0; b < nb; ++b) std::tie(r.zxz[b], r.zxz_stderr[b]) = pm1_mean(zxz_sum_[b], shots_);
  for (int p = 0; p < np; ++p) std::tie(r.w[p], r.w_stderr[p]) = pm1_mean(w_sum_[p], shots_);
  std::tie(r.zxz_mean, r.zxz_mean_stderr) = lattice_mean(zxz_tot_, zxz_tot2_, shots_, nb);
  std::tie(r.w_mean, r.w_mean_stderr) = lattice_mean(w_tot_, w_tot2_, shots_, np);
  return r;
}

BondPlaquetteMeans bond_plaquette_means(const LatticeGeometry& geom, std::span<const Shot> shots) {
  BondPlaquetteAccumulator acc(geom);
  for (const auto& s : shots) acc.add(s);
  return acc.result();
}

double expected_zxz(double t_a, double p_s, double p_sigma) {
  const double r = 1.0 - 2.0 * p_sigma;
  return (1.0 - 2.0 * p_s) * r * r * std::sin(2.0 * t_a);
}

double expected_w(double t_a, double p_s) {
  return std::pow((1.0 - 2.0 * p_s) * std::sin(2.0 * t_a), 6);
}

namespace {

struct OriginFit {
  double slope = 0.0;
  double stderr_ = 0.0;
  Eigen::VectorXd residuals;
};

OriginFit fit_through_origin(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  OriginFit f;
  const double sxx = x.squaredNorm();
  if (!(sxx > 0.0)) throw std::invalid_argument("fit_noise_model: regressor is identically zero");
  f.slope = x.dot(y) / sxx;
  f.residuals = y - f.slope * x;
  const auto n = static_cast<double>(x.size());
  f.stderr_ = std::sqrt(f.residuals.squaredNorm() / (n - 1.0) / sxx);
  return f;
}

}  // namespace

NoiseFit fit_noise_model(std::span<const double> t_a, std::span<const double> zxz,
                         std::span<const double> w) {
  if (zxz.size() != t_a.size() || w.size() != t_a.size())
    throw std::invalid_argument("fit_noise_model: series lengths differ");
  if (std::set<double>(t_a.begin(), t_a.end()).size() < 3)
    throw std::invalid_argument("fit_noise_model: need at least 3 distinct t_A values");
  const auto n = static_cast<Eigen::Index>(t_a.size());
  Eigen::VectorXd x1(n), x6(n), yz(n), yw(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    x1[i] = std::sin(2.0 * t_a[i]);
    x6[i] = std::pow(x1[i], 6);
    yz[i] = zxz[i];
    yw[i] = w[i];
  }
  const OriginFit fw = fit_through_origin(x6, yw);
  const OriginFit fz = fit_through_origin(x1, yz);

  NoiseFit out;
  out.slope_w = fw.slope;
  out.slope_w_stderr = fw.stderr_;
  out.slope_zxz = fz.slope;
  out.slope_zxz_stderr = fz.stderr_;
  out.residuals_w = fw.residuals;
  out.residuals_zxz = fz.residuals;

  auto in_range = [](double s) { return s > 0.0 && s <= 1.0; };
  out.model_violation = !in_range(fw.slope) || !in_range(fz.slope);

  // 1 - 2p_s = slope_w^(1/6)
  const double sw = std::clamp(fw.slope, 1e-300, 1.0);
  const double q_s = std::pow(sw, 1.0 / 6.0);
  out.p_s_hat = std::clamp((1.0 - q_s) / 2.0, 0.0, std::nextafter(0.5, 0.0));
  out.p_s_stderr = q_s / (12.0 * sw) * fw.stderr_;

  // (1 - 2p_sigma)^2 = slope_zxz / (1 - 2p_s)
  const double u = std::clamp(fz.slope / q_s, 1e-300, 1.0);
  if (fz.slope / q_s > 1.0) out.model_violation = true;
  const double q_sigma = std::sqrt(u);
  out.p_sigma_hat = std::clamp((1.0 - q_sigma) / 2.0, 0.0, std::nextafter(0.5, 0.0));
  const double rel_u = std::hypot(fz.stderr_ / std::max(std::abs(fz.slope), 1e-300),
                                  fw.stderr_ / (6.0 * sw));
  out.p_sigma_stderr = q_sigma * rel_u / 4.0;
  return out;
}

}  // namespace nishimori
