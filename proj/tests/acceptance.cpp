// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
// CSV artifacts of every run are left in --workdir.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "nishimori/born_sampler.hpp"
#include "nishimori/decoder.hpp"
#include "nishimori/experiments.hpp"
#include "nishimori/fidelity.hpp"
#include "nishimori/matching.hpp"
#include "nishimori/observables.hpp"
#include "nishimori/oracles/brute_force.hpp"
#include "nishimori/oracles/circuit.hpp"
#include "nishimori/oracles/exhaustive_matching.hpp"
#include "nishimori/oracles/statevector.hpp"

using namespace nishimori;
namespace fs = std::filesystem;

namespace {

struct NoiseRow {
  int ly;
  double p_s;
  double p_sigma;
};
// measured per-device error rates for L_y = 2, 3, 4 (N = 10, 28, 54)
constexpr NoiseRow kNoiseTable[] = {{2, 0.042, 0.012}, {3, 0.051, 0.018}, {4, 0.056, 0.023}};

constexpr std::uint64_t kShots = 20000;
constexpr std::uint64_t kSeed = 20240611;

struct Context {
  fs::path workdir;
  int workers = 1;
};

class Report {
 public:
  void detail(const char* fmt, ...) __attribute__((format(printf, 2, 3))) {
    char buf[512];
    va_list ap;
    va_start(ap, fmt);
    std::vsnprintf(buf, sizeof buf, fmt, ap);
    va_end(ap);
    lines_.emplace_back(buf);
  }
  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass_ = false;
      lines_.push_back("violated: " + what);
    }
  }
  bool pass() const { return pass_; }
  const std::vector<std::string>& lines() const { return lines_; }

 private:
  bool pass_ = true;
  std::vector<std::string> lines_;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

SweepConfig base_config(const Context& ctx, const std::string& name) {
  SweepConfig c;
  c.shots = kShots;
  c.seed = kSeed;
  c.workers = ctx.workers;
  c.bootstrap = 500;
  c.output = (ctx.workdir / (name + ".csv")).string();
  return c;
}

std::vector<const PointResult*> series(const std::vector<PointResult>& rows, int size) {
  std::vector<const PointResult*> out;
  for (const auto& r : rows)
    if (r.size == size) out.push_back(&r);
  return out;
}

// t_A whose coherent flip probability is a
double angle_for_flip(double a) { return kQuarterPi - std::asin(std::sqrt(a)); }

// --------------------------------------------------------------------------

void oracle_equivalence(const Context&, Report& rep) {
  const std::pair<const char*, LatticeGeometry> geoms[] = {
      {"single bond", build_chain(2)}, {"hexagon", build_hexagon()},
      {"two hexagons", build_brickwall(2)}};
  const double angles[] = {0.0, kPi / 8, kPi / 6, kQuarterPi};
  for (const auto& [name, g] : geoms) {
    double worst = 0.0;
    for (double t : angles) {
      const double tv = oracle::total_variation(
          oracle::statevector_distribution(oracle::build_circuit(g, t)),
          oracle::closed_form_distribution(g, t));
      worst = std::max(worst, tv);
      rep.require(tv < 1e-10, std::string(name) + " TV < 1e-10");
    }
    rep.detail("%-12s (%2d qubits) max TV over t_A in {0, pi/8, pi/6, pi/4}: %.2e", name,
               g.num_qubits(), worst);
  }
}

void decoder_exactness(const Context&, Report& rep) {
  const double p_tilde[] = {0.02, 0.0675, 0.15};
  constexpr int kInstances = 1000;
  const std::pair<const char*, LatticeGeometry> geoms[] = {{"chain N=12", build_chain(12)},
                                                           {"brickwall L_y=2", build_brickwall(2)}};
  std::uint64_t tag = 0;
  for (const auto& [name, g] : geoms) {
    std::unique_ptr<Decoder> dec;
    if (g.kind() != LatticeKind::chain) dec = std::make_unique<Decoder>(g);
    for (double p : p_tilde) {
      const double t = angle_for_flip(p);
      int exact = 0;
      for (int i = 0; i < kInstances; ++i) {
        Rng rng = Rng::stream(kSeed, 1000 + tag, static_cast<std::uint64_t>(i));
        const Shot shot = sample_shot(g, t, rng);
        const DecodeResult r = dec ? dec->decode(shot.s_prime) : decode_chain(g, shot.s_prime);
        const int best = oracle::brute_force_ground_state(g, shot.s_prime).energy;
        exact += ising_energy(g, shot.s_prime, r.sigma_prime) == best && r.energy == best;
      }
      ++tag;
      rep.detail("%-16s p~=%.4f  optimal %d/%d", name, p, exact, kInstances);
      rep.require(exact == kInstances, std::string(name) + " decodes are ground states");
    }
  }

  // matching weights on random defect sets of the L_y = 4 dual graph
  const auto g = build_brickwall(4);
  const DualDistances dist(g);
  BlossomMatcher matcher;
  constexpr int kSets = 2000;
  int agree = 0;
  Rng rng = Rng::stream(kSeed, 2000, 0);
  for (int i = 0; i < kSets; ++i) {
    const int k = 1 + static_cast<int>(rng.below(oracle::kMaxExhaustiveDefects));
    std::vector<int> plaq(static_cast<std::size_t>(g.num_plaquettes()));
    for (int j = 0; j < g.num_plaquettes(); ++j) plaq[j] = j;
    std::shuffle(plaq.begin(), plaq.end(), rng);
    plaq.resize(static_cast<std::size_t>(k));
    Eigen::MatrixXi pair(k, k);
    Eigen::VectorXi bnd(k);
    for (int a = 0; a < k; ++a) {
      bnd[a] = dist.distance(plaq[a], dist.boundary_node());
      for (int b = 0; b < k; ++b) pair(a, b) = dist.distance(plaq[a], plaq[b]);
    }
    agree += match_with_boundary(pair, bnd, matcher).weight ==
             oracle::exhaustive_matching(pair, bnd).weight;
  }
  rep.detail("blossom vs exhaustive matching weight, 1-12 defects: %d/%d equal", agree, kSets);
  rep.require(agree == kSets, "blossom matching weight equals exhaustive weight");
}

void observable_formulas(const Context& ctx, Report& rep) {
  auto c = base_config(ctx, "observables_ly4");
  c.sizes = {4};
  c.t_grid = linspace(0.0, kQuarterPi, 11);
  c.p_s_grid = {0.056};
  c.p_sigma = 0.023;
  const auto rows = run_sweep(c);
  double worst = 0.0;
  for (const auto& r : rows) {
    const double zt = expected_zxz(r.t_a, r.p_s, r.p_sigma);
    const double wt = expected_w(r.t_a, r.p_s);
    const double zz = std::abs(r.zxz - zt) / r.zxz_stderr;
    const double zw = std::abs(r.w - wt) / r.w_stderr;
    worst = std::max({worst, zz, zw});
    rep.detail("t_A=%.3fpi  ZXZ %.4f (model %.4f, %.1f sigma)  W %.4f (model %.4f, %.1f sigma)",
               r.t_a / kPi, r.zxz, zt, zz, r.w, wt, zw);
    rep.require(zz <= 4.0 && zw <= 4.0, "lattice averages within 4 sigma of the model");
  }
  const auto& top = rows.back();
  rep.detail("worst deviation %.2f sigma; at pi/4: ZXZ=%.4f (~0.81), W=%.4f (~0.49)", worst,
             top.zxz, top.w);
  rep.require(std::abs(top.zxz - 0.81) < 0.01, "ZXZ at pi/4 is ~0.81");
  rep.require(std::abs(top.w - 0.49) < 0.01, "W at pi/4 is ~0.49");
}

void noise_fit_closure(const Context& ctx, Report& rep) {
  std::vector<NoiseFitRow> all;
  for (const auto& row : kNoiseTable) {
    auto c = base_config(ctx, "noisefit_sweep_ly" + std::to_string(row.ly));
    c.sizes = {row.ly};
    c.t_grid = linspace(0.0, kQuarterPi, 11);
    c.p_s_grid = {row.p_s};
    c.p_sigma = row.p_sigma;
    c.bootstrap = 0;
    const auto fits = fit_sweep_noise(run_sweep(c));
    const auto& f = fits.at(0).fit;
    rep.detail("L_y=%d  true (%.3f, %.3f)  fitted p_s=%.4f+-%.4f  p_sigma=%.4f+-%.4f", row.ly,
               row.p_s, row.p_sigma, f.p_s_hat, f.p_s_stderr, f.p_sigma_hat, f.p_sigma_stderr);
    rep.require(std::abs(f.p_s_hat - row.p_s) <= 0.005, "p_s recovered within 0.005");
    rep.require(std::abs(f.p_sigma_hat - row.p_sigma) <= 0.005, "p_sigma recovered within 0.005");
    all.insert(all.end(), fits.begin(), fits.end());
  }
  write_noise_fit_csv((ctx.workdir / "noisefit.csv").string(), all);
}

void threshold_locations(const Context& ctx, Report& rep) {
  constexpr double kDecoderThreshold = 0.0675;
  // (a) p_s sweep at the Clifford point; the peak is taken along p_s
  {
    auto c = base_config(ctx, "threshold_ps");
    c.sizes = {2, 3, 4};
    c.t_grid = {kQuarterPi};
    c.p_s_grid = linspace(0.0, 0.15, 31);
    const auto rows = run_sweep(c);
    std::vector<GPeak> peaks;
    for (int ly : c.sizes) {
      std::vector<double> x, g, se;
      for (const auto* r : series(rows, ly)) {
        x.push_back(r->p_s);
        g.push_back(r->moments.g);
        se.push_back(r->moments.g_ci.std_error);
      }
      peaks.push_back(find_g_peak(x, g, se, 500, kSeed + static_cast<std::uint64_t>(ly)));
      rep.detail("(a) L_y=%d  g-peak at p_s=%.4f+-%.4f%s", ly, peaks.back().location,
                 peaks.back().location_stderr, peaks.back().on_edge ? " (grid edge)" : "");
    }
    rep.require(std::abs(peaks.back().location - kDecoderThreshold) <= 0.010,
                "(a) L_y=4 peak within 0.0675 +- 0.010");
    // toward the threshold: no step moves away by more than 2 combined sigma,
    // and the largest size ends strictly closer than the smallest
    for (std::size_t i = 1; i < peaks.size(); ++i) {
      const double d0 = std::abs(peaks[i - 1].location - kDecoderThreshold);
      const double d1 = std::abs(peaks[i].location - kDecoderThreshold);
      const double se = std::hypot(peaks[i - 1].location_stderr, peaks[i].location_stderr);
      rep.require(d1 <= d0 + 2 * se, "(a) peaks do not move away from 0.0675");
    }
    rep.require(std::abs(peaks.back().location - kDecoderThreshold) <
                    std::abs(peaks.front().location - kDecoderThreshold),
                "(a) L_y=4 peak closer to 0.0675 than L_y=2 peak");
  }
  // (b) t_A sweep at p_s = 0.05
  {
    auto c = base_config(ctx, "threshold_ta");
    c.sizes = {2, 3, 4};
    c.t_grid = linspace(0.0, kQuarterPi, 41);
    c.p_s_grid = {0.05};
    const auto rows = run_sweep(c);
    const auto peaks = sweep_peaks(rows, 500, kSeed);
    write_peaks_csv((ctx.workdir / "threshold_ta_peaks.csv").string(), peaks);
    for (const auto& p : peaks)
      rep.detail("(b) L_y=%d  g-peak at t_A=%.4fpi+-%.4fpi%s", p.size, p.peak.location / kPi,
                 p.peak.location_stderr / kPi, p.peak.on_edge ? " (grid edge)" : "");
    rep.require(std::abs(peaks.back().peak.location / kPi - 0.205) <= 0.010,
                "(b) L_y=4 peak within 0.205pi +- 0.010pi");
  }
  // (c) iso-p~ pairs: Clifford point with injected p_s vs purely coherent error
  {
    auto c = base_config(ctx, "iso_ptilde");
    c.sizes = {4};
    const auto g = build_brickwall(4);
    const double targets[] = {0.03, 0.05, 0.0675, 0.09, 0.12};
    int k = 0;
    for (double p : targets) {
      PointOptions opt;
      opt.shots = kShots;
      opt.seed = kSeed;
      opt.workers = ctx.workers;
      opt.bootstrap = 500;
      const auto a = run_point(g, kQuarterPi, p, 0.0, opt);
      const auto b = run_point(g, angle_for_flip(p), 0.0, 0.0, opt);
      const double zf =
          (a.moments.f - b.moments.f) / std::hypot(a.moments.f_ci.std_error, b.moments.f_ci.std_error);
      const double zg =
          (a.moments.g - b.moments.g) / std::hypot(a.moments.g_ci.std_error, b.moments.g_ci.std_error);
      rep.detail("(c) p~=%.4f: (pi/4, p_s=%.4f) vs (%.4fpi, 0)  f %.3f/%.3f z=%+.2f  g %.3f/%.3f z=%+.2f",
                 p, p, b.t_a / kPi, a.moments.f, b.moments.f, zf, a.moments.g, b.moments.g, zg);
      // 10 two-sided tests at |z| < 3 keep the family-wise false alarm rate near 3%
      rep.require(std::abs(zf) < 3.0 && std::abs(zg) < 3.0, "(c) iso-p~ pairs agree within 3 sigma");
      ++k;
    }
    rep.require(k >= 5, "(c) at least 5 pairs");
  }
}

void scaling(const Context& ctx, Report& rep) {
  std::vector<double> sizes, heights;
  std::vector<PointResult> all;
  for (const auto& row : kNoiseTable) {
    auto c = base_config(ctx, "scaling_ly" + std::to_string(row.ly));
    c.sizes = {row.ly};
    c.t_grid = linspace(0.0, kQuarterPi, 21);
    c.p_s_grid = {row.p_s};
    c.p_sigma = row.p_sigma;
    const auto rows = run_sweep(c);
    double fmax = 0.0;
    for (const auto& r : rows) fmax = std::max(fmax, r.moments.f);
    sizes.push_back(row.ly);
    heights.push_back(fmax);
    rep.detail("L_y=%d  (p_s, p_sigma)=(%.3f, %.3f)  f peak %.3f", row.ly, row.p_s, row.p_sigma,
               fmax);
  }
  const auto fit = fit_scaling(sizes, heights);
  rep.detail("f peak ~ L_y^%.3f (+-%.3f)", fit.exponent, fit.exponent_stderr);
  rep.require(fit.exponent >= 1.5 && fit.exponent <= 2.3, "exponent in [1.5, 2.3]");
}

void one_d_contrast(const Context& ctx, Report& rep) {
  auto c = base_config(ctx, "chain_contrast");
  c.kind = LatticeKind::chain;
  c.sizes = {10, 28, 54};
  c.t_grid = linspace(0.0, kQuarterPi, 41);
  c.p_s_grid = {0.05};
  const auto rows = run_sweep(c);
  const double step = c.t_grid[1] - c.t_grid[0];
  const auto peaks = sweep_peaks(rows, 500, kSeed);
  write_peaks_csv((ctx.workdir / "chain_contrast_peaks.csv").string(), peaks);
  for (const auto& p : peaks)
    rep.detail("N=%d  g-peak at t_A=%.4fpi%s", p.size, p.peak.location / kPi,
               p.peak.on_edge ? " (grid edge)" : "");
  rep.require(std::abs(peaks.back().peak.location - kQuarterPi) <= step + 1e-12,
              "N=54 g-peak within one grid step of pi/4");
  rep.require(std::abs(peaks[2].peak.location - kQuarterPi) <=
                  std::abs(peaks[0].peak.location - kQuarterPi),
              "g-peak of N=54 at least as close to pi/4 as N=10");

  const auto n28 = series(rows, 28);
  const auto n54 = series(rows, 54);
  int inconsistent = 0;
  double worst = 0.0, worst_t = 0.0;
  for (std::size_t i = 0; i < n28.size(); ++i) {
    if (n28[i]->t_a > 0.2 * kPi + 1e-12) continue;
    const double z = (n54[i]->moments.f - n28[i]->moments.f) /
                     std::hypot(n54[i]->moments.f_ci.std_error, n28[i]->moments.f_ci.std_error);
    if (std::abs(z) > 2.0) ++inconsistent;
    if (std::abs(z) > std::abs(worst)) {
      worst = z;
      worst_t = n28[i]->t_a;
    }
  }
  rep.detail("f(54) - f(28) for t_A <= 0.2pi: %d grid points beyond 2 sigma, worst z=%+.1f at %.4fpi",
             inconsistent, worst, worst_t / kPi);
  rep.require(inconsistent == 0, "f(N=54) - f(N=28) consistent with 0 at 2 sigma for t_A <= 0.2pi");
}

void fidelity(const Context& ctx, Report& rep) {
  struct Triple {
    int ly;
    int s;
    int k;
  };
  const Triple triples[] = {{2, 30, 500}, {3, 75, 500}, {4, 100, 500}};
  std::vector<FidelityRow> rows;
  for (std::size_t i = 0; i < 3; ++i) {
    const auto& t = triples[i];
    const auto g = build_brickwall(t.ly);
    FidelityOptions opt;
    opt.num_sampled = t.s;
    opt.instances = t.k;
    opt.seed = kSeed + static_cast<std::uint64_t>(t.ly);
    opt.p_s = kNoiseTable[i].p_s;
    opt.p_sigma = kNoiseTable[i].p_sigma;
    const auto noisy = estimate_fidelity(g, opt);
    opt.p_s = opt.p_sigma = 0.0;
    const auto clean = estimate_fidelity(g, opt);
    rep.detail("N=%d S=%d k=%d  F=%.4f+-%.4f  noiseless F=%.17g", noisy.num_sites, t.s, t.k,
               noisy.f_hat, noisy.std_error, clean.f_hat);
    rep.require(clean.f_hat == 1.0, "noiseless F = 1 exactly");
    rows.push_back({LatticeKind::brickwall, t.ly, opt, clean});
    opt.p_s = kNoiseTable[i].p_s;
    opt.p_sigma = kNoiseTable[i].p_sigma;
    rows.push_back({LatticeKind::brickwall, t.ly, opt, noisy});
  }
  write_fidelity_csv((ctx.workdir / "fidelity.csv").string(), rows);
  rep.require(rows[1].estimate.f_hat > 0.5, "F(N=10) > 0.5");
  for (std::size_t i = 3; i < rows.size(); i += 2) {
    const auto& a = rows[i - 2].estimate;
    const auto& b = rows[i].estimate;
    rep.require(a.f_hat - b.f_hat > a.std_error + b.std_error,
                "F strictly decreasing beyond combined error bars");
  }
}

void determinism(const Context& ctx, Report& rep) {
  // reruns of acceptance sweeps with another worker count must match byte for byte
  const std::pair<std::string, std::function<void(SweepConfig&)>> runs[] = {
      {"observables_ly4",
       [](SweepConfig& c) {
         c.sizes = {4};
         c.t_grid = linspace(0.0, kQuarterPi, 11);
         c.p_s_grid = {0.056};
         c.p_sigma = 0.023;
       }},
      {"threshold_ta",
       [](SweepConfig& c) {
         c.sizes = {2, 3, 4};
         c.t_grid = linspace(0.0, kQuarterPi, 41);
         c.p_s_grid = {0.05};
       }},
      {"chain_contrast", [](SweepConfig& c) {
         c.kind = LatticeKind::chain;
         c.sizes = {10, 28, 54};
         c.t_grid = linspace(0.0, kQuarterPi, 41);
         c.p_s_grid = {0.05};
       }}};
  for (const auto& [name, setup] : runs) {
    const fs::path first = ctx.workdir / (name + ".csv");
    if (!fs::exists(first)) {
      auto c = base_config(ctx, name);
      setup(c);
      run_sweep(c);
    }
    Context other = ctx;
    other.workers = ctx.workers == 1 ? 3 : 1;
    auto c = base_config(other, name + "_rerun");
    setup(c);
    run_sweep(c);
    const bool same = slurp(first) == slurp(c.output);
    rep.detail("%-16s workers %d vs %d: %s", name.c_str(), ctx.workers, other.workers,
               same ? "identical" : "DIFFERENT");
    rep.require(same, name + " CSV byte-identical across worker counts");
  }
}

struct Criterion {
  const char* name;
  double time_limit_s;  // 0: none
  void (*run)(const Context&, Report&);
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance suite"};
  Context ctx;
  std::string workdir = "acceptance_out";
  std::vector<std::string> only;
  app.add_option("--workdir", workdir, "directory for CSV artifacts")->capture_default_str();
  app.add_option("--workers", ctx.workers, "threads per grid point")->capture_default_str();
  app.add_option("--only", only, "run the named criteria only");
  CLI11_PARSE(app, argc, argv);
  ctx.workdir = workdir;
  fs::create_directories(ctx.workdir);

  // determinism runs last so it can reuse the CSVs written before it
  const Criterion criteria[] = {
      {"oracle-equivalence", 60, oracle_equivalence},
      {"decoder-exactness", 300, decoder_exactness},
      {"observable-formulas", 600, observable_formulas},
      {"noise-fit-closure", 0, noise_fit_closure},
      {"threshold-locations", 1800, threshold_locations},
      {"scaling-exponent", 0, scaling},
      {"one-d-contrast", 0, one_d_contrast},
      {"fidelity", 0, fidelity},
      {"determinism", 0, determinism},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.name) == only.end()) continue;
    Report rep;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      c.run(ctx, rep);
    } catch (const std::exception& e) {
      rep.require(false, std::string("exception: ") + e.what());
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.time_limit_s > 0)
      rep.require(secs < c.time_limit_s, "runtime under " + std::to_string(c.time_limit_s) + " s");
    std::printf("%s %-20s (%.1f s)\n", rep.pass() ? "PASS" : "FAIL", c.name, secs);
    for (const auto& l : rep.lines()) std::printf("    %s\n", l.c_str());
    std::fflush(stdout);
    failed += !rep.pass();
  }
  if (failed) {
    std::fprintf(stderr, "acceptance: %d criterion(s) failed\n", failed);
    return 1;
  }
  return 0;
}
