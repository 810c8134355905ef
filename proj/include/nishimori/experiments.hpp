#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nishimori/fidelity.hpp"
#include "nishimori/geometry.hpp"
#include "nishimori/observables.hpp"

namespace nishimori {

inline constexpr const char* kSweepSchema = "nishimori-sweep-csv v1";
inline constexpr const char* kPeakSchema = "nishimori-peaks-csv v1";
inline constexpr const char* kPhaseSchema = "nishimori-phase-csv v1";
inline constexpr const char* kSiteMapSchema = "nishimori-sitemap-csv v1";
inline constexpr const char* kFidelitySchema = "nishimori-fidelity-csv v1";
inline constexpr const char* kNoiseFitSchema = "nishimori-noisefit-csv v1";
inline constexpr const char* kHistogramSchema = "nishimori-histogram-csv v1";

struct SweepConfig {
  LatticeKind kind = LatticeKind::brickwall;
  std::vector<int> sizes{2, 3, 4};  // L_y for brickwall, N for chains
  std::vector<double> t_grid;       // radians
  std::vector<double> p_s_grid{0.0};
  double p_sigma = 0.0;
  std::uint64_t shots = 20000;
  std::uint64_t seed = 1;
  int workers = 1;
  int bootstrap = 500;
  std::string output;     // sweep CSV; empty keeps results in memory only
  std::string shot_dump;  // directory for per-point shot files; empty disables
  bool resume = false;

  /// Throws std::invalid_argument on an empty grid, shots < 100, or t_A
  /// outside [0, pi/4].
  void validate() const;
};

/// count evenly spaced values from lo to hi inclusive.
std::vector<double> linspace(double lo, double hi, int count);

LatticeGeometry build_geometry(LatticeKind kind, int size);

/// Statistics of one (geometry, t_A, p_s, p_sigma) grid point.
struct PointResult {
  LatticeKind kind = LatticeKind::brickwall;
  int size = 0;
  int num_sites = 0;
  double t_a = 0.0;
  double p_s = 0.0;
  double p_sigma = 0.0;
  double p_tilde = 0.0;
  double beta = 0.0;
  std::uint64_t shots = 0;
  std::uint64_t seed = 0;       // sweep seed
  std::uint64_t point_key = 0;  // per-point stream key
  MomentStats moments;
  double zxz = 0.0;
  double zxz_stderr = 0.0;
  double w = 0.0;
  double w_stderr = 0.0;
  /// Shot counts of M = -N, -N+2, ..., N. Empty for rows read back from CSV.
  std::vector<std::uint64_t> m_histogram;
};

/// Stream key of a grid point; shot i of the point draws Rng::stream(seed, key, i).
std::uint64_t point_key(LatticeKind kind, int size, double t_a, double p_s, double p_sigma);

struct PointOptions {
  std::uint64_t shots = 20000;
  std::uint64_t seed = 1;
  int workers = 1;
  int bootstrap = 500;
  std::string shot_dump;  // file path; empty disables
  /// Receives per-bond/per-plaquette means when set.
  BondPlaquetteMeans* site_means = nullptr;
};

/// Samples, corrupts and decodes opt.shots shots, then reduces them. The result
/// does not depend on opt.workers.
PointResult run_point(const LatticeGeometry& geom, double t_a, double p_s, double p_sigma,
                      const PointOptions& opt);

/// Runs every (size, p_s, t_A) point in that nesting order. With an output
/// path, rows are appended as they finish and the file is rewritten in grid
/// order at the end; with resume set, rows already present are reused.
/// Throws std::runtime_error naming the grid point on I/O failure.
std::vector<PointResult> run_sweep(const SweepConfig& cfg);

/// CSV row / header for the sweep schema.
std::string sweep_csv_header();
std::string sweep_csv_row(const PointResult& r);

struct GPeak {
  double location = 0.0;
  double height = 0.0;
  double location_stderr = 0.0;
  double height_stderr = 0.0;
  int index = 0;         // grid index of the maximum
  bool on_edge = false;  // maximum at a grid end; returned uninterpolated
};

/// Quadratic interpolation through the largest g and its two neighbours.
/// Uncertainties come from a parametric bootstrap with the given per-point
/// standard errors (empty span: none). Throws for fewer than 5 points.
GPeak find_g_peak(std::span<const double> x, std::span<const double> g,
                  std::span<const double> g_stderr = {}, int resamples = 500,
                  std::uint64_t seed = 0);

struct ScalingFit {
  double exponent = 0.0;
  double exponent_stderr = 0.0;
  double log_prefactor = 0.0;
};

/// Least-squares slope of log(height) against log(size).
/// Throws for fewer than 3 sizes or nonpositive heights.
ScalingFit fit_scaling(std::span<const double> sizes, std::span<const double> heights);

struct PeakRow {
  LatticeKind kind;
  int size;
  double p_s;
  double p_sigma;
  GPeak peak;
  double f_max;  // largest f on the series
};

/// g peaks along t_A for every (size, p_s) series of a sweep.
std::vector<PeakRow> sweep_peaks(const std::vector<PointResult>& rows, int resamples,
                                 std::uint64_t seed);
void write_peaks_csv(const std::string& path, const std::vector<PeakRow>& peaks);

struct PhaseCell {
  double t_a;
  double p_s;
  double p_tilde;
  double f;
  double g;
  double g_stderr;
  double ridge_t_a;  // g peak along t_A in this cell's p_s row
  double ridge_p_s;  // g peak along p_s in this cell's t_A column
  bool on_ridge;     // the cell is the maximum of its row or its column
};

struct PhaseDiagram {
  std::vector<PhaseCell> cells;  // p_s major, t_A minor
  double ridge_t_a_at_min_p_s = 0.0;
  double ridge_p_s_at_max_t_a = 0.0;
};

/// Runs cfg (single size, both grids >= 8 points) and extracts the g ridge.
/// Writes the heatmap CSV to heatmap_path when nonempty.
PhaseDiagram phase_diagram(const SweepConfig& cfg, const std::string& heatmap_path);

/// Per-bond and per-plaquette means in the site-map schema.
void write_site_map_csv(const std::string& path, const LatticeGeometry& geom,
                        const BondPlaquetteMeans& means, double t_a, double p_s, double p_sigma);

struct FidelityRow {
  LatticeKind kind;
  int size;
  FidelityOptions options;
  FidelityEstimate estimate;
};
void write_fidelity_csv(const std::string& path, const std::vector<FidelityRow>& rows);

/// Lattice-averaged <ZXZ>, <W> of one size over a t_A grid, and their fit.
struct NoiseFitRow {
  LatticeKind kind;
  int size;
  double p_s_true;  // NaN when unknown
  double p_sigma_true;
  std::vector<double> t_a;
  std::vector<double> zxz;
  std::vector<double> w;
  NoiseFit fit;
};
/// Fits the lattice averages of sweep rows, one fit per (size, p_s) series.
std::vector<NoiseFitRow> fit_sweep_noise(const std::vector<PointResult>& rows);
void write_noise_fit_csv(const std::string& path, const std::vector<NoiseFitRow>& rows);

/// One line per (grid point, M) with a nonzero count.
void write_histogram_csv(const std::string& path, const std::vector<PointResult>& rows);

/// Reads a sweep CSV written by run_sweep.
std::vector<PointResult> read_sweep_csv(const std::string& path);

/// Formats a double so that it round-trips.
std::string format_double(double v);

}  // namespace nishimori
