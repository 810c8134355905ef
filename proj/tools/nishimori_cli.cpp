#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "nishimori/experiments.hpp"
#include "nishimori/geometry.hpp"
#include "nishimori/oracles/circuit.hpp"
#include "nishimori/oracles/statevector.hpp"
#include "nishimori/oracles/tableau.hpp"

using namespace nishimori;

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t") - b + 1);
}

double parse_number(const std::string& text) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("not a number: '" + text + "'");
  }
  if (used != text.size()) throw std::invalid_argument("not a number: '" + text + "'");
  return v;
}

// "0.1", "pi/4", "0.205pi", "3*pi/16"
double parse_angle(const std::string& raw) {
  const std::string s = trim(raw);
  const auto at = s.find("pi");
  if (at == std::string::npos) return parse_number(s);
  std::string coef = trim(s.substr(0, at));
  if (!coef.empty() && coef.back() == '*') coef = trim(coef.substr(0, coef.size() - 1));
  double v = kPi * (coef.empty() ? 1.0 : parse_number(coef));
  std::string rest = trim(s.substr(at + 2));
  if (!rest.empty()) {
    if (rest[0] != '/') throw std::invalid_argument("bad angle: '" + raw + "'");
    v /= parse_number(trim(rest.substr(1)));
  }
  return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep))
    if (!trim(item).empty()) out.push_back(trim(item));
  return out;
}

// "lo:hi:count" or a comma-separated list
std::vector<double> parse_grid(const std::string& s) {
  const auto range = split(s, ':');
  if (range.size() == 3) {
    const double count = parse_number(range[2]);
    if (count < 1 || count != std::floor(count))
      throw std::invalid_argument("bad grid count in '" + s + "'");
    return linspace(parse_angle(range[0]), parse_angle(range[1]), static_cast<int>(count));
  }
  if (range.size() != 1) throw std::invalid_argument("bad grid: '" + s + "'");
  std::vector<double> out;
  for (const auto& v : split(s, ',')) out.push_back(parse_angle(v));
  return out;
}

std::vector<int> parse_ints(const std::string& s) {
  std::vector<int> out;
  for (const auto& v : split(s, ',')) {
    const double d = parse_number(v);
    if (d != std::floor(d)) throw std::invalid_argument("not an integer: '" + v + "'");
    out.push_back(static_cast<int>(d));
  }
  return out;
}

LatticeKind parse_kind(const std::string& s) {
  if (s == "brickwall") return LatticeKind::brickwall;
  if (s == "chain") return LatticeKind::chain;
  if (s == "hexagon") return LatticeKind::hexagon;
  throw std::invalid_argument("unknown geometry kind '" + s + "'");
}

struct SweepFlags {
  std::string kind = "brickwall";
  std::string sizes = "2,3,4";
  std::string t_grid = "0:pi/4:21";
  std::string p_s_grid = "0:0.12:13";
  double p_sigma = 0.0;
  std::uint64_t shots = 20000;
  std::uint64_t seed = 1;
  int workers = 1;
  int bootstrap = 500;
  std::string output;
  std::string shot_dump;
  bool resume = false;

  void attach(CLI::App* app) {
    app->add_option("--kind", kind, "brickwall, chain or hexagon")->capture_default_str();
    app->add_option("--sizes", sizes, "L_y values (brickwall) or N values (chain)")
        ->capture_default_str();
    app->add_option("--t-grid", t_grid, "t_A grid: lo:hi:count or a list; accepts pi")
        ->capture_default_str();
    app->add_option("--p-s-grid", p_s_grid, "injected p_s grid: lo:hi:count or a list")
        ->capture_default_str();
    app->add_option("--p-sigma", p_sigma, "readout flip rate")->capture_default_str();
    app->add_option("--shots", shots, "shots per grid point")->capture_default_str();
    app->add_option("--seed", seed)->capture_default_str();
    app->add_option("--workers", workers, "threads per grid point")->capture_default_str();
    app->add_option("--bootstrap", bootstrap, "bootstrap resamples for f and g")
        ->capture_default_str();
    app->add_option("--output,-o", output, "sweep CSV path");
    app->add_option("--shot-dump", shot_dump, "directory for bit-packed shot files");
    app->add_flag("--resume", resume, "reuse rows already present in --output");
  }

  SweepConfig config() const {
    SweepConfig c;
    c.kind = parse_kind(kind);
    c.sizes = parse_ints(sizes);
    c.t_grid = parse_grid(t_grid);
    c.p_s_grid = parse_grid(p_s_grid);
    c.p_sigma = p_sigma;
    c.shots = shots;
    c.seed = seed;
    c.workers = workers;
    c.bootstrap = bootstrap;
    c.output = output;
    c.shot_dump = shot_dump;
    c.resume = resume;
    c.validate();
    return c;
  }
};

// Handled by expand_config before parsing; registered for --help only.
void add_config(CLI::App* app) {
  app->add_option("--config", "key=value file with any of the long options; flags win");
}

bool given(const std::vector<std::string>& args, const std::string& flag) {
  for (const auto& a : args)
    if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
  return false;
}

// Replaces "--config FILE" by one "--key=value" argument per line of FILE,
// skipping keys that are also given on the command line.
std::vector<std::string> expand_config(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  std::string path;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i),
                 args.begin() + static_cast<std::ptrdiff_t>(i + 2));
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
      break;
    }
  }
  if (path.empty()) return args;
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path);
  std::vector<std::string> extra;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line.substr(0, line.find('#')));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected key = value");
    const std::string key = "--" + trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
      value = value.substr(1, value.size() - 2);
    if (!given(args, key)) extra.push_back(key + "=" + value);
  }
  // after the subcommand name, so the options bind to it
  std::size_t at = 1;
  while (at < args.size() && args[at].rfind("-", 0) == 0) ++at;
  args.insert(args.begin() + static_cast<std::ptrdiff_t>(std::min(at + 1, args.size())),
              extra.begin(), extra.end());
  return args;
}

void print_peaks(const std::vector<PeakRow>& peaks) {
  for (const auto& p : peaks) {
    std::printf("%s size=%d p_s=%.4g  g-peak t_A=%.5fpi +- %.5fpi  g*=%.5g%s  f_max=%.5g\n",
                to_string(p.kind).c_str(), p.size, p.p_s, p.peak.location / kPi,
                p.peak.location_stderr / kPi, p.peak.height, p.peak.on_edge ? " (grid edge)" : "",
                p.f_max);
  }
}

int cmd_sweep(const SweepFlags& flags, const std::string& peaks_path,
              const std::string& histogram_path) {
  const auto cfg = flags.config();
  if (!histogram_path.empty() && cfg.resume)
    throw std::invalid_argument("--histogram cannot be combined with --resume");
  const auto rows = run_sweep(cfg);
  const auto peaks = sweep_peaks(rows, cfg.bootstrap, cfg.seed);
  if (!peaks_path.empty()) write_peaks_csv(peaks_path, peaks);
  if (!histogram_path.empty()) write_histogram_csv(histogram_path, rows);
  if (cfg.output.empty()) {
    std::cout << "# " << kSweepSchema << '\n' << sweep_csv_header() << '\n';
    for (const auto& r : rows) std::cout << sweep_csv_row(r) << '\n';
  } else {
    std::printf("wrote %zu rows to %s\n", rows.size(), cfg.output.c_str());
    print_peaks(peaks);
  }
  return 0;
}

int cmd_phase(const SweepFlags& flags, const std::string& heatmap) {
  const auto cfg = flags.config();
  const auto pd = phase_diagram(cfg, heatmap);
  std::printf("cells: %zu\n", pd.cells.size());
  std::printf("ridge t_A at lowest p_s: %.5fpi\n", pd.ridge_t_a_at_min_p_s / kPi);
  std::printf("ridge p_s at largest t_A: %.5f\n", pd.ridge_p_s_at_max_t_a);
  return 0;
}

struct FidelityFlags {
  std::string kind = "brickwall";
  std::string sizes = "2,3,4";
  std::string num_sampled = "30,75,100";
  std::string p_s = "0.042,0.051,0.056";
  std::string p_sigma = "0.012,0.018,0.023";
  int instances = 500;
  int z_pool = 1000;
  int shots_per_observable = 1000;
  std::uint64_t seed = 1;
  std::string output;
  double expect_above = std::nan("");

  void attach(CLI::App* app) {
    app->add_option("--kind", kind)->capture_default_str();
    app->add_option("--sizes", sizes)->capture_default_str();
    app->add_option("--num-sampled", num_sampled, "S per size (or one value)")
        ->capture_default_str();
    app->add_option("--p-s", p_s, "syndrome flip rate per size (or one value)")
        ->capture_default_str();
    app->add_option("--p-sigma", p_sigma, "readout flip rate per size (or one value)")
        ->capture_default_str();
    app->add_option("--instances", instances, "resampling instances k")->capture_default_str();
    app->add_option("--z-pool", z_pool, "distinct Z stabilizers (capped at 2^(N-1)-1)")
        ->capture_default_str();
    app->add_option("--shots-per-observable", shots_per_observable)->capture_default_str();
    app->add_option("--seed", seed)->capture_default_str();
    app->add_option("--output,-o", output, "fidelity CSV path");
    app->add_option("--expect-above", expect_above,
                    "fail unless every estimate exceeds this value");
  }
};

template <typename T>
T pick(const std::vector<T>& v, std::size_t i, const char* what) {
  if (v.size() == 1) return v[0];
  if (i >= v.size()) throw std::invalid_argument(std::string("--") + what + ": one value per size");
  return v[i];
}

int cmd_fidelity(const FidelityFlags& flags) {
  const auto kind = parse_kind(flags.kind);
  const auto sizes = parse_ints(flags.sizes);
  const auto sampled = parse_ints(flags.num_sampled);
  const auto ps = parse_grid(flags.p_s);
  const auto psig = parse_grid(flags.p_sigma);
  std::vector<FidelityRow> rows;
  int status = 0;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    FidelityRow row{kind, sizes[i], {}, {}};
    row.options.num_sampled = pick(sampled, i, "num-sampled");
    row.options.instances = flags.instances;
    row.options.z_pool = flags.z_pool;
    row.options.shots_per_observable = flags.shots_per_observable;
    row.options.p_s = pick(ps, i, "p-s");
    row.options.p_sigma = pick(psig, i, "p-sigma");
    row.options.seed = hash_combine(flags.seed, static_cast<std::uint64_t>(sizes[i]));
    row.estimate = estimate_fidelity(build_geometry(kind, sizes[i]), row.options);
    std::printf("%s size=%d N=%d S=%d k=%d  F=%.5f +- %.5f\n", to_string(kind).c_str(), sizes[i],
                row.estimate.num_sites, row.estimate.num_sampled, row.estimate.instances,
                row.estimate.f_hat, row.estimate.std_error);
    if (!std::isnan(flags.expect_above) && !(row.estimate.f_hat > flags.expect_above)) {
      std::fprintf(stderr, "FAIL: fidelity %.5f at N=%d is not above %g\n", row.estimate.f_hat,
                   row.estimate.num_sites, flags.expect_above);
      status = 2;
    }
    rows.push_back(std::move(row));
  }
  if (!flags.output.empty()) write_fidelity_csv(flags.output, rows);
  return status;
}

int cmd_fit_noise(SweepFlags flags, const std::string& input, const std::string& output,
                  double expect_p_s, double expect_p_sigma, double tolerance) {
  std::vector<PointResult> rows;
  if (!input.empty()) {
    rows = read_sweep_csv(input);
  } else {
    rows = run_sweep(flags.config());
  }
  const auto fits = fit_sweep_noise(rows);
  if (fits.empty()) throw std::runtime_error("fit-noise: no series with enough t_A points");
  if (!output.empty()) write_noise_fit_csv(output, fits);
  int status = 0;
  for (const auto& f : fits) {
    std::printf("%s size=%d  p_s=%.5f +- %.5f  p_sigma=%.5f +- %.5f%s\n",
                to_string(f.kind).c_str(), f.size, f.fit.p_s_hat, f.fit.p_s_stderr,
                f.fit.p_sigma_hat, f.fit.p_sigma_stderr,
                f.fit.model_violation ? "  (model violation)" : "");
    if (!std::isnan(expect_p_s) && std::abs(f.fit.p_s_hat - expect_p_s) > tolerance) {
      std::fprintf(stderr, "FAIL: size %d fitted p_s %.5f differs from %.5f by more than %g\n",
                   f.size, f.fit.p_s_hat, expect_p_s, tolerance);
      status = 2;
    }
    if (!std::isnan(expect_p_sigma) && std::abs(f.fit.p_sigma_hat - expect_p_sigma) > tolerance) {
      std::fprintf(stderr, "FAIL: size %d fitted p_sigma %.5f differs from %.5f by more than %g\n",
                   f.size, f.fit.p_sigma_hat, expect_p_sigma, tolerance);
      status = 2;
    }
  }
  return status;
}

int cmd_oracle_check(const std::string& geometry_name, const std::string& t_list,
                     double tolerance, const std::string& dump_distribution,
                     const std::string& dump_geometry) {
  std::vector<std::pair<std::string, LatticeGeometry>> geoms;
  for (const auto& name : split(geometry_name, ',')) {
    if (name == "bond") {
      geoms.emplace_back(name, build_chain(2));
    } else if (name == "hexagon") {
      geoms.emplace_back(name, build_hexagon());
    } else if (name == "two-hexagon") {
      geoms.emplace_back(name, build_brickwall(2));
    } else {
      throw std::invalid_argument("unknown oracle geometry '" + name +
                                  "' (bond, hexagon, two-hexagon)");
    }
  }
  const auto angles = parse_grid(t_list);
  if (!dump_geometry.empty()) {
    std::ofstream os(dump_geometry, std::ios::trunc);
    for (const auto& [name, g] : geoms) os << g.serialize();
    if (!os) throw std::runtime_error("cannot write " + dump_geometry);
  }
  std::ofstream dist;
  if (!dump_distribution.empty()) {
    dist.open(dump_distribution, std::ios::trunc);
    if (!dist) throw std::runtime_error("cannot write " + dump_distribution);
  }
  int failures = 0;
  for (const auto& [name, g] : geoms) {
    for (double t : angles) {
      const auto spec = oracle::build_circuit(g, t);
      const auto sv = oracle::statevector_distribution(spec);
      const double tv = oracle::total_variation(sv, oracle::closed_form_distribution(g, t));
      const bool ok = tv < tolerance;
      std::printf("%s %-11s t_A=%.6fpi  statevector vs closed form TV=%.3e\n", ok ? "PASS" : "FAIL",
                  name.c_str(), t / kPi, tv);
      failures += !ok;
      if (t == kQuarterPi) {
        const double tv2 =
            oracle::total_variation(sv, oracle::tableau_distribution(oracle::CliffordProtocol(spec)));
        const bool ok2 = tv2 < tolerance;
        std::printf("%s %-11s t_A=%.6fpi  statevector vs tableau     TV=%.3e\n",
                    ok2 ? "PASS" : "FAIL", name.c_str(), t / kPi, tv2);
        failures += !ok2;
      }
      if (dist.is_open()) {
        dist << "# " << name << " t_a=" << format_double(t) << '\n';
        oracle::write_distribution(dist, sv, g.num_qubits());
      }
    }
  }
  if (failures) {
    std::fprintf(stderr, "FAIL: %d oracle comparison(s) exceeded TV tolerance %g\n", failures,
                 tolerance);
    return 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Measurement-induced Ising order: sampler, decoder and sweeps"};
  app.require_subcommand(1);

  SweepFlags sweep_flags;
  std::string peaks_path, histogram_path;
  auto* sweep = app.add_subcommand("sweep", "run a (size, p_s, t_A) grid and write the sweep CSV");
  add_config(sweep);
  sweep_flags.attach(sweep);
  sweep->add_option("--peaks", peaks_path, "g-peak CSV path");
  sweep->add_option("--histogram", histogram_path, "magnetization histogram CSV path");

  SweepFlags phase_flags;
  phase_flags.sizes = "4";
  std::string heatmap;
  auto* phase = app.add_subcommand("phase-diagram", "g heatmap over (t_A, p_s) with its ridge");
  add_config(phase);
  phase_flags.attach(phase);
  phase->add_option("--heatmap", heatmap, "phase CSV path")->required();

  FidelityFlags fid_flags;
  auto* fid = app.add_subcommand("fidelity", "GHZ fidelity estimate at the Clifford point");
  add_config(fid);
  fid_flags.attach(fid);

  SweepFlags fit_flags;
  fit_flags.sizes = "4";
  fit_flags.p_s_grid = "0.056";
  fit_flags.p_sigma = 0.023;
  fit_flags.t_grid = "0:pi/4:11";
  std::string fit_input, fit_output;
  double expect_p_s = std::nan(""), expect_p_sigma = std::nan(""), fit_tol = 0.005;
  auto* fit = app.add_subcommand("fit-noise", "fit (p_s, p_sigma) from <ZXZ> and <W> vs t_A");
  add_config(fit);
  fit_flags.attach(fit);
  fit->add_option("--input,-i", fit_input, "existing sweep CSV (otherwise a sweep is run)");
  fit->add_option("--fit-output", fit_output, "noise-fit CSV path");
  fit->add_option("--expect-p-s", expect_p_s, "fail unless the fitted p_s is within tolerance");
  fit->add_option("--expect-p-sigma", expect_p_sigma,
                  "fail unless the fitted p_sigma is within tolerance");
  fit->add_option("--tolerance", fit_tol)->capture_default_str();

  std::string oracle_geoms = "bond,hexagon,two-hexagon", oracle_t = "0,pi/8,pi/6,pi/4";
  std::string dump_dist, dump_geom;
  double oracle_tol = 1e-10;
  auto* oracle_cmd =
      app.add_subcommand("oracle-check", "compare the sampler against the exact oracles");
  add_config(oracle_cmd);
  oracle_cmd->add_option("--geometry", oracle_geoms, "bond, hexagon, two-hexagon")
      ->capture_default_str();
  oracle_cmd->add_option("--t", oracle_t, "t_A values")->capture_default_str();
  oracle_cmd->add_option("--tolerance", oracle_tol)->capture_default_str();
  oracle_cmd->add_option("--dump-distribution", dump_dist, "write the exact distributions");
  oracle_cmd->add_option("--dump-geometry", dump_geom, "write the serialized geometries");

  std::vector<std::string> args;
  try {
    args = expand_config(argc, argv);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  std::vector<char*> cargs;
  for (auto& a : args) cargs.push_back(a.data());
  CLI11_PARSE(app, static_cast<int>(cargs.size()), cargs.data());

  try {
    if (sweep->parsed()) return cmd_sweep(sweep_flags, peaks_path, histogram_path);
    if (phase->parsed()) return cmd_phase(phase_flags, heatmap);
    if (fid->parsed()) return cmd_fidelity(fid_flags);
    if (fit->parsed())
      return cmd_fit_noise(fit_flags, fit_input, fit_output, expect_p_s, expect_p_sigma, fit_tol);
    if (oracle_cmd->parsed())
      return cmd_oracle_check(oracle_geoms, oracle_t, oracle_tol, dump_dist, dump_geom);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}
