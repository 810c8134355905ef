#include "nishimori/experiments.hpp"

#include <algorithm>
#include <bit>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "nishimori/born_sampler.hpp"
#include "nishimori/decoder.hpp"
#include "nishimori/rng.hpp"
#include "nishimori/shot_file.hpp"

namespace nishimori {

void SweepConfig::validate() const {
  if (sizes.empty()) throw std::invalid_argument("sweep: size list is empty");
  if (t_grid.empty()) throw std::invalid_argument("sweep: t_A grid is empty");
  if (p_s_grid.empty()) throw std::invalid_argument("sweep: p_s grid is empty");
  if (shots < 100) throw std::invalid_argument("sweep: at least 100 shots per point required");
  if (workers < 1) throw std::invalid_argument("sweep: worker count must be positive");
  if (bootstrap < 0) throw std::invalid_argument("sweep: bootstrap resamples must be >= 0");
  for (double t : t_grid)
    if (!(t >= 0.0 && t <= kQuarterPi)) throw std::invalid_argument("sweep: t_A outside [0, pi/4]");
  for (double p : p_s_grid)
    if (!(p >= 0.0 && p <= 0.5)) throw std::invalid_argument("sweep: p_s outside [0, 1/2]");
  if (!(p_sigma >= 0.0 && p_sigma <= 0.5)) throw std::invalid_argument("sweep: p_sigma outside [0, 1/2]");
}

std::vector<double> linspace(double lo, double hi, int count) {
  if (count < 1) throw std::invalid_argument("linspace: count must be positive");
  std::vector<double> v(static_cast<std::size_t>(count));
  if (count == 1) {
    v[0] = lo;
    return v;
  }
  for (int i = 0; i < count; ++i) v[i] = lo + (hi - lo) * i / (count - 1);
  v.back() = hi;
  return v;
}

LatticeGeometry build_geometry(LatticeKind kind, int size) {
  switch (kind) {
    case LatticeKind::brickwall:
      return build_brickwall(size);
    case LatticeKind::chain:
      return build_chain(size);
    case LatticeKind::hexagon:
      return build_hexagon();
  }
  throw std::invalid_argument("build_geometry: unknown lattice kind");
}

std::uint64_t point_key(LatticeKind kind, int size, double t_a, double p_s, double p_sigma) {
  std::uint64_t h = mix64(static_cast<std::uint64_t>(kind) + 1);
  h = hash_combine(h, static_cast<std::uint64_t>(size));
  h = hash_combine(h, std::bit_cast<std::uint64_t>(t_a));
  h = hash_combine(h, std::bit_cast<std::uint64_t>(p_s));
  h = hash_combine(h, std::bit_cast<std::uint64_t>(p_sigma));
  return h;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

struct WorkerOut {
  std::unique_ptr<BondPlaquetteAccumulator> acc;
};

}  // namespace

PointResult run_point(const LatticeGeometry& geom, double t_a, double p_s, double p_sigma,
                      const PointOptions& opt) {
  const auto params = ProtocolParams::make(t_a, p_s, p_sigma, opt.shots, opt.seed);
  if (opt.shots < 2) throw std::invalid_argument("run_point: need at least 2 shots");
  const std::uint64_t key = point_key(geom.kind(), geom.size_param(), t_a, p_s, p_sigma);
  const double a = coherent_flip_prob(t_a);
  const std::uint64_t shots = opt.shots;
  const bool dump = !opt.shot_dump.empty();

  std::vector<int> m(shots);
  std::vector<Shot> kept(dump ? shots : 0);
  const int workers = static_cast<int>(std::clamp<std::uint64_t>(opt.workers, 1, shots));
  std::vector<WorkerOut> out(static_cast<std::size_t>(workers));

  auto work = [&](int w) {
    const std::uint64_t lo = shots * static_cast<std::uint64_t>(w) / workers;
    const std::uint64_t hi = shots * static_cast<std::uint64_t>(w + 1) / workers;
    ReplicaDecoder decode(geom);
    auto acc = std::make_unique<BondPlaquetteAccumulator>(geom);
    Shot shot;
    Spins sigma_prime;
    for (std::uint64_t i = lo; i < hi; ++i) {
      Rng rng = Rng::stream(opt.seed, key, i);
      sample_shot_into(geom, a, rng, shot);
      apply_noise(shot, p_s, p_sigma, rng);
      decode(shot.s_prime, sigma_prime);
      m[i] = magnetization(shot.sigma_readout, sigma_prime);
      acc->add(shot);
      if (dump) kept[i] = shot;
    }
    out[w].acc = std::move(acc);
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work, w);
    for (auto& t : pool) t.join();
  }

  BondPlaquetteAccumulator total(geom);
  for (const auto& o : out) total.merge(*o.acc);
  const BondPlaquetteMeans means = total.result();
  if (opt.site_means) *opt.site_means = means;

  if (dump) {
    ShotWriter writer(opt.shot_dump, geom, params);
    for (const auto& s : kept) writer.write(s);
    writer.close();
  }

  PointResult r;
  r.kind = geom.kind();
  r.size = geom.size_param();
  r.num_sites = geom.num_sites();
  r.t_a = t_a;
  r.p_s = p_s;
  r.p_sigma = p_sigma;
  r.p_tilde = params.p_tilde;
  r.beta = params.beta;
  r.shots = shots;
  r.seed = opt.seed;
  r.point_key = key;
  r.moments = moment_stats(m, geom.num_sites(), opt.bootstrap, hash_combine(opt.seed, ~key));
  r.zxz = means.zxz_mean;
  r.zxz_stderr = means.zxz_mean_stderr;
  r.w = means.w_mean;
  r.w_stderr = means.w_mean_stderr;
  r.m_histogram.assign(static_cast<std::size_t>(geom.num_sites()) + 1, 0);
  for (int v : m) ++r.m_histogram[static_cast<std::size_t>((v + geom.num_sites()) / 2)];
  return r;
}

std::string sweep_csv_header() {
  return "kind,size,num_sites,t_a,t_a_over_pi,p_s,p_sigma,p_tilde,beta,shots,seed,point_key,"
         "mean_m,mean_m_stderr,mean_m2,mean_m4,f,f_stderr,f_ci_lo,f_ci_hi,"
         "g,g_stderr,g_ci_lo,g_ci_hi,zxz,zxz_stderr,w,w_stderr";
}

namespace {

std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, v);
  return buf;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

LatticeKind parse_kind(const std::string& s) {
  if (s == "brickwall") return LatticeKind::brickwall;
  if (s == "chain") return LatticeKind::chain;
  if (s == "hexagon") return LatticeKind::hexagon;
  throw std::invalid_argument("unknown lattice kind '" + s + "'");
}

double num(const std::string& s) { return std::strtod(s.c_str(), nullptr); }

PointResult parse_sweep_row(const std::string& line) {
  const auto c = split(line, ',');
  if (c.size() != 28) throw std::runtime_error("sweep CSV: malformed row: " + line);
  PointResult r;
  r.kind = parse_kind(c[0]);
  r.size = std::stoi(c[1]);
  r.num_sites = std::stoi(c[2]);
  r.t_a = num(c[3]);
  r.p_s = num(c[5]);
  r.p_sigma = num(c[6]);
  r.p_tilde = num(c[7]);
  r.beta = num(c[8]);
  r.shots = std::stoull(c[9]);
  r.seed = std::stoull(c[10]);
  r.point_key = std::stoull(c[11], nullptr, 16);
  auto& m = r.moments;
  m.num_sites = r.num_sites;
  m.shots = static_cast<std::int64_t>(r.shots);
  m.mean_m = num(c[12]);
  m.mean_m_stderr = num(c[13]);
  m.mean_m2 = num(c[14]);
  m.mean_m4 = num(c[15]);
  m.f = num(c[16]);
  m.f_ci = {num(c[18]), num(c[19]), num(c[17])};
  m.g = num(c[20]);
  m.g_ci = {num(c[22]), num(c[23]), num(c[21])};
  r.zxz = num(c[24]);
  r.zxz_stderr = num(c[25]);
  r.w = num(c[26]);
  r.w_stderr = num(c[27]);
  return r;
}

std::string join_doubles(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ";" : "") + format_double(v[i]);
  return s;
}

std::vector<std::string> sweep_metadata(const SweepConfig& cfg) {
  std::string sizes;
  for (std::size_t i = 0; i < cfg.sizes.size(); ++i)
    sizes += (i ? ";" : "") + std::to_string(cfg.sizes[i]);
  return {
      std::string("# ") + kSweepSchema,
      "# kind=" + to_string(cfg.kind),
      "# sizes=" + sizes,
      "# t_grid=" + join_doubles(cfg.t_grid),
      "# p_s_grid=" + join_doubles(cfg.p_s_grid),
      "# p_sigma=" + format_double(cfg.p_sigma),
      "# shots=" + std::to_string(cfg.shots),
      "# seed=" + std::to_string(cfg.seed),
      "# bootstrap=" + std::to_string(cfg.bootstrap),
      "# convention=s=+1 favours parallel spins; zxz=<sigma_i s'_ij sigma_j>; w=<prod s'>",
  };
}

struct GridPoint {
  int size;
  double p_s;
  double t_a;
};

std::string point_label(LatticeKind kind, const GridPoint& p) {
  std::ostringstream os;
  os << to_string(kind) << " size=" << p.size << " t_A=" << format_double(p.t_a)
     << " p_s=" << format_double(p.p_s);
  return os.str();
}

}  // namespace

std::string sweep_csv_row(const PointResult& r) {
  const auto& m = r.moments;
  std::ostringstream os;
  os << to_string(r.kind) << ',' << r.size << ',' << r.num_sites << ',' << format_double(r.t_a)
     << ',' << format_double(r.t_a / kPi) << ',' << format_double(r.p_s) << ','
     << format_double(r.p_sigma) << ',' << format_double(r.p_tilde) << ','
     << format_double(r.beta) << ',' << r.shots << ',' << r.seed << ',' << hex64(r.point_key)
     << ',' << format_double(m.mean_m) << ',' << format_double(m.mean_m_stderr) << ','
     << format_double(m.mean_m2) << ',' << format_double(m.mean_m4) << ','
     << format_double(m.f) << ',' << format_double(m.f_ci.std_error) << ','
     << format_double(m.f_ci.lo) << ',' << format_double(m.f_ci.hi) << ','
     << format_double(m.g) << ',' << format_double(m.g_ci.std_error) << ','
     << format_double(m.g_ci.lo) << ',' << format_double(m.g_ci.hi) << ','
     << format_double(r.zxz) << ',' << format_double(r.zxz_stderr) << ','
     << format_double(r.w) << ',' << format_double(r.w_stderr);
  return os.str();
}

std::vector<PointResult> run_sweep(const SweepConfig& cfg) {
  cfg.validate();
  std::vector<GridPoint> grid;
  for (int size : cfg.sizes)
    for (double p : cfg.p_s_grid)
      for (double t : cfg.t_grid) grid.push_back({size, p, t});

  const auto meta = sweep_metadata(cfg);
  const bool to_file = !cfg.output.empty();
  std::map<std::uint64_t, std::string> existing;

  std::ofstream out;
  if (to_file) {
    const bool have = cfg.resume && std::filesystem::exists(cfg.output);
    if (have) {
      std::ifstream in(cfg.output);
      std::string line;
      std::size_t meta_i = 0;
      bool header_seen = false;
      while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
          if (meta_i >= meta.size() || line != meta[meta_i])
            throw std::runtime_error("sweep: " + cfg.output +
                                     " was written with a different configuration");
          ++meta_i;
          continue;
        }
        if (!header_seen) {
          header_seen = true;
          if (line != sweep_csv_header())
            throw std::runtime_error("sweep: unexpected header in " + cfg.output);
          continue;
        }
        const auto r = parse_sweep_row(line);
        existing[r.point_key] = line;
      }
      if (meta_i != meta.size() || !header_seen)
        throw std::runtime_error("sweep: cannot resume from incomplete header in " + cfg.output);
      out.open(cfg.output, std::ios::app);
    } else {
      if (const auto dir = std::filesystem::path(cfg.output).parent_path(); !dir.empty())
        std::filesystem::create_directories(dir);
      out.open(cfg.output, std::ios::trunc);
      for (const auto& l : meta) out << l << '\n';
      out << sweep_csv_header() << '\n';
      out.flush();
    }
    if (!out) throw std::runtime_error("sweep: cannot open " + cfg.output + " for writing");
  }
  if (!cfg.shot_dump.empty()) std::filesystem::create_directories(cfg.shot_dump);

  std::vector<PointResult> rows;
  std::vector<std::string> lines;
  std::unique_ptr<LatticeGeometry> geom;
  for (const auto& gp : grid) {
    const std::uint64_t key = point_key(cfg.kind, gp.size, gp.t_a, gp.p_s, cfg.p_sigma);
    if (auto it = existing.find(key); it != existing.end()) {
      rows.push_back(parse_sweep_row(it->second));
      lines.push_back(it->second);
      continue;
    }
    if (!geom || geom->size_param() != gp.size)
      geom = std::make_unique<LatticeGeometry>(build_geometry(cfg.kind, gp.size));
    PointOptions opt;
    opt.shots = cfg.shots;
    opt.seed = cfg.seed;
    opt.workers = cfg.workers;
    opt.bootstrap = cfg.bootstrap;
    if (!cfg.shot_dump.empty())
      opt.shot_dump = (std::filesystem::path(cfg.shot_dump) /
                       (to_string(cfg.kind) + "_" + std::to_string(gp.size) + "_" + hex64(key) +
                        ".nshot"))
                          .string();
    PointResult r;
    try {
      r = run_point(*geom, gp.t_a, gp.p_s, cfg.p_sigma, opt);
    } catch (const std::ios_base::failure& e) {
      throw std::runtime_error("sweep: I/O failure at " + point_label(cfg.kind, gp) + ": " +
                               e.what());
    } catch (const std::runtime_error& e) {
      throw std::runtime_error("sweep: failure at " + point_label(cfg.kind, gp) + ": " + e.what());
    }
    lines.push_back(sweep_csv_row(r));
    if (to_file) {
      out << lines.back() << '\n';
      out.flush();
      if (!out)
        throw std::runtime_error("sweep: write to " + cfg.output + " failed at " +
                                 point_label(cfg.kind, gp));
    }
    rows.push_back(std::move(r));
  }

  if (to_file) {
    out.close();
    // canonical grid order, independent of how the rows were appended
    const std::string tmp = cfg.output + ".tmp";
    {
      std::ofstream f(tmp, std::ios::trunc);
      for (const auto& l : meta) f << l << '\n';
      f << sweep_csv_header() << '\n';
      for (const auto& l : lines) f << l << '\n';
      if (!f) throw std::runtime_error("sweep: cannot write " + tmp);
    }
    std::filesystem::rename(tmp, cfg.output);
  }
  return rows;
}

namespace {

GPeak interpolate_peak(std::span<const double> x, std::span<const double> g) {
  GPeak p;
  const auto n = static_cast<int>(g.size());
  int i = 0;
  for (int k = 1; k < n; ++k)
    if (g[k] > g[i]) i = k;
  p.index = i;
  p.location = x[i];
  p.height = g[i];
  if (i == 0 || i == n - 1) {
    p.on_edge = true;
    return p;
  }
  const double x0 = x[i - 1], x1 = x[i], x2 = x[i + 1];
  const double y0 = g[i - 1], y1 = g[i], y2 = g[i + 1];
  const double denom = (x0 - x1) * (x0 - x2) * (x1 - x2);
  const double a = (x2 * (y1 - y0) + x1 * (y0 - y2) + x0 * (y2 - y1)) / denom;
  const double b = (x2 * x2 * (y0 - y1) + x1 * x1 * (y2 - y0) + x0 * x0 * (y1 - y2)) / denom;
  const double c = (x1 * x2 * (x1 - x2) * y0 + x2 * x0 * (x2 - x0) * y1 +
                    x0 * x1 * (x0 - x1) * y2) / denom;
  if (!(a < 0.0)) return p;  // flat top: keep the grid maximum
  p.location = -b / (2.0 * a);
  p.height = c - b * b / (4.0 * a);
  return p;
}

}  // namespace

GPeak find_g_peak(std::span<const double> x, std::span<const double> g,
                  std::span<const double> g_stderr, int resamples, std::uint64_t seed) {
  if (x.size() != g.size()) throw std::invalid_argument("find_g_peak: length mismatch");
  if (x.size() < 5) throw std::invalid_argument("find_g_peak: need at least 5 grid points");
  if (!g_stderr.empty() && g_stderr.size() != g.size())
    throw std::invalid_argument("find_g_peak: stderr length mismatch");
  GPeak p = interpolate_peak(x, g);
  if (g_stderr.empty() || resamples < 2) return p;
  Rng rng(seed);
  std::vector<double> pert(g.size());
  double sl = 0, sl2 = 0, sh = 0, sh2 = 0;
  for (int r = 0; r < resamples; ++r) {
    for (std::size_t k = 0; k < g.size(); ++k) pert[k] = g[k] + g_stderr[k] * rng.normal();
    const GPeak q = interpolate_peak(x, pert);
    sl += q.location;
    sl2 += q.location * q.location;
    sh += q.height;
    sh2 += q.height * q.height;
  }
  const double n = resamples;
  p.location_stderr = std::sqrt(std::max(0.0, (sl2 - sl * sl / n) / (n - 1.0)));
  p.height_stderr = std::sqrt(std::max(0.0, (sh2 - sh * sh / n) / (n - 1.0)));
  return p;
}

ScalingFit fit_scaling(std::span<const double> sizes, std::span<const double> heights) {
  if (sizes.size() != heights.size()) throw std::invalid_argument("fit_scaling: length mismatch");
  if (sizes.size() < 3) throw std::invalid_argument("fit_scaling: need at least 3 sizes");
  const auto n = static_cast<double>(sizes.size());
  double mx = 0, my = 0;
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (!(heights[i] > 0.0) || !(sizes[i] > 0.0))
      throw std::invalid_argument("fit_scaling: sizes and heights must be positive");
    lx.push_back(std::log(sizes[i]));
    ly.push_back(std::log(heights[i]));
    mx += lx.back();
    my += ly.back();
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (!(sxx > 0.0)) throw std::invalid_argument("fit_scaling: sizes must not all be equal");
  ScalingFit f;
  f.exponent = sxy / sxx;
  f.log_prefactor = my - f.exponent * mx;
  double rss = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    const double e = ly[i] - (f.log_prefactor + f.exponent * lx[i]);
    rss += e * e;
  }
  f.exponent_stderr = std::sqrt(rss / (n - 2.0) / sxx);
  return f;
}

std::vector<PeakRow> sweep_peaks(const std::vector<PointResult>& rows, int resamples,
                                 std::uint64_t seed) {
  std::vector<PeakRow> peaks;
  std::size_t i = 0;
  while (i < rows.size()) {
    std::size_t j = i;
    while (j < rows.size() && rows[j].size == rows[i].size && rows[j].p_s == rows[i].p_s) ++j;
    std::vector<double> x, g, se;
    double f_max = 0.0;
    for (std::size_t k = i; k < j; ++k) {
      x.push_back(rows[k].t_a);
      g.push_back(rows[k].moments.g);
      se.push_back(rows[k].moments.g_ci.std_error);
      f_max = std::max(f_max, rows[k].moments.f);
    }
    if (x.size() >= 5) {
      const auto key = hash_combine(seed, static_cast<std::uint64_t>(peaks.size()));
      peaks.push_back({rows[i].kind, rows[i].size, rows[i].p_s, rows[i].p_sigma,
                       find_g_peak(x, g, se, resamples, key), f_max});
    }
    i = j;
  }
  return peaks;
}

void write_peaks_csv(const std::string& path, const std::vector<PeakRow>& peaks) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  os << "# " << kPeakSchema << '\n';
  os << "kind,size,p_s,p_sigma,peak_t_a,peak_t_a_over_pi,peak_t_a_stderr,peak_g,peak_g_stderr,"
        "grid_index,on_edge,f_max\n";
  for (const auto& p : peaks) {
    os << to_string(p.kind) << ',' << p.size << ',' << format_double(p.p_s) << ','
       << format_double(p.p_sigma) << ',' << format_double(p.peak.location) << ','
       << format_double(p.peak.location / kPi) << ',' << format_double(p.peak.location_stderr)
       << ',' << format_double(p.peak.height) << ',' << format_double(p.peak.height_stderr)
       << ',' << p.peak.index << ',' << (p.peak.on_edge ? 1 : 0) << ','
       << format_double(p.f_max) << '\n';
  }
  if (!os) throw std::runtime_error("write to " + path + " failed");
}

PhaseDiagram phase_diagram(const SweepConfig& cfg, const std::string& heatmap_path) {
  if (cfg.sizes.size() != 1) throw std::invalid_argument("phase_diagram: exactly one size required");
  if (cfg.t_grid.size() < 8 || cfg.p_s_grid.size() < 8)
    throw std::invalid_argument("phase_diagram: both grids need at least 8 points");
  const auto rows = run_sweep(cfg);
  const std::size_t nt = cfg.t_grid.size();
  const std::size_t np = cfg.p_s_grid.size();

  PhaseDiagram pd;
  std::vector<double> ridge_t(np), ridge_p(nt);
  std::vector<int> arg_t(np), arg_p(nt);
  for (std::size_t ip = 0; ip < np; ++ip) {
    std::vector<double> g(nt);
    for (std::size_t it = 0; it < nt; ++it) g[it] = rows[ip * nt + it].moments.g;
    const GPeak pk = find_g_peak(cfg.t_grid, g);
    ridge_t[ip] = pk.location;
    arg_t[ip] = pk.index;
  }
  for (std::size_t it = 0; it < nt; ++it) {
    std::vector<double> g(np);
    for (std::size_t ip = 0; ip < np; ++ip) g[ip] = rows[ip * nt + it].moments.g;
    const GPeak pk = find_g_peak(cfg.p_s_grid, g);
    ridge_p[it] = pk.location;
    arg_p[it] = pk.index;
  }
  for (std::size_t ip = 0; ip < np; ++ip) {
    for (std::size_t it = 0; it < nt; ++it) {
      const auto& r = rows[ip * nt + it];
      pd.cells.push_back({r.t_a, r.p_s, r.p_tilde, r.moments.f, r.moments.g,
                          r.moments.g_ci.std_error, ridge_t[ip], ridge_p[it],
                          arg_t[ip] == static_cast<int>(it) || arg_p[it] == static_cast<int>(ip)});
    }
  }
  // grids are given in ascending order by convention; pick the extremes explicitly
  const auto min_p = std::min_element(cfg.p_s_grid.begin(), cfg.p_s_grid.end()) - cfg.p_s_grid.begin();
  const auto max_t = std::max_element(cfg.t_grid.begin(), cfg.t_grid.end()) - cfg.t_grid.begin();
  pd.ridge_t_a_at_min_p_s = ridge_t[static_cast<std::size_t>(min_p)];
  pd.ridge_p_s_at_max_t_a = ridge_p[static_cast<std::size_t>(max_t)];

  if (!heatmap_path.empty()) {
    std::ofstream os(heatmap_path, std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open " + heatmap_path + " for writing");
    os << "# " << kPhaseSchema << '\n';
    os << "# size=" << cfg.sizes[0] << '\n';
    os << "# ridge_t_a_at_min_p_s=" << format_double(pd.ridge_t_a_at_min_p_s) << '\n';
    os << "# ridge_p_s_at_max_t_a=" << format_double(pd.ridge_p_s_at_max_t_a) << '\n';
    os << "t_a,t_a_over_pi,p_s,p_tilde,f,g,g_stderr,ridge_t_a,ridge_p_s,on_ridge\n";
    for (const auto& c : pd.cells) {
      os << format_double(c.t_a) << ',' << format_double(c.t_a / kPi) << ','
         << format_double(c.p_s) << ',' << format_double(c.p_tilde) << ','
         << format_double(c.f) << ',' << format_double(c.g) << ',' << format_double(c.g_stderr)
         << ',' << format_double(c.ridge_t_a) << ',' << format_double(c.ridge_p_s) << ','
         << (c.on_ridge ? 1 : 0) << '\n';
    }
    if (!os) throw std::runtime_error("write to " + heatmap_path + " failed");
  }
  return pd;
}

void write_site_map_csv(const std::string& path, const LatticeGeometry& geom,
                        const BondPlaquetteMeans& means, double t_a, double p_s, double p_sigma) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  os << "# " << kSiteMapSchema << '\n';
  os << "# kind=" << to_string(geom.kind()) << '\n';
  os << "# size=" << geom.size_param() << '\n';
  if (geom.kind() == LatticeKind::brickwall) os << "# columns=" << 2 * geom.size_param() + 1 << '\n';
  os << "# t_a=" << format_double(t_a) << '\n';
  os << "# p_s=" << format_double(p_s) << '\n';
  os << "# p_sigma=" << format_double(p_sigma) << '\n';
  os << "# shots=" << means.shots << '\n';
  os << "element,id,site_a,site_b,bonds,mean,stderr\n";
  for (int b = 0; b < geom.num_bonds(); ++b) {
    const auto& bd = geom.bond(b);
    os << "bond," << b << ',' << bd.site_a << ',' << bd.site_b << ",," << format_double(means.zxz[b])
       << ',' << format_double(means.zxz_stderr[b]) << '\n';
  }
  for (int p = 0; p < geom.num_plaquettes(); ++p) {
    std::string bonds;
    for (int b : geom.plaquette(p)) bonds += (bonds.empty() ? "" : ";") + std::to_string(b);
    os << "plaquette," << p << ",,," << bonds << ',' << format_double(means.w[p]) << ','
       << format_double(means.w_stderr[p]) << '\n';
  }
  if (!os) throw std::runtime_error("write to " + path + " failed");
}

}  // namespace nishimori

namespace nishimori {

void write_fidelity_csv(const std::string& path, const std::vector<FidelityRow>& rows) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  os << "# " << kFidelitySchema << '\n';
  os << "kind,size,num_sites,S,k,draws_per_pool,z_pool,shots_per_observable,p_s,p_sigma,seed,"
        "f_hat,std_error,mean_z,mean_xy\n";
  for (const auto& r : rows) {
    const auto& e = r.estimate;
    os << to_string(r.kind) << ',' << r.size << ',' << e.num_sites << ',' << e.num_sampled << ','
       << e.instances << ',' << e.draws_per_pool << ',' << e.z_pool << ','
       << r.options.shots_per_observable << ',' << format_double(r.options.p_s) << ','
       << format_double(r.options.p_sigma) << ',' << r.options.seed << ','
       << format_double(e.f_hat) << ',' << format_double(e.std_error) << ','
       << format_double(e.mean_z) << ',' << format_double(e.mean_xy) << '\n';
  }
  if (!os) throw std::runtime_error("write to " + path + " failed");
}

std::vector<NoiseFitRow> fit_sweep_noise(const std::vector<PointResult>& rows) {
  std::vector<NoiseFitRow> out;
  std::size_t i = 0;
  while (i < rows.size()) {
    std::size_t j = i;
    while (j < rows.size() && rows[j].size == rows[i].size && rows[j].p_s == rows[i].p_s) ++j;
    NoiseFitRow r{rows[i].kind, rows[i].size, rows[i].p_s, rows[i].p_sigma, {}, {}, {}, {}};
    for (std::size_t k = i; k < j; ++k) {
      r.t_a.push_back(rows[k].t_a);
      r.zxz.push_back(rows[k].zxz);
      r.w.push_back(rows[k].w);
    }
    r.fit = fit_noise_model(r.t_a, r.zxz, r.w);
    out.push_back(std::move(r));
    i = j;
  }
  return out;
}

void write_noise_fit_csv(const std::string& path, const std::vector<NoiseFitRow>& rows) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  os << "# " << kNoiseFitSchema << '\n';
  os << "kind,size,points,p_s_true,p_sigma_true,p_s_hat,p_s_stderr,p_sigma_hat,p_sigma_stderr,"
        "slope_w,slope_w_stderr,slope_zxz,slope_zxz_stderr,model_violation\n";
  for (const auto& r : rows) {
    const auto& f = r.fit;
    os << to_string(r.kind) << ',' << r.size << ',' << r.t_a.size() << ','
       << format_double(r.p_s_true) << ',' << format_double(r.p_sigma_true) << ','
       << format_double(f.p_s_hat) << ',' << format_double(f.p_s_stderr) << ','
       << format_double(f.p_sigma_hat) << ',' << format_double(f.p_sigma_stderr) << ','
       << format_double(f.slope_w) << ',' << format_double(f.slope_w_stderr) << ','
       << format_double(f.slope_zxz) << ',' << format_double(f.slope_zxz_stderr) << ','
       << (f.model_violation ? 1 : 0) << '\n';
  }
  if (!os) throw std::runtime_error("write to " + path + " failed");
}

void write_histogram_csv(const std::string& path, const std::vector<PointResult>& rows) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  os << "# " << kHistogramSchema << '\n';
  os << "kind,size,num_sites,t_a,p_s,p_sigma,shots,m,count\n";
  for (const auto& r : rows) {
    for (std::size_t k = 0; k < r.m_histogram.size(); ++k) {
      if (r.m_histogram[k] == 0) continue;
      os << to_string(r.kind) << ',' << r.size << ',' << r.num_sites << ','
         << format_double(r.t_a) << ',' << format_double(r.p_s) << ','
         << format_double(r.p_sigma) << ',' << r.shots << ','
         << 2 * static_cast<int>(k) - r.num_sites << ',' << r.m_histogram[k] << '\n';
    }
  }
  if (!os) throw std::runtime_error("write to " + path + " failed");
}

std::vector<PointResult> read_sweep_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line != std::string("# ") + kSweepSchema)
    throw std::runtime_error(path + ": missing '" + kSweepSchema + "' schema line");
  bool header_seen = false;
  std::vector<PointResult> rows;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      if (line != sweep_csv_header()) throw std::runtime_error(path + ": unexpected header row");
      header_seen = true;
      continue;
    }
    rows.push_back(parse_sweep_row(line));
  }
  return rows;
}

}  // namespace nishimori
