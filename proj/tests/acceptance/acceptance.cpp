// End-to-end acceptance checks. One PASS/FAIL line per criterion; exit
// status is nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <unistd.h>

#include "bscca/adapt.hpp"
#include "bscca/cli/config.hpp"
#include "bscca/cli/io.hpp"
#include "bscca/cli/pipeline.hpp"
#include "bscca/cli/plot.hpp"
#include "bscca/coupling.hpp"
#include "bscca/postprocess.hpp"
#include "bscca/sampler.hpp"
#include "bscca/simdata.hpp"
#include "oracles.hpp"

using namespace bscca;
namespace fs = std::filesystem;

namespace {

int failures = 0;

struct Timer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
};

void verdict(int id, bool pass, const std::string& detail, const Timer& timer) {
  if (!pass) ++failures;
  std::printf("criterion %d: %s  [%.1fs] %s\n", id, pass ? "PASS" : "FAIL", timer.seconds(),
              detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

Index threads() { return std::max<Index>(1, std::thread::hardware_concurrency()); }

double median(std::vector<double> v) { return cli::quantile(std::move(v), 0.5); }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("bscca_acceptance_" + std::to_string(::getpid())) / name;
  fs::remove_all(p);
  return p;
}

// -- 1 ---------------------------------------------------------------------

void population_eigenstructure() {
  Timer timer;
  auto m = build_population_cov(20);
  auto g = m.gep();
  auto eig = oracle::generalized_eigen(g.a, g.b);
  const Index top = eig.values.size() - 1;
  Vector v = eig.vectors.col(top);
  Vector star = m.theta_star();
  const double cosine = std::abs(v.dot(star)) / (v.norm() * star.norm());
  const bool pass = std::abs(eig.values[top] - 0.9) <= 1e-8 && cosine >= 1 - 1e-8;
  verdict(1, pass,
          "lambda1 = " + fmt("%.12f", eig.values[top]) + ", |cos| = " + fmt("%.12f", cosine), timer);
}

// -- 2 ---------------------------------------------------------------------

void gradient_check() {
  Timer timer;
  std::mt19937_64 gen(2);
  std::normal_distribution<double> nd;
  auto prior = PriorConfig::defaults_for(10);
  auto ladder = TemperingLadder::with_scaled_steps(TemperingLadder::default_temperatures(), 10);
  double worst = 0.0;
  for (int rep = 0; rep < 20; ++rep) {
    auto g = oracle::random_gep(5, 5, 40, gen);
    auto s = oracle::random_state(10, gen, rep % 5);
    const Index m = s.active_count();
    Vector u(m);
    for (Index i = 0; i < m; ++i) u[i] = nd(gen);
    const Vector gr = grad_selected(u, s.level, s.delta, g, prior, ladder);
    const double h = 1e-6;
    for (Index i = 0; i < m; ++i) {
      Vector up = u, dn = u;
      up[i] += h;
      dn[i] -= h;
      const double fd = (log_selected_density(up, s.level, s.delta, g, prior, ladder) -
                         log_selected_density(dn, s.level, s.delta, g, prior, ladder)) /
                        (2 * h);
      worst = std::max(worst, std::abs(fd - gr[i]) / std::max(1.0, std::abs(gr[i])));
    }
  }
  verdict(2, worst <= 1e-5, "max relative error " + fmt("%.3g", worst), timer);
}

// -- 3 ---------------------------------------------------------------------

GepPair pair_1x1(double sxy, double n) {
  Matrix sx = Matrix::Identity(1, 1), sy = Matrix::Identity(1, 1), c(1, 1);
  c << sxy;
  return assemble_gep(sx, sy, c, n);
}

void kernel_oracles() {
  Timer timer;
  std::ostringstream detail;

  // (a) Gibbs frequency
  bool a_pass = false;
  {
    std::mt19937_64 gen(31);
    auto g = oracle::random_gep(3, 3, 20, gen);
    auto prior = PriorConfig::defaults_for(6);
    prior.q = 0.4;
    auto ladder = TemperingLadder::with_scaled_steps({1.0, 2.0}, 6);
    ChainState s;
    Index j = -1;
    double q = 0;
    for (int rep = 0; rep < 200 && j < 0; ++rep) {
      s = oracle::random_state(6, gen, 1);
      for (Index c = 0; c < 6 && j < 0; ++c) {
        q = gibbs_success_prob(c, s, g, prior, ladder);
        if (q > 0.1 && q < 0.9) j = c;
      }
    }
    const int n = 100000;
    int ones = 0;
    Rng rng(32);
    for (int i = 0; i < n; ++i) {
      auto t = s;
      QuadraticCache cache(g, t);
      gibbs_update_delta(t, cache, GibbsPlan{{j}}, rng, g, prior, ladder);
      ones += t.delta[static_cast<std::size_t>(j)];
    }
    const double z = (static_cast<double>(ones) / n - q) / std::sqrt(q * (1 - q) / n);
    a_pass = j >= 0 && std::abs(z) <= 3.0;
    detail << "(a) z = " << fmt("%.2f", z);
  }

  // (b) one-dimensional MALA vs quadrature
  bool b_pass = false;
  {
    auto g = pair_1x1(0.6, 40.0);
    auto prior = PriorConfig::defaults_for(2);
    auto ladder = TemperingLadder::make({1.0, 1.5}, {1.0, 1.0});
    ChainState s;
    s.delta = {1, 0};
    s.theta = Vector::Constant(2, 0.3);
    s.level = 1;
    QuadraticCache cache(g, s);
    Rng rng(33);
    std::vector<double> draws;
    for (int i = 0; i < 100000; ++i) {
      mala_update_theta(s, cache, rng, g, prior, ladder);
      draws.push_back(s.theta[0]);
    }
    oracle::QuadratureCdf cdf(
        [&](double u) {
          return log_selected_density(Vector::Constant(1, u), 1, s.delta, g, prior, ladder);
        },
        -15.0, 15.0, 20000);
    const double ks = oracle::ks_one_sample(draws, cdf);
    b_pass = ks < 0.02;
    detail << ", (b) KS = " << fmt("%.4f", ks);
  }

  // (c) temperature occupancy at K = 2
  bool c_pass = false;
  {
    std::mt19937_64 gen(34);
    auto g = oracle::random_gep(2, 2, 10, gen);
    auto prior = PriorConfig::defaults_for(4);
    auto ladder = TemperingLadder::with_scaled_steps({1.0, 1.5}, 4);
    auto s = oracle::random_state(4, gen);
    QuadraticCache cache(g, s);
    const double lp = log_quasi_posterior(s, g, prior);
    ladder.log_weights = {lp, lp / 1.5 - 0.8};
    std::vector<double> target(2);
    for (int k = 0; k < 2; ++k) {
      s.level = k;
      target[static_cast<std::size_t>(k)] = std::exp(log_tempered(s, g, prior, ladder));
    }
    const double z = target[0] + target[1];
    s.level = 0;
    Rng rng(35);
    double occ1 = 0;
    const long steps = 1000000;
    for (long i = 0; i < steps; ++i) {
      temperature_update(s, cache, rng, g, prior, ladder);
      occ1 += s.level;
    }
    const double err = std::abs(occ1 / steps - target[1] / z);
    c_pass = err <= 0.01;
    detail << ", (c) |occupancy - target| = " << fmt("%.4f", err);
  }
  verdict(3, a_pass && b_pass && c_pass, detail.str(), timer);
}

// -- 4 ---------------------------------------------------------------------

double chi2_two_sample(const std::vector<double>& a, const std::vector<double>& b, int& dof) {
  double chi = 0;
  dof = -1;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double tot = a[k] + b[k];
    if (tot == 0) continue;
    ++dof;
    chi += (a[k] - tot / 2) * (a[k] - tot / 2) / (tot / 2) + (b[k] - tot / 2) * (b[k] - tot / 2) / (tot / 2);
  }
  return chi;
}

void coupling_faithfulness() {
  Timer timer;
  std::mt19937_64 gen(41);
  auto g = oracle::random_gep(3, 3, 30, gen);
  auto prior = PriorConfig::defaults_for(6);
  prior.q = 0.3;
  auto ladder = TemperingLadder::with_scaled_steps({1.0, 1.5, 2.0}, 6);
  auto x0 = oracle::random_state(6, gen, 1);
  auto y0 = oracle::random_state(6, gen, 0);
  const int n = 10000;
  bool pass = true;
  std::ostringstream detail;

  // Gibbs: delta counts of chain x vs the single-chain update, full sweep
  {
    std::vector<double> cx(6, 0), sx(6, 0);
    Rng rc(42), rs(43);
    for (int i = 0; i < n; ++i) {
      auto x = x0, y = y0, s = x0;
      QuadraticCache qx(g, x), qy(g, y), qs(g, s);
      auto plan = draw_gibbs_plan(6, 6, rc);
      coupled_gibbs_step(x, qx, y, qy, plan, rc, g, prior, ladder);
      gibbs_update_delta(s, qs, draw_gibbs_plan(6, 6, rs), rs, g, prior, ladder);
      for (std::size_t j = 0; j < 6; ++j) { cx[j] += x.delta[j]; sx[j] += s.delta[j]; }
    }
    // per-coordinate 2x2 tables
    double worst = 0;
    for (std::size_t j = 0; j < 6; ++j) {
      int dof = 0;
      const double chi = chi2_two_sample({cx[j], n - cx[j]}, {sx[j], n - sx[j]}, dof);
      if (dof > 0) {
        worst = std::max(worst, chi);
        pass = pass && chi < oracle::chi_square_99(dof);
      }
    }
    detail << "gibbs max chi2 " << fmt("%.2f", worst);
  }
  // theta: KS per coordinate
  {
    std::vector<std::vector<double>> c(6), s(6);
    Rng rc(44), rs(45);
    for (int i = 0; i < n; ++i) {
      auto x = x0, y = y0, a = x0;
      QuadraticCache qx(g, x), qy(g, y), qa(g, a);
      coupled_theta_step(x, qx, y, qy, rc, g, prior, ladder);
      mala_update_theta(a, qa, rs, g, prior, ladder);
      for (Index j = 0; j < 6; ++j) {
        c[static_cast<std::size_t>(j)].push_back(x.theta[j]);
        s[static_cast<std::size_t>(j)].push_back(a.theta[j]);
      }
    }
    double worst = 0;
    for (std::size_t j = 0; j < 6; ++j) worst = std::max(worst, oracle::ks_two_sample(c[j], s[j]));
    pass = pass && worst < oracle::ks_critical_1pct(n, n);
    detail << ", theta max KS " << fmt("%.4f", worst);
  }
  // temperature: level counts
  {
    std::vector<double> c(3, 0), s(3, 0);
    Rng rc(46), rs(47);
    QuadraticCache qx(g, x0), qy(g, y0);
    for (int i = 0; i < n; ++i) {
      auto x = x0, y = y0, a = x0;
      coupled_temperature_step(x, qx, y, qy, rc, g, prior, ladder);
      temperature_update(a, qx, rs, g, prior, ladder);
      c[static_cast<std::size_t>(x.level)] += 1;
      s[static_cast<std::size_t>(a.level)] += 1;
    }
    int dof = 0;
    const double chi = chi2_two_sample(c, s, dof);
    pass = pass && (dof <= 0 || chi < oracle::chi_square_99(dof));
    detail << ", temperature chi2 " << fmt("%.2f", chi);
  }
  // identical states stay identical
  {
    Rng init(48);
    auto s = initial_state(6, init);
    CoupledChains pair(g, prior, s, s, Rng(49), 6);
    bool same = true;
    for (int i = 0; i < 100; ++i) {
      pair.step(ladder);
      same = same && pair.x().identical(pair.y());
    }
    pass = pass && same;
    detail << ", identical for 100 steps: " << (same ? "yes" : "no");
  }
  verdict(4, pass, detail.str(), timer);
}

// -- 5 and 6 ---------------------------------------------------------------

AdaptiveRun sample_chain(const GepPair& gep, const PriorConfig& prior,
                         const std::vector<double>& temps, Index iterations, std::uint64_t seed) {
  AdaptOptions opt;
  opt.batch_size = std::min<Index>(100, gep.p());
  return run_adaptive_chain(gep, prior, temps, iterations, seed,
                            AdaptState::initial(temps, gep.p(), 0.2, 0.5), opt);
}

struct SeedResult {
  double mse_x = 0;
  double tpr = 0, tnr = 0;             // point estimate, view 1
  double post_tpr = 0, post_tnr = 0;   // posterior averages over both views
};

SeedResult simulated_run(const cli::Config& c, std::uint64_t seed, const std::vector<double>& temps,
                         Index iterations) {
  auto sim = cli::simulate_data(c, c.p, c.n, cli::derive_seed(seed, cli::kDataSeed, 0));
  auto gep = estimate_gep(sim.data, c.estimator == "kendall-sine" ? Estimator::kKendallSine
                                                                  : Estimator::kSample);
  auto run = sample_chain(gep, cli::prior_for(c, c.p), temps, iterations,
                          cli::derive_seed(seed, cli::kChainSeed, 0));
  auto rep = build_report(run.trace, gep.px, Truth{sim.model.vx_star, sim.model.vy_star});
  SeedResult r;
  r.mse_x = *rep.mse_x;
  r.tpr = *rep.point_tpr_x;
  r.tnr = *rep.point_tnr_x;
  r.post_tpr = 0.5 * (*rep.tpr_x + *rep.tpr_y);
  r.post_tnr = 0.5 * (*rep.tnr_x + *rep.tnr_y);
  return r;
}

void tempering_table() {
  Timer timer;
  cli::Config c;
  c.p = 100;
  c.n = 100;
  std::vector<SeedResult> st(10), plain(20);
  cli::parallel_for(30, threads(), [&](Index i) {
    if (i < 10)
      st[static_cast<std::size_t>(i)] =
          simulated_run(c, static_cast<std::uint64_t>(i + 1), c.temperatures, 10000);
    else
      plain[static_cast<std::size_t>(i - 10)] =
          simulated_run(c, static_cast<std::uint64_t>(i - 9), {1.0}, 2000);
  });
  std::vector<double> mses;
  int recovered = 0, st_trapped = 0, plain_trapped = 0;
  for (const auto& r : st) {
    mses.push_back(r.mse_x);
    recovered += r.tpr == 1.0 && r.tnr >= 0.99;
    st_trapped += r.mse_x > 0.5;
  }
  for (const auto& r : plain) plain_trapped += r.mse_x > 0.5;
  const double med = median(mses);
  const double st_frac = st_trapped / 10.0, plain_frac = plain_trapped / 20.0;
  const bool pass = med <= 0.15 && recovered >= 8 && plain_frac > st_frac;
  std::ostringstream d;
  d << "ST median mse_x " << fmt("%.4f", med) << ", support recovered " << recovered
    << "/10, trapped ST " << st_trapped << "/10 vs K=1 " << plain_trapped << "/20";
  verdict(5, pass, d.str(), timer);
}

void truncated_copula() {
  Timer timer;
  bool frac_pass = true;
  double worst = 0;
  {
    auto m = build_population_cov(100);
    auto latent = sample_gaussian_pairs(m, 10000, 61);
    for (double cval : {-2.0, -1.0, 0.0}) {
      auto f = zero_fraction(truncate_copula(latent, TruncationSpec::uniform(m.py, cval)).y);
      for (Index j = 0; j < f.size(); ++j) worst = std::max(worst, std::abs(f[j] - oracle::phi(cval)));
    }
    frac_pass = worst <= 0.03;
  }
  cli::Config c;
  c.p = 100;
  c.n = 200;
  c.truncation_c = 0.0;
  c.estimator = "kendall-sine";
  std::vector<SeedResult> res(10);
  cli::parallel_for(10, threads(), [&](Index i) {
    res[static_cast<std::size_t>(i)] =
        simulated_run(c, static_cast<std::uint64_t>(i + 1), c.temperatures, 10000);
  });
  std::vector<double> tpr, tnr;
  for (const auto& r : res) {
    tpr.push_back(r.post_tpr);
    tnr.push_back(r.post_tnr);
  }
  const double mtpr = median(tpr), mtnr = median(tnr);
  const bool pass = frac_pass && mtnr >= 0.95 && mtpr >= 0.9;
  std::ostringstream d;
  d << "max |zero fraction - Phi(c)| " << fmt("%.4f", worst) << ", median TPR " << fmt("%.4f", mtpr)
    << ", median TNR " << fmt("%.4f", mtnr);
  verdict(6, pass, d.str(), timer);
}

// -- 7 ---------------------------------------------------------------------

void mixing_scaling() {
  Timer timer;
  cli::Config c;
  c.p_list = {50, 100};
  c.replications = 20;
  c.jobs = threads();
  c.seed = 7;
  const auto out = scratch("couple");
  c.out = out.string();
  std::ostringstream log;
  cli::run_command("couple", c, log);
  auto rep = cli::read_json(out / "report.json");
  bool all_met = true, monotone = true;
  std::vector<double> mix;
  std::ostringstream d;
  for (const auto& dim : rep["dimensions"]) {
    const auto p = dim["p"].get<Index>();
    const auto met = dim["met"].get<Index>();
    all_met = all_met && met == 20;
    auto tv = cli::read_table(out / ("tv_curve_p" + std::to_string(p) + ".csv"));
    double prev = INFINITY;
    for (const auto& row : tv.rows) {
      const double b = cli::parse_double(row[1]);
      monotone = monotone && b >= 0 && b <= prev;
      prev = b;
    }
    d << "p=" << p << ": " << met << "/20 met";
    if (dim["mixing_time"].is_null()) {
      mix.push_back(NAN);
      d << ", no mixing time; ";
    } else {
      mix.push_back(dim["mixing_time"].get<double>());
      d << ", t_mix " << dim["mixing_time"].get<Index>() << "; ";
    }
  }
  const double ratio = mix.size() == 2 ? mix[1] / mix[0] : NAN;
  d << "curves monotone: " << (monotone ? "yes" : "no") << ", ratio " << fmt("%.3f", ratio);
  fs::remove_all(out);
  verdict(7, all_met && monotone && ratio <= 4.0, d.str(), timer);
}

// -- 8 ---------------------------------------------------------------------

bool same_files(const fs::path& a, const fs::path& b, std::ostringstream& d) {
  bool ok = true;
  for (const auto& e : fs::directory_iterator(a)) {
    const auto name = e.path().filename();
    const auto ext = name.extension();
    if (name == "config.json" || (ext != ".json" && ext != ".csv")) continue;
    if (slurp(e.path()) != slurp(b / name)) {
      ok = false;
      d << " differs:" << name.string();
    }
  }
  return ok;
}

void determinism() {
  Timer timer;
  std::ostringstream log, d;
  bool pass = true;
  auto run_twice = [&](const std::string& command, cli::Config c, Index jobs_second) {
    const auto a = scratch(command + "_a"), b = scratch(command + "_b");
    c.out = a.string();
    cli::run_command(command, c, log);
    c.out = b.string();
    c.jobs = jobs_second;
    cli::run_command(command, c, log);
    pass = same_files(a, b, d) && pass;
    fs::remove_all(a);
    fs::remove_all(b);
  };
  cli::Config s;
  s.p = 40;
  s.n = 40;
  s.iterations = 2000;
  s.seed = 8;
  run_twice("sample", s, 1);
  s.truncation_c = -0.5;
  s.estimator = "kendall-sine";
  run_twice("sample", s, 1);
  cli::Config b;
  b.p = 20;
  b.n = 20;
  b.iterations = 500;
  b.replications = 4;
  run_twice("benchmark", b, threads());
  cli::Config cp;
  cp.p_list = {20};
  cp.replications = 4;
  cp.max_iterations = 400;
  run_twice("couple", cp, threads());
  verdict(8, pass, pass ? "sample, benchmark and couple outputs bit-identical" : d.str(), timer);
}

}  // namespace

int main() {
  population_eigenstructure();
  gradient_check();
  kernel_oracles();
  coupling_faithfulness();
  tempering_table();
  truncated_copula();
  mixing_scaling();
  determinism();
  fs::remove_all(fs::temp_directory_path() / ("bscca_acceptance_" + std::to_string(::getpid())));
  std::printf("%d of 8 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
