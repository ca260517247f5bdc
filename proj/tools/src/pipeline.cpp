#include "bscca/cli/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <ostream>
#include <thread>

#include "bscca/adapt.hpp"
#include "bscca/cli/aggregate.hpp"
#include "bscca/cli/io.hpp"
#include "bscca/cli/plot.hpp"
#include "bscca/coupling.hpp"
#include "bscca/error.hpp"

namespace bscca::cli {

using nlohmann::ordered_json;

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag, std::uint64_t index) {
  return Rng(base, tag).split(index).engine()();
}

void parallel_for(Index count, Index jobs, const std::function<void(Index)>& fn) {
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(count));
  std::atomic<Index> next{0};
  auto worker = [&] {
    for (Index i = next++; i < count; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
  };
  const Index threads = std::max<Index>(1, std::min(jobs, count));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (Index t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

SimulatedData simulate_data(const Config& config, Index p, Index n, std::uint64_t seed) {
  SimulatedData s{build_population_cov(p), {}};
  s.data = sample_gaussian_pairs(s.model, n, seed);
  if (config.truncation_c)
    s.data = truncate_copula(s.data, TruncationSpec::uniform(s.model.py, *config.truncation_c));
  return s;
}

PriorConfig prior_for(const Config& config, Index p) {
  PriorConfig prior = PriorConfig::defaults_for(p);
  prior.rho0 = config.rho0;
  prior.rho1 = config.rho1;
  if (config.q) prior.q = *config.q;
  prior.sigma = config.sigma;
  prior.validate();
  return prior;
}

namespace {

std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

GepPair estimate(const Config& c, const Dataset& data) {
  return estimate_gep(data, parse_estimator(c.estimator), {}, c.psd_floor);
}

ordered_json truth_json(const PopulationModel& m, Index n, std::uint64_t seed, const Config& c) {
  ordered_json j;
  j["p_x"] = m.px;
  j["p_y"] = m.py;
  j["n"] = n;
  j["lambda1"] = m.lambda1;
  j["data_seed"] = seed;
  j["truncation_c"] = c.truncation_c ? ordered_json(*c.truncation_c) : ordered_json(nullptr);
  j["vx_star"] = to_std(m.vx_star);
  j["vy_star"] = to_std(m.vy_star);
  return j;
}

Truth truth_from_json(const ordered_json& j) {
  Truth t;
  auto vx = j.at("vx_star").get<std::vector<double>>();
  auto vy = j.at("vy_star").get<std::vector<double>>();
  t.vx = Eigen::Map<Vector>(vx.data(), static_cast<Index>(vx.size()));
  t.vy = Eigen::Map<Vector>(vy.data(), static_cast<Index>(vy.size()));
  return t;
}

/// Input data for estimate-cov and sample: files when given, else simulated.
struct Inputs {
  Dataset data;
  std::optional<PopulationModel> model;
  std::uint64_t data_seed = 0;
};

Inputs load_inputs(const Config& c) {
  Inputs in;
  if (!c.x.empty()) {
    in.data.x = read_matrix(c.x);
    in.data.y = read_matrix(c.y);
    in.data.validate();
    return in;
  }
  in.data_seed = derive_seed(c.seed, kDataSeed, 0);
  auto sim = simulate_data(c, c.p, c.n, in.data_seed);
  in.data = std::move(sim.data);
  in.model = std::move(sim.model);
  return in;
}

void write_data(OutputStage& stage, const Config& c, const Inputs& in) {
  if (!in.model) return;
  write_matrix(stage.path("X.csv"), in.data.x);
  write_matrix(stage.path("Y.csv"), in.data.y);
  write_json(stage.path("truth.json"), truth_json(*in.model, in.data.n(), in.data_seed, c));
}

std::map<std::string, double> metric_map(const EstimateReport& r) {
  std::map<std::string, double> m;
  auto put = [&](const char* k, const std::optional<double>& v) {
    if (v) m[k] = *v;
  };
  put("mse_x", r.mse_x);
  put("mse_y", r.mse_y);
  put("tpr_x", r.tpr_x);
  put("tpr_y", r.tpr_y);
  put("tnr_x", r.tnr_x);
  put("tnr_y", r.tnr_y);
  put("point_mse_x", r.point_mse_x);
  put("point_mse_y", r.point_mse_y);
  put("point_tpr_x", r.point_tpr_x);
  put("point_tpr_y", r.point_tpr_y);
  put("point_tnr_x", r.point_tnr_x);
  put("point_tnr_y", r.point_tnr_y);
  return m;
}

Table metrics_table(const EstimateReport& r) {
  Table t{{"metric", "value"}, {}};
  t.rows.push_back({"samples", std::to_string(r.samples)});
  t.rows.push_back({"skipped", std::to_string(r.skipped)});
  t.rows.push_back({"selected", std::to_string(std::count(r.delta_bar.begin(), r.delta_bar.end(), 1))});
  for (const auto& [k, v] : metric_map(r)) t.rows.push_back({k, format_double(v)});
  return t;
}

AdaptiveRun run_sampler(const Config& c, const GepPair& gep, std::uint64_t seed,
                        const std::vector<double>& temps) {
  const Index p = gep.p();
  AdaptOptions opt;
  opt.batch_size = std::min(c.batch_size, p);
  opt.mala_steps = c.mala_steps;
  if (!c.adapt) opt.freeze_after = 0;
  return run_adaptive_chain(gep, prior_for(c, p), temps, c.iterations, seed,
                            AdaptState::initial(temps, p, c.tolerance, c.step_scale), opt);
}

EstimateReport report_from_states(const std::vector<Index>& iters,
                                  const std::vector<ChainState>& states, Index iterations,
                                  Index px, const std::optional<Truth>& truth) {
  std::vector<int> levels;
  for (const auto& s : states) levels.push_back(s.level);
  auto keep = extract_posterior_samples(iters, levels, iterations);
  std::vector<ChainState> kept;
  for (Index i : keep) kept.push_back(states[static_cast<std::size_t>(i)]);
  return build_report(kept, px, truth);
}

// ---------------------------------------------------------------- commands

void cmd_simulate(const Config& c, OutputStage& stage, std::ostream& log) {
  Inputs in;
  in.data_seed = derive_seed(c.seed, kDataSeed, 0);
  auto sim = simulate_data(c, c.p, c.n, in.data_seed);
  in.data = std::move(sim.data);
  in.model = std::move(sim.model);
  write_data(stage, c, in);
  log << "simulated n=" << c.n << " p=" << c.p << "\n";
}

void cmd_estimate_cov(const Config& c, OutputStage& stage, std::ostream& log) {
  auto in = load_inputs(c);
  auto gep = estimate(c, in.data);
  write_matrix(stage.path("A.csv"), gep.a);
  write_matrix(stage.path("B.csv"), gep.b);
  ordered_json j;
  j["p_x"] = gep.px;
  j["p_y"] = gep.py;
  j["n"] = in.data.n();
  j["estimator"] = c.estimator;
  j["min_eigenvalue_b"] = Eigen::SelfAdjointEigenSolver<Matrix>(gep.b, Eigen::EigenvaluesOnly).eigenvalues()(0);
  write_json(stage.path("gep.json"), j);
  log << "estimated (A, B) with p=" << gep.p() << "\n";
}

void cmd_sample(const Config& c, OutputStage& stage, std::ostream& log) {
  auto in = load_inputs(c);
  auto gep = estimate(c, in.data);
  const auto seed = derive_seed(c.seed, kChainSeed, 0);
  auto run = run_sampler(c, gep, seed, c.temperatures);
  const auto& states = run.trace.states;
  const Index n_iter = c.iterations;
  const int K = static_cast<int>(c.temperatures.size());

  write_data(stage, c, in);

  Table trace{{"iter", "k", "l0", "R_n"}, {}};
  for (Index t = 0; t <= n_iter; ++t) {
    const auto& s = states[static_cast<std::size_t>(t)];
    trace.rows.push_back({std::to_string(t), std::to_string(s.level + 1),
                          std::to_string(s.active_count()), format_double(rayleigh_selected(s, gep))});
  }
  write_table(stage.path("trace.csv"), trace);

  std::vector<Index> iters;
  std::vector<ChainState> dump;
  for (Index t = 0; t <= n_iter; t += c.thin) {
    iters.push_back(t);
    dump.push_back(states[static_cast<std::size_t>(t)]);
  }
  write_table(stage.path("states.csv"), states_table(iters, dump));

  Table adapt{{"iter", "k", "acceptance_rate_k", "a_wl"}, {}};
  for (int k = 1; k <= K; ++k) adapt.header.push_back("occupancy_" + std::to_string(k));
  for (const auto& r : run.records) {
    std::vector<std::string> row{std::to_string(r.iter), std::to_string(r.level + 1),
                                 format_double(r.acceptance_rate), format_double(r.increment)};
    for (double o : r.occupancy) row.push_back(format_double(o));
    adapt.rows.push_back(std::move(row));
  }
  write_table(stage.path("adaptation.csv"), adapt);

  std::optional<Truth> truth;
  if (in.model) truth = Truth{in.model->vx_star, in.model->vy_star};
  else if (!c.truth.empty()) truth = truth_from_json(read_json(c.truth));
  auto report = report_from_states(iters, dump, n_iter, gep.px, truth);
  write_json(stage.path("report.json"), report_json(report, gep.px, gep.py, n_iter));
  write_table(stage.path("metrics.csv"), metrics_table(report));

  ordered_json meta;
  meta["p_x"] = gep.px;
  meta["p_y"] = gep.py;
  meta["iterations"] = n_iter;
  meta["thin"] = c.thin;
  meta["chain_seed"] = seed;
  meta["final_log_weights"] = run.adapt.log_c;
  meta["final_step_sizes"] = run.adapt.ladder(c.temperatures).step_sizes;
  meta["wang_landau_resets"] = run.adapt.resets;
  write_json(stage.path("run.json"), meta);

  // Autocorrelation of the three most frequently selected coefficients at k = 1.
  std::vector<Index> order(static_cast<std::size_t>(gep.p()));
  for (Index j = 0; j < gep.p(); ++j) order[static_cast<std::size_t>(j)] = j;
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
    return report.inclusion_probs[a] > report.inclusion_probs[b];
  });
  order.resize(std::min<std::size_t>(3, order.size()));
  const Index burn = (3 * n_iter + 3) / 4;
  const int max_lag = 50;
  Table acf_t{{"lag"}, {}};
  std::vector<Series> series;
  for (Index j : order) {
    std::vector<double> xs;
    for (Index t = burn; t <= n_iter; ++t) {
      const auto& s = states[static_cast<std::size_t>(t)];
      if (s.level == 0) xs.push_back(s.delta[j] ? s.theta[j] : 0.0);
    }
    auto acf = autocorrelation(xs, max_lag);
    Series sr{"theta_" + std::to_string(j + 1), {}, acf};
    for (int h = 0; h <= max_lag; ++h) sr.x.push_back(h);
    series.push_back(std::move(sr));
    acf_t.header.push_back("theta_" + std::to_string(j + 1));
  }
  for (int h = 0; h <= max_lag; ++h) {
    std::vector<std::string> row{std::to_string(h)};
    for (const auto& s : series) row.push_back(format_double(s.y[h]));
    acf_t.rows.push_back(std::move(row));
  }
  write_table(stage.path("acf.csv"), acf_t);
  write_text(stage.path("acf.svg").string(),
             svg_lines(series, "Autocorrelation of selected coefficients (k = 1)", "lag", "ACF"));

  log << "sampled " << n_iter << " iterations; " << report.samples
      << " retained states; selected " << std::count(report.delta_bar.begin(), report.delta_bar.end(), 1)
      << " coordinates\n";
}

void cmd_report(const Config& c, OutputStage& stage, std::ostream& log) {
  const fs::path dir = c.input.empty() ? fs::path(c.out) : fs::path(c.input);
  auto meta = read_json(dir / "run.json");
  std::vector<Index> iters;
  std::vector<ChainState> states;
  parse_states_table(read_table(dir / "states.csv"), iters, states);
  const Index px = meta.at("p_x").get<Index>();
  const Index py = meta.at("p_y").get<Index>();
  const Index n_iter = meta.at("iterations").get<Index>();
  std::optional<Truth> truth;
  if (!c.truth.empty()) truth = truth_from_json(read_json(c.truth));
  else if (fs::exists(dir / "truth.json")) truth = truth_from_json(read_json(dir / "truth.json"));
  auto report = report_from_states(iters, states, n_iter, px, truth);
  if (!states.empty() && states.front().p() != px + py)
    throw Error(ErrorKind::kDimensionMismatch, "states do not match p_x + p_y in run.json");
  write_json(stage.path("report.json"), report_json(report, px, py, n_iter));
  write_table(stage.path("metrics.csv"), metrics_table(report));
  log << "report from " << report.samples << " retained states\n";
}

void cmd_couple(const Config& c, OutputStage& stage, std::ostream& log) {
  Table meet{{"replication", "p", "L", "tau"}, {}};
  ordered_json summary = ordered_json::array();
  std::vector<BoxGroup> boxes;
  std::vector<double> markers;
  for (Index p : c.p_list) {
    const Index n = std::max<Index>(2, static_cast<Index>(std::llround(c.n_ratio * static_cast<double>(p))));
    const auto data_seed = derive_seed(c.seed, kDataSeed, static_cast<std::uint64_t>(p));
    auto sim = simulate_data(c, p, n, data_seed);
    auto gep = estimate(c, sim.data);
    auto prior = prior_for(c, p);
    auto ladder = TemperingLadder::with_scaled_steps(c.temperatures, p, c.step_scale);
    const Index lag = c.lag > 0 ? c.lag : p;
    const Index max_it = c.max_iterations > 0 ? c.max_iterations : default_max_iterations(p);
    CouplingOptions opt;
    opt.adaptive = c.adapt;
    opt.tolerance = c.tolerance;
    std::vector<MeetingResult> results(static_cast<std::size_t>(c.replications));
    parallel_for(c.replications, c.jobs, [&](Index r) {
      auto seed = derive_seed(c.seed, kCoupleSeed, static_cast<std::uint64_t>(p) * 1000003u + r);
      results[static_cast<std::size_t>(r)] = lagged_meeting_time(
          gep, prior, ladder, max_it, std::min(c.batch_size, p), lag, seed, opt);
    });
    std::vector<Index> taus;
    Index met = 0;
    BoxGroup box{"p=" + std::to_string(p), {}};
    for (Index r = 0; r < c.replications; ++r) {
      const auto& res = results[static_cast<std::size_t>(r)];
      meet.rows.push_back({std::to_string(r), std::to_string(p), std::to_string(lag),
                           res.tau ? std::to_string(*res.tau) : "NA"});
      // unmet pairs enter the bound censored at the cap
      taus.push_back(res.tau ? *res.tau : max_it);
      if (res.tau) {
        ++met;
        box.values.push_back(static_cast<double>(*res.tau) / static_cast<double>(p));
      }
    }
    auto curve = tv_bound_curve(taus, lag);
    Table tv{{"t", "bound"}, {}};
    for (std::size_t i = 0; i < curve.t_grid.size(); ++i)
      tv.rows.push_back({std::to_string(curve.t_grid[i]), format_double(curve.bound[i])});
    write_table(stage.path("tv_curve_p" + std::to_string(p) + ".csv"), tv);
    auto mix = mixing_time(curve, c.epsilon);

    ordered_json s;
    s["p"] = p;
    s["n"] = n;
    s["L"] = lag;
    s["max_iterations"] = max_it;
    s["replications"] = c.replications;
    s["met"] = met;
    std::vector<double> tv_taus;
    for (Index t : taus) tv_taus.push_back(static_cast<double>(t));
    s["median_tau"] = quantile(tv_taus, 0.5);
    s["mixing_time"] = mix ? ordered_json(*mix) : ordered_json(nullptr);
    s["mixing_time_over_p"] =
        mix ? ordered_json(static_cast<double>(*mix) / static_cast<double>(p)) : ordered_json(nullptr);
    s["censored"] = met < c.replications;
    summary.push_back(s);
    boxes.push_back(std::move(box));
    markers.push_back(mix ? static_cast<double>(*mix) / static_cast<double>(p) : NAN);
    log << "p=" << p << ": " << met << "/" << c.replications << " pairs met";
    if (mix) log << ", mixing time " << *mix;
    log << "\n";
  }
  write_table(stage.path("meeting_times.csv"), meet);
  ordered_json report;
  report["epsilon"] = c.epsilon;
  report["dimensions"] = summary;
  write_json(stage.path("report.json"), report);
  write_text(stage.path("meeting_times.svg").string(),
             svg_boxplot(boxes, "Meeting times / p (dashed: mixing time / p)", "tau / p", markers));
}

void cmd_benchmark(const Config& c, OutputStage& stage, std::ostream& log) {
  struct Variant {
    std::string name;
    std::vector<double> temps;
  };
  const std::vector<Variant> variants = {{"tempering", c.temperatures}, {"plain", {1.0}}};
  const Index reps = c.replications;
  const Index tasks = reps * static_cast<Index>(variants.size());
  std::vector<std::map<std::string, double>> metrics(static_cast<std::size_t>(tasks));
  parallel_for(tasks, c.jobs, [&](Index task) {
    const Index r = task / static_cast<Index>(variants.size());
    const auto& v = variants[static_cast<std::size_t>(task % static_cast<Index>(variants.size()))];
    auto sim = simulate_data(c, c.p, c.n, derive_seed(c.seed, kDataSeed, static_cast<std::uint64_t>(r)));
    auto gep = estimate(c, sim.data);
    auto run = run_sampler(c, gep, derive_seed(c.seed, kChainSeed, static_cast<std::uint64_t>(r)), v.temps);
    auto rep = build_report(run.trace, gep.px, Truth{sim.model.vx_star, sim.model.vy_star});
    auto m = metric_map(rep);
    m["trapped"] = *rep.mse_x > 0.5 ? 1.0 : 0.0;
    metrics[static_cast<std::size_t>(task)] = std::move(m);
  });

  const std::vector<std::string> cols = {"point_mse_x", "point_mse_y", "point_tpr_x", "point_tpr_y",
                                         "point_tnr_x", "point_tnr_y", "mse_x", "mse_y", "trapped"};
  Table per{{"replication", "method"}, {}};
  for (const auto& k : cols) per.header.push_back(k);
  for (Index task = 0; task < tasks; ++task) {
    const auto& m = metrics[static_cast<std::size_t>(task)];
    std::vector<std::string> row{std::to_string(task / 2), variants[static_cast<std::size_t>(task % 2)].name};
    for (const auto& k : cols) row.push_back(format_double(m.at(k)));
    per.rows.push_back(std::move(row));
  }
  write_table(stage.path("per_replication.csv"), per);

  Table table{{"method", "replications"}, {}};
  for (const auto& k : cols) table.header.push_back(k);
  ordered_json rep;
  rep["p"] = c.p;
  rep["n"] = c.n;
  rep["iterations"] = c.iterations;
  rep["replications"] = reps;
  ordered_json methods;
  for (std::size_t vi = 0; vi < variants.size(); ++vi) {
    std::vector<std::map<std::string, double>> mine;
    for (Index r = 0; r < reps; ++r) mine.push_back(metrics[static_cast<std::size_t>(r) * variants.size() + vi]);
    auto agg = aggregate_replications(mine);
    std::vector<std::string> row{variants[vi].name, std::to_string(reps)};
    ordered_json mj;
    for (const auto& k : cols) {
      row.push_back(format_mean_sd(agg.at(k)));
      mj[k] = {{"mean", agg.at(k).mean}, {"sd", agg.at(k).sd}};
    }
    table.rows.push_back(std::move(row));
    methods[variants[vi].name] = mj;
    log << variants[vi].name << ": mse_x " << format_mean_sd(agg.at("point_mse_x"))
        << ", trapped " << format_mean_sd(agg.at("trapped")) << "\n";
  }
  rep["methods"] = methods;
  write_table(stage.path("benchmark_table.csv"), table);
  write_json(stage.path("report.json"), rep);
}

}  // namespace

ordered_json report_json(const EstimateReport& r, Index px, Index py, Index iterations) {
  ordered_json j;
  j["p_x"] = px;
  j["p_y"] = py;
  j["iterations"] = iterations;
  j["samples"] = r.samples;
  j["skipped"] = r.skipped;
  std::vector<int> d(r.delta_bar.begin(), r.delta_bar.end());
  j["delta_bar"] = d;
  j["vx_bar"] = to_std(r.vx_bar);
  j["vy_bar"] = to_std(r.vy_bar);
  j["inclusion_probs"] = to_std(r.inclusion_probs);
  ordered_json m = ordered_json::object();
  for (const auto& [k, v] : metric_map(r)) m[k] = v;
  j["metrics"] = m;
  return j;
}

void run_command(const std::string& command, const Config& config, std::ostream& log) {
  config.validate(command);
  OutputStage stage(config.out);
  write_json(stage.path(command == "report" ? "report_config.json" : "config.json"),
             config.to_json());
  if (command == "simulate") cmd_simulate(config, stage, log);
  else if (command == "estimate-cov") cmd_estimate_cov(config, stage, log);
  else if (command == "sample") cmd_sample(config, stage, log);
  else if (command == "report") cmd_report(config, stage, log);
  else if (command == "couple") cmd_couple(config, stage, log);
  else if (command == "benchmark") cmd_benchmark(config, stage, log);
  else throw Error(ErrorKind::kInvalidConfig, "unknown command '" + command + "'");
  stage.commit();
}

}  // namespace bscca::cli
