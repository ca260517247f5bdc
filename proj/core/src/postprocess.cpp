#include "bscca/postprocess.hpp"

#include <map>

#include "bscca/error.hpp"

namespace bscca {

std::vector<Index> extract_posterior_samples(std::span<const Index> iters,
                                             std::span<const int> levels, Index iterations) {
  if (iters.size() != levels.size()) {
    throw Error(ErrorKind::kDimensionMismatch, "iteration and level columns differ in length");
  }
  const Index first = (3 * iterations + 3) / 4;  // ceil(3N/4)
  std::vector<Index> out;
  for (std::size_t i = 0; i < iters.size(); ++i) {
    if (iters[i] >= first && iters[i] <= iterations && levels[i] == 0) {
      out.push_back(static_cast<Index>(i));
    }
  }
  if (out.empty()) {
    throw Error(ErrorKind::kEmptySample,
                "no post-burn-in iteration at temperature 1; run longer or retune the ladder");
  }
  return out;
}

std::vector<Index> extract_posterior_samples(const ChainTrace& trace, Index iterations) {
  if (static_cast<Index>(trace.states.size()) != iterations + 1) {
    throw Error(ErrorKind::kDimensionMismatch, "trace length must be N + 1");
  }
  std::vector<Index> iters(trace.states.size());
  std::vector<int> levels(trace.states.size());
  for (std::size_t t = 0; t < trace.states.size(); ++t) {
    iters[t] = static_cast<Index>(t);
    levels[t] = trace.states[t].level;
  }
  return extract_posterior_samples(iters, levels, iterations);
}

std::vector<ChainState> gather_states(const ChainTrace& trace, std::span<const Index> indices) {
  std::vector<ChainState> out;
  out.reserve(indices.size());
  for (Index t : indices) out.push_back(trace.states.at(static_cast<std::size_t>(t)));
  return out;
}

PerSampleEstimates per_sample_estimates(std::span<const ChainState> samples, Index px) {
  PerSampleEstimates out;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const Vector v = samples[i].masked();
    const Index py = v.size() - px;
    const double nx = v.head(px).norm();
    const double ny = v.tail(py).norm();
    if (nx == 0.0 || ny == 0.0) {
      ++out.skipped;
      continue;
    }
    out.vx.push_back(v.head(px) / nx);
    out.vy.push_back(v.tail(py) / ny);
    out.kept.push_back(static_cast<Index>(i));
  }
  return out;
}

Support support_mode(std::span<const ChainState> samples) {
  if (samples.empty()) throw Error(ErrorKind::kEmptySample, "support_mode needs samples");
  // pattern -> (count, first position)
  std::map<Support, std::pair<Index, Index>> counts;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    auto [it, inserted] =
        counts.try_emplace(samples[i].delta, std::pair<Index, Index>{0, static_cast<Index>(i)});
    ++it->second.first;
  }
  const Support* best = nullptr;
  std::pair<Index, Index> best_key{-1, 0};
  for (const auto& [pattern, stat] : counts) {
    if (stat.first > best_key.first ||
        (stat.first == best_key.first && stat.second < best_key.second)) {
      best = &pattern;
      best_key = stat;
    }
  }
  return *best;
}

std::pair<Vector, Vector> point_estimate(std::span<const ChainState> samples,
                                         const Support& delta_bar, Index px) {
  if (samples.empty()) throw Error(ErrorKind::kEmptySample, "point_estimate needs samples");
  const PerSampleEstimates est = per_sample_estimates(samples, px);
  if (est.vx.empty()) {
    throw Error(ErrorKind::kDegenerateEstimate, "every sample has an empty x or y block");
  }
  const Index p = static_cast<Index>(delta_bar.size());
  Vector mask(p);
  for (Index j = 0; j < p; ++j) mask[j] = delta_bar[static_cast<std::size_t>(j)] ? 1.0 : 0.0;

  Vector sum = Vector::Zero(p);
  Vector reference;
  for (std::size_t i = 0; i < est.vx.size(); ++i) {
    Vector v(p);
    v << est.vx[i], est.vy[i];
    v = v.cwiseProduct(mask);
    if (reference.size() == 0) {
      reference = v;
    } else if (v.dot(reference) < 0.0) {
      v = -v;
    }
    sum += v;
  }
  const Index py = p - px;
  const double nx = sum.head(px).norm();
  const double ny = sum.tail(py).norm();
  if (nx == 0.0 || ny == 0.0) {
    throw Error(ErrorKind::kDegenerateEstimate, "averaged estimate has an empty block");
  }
  return {sum.head(px) / nx, sum.tail(py) / ny};
}

double mse(const VectorRef& v, const VectorRef& v_star) {
  if (v.size() != v_star.size()) {
    throw Error(ErrorKind::kDimensionMismatch, "mse: vectors differ in length");
  }
  return std::min((v - v_star).squaredNorm(), (v + v_star).squaredNorm());
}

Rates tpr_tnr(const VectorRef& v, const VectorRef& v_star) {
  if (v.size() != v_star.size()) {
    throw Error(ErrorKind::kDimensionMismatch, "tpr_tnr: vectors differ in length");
  }
  Index pos = 0, neg = 0, tp = 0, tn = 0;
  for (Index j = 0; j < v.size(); ++j) {
    if (v_star[j] != 0.0) {
      ++pos;
      if (v[j] != 0.0) ++tp;
    } else {
      ++neg;
      if (v[j] == 0.0) ++tn;
    }
  }
  if (pos == 0 || neg == 0) {
    throw Error(ErrorKind::kUndefinedRate, "truth needs both zero and nonzero entries");
  }
  return {static_cast<double>(tp) / static_cast<double>(pos),
          static_cast<double>(tn) / static_cast<double>(neg)};
}

Vector inclusion_probabilities(std::span<const ChainState> samples) {
  if (samples.empty()) throw Error(ErrorKind::kEmptySample, "inclusion probabilities need samples");
  const Index p = samples.front().p();
  Vector acc = Vector::Zero(p);
  for (const auto& s : samples) {
    for (Index j = 0; j < p; ++j) acc[j] += s.delta[static_cast<std::size_t>(j)];
  }
  return acc / static_cast<double>(samples.size());
}

EstimateReport build_report(std::span<const ChainState> samples, Index px,
                            const std::optional<Truth>& truth) {
  EstimateReport report;
  report.samples = static_cast<Index>(samples.size());
  report.delta_bar = support_mode(samples);
  report.inclusion_probs = inclusion_probabilities(samples);
  std::tie(report.vx_bar, report.vy_bar) = point_estimate(samples, report.delta_bar, px);
  const PerSampleEstimates est = per_sample_estimates(samples, px);
  report.skipped = est.skipped;
  if (truth) {
    const Vector vx_star = truth->vx.normalized();
    const Vector vy_star = truth->vy.normalized();
    double mx = 0, my = 0, tpx = 0, tpy = 0, tnx = 0, tny = 0;
    for (std::size_t i = 0; i < est.vx.size(); ++i) {
      mx += mse(est.vx[i], vx_star);
      my += mse(est.vy[i], vy_star);
      const Rates rx = tpr_tnr(est.vx[i], vx_star);
      const Rates ry = tpr_tnr(est.vy[i], vy_star);
      tpx += rx.tpr;
      tnx += rx.tnr;
      tpy += ry.tpr;
      tny += ry.tnr;
    }
    const auto count = static_cast<double>(est.vx.size());
    report.mse_x = mx / count;
    report.mse_y = my / count;
    report.tpr_x = tpx / count;
    report.tpr_y = tpy / count;
    report.tnr_x = tnx / count;
    report.tnr_y = tny / count;
    report.point_mse_x = mse(report.vx_bar, vx_star);
    report.point_mse_y = mse(report.vy_bar, vy_star);
    const Rates px_rates = tpr_tnr(report.vx_bar, vx_star);
    const Rates py_rates = tpr_tnr(report.vy_bar, vy_star);
    report.point_tpr_x = px_rates.tpr;
    report.point_tnr_x = px_rates.tnr;
    report.point_tpr_y = py_rates.tpr;
    report.point_tnr_y = py_rates.tnr;
  }
  return report;
}

EstimateReport build_report(const ChainTrace& trace, Index px, const std::optional<Truth>& truth) {
  const Index n = trace.iterations();
  const std::vector<Index> idx = extract_posterior_samples(trace, n);
  const std::vector<ChainState> samples = gather_states(trace, idx);
  return build_report(samples, px, truth);
}

}  // namespace bscca
