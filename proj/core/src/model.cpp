#include "bscca/model.hpp"

#include <cmath>
#include <cstring>
#include <limits>
#include <string>

#include "bscca/error.hpp"

namespace bscca {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_level(int level, const TemperingLadder& ladder) {
  if (level < 0 || level >= ladder.size()) {
    throw Error(ErrorKind::kInvalidIndex, "temperature level " + std::to_string(level + 1) +
                                              " outside 1.." + std::to_string(ladder.size()));
  }
}

double quasi_scale(const GepPair& gep, const PriorConfig& prior) {
  return 2.0 * gep.sample_size / (prior.sigma * prior.sigma);
}

}  // namespace

// ---------------------------------------------------------------------------
// PriorConfig / TemperingLadder

double PriorConfig::a() const { return std::log(q / (1.0 - q)); }

void PriorConfig::validate() const {
  if (!(rho1 > 0.0) || !(rho0 > rho1)) {
    throw Error(ErrorKind::kInvalidConfig, "prior requires rho0 > rho1 > 0");
  }
  if (!(q > 0.0 && q < 1.0)) {
    throw Error(ErrorKind::kInvalidConfig, "prior requires 0 < q < 1");
  }
  if (!(sigma > 0.0)) {
    throw Error(ErrorKind::kInvalidConfig, "prior requires sigma > 0");
  }
}

PriorConfig PriorConfig::defaults_for(Index p) {
  PriorConfig prior;
  prior.q = std::pow(static_cast<double>(p), -1.5);
  return prior;
}

void TemperingLadder::validate() const {
  const std::size_t k = temperatures.size();
  if (k == 0) throw Error(ErrorKind::kInvalidConfig, "ladder needs at least one temperature");
  if (log_weights.size() != k || step_sizes.size() != k) {
    throw Error(ErrorKind::kInvalidConfig, "ladder vectors must have equal length");
  }
  if (temperatures.front() != 1.0) {
    throw Error(ErrorKind::kInvalidConfig, "first temperature must be exactly 1");
  }
  for (std::size_t i = 1; i < k; ++i) {
    if (!(temperatures[i] > temperatures[i - 1])) {
      throw Error(ErrorKind::kInvalidConfig, "temperatures must be strictly increasing");
    }
  }
  for (double eta : step_sizes) {
    if (!(eta > 0.0) || !std::isfinite(eta)) {
      throw Error(ErrorKind::kInvalidConfig, "step sizes must be positive");
    }
  }
  for (double lc : log_weights) {
    if (!std::isfinite(lc)) throw Error(ErrorKind::kInvalidConfig, "log weights must be finite");
  }
}

TemperingLadder TemperingLadder::make(std::vector<double> temperatures,
                                      std::vector<double> step_sizes) {
  TemperingLadder ladder;
  ladder.log_weights.assign(temperatures.size(), 0.0);
  ladder.temperatures = std::move(temperatures);
  ladder.step_sizes = std::move(step_sizes);
  ladder.validate();
  return ladder;
}

TemperingLadder TemperingLadder::with_scaled_steps(std::vector<double> temperatures, Index p,
                                                   double scale) {
  std::vector<double> steps;
  steps.reserve(temperatures.size());
  for (double t : temperatures) steps.push_back(scale * t / static_cast<double>(p));
  return make(std::move(temperatures), std::move(steps));
}

std::vector<double> TemperingLadder::default_temperatures() {
  return {1.0, 1.0 / 0.9, 1.0 / 0.8, 1.0 / 0.7, 1.0 / 0.6};
}

// ---------------------------------------------------------------------------
// ChainState

Index ChainState::active_count() const {
  Index m = 0;
  for (auto d : delta) m += d;
  return m;
}

Vector ChainState::masked() const {
  Vector v = theta;
  for (Index j = 0; j < v.size(); ++j) {
    if (!delta[static_cast<std::size_t>(j)]) v[j] = 0.0;
  }
  return v;
}

std::vector<Index> ChainState::selected() const {
  std::vector<Index> out;
  for (std::size_t j = 0; j < delta.size(); ++j) {
    if (delta[j]) out.push_back(static_cast<Index>(j));
  }
  return out;
}

bool ChainState::identical(const ChainState& other) const {
  return level == other.level && delta == other.delta && theta.size() == other.theta.size() &&
         std::memcmp(theta.data(), other.theta.data(),
                     static_cast<std::size_t>(theta.size()) * sizeof(double)) == 0;
}

// ---------------------------------------------------------------------------
// QuadraticCache

QuadraticCache::QuadraticCache(const GepPair& gep, const ChainState& state) {
  rebuild(gep, state);
}

void QuadraticCache::rebuild(const GepPair& gep, const ChainState& state) {
  const Index p = gep.p();
  a_dot_ = Vector::Zero(p);
  b_dot_ = Vector::Zero(p);
  active_ = 0;
  for (Index j = 0; j < p; ++j) {
    if (!state.delta[static_cast<std::size_t>(j)]) continue;
    ++active_;
    const double v = state.theta[j];
    a_dot_.noalias() += v * gep.a.col(j);
    b_dot_.noalias() += v * gep.b.col(j);
  }
  qa_ = 0.0;
  qb_ = 0.0;
  for (Index j = 0; j < p; ++j) {
    if (!state.delta[static_cast<std::size_t>(j)]) continue;
    qa_ += state.theta[j] * a_dot_[j];
    qb_ += state.theta[j] * b_dot_[j];
  }
  flips_ = 0;
}

std::pair<double, double> QuadraticCache::toggled(const GepPair& gep, Index j, double theta_j,
                                                  bool add) const {
  const double s = add ? 1.0 : -1.0;
  const double t2 = theta_j * theta_j;
  return {qa_ + 2.0 * s * theta_j * a_dot_[j] + t2 * gep.a(j, j),
          qb_ + 2.0 * s * theta_j * b_dot_[j] + t2 * gep.b(j, j)};
}

void QuadraticCache::commit(const GepPair& gep, Index j, double theta_j, bool add,
                            const ChainState& after) {
  if (++flips_ >= kRefreshInterval) {
    rebuild(gep, after);
    return;
  }
  const auto [qa, qb] = toggled(gep, j, theta_j, add);
  qa_ = qa;
  qb_ = qb;
  const double s = add ? theta_j : -theta_j;
  a_dot_.noalias() += s * gep.a.col(j);
  b_dot_.noalias() += s * gep.b.col(j);
  active_ += add ? 1 : -1;
  if (active_ == 0) {
    // Exact zeros for the empty model.
    qa_ = 0.0;
    qb_ = 0.0;
    a_dot_.setZero();
    b_dot_.setZero();
  }
}

// ---------------------------------------------------------------------------
// Densities

double rayleigh(const VectorRef& theta, const GepPair& gep) {
  if (theta.size() != gep.p()) {
    throw Error(ErrorKind::kDimensionMismatch, "rayleigh: theta length differs from p");
  }
  const double qb = theta.dot(gep.b * theta);
  if (!(qb > 0.0)) {
    throw Error(ErrorKind::kUndefinedQuotient, "theta^T B theta is not positive");
  }
  return theta.dot(gep.a * theta) / qb;
}

double rayleigh_selected(const ChainState& state, const GepPair& gep) {
  if (state.active_count() == 0) return kNegInf;
  return rayleigh(state.masked(), gep);
}

double rayleigh_from_forms(double qa, double qb, Index active) {
  if (active == 0) return kNegInf;
  if (!(qb > 0.0)) {
    throw Error(ErrorKind::kUndefinedQuotient, "theta^T B theta is not positive");
  }
  return qa / qb;
}

namespace {

double assemble_log_posterior(const ChainState& state, double r, const GepPair& gep,
                              const PriorConfig& prior) {
  if (r == kNegInf) return kNegInf;
  double slab = 0.0;
  double spike = 0.0;
  Index m = 0;
  for (Index j = 0; j < state.p(); ++j) {
    const double t2 = state.theta[j] * state.theta[j];
    if (state.delta[static_cast<std::size_t>(j)]) {
      slab += t2;
      ++m;
    } else {
      spike += t2;
    }
  }
  return prior.a() * static_cast<double>(m) - 0.5 * prior.rho1 * slab -
         0.5 * prior.rho0 * spike + quasi_scale(gep, prior) * r;
}

}  // namespace

double log_quasi_posterior(const ChainState& state, const GepPair& gep, const PriorConfig& prior) {
  return assemble_log_posterior(state, rayleigh_selected(state, gep), gep, prior);
}

double log_quasi_posterior(const ChainState& state, const QuadraticCache& cache,
                           const GepPair& gep, const PriorConfig& prior) {
  return assemble_log_posterior(
      state, rayleigh_from_forms(cache.qa(), cache.qb(), cache.active_count()), gep, prior);
}

double log_tempered(const ChainState& state, const GepPair& gep, const PriorConfig& prior,
                    const TemperingLadder& ladder) {
  check_level(state.level, ladder);
  const auto k = static_cast<std::size_t>(state.level);
  return -ladder.log_weights[k] + log_quasi_posterior(state, gep, prior) / ladder.temperatures[k];
}

// ---------------------------------------------------------------------------
// Selected block

SelectedBlock::SelectedBlock(const GepPair& gep, const std::vector<Index>& indices,
                             double temperature, const PriorConfig& prior)
    : indices_(indices),
      a_(gep.a(indices, indices)),
      b_(gep.b(indices, indices)),
      slab_scale_(prior.rho1 / temperature),
      quasi_scale_(quasi_scale(gep, prior) / temperature) {}

double SelectedBlock::log_density(const VectorRef& u) const {
  const double qb = u.dot(b_ * u);
  if (!(qb > 0.0)) return kNegInf;
  const double qa = u.dot(a_ * u);
  return -0.5 * slab_scale_ * u.squaredNorm() + quasi_scale_ * qa / qb;
}

bool SelectedBlock::evaluate(const VectorRef& u, double& log_density, Vector& grad) const {
  const Vector au = a_ * u;
  const Vector bu = b_ * u;
  const double qb = u.dot(bu);
  if (!(qb > 0.0)) {
    log_density = kNegInf;
    return false;
  }
  const double r = u.dot(au) / qb;
  log_density = -0.5 * slab_scale_ * u.squaredNorm() + quasi_scale_ * r;
  // grad R(u) = 2 (A u - R B u) / (u^T B u)
  grad = -slab_scale_ * u + (2.0 * quasi_scale_ / qb) * (au - r * bu);
  return true;
}

namespace {

SelectedBlock block_for(int level, const Support& delta, const GepPair& gep,
                        const PriorConfig& prior, const TemperingLadder& ladder) {
  check_level(level, ladder);
  std::vector<Index> idx;
  for (std::size_t j = 0; j < delta.size(); ++j) {
    if (delta[j]) idx.push_back(static_cast<Index>(j));
  }
  return SelectedBlock(gep, idx, ladder.temperatures[static_cast<std::size_t>(level)], prior);
}

}  // namespace

double log_selected_density(const VectorRef& u, int level, const Support& delta,
                            const GepPair& gep, const PriorConfig& prior,
                            const TemperingLadder& ladder) {
  const SelectedBlock block = block_for(level, delta, gep, prior, ladder);
  if (u.size() != block.size()) {
    throw Error(ErrorKind::kDimensionMismatch, "u length must equal |delta|");
  }
  return block.log_density(u);
}

Vector grad_selected(const VectorRef& u, int level, const Support& delta, const GepPair& gep,
                     const PriorConfig& prior, const TemperingLadder& ladder) {
  const SelectedBlock block = block_for(level, delta, gep, prior, ladder);
  if (u.size() != block.size()) {
    throw Error(ErrorKind::kDimensionMismatch, "u length must equal |delta|");
  }
  double value = 0.0;
  Vector grad;
  if (!block.evaluate(u, value, grad)) {
    throw Error(ErrorKind::kUndefinedQuotient, "(u,0)^T B (u,0) is not positive");
  }
  return grad;
}

}  // namespace bscca
