#include "treeval/bermudan.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "treeval/error.hpp"
#include "treeval/normal.hpp"
#include "treeval/numeric.hpp"
#include "treeval/parallel.hpp"

namespace treeval {

void ExerciseSpec::validate() const {
  require(static_cast<bool>(payoff), ErrorKind::Precondition,
          "exercise spec: payoff function missing");
  require(model.drift && model.diffusion && model.state_dim() >= 1 && model.periods >= 1,
          ErrorKind::Precondition, "exercise spec: incomplete local-vol model");
}

ExerciseSpec ExerciseSpec::bermudan_put(double strike, double sigma, double rate,
                                        std::size_t periods, double maturity, double z0) {
  require(sigma > 0.0 && maturity > 0.0 && periods >= 1, ErrorKind::Precondition,
          "bermudan_put: need sigma > 0, maturity > 0, periods >= 1");
  ExerciseSpec s;
  s.model = LocalVolModel::log_black_scholes(z0, sigma, rate, periods, maturity);
  const double dt = maturity / static_cast<double>(periods);
  s.payoff = [=](std::size_t t, std::span<const double> z) {
    const double df = std::exp(-rate * dt * static_cast<double>(t));
    return df * std::max(strike - std::exp(z[0]), 0.0);
  };
  return s;
}

ContinuationEvaluator::ContinuationEvaluator(FlatEnsemble fe, GaussianOptions opts)
    : fe_(std::move(fe)), opts_(opts) {
  require(fe_.periods() == 1, ErrorKind::Dimension,
          "continuation: model must live on one period");
  if (fe_.components() != 1) return;
  std::map<double, double> jumps;
  CompensatedSum base;
  for (std::size_t i = 0; i < fe_.size(); ++i) {
    const double a = fe_.lower(i)[0];
    const double b = fe_.upper(i)[0];
    const double v = fe_.value(i);
    if (a == -kInf)
      base.add(v);
    else
      jumps[a] += v;
    if (b != kInf) jumps[b] -= v;
  }
  base_ = base.value();
  CompensatedSum run;
  for (const auto& [c, j] : jumps) {
    if (j == 0.0) continue;
    breaks_.push_back(c);
    jumps_.push_back(j);
    run.add(j);
    jump_prefix_.push_back(run.value());
  }
}

double ContinuationEvaluator::scalar(double mean, double sd) const {
  require(fe_.components() == 1, ErrorKind::Dimension,
          "continuation: scalar form needs m = 1");
  if (sd == 0.0) {
    const double x[1] = {mean};
    return fe_.evaluate(x);
  }
  constexpr double kCut = 9.0;
  const auto first = std::lower_bound(breaks_.begin(), breaks_.end(), mean - kCut * sd);
  const auto last = std::upper_bound(breaks_.begin(), breaks_.end(), mean + kCut * sd);
  const std::size_t lo = static_cast<std::size_t>(first - breaks_.begin());
  const std::size_t hi = static_cast<std::size_t>(last - breaks_.begin());
  CompensatedSum acc;
  acc.add(base_);
  if (lo > 0) acc.add(jump_prefix_[lo - 1]);
  for (std::size_t k = lo; k < hi; ++k)
    acc.add(jumps_[k] * normal_cdf((mean - breaks_[k]) / sd));
  return acc.value();
}

double ContinuationEvaluator::direct(std::span<const double> mean,
                                     std::span<const double> cov) const {
  const std::size_t m = fe_.components();
  require(mean.size() == m && cov.size() == m * m, ErrorKind::Dimension,
          "continuation: mean/covariance size mismatch");
  GaussianKernelSpec k{{mean.begin(), mean.end()}, {cov.begin(), cov.end()}};
  CompensatedSum acc;
  for (std::size_t i = 0; i < fe_.size(); ++i) {
    const GaussianProb p = rect_prob_gaussian(k, fe_.lower(i), fe_.upper(i), opts_);
    if (!p.converged)
      throw Error(ErrorKind::Numeric, "continuation: rectangle probability did not converge");
    acc.add(fe_.value(i) * p.value);
  }
  return acc.value();
}

double ContinuationEvaluator::operator()(std::span<const double> mean,
                                         std::span<const double> cov) const {
  if (fe_.components() == 1) {
    require(mean.size() == 1 && cov.size() == 1, ErrorKind::Dimension,
            "continuation: mean/covariance size mismatch");
    require(cov[0] >= 0.0, ErrorKind::Numeric, "continuation: negative variance");
    return scalar(mean[0], std::sqrt(cov[0]));
  }
  return direct(mean, cov);
}

namespace {

// Mean alpha_t(z) and covariance beta_t(z) beta_t(z)^T of Z_{t+1} given Z_t = z.
void transition(const LocalVolModel& m, std::size_t t, std::span<const double> z,
                std::vector<double>& mean, std::vector<double>& cov,
                std::vector<double>& vol) {
  const std::size_t sm = m.state_dim();
  const std::size_t d = m.noise_dim;
  mean.resize(sm);
  vol.resize(sm * d);
  cov.assign(sm * sm, 0.0);
  m.drift(t, z, mean);
  m.diffusion(t, z, vol);
  for (std::size_t a = 0; a < sm; ++a)
    for (std::size_t b = 0; b < sm; ++b) {
      double v = 0.0;
      for (std::size_t j = 0; j < d; ++j) v += vol[a * d + j] * vol[b * d + j];
      cov[a * sm + b] = v;
    }
}

std::uint64_t step_seed(std::uint64_t seed, std::size_t t) {
  return seed ^ (0x9e3779b97f4a7c15ull * (static_cast<std::uint64_t>(t) + 1));
}

void check_paths(const ExerciseSpec& spec, const Tensor3& paths) {
  spec.validate();
  require(paths.n >= 1 && paths.rows == spec.periods() + 1 &&
              paths.cols == spec.model.state_dim(),
          ErrorKind::Dimension, "bermudan: paths must be n x (T+1) x m");
}

// Cross-section Z_t as an n x m matrix.
std::vector<double> cross_section(const Tensor3& paths, std::size_t t) {
  std::vector<double> out(paths.n * paths.cols);
  for (std::size_t i = 0; i < paths.n; ++i)
    for (std::size_t k = 0; k < paths.cols; ++k) out[i * paths.cols + k] = paths.at(i, t, k);
  return out;
}

std::span<const double> state(const Tensor3& paths, std::size_t i, std::size_t t) {
  return paths.path(i).subspan(t * paths.cols, paths.cols);
}

}  // namespace

EnsembleConfig with_seed(EnsembleConfig cfg, std::uint64_t seed) {
  std::visit([seed](auto& c) { c.seed = seed; }, cfg);
  return cfg;
}

double BermudanValue::continuation(std::size_t t, std::span<const double> z) const {
  require(t < spec.periods(), ErrorKind::Precondition,
          "bermudan: no continuation value at maturity");
  if (method == BermudanMethod::RegressNow) return fitted[t].evaluate(z);
  std::vector<double> mean, cov, vol;
  transition(spec.model, t, z, mean, cov, vol);
  return evaluators[t](mean, cov);
}

double BermudanValue::value(std::size_t t, std::span<const double> z) const {
  const double g = spec.payoff(t, z);
  if (t == spec.periods()) return g;
  return std::max(g, continuation(t, z));
}

bool BermudanValue::exercise(std::size_t t, std::span<const double> z) const {
  if (t == spec.periods()) return true;
  const double g = spec.payoff(t, z);
  return continuation(t, z) <= g + 1e-12 * (1.0 + std::fabs(g));
}

std::vector<double> value_column(const BermudanValue& bv, const Tensor3& paths,
                                 std::size_t t) {
  std::vector<double> out(paths.n);
  parallel_for(paths.n, 256, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) out[i] = bv.value(t, state(paths, i, t));
  });
  return out;
}

namespace {

BermudanValue induct(const ExerciseSpec& spec, const Tensor3& paths,
                     const EnsembleConfig& cfg, BermudanMethod method) {
  check_paths(spec, paths);
  const std::size_t T = spec.periods();
  const std::size_t m = spec.model.state_dim();
  const std::uint64_t seed = std::visit([](const auto& c) { return c.seed; }, cfg);
  BermudanValue bv;
  bv.method = method;
  bv.spec = spec;
  bv.fitted.resize(T);
  if (method == BermudanMethod::RegressLater) bv.evaluators.resize(T);

  // labels = V_{X,t+1} on the training cross-section Z_{t+1}
  std::vector<double> labels(paths.n);
  for (std::size_t i = 0; i < paths.n; ++i) labels[i] = spec.payoff(T, state(paths, i, T));

  for (std::size_t step = T; step-- > 0;) {
    const std::size_t fit_date = method == BermudanMethod::RegressLater ? step + 1 : step;
    const std::vector<double> x = cross_section(paths, fit_date);
    const Model model = fit_model(FeatureView{x.data(), paths.n, m}, labels,
                                  with_seed(cfg, step_seed(seed, step)));
    bv.fitted[step] = flatten(model, m, 1);
    if (method == BermudanMethod::RegressLater)
      bv.evaluators[step] = ContinuationEvaluator(bv.fitted[step]);
    if (step > 0) labels = value_column(bv, paths, step);
  }
  bv.price = bv.value(0, spec.model.z0);
  return bv;
}

}  // namespace

BermudanValue price_regress_later(const ExerciseSpec& spec, const Tensor3& paths,
                                  const EnsembleConfig& cfg) {
  return induct(spec, paths, cfg, BermudanMethod::RegressLater);
}

BermudanValue price_regress_now(const ExerciseSpec& spec, const Tensor3& paths,
                                const EnsembleConfig& cfg) {
  return induct(spec, paths, cfg, BermudanMethod::RegressNow);
}

std::vector<double> continuation_table(const BermudanValue& bv, const Tensor3& paths) {
  check_paths(bv.spec, paths);
  const std::size_t T = bv.spec.periods();
  std::vector<double> out(paths.n * T);
  parallel_for(paths.n, 64, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i)
      for (std::size_t t = 0; t < T; ++t)
        out[i * T + t] = bv.continuation(t, state(paths, i, t));
  });
  return out;
}

std::vector<double> stopping_distribution(const BermudanValue& bv, const Tensor3& paths,
                                          std::span<const double> table) {
  check_paths(bv.spec, paths);
  const std::size_t T = bv.spec.periods();
  require(table.size() == paths.n * T, ErrorKind::Dimension,
          "stopping_distribution: table must be n x T");
  std::vector<double> counts(T + 1, 0.0);
  for (std::size_t i = 0; i < paths.n; ++i) {
    std::size_t tau = T;
    for (std::size_t t = 0; t < T; ++t) {
      const double g = bv.spec.payoff(t, state(paths, i, t));
      if (table[i * T + t] <= g + 1e-12 * (1.0 + std::fabs(g))) {
        tau = t;
        break;
      }
    }
    counts[tau] += 1.0;
  }
  for (double& c : counts) c /= static_cast<double>(paths.n);
  return counts;
}

std::vector<double> stopping_distribution(const BermudanValue& bv, const Tensor3& paths) {
  return stopping_distribution(bv, paths, continuation_table(bv, paths));
}

double black_put_price(double z, double strike, double rate, double sigma, double tau) {
  require(sigma > 0.0 && tau > 0.0, ErrorKind::Precondition,
          "black_put_price: need sigma > 0 and tau > 0");
  const double sq = sigma * std::sqrt(tau);
  const double d1 = (z - std::log(strike) + (rate + 0.5 * sigma * sigma) * tau) / sq;
  const double d2 = d1 - sq;
  return -std::exp(z) * normal_cdf(-d1) + strike * std::exp(-rate * tau) * normal_cdf(-d2);
}

}  // namespace treeval
