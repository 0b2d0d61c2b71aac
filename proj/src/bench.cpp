#include "treeval/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

#include "treeval/config.hpp"
#include "treeval/error.hpp"
#include "treeval/io.hpp"
#include "treeval/numeric.hpp"
#include "treeval/parallel.hpp"

namespace treeval {

std::string_view to_string(Scale s) { return s == Scale::Desk ? "desk" : "paper"; }

std::string_view to_string(EstimatorKind k) {
  return k == EstimatorKind::Boost ? "boost" : "forest";
}

std::string_view to_string(PayoffKind k) {
  switch (k) {
    case PayoffKind::MinPut: return "min-put";
    case PayoffKind::MaxCall: return "max-call";
    case PayoffKind::BRC: return "brc";
    case PayoffKind::BermudanPut: return "bermudan-put";
    case PayoffKind::Custom: return "custom";
  }
  return "?";
}

std::string_view to_string(Sampling s) {
  switch (s) {
    case Sampling::Bootstrap: return "bootstrap";
    case Sampling::SubsampleWith: return "subsample-with";
    case Sampling::SubsampleWithout: return "subsample-without";
  }
  return "?";
}

Problem Problem::preset(const std::string& name) {
  Problem p;
  p.name = name;
  if (name == "min-put" || name == "max-call") {
    p.model = BlackScholesModel::independent(6, 0.2, {1.0 / 12.0, 11.0 / 12.0});
    p.payoff.kind = name == "min-put" ? PayoffKind::MinPut : PayoffKind::MaxCall;
  } else if (name == "brc") {
    p.model = BlackScholesModel::independent(3, 0.2, std::vector<double>(12, 1.0 / 12.0));
    p.payoff.kind = PayoffKind::BRC;
  } else {
    throw Error(ErrorKind::Config, "unknown problem preset '" + name +
                                       "' (expected min-put, max-call or brc)");
  }
  return p;
}

namespace {

std::size_t ceil_third(std::size_t dim) { return (dim + 2) / 3; }

std::vector<std::size_t> feature_values(std::size_t dim) {
  std::vector<std::size_t> f{ceil_third(dim), dim};
  f.erase(std::unique(f.begin(), f.end()), f.end());
  return f;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

ForestGrid ForestGrid::paper(std::size_t dim) {
  ForestGrid g;
  g.trees = {100, 250, 500};
  g.nodesize = {2, 3, 5};
  g.features = feature_values(dim);
  return g;
}

ForestGrid ForestGrid::desk(std::size_t dim) {
  ForestGrid g = paper(dim);
  g.trees = {100};
  return g;
}

BoostGrid BoostGrid::paper() { return BoostGrid{}; }

BoostGrid BoostGrid::desk() { return BoostGrid{}; }

std::vector<EnsembleConfig> expand(const ForestGrid& g, std::uint64_t seed) {
  std::vector<EnsembleConfig> out;
  const std::vector<std::size_t> feats =
      g.features.empty() ? std::vector<std::size_t>{0} : g.features;
  for (std::size_t m : g.trees)
    for (std::size_t ns : g.nodesize)
      for (std::size_t p : feats) {
        ForestConfig c;
        c.trees = m;
        c.nodesize = ns;
        if (p > 0) c.features = p;
        c.sampling = g.sampling;
        c.subsample = g.subsample;
        c.max_depth = g.max_depth;
        c.seed = seed;
        out.emplace_back(c);
      }
  return out;
}

std::vector<EnsembleConfig> expand(const BoostGrid& g, std::uint64_t seed) {
  std::vector<EnsembleConfig> out;
  for (double lr : g.learning_rate)
    for (std::size_t ns : g.nodesize)
      for (std::size_t depth : g.max_depth) {
        BoostConfig c;
        c.rounds = g.rounds;
        c.learning_rate = lr;
        c.nodesize = ns;
        c.max_depth = depth;
        c.seed = seed;
        out.emplace_back(c);
      }
  return out;
}

std::string describe(const EnsembleConfig& cfg) {
  std::ostringstream os;
  if (const auto* f = std::get_if<ForestConfig>(&cfg)) {
    os << "forest M=" << f->trees << " nodesize=" << f->nodesize << " p=";
    if (f->features)
      os << *f->features;
    else
      os << "all";
    os << " sampling=" << to_string(f->sampling);
    if (f->subsample) os << " n~=" << *f->subsample;
    if (f->max_depth) os << " max_depth=" << *f->max_depth;
  } else {
    const auto& b = std::get<BoostConfig>(cfg);
    os << "boost rounds=" << b.rounds << " lr=" << format_double(b.learning_rate)
       << " nodesize=" << b.nodesize << " max_depth=";
    if (b.max_depth)
      os << *b.max_depth;
    else
      os << "none";
    if (b.early_stopping) os << " patience=" << b.early_stopping->patience;
  }
  return os.str();
}

ExperimentPlan ExperimentPlan::make(const std::string& problem, EstimatorKind est,
                                    Scale scale, std::uint64_t seed) {
  ExperimentPlan p;
  p.problem = Problem::preset(problem);
  p.estimator = est;
  p.seed = seed;
  const std::size_t dim = p.problem.components() * p.problem.periods();
  if (scale == Scale::Desk) {
    p.n_train = 5000;
    p.n_valid = 2000;
    p.n_test = 20000;
    p.n_inner = 200;
    p.forest_grid = ForestGrid::desk(dim);
    p.boost_grid = BoostGrid::desk();
  } else {
    p.n_train = 20000;
    p.n_valid = 8000;
    p.n_test = 100000;
    p.n_inner = 1000;
    p.forest_grid = ForestGrid::paper(dim);
    p.boost_grid = BoostGrid::paper();
  }
  return p;
}

const MeasureSpec& ExperimentPlan::driver_measure() const {
  if (measure.periods() > 0) return measure;
  if (default_measure_.components() != problem.components() ||
      default_measure_.periods() != problem.periods())
    default_measure_ = MeasureSpec::standard_normal(problem.components(), problem.periods());
  return default_measure_;
}

std::vector<std::size_t> ExperimentPlan::resolved_dates() const {
  if (!dates.empty()) return dates;
  std::vector<std::size_t> d{0, 1, problem.periods()};
  d.erase(std::unique(d.begin(), d.end()), d.end());
  return d;
}

std::vector<EnsembleConfig> ExperimentPlan::grid() const {
  return estimator == EstimatorKind::Boost ? expand(boost_grid, seed)
                                           : expand(forest_grid, seed);
}

void ExperimentPlan::validate() const {
  problem.model.validate();
  problem.payoff.validate();
  require(n_train >= 1 && n_valid >= 1 && n_test >= 1 && n_inner >= 1, ErrorKind::Config,
          "plan: all sample sizes must be >= 1");
  const MeasureSpec& m = driver_measure();
  require(m.components() == problem.components() && m.periods() == problem.periods(),
          ErrorKind::Config, "plan: measure shape differs from the problem (d, T)");
  for (std::size_t t : resolved_dates())
    require(t <= problem.periods(), ErrorKind::Config, "plan: date beyond maturity");
  require(var_alpha > 0 && var_alpha < 1 && es_alpha > 0 && es_alpha < 1, ErrorKind::Config,
          "plan: risk levels must lie in (0,1)");
  require(!grid().empty(), ErrorKind::Config, "plan: empty hyperparameter grid");
}

Estimate oracle_v0(std::span<const double> y) {
  require(!y.empty(), ErrorKind::Precondition, "oracle_v0: empty sample");
  CompensatedSum s;
  for (double v : y) s.add(v);
  const double n = static_cast<double>(y.size());
  const double mean = s.value() / n;
  CompensatedSum q;
  for (double v : y) q.add((v - mean) * (v - mean));
  const double var = y.size() > 1 ? q.value() / (n - 1.0) : 0.0;
  return {mean, std::sqrt(var / n)};
}

std::vector<double> payoffs(const Problem& problem, const DriverSample& x) {
  return payoff_value(problem.payoff, problem.model, simulate_bs(problem.model, x));
}

Estimate oracle_v0(const Problem& problem, const DriverSample& test) {
  return oracle_v0(payoffs(problem, test));
}

InnerEstimate oracle_vt(const Problem& problem, const MeasureSpec& measure,
                        const DriverSample& test, std::size_t t, std::size_t n_inner,
                        std::uint64_t seed) {
  const std::size_t T = problem.periods();
  const std::size_t d = problem.components();
  require(t <= T, ErrorKind::Precondition, "oracle_vt: t beyond maturity");
  require(n_inner >= 1, ErrorKind::Precondition, "oracle_vt: n_inner must be >= 1");
  require(test.components() == d && test.periods() == T, ErrorKind::Dimension,
          "oracle_vt: sample shape differs from the problem");
  InnerEstimate out;
  out.mean.assign(test.n(), 0.0);
  out.stderr_.assign(test.n(), 0.0);
  if (t == T) {
    out.mean = payoffs(problem, test);
    return out;
  }
  problem.payoff.validate();
  parallel_for(test.n(), 16, [&](std::size_t begin, std::size_t end) {
    std::vector<double> driver(T * d), prices((T + 1) * d);
    for (std::size_t i = begin; i < end; ++i) {
      auto src = test.path(i);
      std::copy(src.begin(), src.end(), driver.begin());
      std::copy(problem.model.initial_prices.begin(), problem.model.initial_prices.end(),
                prices.begin());
      advance_bs(problem.model, driver, prices, 1);
      CounterRng rng(seed, Stream::Inner, static_cast<std::uint32_t>(i),
                     static_cast<std::uint64_t>(t) << 40);
      double mean = 0.0, m2 = 0.0;
      for (std::size_t k = 0; k < n_inner; ++k) {
        for (std::size_t s = t; s < T; ++s)
          measure.sample_period(s, rng, std::span<double>(driver).subspan(s * d, d));
        advance_bs(problem.model, driver, prices, t + 1);
        const double y = payoff_path(problem.payoff, problem.model, prices);
        const double delta = y - mean;
        mean += delta / static_cast<double>(k + 1);
        m2 += delta * (y - mean);
      }
      out.mean[i] = mean;
      const double var = n_inner > 1 ? m2 / static_cast<double>(n_inner - 1) : 0.0;
      out.stderr_[i] = std::sqrt(var / static_cast<double>(n_inner));
    }
  });
  return out;
}

InnerEstimate oracle_v1(const Problem& problem, const MeasureSpec& measure,
                        const DriverSample& test, std::size_t n_inner, std::uint64_t seed) {
  return oracle_vt(problem, measure, test, 1, n_inner, seed);
}

Datasets make_datasets(const ExperimentPlan& plan) {
  plan.validate();
  const MeasureSpec& m = plan.driver_measure();
  Datasets ds;
  ds.train = m.sample(plan.n_train, plan.seed, Stream::Train);
  ds.valid = m.sample(plan.n_valid, plan.seed, Stream::Valid);
  ds.test = m.sample(plan.n_test, plan.seed, Stream::Test);
  ds.y_train = payoffs(plan.problem, ds.train);
  ds.y_valid = payoffs(plan.problem, ds.valid);
  ds.y_test = payoffs(plan.problem, ds.test);
  return ds;
}

GridResult run_validation_grid(const std::vector<EnsembleConfig>& grid, FeatureView train_x,
                               std::span<const double> train_y, FeatureView valid_x,
                               std::span<const double> valid_y, double v0) {
  require(!grid.empty(), ErrorKind::Precondition, "validation grid is empty");
  GridResult res;
  std::optional<Model> best;
  for (const auto& cfg0 : grid) {
    EnsembleConfig cfg = cfg0;
    if (auto* b = std::get_if<BoostConfig>(&cfg); b && b->early_stopping)
      b->early_stopping = EarlyStopping{valid_x, valid_y, b->early_stopping->patience};
    Model model = fit_model(train_x, train_y, cfg);
    const std::vector<double> pred = model.predict(valid_x);
    GridRow row;
    row.params = describe(cfg);
    row.error_pct = normalized_l2(pred, valid_y, v0);
    row.cells = model.leaf_count() + (model.is_forest() ? 0 : 1);
    const bool better =
        !best || row.error_pct < res.rows[res.best].error_pct ||
        (row.error_pct == res.rows[res.best].error_pct && row.cells < res.rows[res.best].cells);
    res.rows.push_back(row);
    if (better) {
      res.best = res.rows.size() - 1;
      best = std::move(model);
    }
  }
  res.model = std::move(*best);
  return res;
}

namespace {

// Boost configs from the plan get early stopping on the validation set.
std::vector<EnsembleConfig> plan_grid(const ExperimentPlan& plan, std::size_t dim) {
  std::vector<EnsembleConfig> grid = plan.grid();
  std::vector<EnsembleConfig> out;
  std::set<std::string> seen;
  for (auto& cfg : grid) {
    if (auto* b = std::get_if<BoostConfig>(&cfg); b && plan.boost_grid.patience > 0)
      b->early_stopping = EarlyStopping{{}, {}, plan.boost_grid.patience};
    if (auto* f = std::get_if<ForestConfig>(&cfg); f && f->features && *f->features > dim)
      f->features = dim;
    if (seen.insert(describe(cfg)).second) out.push_back(cfg);
  }
  return out;
}

}  // namespace

GridResult run_validation_grid(const ExperimentPlan& plan, const Datasets& data) {
  const std::size_t dim = data.train.dim();
  const double v0 = oracle_v0(data.y_train).value;
  return run_validation_grid(plan_grid(plan, dim),
                             FeatureView{data.train.values.data.data(), data.train.n(), dim},
                             data.y_train,
                             FeatureView{data.valid.values.data.data(), data.valid.n(), dim},
                             data.y_valid, v0);
}

namespace {

double rms(std::span<const double> se) {
  CompensatedSum s;
  for (double v : se) s.add(v * v);
  return std::sqrt(s.value() / static_cast<double>(se.size()));
}

L2Row make_row(std::size_t t, const char* method, std::span<const double> est,
               std::span<const double> truth, double noise_rms, double v0) {
  L2Row r;
  r.t = t;
  r.method = method;
  r.error_pct = normalized_l2(est, truth, v0);
  r.oracle_noise_pct = 100.0 * noise_rms / std::fabs(v0);
  r.debiased_pct = std::sqrt(std::max(0.0, r.error_pct * r.error_pct -
                                                r.oracle_noise_pct * r.oracle_noise_pct));
  return r;
}

// sqrt of a sample mean with its delta-method standard error.
std::pair<double, double> root_mean(std::span<const double> sq) {
  const Estimate e = oracle_v0(sq);
  const double r = std::sqrt(std::max(e.value, 0.0));
  return {r, r > 0.0 ? e.stderr_ / (2.0 * r) : 0.0};
}

}  // namespace

ExperimentReport run_experiment(const ExperimentPlan& plan) {
  using clock = std::chrono::steady_clock;
  plan.validate();
  ExperimentReport rep;
  rep.config_snapshot = render_snapshot(plan);
  rep.config_hash = hex64(fnv1a64(rep.config_snapshot));
  rep.seed = plan.seed;
  const std::size_t T = plan.problem.periods();
  const std::size_t d = plan.problem.components();
  const std::vector<std::size_t> dates = plan.resolved_dates();
  auto has = [&](std::size_t t) {
    return std::find(dates.begin(), dates.end(), t) != dates.end();
  };

  auto t0 = clock::now();
  const Datasets data = make_datasets(plan);
  rep.timings.push_back({"simulate", seconds_since(t0)});

  t0 = clock::now();
  rep.grid = run_validation_grid(plan, data);
  rep.timings.push_back({"fit", seconds_since(t0)});

  t0 = clock::now();
  rep.flat = flatten(rep.grid.model, d, T);
  rep.timings.push_back({"flatten", seconds_since(t0)});

  t0 = clock::now();
  SurfaceMeta meta{rep.grid.rows[rep.grid.best].params, plan.driver_measure().describe(),
                   plan.seed};
  rep.surface = value_surface(rep.flat, plan.driver_measure(), dates, data.test, meta);
  rep.timings.push_back({"value", seconds_since(t0)});

  t0 = clock::now();
  rep.v0 = oracle_v0(data.y_test);
  const double v0 = rep.v0.value;
  require(v0 != 0.0, ErrorKind::Numeric, "experiment: oracle V_0 is zero");
  std::vector<std::vector<double>> truth(dates.size());
  std::vector<double> noise(dates.size(), 0.0);
  for (std::size_t k = 0; k < dates.size(); ++k) {
    const std::size_t t = dates[k];
    if (t == 0) {
      truth[k].assign(data.test.n(), v0);
      noise[k] = rep.v0.stderr_;
    } else if (t == T) {
      truth[k] = data.y_test;
    } else {
      InnerEstimate ie = oracle_vt(plan.problem, plan.driver_measure(), data.test, t,
                                   plan.n_inner, plan.seed);
      noise[k] = rms(ie.stderr_);
      truth[k] = std::move(ie.mean);
      if (t == 1) rep.v1_oracle = truth[k];
    }
  }
  rep.timings.push_back({"oracle", seconds_since(t0)});

  t0 = clock::now();
  for (std::size_t k = 0; k < dates.size(); ++k)
    rep.l2.push_back(make_row(dates[k], "later", rep.surface.column(dates[k]), truth[k],
                              noise[k], v0));

  if (plan.regress_now && has(1) && T > 1) {
    const std::vector<double> xtr = prefix_matrix(data.train, 1);
    const std::vector<double> xva = prefix_matrix(data.valid, 1);
    const std::vector<double> xte = prefix_matrix(data.test, 1);
    rep.grid_now = run_validation_grid(
        plan_grid(plan, d), FeatureView{xtr.data(), data.train.n(), d}, data.y_train,
        FeatureView{xva.data(), data.valid.n(), d}, data.y_valid,
        oracle_v0(data.y_train).value);
    rep.v1_now = rep.grid_now->model.predict(FeatureView{xte.data(), data.test.n(), d});
    const std::size_t k1 = rep.surface.date_index(1);
    rep.l2.push_back(make_row(1, "now", rep.v1_now, truth[k1], noise[k1], v0));
  }
  rep.timings.push_back({"regress_now", seconds_since(t0)});

  t0 = clock::now();
  // Doob: ||max_t |V_t - V_{X,t}|||_2 against 2 ||f - f_X||_2.
  {
    std::vector<double> maxsq(data.test.n(), 0.0), termsq(data.test.n(), 0.0);
    const std::vector<double> fX =
        has(T) ? rep.surface.column(T)
               : rep.grid.model.predict(
                     FeatureView{data.test.values.data.data(), data.test.n(), data.test.dim()});
    for (std::size_t i = 0; i < data.test.n(); ++i) {
      for (std::size_t k = 0; k < dates.size(); ++k) {
        const double e = rep.surface.at(i, k) - truth[k][i];
        maxsq[i] = std::max(maxsq[i], e * e);
      }
      const double e = fX[i] - data.y_test[i];
      termsq[i] = e * e;
    }
    const auto [lhs, lhs_se] = root_mean(maxsq);
    const auto [term, term_se] = root_mean(termsq);
    rep.doob_lhs = lhs;
    rep.doob_rhs = 2.0 * term;
    rep.doob_sigma = std::sqrt(lhs_se * lhs_se + 4.0 * term_se * term_se);
  }

  if (has(1) && T > 1) rep.qq_t1 = detrended_qq(rep.surface.column(1), rep.v1_oracle);
  if (has(T)) rep.qq_tT = detrended_qq(rep.surface.column(T), data.y_test);
  if (has(0) && has(1) && T > 1) {
    const LossSamples est = loss_samples(rep.surface, 0, 1);
    const std::vector<double> v0col(data.test.n(), v0);
    const LossSamples orc = loss_samples(v0col, rep.v1_oracle);
    rep.risk = risk_table(est, orc, plan.var_alpha, plan.es_alpha);
  }
  rep.timings.push_back({"risk", seconds_since(t0)});
  return rep;
}

BermudanPlan BermudanPlan::make(EstimatorKind est, Scale scale, std::uint64_t seed) {
  BermudanPlan p;
  p.estimator = est;
  p.seed = seed;
  p.n_train = 5000;
  p.n_test = scale == Scale::Desk ? 10000 : 100000;
  if (est == EstimatorKind::Forest) {
    ForestConfig later;
    later.trees = 10;
    later.nodesize = 2;
    later.features = 1;
    later.seed = seed;
    ForestConfig now = later;
    now.trees = 500;
    now.nodesize = 20;
    p.later = later;
    p.now = now;
  } else {
    BoostConfig later;
    later.rounds = 100;
    later.learning_rate = 0.3;
    later.nodesize = 1;
    later.max_depth = 6;
    later.seed = seed;
    BoostConfig now = later;
    now.rounds = 300;
    now.nodesize = 20;
    now.max_depth = 50;
    p.later = later;
    p.now = now;
  }
  return p;
}

ExerciseSpec BermudanPlan::spec() const {
  return ExerciseSpec::bermudan_put(strike, sigma, rate, periods, maturity, z0);
}

void BermudanPlan::validate() const {
  require(sigma > 0 && maturity > 0 && periods >= 1 && strike > 0, ErrorKind::Config,
          "bermudan: need sigma > 0, maturity > 0, periods >= 1, strike > 0");
  require(n_train >= 1 && n_test >= 1, ErrorKind::Config,
          "bermudan: sample sizes must be >= 1");
  auto no_es = [](const EnsembleConfig& c) {
    const auto* b = std::get_if<BoostConfig>(&c);
    return !b || !b->early_stopping;
  };
  require(no_es(later) && no_es(now), ErrorKind::Config,
          "bermudan: early stopping is not supported in backward induction");
}

namespace {

BermudanLeg evaluate_leg(BermudanValue bv, const BermudanPlan& plan, const Tensor3& test,
                         double truth_v0) {
  const std::size_t T = plan.periods;
  const double dt = plan.maturity / static_cast<double>(T);
  BermudanLeg leg;
  const std::vector<double> table = continuation_table(bv, test);
  leg.stopping = stopping_distribution(bv, test, table);
  std::vector<double> v1_est, v1_true;
  for (std::size_t t = 0; t <= T; ++t) {
    std::vector<double> est(test.n), truth(test.n);
    for (std::size_t i = 0; i < test.n; ++i) {
      const double z = test.at(i, t, 0);
      const double zz[1] = {z};
      const double g = bv.spec.payoff(t, zz);
      est[i] = t == T ? g : std::max(g, table[i * T + t]);
      truth[i] = t == T ? g
                        : std::exp(-plan.rate * dt * static_cast<double>(t)) *
                              black_put_price(z, plan.strike, plan.rate, plan.sigma,
                                              dt * static_cast<double>(T - t));
    }
    leg.l2_pct.push_back(normalized_l2(est, truth, truth_v0));
    if (t == 1) {
      v1_est = est;
      v1_true = truth;
    }
  }
  if (T >= 1) {
    const std::vector<double> e0(test.n, bv.price), t0(test.n, truth_v0);
    leg.risk = risk_table(loss_samples(e0, v1_est), loss_samples(t0, v1_true),
                          plan.var_alpha, plan.es_alpha);
  }
  leg.value = std::move(bv);
  return leg;
}

}  // namespace

BermudanReport run_bermudan(const BermudanPlan& plan) {
  using clock = std::chrono::steady_clock;
  plan.validate();
  BermudanReport rep;
  rep.config_snapshot = render_snapshot(plan);
  rep.config_hash = hex64(fnv1a64(rep.config_snapshot));
  const ExerciseSpec spec = plan.spec();
  auto t0 = clock::now();
  const Tensor3 train =
      simulate_localvol(spec.model, sample_driver(plan.n_train, 1, plan.periods, plan.seed,
                                                  Stream::Train));
  const Tensor3 test = simulate_localvol(
      spec.model, sample_driver(plan.n_test, 1, plan.periods, plan.seed, Stream::Test));
  rep.timings.push_back({"simulate", seconds_since(t0)});
  rep.truth_v0 = black_put_price(plan.z0, plan.strike, plan.rate, plan.sigma, plan.maturity);

  t0 = clock::now();
  BermudanValue later = price_regress_later(spec, train, plan.later);
  rep.timings.push_back({"fit_later", seconds_since(t0)});
  t0 = clock::now();
  rep.later = evaluate_leg(std::move(later), plan, test, rep.truth_v0);
  rep.timings.push_back({"evaluate_later", seconds_since(t0)});

  if (plan.regress_now) {
    t0 = clock::now();
    BermudanValue now = price_regress_now(spec, train, plan.now);
    rep.timings.push_back({"fit_now", seconds_since(t0)});
    t0 = clock::now();
    rep.now = evaluate_leg(std::move(now), plan, test, rep.truth_v0);
    rep.timings.push_back({"evaluate_now", seconds_since(t0)});
  }
  return rep;
}

namespace {

constexpr const char* kHashFile = "bundle.hash";
constexpr const char* kTimingFile = "timings.csv";

std::string timings_csv(const std::vector<Timing>& ts) {
  std::ostringstream os;
  os << "stage,seconds\n";
  for (const auto& t : ts) os << t.stage << ',' << format_double(t.seconds) << '\n';
  return os.str();
}

std::string stopping_csv(const std::vector<double>& p) {
  std::ostringstream os;
  os << "t,probability\n";
  for (std::size_t t = 0; t < p.size(); ++t) os << t << ',' << format_double(p[t]) << '\n';
  return os.str();
}

template <class F>
std::string render(F&& f) {
  std::ostringstream os;
  f(os);
  return os.str();
}

std::string finish_bundle(const std::filesystem::path& dir) {
  const std::string h = bundle_hash(dir);
  write_file(dir / kHashFile, h + "\n");
  return h;
}

void prepare(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir))
    throw Error(ErrorKind::Io, "cannot create output directory " + dir.string());
}

}  // namespace

std::string bundle_hash(const std::filesystem::path& dir) {
  std::vector<std::string> names;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    const std::string n = e.path().filename().string();
    if (n == kHashFile || n == kTimingFile) continue;
    names.push_back(n);
  }
  std::sort(names.begin(), names.end());
  std::uint64_t h = fnv1a64("");
  for (const auto& n : names) {
    h = fnv1a64(n, h);
    h = fnv1a64(std::string_view("\0", 1), h);
    h = fnv1a64(read_file(dir / n), h);
  }
  return hex64(h);
}

std::string write_bundle(const ExperimentReport& r, const std::filesystem::path& dir) {
  prepare(dir);
  write_file(dir / "config.snapshot", r.config_snapshot);
  write_file(dir / "l2_errors.csv", render([&](std::ostream& os) {
               os << "t,method,normalized_l2_pct,oracle_noise_pct,debiased_pct\n";
               for (const auto& l : r.l2)
                 os << l.t << ',' << l.method << ',' << format_double(l.error_pct) << ','
                    << format_double(l.oracle_noise_pct) << ','
                    << format_double(l.debiased_pct) << '\n';
             }));
  write_file(dir / "qq_t1.csv", render([&](std::ostream& os) { write_qq_csv(os, r.qq_t1); }));
  write_file(dir / "qq_tT.csv", render([&](std::ostream& os) { write_qq_csv(os, r.qq_tT); }));
  write_file(dir / "risk.csv", render([&](std::ostream& os) { write_risk_csv(os, r.risk); }));
  write_file(dir / "grid.csv", render([&](std::ostream& os) {
               os << "params,validation_l2_pct,cells,selected\n";
               for (std::size_t k = 0; k < r.grid.rows.size(); ++k)
                 os << r.grid.rows[k].params << ',' << format_double(r.grid.rows[k].error_pct)
                    << ',' << r.grid.rows[k].cells << ',' << (k == r.grid.best ? 1 : 0)
                    << '\n';
             }));
  save_surface(dir / "values.csv", r.surface, r.config_hash);
  nlohmann::ordered_json j;
  j["config_hash"] = r.config_hash;
  j["seed"] = r.seed;
  j["rng"] = CounterRng::kAlgorithm;
  j["model"] = r.grid.rows[r.grid.best].params;
  j["cells"] = r.flat.size();
  j["oracle_v0"] = r.v0.value;
  j["oracle_v0_stderr"] = r.v0.stderr_;
  if (!r.surface.dates.empty() && r.surface.dates.front() == 0)
    j["estimated_v0"] = r.surface.at(0, 0);
  j["doob_lhs"] = r.doob_lhs;
  j["doob_rhs"] = r.doob_rhs;
  j["doob_sigma"] = r.doob_sigma;
  if (r.grid_now) j["model_now"] = r.grid_now->rows[r.grid_now->best].params;
  write_file(dir / "summary.json", j.dump(2) + "\n");
  write_file(dir / kTimingFile, timings_csv(r.timings));
  return finish_bundle(dir);
}

std::string write_bundle(const BermudanReport& r, const std::filesystem::path& dir) {
  prepare(dir);
  write_file(dir / "config.snapshot", r.config_snapshot);
  write_file(dir / "l2_errors.csv", render([&](std::ostream& os) {
               os << "t,method,normalized_l2_pct\n";
               for (std::size_t t = 0; t < r.later.l2_pct.size(); ++t)
                 os << t << ",later," << format_double(r.later.l2_pct[t]) << '\n';
               if (r.now)
                 for (std::size_t t = 0; t < r.now->l2_pct.size(); ++t)
                   os << t << ",now," << format_double(r.now->l2_pct[t]) << '\n';
             }));
  write_file(dir / "stopping.csv", stopping_csv(r.later.stopping));
  write_file(dir / "risk.csv",
             render([&](std::ostream& os) { write_risk_csv(os, r.later.risk); }));
  if (r.now) {
    write_file(dir / "stopping_now.csv", stopping_csv(r.now->stopping));
    write_file(dir / "risk_now.csv",
               render([&](std::ostream& os) { write_risk_csv(os, r.now->risk); }));
  }
  nlohmann::ordered_json j;
  j["config_hash"] = r.config_hash;
  j["rng"] = CounterRng::kAlgorithm;
  j["black_v0"] = r.truth_v0;
  j["price_later"] = r.later.value.price;
  if (r.now) j["price_now"] = r.now->value.price;
  write_file(dir / "summary.json", j.dump(2) + "\n");
  write_file(dir / kTimingFile, timings_csv(r.timings));
  return finish_bundle(dir);
}

}  // namespace treeval
