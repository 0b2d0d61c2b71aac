#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "treeval/bermudan.hpp"
#include "treeval/ensemble.hpp"
#include "treeval/flat.hpp"
#include "treeval/measure.hpp"
#include "treeval/paths.hpp"
#include "treeval/risk.hpp"
#include "treeval/valuation.hpp"

namespace treeval {

enum class Scale { Desk, Paper };
enum class EstimatorKind { Boost, Forest };

std::string_view to_string(Scale s);
std::string_view to_string(EstimatorKind k);
std::string_view to_string(PayoffKind k);
std::string_view to_string(Sampling s);

/// Market model plus payoff. Presets: "min-put" and "max-call" (d=6,
/// steps 1/12 and 11/12), "brc" (d=3, twelve monthly steps); all with
/// S0=1, sigma_i = 0.2 e_i, r=0, K=1, B=0.6, C=0, F=1.
struct Problem {
  std::string name;
  BlackScholesModel model;
  Payoff payoff;

  std::size_t components() const { return model.assets(); }
  std::size_t periods() const { return model.periods(); }
  static Problem preset(const std::string& name);
};

/// Cartesian hyperparameter grids.
struct ForestGrid {
  std::vector<std::size_t> trees{100};
  std::vector<std::size_t> nodesize{5};
  std::vector<std::size_t> features;  // empty = all coordinates
  Sampling sampling = Sampling::Bootstrap;
  std::optional<std::size_t> subsample;
  std::optional<std::size_t> max_depth;

  /// M in {100,250,500}, nodesize in {2,3,5}, p in {ceil(dim/3), dim}.
  static ForestGrid paper(std::size_t dim);
  /// The reference default point (100, 5, dim) with both p values and all
  /// three nodesizes, M fixed to 100.
  static ForestGrid desk(std::size_t dim);
};

struct BoostGrid {
  std::vector<std::size_t> nodesize{5, 15, 25, 35, 45};
  std::vector<std::size_t> max_depth{40, 50, 60, 70, 80, 90};
  std::vector<double> learning_rate{0.1};
  std::size_t rounds = 500;
  std::size_t patience = 20;  // 0 disables early stopping

  static BoostGrid paper();
  static BoostGrid desk();
};

/// Expands a grid into concrete configs. Boost configs carry no early
/// stopping set; the harness attaches its validation sample.
std::vector<EnsembleConfig> expand(const ForestGrid& g, std::uint64_t seed);
std::vector<EnsembleConfig> expand(const BoostGrid& g, std::uint64_t seed);
std::string describe(const EnsembleConfig& cfg);

struct ExperimentPlan {
  Problem problem = Problem::preset("min-put");
  MeasureSpec measure;  // empty = standard normal of the problem's shape
  std::size_t n_train = 5000;
  std::size_t n_valid = 2000;
  std::size_t n_test = 20000;
  std::size_t n_inner = 200;
  std::vector<std::size_t> dates;  // empty = {0, 1, T}
  EstimatorKind estimator = EstimatorKind::Boost;
  ForestGrid forest_grid = ForestGrid::desk(12);
  BoostGrid boost_grid = BoostGrid::desk();
  bool regress_now = true;
  double var_alpha = 0.995;
  double es_alpha = 0.99;
  std::uint64_t seed = 1;

  /// Desk: n_train 5000, n_valid 0.4 n, n_test 20000, n_inner 200.
  /// Paper scale: 20000 / 8000 / 100000 / 1000 with the full grids.
  static ExperimentPlan make(const std::string& problem, EstimatorKind est, Scale scale,
                             std::uint64_t seed);

  const MeasureSpec& driver_measure() const;
  std::vector<std::size_t> resolved_dates() const;
  std::vector<EnsembleConfig> grid() const;
  void validate() const;

 private:
  mutable MeasureSpec default_measure_;
};

struct Estimate {
  double value = 0.0;
  double stderr_ = 0.0;
};

/// Sample mean and standard error.
Estimate oracle_v0(std::span<const double> payoffs);
Estimate oracle_v0(const Problem& problem, const DriverSample& test);

struct InnerEstimate {
  std::vector<double> mean;
  std::vector<double> stderr_;  // per scenario, sd / sqrt(n_inner)
};

/// Nested Monte Carlo for V_t: per scenario, n_inner fresh tails
/// X_{t+1..T} drawn from `measure` on the Inner stream, lane = scenario id.
InnerEstimate oracle_vt(const Problem& problem, const MeasureSpec& measure,
                        const DriverSample& test, std::size_t t, std::size_t n_inner,
                        std::uint64_t seed);
InnerEstimate oracle_v1(const Problem& problem, const MeasureSpec& measure,
                        const DriverSample& test, std::size_t n_inner, std::uint64_t seed);

/// Train, validation and test drivers with their discounted payoffs, drawn
/// from disjoint streams of one seed.
struct Datasets {
  DriverSample train, valid, test;
  std::vector<double> y_train, y_valid, y_test;
};

Datasets make_datasets(const ExperimentPlan& plan);
std::vector<double> payoffs(const Problem& problem, const DriverSample& x);

struct GridRow {
  std::string params;
  double error_pct = 0.0;
  std::size_t cells = 0;
};

struct GridResult {
  std::size_t best = 0;
  std::vector<GridRow> rows;
  Model model;
};

/// Fits every config on the training data and scores 100 * ||f - f_X|| / v0
/// on the validation data. Ties go to fewer cells, then to the earlier row.
GridResult run_validation_grid(const std::vector<EnsembleConfig>& grid, FeatureView train_x,
                               std::span<const double> train_y, FeatureView valid_x,
                               std::span<const double> valid_y, double v0);
GridResult run_validation_grid(const ExperimentPlan& plan, const Datasets& data);

struct L2Row {
  std::size_t t = 0;
  std::string method;  // "later" or "now"
  double error_pct = 0.0;
  double oracle_noise_pct = 0.0;  // RMS oracle standard error / v0
  double debiased_pct = 0.0;      // sqrt(max(0, error^2 - noise^2))
};

struct Timing {
  std::string stage;
  double seconds = 0.0;
};

struct ExperimentReport {
  std::string config_snapshot;
  std::string config_hash;
  std::uint64_t seed = 0;
  GridResult grid;
  std::optional<GridResult> grid_now;
  FlatEnsemble flat;
  ValueSurface surface;
  Estimate v0;
  std::vector<double> v1_oracle;
  std::vector<double> v1_now;
  std::vector<L2Row> l2;
  std::vector<QQPoint> qq_t1, qq_tT;
  std::vector<RiskRow> risk;
  double doob_lhs = 0.0;   // ||max_t |V_t - V_{X,t}|||_2
  double doob_rhs = 0.0;   // 2 ||f - f_X||_2
  double doob_sigma = 0.0; // standard error of the squared-difference means, propagated
  std::vector<Timing> timings;
};

ExperimentReport run_experiment(const ExperimentPlan& plan);

struct BermudanPlan {
  double strike = 1.0;
  double sigma = 0.2;
  double rate = 0.0;
  double maturity = 1.0;
  std::size_t periods = 7;
  double z0 = 0.0;
  std::size_t n_train = 5000;
  std::size_t n_test = 10000;
  EstimatorKind estimator = EstimatorKind::Boost;
  EnsembleConfig later;
  EnsembleConfig now;
  bool regress_now = true;
  std::uint64_t seed = 1;
  double var_alpha = 0.995;
  double es_alpha = 0.99;

  /// Published hyperparameters. Later: forest M=10, nodesize 2, p=1, or boost
  /// 100 rounds, nodesize 1, depth 6, learning rate 0.3. Now: forest M=500, nodesize
  /// 20, p=1, or boost 300 rounds, nodesize 20, depth 50.
  static BermudanPlan make(EstimatorKind est, Scale scale, std::uint64_t seed);
  ExerciseSpec spec() const;
  void validate() const;
};

struct BermudanLeg {
  BermudanValue value;
  std::vector<double> stopping;    // on the test paths
  std::vector<double> l2_pct;      // t = 0..T
  std::vector<RiskRow> risk;
};

struct BermudanReport {
  std::string config_snapshot;
  std::string config_hash;
  double truth_v0 = 0.0;
  BermudanLeg later;
  std::optional<BermudanLeg> now;
  std::vector<Timing> timings;
};

BermudanReport run_bermudan(const BermudanPlan& plan);

/// Writes the bundle files and a bundle.hash digest of every file except
/// timings.csv. Returns the digest.
std::string write_bundle(const ExperimentReport& r, const std::filesystem::path& dir);
std::string write_bundle(const BermudanReport& r, const std::filesystem::path& dir);

/// Recomputes the digest written by write_bundle.
std::string bundle_hash(const std::filesystem::path& dir);

}  // namespace treeval
