#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "treeval/ensemble.hpp"
#include "treeval/flat.hpp"
#include "treeval/measure.hpp"
#include "treeval/paths.hpp"

namespace treeval {

/// V_{X,t}(prefix) evaluated straight from the definition: every cell's
/// prefix membership times its tail probability, summed with compensation.
/// `prefix` holds x_1..x_t (t*d values); extra trailing values are ignored.
double value_at(const FlatEnsemble& fe, const MeasureSpec& measure, std::size_t t,
                std::span<const double> prefix);

/// Precomputed evaluator for one date. Tail products are computed once per
/// cell; cells with no constraint on the prefix collapse into a constant,
/// and the remaining cells keep only their constrained prefix coordinates.
/// Agrees with value_at up to summation order.
class ValuePlan {
 public:
  ValuePlan(const FlatEnsemble& fe, const MeasureSpec& measure, std::size_t t);

  std::size_t date() const { return t_; }
  std::size_t prefix_dim() const { return prefix_dim_; }
  /// Cells whose value depends on the prefix.
  std::size_t active_cells() const { return weights_.size(); }
  double constant() const { return constant_; }

  double evaluate(std::span<const double> prefix) const;

  /// evaluate() for `count` prefixes stored `stride` doubles apart. Cells
  /// are visited once per batch; each output keeps the per-cell summation
  /// order of evaluate(), so results are bit-identical.
  void evaluate_batch(const double* prefixes, std::size_t stride, std::size_t count,
                      double* out) const;

 private:
  std::size_t t_ = 0;
  std::size_t prefix_dim_ = 0;
  double constant_ = 0.0;
  std::vector<double> weights_;        // beta_i * tail_i
  std::vector<std::uint32_t> offsets_;  // CSR into coords_/lo_/hi_
  std::vector<std::uint32_t> coords_;
  std::vector<double> lo_;
  std::vector<double> hi_;
};

struct SurfaceMeta {
  std::string model_id;
  std::string measure_id;
  std::uint64_t seed = 0;
};

/// values(i, k) = V_{X, dates[k]} at scenario i, stored scenario-major.
struct ValueSurface {
  std::vector<std::size_t> dates;
  std::size_t scenarios = 0;
  std::vector<double> values;
  SurfaceMeta meta;

  double at(std::size_t i, std::size_t k) const { return values[i * dates.size() + k]; }
  /// Position of date t in `dates`; throws when absent.
  std::size_t date_index(std::size_t t) const;
  std::vector<double> column(std::size_t t) const;
};

/// Chunk size of the scenario loop. Part of the reproducibility contract.
inline constexpr std::size_t kSurfaceGrain = 256;

ValueSurface value_surface(const FlatEnsemble& fe, const MeasureSpec& measure,
                           std::span<const std::size_t> dates,
                           const DriverSample& scenarios, SurfaceMeta meta = {});

/// CSV with header scenario_id,t,value, one row per (scenario, date).
void write_surface_csv(std::ostream& os, const ValueSurface& s);
ValueSurface read_surface_csv(const std::filesystem::path& path);

/// Writes <stem>.csv plus a <stem>.json sidecar with seeds, ids and the
/// digest of the CSV content.
void save_surface(const std::filesystem::path& csv_path, const ValueSurface& s,
                  const std::string& config_hash);

/// Regress-now: fits an ensemble on the first `t` periods only (t*d
/// inputs), so predictions cannot depend on later periods.
Model fit_regress_now(const DriverSample& sample, std::span<const double> responses,
                      const EnsembleConfig& cfg, std::size_t t = 1);

/// Copies the first t periods of every path into a dense n x (t*d) matrix.
std::vector<double> prefix_matrix(const DriverSample& sample, std::size_t t);

}  // namespace treeval
