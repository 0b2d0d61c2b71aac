#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "treeval/valuation.hpp"

namespace treeval {

/// Left alpha-quantile of the empirical law: the ceil(alpha*n)-th order
/// statistic (1-based).
double empirical_var(std::span<const double> losses, double alpha);

/// VaR + mean((L - VaR)^+) / (1 - alpha).
double empirical_es(std::span<const double> losses, double alpha);

/// Same as empirical_var on data that is already sorted ascending.
double sorted_quantile(std::span<const double> sorted, double alpha);

struct LossSamples {
  std::vector<double> long_position;   // V_t0 - V_t1
  std::vector<double> short_position;  // V_t1 - V_t0
};

LossSamples loss_samples(const ValueSurface& surface, std::size_t t0, std::size_t t1);
LossSamples loss_samples(std::span<const double> v0, std::span<const double> v1);

struct QuantileGrid {
  std::vector<double> levels;

  /// 0.001%..0.009%, 0.01%..0.99%, 1%..99%, 99.01%..99.99%, 99.991%..100%.
  static QuantileGrid standard();
  void validate() const;
};

struct QQPoint {
  double level = 0.0;
  double true_q = 0.0;
  double detrended = 0.0;  // estimated quantile minus true quantile
};

std::vector<QQPoint> detrended_qq(std::span<const double> estimated,
                                  std::span<const double> truth,
                                  const QuantileGrid& grid = QuantileGrid::standard());

/// 100 * RMS(estimated - truth) / v0.
double normalized_l2(std::span<const double> estimated, std::span<const double> truth,
                     double v0);

struct RiskRow {
  std::string measure;   // "VaR" or "ES"
  double alpha = 0.0;
  std::string position;  // "long" or "short"
  double estimate = 0.0;
  double oracle = 0.0;
  double relative_error_pct = 0.0;
};

/// VaR at var_alpha and ES at es_alpha for long and short positions,
/// estimated losses against oracle losses.
std::vector<RiskRow> risk_table(const LossSamples& estimated, const LossSamples& oracle,
                                double var_alpha = 0.995, double es_alpha = 0.99);

void write_qq_csv(std::ostream& os, std::span<const QQPoint> qq);
void write_risk_csv(std::ostream& os, std::span<const RiskRow> rows);

}  // namespace treeval
