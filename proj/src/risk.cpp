#include "treeval/risk.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "treeval/error.hpp"
#include "treeval/io.hpp"
#include "treeval/numeric.hpp"

namespace treeval {

namespace {

std::size_t order_index(std::size_t n, double alpha) {
  // ceil(alpha * n) with a guard against products such as 0.95 * 100
  // landing a hair above an integer.
  const double prod = alpha * static_cast<double>(n);
  double k = std::ceil(prod - 1e-9 * std::max(1.0, prod));
  k = std::clamp(k, 1.0, static_cast<double>(n));
  return static_cast<std::size_t>(k);
}

std::vector<double> sorted_copy(std::span<const double> x) {
  std::vector<double> v(x.begin(), x.end());
  std::sort(v.begin(), v.end());
  return v;
}

void check_sample(std::span<const double> x, double alpha) {
  require(!x.empty(), ErrorKind::Precondition, "risk: empty loss sample");
  require(alpha > 0.0 && alpha < 1.0, ErrorKind::Precondition,
          "risk: alpha must lie in (0,1)");
}

}  // namespace

double sorted_quantile(std::span<const double> sorted, double alpha) {
  require(!sorted.empty(), ErrorKind::Precondition, "quantile of empty sample");
  return sorted[order_index(sorted.size(), alpha) - 1];
}

double empirical_var(std::span<const double> losses, double alpha) {
  check_sample(losses, alpha);
  std::vector<double> v(losses.begin(), losses.end());
  const std::size_t k = order_index(v.size(), alpha) - 1;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k), v.end());
  return v[k];
}

double empirical_es(std::span<const double> losses, double alpha) {
  check_sample(losses, alpha);
  const double var = empirical_var(losses, alpha);
  CompensatedSum excess;
  for (double l : losses)
    if (l > var) excess.add(l - var);
  return var + excess.value() / static_cast<double>(losses.size()) / (1.0 - alpha);
}

LossSamples loss_samples(std::span<const double> v0, std::span<const double> v1) {
  require(v0.size() == v1.size(), ErrorKind::Dimension,
          "loss_samples: value vectors differ in length");
  LossSamples out;
  out.long_position.resize(v0.size());
  out.short_position.resize(v0.size());
  for (std::size_t i = 0; i < v0.size(); ++i) {
    out.long_position[i] = v0[i] - v1[i];
    out.short_position[i] = v1[i] - v0[i];
  }
  return out;
}

LossSamples loss_samples(const ValueSurface& surface, std::size_t t0, std::size_t t1) {
  const auto a = surface.column(t0);
  const auto b = surface.column(t1);
  return loss_samples(a, b);
}

QuantileGrid QuantileGrid::standard() {
  QuantileGrid g;
  for (int k = 1; k <= 9; ++k) g.levels.push_back(k / 100000.0);
  for (int k = 1; k <= 99; ++k) g.levels.push_back(k / 10000.0);
  for (int k = 1; k <= 99; ++k) g.levels.push_back(k / 100.0);
  for (int k = 1; k <= 99; ++k) g.levels.push_back((9900 + k) / 10000.0);
  for (int k = 1; k <= 10; ++k) g.levels.push_back((99990 + k) / 100000.0);
  return g;
}

void QuantileGrid::validate() const {
  require(!levels.empty(), ErrorKind::Precondition, "quantile grid is empty");
  for (std::size_t i = 0; i < levels.size(); ++i) {
    require(levels[i] > 0.0 && levels[i] <= 1.0, ErrorKind::Precondition,
            "quantile grid levels must lie in (0,1]");
    if (i > 0)
      require(levels[i] > levels[i - 1], ErrorKind::Precondition,
              "quantile grid must be strictly increasing");
  }
}

std::vector<QQPoint> detrended_qq(std::span<const double> estimated,
                                  std::span<const double> truth,
                                  const QuantileGrid& grid) {
  require(!estimated.empty() && !truth.empty(), ErrorKind::Precondition,
          "detrended_qq: empty sample");
  grid.validate();
  const auto e = sorted_copy(estimated);
  const auto t = sorted_copy(truth);
  std::vector<QQPoint> out;
  out.reserve(grid.levels.size());
  for (double a : grid.levels) {
    const double tq = sorted_quantile(t, a);
    out.push_back({a, tq, sorted_quantile(e, a) - tq});
  }
  return out;
}

double normalized_l2(std::span<const double> estimated, std::span<const double> truth,
                     double v0) {
  require(estimated.size() == truth.size() && !truth.empty(), ErrorKind::Dimension,
          "normalized_l2: samples must be nonempty and of equal length");
  require(v0 != 0.0, ErrorKind::Precondition, "normalized_l2: v0 must be nonzero");
  CompensatedSum ss;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const double r = estimated[i] - truth[i];
    ss.add(r * r);
  }
  return 100.0 * std::sqrt(ss.value() / static_cast<double>(truth.size())) / std::fabs(v0);
}

std::vector<RiskRow> risk_table(const LossSamples& estimated, const LossSamples& oracle,
                                double var_alpha, double es_alpha) {
  std::vector<RiskRow> rows;
  auto add = [&](const char* measure, double alpha, const char* pos,
                 std::span<const double> est, std::span<const double> orc) {
    RiskRow r;
    r.measure = measure;
    r.alpha = alpha;
    r.position = pos;
    const bool var = r.measure == "VaR";
    r.estimate = var ? empirical_var(est, alpha) : empirical_es(est, alpha);
    r.oracle = var ? empirical_var(orc, alpha) : empirical_es(orc, alpha);
    r.relative_error_pct = r.oracle != 0.0
                               ? 100.0 * (r.estimate - r.oracle) / std::fabs(r.oracle)
                               : std::nan("");
    rows.push_back(r);
  };
  add("VaR", var_alpha, "long", estimated.long_position, oracle.long_position);
  add("VaR", var_alpha, "short", estimated.short_position, oracle.short_position);
  add("ES", es_alpha, "long", estimated.long_position, oracle.long_position);
  add("ES", es_alpha, "short", estimated.short_position, oracle.short_position);
  return rows;
}

void write_qq_csv(std::ostream& os, std::span<const QQPoint> qq) {
  os << "level,true_q,detrended\n";
  for (const auto& p : qq)
    os << format_double(p.level) << ',' << format_double(p.true_q) << ','
       << format_double(p.detrended) << '\n';
}

void write_risk_csv(std::ostream& os, std::span<const RiskRow> rows) {
  os << "measure,alpha,position,estimate,oracle,relative_error_pct\n";
  for (const auto& r : rows)
    os << r.measure << ',' << format_double(r.alpha) << ',' << r.position << ','
       << format_double(r.estimate) << ',' << format_double(r.oracle) << ','
       << format_double(r.relative_error_pct) << '\n';
}

}  // namespace treeval
