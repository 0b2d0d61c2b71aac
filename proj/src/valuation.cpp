#include "treeval/valuation.hpp"

#include <json.hpp>
#include <ostream>
#include <sstream>

#include "treeval/error.hpp"
#include "treeval/io.hpp"
#include "treeval/numeric.hpp"
#include "treeval/parallel.hpp"
#include "treeval/rng.hpp"

namespace treeval {

namespace {

void check_dims(const FlatEnsemble& fe, const MeasureSpec& measure, std::size_t t) {
  require(fe.components() == measure.components() && fe.periods() == measure.periods(),
          ErrorKind::Dimension, "valuation: model and measure dimensions differ");
  require(t <= fe.periods(), ErrorKind::Dimension,
          "valuation: date t exceeds the number of periods");
}

// prod_{s > t} Q_s[cell slice s], skipping unconstrained slices.
double tail_product(const FlatEnsemble& fe, std::size_t i, std::size_t t,
                    ProbabilityCache& cache) {
  const std::size_t d = fe.components();
  auto lo = fe.lower(i);
  auto hi = fe.upper(i);
  double p = 1.0;
  for (std::size_t s = t; s < fe.periods() && p != 0.0; ++s) {
    auto a = lo.subspan(s * d, d);
    auto b = hi.subspan(s * d, d);
    bool full = true;
    for (std::size_t j = 0; j < d; ++j)
      if (a[j] != -kInf || b[j] != kInf) full = false;
    if (!full) p *= cache.get(s, a, b);
  }
  return p;
}

}  // namespace

double value_at(const FlatEnsemble& fe, const MeasureSpec& measure, std::size_t t,
                std::span<const double> prefix) {
  check_dims(fe, measure, t);
  const std::size_t pd = t * fe.components();
  require(prefix.size() >= pd, ErrorKind::Dimension,
          "value_at: prefix shorter than t*d");
  ProbabilityCache cache(measure);
  CompensatedSum acc;
  for (std::size_t i = 0; i < fe.size(); ++i) {
    auto lo = fe.lower(i);
    auto hi = fe.upper(i);
    bool inside = true;
    for (std::size_t c = 0; c < pd && inside; ++c)
      inside = lo[c] < prefix[c] && prefix[c] <= hi[c];
    if (!inside) continue;
    acc.add(fe.value(i) * tail_product(fe, i, t, cache));
  }
  return acc.value();
}

ValuePlan::ValuePlan(const FlatEnsemble& fe, const MeasureSpec& measure, std::size_t t)
    : t_(t), prefix_dim_(t * fe.components()) {
  check_dims(fe, measure, t);
  ProbabilityCache cache(measure);
  CompensatedSum constant;
  offsets_.push_back(0);
  for (std::size_t i = 0; i < fe.size(); ++i) {
    const double w = fe.value(i) * tail_product(fe, i, t, cache);
    if (w == 0.0) continue;
    auto lo = fe.lower(i);
    auto hi = fe.upper(i);
    const std::size_t before = coords_.size();
    for (std::size_t c = 0; c < prefix_dim_; ++c) {
      if (lo[c] == -kInf && hi[c] == kInf) continue;
      coords_.push_back(static_cast<std::uint32_t>(c));
      lo_.push_back(lo[c]);
      hi_.push_back(hi[c]);
    }
    if (coords_.size() == before) {
      constant.add(w);
    } else {
      weights_.push_back(w);
      offsets_.push_back(static_cast<std::uint32_t>(coords_.size()));
    }
  }
  constant_ = constant.value();
}

double ValuePlan::evaluate(std::span<const double> prefix) const {
  require(prefix.size() >= prefix_dim_, ErrorKind::Dimension,
          "ValuePlan: prefix shorter than t*d");
  CompensatedSum acc;
  acc.add(constant_);
  const double* x = prefix.data();
  for (std::size_t k = 0; k < weights_.size(); ++k) {
    const std::uint32_t end = offsets_[k + 1];
    std::uint32_t q = offsets_[k];
    for (; q < end; ++q) {
      const double v = x[coords_[q]];
      if (!(lo_[q] < v && v <= hi_[q])) break;
    }
    if (q == end) acc.add(weights_[k]);
  }
  return acc.value();
}

void ValuePlan::evaluate_batch(const double* prefixes, std::size_t stride,
                               std::size_t count, double* out) const {
  require(stride >= prefix_dim_, ErrorKind::Dimension,
          "ValuePlan: prefix stride shorter than t*d");
  std::vector<CompensatedSum> acc(count);
  for (auto& a : acc) a.add(constant_);
  for (std::size_t k = 0; k < weights_.size(); ++k) {
    const std::uint32_t begin = offsets_[k];
    const std::uint32_t end = offsets_[k + 1];
    const double w = weights_[k];
    for (std::size_t i = 0; i < count; ++i) {
      const double* x = prefixes + i * stride;
      bool inside = true;
      for (std::uint32_t q = begin; q < end; ++q) {
        const double v = x[coords_[q]];
        inside &= (lo_[q] < v) & (v <= hi_[q]);
      }
      if (inside) acc[i].add(w);
    }
  }
  for (std::size_t i = 0; i < count; ++i) out[i] = acc[i].value();
}

std::size_t ValueSurface::date_index(std::size_t t) const {
  for (std::size_t k = 0; k < dates.size(); ++k)
    if (dates[k] == t) return k;
  throw Error(ErrorKind::Precondition,
              "value surface has no date t=" + std::to_string(t));
}

std::vector<double> ValueSurface::column(std::size_t t) const {
  const std::size_t k = date_index(t);
  std::vector<double> out(scenarios);
  for (std::size_t i = 0; i < scenarios; ++i) out[i] = at(i, k);
  return out;
}

ValueSurface value_surface(const FlatEnsemble& fe, const MeasureSpec& measure,
                           std::span<const std::size_t> dates,
                           const DriverSample& scenarios, SurfaceMeta meta) {
  require(!dates.empty(), ErrorKind::Precondition, "value_surface: no dates");
  require(scenarios.components() == fe.components() &&
              scenarios.periods() == fe.periods(),
          ErrorKind::Dimension, "value_surface: scenario dimensions differ from model");
  ValueSurface out;
  out.dates.assign(dates.begin(), dates.end());
  out.scenarios = scenarios.n();
  out.values.assign(out.scenarios * dates.size(), 0.0);
  out.meta = std::move(meta);
  const std::size_t nd = dates.size();
  for (std::size_t k = 0; k < nd; ++k) {
    const ValuePlan plan(fe, measure, dates[k]);
    parallel_for(out.scenarios, kSurfaceGrain, [&](std::size_t b, std::size_t e) {
      std::vector<double> col(e - b);
      plan.evaluate_batch(scenarios.path(b).data(), scenarios.dim(), e - b, col.data());
      for (std::size_t i = b; i < e; ++i) out.values[i * nd + k] = col[i - b];
    });
  }
  return out;
}

void write_surface_csv(std::ostream& os, const ValueSurface& s) {
  os << "scenario_id,t,value\n";
  for (std::size_t i = 0; i < s.scenarios; ++i)
    for (std::size_t k = 0; k < s.dates.size(); ++k)
      os << i << ',' << s.dates[k] << ',' << format_double(s.at(i, k)) << '\n';
}

ValueSurface read_surface_csv(const std::filesystem::path& path) {
  const CsvTable t = read_csv(path);
  const std::size_t ci = t.column("scenario_id");
  const std::size_t ct = t.column("t");
  const std::size_t cv = t.column("value");
  ValueSurface s;
  for (const auto& row : t.rows) {
    const std::size_t date = std::stoul(row[ct]);
    if (std::find(s.dates.begin(), s.dates.end(), date) == s.dates.end())
      s.dates.push_back(date);
  }
  require(!s.dates.empty(), ErrorKind::Io, path.string() + ": no rows");
  require(t.rows.size() % s.dates.size() == 0, ErrorKind::Io,
          path.string() + ": ragged surface");
  s.scenarios = t.rows.size() / s.dates.size();
  s.values.assign(t.rows.size(), 0.0);
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const std::size_t i = std::stoul(t.rows[r][ci]);
    require(i < s.scenarios, ErrorKind::Io, path.string() + ": scenario id out of range");
    const std::size_t k = s.date_index(std::stoul(t.rows[r][ct]));
    s.values[i * s.dates.size() + k] = std::stod(t.rows[r][cv]);
  }
  return s;
}

void save_surface(const std::filesystem::path& csv_path, const ValueSurface& s,
                  const std::string& config_hash) {
  std::ostringstream os;
  write_surface_csv(os, s);
  const std::string csv = os.str();
  write_file(csv_path, csv);
  nlohmann::ordered_json j;
  j["columns"] = {"scenario_id", "t", "value"};
  j["dates"] = s.dates;
  j["scenarios"] = s.scenarios;
  j["model_id"] = s.meta.model_id;
  j["measure"] = s.meta.measure_id;
  j["seed"] = s.meta.seed;
  j["rng"] = CounterRng::kAlgorithm;
  j["chunk_grain"] = kSurfaceGrain;
  j["summation"] = "neumaier";
  j["config_hash"] = config_hash;
  j["csv_fnv1a64"] = hex64(fnv1a64(csv));
  auto side = csv_path;
  side.replace_extension(".json");
  write_file(side, j.dump(2) + "\n");
}

std::vector<double> prefix_matrix(const DriverSample& sample, std::size_t t) {
  require(t >= 1 && t <= sample.periods(), ErrorKind::Dimension,
          "prefix_matrix: t must be in 1..T");
  const std::size_t w = t * sample.components();
  std::vector<double> out(sample.n() * w);
  for (std::size_t i = 0; i < sample.n(); ++i) {
    auto p = sample.path(i);
    std::copy(p.begin(), p.begin() + static_cast<std::ptrdiff_t>(w),
              out.begin() + static_cast<std::ptrdiff_t>(i * w));
  }
  return out;
}

Model fit_regress_now(const DriverSample& sample, std::span<const double> responses,
                      const EnsembleConfig& cfg, std::size_t t) {
  require(responses.size() == sample.n(), ErrorKind::Dimension,
          "fit_regress_now: one response per path required");
  const std::vector<double> x = prefix_matrix(sample, t);
  FeatureView view{x.data(), sample.n(), t * sample.components()};
  return fit_model(view, responses, cfg);
}

}  // namespace treeval
