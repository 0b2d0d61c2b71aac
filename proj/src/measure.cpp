#include "treeval/measure.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <sstream>

#include "treeval/cart.hpp"
#include "treeval/error.hpp"
#include "treeval/normal.hpp"
#include "treeval/parallel.hpp"

namespace treeval {

double Marginal::cdf(double x) const {
  switch (family) {
    case MarginalFamily::Normal:
      return normal_cdf((x - loc) / scale);
    case MarginalFamily::Uniform:
      if (x <= loc) return 0.0;
      if (x >= loc + scale) return 1.0;
      return (x - loc) / scale;
    case MarginalFamily::Logistic: {
      if (std::isinf(x)) return x > 0 ? 1.0 : 0.0;
      const double z = (x - loc) / scale;
      return z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
    }
  }
  return 0.0;
}

double Marginal::quantile(double u) const {
  switch (family) {
    case MarginalFamily::Normal:
      return loc + scale * normal_quantile(u);
    case MarginalFamily::Uniform:
      return loc + scale * u;
    case MarginalFamily::Logistic:
      return loc + scale * std::log(u / (1.0 - u));
  }
  return 0.0;
}

void CopulaPeriod::validate() const {
  require(!marginals.empty(), ErrorKind::Config, "copula: no marginals");
  if (family == CopulaFamily::Clayton)
    require(theta > 0.0 && std::isfinite(theta), ErrorKind::Config,
            "copula: Clayton theta must be > 0");
}

double CopulaPeriod::copula(std::span<const double> u) const {
  if (family == CopulaFamily::Independence) {
    double p = 1.0;
    for (double v : u) p *= v;
    return p;
  }
  double acc = 0.0;
  for (double v : u) {
    if (v <= 0.0) return 0.0;
    acc += std::pow(v, -theta) - 1.0;
  }
  return std::pow(acc + 1.0, -1.0 / theta);
}

double rect_prob_product(const ProductPeriod& q, std::span<const double> a,
                         std::span<const double> b) {
  require(a.size() == q.marginals.size() && b.size() == q.marginals.size(),
          ErrorKind::Dimension, "rect_prob_product: bounds do not match d");
  double p = 1.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    if (a[j] == -kInf && b[j] == kInf) continue;
    const Marginal& f = q.marginals[j];
    if (f.family == MarginalFamily::Normal && f.loc == 0.0 && f.scale == 1.0 &&
        a[j] > 0.0) {
      // Upper tail without cancellation.
      p *= normal_sf(a[j]) - normal_sf(b[j]);
    } else {
      p *= f.cdf(b[j]) - f.cdf(a[j]);
    }
  }
  return std::clamp(p, 0.0, 1.0);
}

double rect_prob_copula(const CopulaPeriod& q, std::span<const double> a,
                        std::span<const double> b) {
  const std::size_t d = q.marginals.size();
  require(d <= 25, ErrorKind::Precondition,
          "rect_prob_copula: d > 25 is rejected (2^d corners)");
  require(a.size() == d && b.size() == d, ErrorKind::Dimension,
          "rect_prob_copula: bounds do not match d");
  std::vector<double> fa(d), fb(d), u(d);
  for (std::size_t j = 0; j < d; ++j) {
    fa[j] = q.marginals[j].cdf(a[j]);
    fb[j] = q.marginals[j].cdf(b[j]);
  }
  double sum = 0.0;
  const std::uint32_t corners = 1u << d;
  for (std::uint32_t mask = 0; mask < corners; ++mask) {
    int lows = 0;
    bool zero = false;
    for (std::size_t j = 0; j < d; ++j) {
      if (mask & (1u << j)) {
        u[j] = fa[j];
        ++lows;
      } else {
        u[j] = fb[j];
      }
      if (u[j] <= 0.0) zero = true;
    }
    if (zero) continue;  // grounded copula
    const double c = q.copula(u);
    sum += (lows % 2 == 0) ? c : -c;
  }
  if (sum < 0.0) {
    if (sum < -1e-12)
      throw Error(ErrorKind::Numeric, "rect_prob_copula: negative probability " +
                                          std::to_string(sum));
    sum = 0.0;
  }
  return std::min(sum, 1.0);
}

MeasureSpec::MeasureSpec(std::size_t components, std::vector<PeriodMeasure> periods)
    : d_(components), periods_(std::move(periods)) {
  require(d_ >= 1 && !periods_.empty(), ErrorKind::Config,
          "measure: need d >= 1 and T >= 1");
  for (const auto& p : periods_) {
    std::size_t dim = 0;
    if (const auto* pp = std::get_if<ProductPeriod>(&p)) dim = pp->marginals.size();
    if (const auto* cp = std::get_if<CopulaPeriod>(&p)) {
      cp->validate();
      dim = cp->marginals.size();
    }
    if (const auto* gp = std::get_if<GaussianPeriod>(&p)) {
      gp->kernel.validate();
      dim = gp->kernel.dim();
    }
    require(dim == d_, ErrorKind::Dimension,
            "measure: a period's dimension differs from d");
  }
}

MeasureSpec MeasureSpec::standard_normal(std::size_t d, std::size_t T) {
  ProductPeriod p{std::vector<Marginal>(d, Marginal::standard_normal())};
  return MeasureSpec(d, std::vector<PeriodMeasure>(T, p));
}

double MeasureSpec::period_prob(std::size_t s, std::span<const double> a,
                                std::span<const double> b) const {
  const PeriodMeasure& p = periods_.at(s);
  if (const auto* pp = std::get_if<ProductPeriod>(&p)) return rect_prob_product(*pp, a, b);
  if (const auto* cp = std::get_if<CopulaPeriod>(&p)) return rect_prob_copula(*cp, a, b);
  const auto& gp = std::get<GaussianPeriod>(p);
  const GaussianProb r = rect_prob_gaussian(gp.kernel, a, b, gp.options);
  if (!r.converged)
    throw Error(ErrorKind::Numeric,
                "gaussian rectangle probability did not reach tolerance (error " +
                    std::to_string(r.error) + ")");
  return r.value;
}

void MeasureSpec::sample_period(std::size_t s, CounterRng& rng,
                                std::span<double> out) const {
  const PeriodMeasure& p = periods_[s];
  if (const auto* pp = std::get_if<ProductPeriod>(&p)) {
    for (std::size_t j = 0; j < d_; ++j)
      out[j] = pp->marginals[j].quantile(rng.next_uniform());
    return;
  }
  if (const auto* cp = std::get_if<CopulaPeriod>(&p)) {
    if (cp->family == CopulaFamily::Independence) {
      for (std::size_t j = 0; j < d_; ++j)
        out[j] = cp->marginals[j].quantile(rng.next_uniform());
      return;
    }
    // Clayton by sequential conditional inversion.
    const double th = cp->theta;
    double acc = 1.0;  // sum_{i<k} u_i^-theta - (k-1) + 1
    for (std::size_t k = 0; k < d_; ++k) {
      const double w = rng.next_uniform();
      const double expo = -th / (1.0 + static_cast<double>(k) * th);
      const double u = std::pow(acc * (std::pow(w, expo) - 1.0) + 1.0, -1.0 / th);
      acc += std::pow(u, -th) - 1.0;
      out[k] = cp->marginals[k].quantile(u);
    }
    return;
  }
  const auto& k = std::get<GaussianPeriod>(p).kernel;
  // Symmetric square-root free factor: plain Cholesky with zero pivots.
  std::vector<double> L(d_ * d_, 0.0), z(d_);
  for (std::size_t j = 0; j < d_; ++j) {
    double piv = k.covariance[j * d_ + j];
    for (std::size_t q = 0; q < j; ++q) piv -= L[j * d_ + q] * L[j * d_ + q];
    const double ljj = piv > 0.0 ? std::sqrt(piv) : 0.0;
    L[j * d_ + j] = ljj;
    for (std::size_t i = j + 1; i < d_; ++i) {
      double v = k.covariance[i * d_ + j];
      for (std::size_t q = 0; q < j; ++q) v -= L[i * d_ + q] * L[j * d_ + q];
      L[i * d_ + j] = ljj > 0.0 ? v / ljj : 0.0;
    }
  }
  for (double& v : z) v = rng.next_normal();
  for (std::size_t i = 0; i < d_; ++i) {
    double v = k.mean[i];
    for (std::size_t q = 0; q <= i; ++q) v += L[i * d_ + q] * z[q];
    out[i] = v;
  }
}

DriverSample MeasureSpec::sample(std::size_t n, std::uint64_t seed,
                                 Stream stream) const {
  require(n >= 1, ErrorKind::Precondition, "measure sample: n must be >= 1");
  DriverSample out;
  out.values = Tensor3(n, periods(), d_);
  out.seed = seed;
  out.stream = stream;
  parallel_for(n, 1024, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      CounterRng rng(seed, stream, static_cast<std::uint32_t>(i));
      auto path = out.values.path(i);
      for (std::size_t s = 0; s < periods(); ++s)
        sample_period(s, rng, path.subspan(s * d_, d_));
    }
  });
  return out;
}

namespace {

const char* family_name(MarginalFamily f) {
  switch (f) {
    case MarginalFamily::Normal: return "normal";
    case MarginalFamily::Uniform: return "uniform";
    case MarginalFamily::Logistic: return "logistic";
  }
  return "?";
}

void describe_marginals(std::ostream& os, const std::vector<Marginal>& ms) {
  for (const auto& m : ms) os << ' ' << family_name(m.family) << '(' << m.loc << ',' << m.scale << ')';
}

}  // namespace

std::string MeasureSpec::describe() const {
  std::ostringstream os;
  os.precision(17);
  os << "d=" << d_ << " T=" << periods();
  for (std::size_t s = 0; s < periods(); ++s) {
    os << " | s" << s + 1 << ':';
    const PeriodMeasure& p = periods_[s];
    if (const auto* pp = std::get_if<ProductPeriod>(&p)) {
      os << "product";
      describe_marginals(os, pp->marginals);
    } else if (const auto* cp = std::get_if<CopulaPeriod>(&p)) {
      os << (cp->family == CopulaFamily::Clayton ? "clayton(" : "independence(")
         << cp->theta << ')';
      describe_marginals(os, cp->marginals);
    } else {
      os << "gaussian";
    }
  }
  return os.str();
}

double ProbabilityCache::get(std::size_t s, std::span<const double> a,
                             std::span<const double> b) {
  std::string key(sizeof(std::size_t) + 2 * a.size() * sizeof(double), '\0');
  char* p = key.data();
  std::memcpy(p, &s, sizeof s);
  p += sizeof s;
  std::memcpy(p, a.data(), a.size() * sizeof(double));
  p += a.size() * sizeof(double);
  std::memcpy(p, b.data(), b.size() * sizeof(double));
  auto it = table_.find(key);
  if (it != table_.end()) {
    ++hits_;
    return it->second;
  }
  const double v = measure_.period_prob(s, a, b);
  table_.emplace(std::move(key), v);
  return v;
}

}  // namespace treeval
