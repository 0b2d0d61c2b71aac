#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "treeval/error.hpp"
#include "treeval/measure.hpp"
#include "treeval/normal.hpp"
#include "treeval/rng.hpp"

namespace treeval {

namespace {

// Lower-triangular factor of a PSD matrix; rows whose pivot vanishes are
// marked degenerate (their variable is a linear function of earlier ones).
struct Cholesky {
  std::size_t m = 0;
  std::vector<double> L;
  std::vector<char> degenerate;
};

Cholesky cholesky_psd(const std::vector<double>& cov, std::size_t m) {
  Cholesky c;
  c.m = m;
  c.L.assign(m * m, 0.0);
  c.degenerate.assign(m, 0);
  double scale = 0.0;
  for (std::size_t i = 0; i < m; ++i) scale = std::max(scale, cov[i * m + i]);
  const double eps = 1e-12 * std::max(scale, 1e-300);
  for (std::size_t j = 0; j < m; ++j) {
    double pivot = cov[j * m + j];
    for (std::size_t k = 0; k < j; ++k) pivot -= c.L[j * m + k] * c.L[j * m + k];
    if (pivot < -1e-10 * std::max(1.0, scale))
      throw Error(ErrorKind::Numeric, "gaussian kernel: covariance is not PSD");
    if (pivot <= eps) {
      c.degenerate[j] = 1;
      continue;
    }
    const double ljj = std::sqrt(pivot);
    c.L[j * m + j] = ljj;
    for (std::size_t i = j + 1; i < m; ++i) {
      double v = cov[i * m + j];
      for (std::size_t k = 0; k < j; ++k) v -= c.L[i * m + k] * c.L[j * m + k];
      c.L[i * m + j] = v / ljj;
    }
  }
  return c;
}

}  // namespace

void GaussianKernelSpec::validate() const {
  const std::size_t m = dim();
  require(m >= 1, ErrorKind::Precondition, "gaussian kernel: empty mean");
  require(covariance.size() == m * m, ErrorKind::Dimension,
          "gaussian kernel: covariance must be m x m");
  double scale = 0.0;
  for (std::size_t i = 0; i < m; ++i) scale = std::max(scale, std::fabs(covariance[i * m + i]));
  const double tol = 1e-10 * std::max(1.0, scale);
  for (std::size_t i = 0; i < m; ++i) {
    require(covariance[i * m + i] >= -tol, ErrorKind::Numeric,
            "gaussian kernel: negative variance");
    for (std::size_t j = 0; j < i; ++j)
      require(std::fabs(covariance[i * m + j] - covariance[j * m + i]) <= tol,
              ErrorKind::Numeric, "gaussian kernel: covariance not symmetric");
  }
  cholesky_psd(covariance, m);
}

namespace {

constexpr unsigned kPrimes[] = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29, 31, 37, 41,
                                43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97, 101,
                                103, 107, 109, 113, 127, 131, 137, 139, 149, 151};

// Genz separation-of-variables integrand at w in [0,1)^m.
double sov_integrand(const Cholesky& ch, std::span<const double> lo,
                     std::span<const double> hi, std::span<const double> w,
                     std::vector<double>& y) {
  const std::size_t m = ch.m;
  double f = 1.0;
  for (std::size_t i = 0; i < m; ++i) {
    double s = 0.0;
    for (std::size_t k = 0; k < i; ++k) s += ch.L[i * m + k] * y[k];
    if (ch.degenerate[i]) {
      if (!(lo[i] < s && s <= hi[i])) return 0.0;
      y[i] = 0.0;
      continue;
    }
    const double lii = ch.L[i * m + i];
    const double d = normal_cdf((lo[i] - s) / lii);
    const double e = normal_cdf((hi[i] - s) / lii);
    f *= e - d;
    if (f <= 0.0) return 0.0;
    if (i + 1 < m) {
      const double u = std::clamp(d + w[i] * (e - d), 1e-300, 1.0 - 1e-16);
      y[i] = normal_quantile(u);
    }
  }
  return f;
}

}  // namespace

GaussianProb rect_prob_gaussian(const GaussianKernelSpec& k,
                                std::span<const double> a,
                                std::span<const double> b,
                                const GaussianOptions& opts) {
  k.validate();
  const std::size_t m = k.dim();
  require(a.size() == m && b.size() == m, ErrorKind::Dimension,
          "rect_prob_gaussian: bounds do not match kernel dimension");
  for (std::size_t i = 0; i < m; ++i)
    require(a[i] < b[i], ErrorKind::Precondition,
            "rect_prob_gaussian: requires a < b componentwise");

  // Zero-variance coordinates are point masses at their mean.
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < m; ++i) {
    if (k.covariance[i * m + i] <= 0.0) {
      const double mu = k.mean[i];
      if (!(a[i] < mu && mu <= b[i])) return {0.0, 0.0, true};
    } else {
      keep.push_back(i);
    }
  }
  const std::size_t r = keep.size();
  if (r == 0) return {1.0, 0.0, true};

  std::vector<double> lo(r), hi(r), cov(r * r);
  bool diagonal = true;
  for (std::size_t p = 0; p < r; ++p) {
    lo[p] = a[keep[p]] - k.mean[keep[p]];
    hi[p] = b[keep[p]] - k.mean[keep[p]];
    for (std::size_t q = 0; q < r; ++q) {
      cov[p * r + q] = k.covariance[keep[p] * m + keep[q]];
      if (p != q && cov[p * r + q] != 0.0) diagonal = false;
    }
  }
  if (diagonal) {
    double prob = 1.0;
    for (std::size_t p = 0; p < r; ++p) {
      const double sd = std::sqrt(cov[p * r + p]);
      prob *= normal_cdf(hi[p] / sd) - normal_cdf(lo[p] / sd);
    }
    return {prob, 0.0, true};
  }

  const Cholesky ch = cholesky_psd(cov, r);
  require(r <= std::size(kPrimes), ErrorKind::Precondition,
          "rect_prob_gaussian: dimension too large for the lattice rule");
  std::vector<double> gen(r);
  for (std::size_t i = 0; i < r; ++i) {
    const double s = std::sqrt(static_cast<double>(kPrimes[i]));
    gen[i] = s - std::floor(s);
  }

  const std::size_t shifts = std::max<std::size_t>(opts.shifts, 8);
  std::vector<double> w(r), wa(r), y(r), shift(r), est(shifts);
  GaussianProb result;
  for (std::size_t n = 251, round = 0;; n *= 2, ++round) {
    CounterRng rng(opts.seed, Stream::Qmc, static_cast<std::uint32_t>(round));
    for (std::size_t q = 0; q < shifts; ++q) {
      for (double& s : shift) s = rng.next_uniform();
      double sum = 0.0;
      for (std::size_t j = 1; j <= n; ++j) {
        for (std::size_t i = 0; i < r; ++i) {
          double x = static_cast<double>(j) * gen[i] + shift[i];
          x -= std::floor(x);
          w[i] = std::fabs(2.0 * x - 1.0);
          wa[i] = 1.0 - w[i];
        }
        sum += 0.5 * (sov_integrand(ch, lo, hi, w, y) +
                      sov_integrand(ch, lo, hi, wa, y));
      }
      est[q] = sum / static_cast<double>(n);
    }
    double mean = 0.0;
    for (double e : est) mean += e;
    mean /= static_cast<double>(shifts);
    double var = 0.0;
    for (double e : est) var += (e - mean) * (e - mean);
    var /= static_cast<double>(shifts * (shifts - 1));
    result.value = std::clamp(mean, 0.0, 1.0);
    result.error = 3.0 * std::sqrt(var);
    if (result.error <= opts.abs_tol) {
      result.converged = true;
      return result;
    }
    if (2 * n > opts.max_points) {
      result.converged = false;
      return result;
    }
  }
}

}  // namespace treeval
