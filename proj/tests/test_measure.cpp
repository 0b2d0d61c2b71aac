#include <doctest.h>

#include <cmath>
#include <random>

#include "treeval/cart.hpp"
#include "treeval/error.hpp"
#include "treeval/measure.hpp"

using namespace treeval;

namespace {

std::vector<double> lo(std::size_t d) { return std::vector<double>(d, -kInf); }
std::vector<double> hi(std::size_t d) { return std::vector<double>(d, kInf); }

ProductPeriod normals(std::size_t d) {
  return ProductPeriod{std::vector<Marginal>(d, Marginal::standard_normal())};
}

double phi_ref(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

}  // namespace

TEST_CASE("marginal laws") {
  const Marginal u{MarginalFamily::Uniform, 1.0, 2.0};
  CHECK(u.cdf(0.5) == 0.0);
  CHECK(u.cdf(2.0) == 0.5);
  CHECK(u.cdf(4.0) == 1.0);
  CHECK(u.quantile(0.25) == 1.5);
  const Marginal l{MarginalFamily::Logistic, 0.0, 1.0};
  CHECK(l.cdf(0.0) == 0.5);
  CHECK(l.cdf(std::log(3.0)) == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(l.cdf(-800) == 0.0);
  CHECK(l.quantile(l.cdf(1.7)) == doctest::Approx(1.7).epsilon(1e-13));
  const Marginal n{MarginalFamily::Normal, 1.0, 2.0};
  CHECK(n.cdf(1.0) == 0.5);
  CHECK(n.cdf(3.0) == doctest::Approx(phi_ref(1.0)).epsilon(1e-15));
  CHECK(n.cdf(kInf) == 1.0);
  CHECK(n.cdf(-kInf) == 0.0);
}

TEST_CASE("product rectangles") {
  CHECK(rect_prob_product(normals(3), lo(3), hi(3)) == 1.0);
  CHECK(rect_prob_product(normals(1), lo(1), std::vector<double>{0.0}) == 0.5);
  CHECK(rect_prob_product(normals(2), std::vector<double>{0, 0}, hi(2)) == 0.25);
  const std::vector<double> a{-1.0, 0.5}, b{2.0, 1.5};
  CHECK(rect_prob_product(normals(2), a, b) ==
        doctest::Approx((phi_ref(2) - phi_ref(-1)) * (phi_ref(1.5) - phi_ref(0.5))).epsilon(1e-14));
  // far tail stays accurate
  CHECK(rect_prob_product(normals(1), std::vector<double>{9.0}, hi(1)) ==
        doctest::Approx(0.5 * std::erfc(9.0 / std::sqrt(2.0))).epsilon(1e-12));
}

TEST_CASE("copula rectangles") {
  CopulaPeriod ind{CopulaFamily::Independence, 1.0,
                   std::vector<Marginal>(3, Marginal::standard_normal())};
  CopulaPeriod clay{CopulaFamily::Clayton, 2.0,
                    std::vector<Marginal>(3, Marginal::standard_normal())};
  CHECK(rect_prob_copula(ind, lo(3), hi(3)) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(rect_prob_copula(clay, lo(3), hi(3)) == doctest::Approx(1.0).epsilon(1e-15));

  std::mt19937_64 g(1);
  std::normal_distribution<double> nd;
  double worst_ind = 0, worst_add = 0;
  for (int k = 0; k < 1000; ++k) {
    std::vector<double> a(3), b(3);
    for (int j = 0; j < 3; ++j) {
      double p = nd(g), q = nd(g);
      if (p > q) std::swap(p, q);
      a[j] = (g() % 5 == 0) ? -kInf : p;
      b[j] = (g() % 5 == 0) ? kInf : q;
    }
    worst_ind = std::max(worst_ind, std::fabs(rect_prob_copula(ind, a, b) -
                                              rect_prob_product(normals(3), a, b)));
    // split coordinate 0 at an interior point
    const double z = std::isfinite(a[0]) ? (std::isfinite(b[0]) ? 0.5 * (a[0] + b[0]) : a[0] + 1)
                                         : (std::isfinite(b[0]) ? b[0] - 1 : 0.0);
    auto b1 = b, a2 = a;
    b1[0] = z;
    a2[0] = z;
    const double whole = rect_prob_copula(clay, a, b);
    worst_add = std::max(worst_add, std::fabs(rect_prob_copula(clay, a, b1) +
                                              rect_prob_copula(clay, a2, b) - whole));
    CHECK(whole >= 0.0);
    CHECK(whole <= 1.0);
    auto wide = b;
    wide[1] = kInf;
    CHECK(rect_prob_copula(clay, a, wide) >= whole - 1e-15);
  }
  CHECK(worst_ind <= 1e-12);
  CHECK(worst_add <= 1e-10);

  CopulaPeriod big{CopulaFamily::Clayton, 1.0,
                   std::vector<Marginal>(26, Marginal::standard_normal())};
  CHECK_THROWS_AS(rect_prob_copula(big, lo(26), hi(26)), Error);
  CopulaPeriod bad = clay;
  bad.theta = -1;
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("Clayton margins are uniform") {
  CopulaPeriod clay{CopulaFamily::Clayton, 3.0, {}};
  for (double u : {0.1, 0.37, 0.9}) {
    const std::vector<double> v{u, 1.0};
    CHECK(clay.copula(v) == doctest::Approx(u).epsilon(1e-14));
    const std::vector<double> z{0.0, u};
    CHECK(clay.copula(z) == 0.0);
  }
}

TEST_CASE("Gaussian rectangles") {
  GaussianKernelSpec one{{0.0}, {1.0}};
  CHECK(rect_prob_gaussian(one, lo(1), std::vector<double>{0.0}).value == 0.5);

  GaussianKernelSpec diag{{0.5, -1.0}, {4.0, 0.0, 0.0, 0.25}};
  const std::vector<double> a{0.0, -1.2}, b{1.0, kInf};
  const double expect = (phi_ref(0.25) - phi_ref(-0.25)) * (1.0 - phi_ref(-0.4));
  CHECK(rect_prob_gaussian(diag, a, b).value == doctest::Approx(expect).epsilon(1e-12));

  GaussianKernelSpec corr{{0.0, 0.0}, {1.0, 0.5, 0.5, 1.0}};
  const auto r = rect_prob_gaussian(corr, lo(2), std::vector<double>{0.0, 0.0});
  // orthant probability 1/4 + asin(rho) / (2 pi)
  CHECK(std::fabs(r.value - 1.0 / 3.0) <= 1e-6);
  CHECK(r.converged);

  const auto full = rect_prob_gaussian(corr, lo(2), hi(2));
  CHECK(std::fabs(full.value - 1.0) <= 1e-6);

  GaussianKernelSpec three{{0.1, 0.2, -0.3},
                           {1.0, 0.3, 0.2, 0.3, 2.0, -0.4, 0.2, -0.4, 1.5}};
  const std::vector<double> a3{-0.5, -1.0, -kInf}, b3{1.0, 0.5, 0.0};
  auto b31 = b3, a32 = a3;
  b31[1] = -0.2;
  a32[1] = -0.2;
  const auto p = rect_prob_gaussian(three, a3, b3);
  const auto p1 = rect_prob_gaussian(three, a3, b31);
  const auto p2 = rect_prob_gaussian(three, a32, b3);
  CHECK(std::fabs(p1.value + p2.value - p.value) <= p.error + p1.error + p2.error + 1e-9);

  GaussianKernelSpec degenerate{{0.3, 0.0}, {0.0, 0.0, 0.0, 1.0}};
  CHECK(rect_prob_gaussian(degenerate, std::vector<double>{0.0, -kInf},
                           std::vector<double>{1.0, 0.0}).value == 0.5);
  CHECK(rect_prob_gaussian(degenerate, std::vector<double>{0.5, -kInf},
                           std::vector<double>{1.0, 0.0}).value == 0.0);

  GaussianKernelSpec notpsd{{0.0, 0.0}, {1.0, 2.0, 2.0, 1.0}};
  CHECK_THROWS_AS(notpsd.validate(), Error);
}

TEST_CASE("MeasureSpec sampling and bookkeeping") {
  const auto m = MeasureSpec::standard_normal(2, 3);
  CHECK(m.components() == 2);
  CHECK(m.periods() == 3);
  const auto s = m.sample(50, 9, Stream::Test);
  const auto d = sample_driver(50, 2, 3, 9, Stream::Test);
  CHECK(s.values.data == d.values.data);
  CHECK(m.period_prob(1, lo(2), hi(2)) == 1.0);
  CHECK_THROWS_AS(MeasureSpec(2, {normals(3)}), Error);
  CHECK(m.describe() == MeasureSpec::standard_normal(2, 3).describe());

  // Clayton sampler reproduces the copula CDF at one point.
  CopulaPeriod clay{CopulaFamily::Clayton, 2.0,
                    std::vector<Marginal>(2, Marginal{MarginalFamily::Uniform, 0.0, 1.0})};
  const MeasureSpec cm(2, {clay});
  const std::size_t n = 200000;
  const auto cs = cm.sample(n, 3, Stream::Test);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < n; ++i)
    hits += (cs.values.at(i, 0, 0) <= 0.3 && cs.values.at(i, 0, 1) <= 0.6) ? 1 : 0;
  const double p = clay.copula(std::vector<double>{0.3, 0.6});
  const double se = std::sqrt(p * (1 - p) / n);
  CHECK(std::fabs(static_cast<double>(hits) / n - p) <= 4 * se);

  // Gaussian sampler matches its covariance.
  GaussianPeriod gp{GaussianKernelSpec{{1.0, -1.0}, {1.0, 0.6, 0.6, 2.0}}, {}};
  const MeasureSpec gm(2, {gp});
  const auto gs = gm.sample(n, 4, Stream::Test);
  double m0 = 0, m1 = 0, c01 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    m0 += gs.values.at(i, 0, 0);
    m1 += gs.values.at(i, 0, 1);
  }
  m0 /= n;
  m1 /= n;
  for (std::size_t i = 0; i < n; ++i)
    c01 += (gs.values.at(i, 0, 0) - m0) * (gs.values.at(i, 0, 1) - m1);
  CHECK(m0 == doctest::Approx(1.0).epsilon(0.01));
  CHECK(m1 == doctest::Approx(-1.0).epsilon(0.01));
  CHECK(c01 / (n - 1) == doctest::Approx(0.6).epsilon(0.03));
}

TEST_CASE("probability cache never changes values") {
  CopulaPeriod clay{CopulaFamily::Clayton, 1.5,
                    std::vector<Marginal>(2, Marginal::standard_normal())};
  const MeasureSpec m(2, {normals(2), clay});
  ProbabilityCache cache(m);
  const std::vector<double> a{-0.5, 0.1}, b{0.7, kInf};
  for (std::size_t s = 0; s < 2; ++s) {
    const double direct = m.period_prob(s, a, b);
    CHECK(cache.get(s, a, b) == direct);
    CHECK(cache.get(s, a, b) == direct);
  }
  CHECK(cache.hits() == 2);
  CHECK(cache.size() == 2);
}
