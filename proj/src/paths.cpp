#include "treeval/paths.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "treeval/error.hpp"
#include "treeval/parallel.hpp"

namespace treeval {

DriverSample sample_driver(std::size_t n, std::size_t d, std::size_t T,
                           std::uint64_t seed, Stream stream) {
  require(n >= 1 && d >= 1 && T >= 1, ErrorKind::Precondition,
          "sample_driver: n, d and T must be >= 1");
  require(n <= 0xFFFFFFFFull, ErrorKind::Precondition,
          "sample_driver: n exceeds the 2^32 lane space");
  DriverSample out;
  out.values = Tensor3(n, T, d);
  out.seed = seed;
  out.stream = stream;
  parallel_for(n, 1024, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      CounterRng rng(seed, stream, static_cast<std::uint32_t>(i));
      for (double& v : out.values.path(i)) v = rng.next_normal();
    }
  });
  return out;
}

double BlackScholesModel::maturity() const {
  return std::accumulate(steps.begin(), steps.end(), 0.0);
}

double BlackScholesModel::discount() const {
  return std::exp(-rate * maturity());
}

void BlackScholesModel::validate() const {
  const std::size_t d = assets();
  require(d >= 1, ErrorKind::Precondition, "black-scholes: no assets");
  require(vols.size() == d * d, ErrorKind::Dimension,
          "black-scholes: vols must be d x d (" + std::to_string(d * d) +
              " entries), got " + std::to_string(vols.size()));
  require(!steps.empty(), ErrorKind::Precondition, "black-scholes: no steps");
  for (double s : steps)
    require(s > 0.0 && std::isfinite(s), ErrorKind::Precondition,
            "black-scholes: steps must be > 0");
  for (double s : initial_prices)
    require(s > 0.0 && std::isfinite(s), ErrorKind::Precondition,
            "black-scholes: initial prices must be > 0");
}

BlackScholesModel BlackScholesModel::independent(std::size_t d, double vol,
                                                 std::vector<double> steps,
                                                 double rate, double s0) {
  BlackScholesModel m;
  m.initial_prices.assign(d, s0);
  m.vols.assign(d * d, 0.0);
  for (std::size_t i = 0; i < d; ++i) m.vols[i * d + i] = vol;
  m.rate = rate;
  m.steps = std::move(steps);
  return m;
}

void advance_bs(const BlackScholesModel& model, std::span<const double> driver,
                std::span<double> prices, std::size_t first) {
  const std::size_t d = model.assets();
  const std::size_t T = model.periods();
  for (std::size_t t = std::max<std::size_t>(first, 1); t <= T; ++t) {
    const double dt = model.steps[t - 1];
    const double sqdt = std::sqrt(dt);
    const double* x = driver.data() + (t - 1) * d;
    for (std::size_t i = 0; i < d; ++i) {
      const double* sigma = model.vols.data() + i * d;
      double shock = 0.0;
      double norm2 = 0.0;
      for (std::size_t k = 0; k < d; ++k) {
        shock += sigma[k] * x[k];
        norm2 += sigma[k] * sigma[k];
      }
      prices[t * d + i] = prices[(t - 1) * d + i] *
                          std::exp(shock * sqdt + (model.rate - 0.5 * norm2) * dt);
    }
  }
}

Tensor3 simulate_bs(const BlackScholesModel& model, const DriverSample& x) {
  model.validate();
  const std::size_t d = model.assets();
  const std::size_t T = model.periods();
  require(x.components() == d && x.periods() == T, ErrorKind::Dimension,
          "simulate_bs: driver is " + std::to_string(x.periods()) + "x" +
              std::to_string(x.components()) + ", model expects " +
              std::to_string(T) + "x" + std::to_string(d));
  Tensor3 prices(x.n(), T + 1, d);
  parallel_for(x.n(), 2048, [&](std::size_t begin, std::size_t end) {
    for (std::size_t p = begin; p < end; ++p) {
      auto row = prices.path(p);
      std::copy(model.initial_prices.begin(), model.initial_prices.end(),
                row.begin());
      advance_bs(model, x.path(p), row);
    }
  });
  return prices;
}

void Payoff::validate() const {
  if (kind == PayoffKind::BRC)
    require(barrier < strike, ErrorKind::Precondition,
            "BRC payoff requires barrier < strike");
  if (kind == PayoffKind::Custom)
    require(static_cast<bool>(custom), ErrorKind::Precondition,
            "custom payoff has no function");
}

double payoff_path(const Payoff& p, const BlackScholesModel& model,
                   std::span<const double> prices) {
  const std::size_t d = model.assets();
  const std::size_t T = model.periods();
  const double* last = prices.data() + T * d;
  const double disc = model.discount();
  switch (p.kind) {
    case PayoffKind::MinPut: {
      const double lo = *std::min_element(last, last + d);
      return disc * std::max(p.strike - lo, 0.0);
    }
    case PayoffKind::MaxCall: {
      const double hi = *std::max_element(last, last + d);
      return disc * std::max(hi - p.strike, 0.0);
    }
    case PayoffKind::BRC: {
      const double path_min =
          *std::min_element(prices.data() + d, prices.data() + (T + 1) * d);
      double cash = p.coupon + p.face;
      if (path_min <= p.barrier) {
        double worst = last[0] / (prices[0] * p.strike);
        for (std::size_t i = 1; i < d; ++i)
          worst = std::min(worst, last[i] / (prices[i] * p.strike));
        cash -= p.face * std::max(1.0 - worst, 0.0);
      }
      return disc * cash;
    }
    case PayoffKind::BermudanPut:
      return disc * std::max(p.strike - last[0], 0.0);
    case PayoffKind::Custom:
      return p.custom(prices);
  }
  throw Error(ErrorKind::Precondition, "unknown payoff kind");
}

std::vector<double> payoff_value(const Payoff& p, const BlackScholesModel& model,
                                 const Tensor3& prices) {
  p.validate();
  require(prices.rows == model.periods() + 1 && prices.cols == model.assets(),
          ErrorKind::Dimension, "payoff_value: price tensor does not match model");
  std::vector<double> out(prices.n);
  for (std::size_t i = 0; i < prices.n; ++i)
    out[i] = payoff_path(p, model, prices.path(i));
  return out;
}

LocalVolModel LocalVolModel::log_black_scholes(double z0, double sigma,
                                               double rate, std::size_t periods,
                                               double maturity) {
  LocalVolModel m;
  m.z0 = {z0};
  m.noise_dim = 1;
  m.periods = periods;
  const double dt = maturity / static_cast<double>(periods);
  const double mu = (rate - 0.5 * sigma * sigma) * dt;
  const double vol = sigma * std::sqrt(dt);
  m.drift = [mu](std::size_t, std::span<const double> z, std::span<double> out) {
    out[0] = z[0] + mu;
  };
  m.diffusion = [vol](std::size_t, std::span<const double>,
                      std::span<double> out) { out[0] = vol; };
  return m;
}

Tensor3 simulate_localvol(const LocalVolModel& model, const DriverSample& x) {
  const std::size_t m = model.state_dim();
  const std::size_t d = model.noise_dim;
  const std::size_t T = model.periods;
  require(m >= 1, ErrorKind::Precondition, "localvol: empty z0");
  require(x.components() == d && x.periods() == T, ErrorKind::Dimension,
          "simulate_localvol: driver shape does not match model (d=" +
              std::to_string(d) + ", T=" + std::to_string(T) + ")");
  require(model.drift && model.diffusion, ErrorKind::Precondition,
          "localvol: drift and diffusion must be set");
  Tensor3 out(x.n(), T + 1, m);
  parallel_for(x.n(), 1024, [&](std::size_t begin, std::size_t end) {
    std::vector<double> mean(m), vol(m * d);
    for (std::size_t p = begin; p < end; ++p) {
      auto z = out.path(p);
      std::copy(model.z0.begin(), model.z0.end(), z.begin());
      const auto xi = x.path(p);
      for (std::size_t t = 1; t <= T; ++t) {
        std::span<const double> prev(z.data() + (t - 1) * m, m);
        model.drift(t - 1, prev, mean);
        model.diffusion(t - 1, prev, vol);
        for (std::size_t k = 0; k < m; ++k) {
          double v = mean[k];
          for (std::size_t j = 0; j < d; ++j)
            v += vol[k * d + j] * xi[(t - 1) * d + j];
          if (!std::isfinite(v))
            throw Error(ErrorKind::Numeric,
                        "simulate_localvol: non-finite state at t=" +
                            std::to_string(t));
          z[t * m + k] = v;
        }
      }
    }
  });
  return out;
}

}  // namespace treeval
