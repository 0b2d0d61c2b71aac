#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "treeval/rng.hpp"

namespace treeval {

/// Dense n x rows x cols array of reals, row-major per path:
/// element (i, r, c) lives at ((i * rows) + r) * cols + c.
struct Tensor3 {
  std::size_t n = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Tensor3() = default;
  Tensor3(std::size_t n_, std::size_t rows_, std::size_t cols_)
      : n(n_), rows(rows_), cols(cols_), data(n_ * rows_ * cols_, 0.0) {}

  std::size_t stride() const { return rows * cols; }
  double& at(std::size_t i, std::size_t r, std::size_t c) {
    return data[(i * rows + r) * cols + c];
  }
  double at(std::size_t i, std::size_t r, std::size_t c) const {
    return data[(i * rows + r) * cols + c];
  }
  std::span<const double> path(std::size_t i) const {
    return {data.data() + i * stride(), stride()};
  }
  std::span<double> path(std::size_t i) {
    return {data.data() + i * stride(), stride()};
  }
};

/// n paths of the driver X = (X_1..X_T), each X_s in R^d. Stored as a
/// Tensor3 with rows = periods and cols = components, so the flattened
/// coordinate of (component j, period s) is s*d + j (0-based) and the first
/// t*d entries of a path are the prefix x_1..x_t.
struct DriverSample {
  Tensor3 values;
  std::uint64_t seed = 0;
  Stream stream = Stream::Train;

  std::size_t n() const { return values.n; }
  std::size_t periods() const { return values.rows; }
  std::size_t components() const { return values.cols; }
  std::size_t dim() const { return values.stride(); }
  std::span<const double> path(std::size_t i) const { return values.path(i); }
};

/// Draws n i.i.d. standard normal paths. Path i uses Philox lane i of the
/// given stream, so every draw is reproducible bit-for-bit and a prefix of a
/// larger sample equals the smaller sample.
DriverSample sample_driver(std::size_t n, std::size_t d, std::size_t T,
                           std::uint64_t seed, Stream stream = Stream::Train);

struct BlackScholesModel {
  std::vector<double> initial_prices;  // S_{i,0}
  std::vector<double> vols;            // d x d, row i is sigma_i
  double rate = 0.0;
  std::vector<double> steps;           // Delta_1..Delta_T in years

  std::size_t assets() const { return initial_prices.size(); }
  std::size_t periods() const { return steps.size(); }
  double maturity() const;
  double discount() const;  // exp(-r * sum Delta)
  void validate() const;

  /// S_0 = 1, sigma_i = vol * e_i, r = 0.
  static BlackScholesModel independent(std::size_t d, double vol,
                                       std::vector<double> steps,
                                       double rate = 0.0, double s0 = 1.0);
};

/// Price paths n x (T+1) x d; period 0 holds the initial prices.
Tensor3 simulate_bs(const BlackScholesModel& model, const DriverSample& x);

/// Advances one path of prices in place: `prices` holds (T+1) x d entries
/// and periods first..T are recomputed from `driver` (T x d).
void advance_bs(const BlackScholesModel& model, std::span<const double> driver,
                std::span<double> prices, std::size_t first = 1);

enum class PayoffKind { MinPut, MaxCall, BRC, BermudanPut, Custom };

struct Payoff {
  PayoffKind kind = PayoffKind::MinPut;
  double strike = 1.0;
  double barrier = 0.6;
  double coupon = 0.0;
  double face = 1.0;
  /// Used for PayoffKind::Custom: receives one price path, (T+1) x d, and
  /// returns the discounted cash flow.
  std::function<double(std::span<const double>)> custom;

  void validate() const;
};

/// Discounted payoff of one (T+1) x d price path. BermudanPut evaluates
/// its terminal exercise value (K - S_{1,T})^+.
double payoff_path(const Payoff& p, const BlackScholesModel& model,
                   std::span<const double> prices);

std::vector<double> payoff_value(const Payoff& p, const BlackScholesModel& model,
                                 const Tensor3& prices);

/// Z_t = drift(t-1, Z_{t-1}) + diffusion(t-1, Z_{t-1}) X_t, Z_0 = z0.
struct LocalVolModel {
  std::vector<double> z0;
  std::size_t noise_dim = 1;  // d, columns of the diffusion matrix
  std::size_t periods = 1;    // T
  /// drift(t, z, out): out has size m.
  std::function<void(std::size_t, std::span<const double>, std::span<double>)>
      drift;
  /// diffusion(t, z, out): out is m x d row-major.
  std::function<void(std::size_t, std::span<const double>, std::span<double>)>
      diffusion;

  std::size_t state_dim() const { return z0.size(); }

  /// Log-price of a single Black-Scholes asset on a uniform grid:
  /// drift z + (r - sigma^2/2) dt, diffusion sigma sqrt(dt).
  static LocalVolModel log_black_scholes(double z0, double sigma, double rate,
                                         std::size_t periods, double maturity);
};

/// Log-price paths n x (T+1) x m.
Tensor3 simulate_localvol(const LocalVolModel& model, const DriverSample& x);

}  // namespace treeval
