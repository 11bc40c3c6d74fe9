#pragma once

#include <span>
#include <string>
#include <vector>

#include "sste/types.hpp"

namespace sste {

struct ArmaOrders {
  int p = 0;  // AR order
  int q = 0;  // MA order
  int d = 0;  // differencing applied before fitting

  bool operator==(const ArmaOrders&) const = default;
};

// Model convention: x_t = sum_i phi[i] x_{t-i} + eps_t - sum_j theta[j] eps_{t-j},
// on the mean-centered (and, when d > 0, differenced) series.
struct ArmaParams {
  std::vector<double> phi;
  std::vector<double> theta;
  double sigma2 = 0.0;  // white-noise variance
};

struct DifferenceResult {
  std::vector<double> values;   // the d-times-differenced series
  std::vector<double> initial;  // first d original values, kept for inversion
  int d = 0;
};

// Applies the first-difference operator d times. Requires length > d.
DifferenceResult difference(std::span<const double> values, int d);

// Exact inverse of difference() over the full series.
std::vector<double> undifference_series(const DifferenceResult& diff);

// Brings a one-step prediction on the d-differenced scale back to the
// original scale, given the most recent original values (at least d of them,
// oldest first).
double undifference(double predicted, int d, std::span<const double> recent_originals);

// rho(k) = gamma(k)/gamma(0), gamma(k) = (1/n) sum (v_i - mean)(v_{i+k} - mean).
// Index 0 is always 1. Throws DegenerateSeries when the series is constant.
std::vector<double> sample_acf(std::span<const double> values, int max_lag);

// Partial autocorrelations at lags 1..max_lag via the Durbin-Levinson
// recursion (index 0 unused, set to 1 for alignment with sample_acf).
std::vector<double> sample_pacf(std::span<const double> values, int max_lag);

// Yule-Walker AR(m) coefficients from an autocorrelation sequence.
std::vector<double> levinson_ar(const std::vector<double>& acf, int order);

// Gaussian AIC up to an additive constant: n*ln(sigma2) + 2k.
double aic(double sigma2_hat, std::size_t n, int k);

// True when the polynomial 1 - c1 z - ... - cm z^m has all roots strictly
// outside the unit circle (step-down reflection-coefficient test).
bool poly_stable(std::span<const double> coeffs);

enum class SelectionPath {
  AcfCutoff,   // ACF cuts off, PACF tails off -> pure MA
  PacfCutoff,  // PACF cuts off, ACF tails off -> pure AR
  AicGrid,     // both tail off (or the correlograms are inconclusive)
  Fallback,    // differenced series is constant; deterministic stub model
};

struct OrderSelection {
  ArmaOrders orders;
  SelectionPath path = SelectionPath::AicGrid;
};

// Order selection: picks d first (smallest d in {0,1,2} making the series
// stationarity-plausible), then classifies the correlograms with the
// 1.96/sqrt(n) band, falling back to an AIC grid search when neither cuts
// off cleanly. Requires at least 20 observations.
OrderSelection select_orders(std::span<const double> values, int p_max = 5, int q_max = 5);

struct FitResult {
  ArmaParams params;
  double mean = 0.0;      // sample mean removed before fitting
  bool converged = true;  // false: refinement hit its cap; params are the HR estimate
};

// Batch initialization: Hannan-Rissanen two-stage regression followed by
// conditional-sum-of-squares refinement (derivative-free compass search).
// sigma2 is the mean squared in-sample residual. Differencing per orders.d
// happens internally; requires 4(p+q)+10 post-differencing observations.
FitResult fit_batch(std::span<const double> values, const ArmaOrders& orders);

// In-sample one-step CSS residuals for the centered series `w` (zeros over
// the first p conditioning steps).
std::vector<double> css_residuals(std::span<const double> w, const ArmaParams& params);

struct UserModel {
  ArmaOrders orders;
  ArmaParams params;
  double mean = 0.0;
  bool converged = true;
};

// select_orders + fit_batch with a deterministic mean-only fallback for
// constant series. Throws InsufficientHistory when the series is too short.
UserModel fit_user_model(std::span<const double> values, int p_max = 5, int q_max = 5);

// One JSON object: {user, p, q, d, phi[], theta[], sigma2, mean}.
std::string model_json_line(const PersonId& user, const UserModel& model);

}  // namespace sste
