#pragma once

#include <deque>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "sste/arma.hpp"
#include "sste/types.hpp"

namespace sste {

struct KalmanOptions {
  double q_delta = 0.0;          // process noise Q = q_delta * I; 0 tracks the source design
  double interval_floor = 60.0;  // seconds; negative predictions clamp here
};

// Per-user filter state. The AR coefficient vector is the tracked state; the
// MA coefficients and noise variance stay fixed after batch initialization.
// History and residuals live on the mean-centered, differenced scale and are
// stored newest first. One state must be updated sequentially; distinct
// users' states are independent.
struct KalmanState {
  Eigen::VectorXd phi_hat;      // current coefficient estimate, length p
  Eigen::MatrixXd P;            // estimate-error covariance, p x p
  Eigen::MatrixXd Q;            // process-noise covariance, p x p
  double r_meas = 0.0;          // measurement-noise variance (1 + sum theta^2) * sigma2
  std::vector<double> theta;    // MA coefficients, length q, fixed
  std::deque<double> residuals; // q most recent innovations, newest first
  std::deque<double> history;   // p most recent observations, newest first
  double series_mean = 0.0;
  int d = 0;                    // differencing order of the modeled series
  std::deque<double> orig_tail; // d most recent original-scale values, oldest first

  int p() const { return static_cast<int>(phi_hat.size()); }
  int q() const { return static_cast<int>(theta.size()); }
};

struct TimePrediction {
  double interval_hat = 0.0;       // predicted next interval, original scale
  EpochSeconds event_time_hat = 0; // last event time + max(interval_hat, floor)
  bool clamped = false;            // true when the positivity floor fired
};

// Builds the filter state from a batch fit: phi_hat from the fit, P all ones,
// Q = q_delta * I, r = (1 + sum theta_i^2) * sigma2, history filled from the
// warmup tail, residuals zero-initialized. The warmup is original-scale and
// must supply at least p observations after differencing.
KalmanState init_state(const UserModel& model, std::span<const double> warmup,
                       const KalmanOptions& opts = {});

// One filter step on a new observation: gain K = (P+Q)H [H'(P+Q)H + r]^-1,
// P <- (I - K H')(P+Q), phi <- phi + K (x - H'phi), then the observation and
// its innovation are pushed into the buffers. The bracketed scalar below
// 1e-12 skips the coefficient update for the step. A non-finite intermediate
// throws NumericError and leaves the state untouched.
void learn_by_kf(KalmanState& state, double x_new);

// Best next-interval estimate: phi'H - sum theta_i eps_{t-i+1}, plus the
// series mean, undifferenced back to the original scale when d > 0.
double predict_interval(const KalmanState& state);

// Full step: absorb the interval that just ended at last_event_time (through
// the filter when adapt is true, through the buffers only for the frozen
// baseline), then predict the next interval and event time.
TimePrediction predict_time(KalmanState& state, EpochSeconds last_event_time,
                            double x_new, const KalmanOptions& opts = {},
                            bool adapt = true);

// Resumable snapshot: {user, phi_hat[], P[][], theta[], r_meas, residuals[],
// history[], mean, d, orig_tail[]}.
std::string state_json_line(const PersonId& user, const KalmanState& state);
std::pair<PersonId, KalmanState> state_from_json_line(const std::string& line);

}  // namespace sste
