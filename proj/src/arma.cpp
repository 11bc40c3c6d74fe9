#include "sste/arma.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace sste {

namespace {

constexpr double kSigma2Floor = 1e-12;

double mean_of(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double variance_of(std::span<const double> v) {
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size());
}

bool nearly_constant(std::span<const double> v) {
  if (v.size() < 2) return true;
  const double m = mean_of(v);
  return variance_of(v) <= 1e-12 * (1.0 + m * m);
}

}  // namespace

DifferenceResult difference(std::span<const double> values, int d) {
  if (d < 0) throw std::invalid_argument("difference: d must be >= 0");
  if (static_cast<int>(values.size()) <= d) {
    throw InsufficientHistory("difference: series of length " +
                              std::to_string(values.size()) +
                              " cannot be differenced " + std::to_string(d) + " times");
  }
  DifferenceResult out;
  out.d = d;
  out.initial.assign(values.begin(), values.begin() + d);
  out.values.assign(values.begin(), values.end());
  for (int level = 0; level < d; ++level) {
    for (std::size_t i = 0; i + 1 < out.values.size(); ++i) {
      out.values[i] = out.values[i + 1] - out.values[i];
    }
    out.values.pop_back();
  }
  return out;
}

std::vector<double> undifference_series(const DifferenceResult& diff) {
  std::vector<double> level = diff.values;
  for (int k = diff.d - 1; k >= 0; --k) {
    // first value of difference level k, rebuilt from the retained originals
    std::vector<double> firsts(diff.initial.begin(), diff.initial.end());
    for (int lvl = 0; lvl < k; ++lvl) {
      for (std::size_t i = 0; i + 1 < firsts.size(); ++i) {
        firsts[i] = firsts[i + 1] - firsts[i];
      }
      firsts.pop_back();
    }
    std::vector<double> rebuilt;
    rebuilt.reserve(level.size() + 1);
    rebuilt.push_back(firsts.empty() ? 0.0 : firsts.front());
    for (double dv : level) rebuilt.push_back(rebuilt.back() + dv);
    level = std::move(rebuilt);
  }
  return level;
}

double undifference(double predicted, int d, std::span<const double> recent_originals) {
  if (d == 0) return predicted;
  if (static_cast<int>(recent_originals.size()) < d) {
    throw InsufficientHistory("undifference: need at least d recent original values");
  }
  // last value of each difference level 0..d-1, from the last d originals
  std::vector<double> work(recent_originals.end() - d, recent_originals.end());
  std::vector<double> level_last(d);
  for (int k = 0; k < d; ++k) {
    level_last[k] = work.back();
    for (std::size_t i = 0; i + 1 < work.size(); ++i) work[i] = work[i + 1] - work[i];
    work.pop_back();
  }
  double value = predicted;
  for (int k = d - 1; k >= 0; --k) value += level_last[k];
  return value;
}

std::vector<double> sample_acf(std::span<const double> values, int max_lag) {
  const std::size_t n = values.size();
  if (n < 2) throw InsufficientHistory("sample_acf: need at least 2 observations");
  if (max_lag < 0 || static_cast<std::size_t>(max_lag) + 1 > n) {
    throw InsufficientHistory("sample_acf: max_lag too large for series length");
  }
  const double m = mean_of(values);
  double gamma0 = 0.0;
  for (double x : values) gamma0 += (x - m) * (x - m);
  gamma0 /= static_cast<double>(n);
  if (gamma0 <= 1e-12 * (1.0 + m * m)) {
    throw DegenerateSeries("sample_acf: constant series has no autocorrelation");
  }
  std::vector<double> rho(max_lag + 1, 0.0);
  rho[0] = 1.0;
  for (int k = 1; k <= max_lag; ++k) {
    double g = 0.0;
    for (std::size_t i = 0; i + k < n; ++i) g += (values[i] - m) * (values[i + k] - m);
    rho[k] = (g / static_cast<double>(n)) / gamma0;
  }
  return rho;
}

namespace {

// Durbin-Levinson. Returns the full triangle's diagonal (PACF) and, when
// ar_out is non-null, the AR coefficients of the final order.
std::vector<double> durbin_levinson(const std::vector<double>& rho, int order,
                                    std::vector<double>* ar_out) {
  std::vector<double> pacf(order + 1, 0.0);
  pacf[0] = 1.0;
  std::vector<double> phi(order + 1, 0.0), prev(order + 1, 0.0);
  double err = 1.0;  // prediction error variance ratio
  for (int k = 1; k <= order; ++k) {
    double num = rho[k];
    for (int j = 1; j < k; ++j) num -= prev[j] * rho[k - j];
    const double kk = (err <= 1e-14) ? 0.0 : num / err;
    phi[k] = kk;
    for (int j = 1; j < k; ++j) phi[j] = prev[j] - kk * prev[k - j];
    err *= (1.0 - kk * kk);
    pacf[k] = kk;
    prev = phi;
  }
  if (ar_out) ar_out->assign(phi.begin() + 1, phi.begin() + order + 1);
  return pacf;
}

}  // namespace

std::vector<double> sample_pacf(std::span<const double> values, int max_lag) {
  const auto rho = sample_acf(values, max_lag);
  return durbin_levinson(rho, max_lag, nullptr);
}

std::vector<double> levinson_ar(const std::vector<double>& acf, int order) {
  if (static_cast<int>(acf.size()) < order + 1) {
    throw std::invalid_argument("levinson_ar: acf shorter than requested order");
  }
  std::vector<double> ar;
  durbin_levinson(acf, order, &ar);
  return ar;
}

double aic(double sigma2_hat, std::size_t n, int k) {
  if (!(sigma2_hat > 0.0)) throw std::invalid_argument("aic: sigma2 must be > 0");
  if (n == 0) throw std::invalid_argument("aic: n must be > 0");
  return static_cast<double>(n) * std::log(sigma2_hat) + 2.0 * k;
}

bool poly_stable(std::span<const double> coeffs) {
  // step-down recursion: stable iff every reflection coefficient is < 1
  std::vector<double> a(coeffs.begin(), coeffs.end());
  for (int k = static_cast<int>(a.size()); k >= 1; --k) {
    const double r = a[k - 1];
    if (!(std::abs(r) < 1.0 - 1e-9)) return false;
    if (k == 1) break;
    const double denom = 1.0 - r * r;
    std::vector<double> b(k - 1);
    for (int i = 0; i < k - 1; ++i) b[i] = (a[i] + r * a[k - 2 - i]) / denom;
    a = std::move(b);
  }
  return true;
}

std::vector<double> css_residuals(std::span<const double> w, const ArmaParams& params) {
  const int p = static_cast<int>(params.phi.size());
  const int q = static_cast<int>(params.theta.size());
  const std::size_t n = w.size();
  std::vector<double> eps(n, 0.0);
  for (std::size_t t = static_cast<std::size_t>(p); t < n; ++t) {
    double pred = 0.0;
    for (int i = 0; i < p; ++i) pred += params.phi[i] * w[t - 1 - i];
    for (int j = 0; j < q; ++j) {
      pred -= params.theta[j] * (t >= static_cast<std::size_t>(j + 1) ? eps[t - 1 - j] : 0.0);
    }
    eps[t] = w[t] - pred;
  }
  return eps;
}

namespace {

double css_objective(std::span<const double> w, const std::vector<double>& x, int p, int q) {
  std::span<const double> phi(x.data(), p);
  std::span<const double> theta(x.data() + p, q);
  if (p > 0 && !poly_stable(phi)) return std::numeric_limits<double>::infinity();
  if (q > 0 && !poly_stable(theta)) return std::numeric_limits<double>::infinity();
  ArmaParams pr;
  pr.phi.assign(phi.begin(), phi.end());
  pr.theta.assign(theta.begin(), theta.end());
  const auto eps = css_residuals(w, pr);
  double s = 0.0;
  for (std::size_t t = static_cast<std::size_t>(p); t < eps.size(); ++t) s += eps[t] * eps[t];
  return std::isfinite(s) ? s : std::numeric_limits<double>::infinity();
}

// Shrinks a coefficient vector toward zero until the step-down test passes.
void force_stable(std::vector<double>& c) {
  if (c.empty()) return;
  for (int tries = 0; tries < 400 && !poly_stable(c); ++tries) {
    for (double& v : c) v *= 0.95;
  }
  if (!poly_stable(c)) std::fill(c.begin(), c.end(), 0.0);
}

// Least squares via normal equations; columns are few (<= 10).
std::vector<double> ols(const std::vector<std::vector<double>>& cols,
                        const std::vector<double>& y) {
  const int k = static_cast<int>(cols.size());
  const int n = static_cast<int>(y.size());
  Eigen::MatrixXd X(n, k);
  for (int j = 0; j < k; ++j) {
    for (int i = 0; i < n; ++i) X(i, j) = cols[j][i];
  }
  Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(y.data(), n);
  Eigen::VectorXd beta =
      (X.transpose() * X + 1e-10 * Eigen::MatrixXd::Identity(k, k)).ldlt().solve(
          X.transpose() * b);
  return std::vector<double>(beta.data(), beta.data() + k);
}

// Two-stage Hannan-Rissanen start values on the centered series.
std::vector<double> hannan_rissanen(std::span<const double> w, int p, int q) {
  const int n = static_cast<int>(w.size());
  std::vector<double> start(p + q, 0.0);
  if (q == 0) {
    // direct AR regression
    std::vector<std::vector<double>> cols(p);
    std::vector<double> y;
    for (int t = p; t < n; ++t) {
      y.push_back(w[t]);
      for (int i = 0; i < p; ++i) cols[i].push_back(w[t - 1 - i]);
    }
    auto beta = ols(cols, y);
    std::copy(beta.begin(), beta.end(), start.begin());
  } else {
    // stage 1: long AR to proxy the innovations
    const int m = std::clamp(2 * (p + q) + 6, std::max(p, q) + 1, std::max(n / 4, 1));
    std::vector<double> eps(n, 0.0);
    try {
      const auto rho = sample_acf(w, m);
      const auto a = levinson_ar(rho, m);
      for (int t = m; t < n; ++t) {
        double pred = 0.0;
        for (int i = 0; i < m; ++i) pred += a[i] * w[t - 1 - i];
        eps[t] = w[t] - pred;
      }
    } catch (const DegenerateSeries&) {
      return start;  // all-zero start for a flat series
    }
    // stage 2: regress on lagged values and lagged innovation proxies
    const int t0 = std::max(p, m + q);
    if (t0 >= n - 1) return start;
    std::vector<std::vector<double>> cols(p + q);
    std::vector<double> y;
    for (int t = t0; t < n; ++t) {
      y.push_back(w[t]);
      for (int i = 0; i < p; ++i) cols[i].push_back(w[t - 1 - i]);
      for (int j = 0; j < q; ++j) cols[p + j].push_back(eps[t - 1 - j]);
    }
    auto beta = ols(cols, y);
    for (int i = 0; i < p; ++i) start[i] = beta[i];
    for (int j = 0; j < q; ++j) start[p + j] = -beta[p + j];  // model carries -theta
  }
  std::vector<double> phi(start.begin(), start.begin() + p);
  std::vector<double> theta(start.begin() + p, start.end());
  force_stable(phi);
  force_stable(theta);
  std::copy(phi.begin(), phi.end(), start.begin());
  std::copy(theta.begin(), theta.end(), start.begin() + p);
  return start;
}

struct SearchResult {
  std::vector<double> x;
  double f = std::numeric_limits<double>::infinity();
  bool converged = true;
};

// Deterministic compass search with step halving.
SearchResult compass_search(std::span<const double> w, std::vector<double> x, int p, int q,
                            int max_evals) {
  SearchResult res;
  res.f = css_objective(w, x, p, q);
  res.x = x;
  double h = 0.1;
  int evals = 0;
  const int dim = p + q;
  while (h > 1e-7) {
    double best_f = res.f;
    int best_i = -1;
    double best_s = 0.0;
    for (int i = 0; i < dim; ++i) {
      for (double s : {h, -h}) {
        std::vector<double> y = res.x;
        y[i] += s;
        const double fy = css_objective(w, y, p, q);
        ++evals;
        if (fy < best_f) {
          best_f = fy;
          best_i = i;
          best_s = s;
        }
      }
    }
    if (best_i >= 0) {
      res.x[best_i] += best_s;
      res.f = best_f;
    } else {
      h *= 0.5;
    }
    if (evals >= max_evals) {
      res.converged = false;
      break;
    }
  }
  return res;
}

}  // namespace

FitResult fit_batch(std::span<const double> values, const ArmaOrders& orders) {
  const int p = orders.p, q = orders.q;
  if (p < 0 || q < 0 || orders.d < 0) throw std::invalid_argument("fit_batch: negative order");
  if (p + q < 1) throw std::invalid_argument("fit_batch: p + q must be >= 1");

  const DifferenceResult diff = difference(values, orders.d);
  const std::span<const double> wd(diff.values);
  if (static_cast<int>(wd.size()) < 4 * (p + q) + 10) {
    throw InsufficientHistory("fit_batch: need at least " +
                              std::to_string(4 * (p + q) + 10) + " observations, have " +
                              std::to_string(wd.size()));
  }

  FitResult out;
  out.mean = mean_of(wd);
  std::vector<double> w(wd.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = wd[i] - out.mean;

  out.params.phi.assign(p, 0.0);
  out.params.theta.assign(q, 0.0);
  if (nearly_constant(wd)) {
    out.params.sigma2 = kSigma2Floor;  // deterministic series; keep variance positive
    return out;
  }

  const auto start = hannan_rissanen(w, p, q);
  auto search = compass_search(w, start, p, q, 60000);
  if (!search.converged) {
    search.x = start;  // report the HR estimate when refinement hit its cap
    search.f = css_objective(w, start, p, q);
  }
  // guard: never worse than the mean-only model on the CSS objective
  const std::vector<double> zeros(p + q, 0.0);
  const double f0 = css_objective(w, zeros, p, q);
  if (!(search.f <= f0)) {
    search.x = zeros;
    search.f = f0;
  }

  out.converged = search.converged;
  out.params.phi.assign(search.x.begin(), search.x.begin() + p);
  out.params.theta.assign(search.x.begin() + p, search.x.end());
  const double n_eff = static_cast<double>(w.size() - p);
  out.params.sigma2 = std::max(search.f / n_eff, kSigma2Floor);
  return out;
}

namespace {

bool mean_stable(std::span<const double> v) {
  const std::size_t n = v.size();
  if (n < 4) return true;
  const std::size_t h = n / 2;
  std::span<const double> a = v.subspan(0, h);
  std::span<const double> b = v.subspan(h);
  const double ma = mean_of(a), mb = mean_of(b);
  const double va = variance_of(a) * a.size() / std::max<std::size_t>(a.size() - 1, 1);
  const double vb = variance_of(b) * b.size() / std::max<std::size_t>(b.size() - 1, 1);
  const double pooled = std::sqrt(((a.size() - 1) * va + (b.size() - 1) * vb) /
                                  static_cast<double>(a.size() + b.size() - 2));
  if (pooled <= 0.0) return std::abs(ma - mb) <= 0.0;
  return std::abs(ma - mb) < 0.5 * pooled;
}

// Last significant lag when everything beyond it is insignificant; -1 when
// the correlogram is still significant at the final lag (it "tails off").
int cutoff_lag(const std::vector<double>& corr, double band) {
  const int max_lag = static_cast<int>(corr.size()) - 1;
  if (std::abs(corr[max_lag]) > band) return -1;
  for (int k = max_lag; k >= 1; --k) {
    if (std::abs(corr[k]) > band) return k;
  }
  return 0;
}

}  // namespace

OrderSelection select_orders(std::span<const double> values, int p_max, int q_max) {
  if (values.size() < 20) {
    throw InsufficientHistory("select_orders: need at least 20 observations, have " +
                              std::to_string(values.size()));
  }
  if (nearly_constant(values)) {
    throw DegenerateSeries("select_orders: constant series");
  }

  // choose d first: smallest d whose differenced series looks stationary
  int d = 2;
  for (int cand = 0; cand <= 2; ++cand) {
    const auto diff = difference(values, cand);
    if (cand > 0 && nearly_constant(diff.values)) {
      return {{1, 0, cand}, SelectionPath::Fallback};
    }
    const auto rho = sample_acf(diff.values, 1);
    if (rho[1] < 0.9 && mean_stable(diff.values)) {
      d = cand;
      break;
    }
  }

  const auto diff = difference(values, d);
  const std::span<const double> w(diff.values);
  const std::size_t n = w.size();
  if (n < 20) throw InsufficientHistory("select_orders: differenced series too short");

  const int max_lag = std::min<int>(20, static_cast<int>(n / 4));
  const double band = 1.96 / std::sqrt(static_cast<double>(n));
  const auto acf = sample_acf(w, max_lag);
  const auto pacf = sample_pacf(w, max_lag);

  const int fit_cap = (static_cast<int>(n) - 10) / 4;  // fit_batch feasibility
  const int acf_cut = cutoff_lag(acf, band);
  const int pacf_cut = cutoff_lag(pacf, band);
  const bool acf_cuts = acf_cut >= 0;
  const bool pacf_cuts = pacf_cut >= 0;

  if (acf_cuts && !pacf_cuts && acf_cut >= 1 && acf_cut <= std::min(q_max, fit_cap)) {
    return {{0, acf_cut, d}, SelectionPath::AcfCutoff};
  }
  if (pacf_cuts && !acf_cuts && pacf_cut >= 1 && pacf_cut <= std::min(p_max, fit_cap)) {
    return {{pacf_cut, 0, d}, SelectionPath::PacfCutoff};
  }

  // AIC grid over (p, q), excluding (0, 0); ties prefer fewer parameters,
  // then smaller p.
  const int pm = std::min(p_max, fit_cap);
  const int qm = std::min(q_max, fit_cap);
  double best_aic = std::numeric_limits<double>::infinity();
  ArmaOrders best{1, 0, d};
  bool found = false;
  for (int p = 0; p <= pm; ++p) {
    for (int q = 0; q <= qm; ++q) {
      if (p + q < 1 || p + q > fit_cap) continue;
      double a;
      try {
        const auto fit = fit_batch(std::vector<double>(w.begin(), w.end()),
                                   ArmaOrders{p, q, 0});
        a = aic(fit.params.sigma2, n, p + q);
      } catch (const std::exception&) {
        continue;
      }
      const bool better =
          !found || a < best_aic - 1e-12 ||
          (std::abs(a - best_aic) <= 1e-12 &&
           (p + q < best.p + best.q || (p + q == best.p + best.q && p < best.p)));
      if (better) {
        best_aic = a;
        best = {p, q, d};
        found = true;
      }
    }
  }
  if (!found) throw InsufficientHistory("select_orders: no feasible (p, q) for this length");
  return {best, SelectionPath::AicGrid};
}

UserModel fit_user_model(std::span<const double> values, int p_max, int q_max) {
  UserModel model;
  try {
    const auto sel = select_orders(values, p_max, q_max);
    const auto fit = fit_batch(values, sel.orders);
    model.orders = sel.orders;
    model.params = fit.params;
    model.mean = fit.mean;
    model.converged = fit.converged;
  } catch (const DegenerateSeries&) {
    // constant series: mean-only model predicts it exactly
    model.orders = {1, 0, 0};
    model.params.phi = {0.0};
    model.params.sigma2 = std::max(variance_of(values), kSigma2Floor);
    model.mean = mean_of(values);
    model.converged = true;
  }
  return model;
}

std::string model_json_line(const PersonId& user, const UserModel& model) {
  nlohmann::json j;
  j["user"] = user;
  j["p"] = model.orders.p;
  j["q"] = model.orders.q;
  j["d"] = model.orders.d;
  j["phi"] = model.params.phi;
  j["theta"] = model.params.theta;
  j["sigma2"] = model.params.sigma2;
  j["mean"] = model.mean;
  return j.dump();
}

}  // namespace sste
