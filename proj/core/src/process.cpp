#include "rgarch/process.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rgarch/errors.hpp"
#include "rgarch/link.hpp"

namespace rgarch {

void ModelOrder::validate() const {
  if (p < 0 || q < 0) throw validation_error("model order must be non-negative");
}

double Coefficients::persistence() const {
  double s = 0;
  for (double v : phi) s += v;
  for (double v : alpha) s += v;
  return s;
}

void Coefficients::validate() const {
  if (!(phi0 > 0) || !std::isfinite(phi0))
    throw validation_error("phi0 must be positive and finite");
  for (double v : phi)
    if (!(v >= 0) || !std::isfinite(v))
      throw validation_error("distance-lag coefficients must be non-negative");
  for (double v : alpha)
    if (!(v >= 0) || !std::isfinite(v))
      throw validation_error("feedback coefficients must be non-negative");
}

std::vector<double> Coefficients::flat() const {
  std::vector<double> beta;
  beta.reserve(static_cast<std::size_t>(dim()));
  beta.push_back(phi0);
  beta.insert(beta.end(), phi.begin(), phi.end());
  beta.insert(beta.end(), alpha.begin(), alpha.end());
  return beta;
}

Coefficients Coefficients::from_flat(std::span<const double> beta, ModelOrder order) {
  order.validate();
  if (static_cast<int>(beta.size()) != 1 + order.p + order.q)
    throw validation_error("coefficient vector length does not match order");
  Coefficients c;
  c.phi0 = beta[0];
  c.phi.assign(beta.begin() + 1, beta.begin() + 1 + order.p);
  c.alpha.assign(beta.begin() + 1 + order.p, beta.end());
  return c;
}

StationarityCheck check_stationarity(const Coefficients& coef) {
  coef.validate();
  const double s = coef.persistence();
  return {s < 1.0, 1.0 - s};
}

double unconditional_mean(const Coefficients& coef) {
  const StationarityCheck st = check_stationarity(coef);
  if (!st.stationary)
    throw validation_error("process is not stationary (persistence " +
                           std::to_string(coef.persistence()) + " >= 1)");
  return coef.phi0 / st.margin;
}

RankingSeries::RankingSeries(int k) : k_(k) {
  if (k < 1) throw validation_error("k must be positive");
}

RankingSeries::RankingSeries(int k, std::vector<PartialRanking> rows) : RankingSeries(k) {
  for (auto& r : rows) push_back(std::move(r));
}

bool RankingSeries::complete() const { return n_incomplete_rows() == 0; }

int RankingSeries::n_incomplete_rows() const {
  int n = 0;
  for (const auto& r : rows_) n += !r.complete();
  return n;
}

void RankingSeries::push_back(PartialRanking row) {
  if (row.k() != k_)
    throw validation_error("row has " + std::to_string(row.k()) + " items, series has " +
                           std::to_string(k_));
  rows_.push_back(std::move(row));
}

void RankingSeries::set_row(int t, PartialRanking row) {
  if (t < 0 || t >= size())
    throw validation_error("row index " + std::to_string(t) + " out of range");
  if (row.k() != k_)
    throw validation_error("row has " + std::to_string(row.k()) + " items, series has " +
                           std::to_string(k_));
  rows_[static_cast<std::size_t>(t)] = std::move(row);
}

std::vector<int> RankingSeries::distance_series(DistanceKind kind) const {
  for (int t = 0; t < size(); ++t)
    if (!rows_[static_cast<std::size_t>(t)].complete())
      throw validation_error("row " + std::to_string(t + 1) +
                             " has missing entries; distance series undefined");
  std::vector<int> d;
  if (size() < 2) return d;
  d.reserve(static_cast<std::size_t>(size() - 1));
  Permutation prev = rows_[0].as_permutation();
  for (int t = 1; t < size(); ++t) {
    Permutation cur = rows_[static_cast<std::size_t>(t)].as_permutation();
    d.push_back(distance(cur, prev, kind));
    prev = std::move(cur);
  }
  return d;
}

ConditionalMeanPath mean_path_from_distances(std::span<const int> d, int k, ModelOrder order,
                                             const Coefficients& coef, DistanceKind kind,
                                             double presample_mu) {
  order.validate();
  coef.validate();
  if (coef.order() != order)
    throw validation_error("coefficient shape does not match model order");
  const int m = order.m();
  const int n_terms = static_cast<int>(d.size()) - m;
  if (n_terms < 1)
    throw validation_error("series too short for order: need at least m+2 rankings");

  ConditionalMeanPath path;
  path.first_row = m + 1;
  path.mu.resize(static_cast<std::size_t>(n_terms));
  path.theta.resize(static_cast<std::size_t>(n_terms));
  for (int idx = 0; idx < n_terms; ++idx) {
    const int j = m + idx;
    double mu = coef.phi0;
    for (int i = 1; i <= order.p; ++i)
      mu += coef.phi[static_cast<std::size_t>(i - 1)] * d[static_cast<std::size_t>(j - i)];
    for (int l = 1; l <= order.q; ++l) {
      const int back = idx - l;
      mu += coef.alpha[static_cast<std::size_t>(l - 1)] *
            (back >= 0 ? path.mu[static_cast<std::size_t>(back)] : presample_mu);
    }
    const LinkSolve ls = theta_from_mean_clamped(mu, k, kind);
    path.mu[static_cast<std::size_t>(idx)] = mu;
    path.theta[static_cast<std::size_t>(idx)] = ls.theta;
    path.any_clamped = path.any_clamped || ls.clamped;
  }
  return path;
}

ConditionalMeanPath conditional_mean_path(const RankingSeries& series, ModelOrder order,
                                          const Coefficients& coef, DistanceKind kind) {
  const std::vector<int> d = series.distance_series(kind);
  if (d.empty()) throw validation_error("series too short for order: need at least m+2 rankings");
  const double presample =
      std::accumulate(d.begin(), d.end(), 0.0) / static_cast<double>(d.size());
  return mean_path_from_distances(d, series.k(), order, coef, kind, presample);
}

SimulationResult simulate(int k, int n, const Coefficients& coef, DistanceKind kind,
                          Rng& rng, bool allow_nonstationary) {
  if (k < 2) throw validation_error("simulation requires k >= 2");
  coef.validate();
  const ModelOrder order = coef.order();
  const int m = order.m();
  if (n < m + 2)
    throw validation_error("need n >= m+2 to produce at least one model term");
  const StationarityCheck st = check_stationarity(coef);
  if (!st.stationary && !allow_nonstationary)
    throw validation_error("coefficients are non-stationary (persistence " +
                           std::to_string(coef.persistence()) +
                           "); pass allow_nonstationary to simulate anyway");
  const double presample =
      st.stationary ? unconditional_mean(coef) : 0.5 * uniform_mean(k, kind);

  const int burn = 100 + m;
  const std::size_t total = static_cast<std::size_t>(burn + n);
  std::vector<Permutation> all;
  all.reserve(total);
  all.push_back(Permutation::random_uniform(k, rng));
  all.push_back(Permutation::random_uniform(k, rng));

  std::vector<double> dlag(static_cast<std::size_t>(order.p), presample);
  std::vector<double> mulag(static_cast<std::size_t>(order.q), presample);
  auto push_lag = [](std::vector<double>& lags, double v) {
    if (lags.empty()) return;
    for (std::size_t i = lags.size() - 1; i > 0; --i) lags[i] = lags[i - 1];
    lags[0] = v;
  };
  push_lag(dlag, distance(all[1], all[0], kind));

  while (all.size() < total) {
    double mu = coef.phi0;
    for (int i = 0; i < order.p; ++i)
      mu += coef.phi[static_cast<std::size_t>(i)] * dlag[static_cast<std::size_t>(i)];
    for (int l = 0; l < order.q; ++l)
      mu += coef.alpha[static_cast<std::size_t>(l)] * mulag[static_cast<std::size_t>(l)];
    const LinkSolve ls = theta_from_mean_clamped(mu, k, kind);
    const Permutation& cur = all.back();
    Permutation nxt = sample_mallows(MallowsSpec(cur, ls.theta, kind), rng);
    push_lag(dlag, distance(nxt, cur, kind));
    push_lag(mulag, mu);
    all.push_back(std::move(nxt));
  }

  std::vector<PartialRanking> window;
  window.reserve(static_cast<std::size_t>(n));
  for (std::size_t t = total - static_cast<std::size_t>(n); t < total; ++t)
    window.push_back(PartialRanking(all[t]));
  SimulationResult result{RankingSeries(k, std::move(window)), {}};
  result.path = conditional_mean_path(result.series, order, coef, kind);
  return result;
}

double TheoreticalAcf::gamma0() const {
  const double s = phi1 + alpha1;
  return sigma2_eps * (1 - 2 * phi1 * alpha1 - alpha1 * alpha1) / (1 - s * s);
}

double TheoreticalAcf::rho(int lag) const {
  if (lag < 0) throw validation_error("lag must be non-negative");
  if (lag == 0) return 1.0;
  const double s = phi1 + alpha1;
  const double lead = phi1 * (1 - alpha1 * s) / (1 - 2 * phi1 * alpha1 - alpha1 * alpha1);
  return lead * std::pow(s, lag - 1);
}

TheoreticalAcf theoretical_acf_11(double phi1, double alpha1, double sigma2_eps) {
  if (!(phi1 >= 0) || !(alpha1 >= 0) || !(sigma2_eps >= 0))
    throw validation_error("phi1, alpha1 and sigma2_eps must be non-negative");
  if (phi1 + alpha1 >= 1)
    throw validation_error("autocorrelation requires a stationary model (phi1 + alpha1 < 1)");
  return {phi1, alpha1, sigma2_eps};
}

AcfPacf empirical_acf_pacf(std::span<const double> x, int max_lag) {
  const int n = static_cast<int>(x.size());
  if (max_lag < 1) throw validation_error("max_lag must be at least 1");
  if (n <= max_lag)
    throw validation_error("series of length " + std::to_string(n) +
                           " too short for lag " + std::to_string(max_lag));
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double c0 = 0;
  for (double v : x) c0 += (v - mean) * (v - mean);
  c0 /= n;
  if (!(c0 > 0)) throw validation_error("autocorrelation of a constant series is undefined");

  AcfPacf out;
  out.acf.resize(static_cast<std::size_t>(max_lag) + 1);
  out.acf[0] = 1.0;
  for (int h = 1; h <= max_lag; ++h) {
    double c = 0;
    for (int t = h; t < n; ++t) c += (x[static_cast<std::size_t>(t)] - mean) *
                                     (x[static_cast<std::size_t>(t - h)] - mean);
    out.acf[static_cast<std::size_t>(h)] = c / n / c0;
  }

  // Durbin-Levinson: pacf[h] is the last coefficient of the best linear
  // predictor using h lags.
  out.pacf.assign(static_cast<std::size_t>(max_lag) + 1, 1.0);
  std::vector<double> prev(static_cast<std::size_t>(max_lag) + 1, 0.0);
  std::vector<double> curr(static_cast<std::size_t>(max_lag) + 1, 0.0);
  for (int h = 1; h <= max_lag; ++h) {
    double num = out.acf[static_cast<std::size_t>(h)];
    double den = 1.0;
    for (int j = 1; j < h; ++j) {
      num -= prev[static_cast<std::size_t>(j)] * out.acf[static_cast<std::size_t>(h - j)];
      den -= prev[static_cast<std::size_t>(j)] * out.acf[static_cast<std::size_t>(j)];
    }
    if (std::abs(den) < 1e-14)
      throw validation_error("partial autocorrelation undefined at lag " + std::to_string(h));
    const double refl = num / den;
    out.pacf[static_cast<std::size_t>(h)] = refl;
    for (int j = 1; j < h; ++j)
      curr[static_cast<std::size_t>(j)] = prev[static_cast<std::size_t>(j)] -
                                          refl * prev[static_cast<std::size_t>(h - j)];
    curr[static_cast<std::size_t>(h)] = refl;
    std::swap(prev, curr);
  }
  return out;
}

}  // namespace rgarch
