#include "rgarch/inference.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <limits>
#include <numeric>
#include <unordered_map>

#include "fit_detail.hpp"
#include "rgarch/errors.hpp"
#include "rgarch/link.hpp"
#include "rgarch/mallows.hpp"
#include "rgarch/rng.hpp"

namespace rgarch {

namespace detail {

namespace {

/// Memoizes the link solve per distinct conditional mean.  Pure-distance-lag
/// models produce only a handful of distinct means, so one fit touches the
/// solver a few dozen times instead of once per term per evaluation.
class LinkCache {
 public:
  struct Entry {
    double theta;
    double logpsi;
    double var;
    bool clamped;
  };

  LinkCache(int k, DistanceKind kind) : k_(k), kind_(kind) {}

  const Entry& get(double mu) {
    const std::uint64_t key = std::bit_cast<std::uint64_t>(mu);
    auto it = map_.find(key);
    if (it != map_.end()) return it->second;
    const LinkSolve ls = theta_from_mean_clamped(mu, k_, kind_);
    Entry e;
    e.theta = ls.theta;
    e.clamped = ls.clamped;
    e.logpsi = log_psi(ls.theta, k_, kind_);
    e.var = variance_distance(ls.theta, k_, kind_);
    return map_.emplace(key, e).first->second;
  }

 private:
  int k_;
  DistanceKind kind_;
  std::unordered_map<std::uint64_t, Entry> map_;
};

struct WalkSums {
  double loglik = 0;
  int terms = 0;
};

// Walks one view's likelihood terms; when score/info spans are non-empty the
// mean-derivative recursion runs alongside and accumulates into them.
WalkSums walk_view(const DataView& view, ModelOrder order, const Coefficients& coef,
                   LinkCache& cache, std::span<double> score_acc,
                   std::span<double> info_acc) {
  const int m = order.m();
  const int p = order.p, q = order.q;
  const int T = static_cast<int>(view.d.size()) - m;
  const int dim = 1 + p + q;
  const bool derivs = !score_acc.empty();

  WalkSums sums;
  sums.terms = T;
  std::vector<double> mu_hist(static_cast<std::size_t>(T));
  // ring of the last q derivative columns, xlag[l-1] = dmu_{j-l}/dbeta
  std::vector<std::vector<double>> xlag;
  std::vector<double> x(static_cast<std::size_t>(dim));
  if (derivs)
    xlag.assign(static_cast<std::size_t>(q), std::vector<double>(static_cast<std::size_t>(dim), 0.0));

  for (int idx = 0; idx < T; ++idx) {
    const int j = m + idx;
    double mu = coef.phi0;
    for (int i = 1; i <= p; ++i)
      mu += coef.phi[static_cast<std::size_t>(i - 1)] *
            view.d[static_cast<std::size_t>(j - i)];
    for (int l = 1; l <= q; ++l)
      mu += coef.alpha[static_cast<std::size_t>(l - 1)] *
            (idx - l >= 0 ? mu_hist[static_cast<std::size_t>(idx - l)] : view.presample_mu);
    mu_hist[static_cast<std::size_t>(idx)] = mu;

    const int dt = view.d[static_cast<std::size_t>(j)];
    const LinkCache::Entry& e = cache.get(mu);
    sums.loglik += -e.theta * dt - e.logpsi;

    if (!derivs) continue;
    x[0] = 1.0;
    for (int i = 1; i <= p; ++i)
      x[static_cast<std::size_t>(i)] = view.d[static_cast<std::size_t>(j - i)];
    for (int l = 1; l <= q; ++l)
      x[static_cast<std::size_t>(p + l)] =
          idx - l >= 0 ? mu_hist[static_cast<std::size_t>(idx - l)] : view.presample_mu;
    for (int l = 1; l <= q; ++l) {
      const double a = coef.alpha[static_cast<std::size_t>(l - 1)];
      const std::vector<double>& prev = xlag[static_cast<std::size_t>(l - 1)];
      for (int c = 0; c < dim; ++c) x[static_cast<std::size_t>(c)] += a * prev[static_cast<std::size_t>(c)];
    }
    // Clamped terms have a locally constant spread: no score contribution,
    // but the derivative recursion itself still propagates.
    if (!e.clamped) {
      const double w = 1.0 / std::max(e.var, 1e-12);
      const double resid_w = (dt - mu) * w;
      for (int c = 0; c < dim; ++c) score_acc[static_cast<std::size_t>(c)] += resid_w * x[static_cast<std::size_t>(c)];
      if (!info_acc.empty()) {
        for (int r = 0; r < dim; ++r) {
          const double xr_w = w * x[static_cast<std::size_t>(r)];
          for (int c = 0; c < dim; ++c)
            info_acc[static_cast<std::size_t>(r * dim + c)] += xr_w * x[static_cast<std::size_t>(c)];
        }
      }
    }
    if (q > 0) {
      std::rotate(xlag.rbegin(), xlag.rbegin() + 1, xlag.rend());
      xlag[0] = x;
    }
  }
  return sums;
}

void check_views(std::span<const DataView> views, ModelOrder order) {
  order.validate();
  if (views.empty()) throw validation_error("no data");
  const int m = order.m();
  for (const DataView& v : views)
    if (static_cast<int>(v.d.size()) < m + 1)
      throw validation_error("series too short for order: need at least m+2 rankings");
}

}  // namespace

DataView make_view(const RankingSeries& series, DistanceKind kind) {
  DataView view;
  view.d = series.distance_series(kind);
  if (view.d.empty()) throw validation_error("series must contain at least two rankings");
  view.presample_mu = std::accumulate(view.d.begin(), view.d.end(), 0.0) /
                      static_cast<double>(view.d.size());
  return view;
}

double avg_loglik(std::span<const DataView> views, int k, ModelOrder order,
                  const Coefficients& coef, DistanceKind kind) {
  check_views(views, order);
  LinkCache cache(k, kind);
  double total = 0;
  for (const DataView& v : views)
    total += walk_view(v, order, coef, cache, {}, {}).loglik;
  return total / static_cast<double>(views.size());
}

std::vector<double> loglik_each(std::span<const DataView> views, int k, ModelOrder order,
                                const Coefficients& coef, DistanceKind kind) {
  check_views(views, order);
  LinkCache cache(k, kind);
  std::vector<double> out;
  out.reserve(views.size());
  for (const DataView& v : views)
    out.push_back(walk_view(v, order, coef, cache, {}, {}).loglik);
  return out;
}

void avg_score_info(std::span<const DataView> views, int k, ModelOrder order,
                    const Coefficients& coef, DistanceKind kind, double* loglik_out,
                    std::span<double> score_out, std::span<double> info_out) {
  check_views(views, order);
  const int dim = 1 + order.p + order.q;
  if (!score_out.empty() && static_cast<int>(score_out.size()) != dim)
    throw validation_error("score buffer has wrong length");
  if (!info_out.empty() && static_cast<int>(info_out.size()) != dim * dim)
    throw validation_error("information buffer has wrong length");
  std::fill(score_out.begin(), score_out.end(), 0.0);
  std::fill(info_out.begin(), info_out.end(), 0.0);

  LinkCache cache(k, kind);
  double total = 0;
  for (const DataView& v : views)
    total += walk_view(v, order, coef, cache, score_out, info_out).loglik;
  const double inv_m = 1.0 / static_cast<double>(views.size());
  for (double& s : score_out) s *= inv_m;
  for (double& s : info_out) s *= inv_m;
  if (loglik_out) *loglik_out = total * inv_m;
}

bool std_errors_from_information(std::span<const double> info, int dim,
                                 std::vector<double>& se_out) {
  Eigen::MatrixXd K(dim, dim);
  for (int r = 0; r < dim; ++r)
    for (int c = 0; c < dim; ++c) K(r, c) = info[static_cast<std::size_t>(r * dim + c)];

  se_out.assign(static_cast<std::size_t>(dim), std::numeric_limits<double>::quiet_NaN());
  Eigen::LDLT<Eigen::MatrixXd> ldlt(K);
  if (ldlt.info() == Eigen::Success && ldlt.isPositive()) {
    const Eigen::MatrixXd inv = ldlt.solve(Eigen::MatrixXd::Identity(dim, dim));
    bool ok = true;
    for (int j = 0; j < dim; ++j) ok = ok && inv(j, j) > 0 && std::isfinite(inv(j, j));
    if (ok) {
      for (int j = 0; j < dim; ++j) se_out[static_cast<std::size_t>(j)] = std::sqrt(inv(j, j));
      return true;
    }
  }
  // Pseudo-inverse on the nonzero eigenspace.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(K);
  const Eigen::VectorXd vals = es.eigenvalues();
  const double cutoff = std::max(vals.cwiseAbs().maxCoeff(), 1.0) * 1e-12;
  Eigen::VectorXd inv_vals = Eigen::VectorXd::Zero(dim);
  for (int j = 0; j < dim; ++j)
    if (vals(j) > cutoff) inv_vals(j) = 1.0 / vals(j);
  const Eigen::MatrixXd pinv =
      es.eigenvectors() * inv_vals.asDiagonal() * es.eigenvectors().transpose();
  for (int j = 0; j < dim; ++j)
    se_out[static_cast<std::size_t>(j)] = pinv(j, j) > 0 ? std::sqrt(pinv(j, j)) : 0.0;
  return false;
}

namespace {

// ---- optimizer ----
// Coefficients live on a log scale: beta = exp(u), u in [-37, 37].  The
// penalty keeps persistence away from 1 without a hard wall.

constexpr double kUClamp = 37.0;
constexpr double kPersistEdge = 0.999;
constexpr double kPenaltyWeight = 1e3;

double penalty_value(const Coefficients& coef) {
  const double excess = coef.persistence() - kPersistEdge;
  return excess > 0 ? kPenaltyWeight * excess * excess : 0.0;
}

struct Objective {
  std::span<const DataView> views;
  int k;
  ModelOrder order;
  DistanceKind kind;
  int dim;

  Coefficients coef_from_u(std::span<const double> u) const {
    std::vector<double> beta(u.size());
    for (std::size_t j = 0; j < u.size(); ++j)
      beta[j] = std::exp(std::clamp(u[j], -kUClamp, kUClamp));
    return Coefficients::from_flat(beta, order);
  }

  static std::vector<double> u_from_coef(const Coefficients& coef) {
    std::vector<double> u = coef.flat();
    for (double& v : u) u_from_beta(v);
    return u;
  }

  static void u_from_beta(double& v) {
    v = std::clamp(std::log(std::max(v, 1e-300)), -kUClamp, kUClamp);
  }

  // Penalized average log-likelihood; the quantity being maximized.
  double value_u(std::span<const double> u) const {
    const Coefficients coef = coef_from_u(u);
    return avg_loglik(views, k, order, coef, kind) - penalty_value(coef);
  }

  // Gradient in u-space via the chain rule du -> beta.
  double grad_u(std::span<const double> u, std::vector<double>& grad_out) const {
    const Coefficients coef = coef_from_u(u);
    std::vector<double> score(static_cast<std::size_t>(dim));
    double ll = 0;
    avg_score_info(views, k, order, coef, kind, &ll, score, {});
    const double excess = coef.persistence() - kPersistEdge;
    const double dpen = excess > 0 ? 2 * kPenaltyWeight * excess : 0.0;
    const std::vector<double> beta = coef.flat();
    grad_out.resize(static_cast<std::size_t>(dim));
    for (int j = 0; j < dim; ++j) {
      const double dbeta = score[static_cast<std::size_t>(j)] - (j > 0 ? dpen : 0.0);
      grad_out[static_cast<std::size_t>(j)] = dbeta * beta[static_cast<std::size_t>(j)];
    }
    return ll - penalty_value(coef);
  }
};

void ascend_gradient(const Objective& obj, std::vector<double>& u, double& value,
                     int max_iters) {
  std::vector<double> grad;
  double step = 0.05;
  value = obj.value_u(u);
  for (int iter = 0; iter < max_iters; ++iter) {
    const double f = obj.grad_u(u, grad);
    value = f;
    double gmax = 0;
    for (double g : grad) gmax = std::max(gmax, std::abs(g));
    if (gmax < 1e-7) return;
    double slope = 0;  // directional derivative along grad / gmax
    for (double g : grad) slope += g * g;
    slope /= gmax;

    bool moved = false;
    while (step >= 1e-12) {
      std::vector<double> trial = u;
      for (int j = 0; j < obj.dim; ++j)
        trial[static_cast<std::size_t>(j)] = std::clamp(
            trial[static_cast<std::size_t>(j)] + step * grad[static_cast<std::size_t>(j)] / gmax,
            -kUClamp, kUClamp);
      const double ft = obj.value_u(trial);
      if (ft > f + 1e-4 * step * slope) {
        u = std::move(trial);
        value = ft;
        step = std::min(step * 1.7, 0.5);
        moved = true;
        break;
      }
      step /= 2;
    }
    if (!moved) return;
  }
}

void nelder_mead(const Objective& obj, std::vector<double>& u, double& value,
                 double init_step, int max_iters) {
  const int d = obj.dim;
  const int n_pts = d + 1;
  std::vector<std::vector<double>> pts(static_cast<std::size_t>(n_pts), u);
  std::vector<double> f(static_cast<std::size_t>(n_pts));
  for (int j = 0; j < d; ++j)
    pts[static_cast<std::size_t>(j + 1)][static_cast<std::size_t>(j)] += init_step;
  for (int i = 0; i < n_pts; ++i) f[static_cast<std::size_t>(i)] = -obj.value_u(pts[static_cast<std::size_t>(i)]);

  auto order_pts = [&] {
    std::vector<int> idx(static_cast<std::size_t>(n_pts));
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](int a, int b) {
      return f[static_cast<std::size_t>(a)] < f[static_cast<std::size_t>(b)];
    });
    std::vector<std::vector<double>> p2;
    std::vector<double> f2;
    for (int i : idx) {
      p2.push_back(pts[static_cast<std::size_t>(i)]);
      f2.push_back(f[static_cast<std::size_t>(i)]);
    }
    pts = std::move(p2);
    f = std::move(f2);
  };

  auto at = [&](const std::vector<double>& centroid, const std::vector<double>& worst,
                double t) {
    std::vector<double> out(static_cast<std::size_t>(d));
    for (int j = 0; j < d; ++j)
      out[static_cast<std::size_t>(j)] = std::clamp(
          centroid[static_cast<std::size_t>(j)] +
              t * (centroid[static_cast<std::size_t>(j)] - worst[static_cast<std::size_t>(j)]),
          -kUClamp, kUClamp);
    return out;
  };

  for (int iter = 0; iter < max_iters; ++iter) {
    order_pts();
    if (f[static_cast<std::size_t>(n_pts - 1)] - f[0] < 1e-11 * (1 + std::abs(f[0]))) break;
    std::vector<double> centroid(static_cast<std::size_t>(d), 0.0);
    for (int i = 0; i < n_pts - 1; ++i)
      for (int j = 0; j < d; ++j)
        centroid[static_cast<std::size_t>(j)] += pts[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] / (n_pts - 1);
    const std::vector<double>& worst = pts[static_cast<std::size_t>(n_pts - 1)];

    std::vector<double> refl = at(centroid, worst, 1.0);
    const double f_refl = -obj.value_u(refl);
    if (f_refl < f[0]) {
      std::vector<double> expand = at(centroid, worst, 2.0);
      const double f_exp = -obj.value_u(expand);
      if (f_exp < f_refl) {
        pts[static_cast<std::size_t>(n_pts - 1)] = std::move(expand);
        f[static_cast<std::size_t>(n_pts - 1)] = f_exp;
      } else {
        pts[static_cast<std::size_t>(n_pts - 1)] = std::move(refl);
        f[static_cast<std::size_t>(n_pts - 1)] = f_refl;
      }
      continue;
    }
    if (f_refl < f[static_cast<std::size_t>(n_pts - 2)]) {
      pts[static_cast<std::size_t>(n_pts - 1)] = std::move(refl);
      f[static_cast<std::size_t>(n_pts - 1)] = f_refl;
      continue;
    }
    std::vector<double> contract = at(centroid, worst, f_refl < f[static_cast<std::size_t>(n_pts - 1)] ? 0.5 : -0.5);
    const double f_con = -obj.value_u(contract);
    if (f_con < std::min(f_refl, f[static_cast<std::size_t>(n_pts - 1)])) {
      pts[static_cast<std::size_t>(n_pts - 1)] = std::move(contract);
      f[static_cast<std::size_t>(n_pts - 1)] = f_con;
      continue;
    }
    // shrink toward the best point
    for (int i = 1; i < n_pts; ++i) {
      for (int j = 0; j < d; ++j)
        pts[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
            pts[0][static_cast<std::size_t>(j)] +
            0.5 * (pts[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] - pts[0][static_cast<std::size_t>(j)]);
      f[static_cast<std::size_t>(i)] = -obj.value_u(pts[static_cast<std::size_t>(i)]);
    }
  }
  order_pts();
  u = pts[0];
  value = -f[0];
}

struct NewtonOutcome {
  Coefficients coef;
  double loglik = 0;
  double last_dll = std::numeric_limits<double>::infinity();
  double last_dbeta = std::numeric_limits<double>::infinity();
  bool score_small = false;
  /// Even a heavily damped step offered no measurable gain; the point is
  /// stationary to working precision (weakly identified directions included).
  bool decrement_small = false;
};

NewtonOutcome newton_polish(const Objective& obj, const Coefficients& start, int max_iters) {
  NewtonOutcome out;
  out.coef = start;
  const int dim = obj.dim;
  std::vector<double> score(static_cast<std::size_t>(dim));
  std::vector<double> info(static_cast<std::size_t>(dim * dim));
  out.loglik = avg_loglik(obj.views, obj.k, obj.order, out.coef, obj.kind);

  for (int iter = 0; iter < max_iters; ++iter) {
    double ll = 0;
    avg_score_info(obj.views, obj.k, obj.order, out.coef, obj.kind, &ll, score, info);
    out.loglik = ll;
    std::vector<double> beta = out.coef.flat();

    // Coordinates pinned at the zero boundary with an inward-pointing score
    // stay fixed; everything else moves by a damped Fisher step.
    std::vector<int> active;
    for (int j = 0; j < dim; ++j)
      if (beta[static_cast<std::size_t>(j)] > 1e-10 || score[static_cast<std::size_t>(j)] > 0)
        active.push_back(j);
    if (active.empty()) break;

    double score_max = 0;
    for (int j : active) score_max = std::max(score_max, std::abs(score[static_cast<std::size_t>(j)]));
    if (score_max < 1e-8 * (1 + std::abs(ll))) {
      out.score_small = true;
      break;
    }

    const int na = static_cast<int>(active.size());
    Eigen::MatrixXd K(na, na);
    Eigen::VectorXd U(na);
    for (int r = 0; r < na; ++r) {
      U(r) = score[static_cast<std::size_t>(active[static_cast<std::size_t>(r)])];
      for (int c = 0; c < na; ++c)
        K(r, c) = info[static_cast<std::size_t>(active[static_cast<std::size_t>(r)] * dim +
                                                active[static_cast<std::size_t>(c)])];
    }
    const double diag_scale = 1 + K.diagonal().maxCoeff();

    // When the information matrix is ill conditioned (feedback models ride a
    // flat phi-alpha ridge) the raw step can overshoot so badly that no
    // fraction of it helps.  Escalating the damping turns the direction into
    // a short gradient step; if even that offers no measurable gain, the
    // Newton decrement certifies the point as stationary.
    bool accepted = false;
    double lambda = 1e-10;
    for (int level = 0; level < 8 && !accepted; ++level, lambda *= 100) {
      Eigen::MatrixXd damped = K;
      damped.diagonal().array() += lambda * diag_scale;
      const Eigen::VectorXd delta = damped.ldlt().solve(U);
      if (!delta.allFinite()) break;
      // promised gain below the line-search tie tolerance: no acceptable
      // step can exist, the point is stationary to working precision
      if (0.5 * U.dot(delta) < 1e-12 * (1 + std::abs(ll))) {
        out.decrement_small = true;
        break;
      }
      for (double t = 1.0; t >= 1e-4; t /= 2) {
        Coefficients trial = out.coef;
        std::vector<double> tb = beta;
        for (int r = 0; r < na; ++r) {
          const std::size_t j = static_cast<std::size_t>(active[static_cast<std::size_t>(r)]);
          tb[j] = beta[j] + t * delta(r);
          // a crossing step projects small coordinates straight onto the
          // boundary; halving instead would take dozens of iterations to pin
          if (tb[j] <= 0) tb[j] = beta[j] < 1e-6 ? 0.0 : beta[j] / 2;
        }
        trial = Coefficients::from_flat(tb, obj.order);
        if (trial.persistence() >= kPersistEdge) continue;
        const double ll_t = avg_loglik(obj.views, obj.k, obj.order, trial, obj.kind);
        // tie tolerance scales with |ll| so rounding in large sums cannot
        // veto an essentially neutral step
        if (ll_t >= ll - 1e-12 * (1 + std::abs(ll))) {
          out.last_dll = std::abs(ll_t - ll);
          double dbeta = 0;
          const std::vector<double> nb = trial.flat();
          for (int j = 0; j < dim; ++j)
            dbeta = std::max(dbeta, std::abs(nb[static_cast<std::size_t>(j)] - beta[static_cast<std::size_t>(j)]));
          out.last_dbeta = dbeta;
          out.coef = std::move(trial);
          out.loglik = ll_t;
          accepted = true;
          break;
        }
      }
    }
    if (out.decrement_small) break;
    if (!accepted) break;
  }
  return out;
}

std::vector<Coefficients> build_starts(const Objective& obj, double mean_d, int n_starts,
                                       std::uint64_t seed) {
  const int p = obj.order.p, q = obj.order.q;
  std::vector<Coefficients> starts;
  auto mass_split = [&](double intercept_frac, double phi_share) {
    Coefficients c;
    const double mass = 1 - intercept_frac;
    c.phi0 = std::max(intercept_frac * mean_d, 1e-4);
    c.phi.assign(static_cast<std::size_t>(p), 0.0);
    c.alpha.assign(static_cast<std::size_t>(q), 0.0);
    if (p > 0)
      for (double& v : c.phi) v = std::max(mass * (q > 0 ? phi_share : 1.0) / p, 1e-4);
    if (q > 0)
      for (double& v : c.alpha) v = std::max(mass * (p > 0 ? 1 - phi_share : 1.0) / q, 1e-4);
    return c;
  };
  if (p + q == 0) {
    Coefficients c;
    c.phi0 = std::max(mean_d, 1e-4);
    starts.push_back(c);
    return starts;
  }
  starts.push_back(mass_split(0.5, 0.5));
  starts.push_back(mass_split(0.25, 0.8));
  starts.push_back(mass_split(0.25, 0.2));
  starts.push_back(mass_split(0.9, 0.5));
  Rng rng(derive_seed(seed, 0xf17));
  while (static_cast<int>(starts.size()) < n_starts) {
    Coefficients c = mass_split(0.5, 0.5);
    c.phi0 *= std::exp(0.6 * (rng.uniform() - 0.5));
    for (double& v : c.phi) v *= std::exp(0.8 * (rng.uniform() - 0.5));
    for (double& v : c.alpha) v *= std::exp(0.8 * (rng.uniform() - 0.5));
    starts.push_back(c);
  }
  starts.resize(static_cast<std::size_t>(std::max(1, std::min(n_starts, static_cast<int>(starts.size())))));
  return starts;
}

}  // namespace

FitResult fit_views(std::span<const DataView> views, int k, ModelOrder order,
                    DistanceKind kind, const FitOptions& options) {
  check_views(views, order);
  const int dim = 1 + order.p + order.q;
  Objective obj{views, k, order, kind, dim};

  std::vector<Coefficients> starts;
  if (options.init) {
    options.init->validate();
    if (options.init->order() != order)
      throw validation_error("warm start has wrong coefficient shape");
    starts.push_back(*options.init);
  } else {
    const double mean_d = views[0].presample_mu;
    starts = build_starts(obj, mean_d, std::max(1, options.n_starts), options.seed);
  }

  std::vector<double> best_u;
  double best_value = -std::numeric_limits<double>::infinity();
  for (const Coefficients& s : starts) {
    std::vector<double> u = Objective::u_from_coef(s);
    double value = 0;
    ascend_gradient(obj, u, value, options.max_gradient_iters);
    if (value > best_value) {
      best_value = value;
      best_u = u;
    }
  }
  if (best_u.empty() || !std::isfinite(best_value))
    throw convergence_error("no optimizer start produced a finite likelihood");

  nelder_mead(obj, best_u, best_value, options.init ? 0.02 : 0.10,
              options.max_simplex_iters);
  const NewtonOutcome polished =
      newton_polish(obj, obj.coef_from_u(best_u), options.max_newton_iters);

  FitResult fit;
  fit.k = k;
  fit.order = order;
  fit.kind = kind;
  fit.coef = polished.coef;
  fit.loglik = polished.loglik;
  fit.converged = polished.score_small || polished.decrement_small ||
                  (polished.last_dll < options.tol_loglik &&
                   polished.last_dbeta < options.tol_beta);
  fit.n_used = static_cast<int>(views[0].d.size()) - order.m();
  fit.aic = -2 * fit.loglik + 2 * dim;
  fit.bic = -2 * fit.loglik + dim * std::log(static_cast<double>(fit.n_used));

  std::vector<double> score(static_cast<std::size_t>(dim));
  std::vector<double> info(static_cast<std::size_t>(dim * dim));
  avg_score_info(views, k, order, fit.coef, kind, nullptr, score, info);
  fit.se_degenerate = !std_errors_from_information(info, dim, fit.std_errors);

  fit.path = mean_path_from_distances(views[0].d, k, order, fit.coef, kind,
                                      views[0].presample_mu);
  fit.residuals.resize(static_cast<std::size_t>(fit.path.size()));
  for (int idx = 0; idx < fit.path.size(); ++idx)
    fit.residuals[static_cast<std::size_t>(idx)] =
        views[0].d[static_cast<std::size_t>(idx + order.m())] -
        fit.path.mu[static_cast<std::size_t>(idx)];
  return fit;
}

}  // namespace detail

double log_likelihood(const RankingSeries& series, ModelOrder order,
                      const Coefficients& coef, DistanceKind kind) {
  coef.validate();
  if (coef.order() != order)
    throw validation_error("coefficient shape does not match model order");
  const detail::DataView view = detail::make_view(series, kind);
  return detail::avg_loglik({&view, 1}, series.k(), order, coef, kind);
}

ScoreResult score_and_information(const RankingSeries& series, ModelOrder order,
                                  const Coefficients& coef, DistanceKind kind) {
  coef.validate();
  if (coef.order() != order)
    throw validation_error("coefficient shape does not match model order");
  const detail::DataView view = detail::make_view(series, kind);
  const int dim = 1 + order.p + order.q;
  ScoreResult out;
  out.score.resize(static_cast<std::size_t>(dim));
  out.information.resize(static_cast<std::size_t>(dim * dim));
  detail::avg_score_info({&view, 1}, series.k(), order, coef, kind, &out.loglik,
                         out.score, out.information);
  return out;
}

FitResult fit_mle(const RankingSeries& series, ModelOrder order, DistanceKind kind,
                  const FitOptions& options) {
  const detail::DataView view = detail::make_view(series, kind);
  return detail::fit_views({&view, 1}, series.k(), order, kind, options);
}

double residual_scale(int k, DistanceKind kind) {
  if (k < 1) throw validation_error("k must be positive");
  return kind == DistanceKind::kendall ? (k - 1) / 2.0 : 1.0;
}

OrderScanResult order_scan(const RankingSeries& series, DistanceKind kind, int p_max,
                           int q_max, const FitOptions& options) {
  if (p_max < 0 || q_max < 0) throw validation_error("scan bounds must be non-negative");
  // Shorter-memory candidates are fitted on a trimmed head so that every
  // cell conditions on the same terms; otherwise the cells with larger m
  // would sum fewer likelihood terms and the criteria would not compare.
  const int max_m = std::max(p_max, q_max);
  OrderScanResult result;
  double best_aic = std::numeric_limits<double>::infinity();
  double best_bic = std::numeric_limits<double>::infinity();
  for (int p = 0; p <= p_max; ++p) {
    for (int q = 0; q <= q_max; ++q) {
      OrderScanEntry entry;
      entry.order = {p, q};
      try {
        const int skip = max_m - std::max(p, q);
        RankingSeries aligned(series.k());
        for (int t = skip; t < series.size(); ++t) aligned.push_back(series.row(t));
        const FitResult fit = fit_mle(aligned, {p, q}, kind, options);
        entry.ok = true;
        entry.loglik = fit.loglik;
        entry.aic = fit.aic;
        entry.bic = fit.bic;
        entry.coef = fit.coef;
        entry.converged = fit.converged;
        if (fit.aic < best_aic) {
          best_aic = fit.aic;
          result.best_aic = entry.order;
        }
        if (fit.bic < best_bic) {
          best_bic = fit.bic;
          result.best_bic = entry.order;
        }
      } catch (const std::exception& e) {
        entry.message = e.what();
      }
      result.entries.push_back(std::move(entry));
    }
  }
  if (!std::isfinite(best_aic))
    throw convergence_error("every cell of the order scan failed");
  return result;
}

}  // namespace rgarch
