#include "rgarch/mallows.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rgarch/errors.hpp"

namespace rgarch {

MallowsSpec::MallowsSpec(Permutation mode_, double theta_, DistanceKind kind_)
    : mode(std::move(mode_)), theta(theta_), kind(kind_) {
  if (!(theta > 0)) throw validation_error("theta must be positive");
}

double theta_cap(int k) {
  if (k < 1) throw validation_error("k must be positive");
  return 700.0 / k;
}

namespace {

void check_theta(double theta) {
  if (!(theta > 0)) throw validation_error("theta must be positive");
}

// Below this spread the Kendall closed forms subtract two nearly equal
// O(1/theta) terms; the per-component sums take over there.
constexpr double kKendallSwitch = 0.01;

// ---- Kendall: distance = sum of independent inversion components ----
// Component j (j = 1..k) takes values 0..j-1 with weights e^(-theta*v).

double kendall_log_psi(double theta, int k) {
  // log prod_{j=2..k} (1 - e^(-j*theta)) / (1 - e^(-theta))
  const double log_denom = std::log(-std::expm1(-theta));
  double s = 0;
  for (int j = 2; j <= k; ++j)
    s += std::log(-std::expm1(-j * theta)) - log_denom;
  return s;
}

double kendall_mean_closed(double theta, int k) {
  const double x = std::exp(-theta);
  const double one_minus_x = -std::expm1(-theta);
  double mean = k * x / one_minus_x;
  double xj = 1;
  for (int j = 1; j <= k; ++j) {
    xj *= x;
    mean -= j * xj / (1 - xj);
  }
  return mean;
}

double kendall_var_closed(double theta, int k) {
  const double x = std::exp(-theta);
  const double one_minus_x = -std::expm1(-theta);
  double var = k * x / (one_minus_x * one_minus_x);
  double xj = 1;
  for (int j = 1; j <= k; ++j) {
    xj *= x;
    const double denom = 1 - xj;
    var -= static_cast<double>(j) * j * xj / (denom * denom);
  }
  return var;
}

// Component-wise moments summed directly; O(k^2) but free of cancellation.
void kendall_moments_direct(double theta, int k, double* mean_out, double* var_out) {
  const double x = std::exp(-theta);
  double mean = 0, var = 0;
  for (int j = 1; j <= k; ++j) {
    double w = 1, sw = 0, svw = 0;
    for (int v = 0; v < j; ++v) {
      sw += w;
      svw += v * w;
      w *= x;
    }
    const double ev = svw / sw;
    mean += ev;
    if (var_out) {
      double sq = 0;
      w = 1;
      for (int v = 0; v < j; ++v) {
        const double c = v - ev;
        sq += c * c * w;
        w *= x;
      }
      var += sq / sw;
    }
  }
  if (mean_out) *mean_out = mean;
  if (var_out) *var_out = var;
}

// ---- Hamming: moments through the distance law ----
// P(d = j) is proportional to C(k, j) * D_j * e^(-theta*j) with D_j the
// number of derangements of j items; D_j = j! * S_j where
// S_j = sum_{i=0..j} (-1)^i / i! (so S_1 = 0 and d = 1 is impossible).

double hamming_log_a(double theta, int m) {
  // log sum_{j=0..m} (e^theta - 1)^j / j!, with the j-th term built in logs.
  const double logc = theta + std::log(-std::expm1(-theta));
  double max_term = 0, log_fact = 0;
  std::vector<double> terms;
  terms.reserve(static_cast<std::size_t>(m) + 1);
  terms.push_back(0);
  for (int j = 1; j <= m; ++j) {
    log_fact += std::log(static_cast<double>(j));
    terms.push_back(j * logc - log_fact);
    max_term = std::max(max_term, terms.back());
  }
  double s = 0;
  for (double t : terms) s += std::exp(t - max_term);
  return max_term + std::log(s);
}

double hamming_log_psi(double theta, int k) {
  return std::lgamma(k + 1.0) - k * theta + hamming_log_a(theta, k);
}

double hamming_mean(double theta, int k) {
  if (k == 1) return 0;
  return k - std::exp(theta + hamming_log_a(theta, k - 1) - hamming_log_a(theta, k));
}

void hamming_distance_law(double theta, int k, double* mean_out, double* var_out) {
  // log weight of distance j, skipping the impossible j = 1.
  std::vector<double> logw;
  std::vector<int> vals;
  double lff = 0;        // log falling factorial k*(k-1)*...*(k-j+1)
  double s = 1;          // S_j
  double sign_term = 1;  // (-1)^j / j!
  logw.push_back(0);
  vals.push_back(0);
  for (int j = 1; j <= k; ++j) {
    lff += std::log(static_cast<double>(k - j + 1));
    sign_term /= -j;
    s += sign_term;
    if (j == 1) continue;
    logw.push_back(lff + std::log(s) - theta * j);
    vals.push_back(j);
  }
  const double mx = *std::max_element(logw.begin(), logw.end());
  double total = 0;
  for (double lw : logw) total += std::exp(lw - mx);
  double mean = 0;
  for (std::size_t i = 0; i < logw.size(); ++i)
    mean += vals[i] * std::exp(logw[i] - mx) / total;
  if (mean_out) *mean_out = mean;
  if (var_out) {
    double var = 0;
    for (std::size_t i = 0; i < logw.size(); ++i) {
      const double c = vals[i] - mean;
      var += c * c * std::exp(logw[i] - mx) / total;
    }
    *var_out = var;
  }
}

}  // namespace

double log_psi(double theta, int k, DistanceKind kind) {
  check_theta(theta);
  if (k < 1) throw validation_error("k must be positive");
  return kind == DistanceKind::kendall ? kendall_log_psi(theta, k)
                                       : hamming_log_psi(theta, k);
}

double psi(double theta, int k, DistanceKind kind) {
  const double lp = log_psi(theta, k, kind);
  if (lp > 709.0)
    throw std::overflow_error("psi overflows double; use log_psi");
  return std::exp(lp);
}

double mean_distance(double theta, int k, DistanceKind kind) {
  check_theta(theta);
  if (k < 1) throw validation_error("k must be positive");
  if (kind == DistanceKind::kendall) {
    if (theta >= kKendallSwitch) return kendall_mean_closed(theta, k);
    double mean;
    kendall_moments_direct(theta, k, &mean, nullptr);
    return mean;
  }
  return hamming_mean(theta, k);
}

double variance_distance(double theta, int k, DistanceKind kind) {
  check_theta(theta);
  if (k < 1) throw validation_error("k must be positive");
  if (kind == DistanceKind::kendall) {
    if (theta >= kKendallSwitch) return kendall_var_closed(theta, k);
    double var;
    kendall_moments_direct(theta, k, nullptr, &var);
    return var;
  }
  double var;
  hamming_distance_law(theta, k, nullptr, &var);
  return var;
}

double log_pmf(const Permutation& pi, const MallowsSpec& spec) {
  if (pi.k() != spec.k()) throw validation_error("ranking size differs from mode");
  if (spec.theta >= theta_cap(spec.k()))
    return pi == spec.mode ? 0.0 : -std::numeric_limits<double>::infinity();
  return -spec.theta * distance(pi, spec.mode, spec.kind) -
         log_psi(spec.theta, spec.k(), spec.kind);
}

// ---- sampling ----

namespace {

// Inverse CDF of P(v) proportional to e^(-theta*v) on {0..r}.
int truncated_geometric(double theta, int r, Rng& rng) {
  if (r == 0) return 0;
  const double u = rng.uniform();
  // CDF(v) = (1 - e^(-theta(v+1))) / (1 - e^(-theta(r+1))); expm1 keeps the
  // inversion exact for both tiny and huge theta.
  const double tail = std::expm1(-theta * (r + 1));
  const double x = std::log1p(u * tail) / -theta;
  const int v = static_cast<int>(std::ceil(x)) - 1;
  return std::clamp(v, 0, r);
}

}  // namespace

MallowsSampler::MallowsSampler(MallowsSpec spec) : spec_(std::move(spec)) {}

Permutation MallowsSampler::draw(Rng& rng) {
  if (spec_.theta >= theta_cap(spec_.k())) return spec_.mode;
  return spec_.kind == DistanceKind::kendall ? draw_kendall(rng) : draw_hamming(rng);
}

Permutation MallowsSampler::draw_kendall(Rng& rng) {
  const int k = spec_.k();
  // Draw the inversion table of a Mallows ranking centred at the identity:
  // component i takes values 0..k-i with weights e^(-theta*v).
  std::vector<int> avail(static_cast<std::size_t>(k));
  for (int r = 1; r <= k; ++r) avail[static_cast<std::size_t>(r - 1)] = r;
  std::vector<int> sigma(static_cast<std::size_t>(k));
  for (int i = 1; i <= k; ++i) {
    const int v = truncated_geometric(spec_.theta, k - i, rng);
    sigma[static_cast<std::size_t>(i - 1)] = avail[static_cast<std::size_t>(v)];
    avail.erase(avail.begin() + v);
  }
  // Translate to the requested mode; both distances are right-invariant, so
  // sigma composed with the mode has the same distance law about the mode.
  std::vector<int> out(static_cast<std::size_t>(k));
  for (int item = 1; item <= k; ++item)
    out[static_cast<std::size_t>(item - 1)] =
        sigma[static_cast<std::size_t>(spec_.mode(item) - 1)];
  return Permutation(std::move(out), Permutation::unchecked_tag{});
}

void MallowsSampler::metropolis_steps(int n, Rng& rng) {
  const int k = spec_.k();
  const std::vector<int>& mode = spec_.mode.ranks();
  const double acc1 = std::exp(-spec_.theta);
  const double acc2 = acc1 * acc1;
  for (int step = 0; step < n; ++step) {
    int i = static_cast<int>(rng.below(static_cast<std::uint64_t>(k)));
    int j = static_cast<int>(rng.below(static_cast<std::uint64_t>(k - 1)));
    if (j >= i) ++j;
    const std::size_t si = static_cast<std::size_t>(i), sj = static_cast<std::size_t>(j);
    const int before = (chain_[si] == mode[si]) + (chain_[sj] == mode[sj]);
    const int after = (chain_[sj] == mode[si]) + (chain_[si] == mode[sj]);
    const int delta = before - after;  // change in mismatch count
    bool accept = delta <= 0;
    if (!accept) {
      const double p = delta == 1 ? acc1 : acc2;
      accept = rng.uniform() < p;
    }
    if (accept) {
      std::swap(chain_[si], chain_[sj]);
      chain_dist_ += delta;
    }
  }
}

Permutation MallowsSampler::draw_hamming(Rng& rng) {
  const int k = spec_.k();
  if (k == 1) return spec_.mode;
  if (!warmed_up_) {
    chain_ = spec_.mode.ranks();
    chain_dist_ = 0;
    metropolis_steps(50 * k, rng);
    warmed_up_ = true;
  } else {
    metropolis_steps(k, rng);
  }
  return Permutation(chain_, Permutation::unchecked_tag{});
}

Permutation sample_mallows(const MallowsSpec& spec, Rng& rng) {
  MallowsSampler sampler(spec);
  return sampler.draw(rng);
}

}  // namespace rgarch
