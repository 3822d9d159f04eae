#include "rgarch/replication.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

#include "rgarch/errors.hpp"
#include "rgarch/io.hpp"

namespace rgarch {

namespace {

constexpr std::uint64_t kEmSeedLabel = 0xe3;

void run_one(const ReplicationConfig& config, int i, ReplicationRep& slot) {
  slot.rep = i;
  try {
    Rng rng(derive_seed(config.seed, static_cast<std::uint64_t>(i)));
    RankingSeries series =
        simulate(config.k, config.n, config.truth, config.kind, rng).series;
    if (config.missing_fraction > 0)
      inject_missingness(series, config.missing_fraction, rng);

    const ModelOrder order = config.truth.order();
    FitResult fit;
    if (config.use_mcem || config.missing_fraction > 0) {
      McemOptions mo = config.mcem;
      mo.fit = config.fit;
      mo.seed = derive_seed(config.seed, static_cast<std::uint64_t>(i), kEmSeedLabel);
      fit = mcem_fit(series, order, config.kind, mo).fit;
    } else {
      fit = fit_mle(series, order, config.kind, config.fit);
    }
    slot.ok = true;
    slot.converged = fit.converged;
    slot.estimate = fit.coef.flat();
    slot.std_errors = fit.std_errors;
    if (!fit.converged) slot.message = "fit did not converge";
  } catch (const std::exception& e) {
    slot.ok = false;
    slot.message = e.what();
  }
}

}  // namespace

void ReplicationConfig::validate() const {
  truth.validate();
  if (k < 2) throw validation_error("k must be at least 2");
  if (n < truth.order().m() + 2)
    throw validation_error("n must cover the lag window: need max(p, q) + 2 rows");
  if (reps < 1) throw validation_error("reps must be at least 1");
  if (workers < 1) throw validation_error("workers must be at least 1");
  if (!(missing_fraction >= 0 && missing_fraction < 1))
    throw validation_error("missing fraction must lie in [0, 1)");
  if (!check_stationarity(truth).stationary)
    throw validation_error("generating coefficients must be stationary");
  mcem.validate();
}

ReplicationResult run_replications(const ReplicationConfig& config) {
  config.validate();
  ReplicationResult result;
  result.reps.resize(static_cast<std::size_t>(config.reps));

  const int workers = std::min(config.workers, config.reps);
  if (workers <= 1) {
    for (int i = 0; i < config.reps; ++i)
      run_one(config, i, result.reps[static_cast<std::size_t>(i)]);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (;;) {
          const int i = next.fetch_add(1);
          if (i >= config.reps) return;
          run_one(config, i, result.reps[static_cast<std::size_t>(i)]);
        }
      });
    }
    for (auto& th : pool) th.join();
  }

  const std::vector<double> truth_flat = config.truth.flat();
  const int dim = static_cast<int>(truth_flat.size());
  std::vector<std::vector<double>> by_coef(static_cast<std::size_t>(dim));
  std::vector<std::vector<double>> se_by_coef(static_cast<std::size_t>(dim));
  for (const ReplicationRep& r : result.reps) {
    result.n_ok += r.ok;
    if (!r.ok || !r.converged) continue;
    ++result.n_converged;
    for (int j = 0; j < dim; ++j) {
      by_coef[static_cast<std::size_t>(j)].push_back(r.estimate[static_cast<std::size_t>(j)]);
      const double se = r.std_errors[static_cast<std::size_t>(j)];
      if (std::isfinite(se)) se_by_coef[static_cast<std::size_t>(j)].push_back(se);
    }
  }

  if (result.n_converged > 0) {
    for (int j = 0; j < dim; ++j) {
      CoefficientSummary s;
      s.name = j == 0 ? "phi0"
                      : (j <= config.truth.order().p
                             ? "phi" + std::to_string(j)
                             : "alpha" + std::to_string(j - config.truth.order().p));
      s.truth = truth_flat[static_cast<std::size_t>(j)];
      const auto& xs = by_coef[static_cast<std::size_t>(j)];
      double sum = 0;
      for (double v : xs) sum += v;
      s.mean = sum / static_cast<double>(xs.size());
      double ss = 0, se2 = 0;
      for (double v : xs) {
        ss += (v - s.mean) * (v - s.mean);
        se2 += (v - s.truth) * (v - s.truth);
      }
      s.sd = xs.size() > 1 ? std::sqrt(ss / static_cast<double>(xs.size() - 1)) : 0;
      s.mse = se2 / static_cast<double>(xs.size());
      const auto& ses = se_by_coef[static_cast<std::size_t>(j)];
      if (!ses.empty()) {
        double se_sum = 0;
        for (double v : ses) se_sum += v;
        s.mean_se = se_sum / static_cast<double>(ses.size());
      } else {
        s.mean_se = std::numeric_limits<double>::quiet_NaN();
      }
      result.summary.push_back(std::move(s));
    }
  }
  return result;
}

std::string replication_summary_json(const ReplicationConfig& config,
                                     const ReplicationResult& result) {
  auto arr = [](const std::vector<double>& xs) {
    std::string out = "[";
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (i) out += ',';
      out += format_double(xs[i]);
    }
    return out + "]";
  };
  auto num_or_null = [](double x) {
    return std::isfinite(x) ? format_double(x) : std::string("null");
  };

  std::string j = "{";
  j += "\"k\":" + std::to_string(config.k);
  j += ",\"n\":" + std::to_string(config.n);
  j += ",\"distance\":\"" + std::string(to_string(config.kind)) + "\"";
  j += ",\"order\":{\"p\":" + std::to_string(config.truth.order().p) +
       ",\"q\":" + std::to_string(config.truth.order().q) + "}";
  j += ",\"reps\":" + std::to_string(config.reps);
  j += ",\"seed\":" + std::to_string(config.seed);
  j += ",\"missing_fraction\":" + format_double(config.missing_fraction);
  j += ",\"used_mcem\":" +
       std::string(config.use_mcem || config.missing_fraction > 0 ? "true" : "false");
  j += ",\"truth\":{\"phi0\":" + format_double(config.truth.phi0) + ",\"phi\":" +
       arr(config.truth.phi) + ",\"alpha\":" + arr(config.truth.alpha) + "}";
  j += ",\"n_ok\":" + std::to_string(result.n_ok);
  j += ",\"n_converged\":" + std::to_string(result.n_converged);
  j += ",\"coefficients\":[";
  for (std::size_t i = 0; i < result.summary.size(); ++i) {
    const CoefficientSummary& s = result.summary[i];
    if (i) j += ',';
    j += "{\"name\":\"" + s.name + "\",\"truth\":" + format_double(s.truth) +
         ",\"mean\":" + format_double(s.mean) + ",\"sd\":" + format_double(s.sd) +
         ",\"mse\":" + format_double(s.mse) + ",\"mean_se\":" + num_or_null(s.mean_se) + "}";
  }
  j += "]}";
  return j;
}

}  // namespace rgarch
