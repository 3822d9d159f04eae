#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rgarch/inference.hpp"
#include "rgarch/mcem.hpp"
#include "rgarch/process.hpp"

namespace rgarch {

/// A simulate-and-refit experiment: draw `reps` independent series from the
/// generating coefficients, optionally degrade them with missing ranks, fit
/// each one, and summarize the sampling distribution of the estimates.
struct ReplicationConfig {
  int k = 10;
  int n = 500;
  Coefficients truth;
  DistanceKind kind = DistanceKind::kendall;
  int reps = 100;
  std::uint64_t seed = 20240817;
  int workers = 1;
  /// Fraction of table cells deleted before fitting; > 0 forces the EM
  /// fitter.
  double missing_fraction = 0;
  bool use_mcem = false;
  McemOptions mcem;
  FitOptions fit;

  void validate() const;
};

struct ReplicationRep {
  int rep = 0;
  /// A fit was produced (no exception).
  bool ok = false;
  bool converged = false;
  /// Flat coefficient estimates and their standard errors; empty when !ok.
  std::vector<double> estimate;
  std::vector<double> std_errors;
  std::string message;  // failure reason when !ok
};

struct CoefficientSummary {
  std::string name;
  double truth = 0;
  double mean = 0;
  double sd = 0;
  double mse = 0;
  /// Average reported standard error; compare against sd for calibration.
  double mean_se = 0;
};

struct ReplicationResult {
  std::vector<ReplicationRep> reps;
  /// Per-coefficient statistics over the converged replications.
  std::vector<CoefficientSummary> summary;
  int n_ok = 0;
  int n_converged = 0;
};

/// Runs the experiment.  Replication i derives its seed from (seed, i), so
/// results are independent of the worker count and of which other
/// replications run.
ReplicationResult run_replications(const ReplicationConfig& config);

/// Summary as a JSON object (text) with full-precision numbers.
std::string replication_summary_json(const ReplicationConfig& config,
                                     const ReplicationResult& result);

}  // namespace rgarch
