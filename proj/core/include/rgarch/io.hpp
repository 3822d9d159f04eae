#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "rgarch/inference.hpp"
#include "rgarch/mcem.hpp"
#include "rgarch/process.hpp"

namespace rgarch {

/// Full-precision text form of a double: printf %.17g, enough significant
/// digits to reproduce the exact bit pattern on read-back.
std::string format_double(double x);

/// Rankings CSV: header item_1,...,item_k, one ranking per row, ranks
/// 1-based, missing entries written as NA.  Parse errors carry the origin
/// and 1-based line number.
RankingSeries read_rankings_csv(const std::string& path);
RankingSeries parse_rankings_csv(std::istream& in, const std::string& origin);
void write_rankings_csv(const std::string& path, const RankingSeries& series);
void write_rankings_csv(std::ostream& out, const RankingSeries& series);

/// Fit summary as a JSON object (text).  All numbers are serialized at full
/// precision.
std::string fit_result_json(const FitResult& fit);

/// Columns row,mu,theta; `row` is the 0-based index of the row each term
/// transitions into.
void write_mean_path_csv(std::ostream& out, const ConditionalMeanPath& path);
void write_mean_path_csv(const std::string& path, const ConditionalMeanPath& mean_path);

/// Columns row,residual,scaled with the per-item scaling of residual_scale.
void write_residuals_csv(std::ostream& out, const FitResult& fit);
void write_residuals_csv(const std::string& path, const FitResult& fit);

/// Columns lag,acf,pacf and optionally a model-implied correlation column.
void write_acf_csv(std::ostream& out, const AcfPacf& acf,
                   const std::vector<double>* theoretical = nullptr);
void write_acf_csv(const std::string& path, const AcfPacf& acf,
                   const std::vector<double>* theoretical = nullptr);

/// One row per EM iteration: counts, objective, gain statistics and the
/// coefficient vector of that iteration.
void write_mcem_trace_csv(std::ostream& out, const McemResult& result);
void write_mcem_trace_csv(const std::string& path, const McemResult& result);

/// One row per candidate order of a scan.
void write_order_scan_csv(std::ostream& out, const OrderScanResult& scan);
void write_order_scan_csv(const std::string& path, const OrderScanResult& scan);

}  // namespace rgarch
