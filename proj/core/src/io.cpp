#include "rgarch/io.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "rgarch/errors.hpp"

namespace rgarch {

namespace {

std::string trimmed(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(trimmed(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  fields.push_back(trimmed(cur));
  return fields;
}

[[noreturn]] void parse_fail(const std::string& origin, int line_no, const std::string& what) {
  throw validation_error(origin + " line " + std::to_string(line_no) + ": " + what);
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw validation_error("cannot open '" + path + "' for writing");
  return out;
}

/// Quotes a free-text CSV field, doubling embedded quotes.
std::string csv_quoted(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    out += c;
    if (c == '"') out += '"';
  }
  out += '"';
  return out;
}

void append_json_number(std::string& out, double x) { out += format_double(x); }

void append_json_array(std::string& out, const std::vector<double>& xs) {
  out += '[';
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ',';
    append_json_number(out, xs[i]);
  }
  out += ']';
}

}  // namespace

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

RankingSeries parse_rankings_csv(std::istream& in, const std::string& origin) {
  std::string line;
  if (!std::getline(in, line)) throw validation_error(origin + ": empty file");
  int line_no = 1;

  const std::vector<std::string> header = split_csv_line(line);
  const int k = static_cast<int>(header.size());
  if (k < 2) parse_fail(origin, line_no, "header needs at least two item columns");
  for (int i = 0; i < k; ++i) {
    const std::string want = "item_" + std::to_string(i + 1);
    if (header[static_cast<std::size_t>(i)] != want)
      parse_fail(origin, line_no,
                 "expected header column '" + want + "', found '" +
                     header[static_cast<std::size_t>(i)] + "'");
  }

  RankingSeries series(k);
  while (std::getline(in, line)) {
    ++line_no;
    if (trimmed(line).empty()) continue;
    const std::vector<std::string> fields = split_csv_line(line);
    if (static_cast<int>(fields.size()) != k)
      parse_fail(origin, line_no,
                 "expected " + std::to_string(k) + " fields, found " +
                     std::to_string(fields.size()));
    std::vector<int> entries(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) {
      const std::string& f = fields[static_cast<std::size_t>(i)];
      if (f == "NA") {
        entries[static_cast<std::size_t>(i)] = PartialRanking::missing;
        continue;
      }
      try {
        std::size_t used = 0;
        const int v = std::stoi(f, &used);
        if (used != f.size()) throw std::invalid_argument(f);
        entries[static_cast<std::size_t>(i)] = v;
      } catch (const std::exception&) {
        parse_fail(origin, line_no, "field '" + f + "' is neither a rank nor NA");
      }
    }
    try {
      series.push_back(PartialRanking(std::move(entries)));
    } catch (const validation_error& e) {
      parse_fail(origin, line_no, e.what());
    }
  }
  if (series.size() == 0) throw validation_error(origin + ": no data rows");
  return series;
}

RankingSeries read_rankings_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw validation_error("cannot open '" + path + "'");
  return parse_rankings_csv(in, path);
}

void write_rankings_csv(std::ostream& out, const RankingSeries& series) {
  const int k = series.k();
  for (int i = 0; i < k; ++i) out << (i ? "," : "") << "item_" << (i + 1);
  out << '\n';
  for (int t = 0; t < series.size(); ++t) {
    const auto& entries = series.row(t).entries();
    for (int i = 0; i < k; ++i) {
      if (i) out << ',';
      if (entries[static_cast<std::size_t>(i)] == PartialRanking::missing)
        out << "NA";
      else
        out << entries[static_cast<std::size_t>(i)];
    }
    out << '\n';
  }
}

void write_rankings_csv(const std::string& path, const RankingSeries& series) {
  auto out = open_out(path);
  write_rankings_csv(out, series);
}

std::string fit_result_json(const FitResult& fit) {
  const StationarityCheck st = check_stationarity(fit.coef);
  std::string j = "{";
  j += "\"k\":" + std::to_string(fit.k);
  j += ",\"order\":{\"p\":" + std::to_string(fit.order.p) +
       ",\"q\":" + std::to_string(fit.order.q) + "}";
  j += ",\"distance\":\"" + std::string(to_string(fit.kind)) + "\"";
  j += ",\"coefficients\":{\"phi0\":";
  append_json_number(j, fit.coef.phi0);
  j += ",\"phi\":";
  append_json_array(j, fit.coef.phi);
  j += ",\"alpha\":";
  append_json_array(j, fit.coef.alpha);
  j += "}";
  j += ",\"std_errors\":";
  append_json_array(j, fit.std_errors);
  j += ",\"loglik\":";
  append_json_number(j, fit.loglik);
  j += ",\"aic\":";
  append_json_number(j, fit.aic);
  j += ",\"bic\":";
  append_json_number(j, fit.bic);
  j += ",\"n_terms\":" + std::to_string(fit.n_used);
  j += ",\"converged\":" + std::string(fit.converged ? "true" : "false");
  j += ",\"se_degenerate\":" + std::string(fit.se_degenerate ? "true" : "false");
  j += ",\"persistence\":";
  append_json_number(j, fit.coef.persistence());
  j += ",\"stationary\":" + std::string(st.stationary ? "true" : "false");
  if (st.stationary) {
    j += ",\"unconditional_mean\":";
    append_json_number(j, unconditional_mean(fit.coef));
  }
  j += "}";
  return j;
}

void write_mean_path_csv(std::ostream& out, const ConditionalMeanPath& path) {
  out << "row,mu,theta\n";
  for (int j = 0; j < path.size(); ++j)
    out << (path.first_row + j) << ',' << format_double(path.mu[static_cast<std::size_t>(j)])
        << ',' << format_double(path.theta[static_cast<std::size_t>(j)]) << '\n';
}

void write_mean_path_csv(const std::string& path, const ConditionalMeanPath& mean_path) {
  auto out = open_out(path);
  write_mean_path_csv(out, mean_path);
}

void write_residuals_csv(std::ostream& out, const FitResult& fit) {
  const double scale = residual_scale(fit.k, fit.kind);
  out << "row,residual,scaled\n";
  for (std::size_t j = 0; j < fit.residuals.size(); ++j)
    out << (fit.path.first_row + static_cast<int>(j)) << ',' << format_double(fit.residuals[j])
        << ',' << format_double(fit.residuals[j] / scale) << '\n';
}

void write_residuals_csv(const std::string& path, const FitResult& fit) {
  auto out = open_out(path);
  write_residuals_csv(out, fit);
}

void write_acf_csv(std::ostream& out, const AcfPacf& acf, const std::vector<double>* theoretical) {
  out << "lag,acf,pacf";
  if (theoretical) out << ",model_rho";
  out << '\n';
  for (std::size_t h = 1; h < acf.acf.size(); ++h) {
    out << h << ',' << format_double(acf.acf[h]) << ',' << format_double(acf.pacf[h]);
    if (theoretical) out << ',' << format_double((*theoretical)[h]);
    out << '\n';
  }
}

void write_acf_csv(const std::string& path, const AcfPacf& acf,
                   const std::vector<double>* theoretical) {
  auto out = open_out(path);
  write_acf_csv(out, acf, theoretical);
}

void write_mcem_trace_csv(std::ostream& out, const McemResult& result) {
  const ModelOrder order = result.fit.order;
  out << "iteration,n_imputations,q_value,delta_mean,delta_se,ratio_sd,heldout_loglik,accepted,"
         "phi0";
  for (int i = 1; i <= order.p; ++i) out << ",phi" << i;
  for (int j = 1; j <= order.q; ++j) out << ",alpha" << j;
  out << '\n';
  for (const McemIteration& it : result.trace) {
    out << it.iteration << ',' << it.n_imputations << ',' << format_double(it.q_value) << ','
        << format_double(it.delta_mean) << ',' << format_double(it.delta_se) << ','
        << format_double(it.ratio_sd) << ',' << format_double(it.heldout_loglik) << ','
        << (it.accepted ? 1 : 0);
    for (double v : it.coef.flat()) out << ',' << format_double(v);
    out << '\n';
  }
}

void write_mcem_trace_csv(const std::string& path, const McemResult& result) {
  auto out = open_out(path);
  write_mcem_trace_csv(out, result);
}

void write_order_scan_csv(std::ostream& out, const OrderScanResult& scan) {
  out << "p,q,ok,converged,loglik,aic,bic,message\n";
  for (const OrderScanEntry& e : scan.entries) {
    out << e.order.p << ',' << e.order.q << ',' << (e.ok ? 1 : 0) << ','
        << (e.converged ? 1 : 0) << ',';
    if (e.ok)
      out << format_double(e.loglik) << ',' << format_double(e.aic) << ','
          << format_double(e.bic);
    else
      out << ",,";
    out << ',' << csv_quoted(e.message) << '\n';
  }
}

void write_order_scan_csv(const std::string& path, const OrderScanResult& scan) {
  auto out = open_out(path);
  write_order_scan_csv(out, scan);
}

}  // namespace rgarch
