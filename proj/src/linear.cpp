//===-- linear.cpp ----------------------------------------------------------===//
//
//                        The VeriModel Toolkit
//
// This file is distributed under the MIT License. See LICENSE for details.
//
//===----------------------------------------------------------------------===//

#include "verimodel/linear.hpp"

#include <algorithm>
#include <cmath>

namespace verimodel {

Dataset dataset_from_csv(const CsvTable& table,
                         const std::vector<std::string>& feature_columns,
                         const std::string& response_column) {
  Dataset d;
  d.feature_names = feature_columns;
  d.response_name = response_column;
  std::vector<std::size_t> fidx;
  for (const auto& name : feature_columns) fidx.push_back(table.column(name));
  std::size_t ridx = table.column(response_column);
  std::size_t sidx = table.has_column("status") ? table.column("status")
                                                : static_cast<std::size_t>(-1);
  bool has_ids = table.has_column("run_index");
  std::size_t id_col = has_ids ? table.column("run_index") : 0;
  for (const auto& row : table.rows) {
    if (sidx != static_cast<std::size_t>(-1) && row[sidx] == "error") {
      throw ConfigError("observation table contains a failed run (status=error)");
    }
    std::vector<double> x;
    x.reserve(fidx.size());
    for (std::size_t i : fidx) x.push_back(std::stod(row[i]));
    d.features.push_back(std::move(x));
    d.response.push_back(std::stod(row[ridx]));
    if (has_ids) d.row_ids.push_back(std::stoll(row[id_col]));
  }
  return d;
}

Dataset log1p_response(const Dataset& data) {
  Dataset out = data;
  for (double& y : out.response) {
    if (y < 0.0) {
      throw FittingError("log1p response transform needs nonnegative values");
    }
    y = std::log1p(y);
  }
  out.response_name = "log1p(" + data.response_name + ")";
  return out;
}

namespace {

Matrix augmented_design(const Dataset& data) {
  Matrix x(data.size(), data.arity() + 1);
  for (std::size_t r = 0; r < data.size(); ++r) {
    x.at(r, 0) = 1.0;
    for (std::size_t c = 0; c < data.arity(); ++c) {
      x.at(r, c + 1) = data.features[r][c];
    }
  }
  return x;
}

}  // namespace

LinearModel fit_linear(const Dataset& data) {
  const std::size_t n = data.size();
  const std::size_t p = data.arity();
  if (n <= p + 1) {
    throw FittingError("TooFewRows: need more than " + std::to_string(p + 1) +
                       " rows to fit " + std::to_string(p) +
                       " features, got " + std::to_string(n));
  }
  for (const auto& row : data.features) {
    if (row.size() != p) throw FittingError("ragged dataset row");
  }

  Matrix x = augmented_design(data);
  QrDecomposition qr = qr_decompose(x);
  auto bad = qr.deficient_columns();
  if (!bad.empty()) {
    std::vector<std::string> names;
    std::string msg = "RankDeficient: collinear columns:";
    for (std::size_t j : bad) {
      std::string name = j == 0 ? "<intercept>" : data.feature_names[j - 1];
      names.push_back(name);
      msg += " " + name;
    }
    throw RankDeficientError(std::move(names), msg);
  }

  LinearModel model;
  std::vector<double> beta = qr.solve(data.response);
  model.intercept = beta[0];
  model.coefficients.assign(beta.begin() + 1, beta.end());
  model.feature_names = data.feature_names;
  model.n = n;
  model.xtx_inverse = qr.normal_matrix_inverse();
  model.training = data;

  double ssr = 0.0;
  double mean = 0.0;
  for (double y : data.response) mean += y;
  mean /= static_cast<double>(n);
  double sst = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    double yhat = model.intercept;
    for (std::size_t c = 0; c < p; ++c) {
      yhat += model.coefficients[c] * data.features[r][c];
    }
    double res = data.response[r] - yhat;
    ssr += res * res;
    sst += (data.response[r] - mean) * (data.response[r] - mean);
  }
  model.residual_std = std::sqrt(ssr / static_cast<double>(n - p - 1));
  model.r_squared = sst == 0.0 ? (ssr == 0.0 ? 1.0 : 0.0) : 1.0 - ssr / sst;
  return model;
}

double predict(const LinearModel& model, const std::vector<double>& x) {
  if (x.size() != model.coefficients.size()) {
    throw FittingError("ArityMismatch: model has " +
                       std::to_string(model.coefficients.size()) +
                       " features, point has " + std::to_string(x.size()));
  }
  double y = model.intercept;
  for (std::size_t i = 0; i < x.size(); ++i) y += model.coefficients[i] * x[i];
  return y;
}

//===----------------------------------------------------------------------===//
// Student-t quantile
//===----------------------------------------------------------------------===//

namespace {

// Acklam's rational approximation to the standard normal quantile.
double normal_quantile(double p) {
  static const double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                              -2.759285104469687e+02, 1.383577518672690e+02,
                              -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                              -1.556989798598866e+02, 6.680131188771972e+01,
                              -1.328068155288572e+01};
  static const double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                              -2.400758277161838e+00, -2.549732539343734e+00,
                              4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                              2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  if (p < plow) {
    double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p > 1.0 - plow) {
    double q = std::sqrt(-2.0 * std::log(1.0 - p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  double q = p - 0.5;
  double r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

double log_gamma(double x) { return std::lgamma(x); }

// Regularized incomplete beta by the standard continued fraction (modified
// Lentz iteration).
double betacf(double a, double b, double x) {
  const int kMaxIter = 200;
  const double kEps = 3e-16;
  const double kFpMin = 1e-300;
  double qab = a + b;
  double qap = a + 1.0;
  double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kFpMin) d = kFpMin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::abs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::abs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return h;
}

double incomplete_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  double ln_front = log_gamma(a + b) - log_gamma(a) - log_gamma(b) +
                    a * std::log(x) + b * std::log(1.0 - x);
  double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * betacf(a, b, x) / a;
  }
  return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

double student_t_pdf(double t, double df) {
  double ln = log_gamma((df + 1.0) / 2.0) - log_gamma(df / 2.0) -
              0.5 * std::log(df * 3.14159265358979323846) -
              (df + 1.0) / 2.0 * std::log1p(t * t / df);
  return std::exp(ln);
}

}  // namespace

double student_t_cdf(double t, double df) {
  double x = df / (df + t * t);
  double ib = incomplete_beta(df / 2.0, 0.5, x);
  return t >= 0.0 ? 1.0 - 0.5 * ib : 0.5 * ib;
}

double student_t_quantile(double p, double df) {
  if (!(p > 0.0 && p < 1.0)) {
    throw FittingError("t quantile needs 0 < p < 1");
  }
  if (df < 1.0) throw FittingError("t quantile needs df >= 1");
  if (p == 0.5) return 0.0;
  if (df == 1.0) return std::tan(3.14159265358979323846 * (p - 0.5));
  if (df == 2.0) {
    double u = 2.0 * p - 1.0;
    return u * std::sqrt(2.0 / (1.0 - u * u));
  }

  // Cornish-Fisher expansion around the normal quantile as the start value.
  double z = normal_quantile(p);
  double z3 = z * z * z, z5 = z3 * z * z, z7 = z5 * z * z, z9 = z7 * z * z;
  double d = df;
  double t = z + (z3 + z) / (4.0 * d) +
             (5.0 * z5 + 16.0 * z3 + 3.0 * z) / (96.0 * d * d) +
             (3.0 * z7 + 19.0 * z5 + 17.0 * z3 - 15.0 * z) / (384.0 * d * d * d) +
             (79.0 * z9 + 776.0 * z7 + 1482.0 * z5 - 1920.0 * z3 - 945.0 * z) /
                 (92160.0 * d * d * d * d);

  // Newton polish on the exact CDF.
  for (int iter = 0; iter < 12; ++iter) {
    double err = student_t_cdf(t, df) - p;
    double slope = student_t_pdf(t, df);
    if (slope <= 0.0) break;
    double step = err / slope;
    t -= step;
    if (std::abs(step) < 1e-12 * std::max(1.0, std::abs(t))) break;
  }
  return t;
}

std::pair<double, double> prediction_interval(const LinearModel& model,
                                              const std::vector<double>& x,
                                              double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw FittingError("alpha must lie strictly between 0 and 1");
  }
  const std::size_t p = model.coefficients.size();
  if (model.n <= p + 1) {
    throw FittingError("DegreesOfFreedomTooSmall: n = " + std::to_string(model.n) +
                       " with " + std::to_string(p) + " features");
  }
  double yhat = predict(model, x);
  // Leverage against the stored training design.
  std::vector<double> xa(p + 1, 1.0);
  for (std::size_t i = 0; i < p; ++i) xa[i + 1] = x[i];
  std::vector<double> tmp = model.xtx_inverse.multiply(xa);
  double leverage = 0.0;
  for (std::size_t i = 0; i <= p; ++i) leverage += xa[i] * tmp[i];

  double df = static_cast<double>(model.n - p - 1);
  double t = student_t_quantile(1.0 - alpha / 2.0, df);
  double half = t * model.residual_std * std::sqrt(1.0 + leverage);
  return {yhat - half, yhat + half};
}

}  // namespace verimodel
