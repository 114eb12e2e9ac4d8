#include "geoaff/regression.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "geoaff/affinity.hpp"
#include "geoaff/errors.hpp"
#include "geoaff/stats.hpp"

namespace geoaff {

const char* to_string(FitMethod m) {
  switch (m) {
    case FitMethod::ols: return "ols";
    case FitMethod::ols_hc1: return "ols_hc1";
    case FitMethod::m_huber_bisquare: return "m_huber_bisquare";
  }
  return "ols";
}

namespace {

// Column-pivoted QR with an explicit rank check; names the dependent columns
// on failure so callers can see what collided.
Eigen::ColPivHouseholderQR<Matrix> full_rank_qr(
    const Matrix& X, const std::vector<std::string>& terms) {
  Eigen::ColPivHouseholderQR<Matrix> qr(X);
  const auto rank = qr.rank();
  if (rank < X.cols()) {
    const auto& perm = qr.colsPermutation().indices();
    std::ostringstream msg;
    msg << "rank-deficient design (rank " << rank << " of " << X.cols()
        << "); collinear columns:";
    for (Eigen::Index k = rank; k < X.cols(); ++k) {
      msg << " " << terms[std::size_t(perm[k])];
    }
    throw NumericalError(msg.str());
  }
  return qr;
}

// (X'X)^-1 from the QR factors: P R^-1 R^-T P'.
Matrix xtx_inverse(const Eigen::ColPivHouseholderQR<Matrix>& qr,
                   Eigen::Index p) {
  const Matrix r = qr.matrixR().topLeftCorner(p, p).triangularView<Eigen::Upper>();
  const Matrix rinv = r.triangularView<Eigen::Upper>().solve(Matrix::Identity(p, p));
  const Matrix m = rinv * rinv.transpose();
  const auto perm = qr.colsPermutation();
  return perm * m * perm.transpose();
}

void fill_inference(RobustFit& fit, const Vector& beta, const Vector& se,
                    double df) {
  const Eigen::Index p = beta.size();
  fit.coef.assign(beta.data(), beta.data() + p);
  fit.se.assign(se.data(), se.data() + p);
  fit.p.resize(std::size_t(p));
  fit.ci_low.resize(std::size_t(p));
  fit.ci_high.resize(std::size_t(p));
  const double t_crit = student_t_quantile(0.975, df);
  for (Eigen::Index j = 0; j < p; ++j) {
    const double b = beta[j];
    const double s = se[j];
    if (s > 0.0) {
      fit.p[std::size_t(j)] = student_t_two_sided_p(b / s, df);
    } else {
      // Degenerate exact fit: the test statistic diverges.
      fit.p[std::size_t(j)] = b == 0.0 ? 1.0 : 0.0;
    }
    fit.ci_low[std::size_t(j)] = b - t_crit * s;
    fit.ci_high[std::size_t(j)] = b + t_crit * s;
  }
}

void check_design(const Matrix& X, const Vector& y,
                  const std::vector<std::string>& terms) {
  if (X.rows() != y.size()) {
    throw ValidationError("design matrix and response length mismatch");
  }
  if (std::size_t(X.cols()) != terms.size()) {
    throw ValidationError("design matrix and term-name count mismatch");
  }
  if (X.rows() <= X.cols()) {
    throw ValidationError("regression requires more observations than terms");
  }
}

}  // namespace

RobustFit ols_fit(const Matrix& X, const Vector& y,
                  const std::vector<std::string>& terms) {
  check_design(X, y, terms);
  const auto qr = full_rank_qr(X, terms);
  const Eigen::Index n = X.rows();
  const Eigen::Index p = X.cols();

  const Vector beta = qr.solve(y);
  const Vector resid = y - X * beta;
  const double rss = resid.squaredNorm();
  const double df = double(n - p);
  const double sigma2 = rss / df;
  const Matrix cov = sigma2 * xtx_inverse(qr, p);
  const Vector se = cov.diagonal().cwiseMax(0.0).cwiseSqrt();

  RobustFit fit;
  fit.method = FitMethod::ols;
  fit.terms = terms;
  fill_inference(fit, beta, se, df);
  fit.scale = std::sqrt(sigma2);
  fit.iterations = 0;
  fit.converged = true;
  fit.weights.assign(std::size_t(n), 1.0);
  const Vector fitted = X * beta;
  fit.fitted.assign(fitted.data(), fitted.data() + n);
  return fit;
}

std::vector<double> hc1_standard_errors(const RobustFit& fit, const Matrix& X,
                                        const Vector& y) {
  const Eigen::Index n = X.rows();
  const Eigen::Index p = X.cols();
  if (std::size_t(p) != fit.coef.size()) {
    throw ValidationError("hc1: fit/design shape mismatch");
  }
  Vector beta(p);
  for (Eigen::Index j = 0; j < p; ++j) beta[j] = fit.coef[std::size_t(j)];
  const Vector resid = y - X * beta;

  const auto qr = full_rank_qr(X, fit.terms);
  const Matrix bread = xtx_inverse(qr, p);
  const Matrix meat = X.transpose() * resid.array().square().matrix().asDiagonal() * X;
  const Matrix sandwich = bread * meat * bread * (double(n) / double(n - p));
  const Vector se = sandwich.diagonal().cwiseMax(0.0).cwiseSqrt();
  return std::vector<double>(se.data(), se.data() + p);
}

double huber_weight(double u, double c) {
  const double a = std::abs(u);
  return a <= c ? 1.0 : c / a;
}

double bisquare_weight(double u, double c) {
  const double a = std::abs(u);
  if (a >= c) return 0.0;
  const double t = 1.0 - (u / c) * (u / c);
  return t * t;
}

namespace {

double huber_rho(double u, double c) {
  const double a = std::abs(u);
  if (a <= c) return 0.5 * u * u;
  return c * a - 0.5 * c * c;
}

// Robust residual scale: MAD about the median, scaled to the normal. A zero
// MAD with non-negligible residuals falls back to the mean absolute residual
// (consistency factor 0.7979); an all-zero residual vector returns 0 to
// signal the exact-fit path.
double robust_scale(const Vector& resid, double y_scale,
                    std::vector<std::string>& warnings) {
  std::vector<double> r(resid.data(), resid.data() + resid.size());
  double max_abs = 0.0, mean_abs = 0.0;
  for (double v : r) {
    max_abs = std::max(max_abs, std::abs(v));
    mean_abs += std::abs(v);
  }
  mean_abs /= double(r.size());
  if (max_abs <= 1e-12 * std::max(1.0, y_scale)) return 0.0;  // exact fit
  const double med = median(r);
  const double m = mad(r, med);
  if (m > 0.0) return m / 0.6745;
  const std::string note =
      "robust scale: MAD of residuals is zero with nonzero residuals; "
      "falling back to mean |residual| / 0.7979";
  if (std::find(warnings.begin(), warnings.end(), note) == warnings.end()) {
    warnings.push_back(note);
  }
  return mean_abs / 0.7979;
}

Vector wls_solve(const Matrix& X, const Vector& y, const Vector& w,
                 const std::vector<std::string>& terms) {
  const Vector sqrt_w = w.cwiseMax(0.0).cwiseSqrt();
  const Matrix xw = sqrt_w.asDiagonal() * X;
  const Vector yw = sqrt_w.asDiagonal() * y;
  Eigen::ColPivHouseholderQR<Matrix> qr(xw);
  if (qr.rank() < X.cols()) {
    const auto& perm = qr.colsPermutation().indices();
    std::ostringstream msg;
    msg << "IRLS weighted design became rank-deficient; affected columns:";
    for (Eigen::Index k = qr.rank(); k < X.cols(); ++k) {
      msg << " " << terms[std::size_t(perm[k])];
    }
    throw NumericalError(msg.str());
  }
  return qr.solve(yw);
}

}  // namespace

RobustFit irls_m_fit(const Matrix& X, const Vector& y,
                     const std::vector<std::string>& terms,
                     const IrlsConfig& config) {
  check_design(X, y, terms);
  if (config.huber_c <= 0.0 || config.bisquare_c <= 0.0 || config.tol <= 0.0 ||
      config.max_iter < 1) {
    throw ValidationError("invalid IRLS configuration");
  }
  const Eigen::Index n = X.rows();
  const Eigen::Index p = X.cols();
  const double y_scale = y.cwiseAbs().maxCoeff();

  RobustFit fit;
  fit.method = FitMethod::m_huber_bisquare;
  fit.terms = terms;

  // Start from OLS.
  const auto qr0 = full_rank_qr(X, terms);
  Vector beta = qr0.solve(y);
  Vector resid = y - X * beta;
  Vector w = Vector::Ones(n);
  int iterations = 0;
  bool huber_converged = false;
  bool bisquare_converged = false;
  double sigma = robust_scale(resid, y_scale, fit.warnings);

  if (sigma == 0.0) {
    // Exact fit: per contract return it unchanged with unit weights.
    const double df = double(n - p);
    fill_inference(fit, beta, Vector::Zero(p), df);
    fit.scale = 0.0;
    fit.iterations = 0;
    fit.converged = true;
    fit.weights.assign(std::size_t(n), 1.0);
    const Vector fitted = X * beta;
    fit.fitted.assign(fitted.data(), fitted.data() + n);
    return fit;
  }

  // Stage 1: Huber, scale re-estimated every iteration.
  for (int it = 0; it < config.max_iter; ++it) {
    sigma = robust_scale(resid, y_scale, fit.warnings);
    if (sigma == 0.0) { huber_converged = true; break; }
    double obj_before = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      obj_before += huber_rho(resid[i] / sigma, config.huber_c);
      w[i] = huber_weight(resid[i] / sigma, config.huber_c);
    }
    const Vector beta_new = wls_solve(X, y, w, terms);
    const double delta = (beta_new - beta).cwiseAbs().maxCoeff();
    beta = beta_new;
    resid = y - X * beta;
    double obj_after = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      obj_after += huber_rho(resid[i] / sigma, config.huber_c);
    }
    fit.huber_trace.push_back(RobustFit::ObjectiveStep{sigma, obj_before, obj_after});
    ++iterations;
    if (delta <= config.tol) { huber_converged = true; break; }
  }

  // Stage 2: bisquare with the scale frozen at the Huber stage's final value.
  const double frozen_sigma =
      sigma > 0.0 ? sigma : robust_scale(resid, y_scale, fit.warnings);
  if (frozen_sigma == 0.0) {
    bisquare_converged = true;  // Huber stage landed on an exact fit
    w = Vector::Ones(n);
  } else {
    for (int it = 0; it < config.max_iter; ++it) {
      for (Eigen::Index i = 0; i < n; ++i) {
        w[i] = bisquare_weight(resid[i] / frozen_sigma, config.bisquare_c);
      }
      const Vector beta_new = wls_solve(X, y, w, terms);
      const double delta = (beta_new - beta).cwiseAbs().maxCoeff();
      beta = beta_new;
      resid = y - X * beta;
      ++iterations;
      if (delta <= config.tol) { bisquare_converged = true; break; }
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      w[i] = bisquare_weight(resid[i] / frozen_sigma, config.bisquare_c);
    }
  }

  // Inference from the weighted information matrix at the final weights.
  const double df = double(n - p);
  const Matrix xtwx = X.transpose() * w.asDiagonal() * X;
  Eigen::LDLT<Matrix> ldlt(xtwx);
  if (ldlt.info() != Eigen::Success) {
    throw NumericalError("IRLS information matrix is singular");
  }
  const Matrix cov =
      frozen_sigma * frozen_sigma * ldlt.solve(Matrix::Identity(p, p));
  const Vector se = cov.diagonal().cwiseMax(0.0).cwiseSqrt();
  fill_inference(fit, beta, se, df);
  fit.scale = frozen_sigma;
  fit.iterations = iterations;
  fit.converged = huber_converged && bisquare_converged;
  if (!fit.converged) {
    fit.warnings.push_back("IRLS did not converge within max_iter");
  }
  fit.weights.assign(w.data(), w.data() + n);
  const Vector fitted = X * beta;
  fit.fitted.assign(fitted.data(), fitted.data() + n);
  return fit;
}

VifResult vif(const Matrix& X, const std::vector<std::string>& names) {
  const Eigen::Index p = X.cols();
  if (p < 2) throw ValidationError("VIF requires at least 2 predictors");
  if (std::size_t(p) != names.size()) {
    throw ValidationError("VIF names/column count mismatch");
  }
  const Eigen::Index n = X.rows();
  if (n < p + 1) throw ValidationError("VIF requires n > predictors");

  VifResult out;
  out.names = names;
  out.vif.resize(std::size_t(p));
  const double inf = std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < p; ++j) {
    const Vector target = X.col(j);
    const double m = target.mean();
    const double tss = (target.array() - m).square().sum();
    if (tss == 0.0) {
      out.vif[std::size_t(j)] = inf;  // constant column
      continue;
    }
    Matrix others(n, p);  // intercept + remaining predictors
    others.col(0) = Vector::Ones(n);
    Eigen::Index c = 1;
    for (Eigen::Index k = 0; k < p; ++k) {
      if (k == j) continue;
      others.col(c++) = X.col(k);
    }
    // Least-squares fit; rank deficiency among the others is fine, the
    // pivoted QR still minimizes the residual.
    const Vector beta = others.colPivHouseholderQr().solve(target);
    const double rss = (target - others * beta).squaredNorm();
    const double r2 = 1.0 - rss / tss;
    if (r2 >= 1.0 - 1e-12) {
      out.vif[std::size_t(j)] = inf;
    } else {
      out.vif[std::size_t(j)] = 1.0 / (1.0 - r2);
    }
  }
  double s = 0.0;
  for (double v : out.vif) s += v;
  out.mean_vif = s / double(p);
  return out;
}

LinktestResult linktest(const Vector& y, const Vector& fitted) {
  if (y.size() != fitted.size()) {
    throw ValidationError("linktest: length mismatch");
  }
  const Eigen::Index n = y.size();
  if (n < 4) throw ValidationError("linktest requires at least 4 observations");
  const double m = fitted.mean();
  const double var = (fitted.array() - m).square().sum();
  if (var == 0.0) {
    throw NumericalError("linktest: fitted values are constant");
  }
  Matrix X(n, 3);
  X.col(0) = Vector::Ones(n);
  X.col(1) = fitted;
  X.col(2) = fitted.array().square();
  const std::vector<std::string> terms{"intercept", "yhat", "yhat_sq"};
  const RobustFit fit = ols_fit(X, y, terms);
  LinktestResult res;
  res.coef_hat_sq = fit.coef[2];
  res.p_hat_sq = fit.p[2];
  res.pass = res.p_hat_sq > 0.05;
  return res;
}

namespace {

ModelFit fit_one_model(const StudyRegion& region, const Vector& response,
                       const DesignSpec& design, const IrlsConfig& config) {
  std::vector<std::string> terms{"intercept"};
  std::vector<std::string> regressors;
  for (const auto& v : design.predictors) regressors.push_back(v);
  for (const auto& v : design.controls) regressors.push_back(v);
  for (const auto& v : regressors) terms.push_back(v);

  const Eigen::Index n = Eigen::Index(region.size());
  Matrix X(n, Eigen::Index(terms.size()));
  X.col(0) = Vector::Ones(n);
  for (std::size_t k = 0; k < regressors.size(); ++k) {
    const std::vector<double> col = region.indicator_column(regressors[k]);
    for (Eigen::Index i = 0; i < n; ++i) X(i, Eigen::Index(k + 1)) = col[std::size_t(i)];
  }

  ModelFit out;
  out.design = design;
  out.ols = ols_fit(X, response, terms);
  out.hc1_se = hc1_standard_errors(out.ols, X, response);
  const double df = double(n) - double(terms.size());
  const double t_crit = student_t_quantile(0.975, df);
  out.hc1_p.resize(out.hc1_se.size());
  out.hc1_ci_low.resize(out.hc1_se.size());
  out.hc1_ci_high.resize(out.hc1_se.size());
  for (std::size_t j = 0; j < out.hc1_se.size(); ++j) {
    const double b = out.ols.coef[j];
    const double s = out.hc1_se[j];
    out.hc1_p[j] = s > 0.0 ? student_t_two_sided_p(b / s, df) : (b == 0.0 ? 1.0 : 0.0);
    out.hc1_ci_low[j] = b - t_crit * s;
    out.hc1_ci_high[j] = b + t_crit * s;
  }
  out.primary = irls_m_fit(X, response, terms, config);
  out.vif = vif(X.rightCols(X.cols() - 1), regressors);
  Vector fitted(n);
  for (Eigen::Index i = 0; i < n; ++i) fitted[i] = out.primary.fitted[std::size_t(i)];
  out.linktest = linktest(response, fitted);
  return out;
}

}  // namespace

AffinityModelsResult fit_affinity_models(const StudyRegion& region,
                                         const IrlsConfig& config) {
  const std::vector<std::string> controls{kMalePct, kAge67Pct, kPopulation};
  const DesignSpec spec1{"affinity", {kPoverty, kUnemployment, kCrime}, controls};
  const DesignSpec spec2{
      "affinity", {kPoverty, kUnemployment, kCrime, kSmoking}, controls};

  // Missing variables are a configuration problem, not a numerical one.
  for (const auto& spec : {spec1, spec2}) {
    for (const auto& lists : {spec.predictors, spec.controls}) {
      for (const auto& name : lists) {
        if (!region.indicator_index(name)) {
          throw ValidationError("model requires missing indicator '" + name + "'");
        }
      }
    }
  }

  const std::vector<double> aff = resolve_variable(region, "affinity");
  Vector y(Eigen::Index(aff.size()));
  for (std::size_t i = 0; i < aff.size(); ++i) y[Eigen::Index(i)] = aff[i];

  AffinityModelsResult out;
  try {
    out.model1 = fit_one_model(region, y, spec1, config);
  } catch (const std::exception& e) {
    out.errors.push_back(std::string("model1: ") + e.what());
  }
  try {
    out.model2 = fit_one_model(region, y, spec2, config);
  } catch (const std::exception& e) {
    out.errors.push_back(std::string("model2: ") + e.what());
  }
  return out;
}

}  // namespace geoaff
