#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "geoaff/ingest.hpp"

namespace geoaff {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class FitMethod { ols, ols_hc1, m_huber_bisquare };

const char* to_string(FitMethod m);

// One fitted linear model. p-values and confidence intervals use the exact
// Student-t reference with N - p degrees of freedom.
struct RobustFit {
  FitMethod method = FitMethod::ols;
  std::vector<std::string> terms;  // includes "intercept" first
  std::vector<double> coef;
  std::vector<double> se;
  std::vector<double> p;
  std::vector<double> ci_low;   // 95% interval
  std::vector<double> ci_high;
  double scale = 0.0;           // sqrt(RSS/(n-p)) for OLS; robust sigma for IRLS
  int iterations = 0;
  bool converged = true;
  std::vector<double> weights;  // final per-observation weights (all 1 for OLS)
  std::vector<double> fitted;
  std::vector<std::string> warnings;

  // Per Huber-stage WLS step: the objective sum rho(r_i / sigma) evaluated at
  // the iteration's frozen sigma before and after the step. Each step must
  // not increase it; tests assert this.
  struct ObjectiveStep {
    double sigma;
    double before;
    double after;
  };
  std::vector<ObjectiveStep> huber_trace;
};

// OLS via column-pivoted QR. Rank deficiency is a NumericalError naming the
// collinear columns. Classical (homoskedastic) standard errors.
RobustFit ols_fit(const Matrix& X, const Vector& y,
                  const std::vector<std::string>& terms);

// HC1 heteroskedasticity-robust standard errors for an OLS fit:
// (X'X)^-1 X' diag(e_i^2) X (X'X)^-1 scaled by N/(N-p).
std::vector<double> hc1_standard_errors(const RobustFit& fit, const Matrix& X,
                                        const Vector& y);

struct IrlsConfig {
  double huber_c = 1.345;
  double bisquare_c = 4.685;
  double tol = 1e-6;   // on max |delta beta|
  int max_iter = 50;   // per stage
};

// Huber psi-weight w(u) = min(1, c/|u|).
double huber_weight(double u, double c);
// Tukey bisquare weight w(u) = (1 - (u/c)^2)^2 for |u| < c, else 0.
double bisquare_weight(double u, double c);

// M-estimation by IRLS: a Huber stage (scale re-estimated each iteration as
// MAD(residuals)/0.6745) followed by a bisquare polishing stage with the
// scale frozen at the Huber stage's final value. Standard errors come from
// the weighted information matrix sigma^2 (X' W X)^-1. An exact initial fit
// (all residuals ~ 0) returns immediately with unit weights.
RobustFit irls_m_fit(const Matrix& X, const Vector& y,
                     const std::vector<std::string>& terms,
                     const IrlsConfig& config = {});

struct VifResult {
  std::vector<std::string> names;
  std::vector<double> vif;  // +infinity marks perfect collinearity
  double mean_vif = 0.0;
};

// Variance inflation factors: VIF_j = 1 / (1 - R^2_j) from regressing
// predictor j on the remaining predictors plus an intercept. Requires at
// least 2 predictors. X columns here exclude the intercept.
VifResult vif(const Matrix& X, const std::vector<std::string>& names);

struct LinktestResult {
  double coef_hat_sq = 0.0;
  double p_hat_sq = 0.0;
  bool pass = false;  // pass iff p_hat_sq > 0.05
};

// Specification link test: regress y on (1, yhat, yhat^2) and test the
// yhat^2 coefficient. Constant fitted values are a NumericalError.
LinktestResult linktest(const Vector& y, const Vector& fitted);

struct DesignSpec {
  std::string response;
  std::vector<std::string> predictors;
  std::vector<std::string> controls;
};

struct ModelFit {
  DesignSpec design;
  RobustFit primary;               // m_huber_bisquare
  RobustFit ols;                   // classical se
  std::vector<double> hc1_se;      // HC1 se for the OLS coefficients
  std::vector<double> hc1_p;       // t-based p with HC1 se
  std::vector<double> hc1_ci_low;
  std::vector<double> hc1_ci_high;
  VifResult vif;                   // over all non-intercept regressors
  LinktestResult linktest;         // on the primary fit
};

struct AffinityModelsResult {
  std::optional<ModelFit> model1;  // affinity ~ poverty + unemployment + crime + controls
  std::optional<ModelFit> model2;  // model1 + smoking
  std::vector<std::string> errors; // per-model failures, e.g. rank deficiency
};

// Fits both study models with all three methods. The response is the
// affinity score; controls are male_pct, age67plus_pct and population.
// A model that cannot be fitted (e.g. zero-variance smoking column) lands in
// `errors` while the other model is still returned. Missing variables are a
// hard ValidationError naming the variable.
AffinityModelsResult fit_affinity_models(const StudyRegion& region,
                                         const IrlsConfig& config = {});

}  // namespace geoaff
