// Copyright 2026 The pulsedrf Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Nonlinear least squares on top of Eigen's MINPACK Levenberg-Marquardt,
// with central-difference Jacobians and parameter covariance from the
// Gauss-Newton approximation at the minimum.

#include <Eigen/Dense>
#include <unsupported/Eigen/NonLinearOptimization>

#include <cmath>
#include <functional>
#include <sstream>
#include <string>

#include "pulsedrf/error.hpp"

namespace pulsedrf::fit {

using Residuals = std::function<void(const Eigen::VectorXd& params, Eigen::VectorXd& residuals)>;

struct LsqOptions {
  int max_evaluations = 4000;
  double xtol = 1e-12;
  double ftol = 1e-14;
  // Relative finite-difference step.
  double diff_step = 1e-6;
};

struct LsqResult {
  Eigen::VectorXd params;
  Eigen::MatrixXd covariance;
  Eigen::VectorXd residuals;
  double ssr = 0.0;
  int dof = 0;
  int evaluations = 0;

  double standard_error(Eigen::Index i) const { return std::sqrt(std::max(covariance(i, i), 0.0)); }
};

namespace detail {

using pulsedrf::detail::require;

struct Functor {
  using Scalar = double;
  using InputType = Eigen::VectorXd;
  using ValueType = Eigen::VectorXd;
  using JacobianType = Eigen::MatrixXd;
  enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };

  const Residuals* fn;
  int n_params;
  int n_values;
  double step;
  mutable int evaluations = 0;

  int inputs() const { return n_params; }
  int values() const { return n_values; }

  int operator()(const Eigen::VectorXd& x, Eigen::VectorXd& f) const {
    ++evaluations;
    (*fn)(x, f);
    return f.allFinite() ? 0 : -1;
  }

  int df(const Eigen::VectorXd& x, Eigen::MatrixXd& jac) const {
    Eigen::VectorXd xp = x;
    Eigen::VectorXd fp(n_values);
    Eigen::VectorXd fm(n_values);
    for (int j = 0; j < n_params; ++j) {
      const double h = step * std::max(std::abs(x(j)), 1e-3);
      xp(j) = x(j) + h;
      (*fn)(xp, fp);
      xp(j) = x(j) - h;
      (*fn)(xp, fm);
      xp(j) = x(j);
      jac.col(j) = (fp - fm) / (2.0 * h);
    }
    evaluations += 2 * n_params;
    return 0;
  }
};

}  // namespace detail

inline Eigen::MatrixXd jacobian(const Residuals& fn, const Eigen::VectorXd& x, int n_values,
                                double step = 1e-6) {
  detail::Functor f{&fn, static_cast<int>(x.size()), n_values, step};
  Eigen::MatrixXd jac(n_values, x.size());
  f.df(x, jac);
  return jac;
}

// Covariance s^2 (J^T J)^+ with s^2 = SSR / dof.
inline Eigen::MatrixXd covariance(const Eigen::MatrixXd& jac, double ssr, int dof) {
  const Eigen::MatrixXd jtj = jac.transpose() * jac;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jtj);
  const Eigen::VectorXd ev = eig.eigenvalues();
  const double cutoff = 1e-12 * ev.cwiseAbs().maxCoeff();
  Eigen::VectorXd inv(ev.size());
  for (Eigen::Index i = 0; i < ev.size(); ++i) inv(i) = ev(i) > cutoff ? 1.0 / ev(i) : 0.0;
  const double s2 = dof > 0 ? ssr / dof : 0.0;
  return s2 * eig.eigenvectors() * inv.asDiagonal() * eig.eigenvectors().transpose();
}

inline LsqResult least_squares(const Residuals& fn, Eigen::VectorXd x0, int n_values,
                               const LsqOptions& options = {}) {
  detail::require(n_values >= x0.size(), "fewer residuals than parameters");
  detail::Functor functor{&fn, static_cast<int>(x0.size()), n_values, options.diff_step};
  Eigen::LevenbergMarquardt<detail::Functor> lm(functor);
  lm.parameters.maxfev = options.max_evaluations;
  lm.parameters.xtol = options.xtol;
  lm.parameters.ftol = options.ftol;
  const auto status = lm.minimize(x0);

  LsqResult r;
  r.params = x0;
  r.residuals.resize(n_values);
  fn(x0, r.residuals);
  r.ssr = r.residuals.squaredNorm();
  r.dof = n_values - static_cast<int>(x0.size());
  r.evaluations = functor.evaluations;
  using namespace Eigen::LevenbergMarquardtSpace;
  if (status == ImproperInputParameters || status == TooManyFunctionEvaluation ||
      status == UserAsked || !r.params.allFinite() || !std::isfinite(r.ssr)) {
    std::ostringstream msg;
    msg << "least-squares fit did not converge (status " << static_cast<int>(status)
        << ", evaluations " << r.evaluations << ", residual sum of squares " << r.ssr << ")";
    throw ConvergenceError(msg.str());
  }
  r.covariance = covariance(jacobian(fn, r.params, n_values, options.diff_step), r.ssr, r.dof);
  return r;
}

}  // namespace pulsedrf::fit
