// Copyright 2026 The infilter Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "infilter/kernels.hpp"
#include "infilter/svm.hpp"

namespace infilter {

void TrainingSet::validate() const {
  if (features.rows() != labels.size()) throw InputError("training set: feature rows and labels disagree");
  if (features.rows() < 2) throw InputError("training set: need at least two examples");
  if (features.cols() < 1) throw InputError("training set: need at least one feature");
  if (!features.allFinite()) throw InputError("training set: non-finite feature");
  bool pos = false, neg = false;
  for (Eigen::Index i = 0; i < labels.size(); ++i) {
    if (labels[i] == 1.0) pos = true;
    else if (labels[i] == -1.0) neg = true;
    else throw InputError("training set: labels must be +1 or -1");
  }
  if (!pos || !neg) throw InputError("training set: both classes must be present");
}

double decision(std::span<const double> phi, const TemplateModel& model, MacCounter* macs) {
  if (phi.size() != model.dim()) throw InputError("decision: feature dimension mismatch");
  double f = model.b;
  for (std::size_t p = 0; p < phi.size(); ++p) f += model.Q[static_cast<Eigen::Index>(p)] * phi[p];
  if (macs) macs->macs += phi.size();
  return f;
}

Eigen::MatrixXd gram_outer(const Eigen::MatrixXd& F) { return kernels::gram_outer_parallel(F); }

double kkt_gap(const Eigen::VectorXd& alpha, const Eigen::VectorXd& grad, const Eigen::VectorXd& y, double C) {
  double up = -std::numeric_limits<double>::infinity();
  double low = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < alpha.size(); ++i) {
    const double v = -y[i] * grad[i];
    const bool below_c = alpha[i] < C, above_0 = alpha[i] > 0.0;
    if ((y[i] > 0 && below_c) || (y[i] < 0 && above_0)) up = std::max(up, v);
    if ((y[i] > 0 && above_0) || (y[i] < 0 && below_c)) low = std::min(low, v);
  }
  if (!std::isfinite(up) || !std::isfinite(low)) return 0.0;
  return std::max(0.0, up - low);
}

namespace {

// Euclidean projection onto {0 <= a <= C, y.a = 0}: a = clip(w - lambda y)
// where lambda zeroes the piecewise-linear, non-increasing h(lambda).
class BoxHyperplaneProjector {
 public:
  BoxHyperplaneProjector(const Eigen::VectorXd& y, double C) : y_(y), C_(C), knots_(2 * y.size()) {}

  void project(const Eigen::VectorXd& w, Eigen::VectorXd& out) {
    const Eigen::Index M = w.size();
    for (Eigen::Index i = 0; i < M; ++i) {
      const double lo = y_[i] > 0 ? w[i] - C_ : -w[i];
      knots_[static_cast<std::size_t>(2 * i)] = lo;
      knots_[static_cast<std::size_t>(2 * i + 1)] = lo + C_;
    }
    std::sort(knots_.begin(), knots_.end());
    // h(knots.front()) >= 0 >= h(knots.back()); find adjacent knots around 0.
    std::size_t a = 0, b = knots_.size() - 1;
    double ha = h(w, knots_[a]), hb = h(w, knots_[b]);
    while (b - a > 1) {
      const std::size_t m = (a + b) / 2;
      const double hm = h(w, knots_[m]);
      if (hm >= 0.0) {
        a = m;
        ha = hm;
      } else {
        b = m;
        hb = hm;
      }
    }
    double lambda = knots_[a];
    if (ha > 0.0 && ha != hb) lambda = knots_[a] + ha * (knots_[b] - knots_[a]) / (ha - hb);
    for (Eigen::Index i = 0; i < M; ++i) out[i] = std::clamp(w[i] - lambda * y_[i], 0.0, C_);
  }

 private:
  double h(const Eigen::VectorXd& w, double lambda) const {
    double s = 0.0;
    for (Eigen::Index i = 0; i < w.size(); ++i) s += y_[i] * std::clamp(w[i] - lambda * y_[i], 0.0, C_);
    return s;
  }

  const Eigen::VectorXd& y_;
  double C_;
  std::vector<double> knots_;
};

}  // namespace

TemplateFit train_template(const TrainingSet& data, double C, const TemplateSolverOptions& opts) {
  data.validate();
  if (!(C > 0.0)) throw InputError("train_template: C must be positive");
  const auto t0 = std::chrono::steady_clock::now();
  const Eigen::Index M = data.size();
  const Eigen::VectorXd& y = data.labels;
  // Rows scaled by labels: the dual Hessian is A A^T and Q = A^T alpha.
  const Eigen::MatrixXd A = y.asDiagonal() * data.features;
  const Eigen::MatrixXd AtA = A.transpose() * A;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(AtA, Eigen::EigenvaluesOnly);
  const double L = std::max(eig.eigenvalues().maxCoeff(), 1e-12);
  const double step = 1.0 / L;

  BoxHyperplaneProjector proj(y, C);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(M), v = x, x_new(M), grad(M), work(M);
  double t = 1.0;
  SolverReport rep;
  rep.method = "accelerated-projected-gradient";
  auto gradient_at = [&](const Eigen::VectorXd& a, Eigen::VectorXd& g) {
    g.noalias() = A * (A.transpose() * a);
    g.array() -= 1.0;
  };

  long it = 0;
  double gap = std::numeric_limits<double>::infinity();
  for (; it < opts.max_iterations; ++it) {
    if (it % opts.check_every == 0) {
      gradient_at(x, grad);
      gap = kkt_gap(x, grad, y, C);
      if (gap <= opts.tol) break;
    }
    gradient_at(v, grad);
    work = v - step * grad;
    proj.project(work, x_new);
    // Restart momentum when the step opposes the previous direction.
    if ((v - x_new).dot(x_new - x) > 0.0) {
      t = 1.0;
      v = x_new;
    } else {
      const double t_new = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
      v = x_new + ((t - 1.0) / t_new) * (x_new - x);
      t = t_new;
    }
    x.swap(x_new);
  }
  if (it >= opts.max_iterations) {
    gradient_at(x, grad);
    gap = kkt_gap(x, grad, y, C);
  }

  TemplateModel model;
  model.C = C;
  model.alpha = x;
  model.Q = A.transpose() * x;
  const Eigen::VectorXd fx = data.features * model.Q;
  double sum = 0.0;
  int n_free = 0;
  for (Eigen::Index i = 0; i < M; ++i) {
    if (x[i] > opts.tol && x[i] < C - opts.tol) {
      sum += y[i] - fx[i];
      ++n_free;
    }
  }
  if (n_free > 0) {
    model.b = sum / n_free;
  } else {
    double max_neg = -std::numeric_limits<double>::infinity(), min_pos = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < M; ++i) {
      if (y[i] < 0) max_neg = std::max(max_neg, fx[i]);
      else min_pos = std::min(min_pos, fx[i]);
    }
    model.b = -0.5 * (max_neg + min_pos);
    rep.bias_fallback = true;
  }

  // Residuals recomputed from alpha term by term.
  double recon = 0.0;
  for (Eigen::Index p = 0; p < model.Q.size(); ++p) {
    double q = 0.0;
    for (Eigen::Index j = 0; j < M; ++j) q += x[j] * y[j] * data.features(j, p);
    recon = std::max(recon, std::abs(model.Q[p] - q));
  }
  rep.iterations = it;
  rep.objective = 0.5 * model.Q.squaredNorm() - x.sum();
  rep.kkt_residual = gap;
  rep.equality_residual = std::abs(x.dot(y));
  rep.reconstruction_residual = recon;
  rep.converged = gap <= opts.tol;
  rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  model.report = rep;
  if (!rep.converged) {
    throw SolverError("train_template: no convergence after " + std::to_string(it) + " iterations (gap " +
                          std::to_string(gap) + ")",
                      rep);
  }
  return TemplateFit{std::move(model), rep};
}

double accuracy(const TemplateModel& model, const Eigen::MatrixXd& F, const Eigen::VectorXd& y) {
  if (F.rows() == 0) return 0.0;
  const Eigen::VectorXd f = (F * model.Q).array() + model.b;
  long ok = 0;
  for (Eigen::Index i = 0; i < f.size(); ++i) ok += sign_label(f[i]) == static_cast<int>(y[i]);
  return 100.0 * static_cast<double>(ok) / static_cast<double>(F.rows());
}

}  // namespace infilter
