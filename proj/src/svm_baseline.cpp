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

#include <chrono>
#include <cmath>
#include <limits>

#include "infilter/kernels.hpp"
#include "infilter/svm.hpp"

namespace infilter {

double KernelSpec::eval(std::span<const double> a, std::span<const double> b) const {
  if (kind == KernelKind::kLinear) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
  }
  const double g = gamma > 0.0 ? gamma : 1.0 / static_cast<double>(a.size());
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d += (a[i] - b[i]) * (a[i] - b[i]);
  return std::exp(-g * d);
}

std::string KernelSpec::name() const {
  return kind == KernelKind::kLinear ? "linear" : "rbf";
}

namespace {

constexpr double kTau = 1e-12;

}  // namespace

BaselineModel train_baseline(const TrainingSet& data, double C, const KernelSpec& kernel,
                             const BaselineSolverOptions& opts) {
  data.validate();
  if (!(C > 0.0)) throw InputError("train_baseline: C must be positive");
  const auto t0 = std::chrono::steady_clock::now();
  const Eigen::Index M = data.size();
  const Eigen::VectorXd& y = data.labels;
  KernelSpec ks = kernel;
  if (ks.kind == KernelKind::kRbf && ks.gamma <= 0.0) ks.gamma = 1.0 / static_cast<double>(data.dim());
  const Eigen::MatrixXd K = kernels::kernel_matrix_parallel(data.features, ks);

  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(M);
  Eigen::VectorXd G = Eigen::VectorXd::Constant(M, -1.0);
  auto in_up = [&](Eigen::Index t) { return (y[t] > 0 && alpha[t] < C) || (y[t] < 0 && alpha[t] > 0); };
  auto in_low = [&](Eigen::Index t) { return (y[t] > 0 && alpha[t] > 0) || (y[t] < 0 && alpha[t] < C); };

  SolverReport rep;
  rep.method = "smo-wss2";
  long it = 0;
  double gap = std::numeric_limits<double>::infinity();
  for (; it < opts.max_iterations; ++it) {
    // Second-order working set selection.
    double gmax = -std::numeric_limits<double>::infinity();
    Eigen::Index i = -1;
    for (Eigen::Index t = 0; t < M; ++t) {
      if (in_up(t) && -y[t] * G[t] >= gmax) {
        gmax = -y[t] * G[t];
        i = t;
      }
    }
    double gmax2 = -std::numeric_limits<double>::infinity();
    double obj_min = std::numeric_limits<double>::infinity();
    Eigen::Index j = -1;
    for (Eigen::Index t = 0; t < M; ++t) {
      if (!in_low(t)) continue;
      gmax2 = std::max(gmax2, y[t] * G[t]);
      if (i < 0) continue;
      const double bdiff = gmax + y[t] * G[t];
      if (bdiff > 0.0) {
        double a = K(i, i) + K(t, t) - 2.0 * K(i, t);
        if (a <= 0.0) a = kTau;
        const double obj = -(bdiff * bdiff) / a;
        if (obj <= obj_min) {
          obj_min = obj;
          j = t;
        }
      }
    }
    gap = gmax + gmax2;
    if (i < 0 || j < 0 || gap < opts.tol) break;

    const double old_i = alpha[i], old_j = alpha[j];
    const double Qij = y[i] * y[j] * K(i, j);
    if (y[i] != y[j]) {
      double quad = K(i, i) + K(j, j) + 2.0 * Qij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (-G[i] - G[j]) / quad;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0.0) {
        if (alpha[j] < 0.0) {
          alpha[j] = 0.0;
          alpha[i] = diff;
        }
      } else if (alpha[i] < 0.0) {
        alpha[i] = 0.0;
        alpha[j] = -diff;
      }
      if (diff > 0.0) {
        if (alpha[i] > C) {
          alpha[i] = C;
          alpha[j] = C - diff;
        }
      } else if (alpha[j] > C) {
        alpha[j] = C;
        alpha[i] = C + diff;
      }
    } else {
      double quad = K(i, i) + K(j, j) - 2.0 * Qij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (G[i] - G[j]) / quad;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > C) {
        if (alpha[i] > C) {
          alpha[i] = C;
          alpha[j] = sum - C;
        }
      } else if (alpha[j] < 0.0) {
        alpha[j] = 0.0;
        alpha[i] = sum;
      }
      if (sum > C) {
        if (alpha[j] > C) {
          alpha[j] = C;
          alpha[i] = sum - C;
        }
      } else if (alpha[i] < 0.0) {
        alpha[i] = 0.0;
        alpha[j] = sum;
      }
    }
    const double di = alpha[i] - old_i, dj = alpha[j] - old_j;
    for (Eigen::Index t = 0; t < M; ++t) {
      G[t] += y[t] * (y[i] * K(t, i) * di + y[j] * K(t, j) * dj);
    }
  }

  // Bias from free vectors, else the midpoint of the feasible interval.
  double ub = std::numeric_limits<double>::infinity(), lb = -std::numeric_limits<double>::infinity();
  double sum = 0.0;
  int n_free = 0;
  for (Eigen::Index t = 0; t < M; ++t) {
    const double yG = y[t] * G[t];
    if (alpha[t] >= C) {
      if (y[t] < 0) ub = std::min(ub, yG);
      else lb = std::max(lb, yG);
    } else if (alpha[t] <= 0.0) {
      if (y[t] > 0) ub = std::min(ub, yG);
      else lb = std::max(lb, yG);
    } else {
      ++n_free;
      sum += yG;
    }
  }
  const double rho = n_free > 0 ? sum / n_free : 0.5 * (ub + lb);

  BaselineModel model;
  model.b = -rho;
  model.C = C;
  model.kernel = ks;
  const double sv_eps = 1e-6 * C;
  std::vector<Eigen::Index> sv;
  for (Eigen::Index t = 0; t < M; ++t) {
    if (alpha[t] > sv_eps) sv.push_back(t);
  }
  model.support_vectors.resize(static_cast<Eigen::Index>(sv.size()), data.dim());
  model.sv_labels.resize(static_cast<Eigen::Index>(sv.size()));
  model.sv_alpha.resize(static_cast<Eigen::Index>(sv.size()));
  for (std::size_t s = 0; s < sv.size(); ++s) {
    const auto e = static_cast<Eigen::Index>(s);
    model.support_vectors.row(e) = data.features.row(sv[s]);
    model.sv_labels[e] = y[sv[s]];
    model.sv_alpha[e] = alpha[sv[s]];
  }
  rep.iterations = it;
  rep.kkt_residual = gap;
  rep.objective = 0.5 * alpha.dot(G - Eigen::VectorXd::Ones(M));
  rep.equality_residual = std::abs(alpha.dot(y));
  rep.converged = gap < opts.tol;
  rep.bias_fallback = n_free == 0;
  rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  model.report = rep;
  if (!rep.converged) throw SolverError("train_baseline: no convergence", rep);
  return model;
}

double decision(std::span<const double> x, const BaselineModel& model, MacCounter* macs) {
  if (x.size() != model.dim()) throw InputError("baseline decision: feature dimension mismatch");
  double f = model.b;
  for (Eigen::Index s = 0; s < model.support_vectors.rows(); ++s) {
    const auto row = model.support_vectors.row(s);
    f += model.sv_alpha[s] * model.sv_labels[s] *
         model.kernel.eval(std::span<const double>(row.data(), x.size()), x);
  }
  if (macs) macs->macs += model.mac_count();
  return f;
}

}  // namespace infilter
