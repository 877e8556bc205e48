/*
 * Copyright 2026 The pkrr Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <string>
#include <vector>

#include "pkrr/gcv.hpp"
#include "pkrr/kernel.hpp"
#include "pkrr/panel.hpp"

/// Direct, serial implementations of the closed-form estimators: every
/// system is assembled exactly as written (nonsymmetric P K + n eta I) and
/// solved by an LU factorization per eta. They are slow and kept to check
/// the spectral solvers and for benchmarking.
namespace pkrr::reference {

struct DirectHetero {
  Eigen::VectorXd a;
  Eigen::VectorXd beta;
  std::vector<std::string> warnings;
};

struct DirectHomo {
  Eigen::VectorXd a;
  Eigen::MatrixXd betas;
  std::vector<std::string> warnings;
};

/// a = ((I - P_Z) K + T eta I)^{-1} (I - P_Z) Y_i,
/// beta = (Z'Z)^{-1} Z' (Y_i - K a). When the LU factorization is
/// numerically singular, a ridge jitter 1e-10 trace(K)/T is added to the
/// system and a warning recorded; if that also fails a NumericError asks
/// for a larger eta.
DirectHetero fit_hetero(const PanelData& panel, std::size_t unit,
                        const KernelSpec& spec, double eta);

/// B = K S + P_Z (I - K S), S = ((I - P_Z) K + T eta I)^{-1} (I - P_Z).
Eigen::MatrixXd smoother_hetero(const PanelData& panel, std::size_t unit,
                                const KernelSpec& spec, double eta);

/// a = (P_N K + NT eta I)^{-1} P_N Y with P_N = I_N (x) P.
DirectHomo fit_homo(const PanelData& panel, const KernelSpec& spec,
                    double eta);

/// B = K S + Q (I - K S), S = (P_N K + NT eta I)^{-1} P_N, Q = I_N (x) (I - P).
Eigen::MatrixXd smoother_homo(const PanelData& panel, const KernelSpec& spec,
                              double eta);

/// ||(I - B) y||^2 / (n (1 - tr(B)/n)^2) from an explicit smoother.
GcvPoint gcv_point(const Eigen::MatrixXd& smoother, const Eigen::VectorXd& y);

/// Grid search (no refinement) forming the explicit smoother at each eta.
GcvResult gcv_hetero(const PanelData& panel, std::size_t unit,
                     const KernelSpec& spec, const std::vector<double>& grid);
GcvResult gcv_homo(const PanelData& panel, const KernelSpec& spec,
                   const std::vector<double>& grid);

}  // namespace pkrr::reference
