/*
   Copyright 2026 The dosmlab Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#pragma once

#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dosmlab/lattice.hpp"
#include "dosmlab/test_functions.hpp"

namespace dosmlab {

using cplx = std::complex<double>;

enum class Solver { lu, cg };
Solver parse_solver(const std::string& s);
std::string to_string(Solver s);

// Cutoff with tau = 1 on [-1, 1], tau = 0 outside (-2, 2), built from exp(-1/s).
double tau(double t);
double tau_prime(double t);

// f~(x, y) = sum_{n<=P} f^(n)(x) (iy)^n / n! * tau(y / <x>).
class AlmostAnalyticExtension {
public:
    AlmostAnalyticExtension(TestFunction f, int degree);

    const TestFunction& base() const { return f_; }
    int degree() const { return degree_; }

    cplx value(double x, double y) const;
    // d/dz-bar f~ = 1/2 (d/dx + i d/dy) f~
    cplx dbar(double x, double y) const;
    // same, from precomputed f^(0..P+1)(x)
    cplx dbar(const double* derivs, double x, double y) const;

private:
    TestFunction f_;
    int degree_;
    std::vector<double> inv_factorial_;
};

// Discretization of the Helffer-Sjostrand integral over y > 0.
//   nx, ny        Gauss nodes per panel in x and y (even)
//   y_min         lower cutoff; the strip 0 < y < y_min enters only the error estimate
//   degree        P of the extension; 0 selects 2 + d
//   panel_ratio   x-panels in the band y <= b are at most panel_ratio * b wide
//   max_panel     x-panel width cap
//   partition_tol relative tolerance of the adaptive x and t partitions
struct QuadratureSpec {
    int nx = 8;
    int ny = 8;
    double y_min = 1e-2;
    int degree = 0;
    double panel_ratio = 4.0;
    double max_panel = 1.0;
    double partition_tol = 1e-12;
    Solver solver = Solver::lu;

    void validate() const;
    int degree_for(int d) const { return degree > 0 ? degree : 2 + d; }
};

// Nodes z = x + iy (y > 0) with complex coefficients c such that
// Tr(P f(H) P) ~ (2/pi) Re sum_k c_k Tr(P (H - z_k)^-1 P).
struct HsRule {
    std::vector<double> x;
    std::vector<double> y;
    std::vector<cplx> coef;
    int degree = 0;
    // (1/pi) ||f^(P+1)||_inf / P! * |supp f| * y_min^P / P, per unit rank
    double strip_bound = 0.0;
    std::size_t x_panels = 0;
    std::size_t t_panels = 0;
};

HsRule hs_rule(const TestFunction& f, int degree, const QuadratureSpec& q);

// Eigenvalues of H with the weights ||P_block v_k||^2.
struct SpectralWeights {
    Eigen::VectorXd values;
    Eigen::VectorXd weights;
};

SpectralWeights spectral_weights(const LatticeOperator& h, std::size_t block);

// Tr(P_block f(H) P_block) by full eigendecomposition.
double eig_trace(const LatticeOperator& h, const TestFunction& f, std::size_t block);
double eig_trace(const SpectralWeights& sw, const TestFunction& f);

struct TraceResult {
    double value = 0.0;
    // strip bound times N; quadrature error is not included
    double error_estimate = 0.0;
    std::size_t nodes = 0;
    int degree = 0;
};

TraceResult hs_trace(const LatticeOperator& h, const TestFunction& f, std::size_t block, const QuadratureSpec& q,
                     int threads = 1);
TraceResult hs_trace(const LatticeOperator& h, const HsRule& rule, std::size_t block, Solver solver, int threads = 1);

// Columns (H - z)^-1 e_s for the given sites, as an n x |sites| matrix.
Eigen::MatrixXcd resolvent_columns(const LatticeOperator& h, cplx z, const std::vector<std::size_t>& sites,
                                   Solver solver = Solver::lu);

// sum_a <e_{s_i(a)}, (H - z)^-1 e_{s_j(a)}>, with s_i(a) the a-th site of
// block i. For i == j this is Tr(P_i (H - z)^-1 P_i).
cplx resolvent_block_trace(const LatticeOperator& h, cplx z, std::size_t block_i, std::size_t block_j,
                           Solver solver = Solver::lu);

}  // namespace dosmlab
