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

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

#include "dosmlab/dosm.hpp"
#include "dosmlab/funcalc.hpp"

namespace dosmlab {

using Json = nlohmann::ordered_json;

enum class Verdict { pass, fail, inconclusive, none };
std::string to_string(Verdict v);
Verdict parse_verdict(const std::string& s);

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
    double slope_se = 0.0;
    double rms = 0.0;
    std::size_t points = 0;
};

// Ordinary least squares y ~ slope * x + intercept (needs >= 2 points with distinct x).
LinearFit least_squares(const std::vector<double>& x, const std::vector<double>& y);

// Tabular experiment record. `params` holds everything evaluate() needs
// besides the rows, so fitted values and verdict can be recomputed from the
// serialized report alone.
struct ExperimentReport {
    std::string kind;
    Json inputs = Json::object();
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
    Json params = Json::object();
    Json fitted = Json::object();
    Verdict verdict = Verdict::none;
    std::vector<std::string> notes;

    std::size_t column(const std::string& name) const;
    std::vector<double> values(const std::string& name) const;

    Json to_json() const;
    static ExperimentReport from_json(const Json& j);
    void write_csv(std::ostream& os) const;
};

// Recomputes `fitted` and `verdict` from kind, columns, rows and params.
void evaluate(ExperimentReport& report);

// Blocks (k, 0, ..., 0) for k = 0..length.
std::vector<std::size_t> lattice_ray(const Lattice& lattice, int length);

// Rows (im_z, re_z, distance, trace_abs, log_trace) of |Tr(P0 R(z) P_j)| along
// j_list for each z. Per z the tail (first row excluded) is fitted by least
// squares; pass when every decay rate is positive with 1 - R^2 <= residual_tol,
// the first row obeys |trace| <= N/|Im z|, and rates increase with |Im z|.
// Traces below 1e-280 end the ray (noted, not fatal).
ExperimentReport combes_thomas_scan(const LatticeOperator& h, const std::vector<cplx>& z_list,
                                    const std::vector<std::size_t>& j_list, double residual_tol = 0.1,
                                    Solver solver = Solver::lu, int threads = 1);

// Single-site map lambda -> Tr(P0 f(H_{j0 perp} + lambda P_{j0}) P0) over one
// background draw; pass when the largest adjacent difference quotient is at
// most N * L_f * (1 + tol).
ExperimentReport lipschitz_scan(const Measure& background, const Lattice& lattice, std::size_t j0,
                                const TestFunction& f, const std::vector<double>& lambda, std::uint64_t seed,
                                double tol = 1e-6, int threads = 1);

struct MeasurePair {
    Measure first;
    Measure second;
};

struct SweepOptions {
    MonteCarlo mc;
    Method method = Method::eig;
    QuadratureSpec quad;
    // rows used to calibrate the constant; the rest are tested
    std::vector<std::size_t> pilot;
};

// Rows (d_w, delta_n, stderr, n_first, n_second). The two measures of a pair
// use independent substreams. C1 is the smallest constant making the bound
// C1 r^M1 ||f||_{C^M1} d_w^(1/(1+d)) hold on the pilot rows; tested rows pass
// when |delta_n| - 3 stderr stays below it, and are inconclusive when
// |delta_n| + 3 stderr does not. The log-log exponent is reported when at
// least 4 rows have delta_n > 0.
ExperimentReport holder_sweep(const std::vector<MeasurePair>& pairs, const Lattice& lattice, const TestFunction& f,
                              const SweepOptions& options);

// Same scheme for |N_1(E) - N_2(E)| against C2 / log(1/d_w).
ExperimentReport ids_modulus_sweep(const std::vector<MeasurePair>& pairs, const Lattice& lattice, double energy,
                                   const SweepOptions& options);

struct FiniteRangeOptions {
    MonteCarlo mc;
    Method method = Method::eig;
    QuadratureSpec quad;
    // disorder scale factors; the first is the reference for the linearity check
    std::vector<double> scales{1.0};
    // L at which linearity in mu_1 is tested; 0 selects the smallest L
    int linearity_L = 0;
    double slope_max = -0.9;
};

// CRN remainders (1/N) E[Tr P0 f(H) P0 - Tr P0 f(H_L) P0] for each (scale, L).
// Pass when the log-log slope over L (reference scale) is <= slope_max and, at
// linearity_L, R(s nu) - (s/s0) R(s0 nu) is within 3 combined row standard
// errors of zero. The paired (same-sample) deviation, the c1 calibrated at the
// smallest L and its dominance at the other L are reported.
ExperimentReport finite_range_convergence(const Measure& nu, const Lattice& lattice, const TestFunction& f,
                                          const std::vector<int>& L, const FiniteRangeOptions& options);

// Plain estimates, verdict none.
ExperimentReport dosm_report(const Measure& nu, const Lattice& lattice, const TestFunction& f, const MonteCarlo& mc,
                             Method method, const QuadratureSpec& quad);
ExperimentReport ids_report(const Measure& nu, const Lattice& lattice, const std::vector<double>& energies,
                            const MonteCarlo& mc);

// LP vs oracle; pass when lp >= oracle - 1e-6 and |lp - oracle| <= tol.
ExperimentReport metric_report(const Measure& a, const Measure& b, int grid_size, double tol = 1e-3);

}  // namespace dosmlab
