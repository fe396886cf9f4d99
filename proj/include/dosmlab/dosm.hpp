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
#include <cstdint>
#include <string>
#include <vector>

#include "dosmlab/funcalc.hpp"
#include "dosmlab/lattice.hpp"
#include "dosmlab/measures.hpp"
#include "dosmlab/test_functions.hpp"

namespace dosmlab {

enum class Method { eig, hs };
Method parse_method(const std::string& s);
std::string to_string(Method m);

// Sample i of a run with master seed s draws its disorder from
// Stream::substream(s, i); results are reduced in sample order.
struct MonteCarlo {
    std::size_t samples = 100;
    std::uint64_t seed = 1;
    int threads = 1;
};

struct Stats {
    double mean = 0.0;
    double stderr_ = 0.0;  // sample sd / sqrt(n); 0 when all samples are bitwise equal
};

Stats summarize(const std::vector<double>& xs);

struct DosmEstimate {
    double value = 0.0;
    double stderr_ = 0.0;
    std::size_t samples = 0;
    Method method = Method::eig;
    // hs only: strip bound per unit rank (quadrature error excluded)
    double hs_error = 0.0;
    std::string box;
    std::string measure;
    std::string function;
};

std::string describe(const BoxSpec& box);
std::string describe(const Measure& nu);

// (1/N) E Tr(P0 f(H) P0) by Monte Carlo over the disorder. A deterministic
// measure is evaluated once and reported with stderr 0.
DosmEstimate dosm_estimate(const Measure& nu, const Lattice& lattice, const TestFunction& f, const MonteCarlo& mc,
                           Method method = Method::eig, const QuadratureSpec& quad = {});

// N(E) by eigenvalue counting, (1/N) sum_{lambda_k <= E} ||P0 v_k||^2 per
// sample; exactly 0 below and 1 above the sample's Gershgorin interval.
DosmEstimate ids_estimate(const Measure& nu, const Lattice& lattice, double energy, const MonteCarlo& mc);

// The same samples evaluated at every energy (monotone in E per sample).
std::vector<DosmEstimate> ids_curve(const Measure& nu, const Lattice& lattice, const std::vector<double>& energies,
                                    const MonteCarlo& mc);

// Smoothed step for the IDS at E: equals one on the spectral window of every
// operator with disorder in supp nu, falls to zero across [E - eps, E + eps].
TestFunction ids_step(const Lattice& lattice, const Measure& nu, double energy, double eps, int order);

// dosm_estimate on disorder truncated to blocks with ||j||_inf <= K L.
DosmEstimate finite_range_dosm(const Measure& nu, const Lattice& lattice, const TestFunction& f, int L,
                               const MonteCarlo& mc, Method method = Method::eig, const QuadratureSpec& quad = {});

// Per-sample differences (1/N)[Tr P0 f(H) P0 - Tr P0 f(H_L) P0].
struct RemainderSamples {
    std::vector<int> L;
    // diffs[l][i]: truncation radius L[l], sample i
    std::vector<std::vector<double>> diffs;
    Stats full;
};

// Common random numbers: H and H_L share the disorder draw of each sample.
RemainderSamples crn_remainder(const Measure& nu, const Lattice& lattice, const TestFunction& f,
                               const std::vector<int>& L, const MonteCarlo& mc, Method method = Method::eig,
                               const QuadratureSpec& quad = {});

// Same difference with H_L drawn from an independent substream.
RemainderSamples independent_remainder(const Measure& nu, const Lattice& lattice, const TestFunction& f,
                                       const std::vector<int>& L, const MonteCarlo& mc);

// c1 mu_1[nu] / (N L) ||f||_{3+d}
double remainder_bound(const Measure& nu, int L, const TestFunction& f, int d, std::size_t N, double c1);

}  // namespace dosmlab
