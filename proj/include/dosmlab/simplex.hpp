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
#include <vector>

namespace dosmlab {

// Dense linear program in inequality form:
//   maximize c^T x  subject to  A x <= b,  x >= 0,
// with b >= 0 so that the origin is a basic feasible solution.
struct LinearProgram {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> a;  // row-major, rows x cols
    std::vector<double> b;
    std::vector<double> c;

    LinearProgram(std::size_t m, std::size_t n) : rows(m), cols(n), a(m * n, 0.0), b(m, 0.0), c(n, 0.0) {}

    double& at(std::size_t i, std::size_t j) { return a[i * cols + j]; }
    double at(std::size_t i, std::size_t j) const { return a[i * cols + j]; }
};

struct LpSolution {
    double value = 0.0;
    std::vector<double> x;
    std::size_t pivots = 0;
};

// Tableau simplex with Bland's smallest-index rule for both the entering and
// the leaving variable, so it cannot cycle on degenerate vertices.
// Throws InvalidInput for malformed programs (b < 0, shape mismatch) and
// LpFailure for unboundedness or when the pivot limit is hit.
LpSolution solve_simplex(const LinearProgram& lp, std::size_t max_pivots = 200000);

}  // namespace dosmlab
