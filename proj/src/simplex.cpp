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

#include "dosmlab/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "dosmlab/error.hpp"

namespace dosmlab {

namespace {
constexpr double kPivotEps = 1e-11;
constexpr double kCostEps = 1e-12;
}  // namespace

LpSolution solve_simplex(const LinearProgram& lp, std::size_t max_pivots) {
    const std::size_t m = lp.rows;
    const std::size_t n = lp.cols;
    if (lp.a.size() != m * n || lp.b.size() != m || lp.c.size() != n)
        throw InvalidInput("linear program: inconsistent dimensions");
    for (std::size_t i = 0; i < m; ++i) {
        if (!(lp.b[i] >= 0.0) || !std::isfinite(lp.b[i]))
            throw InvalidInput("linear program: right-hand side must be finite and >= 0 (row " + std::to_string(i) + ")");
    }

    // Columns: n structural, m slack, then the rhs.
    const std::size_t width = n + m + 1;
    std::vector<double> t((m + 1) * width, 0.0);
    auto cell = [&](std::size_t i, std::size_t j) -> double& { return t[i * width + j]; };
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) cell(i, j) = lp.at(i, j);
        cell(i, n + i) = 1.0;
        cell(i, width - 1) = lp.b[i];
    }
    // Objective row holds reduced costs c_j - z_j; its rhs holds -value.
    for (std::size_t j = 0; j < n; ++j) cell(m, j) = lp.c[j];

    std::vector<std::size_t> basis(m);
    for (std::size_t i = 0; i < m; ++i) basis[i] = n + i;

    LpSolution out;
    for (;;) {
        std::size_t enter = width;
        for (std::size_t j = 0; j + 1 < width; ++j) {
            if (cell(m, j) > kCostEps) {
                enter = j;
                break;
            }
        }
        if (enter == width) break;

        double best_ratio = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < m; ++i) {
            const double aij = cell(i, enter);
            if (aij > kPivotEps) best_ratio = std::min(best_ratio, cell(i, width - 1) / aij);
        }
        // Among the rows attaining the minimum ratio, the smallest basic index leaves.
        std::size_t leave = m;
        const double tie = 1e-13 * std::max(1.0, best_ratio);
        for (std::size_t i = 0; i < m; ++i) {
            const double aij = cell(i, enter);
            if (aij <= kPivotEps) continue;
            if (cell(i, width - 1) / aij <= best_ratio + tie && (leave == m || basis[i] < basis[leave])) leave = i;
        }
        if (leave == m) throw LpFailure("linear program is unbounded (entering column " + std::to_string(enter) + ")");
        if (++out.pivots > max_pivots)
            throw LpFailure("simplex exceeded " + std::to_string(max_pivots) + " pivots");

        const double pivot = cell(leave, enter);
        for (std::size_t j = 0; j < width; ++j) cell(leave, j) /= pivot;
        cell(leave, enter) = 1.0;
        for (std::size_t i = 0; i <= m; ++i) {
            if (i == leave) continue;
            const double factor = cell(i, enter);
            if (factor == 0.0) continue;
            for (std::size_t j = 0; j < width; ++j) cell(i, j) -= factor * cell(leave, j);
            cell(i, enter) = 0.0;
        }
        // Clamp rounding drift so the rhs stays feasible.
        for (std::size_t i = 0; i < m; ++i)
            if (cell(i, width - 1) < 0.0 && cell(i, width - 1) > -1e-12) cell(i, width - 1) = 0.0;
        basis[leave] = enter;
    }

    out.x.assign(n, 0.0);
    for (std::size_t i = 0; i < m; ++i)
        if (basis[i] < n) out.x[basis[i]] = cell(i, width - 1);
    out.value = 0.0;
    for (std::size_t j = 0; j < n; ++j) out.value += lp.c[j] * out.x[j];
    return out;
}

}  // namespace dosmlab
