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

#include "dosmlab/funcalc.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <sstream>
#include <utility>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseLU>

#include "dosmlab/error.hpp"
#include "dosmlab/parallel.hpp"
#include "dosmlab/quadrature.hpp"

namespace dosmlab {

namespace {

using SpMatC = Eigen::SparseMatrix<cplx>;
using Interval = std::pair<double, double>;

std::string show(cplx z) {
    std::ostringstream os;
    os.precision(10);
    os << z.real() << (z.imag() < 0 ? "-" : "+") << std::abs(z.imag()) << "i";
    return os.str();
}

// Bisection of [a, b] until an n-point Gauss rule on each panel matches the
// sum over its two halves, for each of the m component functions, to
// tol * scale_k with scale_k = sup |fun_k| * (b - a).
std::vector<Interval> adapt_partition(const std::function<void(double, double*)>& fun, int m, double a, double b,
                                      const GaussRule& rule, double tol,
                                      const std::function<void(double, double*)>& scale_fun = nullptr) {
    std::vector<double> scale(m, 0.0), buf(m);
    for (int i = 0; i <= 2000; ++i) {
        (scale_fun ? scale_fun : fun)(a + (b - a) * i / 2000.0, buf.data());
        for (int k = 0; k < m; ++k) scale[k] = std::max(scale[k], std::abs(buf[k]));
    }
    for (auto& s : scale) s *= (b - a);

    auto panel = [&](double p, double q, std::vector<double>& out) {
        std::fill(out.begin(), out.end(), 0.0);
        const double mid = 0.5 * (p + q), half = 0.5 * (q - p);
        for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
            fun(mid + half * rule.nodes[i], buf.data());
            for (int k = 0; k < m; ++k) out[k] += half * rule.weights[i] * buf[k];
        }
    };
    std::vector<Interval> out;
    std::vector<Interval> stack{{a, b}};
    std::vector<double> whole(m), left(m), right(m);
    const double min_width = 1e-6 * std::max(1.0, b - a);
    while (!stack.empty()) {
        const auto [p, q] = stack.back();
        stack.pop_back();
        const double mid = 0.5 * (p + q);
        panel(p, q, whole);
        panel(p, mid, left);
        panel(mid, q, right);
        bool ok = true;
        for (int k = 0; k < m && ok; ++k) ok = std::abs(whole[k] - left[k] - right[k]) <= tol * scale[k];
        if (ok || q - p < min_width) {
            out.emplace_back(p, q);
        } else {
            stack.emplace_back(mid, q);
            stack.emplace_back(p, mid);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<Interval> refine(const std::vector<Interval>& parts, double width) {
    std::vector<Interval> out;
    for (const auto& [a, b] : parts) {
        const int k = std::max(1, static_cast<int>(std::ceil((b - a) / width - 1e-12)));
        for (int i = 0; i < k; ++i) out.emplace_back(a + (b - a) * i / k, a + (b - a) * (i + 1) / k);
    }
    return out;
}

void gauss_nodes(const std::vector<Interval>& parts, const GaussRule& rule, std::vector<double>& x,
                 std::vector<double>& w) {
    x.clear();
    w.clear();
    for (const auto& [a, b] : parts) {
        const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
        for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
            x.push_back(mid + half * rule.nodes[i]);
            w.push_back(half * rule.weights[i]);
        }
    }
}

// Complex copy of H whose diagonal can be shifted in place; one factorization
// object per instance, so each worker owns one.
class ShiftedSolver {
public:
    ShiftedSolver(const LatticeOperator& h, Solver kind) : kind_(kind) {
        a_ = h.matrix().cast<cplx>();
        a_.makeCompressed();
        const auto n = a_.cols();
        diag_.resize(n);
        base_.resize(n);
        for (Eigen::Index c = 0; c < n; ++c) {
            diag_[c] = -1;
            for (auto k = a_.outerIndexPtr()[c]; k < a_.outerIndexPtr()[c + 1]; ++k) {
                if (a_.innerIndexPtr()[k] == c) {
                    diag_[c] = k;
                    base_[c] = a_.valuePtr()[k].real();
                }
            }
            if (diag_[c] < 0) throw NumericalFailure("operator is missing a stored diagonal entry");
        }
        if (kind_ == Solver::lu) lu_.analyzePattern(a_);
    }

    // X = (H - z)^-1 [e_s for s in sites]
    Eigen::MatrixXcd solve(cplx z, const std::vector<std::size_t>& sites) {
        for (std::size_t c = 0; c < diag_.size(); ++c) a_.valuePtr()[diag_[c]] = base_[c] - z;
        Eigen::MatrixXcd rhs = Eigen::MatrixXcd::Zero(a_.rows(), static_cast<Eigen::Index>(sites.size()));
        for (std::size_t k = 0; k < sites.size(); ++k) rhs(static_cast<Eigen::Index>(sites[k]), k) = 1.0;
        Eigen::MatrixXcd x;
        if (kind_ == Solver::lu) {
            lu_.factorize(a_);
            if (lu_.info() != Eigen::Success)
                throw NumericalFailure("sparse LU failed at z = " + show(z) + ": " + lu_.lastErrorMessage());
            x = lu_.solve(rhs);
        } else {
            cg_.setTolerance(1e-10);
            cg_.setMaxIterations(20 * a_.rows() + 1000);
            cg_.compute(a_);
            x = cg_.solve(rhs);
            if (cg_.info() != Eigen::Success)
                throw NumericalFailure("CG on the normal equations did not converge at z = " + show(z) + " (error " +
                                       std::to_string(cg_.error()) + ")");
        }
        if (!x.allFinite()) throw NumericalFailure("resolvent solve produced non-finite values at z = " + show(z));
        return x;
    }

private:
    Solver kind_;
    SpMatC a_;
    std::vector<Eigen::Index> diag_;
    std::vector<double> base_;
    Eigen::SparseLU<SpMatC, Eigen::COLAMDOrdering<int>> lu_;
    Eigen::LeastSquaresConjugateGradient<SpMatC> cg_;
};

}  // namespace

Solver parse_solver(const std::string& s) {
    if (s == "lu") return Solver::lu;
    if (s == "cg") return Solver::cg;
    throw InvalidInput("unknown solver '" + s + "' (expected lu or cg)");
}

std::string to_string(Solver s) { return s == Solver::lu ? "lu" : "cg"; }

double tau(double t) {
    const double a = std::abs(t);
    if (a <= 1.0) return 1.0;
    if (a >= 2.0) return 0.0;
    // h(2-a) / (h(2-a) + h(a-1)) with h(s) = exp(-1/s), as a logistic in the exponent gap
    const double q = 1.0 / (a - 1.0) - 1.0 / (2.0 - a);
    return 1.0 / (1.0 + std::exp(-q));
}

double tau_prime(double t) {
    const double a = std::abs(t);
    if (a <= 1.0 || a >= 2.0) return 0.0;
    const double q = 1.0 / (a - 1.0) - 1.0 / (2.0 - a);
    if (std::abs(q) > 700.0) return 0.0;
    // -AB/(A+B)^2 * (1/(2-a)^2 + 1/(a-1)^2) with AB/(A+B)^2 = 1/(e^q + 2 + e^-q)
    const double d = -(1.0 / ((2.0 - a) * (2.0 - a)) + 1.0 / ((a - 1.0) * (a - 1.0))) / (std::exp(q) + 2.0 + std::exp(-q));
    return t < 0 ? -d : d;
}

AlmostAnalyticExtension::AlmostAnalyticExtension(TestFunction f, int degree) : f_(std::move(f)), degree_(degree) {
    if (degree < 1) throw InvalidInput("almost-analytic extension: degree must be >= 1");
    if (f_.order() < degree + 1)
        throw InvalidInput("almost-analytic extension of degree " + std::to_string(degree) + " needs order " +
                           std::to_string(degree + 1) + " but " + f_.describe() + " has order " +
                           std::to_string(f_.order()));
    inv_factorial_.assign(degree + 2, 1.0);
    for (int n = 1; n <= degree + 1; ++n) inv_factorial_[n] = inv_factorial_[n - 1] / n;
}

cplx AlmostAnalyticExtension::value(double x, double y) const {
    const double bracket = std::sqrt(1.0 + x * x);
    const double sigma = tau(y / bracket);
    if (sigma == 0.0) return 0.0;
    cplx s = 0.0, iy_n = 1.0;
    for (int n = 0; n <= degree_; ++n) {
        s += f_.eval(n, x) * iy_n * inv_factorial_[n];
        iy_n *= cplx(0.0, y);
    }
    return s * sigma;
}

cplx AlmostAnalyticExtension::dbar(double x, double y) const {
    std::vector<double> d(degree_ + 2);
    for (int n = 0; n <= degree_ + 1; ++n) d[n] = f_.eval(n, x);
    return dbar(d.data(), x, y);
}

cplx AlmostAnalyticExtension::dbar(const double* d, double x, double y) const {
    const double bracket = std::sqrt(1.0 + x * x);
    const double t = y / bracket;
    const double sigma = tau(t);
    const double dt = tau_prime(t);
    cplx s = 0.0, iy_n = 1.0;
    for (int n = 0; n < degree_; ++n) iy_n *= cplx(0.0, y);
    // remainder term f^(P+1) (iy)^P sigma / (2 P!)
    cplx out = 0.5 * d[degree_ + 1] * iy_n * inv_factorial_[degree_] * sigma;
    if (dt != 0.0) {
        cplx p = 1.0;
        for (int n = 0; n <= degree_; ++n) {
            s += d[n] * p * inv_factorial_[n];
            p *= cplx(0.0, y);
        }
        const double sx = dt * (-y * x / (bracket * bracket * bracket));
        const double sy = dt / bracket;
        out += 0.5 * s * cplx(sx, sy);
    }
    return out;
}

void QuadratureSpec::validate() const {
    if (nx < 2 || ny < 2 || nx % 2 || ny % 2) throw InvalidInput("quadrature: nx and ny must be even and >= 2");
    if (nx > 64 || ny > 64) throw InvalidInput("quadrature: nx and ny must be <= 64");
    if (!(y_min > 0.0 && y_min < 1.0)) throw InvalidInput("quadrature: y_min must lie in (0, 1)");
    if (degree < 0) throw InvalidInput("quadrature: degree must be >= 0 (0 selects 2 + d)");
    if (!(panel_ratio > 0.0)) throw InvalidInput("quadrature: panel_ratio must be positive");
    if (!(max_panel > 0.0)) throw InvalidInput("quadrature: max_panel must be positive");
    if (!(partition_tol > 0.0 && partition_tol < 1.0)) throw InvalidInput("quadrature: partition_tol must lie in (0, 1)");
}

HsRule hs_rule(const TestFunction& f, int degree, const QuadratureSpec& q) {
    q.validate();
    const AlmostAnalyticExtension ext(f, degree);
    const GaussRule gx = gauss_legendre(q.nx);
    const GaussRule gy = gauss_legendre(q.ny);
    const int m = degree + 2;
    const double lo = f.lower(), hi = f.upper();

    HsRule rule;
    rule.degree = degree;
    double fact = 1.0;
    for (int n = 2; n <= degree; ++n) fact *= n;
    rule.strip_bound = sup_derivative(f, degree + 1) / fact * (hi - lo) * std::pow(q.y_min, degree) / degree /
                       std::numbers::pi;

    // f^(k) enters with weight up to (2<x>)^min(k,P) / k!; the weighted
    // integrals are held to tol relative to the unweighted sup.
    const auto base = adapt_partition(
        [&](double x, double* out) {
            const double bracket = std::sqrt(1.0 + x * x);
            for (int k = 0; k < m; ++k) out[k] = f.eval(k, x) * std::pow(bracket, std::min(k, degree));
        },
        m, lo, hi, gx, q.partition_tol, [&](double x, double* out) {
            for (int k = 0; k < m; ++k) out[k] = f.eval(k, x);
        });
    const auto tparts = adapt_partition([](double t, double* out) { out[0] = tau_prime(t); }, 1, 1.0, 2.0, gy,
                                        q.partition_tol);
    rule.x_panels = base.size();
    rule.t_panels = tparts.size();

    std::vector<double> derivs(m);
    auto add = [&](double x, double y, double w) {
        for (int k = 0; k < m; ++k) derivs[k] = f.eval(k, x);
        const cplx c = w * ext.dbar(derivs.data(), x, y);
        if (c == 0.0) return;
        rule.x.push_back(x);
        rule.y.push_back(y);
        rule.coef.push_back(c);
    };

    std::vector<double> xs, wx, ys, wy;
    // near the axis: geometric bands in y, x-panels no wider than panel_ratio * y
    std::vector<double> edges{q.y_min};
    while (edges.back() * 2.0 < 1.0) edges.push_back(edges.back() * 2.0);
    edges.push_back(1.0);
    for (std::size_t b = 0; b + 1 < edges.size(); ++b) {
        gauss_nodes({{edges[b], edges[b + 1]}}, gy, ys, wy);
        gauss_nodes(refine(base, std::min(q.max_panel, q.panel_ratio * edges[b + 1])), gx, xs, wx);
        for (std::size_t i = 0; i < xs.size(); ++i)
            for (std::size_t j = 0; j < ys.size(); ++j) add(xs[i], ys[j], wx[i] * wy[j]);
    }
    gauss_nodes(refine(base, q.max_panel), gx, xs, wx);
    std::vector<double> ts, wt;
    gauss_nodes(tparts, gy, ts, wt);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double bracket = std::sqrt(1.0 + xs[i] * xs[i]);
        // 1 <= y <= <x>, where tau = 1
        for (std::size_t j = 0; j < gy.nodes.size(); ++j) {
            const double half = 0.5 * (bracket - 1.0);
            if (half <= 0.0) break;
            add(xs[i], 1.0 + half * (gy.nodes[j] + 1.0), wx[i] * half * gy.weights[j]);
        }
        // <x> <= y <= 2<x> through t = y / <x>
        for (std::size_t j = 0; j < ts.size(); ++j) add(xs[i], ts[j] * bracket, wx[i] * bracket * wt[j]);
    }
    return rule;
}

SpectralWeights spectral_weights(const LatticeOperator& h, std::size_t block) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h.dense());
    if (es.info() != Eigen::Success) throw NumericalFailure("symmetric eigensolver did not converge");
    SpectralWeights sw;
    sw.values = es.eigenvalues();
    sw.weights = Eigen::VectorXd::Zero(sw.values.size());
    for (auto s : h.lattice().block_sites(block)) sw.weights += es.eigenvectors().row(s).transpose().cwiseAbs2();
    return sw;
}

double eig_trace(const SpectralWeights& sw, const TestFunction& f) {
    double s = 0.0;
    for (Eigen::Index k = 0; k < sw.values.size(); ++k) s += f(sw.values(k)) * sw.weights(k);
    return s;
}

double eig_trace(const LatticeOperator& h, const TestFunction& f, std::size_t block) {
    return eig_trace(spectral_weights(h, block), f);
}

TraceResult hs_trace(const LatticeOperator& h, const HsRule& rule, std::size_t block, Solver solver, int threads) {
    const auto sites = h.lattice().block_sites(block);
    const std::size_t n = rule.coef.size();
    std::vector<cplx> terms(n);
    parallel_chunks(n, threads, [&](std::size_t begin, std::size_t end) {
        ShiftedSolver s(h, solver);
        for (std::size_t k = begin; k < end; ++k) {
            const cplx z(rule.x[k], rule.y[k]);
            const auto cols = s.solve(z, sites);
            cplx tr = 0.0;
            for (std::size_t a = 0; a < sites.size(); ++a) tr += cols(static_cast<Eigen::Index>(sites[a]), a);
            terms[k] = rule.coef[k] * tr;
        }
    });
    cplx total = 0.0;
    for (const auto& t : terms) total += t;
    TraceResult out;
    out.value = 2.0 * total.real() / std::numbers::pi;
    out.error_estimate = rule.strip_bound * static_cast<double>(sites.size());
    out.nodes = n;
    out.degree = rule.degree;
    return out;
}

TraceResult hs_trace(const LatticeOperator& h, const TestFunction& f, std::size_t block, const QuadratureSpec& q,
                     int threads) {
    return hs_trace(h, hs_rule(f, q.degree_for(h.lattice().dim()), q), block, q.solver, threads);
}

Eigen::MatrixXcd resolvent_columns(const LatticeOperator& h, cplx z, const std::vector<std::size_t>& sites,
                                   Solver solver) {
    if (z.imag() == 0.0) throw InvalidInput("resolvent: Im z must be nonzero");
    ShiftedSolver s(h, solver);
    return s.solve(z, sites);
}

cplx resolvent_block_trace(const LatticeOperator& h, cplx z, std::size_t block_i, std::size_t block_j, Solver solver) {
    const auto& lat = h.lattice();
    if (block_i >= lat.blocks() || block_j >= lat.blocks()) throw InvalidInput("resolvent: block index out of range");
    const auto rows = lat.block_sites(block_i);
    const auto cols = resolvent_columns(h, z, lat.block_sites(block_j), solver);
    cplx tr = 0.0;
    for (std::size_t a = 0; a < rows.size(); ++a) tr += cols(static_cast<Eigen::Index>(rows[a]), a);
    return tr;
}

}  // namespace dosmlab
