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

#include "doctest.h"

#include <cmath>
#include <numbers>

#include "dosmlab/error.hpp"
#include "dosmlab/funcalc.hpp"

using namespace dosmlab;

namespace {

BoxSpec box(int d, int R, int K, Boundary b = Boundary::periodic) {
    BoxSpec s;
    s.d = d;
    s.half_side = R;
    s.K = K;
    s.boundary = b;
    return s;
}

LatticeOperator random_operator(const Lattice& lat, std::uint64_t seed) {
    Stream s(seed);
    return build(lat, sample_disorder(quantize({"bernoulli", {{"p", 0.5}}, {}}, 1), lat, s));
}

}  // namespace

TEST_SUITE("funcalc") {

TEST_CASE("cutoff tau") {
    for (double t : {-1.0, -0.3, 0.0, 0.99, 1.0}) CHECK(tau(t) == 1.0);
    for (double t : {-2.0, 2.0, 2.5, -7.0}) CHECK(tau(t) == 0.0);
    CHECK(tau(1.5) == doctest::Approx(0.5).epsilon(1e-15));
    double prev = 1.0;
    for (int i = 1; i < 100; ++i) {
        const double t = 1.0 + i / 100.0;
        CHECK(tau(t) <= prev);
        prev = tau(t);
        const double h = 1e-6;
        CHECK(tau_prime(t) == doctest::Approx((tau(t + h) - tau(t - h)) / (2 * h)).epsilon(1e-6).scale(1.0));
        CHECK(tau_prime(-t) == doctest::Approx(-tau_prime(t)).epsilon(1e-15));
    }
}

TEST_CASE("almost-analytic extension") {
    const auto f = TestFunction::bump(2.0, 0.3, 1.0, 8);
    for (int P : {2, 3, 4}) {
        const AlmostAnalyticExtension ext(f, P);
        const double bound = sup_derivative(f, P + 1);
        for (int i = 0; i <= 60; ++i) {
            const double x = -2.5 + 5.0 * i / 60.0;
            CHECK(ext.value(x, 0.0) == cplx(f(x), 0.0));
            const double bracket = std::sqrt(1 + x * x);
            for (int j = 1; j <= 40; ++j) {
                const double y = 2.2 * bracket * j / 40.0;
                const cplx db = ext.dbar(x, y);
                if (y <= bracket) CHECK(std::abs(db) <= bound * std::pow(y, P));
                if (y >= 2.0 * bracket) CHECK(ext.value(x, y) == 0.0);
                // dbar = (d/dx + i d/dy)/2 by fourth-order central differences; the
                // step-halving gap bounds the difference error
                auto fd = [&](double h) {
                    auto v = [&](double a, double b) { return ext.value(x + a, y + b); };
                    const cplx fx = (-v(2 * h, 0) + 8.0 * v(h, 0) - 8.0 * v(-h, 0) + v(-2 * h, 0)) / (12 * h);
                    const cplx fy = (-v(0, 2 * h) + 8.0 * v(0, h) - 8.0 * v(0, -h) + v(0, -2 * h)) / (12 * h);
                    return 0.5 * (fx + cplx(0, 1) * fy);
                };
                const cplx coarse = fd(2e-3), fine = fd(1e-3);
                CAPTURE(x);
                CAPTURE(y);
                CHECK(std::abs(fine - db) <= std::abs(coarse - fine) + 1e-8 * (1 + std::abs(db)));
            }
        }
    }
    CHECK_THROWS_AS(AlmostAnalyticExtension(TestFunction::bump(1.0, 0.0, 1.0, 3), 3), InvalidInput);
}

TEST_CASE("eig_trace") {
    Lattice path(box(1, 1, 1, Boundary::dirichlet));
    const auto h = build(path, Disorder(3, 0.0));
    // equals one on [-2.1, 2.1], which holds the spectrum {-sqrt2, 0, sqrt2}
    const auto flat = TestFunction::smooth_step(2.5, 0.4, 6, -2.5, 0.4);
    CHECK(flat.radius() <= 3.0);
    CHECK(eig_trace(h, flat, path.origin_block()) == doctest::Approx(1.0).epsilon(1e-12));
    // eigenvectors (1, -+sqrt2, 1)/2 and (1, 0, -1)/sqrt2: weights 1/2, 0, 1/2 at the centre
    const auto g = TestFunction::bump(1.0, 1.3);
    CHECK(eig_trace(h, g, path.origin_block()) == doctest::Approx(0.5 * g(std::sqrt(2.0))).epsilon(1e-12));

    Lattice lat(box(2, 2, 1));
    const auto far = build(lat, Disorder(lat.blocks(), 20.0));
    CHECK(eig_trace(far, TestFunction::bump(3.0), lat.origin_block()) == 0.0);

    const auto hr = random_operator(lat, 5);
    const auto f1 = TestFunction::bump(2.0, 0.5);
    const auto f2 = TestFunction::smooth_step(1.0, 0.3, 6, -6.0);
    const double lin = eig_trace(hr, TestFunction::combination(0.7, f1, -1.9, f2), lat.origin_block());
    CHECK(lin == doctest::Approx(0.7 * eig_trace(hr, f1, lat.origin_block()) - 1.9 * eig_trace(hr, f2, lat.origin_block()))
                     .epsilon(1e-10));
}

TEST_CASE("hs_trace agrees with eig_trace") {
    Lattice lat(box(1, 20, 1));
    const auto h = random_operator(lat, 3);
    const auto f = TestFunction::bump(3.0, 0.0, 1.0, 6);
    QuadratureSpec q;
    q.degree = 3;
    const double exact = eig_trace(h, f, lat.origin_block());
    const auto p3 = hs_trace(h, f, lat.origin_block(), q);
    CHECK(std::abs(p3.value - exact) <= 1e-6 * (1 + std::abs(exact)));
    CHECK(p3.degree == 3);
    CHECK(p3.error_estimate > 0.0);

    q.degree = 4;
    const auto p4 = hs_trace(h, f, lat.origin_block(), q);
    CHECK(std::abs(p3.value - p4.value) <= p3.error_estimate + p4.error_estimate);

    // thread count must not change a single bit
    q.degree = 3;
    CHECK(hs_trace(h, f, lat.origin_block(), q, 3).value == p3.value);
}

TEST_CASE("hs_trace with K = 2 and the CG backend") {
    Lattice lat(box(1, 6, 2));
    const auto h = random_operator(lat, 8);
    const auto f = TestFunction::bump(2.5, 0.5, 1.0, 6);
    QuadratureSpec q;
    const double exact = eig_trace(h, f, lat.origin_block());
    CHECK(std::abs(hs_trace(h, f, lat.origin_block(), q).value - exact) <= 1e-6 * (1 + exact));
    q.solver = Solver::cg;
    q.nx = q.ny = 4;
    q.y_min = 0.05;
    const auto cg = hs_trace(h, f, lat.origin_block(), q);
    q.solver = Solver::lu;
    const auto lu = hs_trace(h, f, lat.origin_block(), q);
    CHECK(std::abs(cg.value - lu.value) <= 1e-7);
}

TEST_CASE("hs_trace support separation") {
    Lattice lat(box(1, 10, 1));
    const auto h = random_operator(lat, 4);
    const auto [lo, hi] = h.gershgorin();
    const auto f = TestFunction::bump(1.0, hi + 1.5, 1.0, 6);
    const auto r = hs_trace(h, f, lat.origin_block(), QuadratureSpec{});
    CHECK(std::abs(r.value) <= r.error_estimate);
    CHECK(lo < hi);
}

TEST_CASE("hs_trace converges under refinement") {
    Lattice lat(box(1, 10, 1));
    const auto h = random_operator(lat, 6);
    const auto f = TestFunction::bump(2.0, 0.2, 1.0, 6);
    const double exact = eig_trace(h, f, lat.origin_block());
    QuadratureSpec coarse;
    coarse.nx = coarse.ny = 4;
    coarse.y_min = 0.1;
    coarse.partition_tol = 1e-6;
    QuadratureSpec fine = coarse;
    fine.nx = fine.ny = 8;
    fine.y_min = 0.01;
    const double e_coarse = std::abs(hs_trace(h, f, lat.origin_block(), coarse).value - exact);
    const double e_fine = std::abs(hs_trace(h, f, lat.origin_block(), fine).value - exact);
    CHECK(e_fine <= 0.5 * e_coarse);
}

TEST_CASE("quadrature spec validation") {
    QuadratureSpec q;
    q.nx = 7;
    CHECK_THROWS_AS(q.validate(), InvalidInput);
    q = QuadratureSpec{};
    q.y_min = 0.0;
    CHECK_THROWS_AS(q.validate(), InvalidInput);
    q = QuadratureSpec{};
    CHECK(q.degree_for(2) == 4);
    CHECK_THROWS_AS(hs_rule(TestFunction::bump(1.0, 0.0, 1.0, 3), 3, q), InvalidInput);
}

TEST_CASE("resolvent block traces") {
    for (int d : {1, 2}) {
        for (int K : {1, 2}) {
            Lattice lat(box(d, 2 * K, K));
            const double n = static_cast<double>(lat.rank());
            const auto free_h = build(lat, Disorder(lat.blocks(), 0.0));
            const std::size_t o = lat.origin_block();
            const double eta = 50.0;
            const cplx big = resolvent_block_trace(free_h, cplx(0, eta), o, o);
            CHECK(std::abs(big - cplx(0, n / eta)) <= 4 * d * n / (eta * eta));

            const auto h = random_operator(lat, 10 + d + K);
            const cplx z(0.3, 0.7);
            const std::size_t j = (o + 1) % lat.blocks();
            const cplx a = resolvent_block_trace(h, z, o, j);
            CHECK(std::abs(resolvent_block_trace(h, std::conj(z), o, j) - std::conj(a)) <= 1e-12);
            CHECK(std::abs(resolvent_block_trace(h, z, o, o)) <= n / 0.7 + 1e-12);
            CHECK(std::abs(a) <= n / 0.7 + 1e-12);
            CHECK(std::abs(resolvent_block_trace(h, z, o, j, Solver::cg) - a) <= 1e-8);

            // R(z1) - R(z2) = (z1 - z2) R(z1) R(z2), contracted with P0 on both sides
            const cplx z1(-0.4, 0.5), z2(1.1, -0.9);
            const auto sites = lat.block_sites(o);
            const auto r1 = resolvent_columns(h, z1, sites);
            const auto r2 = resolvent_columns(h, z2, sites);
            cplx lhs = 0.0, rhs = 0.0;
            for (std::size_t m = 0; m < sites.size(); ++m) {
                lhs += r1(sites[m], m) - r2(sites[m], m);
                // R(z1) is complex symmetric, so row s of R(z1) is column s
                rhs += (z1 - z2) * (r1.col(m).array() * r2.col(m).array()).sum();
            }
            CHECK(std::abs(lhs - rhs) <= 1e-10);
        }
    }
    Lattice lat(box(1, 2, 1));
    CHECK_THROWS_AS(resolvent_block_trace(build(lat, Disorder(5, 0.0)), cplx(1, 0), 0, 0), InvalidInput);
}

}
