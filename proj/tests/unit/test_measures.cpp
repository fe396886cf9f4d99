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
#include <sstream>

#include "dosmlab/error.hpp"
#include "dosmlab/measures.hpp"

using namespace dosmlab;

namespace {

Measure random_measure(Stream& s, int max_atoms, double spread) {
    const int n = 1 + static_cast<int>(s.uniform() * max_atoms);
    std::vector<Atom> atoms;
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
        const double w = 0.05 + s.uniform();
        atoms.push_back({spread * (2.0 * s.uniform() - 1.0), w});
        total += w;
    }
    for (auto& a : atoms) a.weight /= total;
    return Measure(atoms);
}

// bisection on the normal cdf, independent of the library's quantile routine
double normal_quantile_bisect(double p) {
    double lo = -40.0, hi = 40.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (0.5 * std::erfc(-mid / std::sqrt(2.0)) < p ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

TEST_SUITE("measures") {

TEST_CASE("construction sorts and merges") {
    Measure m({{2.0, 0.25}, {-1.0, 0.5}, {2.0, 0.25}});
    REQUIRE(m.size() == 2);
    CHECK(m.atoms()[0].location == -1.0);
    CHECK(m.atoms()[1].weight == 0.5);
    CHECK_THROWS_AS(Measure({{0.0, 0.5}}), InvalidInput);
    CHECK_THROWS_AS(Measure({{0.0, 1.0}, {1.0, 0.0}}), InvalidInput);
    CHECK_THROWS_AS(Measure(std::vector<Atom>{}), InvalidInput);
}

TEST_CASE("quantize exact families") {
    CHECK(quantize({"dirac", {}, {}}, 7) == Measure::dirac(0.0));
    const auto b = quantize({"bernoulli", {{"p", 0.5}}, {}}, 3);
    CHECK(b == Measure({{0.0, 0.5}, {1.0, 0.5}}));
    const auto a = quantize({"atomic", {}, {{1.0, 0.3}, {4.0, 0.7}}}, 99);
    CHECK(a.size() == 2);
}

TEST_CASE("quantize uniform by quantile formula") {
    const auto u = quantize({"uniform", {{"a", 0.0}, {"b", 1.0}}, {}}, 4);
    REQUIRE(u.size() == 4);
    const double expect[] = {0.125, 0.375, 0.625, 0.875};
    for (int k = 0; k < 4; ++k) {
        CHECK(u.atoms()[k].location == doctest::Approx(expect[k]).epsilon(1e-15));
        CHECK(u.atoms()[k].weight == doctest::Approx(0.25).epsilon(1e-15));
    }
}

TEST_CASE("quantize gaussian matches bisection quantiles of the truncated law") {
    const int n = 9;
    const auto g = quantize({"gaussian", {{"mean", 1.0}, {"sd", 2.0}}, {}}, n);
    const double lo = 0.5 * std::erfc(5.0 / std::sqrt(2.0));
    const double hi = 1.0 - lo;
    for (int k = 0; k < n; ++k) {
        const double p = lo + (k + 0.5) / n * (hi - lo);
        CHECK(g.atoms()[k].location == doctest::Approx(1.0 + 2.0 * normal_quantile_bisect(p)).epsilon(1e-9));
    }
}

TEST_CASE("quantize laplace is symmetric and inside the truncation") {
    const auto e = quantize({"two-sided-exponential", {{"rate", 2.0}}, {}}, 10);
    for (std::size_t k = 0; k < 5; ++k)
        CHECK(e.atoms()[k].location == doctest::Approx(-e.atoms()[9 - k].location).epsilon(1e-12));
    CHECK(std::abs(e.min_location()) < std::log(2.0 / 1e-10) / 2.0);
}

TEST_CASE("quantize rejects bad input") {
    CHECK_THROWS_AS(quantize({"cauchy", {}, {}}, 4), InvalidInput);
    CHECK_THROWS_AS(quantize({"uniform", {{"a", 1.0}, {"b", 1.0}}, {}}, 4), InvalidInput);
    CHECK_THROWS_AS(quantize({"gaussian", {{"sd", 0.0}}, {}}, 4), InvalidInput);
    CHECK_THROWS_AS(quantize({"uniform", {{"a", 0.0}, {"b", 1.0}, {"c", 2.0}}, {}}, 4), InvalidInput);
    CHECK_THROWS_AS(quantize({"uniform", {{"a", 0.0}, {"b", 1.0}}, {}}, 0), InvalidInput);
}

TEST_CASE("moments") {
    CHECK(moment(Measure::dirac(0.0), 1) == 0.0);
    const Measure sym({{-2.0, 0.5}, {2.0, 0.5}});
    CHECK(moment(sym, 1) == doctest::Approx(2.0));
    CHECK(moment(sym, 2) == doctest::Approx(4.0));
    Stream s(11);
    for (int t = 0; t < 20; ++t) {
        const auto nu = random_measure(s, 6, 3.0);
        const auto twice = nu.affine(2.0);
        CHECK(moment(twice, 1) == doctest::Approx(2.0 * moment(nu, 1)).epsilon(1e-12));
        CHECK(moment(twice, 2) == doctest::Approx(4.0 * moment(nu, 2)).epsilon(1e-12));
    }
}

TEST_CASE("moment class membership") {
    const Measure sym({{-2.0, 0.5}, {2.0, 0.5}});
    CHECK(MomentClass{2, 4.0, std::nullopt}.contains(sym));
    CHECK_FALSE(MomentClass{2, 3.9, std::nullopt}.contains(sym));
    CHECK(MomentClass{1, 2.0, -2.0}.contains(sym));
    CHECK_FALSE(MomentClass{1, 2.0, -1.0}.contains(sym));
}

TEST_CASE("sampling") {
    Stream s(5);
    for (double v : sample(Measure::dirac(3.0), s, 5)) CHECK(v == 3.0);
    CHECK(sample(Measure::dirac(3.0), s, 0).empty());

    const auto b = quantize({"bernoulli", {{"p", 0.5}}, {}}, 1);
    Stream s1(42), s2(42);
    const auto x = sample(b, s1, 100000);
    CHECK(x == sample(b, s2, 100000));
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= x.size();
    CHECK(std::abs(mean - 0.5) <= 3.0 * 0.5 / std::sqrt(1e5));
}

TEST_CASE("bl_distance closed forms") {
    const auto nu = quantize({"bernoulli", {{"p", 0.3}}, {}}, 1);
    CHECK(bl_distance(nu, nu) == doctest::Approx(0.0).epsilon(1e-14));
    for (double t : {0.01, 0.1, 0.5, 1.0, 3.0}) {
        const double exact = 2.0 * t / (2.0 + t);
        CHECK(bl_distance(Measure::dirac(0.0), Measure::dirac(t)) == doctest::Approx(exact).epsilon(1e-10));
        CHECK(std::abs(bl_distance_oracle(Measure::dirac(0.0), Measure::dirac(t), 64) - exact) < 1e-3);
    }
    const double far = bl_distance(Measure::dirac(0.0), Measure::dirac(1e6));
    CHECK(far <= 2.0);
    CHECK(far >= 1.99);
    const double far_oracle = bl_distance_oracle(Measure::dirac(0.0), Measure::dirac(1e6), 64);
    CHECK(far_oracle <= far + 1e-6);
    CHECK(far_oracle >= 1.99);
}

TEST_CASE("bl_distance backends cross-validate") {
    const auto b5 = quantize({"bernoulli", {{"p", 0.5}}, {}}, 1);
    const auto b6 = quantize({"bernoulli", {{"p", 0.6}}, {}}, 1);
    // optimum f(0) = -f(1) = 1/3 gives 0.1 * 2/3
    CHECK(bl_distance(b5, b6) == doctest::Approx(0.2 / 3.0).epsilon(1e-10));
    CHECK(std::abs(bl_distance_oracle(b5, b6, 64) - bl_distance(b5, b6)) < 1e-3);

    Stream s(2024);
    for (int t = 0; t < 30; ++t) {
        const auto a = random_measure(s, 8, 2.0);
        const auto b = random_measure(s, 8, 2.0);
        const double lp = bl_distance(a, b);
        const double oracle = bl_distance_oracle(a, b, 64);
        CHECK(lp >= oracle - 1e-6);
        CHECK(lp <= oracle + 1e-3);
        CHECK(lp >= 0.0);
        CHECK(lp <= 2.0);
    }
}

TEST_CASE("bl_distance metric axioms") {
    Stream s(77);
    for (int t = 0; t < 25; ++t) {
        const auto a = random_measure(s, 6, 4.0);
        const auto b = random_measure(s, 6, 4.0);
        const auto c = random_measure(s, 6, 4.0);
        const double ab = bl_distance(a, b), ba = bl_distance(b, a);
        CHECK(std::abs(ab - ba) <= 1e-10);
        CHECK(bl_distance(a, a) <= 1e-12);
        CHECK(bl_distance(a, c) <= ab + bl_distance(b, c) + 1e-8);
    }
}

TEST_CASE("quantized uniform converges in d_w") {
    double prev = 1.0;
    for (int n : {4, 8, 16, 32}) {
        const auto coarse = quantize({"uniform", {{"a", -1.0}, {"b", 2.0}}, {}}, n);
        const auto fine = quantize({"uniform", {{"a", -1.0}, {"b", 2.0}}, {}}, 2 * n);
        const double dist = bl_distance(coarse, fine);
        CHECK(dist < prev);
        prev = dist;
    }
}

TEST_CASE("CSV round trip") {
    const auto g = quantize({"gaussian", {{"sd", 1.5}}, {}}, 7);
    std::stringstream ss;
    write_csv(g, ss);
    CHECK(read_csv(ss) == g);
    std::stringstream bad("location,weight\n1.0;2.0\n");
    CHECK_THROWS_AS(read_csv(bad), InvalidInput);
}

}
