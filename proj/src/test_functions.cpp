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

#include "dosmlab/test_functions.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <utility>

#include "dosmlab/error.hpp"
#include "dosmlab/quadrature.hpp"

namespace dosmlab {

namespace {

double horner(const std::vector<double>& c, double x) {
    double s = 0.0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) s = s * x + *it;
    return s;
}

std::vector<double> differentiate(const std::vector<double>& c) {
    if (c.size() <= 1) return {0.0};
    std::vector<double> d(c.size() - 1);
    for (std::size_t i = 1; i < c.size(); ++i) d[i - 1] = static_cast<double>(i) * c[i];
    return d;
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(12);
    os << v;
    return os.str();
}

double binomial(int n, int k) {
    double b = 1.0;
    for (int i = 1; i <= k; ++i) b = b * (n - k + i) / i;
    return b;
}

class ZeroImpl final : public TestFunction::Impl {
public:
    explicit ZeroImpl(int order) : order_(order) {}
    double derivative(int, double) const override { return 0.0; }
    int order() const override { return order_; }
    double lower() const override { return -1.0; }
    double upper() const override { return 1.0; }
    std::string describe() const override { return "zero"; }

private:
    int order_;
};

class BumpImpl final : public TestFunction::Impl {
public:
    BumpImpl(double r, double center, double scale, int order, std::vector<double> poly)
        : r_(r), center_(center), scale_(scale), order_(order), g_(order) {
        polys_.push_back(std::move(poly));
        for (int k = 1; k <= order; ++k) polys_.push_back(differentiate(polys_.back()));
    }

    double derivative(int k, double x) const override {
        const double u = (x - center_) / r_;
        if (std::abs(u) >= 1.0) return 0.0;
        double s = 0.0;
        for (int j = 0; j <= k; ++j) {
            const auto& p = polys_[k - j];
            if (p.size() == 1 && p[0] == 0.0) continue;
            s += binomial(k, j) * horner(p, u) * g_(j, u);
        }
        return scale_ * s / std::pow(r_, k);
    }
    int order() const override { return order_; }
    double lower() const override { return center_ - r_; }
    double upper() const override { return center_ + r_; }
    std::string describe() const override {
        std::string s = "bump(r=" + fmt(r_) + ",center=" + fmt(center_) + ",scale=" + fmt(scale_) +
                        ",order=" + std::to_string(order_);
        if (polys_[0].size() > 1 || polys_[0][0] != 1.0) {
            s += ",poly=[";
            for (std::size_t i = 0; i < polys_[0].size(); ++i) s += (i ? "," : "") + fmt(polys_[0][i]);
            s += "]";
        }
        return s + ")";
    }

private:
    double r_, center_, scale_;
    int order_;
    BumpDerivatives g_;
    std::vector<std::vector<double>> polys_;
};

// Monotone transition S on [-1, 1]: S = 0 below -1, 1 above 1, S' = kernel / Z.
class Transition {
public:
    explicit Transition(int order) : smooth_(order > 3), g_(std::max(order, 1)) {
        if (!smooth_) {
            const int m = order + 1;
            kernel_.assign(2 * m + 1, 0.0);
            for (int i = 0; i <= m; ++i) kernel_[2 * i] = binomial(m, i) * ((i % 2) ? -1.0 : 1.0);
            antider_.assign(kernel_.size() + 1, 0.0);
            for (std::size_t i = 0; i < kernel_.size(); ++i) antider_[i + 1] = kernel_[i] / (i + 1.0);
            z_ = 2.0 * horner(antider_, 1.0);
            derivs_.push_back(kernel_);
            for (int k = 1; k < order; ++k) derivs_.push_back(differentiate(derivs_.back()));
        } else {
            rule_ = gauss_legendre(20);
            z_ = 2.0 * left_integral(0.0);
        }
    }

    double value(double t) const {
        if (t <= -1.0) return 0.0;
        if (t >= 1.0) return 1.0;
        if (!smooth_) return 0.5 + horner(antider_, t) / z_;
        // symmetric kernel: integrate from the nearer endpoint
        if (t <= 0.0) return left_integral(t) / z_;
        return 1.0 - left_integral(-t) / z_;
    }

    // k-th derivative, k >= 1
    double derivative(int k, double t) const {
        if (t <= -1.0 || t >= 1.0) return 0.0;
        if (!smooth_) return horner(derivs_[k - 1], t) / z_;
        return g_(k - 1, t) / z_;
    }

    // Bump integral normalizer; 0.443993816168... for the exp kernel.
    double normalizer() const { return z_; }

private:
    double left_integral(double t) const {
        return integrate_gauss(rule_, -1.0, t, 8, [this](double s) { return g_(0, s); });
    }

    bool smooth_;
    BumpDerivatives g_;
    std::vector<double> kernel_, antider_;
    std::vector<std::vector<double>> derivs_;
    GaussRule rule_;
    double z_ = 1.0;
};

class SmoothStepImpl final : public TestFunction::Impl {
public:
    SmoothStepImpl(double energy, double eps, int order, double lower, double lower_width)
        : energy_(energy), eps_(eps), lower_(lower), width_(lower_width), order_(order), s_(order) {
        if (!(eps > 0.0) || !(lower_width > 0.0))
            throw InvalidInput("smoothstep: eps and lower_width must be positive");
        if (lower + lower_width > energy - eps)
            throw InvalidInput("smoothstep: lower edge [" + fmt(lower - lower_width) + ", " + fmt(lower + lower_width) +
                               "] overlaps the step at " + fmt(energy) + " +- " + fmt(eps));
        mid_ = 0.5 * (lower + lower_width + energy - eps);
    }

    double derivative(int k, double x) const override {
        if (x < mid_) {
            const double t = (x - lower_) / width_;
            return k == 0 ? s_.value(t) : s_.derivative(k, t) / std::pow(width_, k);
        }
        const double t = (x - energy_) / eps_;
        return k == 0 ? 1.0 - s_.value(t) : -s_.derivative(k, t) / std::pow(eps_, k);
    }
    int order() const override { return order_; }
    double lower() const override { return lower_ - width_; }
    double upper() const override { return energy_ + eps_; }
    std::string describe() const override {
        return "smoothstep(E=" + fmt(energy_) + ",eps=" + fmt(eps_) + ",order=" + std::to_string(order_) +
               ",lower=" + fmt(lower_) + ",lower_width=" + fmt(width_) + ")";
    }

private:
    double energy_, eps_, lower_, width_, mid_ = 0.0;
    int order_;
    Transition s_;
};

class CombinationImpl final : public TestFunction::Impl {
public:
    CombinationImpl(double a, TestFunction f, double b, TestFunction g)
        : a_(a), b_(b), f_(std::move(f)), g_(std::move(g)) {}
    double derivative(int k, double x) const override {
        double s = 0.0;
        if (a_ != 0.0) s += a_ * f_.eval(k, x);
        if (b_ != 0.0) s += b_ * g_.eval(k, x);
        return s;
    }
    int order() const override { return std::min(f_.order(), g_.order()); }
    double lower() const override {
        if (b_ == 0.0) return f_.lower();
        if (a_ == 0.0) return g_.lower();
        return std::min(f_.lower(), g_.lower());
    }
    double upper() const override {
        if (b_ == 0.0) return f_.upper();
        if (a_ == 0.0) return g_.upper();
        return std::max(f_.upper(), g_.upper());
    }
    std::string describe() const override {
        if (b_ == 0.0) return fmt(a_) + "*" + f_.describe();
        return fmt(a_) + "*" + f_.describe() + "+" + fmt(b_) + "*" + g_.describe();
    }

private:
    double a_, b_;
    TestFunction f_, g_;
};

class ShiftImpl final : public TestFunction::Impl {
public:
    ShiftImpl(TestFunction f, double offset) : f_(std::move(f)), offset_(offset) {}
    double derivative(int k, double x) const override { return f_.eval(k, x - offset_); }
    int order() const override { return f_.order(); }
    double lower() const override { return f_.lower() + offset_; }
    double upper() const override { return f_.upper() + offset_; }
    std::string describe() const override { return f_.describe() + "(x-" + fmt(offset_) + ")"; }

private:
    TestFunction f_;
    double offset_;
};

void check_order(const TestFunction& f, int beta) {
    if (beta < 0 || beta > f.order())
        throw InvalidInput("derivative order " + std::to_string(beta) + " exceeds available order " +
                           std::to_string(f.order()) + " of " + f.describe());
}

// Composite Simpson with `panels` (even) subintervals.
double simpson(const TestFunction& f, int beta, int panels) {
    const double a = f.lower(), b = f.upper();
    const double h = (b - a) / panels;
    auto integrand = [&](double x) {
        double s = 0.0;
        const double bracket = std::sqrt(1.0 + x * x);
        double weight = 1.0 / bracket;
        for (int j = 0; j <= beta; ++j) {
            s += std::abs(f.eval(j, x)) * weight;
            weight *= bracket;
        }
        return s;
    };
    double s = integrand(a) + integrand(b);
    for (int i = 1; i < panels; ++i) s += (i % 2 ? 4.0 : 2.0) * integrand(a + i * h);
    return s * h / 3.0;
}

}  // namespace

BumpDerivatives::BumpDerivatives(int max_order) {
    q_.push_back({1.0});
    for (int k = 0; k < max_order; ++k) {
        const auto& q = q_.back();
        const auto dq = differentiate(q);
        std::vector<double> next(q.size() + 3, 0.0);
        // dq * (1 - 2u^2 + u^4)
        for (std::size_t i = 0; i < dq.size(); ++i) {
            next[i] += dq[i];
            next[i + 2] -= 2.0 * dq[i];
            next[i + 4] += dq[i];
        }
        // (4k u - 4k u^3 - 2u) * q
        for (std::size_t i = 0; i < q.size(); ++i) {
            next[i + 1] += (4.0 * k - 2.0) * q[i];
            next[i + 3] -= 4.0 * k * q[i];
        }
        while (next.size() > 1 && next.back() == 0.0) next.pop_back();
        q_.push_back(std::move(next));
    }
}

double BumpDerivatives::operator()(int k, double u) const {
    const double s = 1.0 - u * u;
    if (!(s > 0.0)) return 0.0;
    return horner(q_[k], u) * std::exp(-1.0 / s - 2.0 * k * std::log(s));
}

TestFunction::TestFunction(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}

double TestFunction::eval(int k, double x) const {
    if (k < 0 || k > impl_->order())
        throw InvalidInput("derivative order " + std::to_string(k) + " outside [0, " + std::to_string(impl_->order()) +
                           "] for " + impl_->describe());
    if (!(x > impl_->lower() && x < impl_->upper())) return 0.0;
    return impl_->derivative(k, x);
}

double TestFunction::radius() const { return std::max({std::abs(lower()), std::abs(upper()), 1.0}); }

TestFunction TestFunction::zero(int order) { return TestFunction(std::make_shared<ZeroImpl>(order)); }

TestFunction TestFunction::bump(double r, double center, double scale, int order, std::vector<double> poly) {
    if (!(r > 0.0) || !std::isfinite(r)) throw InvalidInput("bump: r must be positive");
    if (order < 0 || order > 24) throw InvalidInput("bump: order must lie in [0, 24]");
    if (poly.empty()) poly = {0.0};
    return TestFunction(std::make_shared<BumpImpl>(r, center, scale, order, std::move(poly)));
}

TestFunction TestFunction::smooth_step(double energy, double eps, int order, double lower, double lower_width) {
    if (order < 0 || order > 24) throw InvalidInput("smoothstep: order must lie in [0, 24]");
    return TestFunction(std::make_shared<SmoothStepImpl>(energy, eps, order, lower, lower_width));
}

TestFunction TestFunction::scaled(double factor) const {
    return TestFunction(std::make_shared<CombinationImpl>(factor, *this, 0.0, *this));
}

TestFunction TestFunction::shifted(double offset) const {
    return TestFunction(std::make_shared<ShiftImpl>(*this, offset));
}

TestFunction TestFunction::combination(double a, const TestFunction& f, double b, const TestFunction& g) {
    return TestFunction(std::make_shared<CombinationImpl>(a, f, b, g));
}

double sup_derivative(const TestFunction& f, int k) {
    check_order(f, k);
    const double a = f.lower(), b = f.upper();
    constexpr int kGrid = 4096;
    const double h = (b - a) / kGrid;
    std::vector<double> v(kGrid + 1);
    for (int i = 0; i <= kGrid; ++i) v[i] = std::abs(f.eval(k, a + i * h));

    // refine around every grid local maximum within a factor 2 of the best
    const double top = *std::max_element(v.begin(), v.end());
    if (top == 0.0) return 0.0;
    double best = top;
    for (int i = 0; i <= kGrid; ++i) {
        const bool peak = (i == 0 || v[i] >= v[i - 1]) && (i == kGrid || v[i] >= v[i + 1]);
        if (!peak || v[i] < 0.5 * top) continue;
        double x = a + i * h, fx = v[i], step = h;
        // pattern search; the step shrinks until the maximizer is pinned to ~1e-13 of the support
        while (step > 1e-13 * (b - a)) {
            for (double cand : {x - step / 3.0, x + step / 3.0}) {
                if (cand < a || cand > b) continue;
                const double fc = std::abs(f.eval(k, cand));
                if (fc > fx) fx = fc, x = cand;
            }
            step /= 1.5;
        }
        best = std::max(best, fx);
    }
    return best;
}

double c_norm(const TestFunction& f, int beta) {
    check_order(f, beta);
    double s = 0.0;
    for (int k = 0; k <= beta; ++k) s += sup_derivative(f, k);
    return s;
}

double weighted_norm(const TestFunction& f, int beta) {
    check_order(f, beta);
    double coarse = simpson(f, beta, 1 << 13);
    for (int p = 14; p <= 20; ++p) {
        const double fine = simpson(f, beta, 1 << p);
        if (std::abs(fine - coarse) <= 1e-8 * std::abs(fine) || fine == 0.0) return fine;
        coarse = fine;
    }
    throw NumericalFailure("weighted_norm: Simpson quadrature did not reach 1e-8 relative agreement for " +
                           f.describe());
}

double lipschitz_seminorm(const TestFunction& f) { return sup_derivative(f, 1); }

double lipschitz_norm(const TestFunction& f) { return sup_derivative(f, 0) + sup_derivative(f, 1); }

}  // namespace dosmlab
