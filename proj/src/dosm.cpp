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

#include "dosmlab/dosm.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <functional>
#include <sstream>

#include "dosmlab/error.hpp"
#include "dosmlab/parallel.hpp"

namespace dosmlab {

namespace {

// Independent-stream variant: truncated operator uses this child of the sample stream.
constexpr std::uint64_t kIndependentChild = 1;

void check_mc(const MonteCarlo& mc) {
    if (mc.samples < 2) throw InvalidInput("Monte Carlo needs at least 2 samples");
    if (mc.threads < 1) throw InvalidInput("thread count must be >= 1");
}

// Per-sample trace evaluator shared by the estimators.
class TraceEngine {
public:
    TraceEngine(const Lattice& lattice, const TestFunction& f, Method method, const QuadratureSpec& quad)
        : lattice_(lattice), f_(f), method_(method), solver_(quad.solver) {
        if (method == Method::hs) rule_ = hs_rule(f, quad.degree_for(lattice.dim()), quad);
    }

    // (1/N) Tr(P0 f(H) P0)
    double operator()(const Disorder& omega) const {
        const auto h = build(lattice_, omega);
        const double n = static_cast<double>(lattice_.rank());
        if (method_ == Method::eig) return eig_trace(h, f_, lattice_.origin_block()) / n;
        return hs_trace(h, rule_, lattice_.origin_block(), solver_, 1).value / n;
    }

    double hs_error() const { return method_ == Method::hs ? rule_.strip_bound : 0.0; }

private:
    const Lattice& lattice_;
    const TestFunction& f_;
    Method method_;
    Solver solver_;
    HsRule rule_;
};

std::vector<double> run_samples(const MonteCarlo& mc, bool deterministic,
                                const std::function<double(std::size_t)>& one) {
    if (deterministic) return std::vector<double>(mc.samples, one(0));
    std::vector<double> out(mc.samples);
    parallel_for(mc.samples, mc.threads, [&](std::size_t i) { out[i] = one(i); });
    return out;
}

DosmEstimate make_estimate(const std::vector<double>& xs, Method method, const Lattice& lattice, const Measure& nu,
                           const std::string& function) {
    const auto s = summarize(xs);
    DosmEstimate e;
    e.value = s.mean;
    e.stderr_ = s.stderr_;
    e.samples = xs.size();
    e.method = method;
    e.box = describe(lattice.box());
    e.measure = describe(nu);
    e.function = function;
    return e;
}

double ids_of(const SpectralWeights& sw, std::pair<double, double> window, double n, double energy) {
    if (energy < window.first) return 0.0;
    if (energy >= window.second) return 1.0;
    double s = 0.0;
    for (Eigen::Index k = 0; k < sw.values.size(); ++k)
        if (sw.values(k) <= energy) s += sw.weights(k);
    return std::min(1.0, s / n);
}

}  // namespace

Method parse_method(const std::string& s) {
    if (s == "eig") return Method::eig;
    if (s == "hs") return Method::hs;
    throw InvalidInput("unknown method '" + s + "' (expected eig or hs)");
}

std::string to_string(Method m) { return m == Method::eig ? "eig" : "hs"; }

Stats summarize(const std::vector<double>& xs) {
    Stats s;
    if (xs.empty()) return s;
    const bool constant = std::all_of(xs.begin(), xs.end(), [&](double v) {
        return std::memcmp(&v, &xs.front(), sizeof(double)) == 0;
    });
    if (constant) {
        s.mean = xs.front();
        return s;
    }
    double sum = 0.0;
    for (double v : xs) sum += v;
    s.mean = sum / static_cast<double>(xs.size());
    double ss = 0.0;
    for (double v : xs) ss += (v - s.mean) * (v - s.mean);
    const double n = static_cast<double>(xs.size());
    s.stderr_ = n > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
    return s;
}

std::string describe(const BoxSpec& box) {
    std::ostringstream os;
    os << "d=" << box.d << ",half_side=" << box.half_side << ",K=" << box.K << "," << to_string(box.boundary);
    if (box.laplacian == Laplacian::graph) os << ",graph";
    return os.str();
}

std::string describe(const Measure& nu) {
    std::ostringstream os;
    os.precision(12);
    if (nu.size() <= 4) {
        os << "atoms{";
        for (std::size_t i = 0; i < nu.size(); ++i)
            os << (i ? "," : "") << "(" << nu.atoms()[i].location << "," << nu.atoms()[i].weight << ")";
        os << "}";
    } else {
        os << "atoms[" << nu.size() << "] in [" << nu.min_location() << "," << nu.max_location() << "]";
    }
    return os.str();
}

DosmEstimate dosm_estimate(const Measure& nu, const Lattice& lattice, const TestFunction& f, const MonteCarlo& mc,
                           Method method, const QuadratureSpec& quad) {
    check_mc(mc);
    const TraceEngine trace(lattice, f, method, quad);
    const auto xs = run_samples(mc, nu.is_deterministic(), [&](std::size_t i) {
        Stream s = Stream::substream(mc.seed, i);
        return trace(sample_disorder(nu, lattice, s));
    });
    auto e = make_estimate(xs, method, lattice, nu, f.describe());
    e.hs_error = trace.hs_error();
    return e;
}

std::vector<DosmEstimate> ids_curve(const Measure& nu, const Lattice& lattice, const std::vector<double>& energies,
                                    const MonteCarlo& mc) {
    check_mc(mc);
    const double n = static_cast<double>(lattice.rank());
    std::vector<std::vector<double>> per_sample(mc.samples);
    auto one = [&](std::size_t i) {
        Stream s = Stream::substream(mc.seed, i);
        const auto h = build(lattice, sample_disorder(nu, lattice, s));
        const auto sw = spectral_weights(h, lattice.origin_block());
        std::vector<double> v;
        for (double e : energies) v.push_back(ids_of(sw, h.gershgorin(), n, e));
        return v;
    };
    if (nu.is_deterministic()) {
        const auto v = one(0);
        std::fill(per_sample.begin(), per_sample.end(), v);
    } else {
        parallel_for(mc.samples, mc.threads, [&](std::size_t i) { per_sample[i] = one(i); });
    }
    std::vector<DosmEstimate> out;
    for (std::size_t k = 0; k < energies.size(); ++k) {
        std::vector<double> xs(mc.samples);
        for (std::size_t i = 0; i < mc.samples; ++i) xs[i] = per_sample[i][k];
        std::ostringstream label;
        label.precision(12);
        label << "ids(E=" << energies[k] << ")";
        out.push_back(make_estimate(xs, Method::eig, lattice, nu, label.str()));
    }
    return out;
}

DosmEstimate ids_estimate(const Measure& nu, const Lattice& lattice, double energy, const MonteCarlo& mc) {
    return ids_curve(nu, lattice, {energy}, mc).front();
}

TestFunction ids_step(const Lattice& lattice, const Measure& nu, double energy, double eps, int order) {
    const double d2 = 2.0 * lattice.dim();
    const double shift = lattice.box().laplacian == Laplacian::graph ? d2 : 0.0;
    const double bottom = -d2 + std::min(0.0, nu.min_location()) + shift;
    // rising edge entirely below the spectrum
    const double lower = std::min(bottom, energy - eps) - 2.0;
    return TestFunction::smooth_step(energy, eps, order, lower, 1.0);
}

DosmEstimate finite_range_dosm(const Measure& nu, const Lattice& lattice, const TestFunction& f, int L,
                               const MonteCarlo& mc, Method method, const QuadratureSpec& quad) {
    check_mc(mc);
    const int max_l = lattice.box().half_side / lattice.box().K;
    if (L < 0 || L > max_l)
        throw InvalidInput("finite range: L=" + std::to_string(L) + " outside [0, " + std::to_string(max_l) + "]");
    const TraceEngine trace(lattice, f, method, quad);
    const auto xs = run_samples(mc, nu.is_deterministic(), [&](std::size_t i) {
        Stream s = Stream::substream(mc.seed, i);
        return trace(truncate_disorder(lattice, sample_disorder(nu, lattice, s), L));
    });
    auto e = make_estimate(xs, method, lattice, nu, f.describe());
    e.hs_error = trace.hs_error();
    return e;
}

namespace {

RemainderSamples remainder_impl(const Measure& nu, const Lattice& lattice, const TestFunction& f,
                                const std::vector<int>& L, const MonteCarlo& mc, Method method,
                                const QuadratureSpec& quad, bool independent) {
    check_mc(mc);
    const int max_l = lattice.box().half_side / lattice.box().K;
    for (int l : L)
        if (l < 0 || l > max_l)
            throw InvalidInput("finite range: L=" + std::to_string(l) + " outside [0, " + std::to_string(max_l) + "]");
    const TraceEngine trace(lattice, f, method, quad);
    std::vector<std::vector<double>> per_sample(mc.samples);
    std::vector<double> full(mc.samples);
    auto one = [&](std::size_t i) {
        Stream s = Stream::substream(mc.seed, i);
        const auto omega = sample_disorder(nu, lattice, s);
        full[i] = trace(omega);
        Disorder other = omega;
        if (independent) {
            Stream t = Stream::substream(mc.seed, i).child(kIndependentChild);
            other = sample_disorder(nu, lattice, t);
        }
        std::vector<double> v;
        for (int l : L) v.push_back(full[i] - trace(truncate_disorder(lattice, other, l)));
        per_sample[i] = std::move(v);
    };
    parallel_for(mc.samples, mc.threads, one);
    RemainderSamples out;
    out.L = L;
    out.diffs.assign(L.size(), std::vector<double>(mc.samples));
    for (std::size_t k = 0; k < L.size(); ++k)
        for (std::size_t i = 0; i < mc.samples; ++i) out.diffs[k][i] = per_sample[i][k];
    out.full = summarize(full);
    return out;
}

}  // namespace

RemainderSamples crn_remainder(const Measure& nu, const Lattice& lattice, const TestFunction& f,
                               const std::vector<int>& L, const MonteCarlo& mc, Method method,
                               const QuadratureSpec& quad) {
    return remainder_impl(nu, lattice, f, L, mc, method, quad, false);
}

RemainderSamples independent_remainder(const Measure& nu, const Lattice& lattice, const TestFunction& f,
                                       const std::vector<int>& L, const MonteCarlo& mc) {
    return remainder_impl(nu, lattice, f, L, mc, Method::eig, {}, true);
}

double remainder_bound(const Measure& nu, int L, const TestFunction& f, int d, std::size_t N, double c1) {
    if (L < 1) throw InvalidInput("remainder bound: L must be >= 1");
    if (!(c1 > 0.0)) throw InvalidInput("remainder bound: c1 must be positive");
    if (N < 1) throw InvalidInput("remainder bound: N must be >= 1");
    if (f.order() < 3 + d)
        throw InvalidInput("remainder bound needs order " + std::to_string(3 + d) + " but " + f.describe() +
                           " has order " + std::to_string(f.order()));
    const double mu1 = moment(nu, 1);
    if (mu1 == 0.0) return 0.0;
    return c1 * mu1 / (static_cast<double>(N) * L) * weighted_norm(f, 3 + d);
}

}  // namespace dosmlab
