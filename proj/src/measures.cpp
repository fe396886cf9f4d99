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

#include "dosmlab/measures.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

#include "dosmlab/error.hpp"
#include "dosmlab/simplex.hpp"

namespace dosmlab {

namespace {

double param(const DistributionSpec& spec, const std::string& key, std::optional<double> fallback = std::nullopt) {
    auto it = spec.params.find(key);
    if (it != spec.params.end()) {
        if (!std::isfinite(it->second))
            throw InvalidInput("measure '" + spec.family + "': parameter '" + key + "' is not finite");
        return it->second;
    }
    if (fallback) return *fallback;
    throw InvalidInput("measure '" + spec.family + "': missing parameter '" + key + "'");
}

void check_params(const DistributionSpec& spec, std::initializer_list<const char*> allowed) {
    for (const auto& [key, value] : spec.params) {
        bool known = false;
        for (const char* a : allowed) known = known || key == a;
        if (!known) throw InvalidInput("measure '" + spec.family + "': unknown parameter '" + key + "'");
    }
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// Acklam's rational approximation followed by two Halley steps on erfc.
double normal_quantile(double p) {
    static constexpr std::array<double, 6> a{-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                             1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr std::array<double, 5> b{-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                             6.680131188771972e+01, -1.328068155288572e+01};
    static constexpr std::array<double, 6> c{-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                             -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr std::array<double, 4> d{7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                             3.754408661907416e+00};
    constexpr double plow = 0.02425;
    double x;
    if (p < plow) {
        const double q = std::sqrt(-2 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
    } else if (p <= 1 - plow) {
        const double q = p - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1);
    } else {
        const double q = std::sqrt(-2 * std::log1p(-p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
    }
    for (int it = 0; it < 2; ++it) {
        const double e = normal_cdf(x) - p;
        const double u = e * std::sqrt(2 * M_PI) * std::exp(x * x / 2);
        x -= u / (1 + x * u / 2);
    }
    return x;
}

Measure equal_weight(std::vector<double> locations) {
    const double w = 1.0 / static_cast<double>(locations.size());
    std::vector<Atom> atoms;
    atoms.reserve(locations.size());
    for (double x : locations) atoms.push_back({x, w});
    return Measure(std::move(atoms));
}

template <class Quantile>
Measure quantile_measure(int n, Quantile q) {
    std::vector<double> xs(static_cast<std::size_t>(n));
    for (int k = 1; k <= n; ++k) xs[static_cast<std::size_t>(k - 1)] = q((k - 0.5) / n);
    return equal_weight(std::move(xs));
}

}  // namespace

Measure::Measure(std::vector<Atom> atoms) {
    if (atoms.empty()) throw InvalidInput("measure needs at least one atom");
    double total = 0.0;
    for (const Atom& a : atoms) {
        if (!std::isfinite(a.location)) throw InvalidInput("measure atom location is not finite");
        if (!(a.weight > 0.0) || !std::isfinite(a.weight))
            throw InvalidInput("measure atom weights must be strictly positive");
        total += a.weight;
    }
    if (std::abs(total - 1.0) > 1e-12) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "measure weights sum to " << total << ", expected 1 within 1e-12";
        throw InvalidInput(msg.str());
    }
    std::stable_sort(atoms.begin(), atoms.end(), [](const Atom& a, const Atom& b) { return a.location < b.location; });
    for (const Atom& a : atoms) {
        if (!atoms_.empty() && atoms_.back().location == a.location)
            atoms_.back().weight += a.weight;
        else
            atoms_.push_back(a);
    }
    cumulative_.resize(atoms_.size());
    double run = 0.0;
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
        run += atoms_[i].weight;
        cumulative_[i] = run;
    }
}

Measure Measure::dirac(double location) { return Measure({{location, 1.0}}); }

Measure Measure::affine(double factor, double shift) const {
    std::vector<Atom> out;
    out.reserve(atoms_.size());
    for (const Atom& a : atoms_) out.push_back({factor * a.location + shift, a.weight});
    return Measure(std::move(out));
}

std::size_t Measure::atom_for(double u) const {
    const double target = u * cumulative_.back();
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), target);
    if (it == cumulative_.end()) return atoms_.size() - 1;
    return static_cast<std::size_t>(it - cumulative_.begin());
}

bool operator==(const Measure& a, const Measure& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a.atoms()[i].location != b.atoms()[i].location || a.atoms()[i].weight != b.atoms()[i].weight) return false;
    return true;
}

Measure quantize(const DistributionSpec& spec, int n_atoms) {
    if (n_atoms < 1) throw InvalidInput("quantize: n_atoms must be >= 1");
    const std::string& f = spec.family;
    if (f == "dirac") {
        check_params(spec, {"at"});
        return Measure::dirac(param(spec, "at", 0.0));
    }
    if (f == "bernoulli") {
        check_params(spec, {"p", "low", "high"});
        const double p = param(spec, "p", 0.5);
        const double low = param(spec, "low", 0.0);
        const double high = param(spec, "high", 1.0);
        if (!(p >= 0.0 && p <= 1.0)) throw InvalidInput("bernoulli: p must lie in [0, 1]");
        if (p == 0.0) return Measure::dirac(low);
        if (p == 1.0) return Measure::dirac(high);
        return Measure({{low, 1.0 - p}, {high, p}});
    }
    if (f == "atomic" || f == "finite-atomic") {
        if (!spec.params.empty()) throw InvalidInput("atomic measure takes no parameters");
        return Measure(spec.atoms);
    }
    if (f == "uniform") {
        check_params(spec, {"a", "b"});
        const double a = param(spec, "a");
        const double b = param(spec, "b");
        if (!(b > a)) throw InvalidInput("uniform: requires b > a");
        return quantile_measure(n_atoms, [&](double p) { return a + (b - a) * p; });
    }
    if (f == "gaussian") {
        check_params(spec, {"mean", "sd", "width"});
        const double m = param(spec, "mean", 0.0);
        const double s = param(spec, "sd");
        const double width = param(spec, "width", 5.0);
        if (!(s > 0.0)) throw InvalidInput("gaussian: requires sd > 0");
        if (!(width > 0.0)) throw InvalidInput("gaussian: requires width > 0");
        const double lo = normal_cdf(-width);
        const double hi = normal_cdf(width);
        return quantile_measure(n_atoms, [&](double p) { return m + s * normal_quantile(lo + p * (hi - lo)); });
    }
    if (f == "two-sided-exponential" || f == "laplace") {
        check_params(spec, {"rate", "center", "truncation_mass"});
        const double rate = param(spec, "rate");
        const double center = param(spec, "center", 0.0);
        const double mass = param(spec, "truncation_mass", 1.0 - 1e-10);
        if (!(rate > 0.0)) throw InvalidInput("two-sided-exponential: requires rate > 0");
        if (!(mass > 0.0 && mass < 1.0)) throw InvalidInput("two-sided-exponential: truncation_mass must lie in (0, 1)");
        const double tail = 1.0 - mass;
        return quantile_measure(n_atoms, [&](double p) {
            const double q = tail / 2 + p * mass;
            return center + (q < 0.5 ? std::log(2 * q) / rate : -std::log(2 * (1 - q)) / rate);
        });
    }
    throw InvalidInput("unknown measure family '" + f + "'");
}

double moment(const Measure& nu, int l) {
    if (l < 1) throw InvalidInput("moment: order must be >= 1");
    double s = 0.0;
    for (const Atom& a : nu.atoms()) s += a.weight * std::pow(std::abs(a.location), l);
    return s;
}

bool MomentClass::contains(const Measure& nu) const {
    if (p < 1 || !(bound > 0.0)) throw InvalidInput("moment class needs p >= 1 and bound > 0");
    if (support_lower && nu.min_location() < *support_lower) return false;
    for (int l = 1; l <= p; ++l)
        if (moment(nu, l) > bound) return false;
    return true;
}

double sample_one(const Measure& nu, Stream& stream) { return nu.atoms()[nu.atom_for(stream.uniform())].location; }

std::vector<double> sample(const Measure& nu, Stream& stream, std::size_t count) {
    std::vector<double> out(count);
    for (auto& x : out) x = sample_one(nu, stream);
    return out;
}

namespace {

struct SignedGrid {
    std::vector<double> x;
    std::vector<double> c;  // nu1 - nu2 mass at x
};

SignedGrid signed_union(const Measure& nu1, const Measure& nu2, const std::vector<double>& extra = {}) {
    std::vector<double> xs = extra;
    for (const Atom& a : nu1.atoms()) xs.push_back(a.location);
    for (const Atom& a : nu2.atoms()) xs.push_back(a.location);
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    SignedGrid g{xs, std::vector<double>(xs.size(), 0.0)};
    auto index_of = [&](double x) {
        return static_cast<std::size_t>(std::lower_bound(g.x.begin(), g.x.end(), x) - g.x.begin());
    };
    for (const Atom& a : nu1.atoms()) g.c[index_of(a.location)] += a.weight;
    for (const Atom& a : nu2.atoms()) g.c[index_of(a.location)] -= a.weight;
    return g;
}

}  // namespace

double bl_distance(const Measure& nu1, const Measure& nu2) {
    const SignedGrid g = signed_union(nu1, nu2);
    const std::size_t n = g.x.size();
    if (n == 1) return 0.0;

    // Variables z_i = f(x_i) + u >= 0 (i < n) and u = ||f||_inf budget.
    //   z_i - 2u <= 0                          (|f(x_i)| <= u)
    //   +-(z_i - z_{i+1}) + d_i u <= d_i       (Lipschitz constant <= 1 - u on adjacent atoms)
    //   u <= 1
    // Objective sum_i c_i f(x_i) = sum_i c_i z_i - (sum_i c_i) u.
    const std::size_t cols = n + 1;
    const std::size_t u = n;
    const std::size_t rows = n + 2 * (n - 1) + 1;
    LinearProgram lp(rows, cols);
    std::size_t r = 0;
    for (std::size_t i = 0; i < n; ++i, ++r) {
        lp.at(r, i) = 1.0;
        lp.at(r, u) = -2.0;
    }
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double d = g.x[i + 1] - g.x[i];
        lp.at(r, i) = 1.0;
        lp.at(r, i + 1) = -1.0;
        lp.at(r, u) = d;
        lp.b[r++] = d;
        lp.at(r, i) = -1.0;
        lp.at(r, i + 1) = 1.0;
        lp.at(r, u) = d;
        lp.b[r++] = d;
    }
    lp.at(r, u) = 1.0;
    lp.b[r++] = 1.0;

    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        lp.c[i] = g.c[i];
        total += g.c[i];
    }
    lp.c[u] = -total;

    const LpSolution sol = solve_simplex(lp);
    if (!std::isfinite(sol.value)) throw LpFailure("bl_distance: non-finite optimum");
    return std::clamp(sol.value, 0.0, 2.0);
}

namespace {

// Maximizes sum_k a_k g_k over |g_k| <= budget, |g_{k+1} - g_k| <= slope * h_k
// by repeatedly shifting contiguous segments [p, q] to the edge of their
// feasible interval. Returns the objective at the final profile.
double segment_ascent(const std::vector<double>& a, const std::vector<double>& h, double budget, double slope,
                      std::vector<double>& g) {
    const std::size_t m = a.size();
    auto objective = [&] {
        double s = 0.0;
        for (std::size_t k = 0; k < m; ++k) s += a[k] * g[k];
        return s;
    };
    double value = objective();
    double scale = 0.0;
    for (double ak : a) scale += std::abs(ak);
    const double stop = 1e-15 * std::max(scale, 1e-300);
    for (int sweep = 0; sweep < 2000; ++sweep) {
        double gained = 0.0;
        for (std::size_t p = 0; p < m; ++p) {
            double coeff = 0.0;
            double room_up = std::numeric_limits<double>::infinity();
            double room_down = std::numeric_limits<double>::infinity();
            for (std::size_t q = p; q < m; ++q) {
                coeff += a[q];
                room_up = std::min(room_up, budget - g[q]);
                room_down = std::min(room_down, budget + g[q]);
                if (coeff == 0.0) continue;
                double step;
                if (coeff > 0.0) {
                    step = room_up;
                    if (p > 0) step = std::min(step, slope * h[p - 1] - (g[p] - g[p - 1]));
                    if (q + 1 < m) step = std::min(step, slope * h[q] - (g[q] - g[q + 1]));
                } else {
                    step = room_down;
                    if (p > 0) step = std::min(step, slope * h[p - 1] + (g[p] - g[p - 1]));
                    if (q + 1 < m) step = std::min(step, slope * h[q] + (g[q] - g[q + 1]));
                    step = -step;
                }
                if (std::abs(step) <= 0.0 || !(coeff * step > stop)) continue;
                for (std::size_t k = p; k <= q; ++k) g[k] += step;
                room_up -= step;
                room_down += step;
                gained += coeff * step;
            }
        }
        // Rounding can leave g a hair outside the box; pull it back.
        for (auto& gk : g) gk = std::clamp(gk, -budget, budget);
        const double now = objective();
        if (now - value <= stop && gained <= stop) {
            value = std::max(value, now);
            break;
        }
        value = now;
    }
    return value;
}

bool feasible(const std::vector<double>& g, const std::vector<double>& h, double budget, double slope) {
    for (std::size_t k = 0; k < g.size(); ++k)
        if (std::abs(g[k]) > budget * (1 + 1e-12) + 1e-15) return false;
    for (std::size_t k = 0; k + 1 < g.size(); ++k)
        if (std::abs(g[k + 1] - g[k]) > slope * h[k] * (1 + 1e-12) + 1e-15) return false;
    return true;
}

}  // namespace

double bl_distance_oracle(const Measure& nu1, const Measure& nu2, int grid_size) {
    if (grid_size < 2) throw InvalidInput("bl_distance_oracle: grid_size must be >= 2");
    const double lo = std::min(nu1.min_location(), nu2.min_location());
    const double hi = std::max(nu1.max_location(), nu2.max_location());
    std::vector<double> uniform;
    if (hi > lo)
        for (int k = 0; k < grid_size; ++k) uniform.push_back(lo + (hi - lo) * k / (grid_size - 1));
    const SignedGrid grid = signed_union(nu1, nu2, uniform);
    const std::size_t m = grid.x.size();
    if (m == 1) return 0.0;
    std::vector<double> h(m - 1);
    for (std::size_t k = 0; k + 1 < m; ++k) h[k] = grid.x[k + 1] - grid.x[k];

    // Starting shapes, normalized to sup norm 1 before scaling into the feasible set.
    std::vector<std::vector<double>> shapes;
    {
        const double span = hi - lo;
        std::vector<double> cum(m), ramp(m), tent(m), spread(m, 0.0);
        double run = 0.0;
        std::size_t peak = 0;
        for (std::size_t k = 0; k < m; ++k) {
            run += grid.c[k];
            cum[k] = run > 0 ? 1.0 : (run < 0 ? -1.0 : 0.0);
            ramp[k] = 2 * (grid.x[k] - lo) / span - 1;
            if (std::abs(grid.c[k]) > std::abs(grid.c[peak])) peak = k;
        }
        const double bandwidth = span / 8;
        for (std::size_t k = 0; k < m; ++k) {
            tent[k] = std::max(0.0, 1 - std::abs(grid.x[k] - grid.x[peak]) / (span / 2)) * (grid.c[peak] >= 0 ? 1 : -1);
            for (std::size_t i = 0; i < m; ++i) {
                if (grid.c[i] == 0.0) continue;
                spread[k] += (grid.c[i] > 0 ? 1 : -1) * std::max(0.0, 1 - std::abs(grid.x[k] - grid.x[i]) / bandwidth);
            }
        }
        double smax = 0.0;
        for (double v : spread) smax = std::max(smax, std::abs(v));
        if (smax > 0)
            for (auto& v : spread) v /= smax;
        auto negated = [](std::vector<double> v) {
            for (auto& x : v) x = -x;
            return v;
        };
        shapes = {std::vector<double>(m, 0.0), cum, negated(cum), ramp, negated(ramp), tent, spread, negated(spread)};
    }

    auto best_at = [&](double budget) {
        const double slope = 1.0 - budget;
        double best = 0.0;
        for (const auto& shape : shapes) {
            double lip = 0.0;
            for (std::size_t k = 0; k + 1 < m; ++k) lip = std::max(lip, std::abs(shape[k + 1] - shape[k]) / h[k]);
            double alpha = budget;
            if (lip > 0) alpha = std::min(alpha, slope / lip);
            std::vector<double> g(m);
            for (std::size_t k = 0; k < m; ++k) g[k] = alpha * shape[k];
            const double v = segment_ascent(grid.c, h, budget, slope, g);
            if (feasible(g, h, budget, slope)) best = std::max(best, v);
        }
        return best;
    };

    // The optimal value is concave in the budget, so golden-section search applies.
    const double phi = (std::sqrt(5.0) - 1) / 2;
    double a = 0.0, b = 1.0;
    double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
    double f1 = best_at(x1), f2 = best_at(x2);
    double best = std::max({f1, f2, best_at(0.0), best_at(1.0)});
    for (int it = 0; it < 48 && b - a > 1e-9; ++it) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = best_at(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = best_at(x1);
        }
        best = std::max({best, f1, f2});
    }
    return std::clamp(best, 0.0, 2.0);
}

void write_csv(const Measure& nu, std::ostream& os) {
    const auto old = os.precision(17);
    os << "location,weight\n";
    for (const Atom& a : nu.atoms()) os << a.location << ',' << a.weight << '\n';
    os.precision(old);
}

Measure read_csv(std::istream& is) {
    std::string line;
    std::vector<Atom> atoms;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        if (lineno == 1 && line.find_first_not_of("0123456789+-.eE, \t\r") != std::string::npos) continue;
        std::istringstream row(line);
        Atom a;
        char comma = 0;
        if (!(row >> a.location >> comma >> a.weight) || comma != ',')
            throw InvalidInput("measure CSV: malformed line " + std::to_string(lineno));
        atoms.push_back(a);
    }
    return Measure(std::move(atoms));
}

}  // namespace dosmlab
