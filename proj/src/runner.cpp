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

#include "dosmlab/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>

#include "dosmlab/error.hpp"

namespace dosmlab {

namespace {

// Strict view of one JSON object: every key read is recorded and done()
// rejects the rest.
class Node {
public:
    Node(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
    }

    bool has(const std::string& key) const { return j_.contains(key); }

    const Json& raw(const std::string& key) {
        seen_.insert(key);
        if (!j_.contains(key)) throw ConfigError(at(key) + ": required key missing");
        return j_.at(key);
    }

    template <class T>
    T req(const std::string& key) {
        return convert<T>(raw(key), at(key));
    }

    template <class T>
    T get(const std::string& key, T fallback) {
        seen_.insert(key);
        if (!j_.contains(key)) return fallback;
        return convert<T>(j_.at(key), at(key));
    }

    Node child(const std::string& key) { return Node(raw(key), at(key)); }

    std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    void done() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key())) throw ConfigError(at(it.key()) + ": unknown key");
    }

    template <class T>
    static T convert(const Json& v, const std::string& path) {
        if constexpr (std::is_same_v<T, double>) {
            if (!v.is_number()) throw ConfigError(path + ": expected a number");
            const double x = v.get<double>();
            if (!std::isfinite(x)) throw ConfigError(path + ": expected a finite number");
            return x;
        } else if constexpr (std::is_same_v<T, bool>) {
            if (!v.is_boolean()) throw ConfigError(path + ": expected true or false");
            return v.get<bool>();
        } else if constexpr (std::is_integral_v<T>) {
            if (!v.is_number_integer()) throw ConfigError(path + ": expected an integer");
            if (std::is_unsigned_v<T> && v.is_number_integer() && !v.is_number_unsigned() && v.get<long long>() < 0)
                throw ConfigError(path + ": expected a non-negative integer");
            return v.get<T>();
        } else if constexpr (std::is_same_v<T, std::string>) {
            if (!v.is_string()) throw ConfigError(path + ": expected a string");
            return v.get<std::string>();
        } else {
            static_assert(sizeof(T) == 0, "unsupported config type");
        }
    }

private:
    const Json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

template <class T>
std::vector<T> list(const Json& v, const std::string& path, bool nonempty = true) {
    if (!v.is_array()) throw ConfigError(path + ": expected an array");
    if (nonempty && v.empty()) throw ConfigError(path + ": must not be empty");
    std::vector<T> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(Node::convert<T>(v[i], path + "[" + std::to_string(i) + "]"));
    return out;
}

// Library precondition failures found while validating are reported at the key.
template <class F>
auto at_key(const std::string& path, F&& f) {
    try {
        return f();
    } catch (const ConfigError&) {
        throw;
    } catch (const InvalidInput& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

int positive(int v, const std::string& path) {
    if (v < 1) throw ConfigError(path + ": must be >= 1");
    return v;
}

std::vector<double> parse_lambda(const Json& v, const std::string& path) {
    if (v.is_array()) return list<double>(v, path);
    Node n(v, path);
    const double from = n.req<double>("from");
    const double to = n.req<double>("to");
    const int points = n.req<int>("points");
    n.done();
    if (points < 3) throw ConfigError(path + ".points: must be >= 3");
    if (!(to > from)) throw ConfigError(path + ": 'to' must exceed 'from'");
    std::vector<double> out(static_cast<std::size_t>(points));
    for (int k = 0; k < points; ++k) out[static_cast<std::size_t>(k)] = from + (to - from) * k / (points - 1);
    return out;
}

std::vector<MeasurePair> parse_pairs(const Json& v, const std::string& path) {
    if (!v.is_array() || v.empty()) throw ConfigError(path + ": expected a non-empty array");
    std::vector<MeasurePair> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const auto p = path + "[" + std::to_string(i) + "]";
        Node n(v[i], p);
        MeasurePair pair{parse_measure(n.raw("first"), p + ".first"), parse_measure(n.raw("second"), p + ".second")};
        n.done();
        out.push_back(std::move(pair));
    }
    return out;
}

// Default calibration rows: the two pairs farthest apart.
std::vector<std::size_t> default_pilot(const std::vector<MeasurePair>& pairs) {
    if (pairs.size() < 3) return {};
    std::vector<std::size_t> idx(pairs.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::vector<double> dw;
    for (const auto& p : pairs) dw.push_back(bl_distance(p.first, p.second));
    std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return dw[a] > dw[b]; });
    idx.resize(2);
    std::sort(idx.begin(), idx.end());
    return idx;
}

std::vector<std::size_t> parse_pilot(Node& n, const std::vector<MeasurePair>& pairs) {
    if (!n.has("pilot")) {
        n.get<int>("pilot", 0);
        return default_pilot(pairs);
    }
    const auto path = n.at("pilot");
    auto out = list<std::size_t>(n.raw("pilot"), path, false);
    for (auto p : out)
        if (p >= pairs.size()) throw ConfigError(path + ": index " + std::to_string(p) + " out of range");
    return out;
}

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y%m%dT%H%M%SZ", &tm);
    return buf;
}

const char* kDosm = R"({
  "experiment": "dosm",
  "box": {"d": 1, "half_side": 20},
  "measure": {"family": "bernoulli", "params": {"p": 0.5}},
  "function": {"family": "bump", "r": 2.0},
  "samples": 20
})";

const char* kIds = R"({
  "experiment": "ids",
  "box": {"d": 1, "half_side": 20},
  "measure": {"family": "bernoulli", "params": {"p": 0.5}},
  "energies": [-3.0, -1.0, 0.0, 1.0, 4.0],
  "samples": 20
})";

const char* kMetric = R"({
  "experiment": "metric",
  "first": {"family": "dirac"},
  "second": {"family": "bernoulli", "params": {"p": 0.25, "high": 0.5}},
  "grid_size": 200
})";

const char* kCt = R"({
  "experiment": "ct-decay",
  "box": {"d": 1, "half_side": 40},
  "measure": {"family": "bernoulli"},
  "z": [[0.0, 0.5], [0.0, 1.0], [0.0, 2.0]],
  "ray_length": 15
})";

const char* kLipschitz = R"({
  "experiment": "lipschitz",
  "box": {"d": 1, "half_side": 10},
  "measure": {"family": "bernoulli"},
  "function": {"family": "bump", "r": 2.0},
  "j0": [1],
  "lambda": {"from": -3.0, "to": 3.0, "points": 25}
})";

const char* kHolder = R"({
  "experiment": "holder-sweep",
  "box": {"d": 1, "half_side": 20},
  "function": {"family": "bump", "r": 2.0},
  "pairs": [
    {"first": {"family": "dirac"}, "second": {"family": "dirac", "params": {"at": 0.1}}},
    {"first": {"family": "dirac"}, "second": {"family": "dirac", "params": {"at": 0.05}}},
    {"first": {"family": "dirac"}, "second": {"family": "dirac", "params": {"at": 0.02}}},
    {"first": {"family": "dirac"}, "second": {"family": "dirac", "params": {"at": 0.01}}}
  ],
  "samples": 2
})";

const char* kIdsModulus = R"({
  "experiment": "ids-modulus",
  "box": {"d": 1, "half_side": 20},
  "energy": 0.5,
  "pairs": [
    {"first": {"family": "dirac"}, "second": {"family": "dirac", "params": {"at": 0.1}}},
    {"first": {"family": "dirac"}, "second": {"family": "dirac", "params": {"at": 0.05}}},
    {"first": {"family": "dirac"}, "second": {"family": "dirac", "params": {"at": 0.02}}},
    {"first": {"family": "dirac"}, "second": {"family": "dirac", "params": {"at": 0.01}}}
  ],
  "samples": 2
})";

const char* kFiniteRange = R"({
  "experiment": "finite-range",
  "box": {"d": 1, "half_side": 40},
  "measure": {"family": "bernoulli", "params": {"high": 0.05}},
  "function": {"family": "bump", "r": 1.5, "center": 1.0},
  "L": [1, 2, 4, 8],
  "scales": [1.0, 2.0],
  "samples": 200
})";

}  // namespace

Measure parse_measure(const Json& j, const std::string& path) {
    Node n(j, path);
    DistributionSpec spec;
    spec.family = n.req<std::string>("family");
    if (n.has("params")) {
        const auto& p = n.raw("params");
        if (!p.is_object()) throw ConfigError(n.at("params") + ": expected an object");
        for (auto it = p.begin(); it != p.end(); ++it)
            spec.params[it.key()] = Node::convert<double>(it.value(), n.at("params") + "." + it.key());
    }
    if (n.has("points")) {
        const auto& pts = n.raw("points");
        const auto pp = n.at("points");
        if (!pts.is_array()) throw ConfigError(pp + ": expected an array of [location, weight]");
        for (std::size_t i = 0; i < pts.size(); ++i) {
            const auto q = pp + "[" + std::to_string(i) + "]";
            const auto lw = list<double>(pts[i], q);
            if (lw.size() != 2) throw ConfigError(q + ": expected [location, weight]");
            spec.atoms.push_back({lw[0], lw[1]});
        }
    }
    const int atoms = n.get<int>("atoms", 64);
    n.done();
    return at_key(path, [&] { return quantize(spec, atoms); });
}

TestFunction parse_function(const Json& j, const std::string& path) {
    Node n(j, path);
    const auto family = n.req<std::string>("family");
    const int order = n.get<int>("order", 6);
    TestFunction f = at_key(path, [&]() -> TestFunction {
        if (family == "bump") {
            const double r = n.req<double>("r");
            const double center = n.get<double>("center", 0.0);
            const double scale = n.get<double>("scale", 1.0);
            std::vector<double> poly{1.0};
            if (n.has("poly")) poly = list<double>(n.raw("poly"), n.at("poly"));
            return TestFunction::bump(r, center, scale, order, poly);
        }
        if (family == "smoothstep") {
            const double e = n.req<double>("E");
            const double eps = n.req<double>("eps");
            const double lower = n.req<double>("lower");
            const double width = n.get<double>("lower_width", 1.0);
            return TestFunction::smooth_step(e, eps, order, lower, width);
        }
        if (family == "zero") return TestFunction::zero(order);
        throw ConfigError(n.at("family") + ": unknown function family '" + family + "'");
    });
    const double shift = n.get<double>("shift", 0.0);
    n.done();
    return shift != 0.0 ? f.shifted(shift) : f;
}

BoxSpec parse_box(const Json& j, const std::string& path) {
    Node n(j, path);
    BoxSpec b;
    b.d = n.req<int>("d");
    b.half_side = n.req<int>("half_side");
    b.K = n.get<int>("K", 1);
    b.boundary = at_key(n.at("boundary"), [&] { return parse_boundary(n.get<std::string>("boundary", "periodic")); });
    b.laplacian = at_key(n.at("laplacian"), [&] { return parse_laplacian(n.get<std::string>("laplacian", "hopping")); });
    b.site_cap = n.get<std::size_t>("site_cap", b.site_cap);
    n.done();
    return b;
}

QuadratureSpec parse_quadrature(const Json& j, const std::string& path) {
    Node n(j, path);
    QuadratureSpec q;
    q.nx = n.get<int>("nx", q.nx);
    q.ny = n.get<int>("ny", q.ny);
    q.y_min = n.get<double>("y_min", q.y_min);
    q.degree = n.get<int>("degree", q.degree);
    q.panel_ratio = n.get<double>("panel_ratio", q.panel_ratio);
    q.max_panel = n.get<double>("max_panel", q.max_panel);
    q.partition_tol = n.get<double>("partition_tol", q.partition_tol);
    q.solver = at_key(n.at("solver"), [&] { return parse_solver(n.get<std::string>("solver", "lu")); });
    n.done();
    at_key(path, [&] {
        q.validate();
        return 0;
    });
    return q;
}

const std::vector<ExperimentInfo>& experiment_registry() {
    static const std::vector<ExperimentInfo> reg{
        {"dosm", "Monte Carlo estimate of n(f) = E Tr(P0 f(H) P0) / N", {"box", "measure", "function"}, kDosm},
        {"ids", "integrated density of states N(E) over a list of energies", {"box", "measure", "energies"}, kIds},
        {"metric", "bounded-Lipschitz distance by LP, checked against the grid oracle", {"first", "second"}, kMetric},
        {"ct-decay", "decay of |Tr(P0 R(z) P_j)| along a lattice ray", {"box", "measure", "z", "ray_length"}, kCt},
        {"lipschitz", "single-site difference quotients against N * L_f",
         {"box", "measure", "function", "j0", "lambda"}, kLipschitz},
        {"holder-sweep", "|n_1(f) - n_2(f)| against a calibrated d_w^(1/(1+d)) bound",
         {"box", "function", "pairs"}, kHolder},
        {"ids-modulus", "|N_1(E) - N_2(E)| against a calibrated 1/log(1/d_w) bound",
         {"box", "energy", "pairs"}, kIdsModulus},
        {"finite-range", "CRN remainder of the range-L truncation against L",
         {"box", "measure", "function", "L"}, kFiniteRange},
    };
    return reg;
}

PreparedRun prepare_run(const Json& config, const RunOptions& options) {
    Node n(config, "");
    PreparedRun run;
    run.config = config;
    run.kind = n.req<std::string>("experiment");
    const auto& reg = experiment_registry();
    if (std::none_of(reg.begin(), reg.end(), [&](const auto& e) { return e.name == run.kind; }))
        throw ConfigError("experiment: unknown experiment '" + run.kind + "'");
    run.seed = n.get<std::uint64_t>("seed", 1);
    run.threads = positive(n.get<int>("threads", 1), "threads");
    run.out_dir = n.get<std::string>("output_dir", ".");
    if (options.seed) run.seed = *options.seed;
    if (options.threads) run.threads = positive(*options.threads, "--threads");
    if (options.out_dir) run.out_dir = *options.out_dir;

    auto lattice = [&] {
        const auto spec = parse_box(n.raw("box"), "box");
        return at_key("box", [&] { return Lattice(spec); });
    };
    auto monte_carlo = [&] {
        MonteCarlo mc;
        mc.samples = static_cast<std::size_t>(positive(n.get<int>("samples", 100), "samples"));
        mc.seed = run.seed;
        mc.threads = run.threads;
        return mc;
    };
    auto method = [&] { return at_key("method", [&] { return parse_method(n.get<std::string>("method", "eig")); }); };
    auto quad_or_default = [&] {
        return n.has("quadrature") ? parse_quadrature(n.raw("quadrature")) : parse_quadrature(Json::object());
    };

    const int threads = run.threads;
    const std::uint64_t seed = run.seed;
    const std::string& kind = run.kind;
    if (kind == "dosm") {
        auto lat = lattice();
        auto nu = parse_measure(n.raw("measure"));
        auto f = parse_function(n.raw("function"));
        auto mc = monte_carlo();
        auto m = method();
        auto q = quad_or_default();
        run.execute = [=] { return dosm_report(nu, lat, f, mc, m, q); };
    } else if (kind == "ids") {
        auto lat = lattice();
        auto nu = parse_measure(n.raw("measure"));
        auto e = list<double>(n.raw("energies"), "energies");
        auto mc = monte_carlo();
        run.execute = [=] { return ids_report(nu, lat, e, mc); };
    } else if (kind == "metric") {
        auto a = parse_measure(n.raw("first"), "first");
        auto b = parse_measure(n.raw("second"), "second");
        const int grid = positive(n.get<int>("grid_size", 400), "grid_size");
        const double tol = n.get<double>("tol", 1e-3);
        run.execute = [=] { return metric_report(a, b, grid, tol); };
    } else if (kind == "ct-decay") {
        auto lat = lattice();
        auto nu = parse_measure(n.raw("measure"));
        std::vector<cplx> zs;
        const auto& zj = n.raw("z");
        if (!zj.is_array() || zj.empty()) throw ConfigError("z: expected a non-empty array of [re, im]");
        for (std::size_t i = 0; i < zj.size(); ++i) {
            const auto p = "z[" + std::to_string(i) + "]";
            const auto ri = list<double>(zj[i], p);
            if (ri.size() != 2) throw ConfigError(p + ": expected [re, im]");
            if (ri[1] == 0.0) throw ConfigError(p + ": Im z must be nonzero");
            zs.emplace_back(ri[0], ri[1]);
        }
        const int length = n.req<int>("ray_length");
        const auto ray = at_key("ray_length", [&] { return lattice_ray(lat, length); });
        const double tol = n.get<double>("residual_tol", 0.1);
        const auto solver = at_key("solver", [&] { return parse_solver(n.get<std::string>("solver", "lu")); });
        run.execute = [=] {
            Stream s = Stream::substream(seed, 0);
            const auto h = build(lat, sample_disorder(nu, lat, s));
            auto rep = combes_thomas_scan(h, zs, ray, tol, solver, threads);
            rep.inputs["measure"] = describe(nu);
            return rep;
        };
    } else if (kind == "lipschitz") {
        auto lat = lattice();
        auto nu = parse_measure(n.raw("measure"));
        auto f = parse_function(n.raw("function"));
        const auto coords = list<int>(n.raw("j0"), "j0");
        if (static_cast<int>(coords.size()) != lat.dim())
            throw ConfigError("j0: expected " + std::to_string(lat.dim()) + " block coordinates");
        const auto j0 = at_key("j0", [&] { return lat.block_index(coords); });
        const auto lambda = parse_lambda(n.raw("lambda"), "lambda");
        const double tol = n.get<double>("tol", 1e-6);
        run.execute = [=] { return lipschitz_scan(nu, lat, j0, f, lambda, seed, tol, threads); };
    } else if (kind == "holder-sweep" || kind == "ids-modulus") {
        auto lat = lattice();
        auto pairs = parse_pairs(n.raw("pairs"), "pairs");
        const double rho1 = std::pow(2.0 / 3.0, 1 + lat.dim());
        for (std::size_t i = 0; i < pairs.size(); ++i) {
            const double dw = bl_distance(pairs[i].first, pairs[i].second);
            if (!(dw < rho1))
                throw ConfigError("pairs[" + std::to_string(i) + "]: d_w=" + std::to_string(dw) +
                                  " is outside the radius (2/3)^(1+d)=" + std::to_string(rho1));
        }
        SweepOptions opt;
        opt.mc = monte_carlo();
        opt.pilot = parse_pilot(n, pairs);
        if (kind == "holder-sweep") {
            auto f = parse_function(n.raw("function"));
            opt.method = method();
            opt.quad = quad_or_default();
            run.execute = [=] { return holder_sweep(pairs, lat, f, opt); };
        } else {
            const double e = n.req<double>("energy");
            run.execute = [=] { return ids_modulus_sweep(pairs, lat, e, opt); };
        }
    } else if (kind == "finite-range") {
        auto lat = lattice();
        auto nu = parse_measure(n.raw("measure"));
        auto f = parse_function(n.raw("function"));
        FiniteRangeOptions opt;
        opt.mc = monte_carlo();
        opt.method = method();
        opt.quad = quad_or_default();
        const auto L = list<int>(n.raw("L"), "L");
        const int max_l = lat.box().half_side / lat.box().K;
        for (std::size_t i = 0; i < L.size(); ++i)
            if (L[i] < 0 || L[i] > max_l)
                throw ConfigError("L[" + std::to_string(i) + "]: must lie in [0, half_side/K] = [0, " +
                                  std::to_string(max_l) + "]");
        if (n.has("scales")) opt.scales = list<double>(n.raw("scales"), "scales");
        else n.get<int>("scales", 0);
        opt.linearity_L = n.get<int>("linearity_L", 0);
        if (opt.linearity_L != 0 && std::find(L.begin(), L.end(), opt.linearity_L) == L.end())
            throw ConfigError("linearity_L: must be one of the L values");
        opt.slope_max = n.get<double>("slope_max", -0.9);
        run.execute = [=] { return finite_range_convergence(nu, lat, f, L, opt); };
    }
    n.done();
    return run;
}

Json report_document(const ExperimentReport& report, const Json& config, std::uint64_t seed,
                     const std::string& timestamp) {
    Json doc;
    doc["kind"] = report.kind;
    doc["seed"] = seed;
    doc["timestamp"] = timestamp;
    doc["config"] = config;
    const Json body = report.to_json();
    for (auto it = body.begin(); it != body.end(); ++it)
        if (it.key() != "kind") doc[it.key()] = it.value();
    return doc;
}

RunResult run_config(const Json& config, const RunOptions& options, bool write_files) {
    const auto run = prepare_run(config, options);
    RunResult out;
    try {
        out.report = run.execute();
    } catch (const Error& e) {
        throw Error("experiment '" + run.kind + "': " + e.what());
    }
    const auto stamp = utc_timestamp();
    out.document = report_document(out.report, run.config, run.seed, stamp);
    if (!write_files) return out;

    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(run.out_dir, ec);
    if (ec) throw Error("cannot create output directory '" + run.out_dir + "': " + ec.message());
    std::string stem = run.kind + "-" + std::to_string(run.seed) + "-" + stamp;
    fs::path base = fs::path(run.out_dir) / stem;
    for (int k = 1; fs::exists(base.string() + ".json"); ++k) base = fs::path(run.out_dir) / (stem + "-" + std::to_string(k));
    out.json_path = base.string() + ".json";
    out.csv_path = base.string() + ".csv";
    std::ofstream js(out.json_path);
    js << out.document.dump(2) << '\n';
    std::ofstream cs(out.csv_path);
    out.report.write_csv(cs);
    if (!js || !cs) throw Error("failed to write report files under '" + run.out_dir + "'");
    return out;
}

int exit_code(Verdict v) {
    switch (v) {
        case Verdict::fail: return 2;
        case Verdict::inconclusive: return 3;
        default: return 0;
    }
}

}  // namespace dosmlab
