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

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "dosmlab/runner.hpp"

namespace py = pybind11;
using namespace dosmlab;

namespace {

py::dict estimate_dict(const DosmEstimate& e) {
    py::dict d;
    d["value"] = e.value;
    d["stderr"] = e.stderr_;
    d["samples"] = e.samples;
    d["method"] = to_string(e.method);
    d["hs_error"] = e.hs_error;
    return d;
}

MonteCarlo monte_carlo(std::size_t samples, std::uint64_t seed, int threads) {
    MonteCarlo mc;
    mc.samples = samples;
    mc.seed = seed;
    mc.threads = threads;
    return mc;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Density-of-states measures of lattice Schrodinger operators";

    static py::exception<InvalidInput> invalid(m, "InvalidInput", PyExc_ValueError);
    static py::exception<MisalignedBox> misaligned(m, "MisalignedBox", invalid.ptr());
    static py::exception<NumericalFailure> numerical(m, "NumericalFailure", PyExc_RuntimeError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const MisalignedBox& e) {
            py::set_error(misaligned, e.what());
        } catch (const InvalidInput& e) {
            py::set_error(invalid, e.what());
        } catch (const NumericalFailure& e) {
            py::set_error(numerical, e.what());
        } catch (const Error& e) {
            py::set_error(PyExc_RuntimeError, e.what());
        }
    });

    py::class_<Measure>(m, "Measure")
        .def(py::init([](const std::vector<std::pair<double, double>>& atoms) {
                 std::vector<Atom> a;
                 for (const auto& [loc, w] : atoms) a.push_back({loc, w});
                 return Measure(a);
             }),
             py::arg("atoms"))
        .def_static("dirac", &Measure::dirac, py::arg("location") = 0.0)
        .def("atoms",
             [](const Measure& nu) {
                 std::vector<std::pair<double, double>> out;
                 for (const auto& a : nu.atoms()) out.emplace_back(a.location, a.weight);
                 return out;
             })
        .def("affine", &Measure::affine, py::arg("factor"), py::arg("shift") = 0.0)
        .def_property_readonly("size", &Measure::size)
        .def_property_readonly("min_location", &Measure::min_location)
        .def_property_readonly("max_location", &Measure::max_location)
        .def("__repr__", [](const Measure& nu) { return "Measure(" + describe(nu) + ")"; });

    m.def(
        "quantize",
        [](const std::string& family, const std::map<std::string, double>& params,
           const std::vector<std::pair<double, double>>& atoms, int n_atoms) {
            DistributionSpec spec{family, params, {}};
            for (const auto& [loc, w] : atoms) spec.atoms.push_back({loc, w});
            return quantize(spec, n_atoms);
        },
        py::arg("family"), py::arg("params") = std::map<std::string, double>{},
        py::arg("atoms") = std::vector<std::pair<double, double>>{}, py::arg("n_atoms") = 64);
    m.def("bl_distance", &bl_distance);
    m.def("bl_distance_oracle", &bl_distance_oracle, py::arg("first"), py::arg("second"), py::arg("grid_size") = 400);
    m.def("moment", &moment);

    py::class_<TestFunction>(m, "TestFunction")
        .def_static("bump", &TestFunction::bump, py::arg("r"), py::arg("center") = 0.0, py::arg("scale") = 1.0,
                    py::arg("order") = 6, py::arg("poly") = std::vector<double>{1.0})
        .def_static("smooth_step", &TestFunction::smooth_step, py::arg("energy"), py::arg("eps"), py::arg("order"),
                    py::arg("lower"), py::arg("lower_width") = 1.0)
        .def_static("zero", &TestFunction::zero, py::arg("order") = 6)
        .def("__call__",
             [](const TestFunction& f, py::object x) {
                 return py::vectorize([&f](double t) { return f(t); })(x);
             })
        .def(
            "derivative",
            [](const TestFunction& f, int k, py::object x) {
                return py::vectorize([&f, k](double t) { return f.eval(k, t); })(x);
            },
            py::arg("k"), py::arg("x"))
        .def("shifted", &TestFunction::shifted)
        .def("scaled", &TestFunction::scaled)
        .def_property_readonly("order", &TestFunction::order)
        .def_property_readonly("lower", &TestFunction::lower)
        .def_property_readonly("upper", &TestFunction::upper)
        .def_property_readonly("radius", &TestFunction::radius)
        .def("__repr__", &TestFunction::describe);
    m.def("c_norm", &c_norm);
    m.def("sup_derivative", &sup_derivative);
    m.def("weighted_norm", &weighted_norm);
    m.def("lipschitz_seminorm", &lipschitz_seminorm);

    py::class_<BoxSpec>(m, "Box")
        .def(py::init([](int d, int half_side, int K, const std::string& boundary, const std::string& laplacian) {
                 BoxSpec b;
                 b.d = d;
                 b.half_side = half_side;
                 b.K = K;
                 b.boundary = parse_boundary(boundary);
                 b.laplacian = parse_laplacian(laplacian);
                 return b;
             }),
             py::arg("d"), py::arg("half_side"), py::arg("K") = 1, py::arg("boundary") = "periodic",
             py::arg("laplacian") = "hopping")
        .def_readonly("d", &BoxSpec::d)
        .def_readonly("half_side", &BoxSpec::half_side)
        .def_readonly("K", &BoxSpec::K)
        .def("__repr__", [](const BoxSpec& b) { return "Box(" + describe(b) + ")"; });

    py::class_<Lattice>(m, "Lattice")
        .def(py::init<const BoxSpec&>())
        .def_property_readonly("dim", &Lattice::dim)
        .def_property_readonly("side", &Lattice::side)
        .def_property_readonly("sites", &Lattice::sites)
        .def_property_readonly("blocks", &Lattice::blocks)
        .def_property_readonly("rank", &Lattice::rank)
        .def_property_readonly("origin_block", &Lattice::origin_block)
        .def("block_index", &Lattice::block_index)
        .def("block_coords", &Lattice::block_coords)
        .def("block_sites", &Lattice::block_sites)
        .def("site_coords", &Lattice::site_coords);

    py::class_<LatticeOperator>(m, "Operator")
        .def(py::init<Lattice, Disorder>(), py::arg("lattice"), py::arg("disorder"))
        .def("dense", &LatticeOperator::dense)
        .def_property_readonly("disorder", &LatticeOperator::disorder)
        .def("gershgorin", &LatticeOperator::gershgorin);
    m.def(
        "sample_disorder",
        [](const Measure& nu, const Lattice& lat, std::uint64_t seed, std::uint64_t index) {
            Stream s = Stream::substream(seed, index);
            return sample_disorder(nu, lat, s);
        },
        py::arg("measure"), py::arg("lattice"), py::arg("seed"), py::arg("index") = 0);
    m.def("truncate_disorder", &truncate_disorder);

    py::class_<QuadratureSpec>(m, "Quadrature")
        .def(py::init([](int nx, int ny, double y_min, int degree, double panel_ratio, double max_panel,
                         double partition_tol, const std::string& solver) {
                 QuadratureSpec q;
                 q.nx = nx;
                 q.ny = ny;
                 q.y_min = y_min;
                 q.degree = degree;
                 q.panel_ratio = panel_ratio;
                 q.max_panel = max_panel;
                 q.partition_tol = partition_tol;
                 q.solver = parse_solver(solver);
                 q.validate();
                 return q;
             }),
             py::arg("nx") = 8, py::arg("ny") = 8, py::arg("y_min") = 1e-2, py::arg("degree") = 0,
             py::arg("panel_ratio") = 4.0, py::arg("max_panel") = 1.0, py::arg("partition_tol") = 1e-12,
             py::arg("solver") = "lu");

    m.def("eig_trace", py::overload_cast<const LatticeOperator&, const TestFunction&, std::size_t>(&eig_trace),
          py::arg("operator"), py::arg("f"), py::arg("block"));
    m.def(
        "hs_trace",
        [](const LatticeOperator& h, const TestFunction& f, std::size_t block, const QuadratureSpec& q, int threads) {
            py::gil_scoped_release release;
            const auto r = hs_trace(h, f, block, q, threads);
            py::gil_scoped_acquire acquire;
            py::dict d;
            d["value"] = r.value;
            d["error_estimate"] = r.error_estimate;
            d["nodes"] = r.nodes;
            d["degree"] = r.degree;
            return d;
        },
        py::arg("operator"), py::arg("f"), py::arg("block"), py::arg("quadrature") = QuadratureSpec{},
        py::arg("threads") = 1);
    m.def(
        "dosm_estimate",
        [](const Measure& nu, const Lattice& lat, const TestFunction& f, std::size_t samples, std::uint64_t seed,
           int threads, const std::string& method, const QuadratureSpec& q) {
            DosmEstimate e;
            {
                py::gil_scoped_release release;
                e = dosm_estimate(nu, lat, f, monte_carlo(samples, seed, threads), parse_method(method), q);
            }
            return estimate_dict(e);
        },
        py::arg("measure"), py::arg("lattice"), py::arg("f"), py::arg("samples") = 100, py::arg("seed") = 1,
        py::arg("threads") = 1, py::arg("method") = "eig", py::arg("quadrature") = QuadratureSpec{});
    m.def(
        "ids_curve",
        [](const Measure& nu, const Lattice& lat, const std::vector<double>& energies, std::size_t samples,
           std::uint64_t seed, int threads) {
            std::vector<DosmEstimate> c;
            {
                py::gil_scoped_release release;
                c = ids_curve(nu, lat, energies, monte_carlo(samples, seed, threads));
            }
            py::list out;
            for (const auto& e : c) out.append(estimate_dict(e));
            return out;
        },
        py::arg("measure"), py::arg("lattice"), py::arg("energies"), py::arg("samples") = 100, py::arg("seed") = 1,
        py::arg("threads") = 1);

    m.def("experiments", [] {
        py::list out;
        for (const auto& e : experiment_registry()) {
            py::dict d;
            d["name"] = e.name;
            d["description"] = e.description;
            d["required"] = e.required;
            d["minimal_config"] = e.minimal_config;
            out.append(d);
        }
        return out;
    });
    m.def(
        "run_config_json",
        [](const std::string& config, std::optional<std::uint64_t> seed, std::optional<int> threads,
           std::optional<std::string> out_dir, bool write_files) {
            RunOptions opt{seed, threads, out_dir};
            const auto cfg = Json::parse(config);
            RunResult r;
            {
                py::gil_scoped_release release;
                r = run_config(cfg, opt, write_files);
            }
            return std::make_tuple(r.document.dump(), r.json_path, r.csv_path);
        },
        py::arg("config"), py::arg("seed") = py::none(), py::arg("threads") = py::none(),
        py::arg("out_dir") = py::none(), py::arg("write_files") = false);
}
