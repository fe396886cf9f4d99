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

#include "dosmlab/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include <Eigen/Dense>

#include "dosmlab/error.hpp"

namespace dosmlab {

Boundary parse_boundary(const std::string& s) {
    if (s == "periodic") return Boundary::periodic;
    if (s == "dirichlet") return Boundary::dirichlet;
    throw InvalidInput("unknown boundary '" + s + "' (expected periodic or dirichlet)");
}

Laplacian parse_laplacian(const std::string& s) {
    if (s == "hopping") return Laplacian::hopping;
    if (s == "graph") return Laplacian::graph;
    throw InvalidInput("unknown laplacian '" + s + "' (expected hopping or graph)");
}

std::string to_string(Boundary b) { return b == Boundary::periodic ? "periodic" : "dirichlet"; }
std::string to_string(Laplacian l) { return l == Laplacian::graph ? "graph" : "hopping"; }

Lattice::Lattice(const BoxSpec& box) : box_(box) {
    if (box.d < 1) throw InvalidInput("box: d must be >= 1");
    if (box.half_side < 0) throw InvalidInput("box: half_side must be >= 0");
    if (box.K < 1) throw InvalidInput("box: K must be >= 1");
    if (box.half_side % box.K != 0)
        throw MisalignedBox("box: blocks of side K=" + std::to_string(box.K) + " do not tile the box with half_side=" +
                            std::to_string(box.half_side) + " (K must divide half_side)");
    side_ = 2 * box.half_side + box.K;
    blocks_per_axis_ = 2 * box.half_side / box.K + 1;
    if (box.boundary == Boundary::periodic && side_ < 3)
        throw InvalidInput("box: periodic boundary needs at least 3 sites per axis (side is " + std::to_string(side_) +
                           ")");
    double sites = 1.0, blocks = 1.0, rank = 1.0;
    for (int a = 0; a < box.d; ++a) {
        sites *= side_;
        blocks *= blocks_per_axis_;
        rank *= box.K;
    }
    if (sites > static_cast<double>(box.site_cap))
        throw InvalidInput("box: " + std::to_string(static_cast<long long>(sites)) + " sites exceed the cap of " +
                           std::to_string(box.site_cap));
    sites_ = static_cast<std::size_t>(sites);
    blocks_ = static_cast<std::size_t>(blocks);
    rank_ = static_cast<std::size_t>(rank);
}

std::vector<int> Lattice::site_coords(std::size_t site) const {
    std::vector<int> c(box_.d);
    for (int a = box_.d - 1; a >= 0; --a) {
        c[a] = static_cast<int>(site % side_) - box_.half_side;
        site /= side_;
    }
    return c;
}

std::size_t Lattice::site_index(const std::vector<int>& coords) const {
    std::size_t idx = 0;
    for (int a = 0; a < box_.d; ++a) {
        const int c = coords[a] + box_.half_side;
        if (c < 0 || c >= side_) throw InvalidInput("site outside the box");
        idx = idx * side_ + c;
    }
    return idx;
}

std::size_t Lattice::block_of_site(std::size_t site) const {
    std::size_t idx = 0;
    std::vector<int> c(box_.d);
    for (int a = box_.d - 1; a >= 0; --a) {
        c[a] = static_cast<int>(site % side_);
        site /= side_;
    }
    for (int a = 0; a < box_.d; ++a) idx = idx * blocks_per_axis_ + c[a] / box_.K;
    return idx;
}

std::vector<int> Lattice::block_coords(std::size_t block) const {
    std::vector<int> c(box_.d);
    const int offset = box_.half_side / box_.K;
    for (int a = box_.d - 1; a >= 0; --a) {
        c[a] = static_cast<int>(block % blocks_per_axis_) - offset;
        block /= blocks_per_axis_;
    }
    return c;
}

std::size_t Lattice::block_index(const std::vector<int>& coords) const {
    std::size_t idx = 0;
    const int offset = box_.half_side / box_.K;
    for (int a = 0; a < box_.d; ++a) {
        const int c = coords[a] + offset;
        if (c < 0 || c >= blocks_per_axis_) throw InvalidInput("block outside the box");
        idx = idx * blocks_per_axis_ + c;
    }
    return idx;
}

std::size_t Lattice::origin_block() const { return block_index(std::vector<int>(box_.d, 0)); }

int Lattice::block_radius(std::size_t block) const {
    int r = 0;
    for (int c : block_coords(block)) r = std::max(r, std::abs(c));
    return r;
}

std::vector<std::size_t> Lattice::block_sites(std::size_t block) const {
    const auto b = block_coords(block);
    std::vector<int> base(box_.d);
    for (int a = 0; a < box_.d; ++a) base[a] = (b[a] + box_.half_side / box_.K) * box_.K;
    std::vector<std::size_t> out;
    out.reserve(rank_);
    for (std::size_t m = 0; m < rank_; ++m) {
        std::size_t rest = m, idx = 0;
        std::vector<int> off(box_.d);
        for (int a = box_.d - 1; a >= 0; --a) {
            off[a] = static_cast<int>(rest % box_.K);
            rest /= box_.K;
        }
        for (int a = 0; a < box_.d; ++a) idx = idx * side_ + base[a] + off[a];
        out.push_back(idx);
    }
    return out;
}

LatticeOperator::LatticeOperator(Lattice lattice, Disorder omega)
    : lattice_(std::move(lattice)), omega_(std::move(omega)) {
    if (omega_.size() != lattice_.blocks())
        throw InvalidInput("disorder has " + std::to_string(omega_.size()) + " values but the box has " +
                           std::to_string(lattice_.blocks()) + " blocks");
    for (double w : omega_)
        if (!std::isfinite(w)) throw InvalidInput("disorder values must be finite");

    const int d = lattice_.dim();
    const int side = lattice_.side();
    const bool periodic = lattice_.box().boundary == Boundary::periodic;
    const double diag_shift = lattice_.box().laplacian == Laplacian::graph ? 2.0 * d : 0.0;
    const std::size_t n = lattice_.sites();

    std::vector<Eigen::Triplet<double>> entries;
    entries.reserve(n * (2 * d + 1));
    std::vector<std::size_t> stride(d, 1);
    for (int a = d - 2; a >= 0; --a) stride[a] = stride[a + 1] * side;
    for (std::size_t s = 0; s < n; ++s) {
        entries.emplace_back(s, s, omega_[lattice_.block_of_site(s)] + diag_shift);
        for (int a = 0; a < d; ++a) {
            const int c = static_cast<int>((s / stride[a]) % side);
            std::size_t m;
            if (c + 1 < side)
                m = s + stride[a];
            else if (periodic)
                m = s - static_cast<std::size_t>(side - 1) * stride[a];
            else
                continue;
            entries.emplace_back(s, m, -1.0);
            entries.emplace_back(m, s, -1.0);
        }
    }
    matrix_.resize(n, n);
    matrix_.setFromTriplets(entries.begin(), entries.end());
    matrix_.makeCompressed();
}

std::pair<double, double> LatticeOperator::gershgorin() const {
    const double d2 = 2.0 * lattice_.dim();
    const double shift = lattice_.box().laplacian == Laplacian::graph ? d2 : 0.0;
    const auto [lo, hi] = std::minmax_element(omega_.begin(), omega_.end());
    return {-d2 + *lo + shift, d2 + *hi + shift};
}

void LatticeOperator::write_coo_csv(std::ostream& os) const {
    Eigen::SparseMatrix<double, Eigen::RowMajor> rows(matrix_);
    os << "row,col,value\n";
    std::ostringstream line;
    line.precision(17);
    for (int r = 0; r < rows.outerSize(); ++r)
        for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(rows, r); it; ++it)
            line << it.row() << ',' << it.col() << ',' << it.value() << '\n';
    os << line.str();
}

LatticeOperator build(const Lattice& lattice, const Disorder& omega) { return LatticeOperator(lattice, omega); }

Disorder sample_disorder(const Measure& nu, const Lattice& lattice, Stream& stream) {
    return sample(nu, stream, lattice.blocks());
}

Disorder truncate_disorder(const Lattice& lattice, const Disorder& omega, int L) {
    if (L < 0) throw InvalidInput("truncation radius L must be >= 0");
    if (omega.size() != lattice.blocks()) throw InvalidInput("disorder does not match the box");
    Disorder out(omega);
    for (std::size_t b = 0; b < out.size(); ++b)
        if (lattice.block_radius(b) > L) out[b] = 0.0;
    return out;
}

}  // namespace dosmlab
