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

#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "dosmlab/measures.hpp"
#include "dosmlab/rng.hpp"

namespace dosmlab {

enum class Boundary { dirichlet, periodic };

// hopping: -Delta is minus the adjacency matrix, spectrum in [-2d, 2d].
// graph: adds 2d on the diagonal, spectrum in [0, 4d].
enum class Laplacian { hopping, graph };

Boundary parse_boundary(const std::string& s);
Laplacian parse_laplacian(const std::string& s);
std::string to_string(Boundary b);
std::string to_string(Laplacian l);

// The box is the union of the K-cubes anchored at j in K*Z^d with
// ||j||_inf <= half_side, i.e. sites [-R, R+K-1]^d. K must divide R.
struct BoxSpec {
    int d = 1;
    int half_side = 1;
    Boundary boundary = Boundary::periodic;
    int K = 1;
    Laplacian laplacian = Laplacian::hopping;
    std::size_t site_cap = 20000;
};

// Site and block bookkeeping for a validated BoxSpec. Sites and blocks are
// both numbered lexicographically with the first axis most significant.
class Lattice {
public:
    explicit Lattice(const BoxSpec& box);

    const BoxSpec& box() const { return box_; }
    int dim() const { return box_.d; }
    int side() const { return side_; }
    int blocks_per_axis() const { return blocks_per_axis_; }
    std::size_t sites() const { return sites_; }
    std::size_t blocks() const { return blocks_; }
    // N = K^d, the common rank of the projections.
    std::size_t rank() const { return rank_; }

    std::vector<int> site_coords(std::size_t site) const;
    std::size_t site_index(const std::vector<int>& coords) const;
    std::size_t block_of_site(std::size_t site) const;

    // Block coordinates j/K, each in [-R/K, R/K].
    std::vector<int> block_coords(std::size_t block) const;
    std::size_t block_index(const std::vector<int>& coords) const;
    std::size_t origin_block() const;
    // ||j||_inf / K
    int block_radius(std::size_t block) const;

    // Sites of a block, offsets in [0, K)^d in lexicographic order, so that
    // the a-th site of every block is the same translate.
    std::vector<std::size_t> block_sites(std::size_t block) const;

private:
    BoxSpec box_;
    int side_ = 0;
    int blocks_per_axis_ = 0;
    std::size_t sites_ = 0;
    std::size_t blocks_ = 0;
    std::size_t rank_ = 1;
};

// One potential value per block, indexed by block ordinal.
using Disorder = std::vector<double>;

class LatticeOperator {
public:
    using Sparse = Eigen::SparseMatrix<double>;

    LatticeOperator(Lattice lattice, Disorder omega);

    const Lattice& lattice() const { return lattice_; }
    const Disorder& disorder() const { return omega_; }
    const Sparse& matrix() const { return matrix_; }
    Eigen::MatrixXd dense() const { return Eigen::MatrixXd(matrix_); }
    std::size_t size() const { return lattice_.sites(); }

    // [-2d + min omega, 2d + max omega], shifted by 2d for the graph Laplacian.
    std::pair<double, double> gershgorin() const;

    // Coordinate list "row,col,value", one line per stored entry, row-major order.
    void write_coo_csv(std::ostream& os) const;

private:
    Lattice lattice_;
    Disorder omega_;
    Sparse matrix_;
};

LatticeOperator build(const Lattice& lattice, const Disorder& omega);

// One iid draw per block in block order.
Disorder sample_disorder(const Measure& nu, const Lattice& lattice, Stream& stream);

// Zeroes omega_j for ||j||_inf > K*L.
Disorder truncate_disorder(const Lattice& lattice, const Disorder& omega, int L);

}  // namespace dosmlab
