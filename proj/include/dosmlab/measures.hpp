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
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dosmlab/rng.hpp"

namespace dosmlab {

struct Atom {
    double location = 0.0;
    double weight = 0.0;
};

// Finite atomic probability measure on the real line. Atoms are kept sorted
// by location with duplicates merged; weights are strictly positive and sum
// to one within 1e-12. Immutable after construction.
class Measure {
public:
    explicit Measure(std::vector<Atom> atoms);

    static Measure dirac(double location);

    const std::vector<Atom>& atoms() const { return atoms_; }
    std::size_t size() const { return atoms_.size(); }
    double min_location() const { return atoms_.front().location; }
    double max_location() const { return atoms_.back().location; }
    bool is_deterministic() const { return atoms_.size() == 1; }

    // Pushforward under x -> factor * x + shift.
    Measure affine(double factor, double shift = 0.0) const;

    // Index of the atom selected by a uniform variate in [0, 1).
    std::size_t atom_for(double u) const;

private:
    std::vector<Atom> atoms_;
    std::vector<double> cumulative_;
};

bool operator==(const Measure& a, const Measure& b);

// Description of a single-site law before quantization.
//   dirac                  params: at (0)
//   bernoulli              params: p (0.5), low (0), high (1)
//   uniform                params: a, b
//   gaussian               params: mean (0), sd, width (5)   truncated to mean +- width*sd
//   two-sided-exponential  params: rate, center (0), truncation_mass (1 - 1e-10)
//   atomic                 atoms given explicitly
struct DistributionSpec {
    std::string family;
    std::map<std::string, double> params;
    std::vector<Atom> atoms;
};

// Equal-weight quantile quantization at levels (k - 1/2) / n_atoms.
// Exact families (dirac, bernoulli, atomic) ignore n_atoms.
Measure quantize(const DistributionSpec& spec, int n_atoms);

// sum_i w_i |x_i|^l, l >= 1.
double moment(const Measure& nu, int l);

// Class of measures with max_{1<=l<=p} moment(nu, l) <= bound and, when
// support_lower is set, all atoms >= support_lower.
struct MomentClass {
    int p = 1;
    double bound = 1.0;
    std::optional<double> support_lower;

    bool contains(const Measure& nu) const;
};

double sample_one(const Measure& nu, Stream& stream);
std::vector<double> sample(const Measure& nu, Stream& stream, std::size_t count);

// Bounded-Lipschitz distance sup{|nu1(f) - nu2(f)| : ||f||_inf + L_f <= 1},
// solved exactly as a linear program over the values of f at the union of
// the atoms. Result lies in [0, 2].
double bl_distance(const Measure& nu1, const Measure& nu2);

// Independent lower bound on bl_distance: ascent over piecewise-linear f on a
// uniform grid of grid_size points (merged with the atom locations) spanning
// the atom range, best of 8 deterministic starting profiles.
double bl_distance_oracle(const Measure& nu1, const Measure& nu2, int grid_size);

// Two-column CSV "location,weight" with a header line.
void write_csv(const Measure& nu, std::ostream& os);
Measure read_csv(std::istream& is);

}  // namespace dosmlab
