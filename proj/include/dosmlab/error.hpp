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

#include <stdexcept>
#include <string>

namespace dosmlab {

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad arguments, malformed configs, violated preconditions.
class InvalidInput : public Error {
public:
    explicit InvalidInput(const std::string& msg) : Error(msg) {}
};

// Box/block tiling failure.
class MisalignedBox : public InvalidInput {
public:
    explicit MisalignedBox(const std::string& msg) : InvalidInput(msg) {}
};

// Solver breakdown, non-convergence, quadrature tolerance not met.
class NumericalFailure : public Error {
public:
    explicit NumericalFailure(const std::string& msg) : Error(msg) {}
};

class LpFailure : public NumericalFailure {
public:
    explicit LpFailure(const std::string& msg) : NumericalFailure(msg) {}
};

}  // namespace dosmlab
