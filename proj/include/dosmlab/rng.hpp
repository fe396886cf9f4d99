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

#include <cstdint>
#include <limits>

namespace dosmlab {

// Counter-based stream. Output k of a stream with key `key` is
// mix64(key + (k + 1) * kGolden), i.e. SplitMix64 evaluated at an explicit
// counter. Streams never share state, so the draws a worker sees depend only
// on (master seed, stream index, draw index) and never on thread scheduling.
class Stream {
public:
    static constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

    using result_type = std::uint64_t;

    constexpr explicit Stream(std::uint64_t key = 0) : key_(key) {}

    // Substream for (master seed, index): key = mix64(mix64(seed) ^ mix64(index + kGolden)).
    static constexpr Stream substream(std::uint64_t seed, std::uint64_t index) {
        return Stream(mix64(mix64(seed) ^ mix64(index + kGolden)));
    }

    // Child stream of this one; used to give independent sub-tasks their own keys.
    constexpr Stream child(std::uint64_t index) const { return substream(key_, index); }

    static constexpr std::uint64_t mix64(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    constexpr std::uint64_t operator()() {
        ++counter_;
        return mix64(key_ + counter_ * kGolden);
    }

    // Uniform on [0, 1) with 53 random bits.
    constexpr double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    constexpr std::uint64_t key() const { return key_; }
    constexpr std::uint64_t position() const { return counter_; }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace dosmlab
