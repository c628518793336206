// Copyright 2026 The harqeh Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "harqeh/model.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace harqeh {

/// One config checked by an invariant suite. `margin` is the worst-case
/// slack: non-negative means the invariant held with that much room.
struct SuiteLine {
    std::string config;
    double margin = 0.0;
    bool ok = false;
    std::string detail;
};

struct SuiteReport {
    std::string suite;
    std::vector<SuiteLine> lines;

    [[nodiscard]] bool ok() const;
    [[nodiscard]] std::string to_text() const;
};

/// Built-in link configurations.
namespace configs {
/// Table-1 column: lambda 0.5, r1 10, e 1, e_d 5, r2 in 1..5.
[[nodiscard]] LinkConfig table1(int r2);
/// Table-2 column: r1 10, r2 5, e 2, e_d 5, lambda in {0.1, ..., 0.5}.
[[nodiscard]] LinkConfig table2(double lambda);
/// Policy-grid example: r1 5, r2 2, e 2, lambda 0.5, e_d 5.
[[nodiscard]] LinkConfig figure();
/// Hand-solvable example with k(0,0) = 5: lambda 0.5, r1 = r2 = e = e_d = 1.
[[nodiscard]] LinkConfig unit();
}  // namespace configs

/// k(b, r1) against ceil((e_d - b)/e)/lambda over e in 1..3, e_d in 1..6,
/// lambda in 0.1..0.9, for both the VIA table and the absorbing-chain solve.
[[nodiscard]] SuiteReport verify_lemma1(double tol = 1e-10);

/// k non-increasing in b and in m over the table and figure configs.
[[nodiscard]] SuiteReport verify_monotone();

/// One-step split-versus-decode sweep with the IF continuation: Monte Carlo
/// gap >= -3 stderr, plus the exact gap and the split lower bound.
[[nodiscard]] SuiteReport verify_deviation(const LinkConfig& cfg, std::uint64_t rollouts, std::uint64_t seed,
                                           int lanes = 0);

/// k(0,0) unchanged when b_max grows, for the table configs.
[[nodiscard]] SuiteReport verify_bmax();

}  // namespace harqeh
