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

#include <optional>
#include <stdexcept>
#include <vector>

namespace harqeh {

inline constexpr double kDefaultSolverTol = 1e-12;
inline constexpr double kDefaultTieTol = 1e-9;

/// Expected slots to absorption on the time-switching lattice, with the
/// action values behind each entry.
///
/// `q_id` is NaN wherever decoding is not allowed (b < 1 or m = r1) and both
/// q entries are NaN on absorbing states.
struct ValueTable {
    StateSpace space;
    std::vector<double> k;
    std::vector<double> q_eh;
    std::vector<double> q_id;
    std::vector<char> tie;  ///< |q_eh - q_id| <= tie_tol
    double tie_tol = kDefaultTieTol;
    int iterations = 0;
    double residual = 0.0;  ///< sup-norm Bellman residual after the last sweep

    [[nodiscard]] const LinkConfig& config() const { return space.config(); }
    [[nodiscard]] double at(const LatticeState& s) const { return k[space.index(s)]; }
    [[nodiscard]] bool is_tie(const LatticeState& s) const { return tie[space.index(s)] != 0; }
};

class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, double residual)
        : std::runtime_error(what), residual_(residual) {}
    [[nodiscard]] double residual() const { return residual_; }

private:
    double residual_;
};

struct SolverOptions {
    double tol = kDefaultSolverTol;
    int max_iter = 1'000'000;
    double tie_tol = kDefaultTieTol;
};

/// Undiscounted stochastic-shortest-path value iteration (cost 1 per slot
/// until decode). Gauss-Seidel sweeps in decreasing b, decreasing m order
/// from k = 0. This is the serial reference solver.
[[nodiscard]] ValueTable value_iteration_ssp(const LinkConfig& cfg, const SolverOptions& opts = {});

/// Same fixed point with synchronous (Jacobi) sweeps; the per-state update
/// runs as an OpenMP parallel loop.
[[nodiscard]] ValueTable value_iteration_ssp_jacobi(const LinkConfig& cfg,
                                                    const SolverOptions& opts = {});

struct QValues {
    double q_eh;
    std::optional<double> q_id;
};

/// One-step look-ahead values of both TS actions at transient `s`.
[[nodiscard]] QValues q_values(const ValueTable& vt, const LatticeState& s);

enum class TieBreak { PreferEh, PreferId, MarkTie };

enum class Cell { Absorb, Eh, Id, Tie };

/// Per-state optimal decision grid extracted from a converged table.
struct ActionGrid {
    StateSpace space;
    std::vector<Cell> cells;
    std::vector<char> tie;  ///< states where both actions are optimal
    TieBreak tie_break = TieBreak::PreferEh;

    [[nodiscard]] Cell at(const LatticeState& s) const { return cells[space.index(s)]; }
};

[[nodiscard]] ActionGrid extract_policy(const ValueTable& vt, TieBreak tie_break);

/// Discounted Bellman fixed point with reward 0 on decodable states and -1
/// otherwise. As beta -> 1, -V approaches the SSP table's k.
/// Throws std::invalid_argument for beta outside [0, 1 - 2^-52).
[[nodiscard]] ValueTable value_iteration_discounted(const LinkConfig& cfg, double beta,
                                                    const SolverOptions& opts = {});

struct BmaxInvarianceReport {
    int b_max_base = 0;
    int b_max_extended = 0;
    double k_base = 0.0;
    double k_extended = 0.0;
    double difference = 0.0;
    double bound = 0.0;
    bool ok = false;
};

/// Compares k(0,0) at cfg.b_max and at cfg.b_max + margin * e.
[[nodiscard]] BmaxInvarianceReport check_bmax_invariance(const LinkConfig& cfg, int margin,
                                                         const SolverOptions& opts = {});

}  // namespace harqeh
