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

#include "harqeh/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace harqeh {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Successor indices of a transient state under each TS action.
struct Successors {
    std::size_t eh_good;
    std::size_t eh_bad;  // the state itself
    bool id_allowed;
    std::size_t id_good;
    std::size_t id_bad;
};

Successors successors(const StateSpace& space, std::size_t i) {
    const LinkConfig& cfg = space.config();
    const InfoLattice& lattice = space.lattice();
    const LatticeState s = space.state(i);
    Successors out{};
    out.eh_good = space.index({std::min(s.b + cfg.e, cfg.b_max), s.m});
    out.eh_bad = i;
    out.id_allowed = s.b >= 1 && s.m != lattice.cap_index();
    if (out.id_allowed) {
        out.id_good = space.index({s.b - 1, lattice.cap_index()});
        out.id_bad = space.index({s.b - 1, lattice.add_bad(s.m)});
    }
    return out;
}

// Expected continuation value E[v(next)] under each action.
struct Lookahead {
    double eh;
    double id;  // NaN when decoding is not allowed
};

Lookahead lookahead(const Successors& nx, const std::vector<double>& v, double lambda) {
    Lookahead out{lambda * v[nx.eh_good] + (1.0 - lambda) * v[nx.eh_bad], kNaN};
    if (nx.id_allowed) out.id = lambda * v[nx.id_good] + (1.0 - lambda) * v[nx.id_bad];
    return out;
}

// Bellman backup of the SSP cost-to-go.
double backup_ssp(const Lookahead& la) {
    const double eh = 1.0 + la.eh;
    return std::isnan(la.id) ? eh : std::min(eh, 1.0 + la.id);
}

// Sweep order: information descending, then battery descending. Decoding
// moves to strictly higher m and harvesting to b + e within the same m, so
// every successor other than the EH self-loop is refreshed before use.
std::vector<std::size_t> sweep_order(const StateSpace& space) {
    std::vector<std::size_t> order;
    order.reserve(space.size());
    for (int m = space.info_levels() - 1; m >= 0; --m) {
        for (int b = space.config().b_max; b >= 0; --b) {
            const std::size_t i = space.index({b, m});
            if (!space.absorbing(i)) order.push_back(i);
        }
    }
    return order;
}

double ssp_residual(const StateSpace& space, const std::vector<double>& k) {
    const double lambda = space.config().lambda;
    double res = 0.0;
    for (std::size_t i = 0; i < space.size(); ++i) {
        if (space.absorbing(i)) continue;
        res = std::max(res, std::abs(backup_ssp(lookahead(successors(space, i), k, lambda)) - k[i]));
    }
    return res;
}

void fill_q_and_ties(ValueTable& vt) {
    const StateSpace& space = vt.space;
    const double lambda = space.config().lambda;
    vt.q_eh.assign(space.size(), kNaN);
    vt.q_id.assign(space.size(), kNaN);
    vt.tie.assign(space.size(), 0);
    for (std::size_t i = 0; i < space.size(); ++i) {
        if (space.absorbing(i)) continue;
        const Lookahead la = lookahead(successors(space, i), vt.k, lambda);
        vt.q_eh[i] = 1.0 + la.eh;
        if (!std::isnan(la.id)) {
            vt.q_id[i] = 1.0 + la.id;
            vt.tie[i] = std::abs(vt.q_eh[i] - vt.q_id[i]) <= vt.tie_tol ? 1 : 0;
        }
    }
}

// The only cycles left under the sweep order are EH self-loops of weight
// (1 - lambda), so the remaining error after a sweep is at most
// change * (1 - lambda) / lambda.
bool converged(double change, double tol, double lambda) { return change * (1.0 - lambda) <= tol * lambda; }

[[noreturn]] void not_converged(const char* who, int max_iter, double change) {
    std::ostringstream os;
    os << who << ": no convergence after " << max_iter << " sweeps (last change " << change << ")";
    throw ConvergenceError(os.str(), change);
}

}  // namespace

ValueTable value_iteration_ssp(const LinkConfig& cfg, const SolverOptions& opts) {
    if (!(opts.tol > 0.0)) throw std::invalid_argument("value_iteration_ssp: tol must be positive");
    ValueTable vt{StateSpace(cfg), {}, {}, {}, {}, opts.tie_tol, 0, 0.0};
    const StateSpace& space = vt.space;
    const double lambda = space.config().lambda;
    const std::vector<std::size_t> order = sweep_order(space);
    std::vector<Successors> nx(space.size());
    for (std::size_t i : order) nx[i] = successors(space, i);

    vt.k.assign(space.size(), 0.0);
    double change = std::numeric_limits<double>::infinity();
    while (!converged(change, opts.tol, lambda)) {
        if (vt.iterations >= opts.max_iter) not_converged("value_iteration_ssp", opts.max_iter, change);
        change = 0.0;
        for (std::size_t i : order) {
            const double next = backup_ssp(lookahead(nx[i], vt.k, lambda));
            change = std::max(change, std::abs(next - vt.k[i]));
            vt.k[i] = next;
        }
        ++vt.iterations;
    }
    vt.residual = ssp_residual(space, vt.k);
    fill_q_and_ties(vt);
    return vt;
}

ValueTable value_iteration_ssp_jacobi(const LinkConfig& cfg, const SolverOptions& opts) {
    if (!(opts.tol > 0.0)) throw std::invalid_argument("value_iteration_ssp_jacobi: tol must be positive");
    ValueTable vt{StateSpace(cfg), {}, {}, {}, {}, opts.tie_tol, 0, 0.0};
    const StateSpace& space = vt.space;
    const double lambda = space.config().lambda;
    const auto n = static_cast<std::ptrdiff_t>(space.size());
    std::vector<Successors> nx(space.size());
    for (std::size_t i = 0; i < space.size(); ++i) {
        if (!space.absorbing(i)) nx[i] = successors(space, i);
    }

    vt.k.assign(space.size(), 0.0);
    std::vector<double> next(space.size(), 0.0);
    // Synchronous sweeps gain nothing from the DAG ordering, so stop on the
    // raw change instead of the self-loop bound.
    double change = std::numeric_limits<double>::infinity();
    while (!(change <= opts.tol * lambda)) {
        if (vt.iterations >= opts.max_iter) {
            not_converged("value_iteration_ssp_jacobi", opts.max_iter, change);
        }
        change = 0.0;
#pragma omp parallel for reduction(max : change) schedule(static)
        for (std::ptrdiff_t i = 0; i < n; ++i) {
            const auto u = static_cast<std::size_t>(i);
            if (space.absorbing(u)) continue;
            next[u] = backup_ssp(lookahead(nx[u], vt.k, lambda));
            change = std::max(change, std::abs(next[u] - vt.k[u]));
        }
        vt.k.swap(next);
        ++vt.iterations;
    }
    vt.residual = ssp_residual(space, vt.k);
    fill_q_and_ties(vt);
    return vt;
}

QValues q_values(const ValueTable& vt, const LatticeState& s) {
    const LinkConfig& cfg = vt.config();
    if (is_absorbing(s, cfg)) throw PreconditionError("q_values: state is absorbing");
    const Lookahead la = lookahead(successors(vt.space, vt.space.index(s)), vt.k, cfg.lambda);
    QValues out{1.0 + la.eh, std::nullopt};
    if (!std::isnan(la.id)) out.q_id = 1.0 + la.id;
    return out;
}

ActionGrid extract_policy(const ValueTable& vt, TieBreak tie_break) {
    ActionGrid grid{vt.space, std::vector<Cell>(vt.space.size(), Cell::Absorb), vt.tie, tie_break};
    for (std::size_t i = 0; i < vt.space.size(); ++i) {
        if (vt.space.absorbing(i)) continue;
        if (std::isnan(vt.q_id[i])) {
            grid.cells[i] = Cell::Eh;
        } else if (vt.tie[i] != 0) {
            switch (tie_break) {
                case TieBreak::PreferEh: grid.cells[i] = Cell::Eh; break;
                case TieBreak::PreferId: grid.cells[i] = Cell::Id; break;
                case TieBreak::MarkTie: grid.cells[i] = Cell::Tie; break;
            }
        } else {
            grid.cells[i] = vt.q_id[i] < vt.q_eh[i] ? Cell::Id : Cell::Eh;
        }
    }
    return grid;
}

ValueTable value_iteration_discounted(const LinkConfig& cfg, double beta, const SolverOptions& opts) {
    if (!(beta >= 0.0 && beta < 1.0 - 0x1p-52)) {
        throw std::invalid_argument(
            "value_iteration_discounted: beta must lie in [0, 1 - 2^-52); use value_iteration_ssp "
            "for the undiscounted objective");
    }
    if (!(opts.tol > 0.0)) throw std::invalid_argument("value_iteration_discounted: tol must be positive");
    ValueTable vt{StateSpace(cfg), {}, {}, {}, {}, opts.tie_tol, 0, 0.0};
    const StateSpace& space = vt.space;
    const double lambda = space.config().lambda;
    const std::vector<std::size_t> order = sweep_order(space);
    std::vector<Successors> nx(space.size());
    for (std::size_t i : order) nx[i] = successors(space, i);

    // V <= 0; absorbing states keep V = 0 (zero reward self-loop).
    vt.k.assign(space.size(), 0.0);
    auto backup = [&](std::size_t i) {
        const Lookahead la = lookahead(nx[i], vt.k, lambda);
        const double eh = -1.0 + beta * la.eh;
        return std::isnan(la.id) ? eh : std::max(eh, -1.0 + beta * la.id);
    };
    double change = std::numeric_limits<double>::infinity();
    while (!converged(change, opts.tol, lambda)) {
        if (vt.iterations >= opts.max_iter) not_converged("value_iteration_discounted", opts.max_iter, change);
        change = 0.0;
        for (std::size_t i : order) {
            const double next = backup(i);
            change = std::max(change, std::abs(next - vt.k[i]));
            vt.k[i] = next;
        }
        ++vt.iterations;
    }
    double res = 0.0;
    for (std::size_t i : order) res = std::max(res, std::abs(backup(i) - vt.k[i]));
    vt.residual = res;
    // Action values in the same (reward) sign convention as k.
    vt.q_eh.assign(space.size(), kNaN);
    vt.q_id.assign(space.size(), kNaN);
    vt.tie.assign(space.size(), 0);
    for (std::size_t i : order) {
        const Lookahead la = lookahead(nx[i], vt.k, lambda);
        vt.q_eh[i] = -1.0 + beta * la.eh;
        if (!std::isnan(la.id)) {
            vt.q_id[i] = -1.0 + beta * la.id;
            vt.tie[i] = std::abs(vt.q_eh[i] - vt.q_id[i]) <= vt.tie_tol ? 1 : 0;
        }
    }
    return vt;
}

BmaxInvarianceReport check_bmax_invariance(const LinkConfig& cfg, int margin, const SolverOptions& opts) {
    if (margin < 1) throw std::invalid_argument("check_bmax_invariance: margin must be >= 1");
    const LinkConfig base = cfg.validated();
    LinkConfig extended = base;
    extended.b_max = base.b_max + margin * base.e;
    BmaxInvarianceReport r;
    r.b_max_base = base.b_max;
    r.b_max_extended = extended.b_max;
    r.k_base = value_iteration_ssp(base, opts).at({0, 0});
    r.k_extended = value_iteration_ssp(extended, opts).at({0, 0});
    r.difference = std::abs(r.k_base - r.k_extended);
    r.bound = 10.0 * opts.tol;
    r.ok = r.difference <= r.bound;
    return r;
}

}  // namespace harqeh
