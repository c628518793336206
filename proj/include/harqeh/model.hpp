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

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace harqeh {

/// Physical parameters of an energy-harvesting HARQ-IR link.
///
/// Rates are in bits per slot (log base 2). Energy is measured in units of
/// one transceiver-slot. The message rate equals the GOOD-state rate `r1`,
/// so a single GOOD decoding slot carries the whole message.
struct LinkConfig {
    double lambda = 0.5;  ///< P[channel is GOOD]
    double r1 = 1.0;      ///< GOOD-state rate, also the message rate
    double r2 = 1.0;      ///< BAD-state rate, 0 < r2 <= r1
    int e = 1;            ///< energy harvested by a full-EH GOOD slot
    int e_d = 1;          ///< battery needed to attempt decoding
    int b_max = 0;        ///< battery capacity; 0 selects e_d + 4e

    /// Returns a copy with b_max filled in and every invariant checked.
    /// Throws std::invalid_argument naming the offending field.
    [[nodiscard]] LinkConfig validated() const;

    /// Noise-normalized received power P|g1|^2 = 2^r1 - 1.
    [[nodiscard]] double good_snr() const;
    /// Noise-normalized received power P|g0|^2 = 2^r2 - 1.
    [[nodiscard]] double bad_snr() const;

    [[nodiscard]] std::string to_string() const;

    friend bool operator==(const LinkConfig&, const LinkConfig&) = default;
};

enum class ChannelState { Bad = 0, Good = 1 };

/// Time-switching action. The numeric value is the split ratio rho.
enum class TsAction { Decode = 0, Harvest = 1 };

/// Mutual information accumulated in one slot for each channel state.
struct SplitRates {
    double good;
    double bad;
};

/// Per-slot information rates when a fraction `rho` of the received power
/// goes to the harvester: log2(rho + (1-rho) 2^r). Exact at the endpoints.
/// Throws std::domain_error when rho is outside [0, 1].
[[nodiscard]] SplitRates rate_split(double rho, const LinkConfig& cfg);

/// Information levels reachable by time switching: {0, r2, 2 r2, ...} below
/// r1, plus the cap r1. Levels are addressed by integer index so long
/// episodes never drift off the lattice.
class InfoLattice {
public:
    explicit InfoLattice(const LinkConfig& cfg);

    /// Number of levels, ceil(r1/r2) + 1.
    [[nodiscard]] int size() const { return cap_ + 1; }
    [[nodiscard]] int cap_index() const { return cap_; }
    [[nodiscard]] double bits(int index) const;
    /// Index reached by one BAD decoding slot from `index`.
    [[nodiscard]] int add_bad(int index) const { return index + 1 < cap_ ? index + 1 : cap_; }
    /// Largest level not above `m` bits.
    [[nodiscard]] int floor_index(double m) const;

private:
    double r1_;
    double r2_;
    int cap_;
};

/// Countable-MDP state: battery units and an information lattice index.
struct LatticeState {
    int b = 0;
    int m = 0;  ///< index into InfoLattice

    friend bool operator==(const LatticeState&, const LatticeState&) = default;
};

/// Continuous state followed by the Monte Carlo engine under power splitting.
struct RealState {
    double b = 0.0;
    double m = 0.0;  ///< accumulated bits, in [0, r1]

    friend bool operator==(const RealState&, const RealState&) = default;
};

[[nodiscard]] bool is_absorbing(const LatticeState& s, const LinkConfig& cfg);
[[nodiscard]] bool is_absorbing(const RealState& s, const LinkConfig& cfg);

[[nodiscard]] RealState to_real(const LatticeState& s, const LinkConfig& cfg);

/// Thrown when a transition is requested from a state that does not allow it.
class PreconditionError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// One time-switching slot on the lattice.
[[nodiscard]] LatticeState step_ts(const LatticeState& s, TsAction a, ChannelState g,
                                   const LinkConfig& cfg);

/// One power-splitting slot on real-valued state. Reduces to step_ts for
/// rho in {0, 1} on lattice inputs.
[[nodiscard]] RealState step_ps(const RealState& s, double rho, ChannelState g,
                                const LinkConfig& cfg);

/// Row-major enumeration of the lattice: b outer, information index inner.
/// The position of (b, m) is b * InfoLattice::size() + m.
class StateSpace {
public:
    explicit StateSpace(const LinkConfig& cfg);

    [[nodiscard]] const LinkConfig& config() const { return cfg_; }
    [[nodiscard]] const InfoLattice& lattice() const { return lattice_; }
    [[nodiscard]] std::size_t size() const { return states_.size(); }
    [[nodiscard]] int info_levels() const { return lattice_.size(); }
    [[nodiscard]] std::size_t index(const LatticeState& s) const {
        return static_cast<std::size_t>(s.b) * static_cast<std::size_t>(lattice_.size()) +
               static_cast<std::size_t>(s.m);
    }
    [[nodiscard]] const LatticeState& state(std::size_t i) const { return states_[i]; }
    [[nodiscard]] bool absorbing(std::size_t i) const { return absorbing_[i] != 0; }
    [[nodiscard]] const std::vector<LatticeState>& states() const { return states_; }

private:
    LinkConfig cfg_;
    InfoLattice lattice_;
    std::vector<LatticeState> states_;
    std::vector<char> absorbing_;
};

[[nodiscard]] StateSpace enumerate_states(const LinkConfig& cfg);

/// Legal TS actions: harvest only when b < 1 or m = r1, otherwise both.
struct ActionSet {
    bool harvest = true;
    bool decode = false;

    friend bool operator==(const ActionSet&, const ActionSet&) = default;
};

[[nodiscard]] ActionSet allowed_actions(const LatticeState& s, const LinkConfig& cfg);

}  // namespace harqeh
