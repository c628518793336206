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

#include "harqeh/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace harqeh {

namespace {

// Relative slack used to decide that an accumulated m has reached r1.
constexpr double kCapSlack = 1e-12;

[[noreturn]] void bad_config(const std::string& what) {
    throw std::invalid_argument("invalid LinkConfig: " + what);
}

}  // namespace

LinkConfig LinkConfig::validated() const {
    LinkConfig out = *this;
    if (!(lambda > 0.0 && lambda <= 1.0)) bad_config("lambda must lie in (0, 1]");
    if (!(std::isfinite(r1) && r1 > 0.0)) bad_config("r1 must be positive");
    if (!(std::isfinite(r2) && r2 > 0.0)) bad_config("r2 must be positive");
    if (r2 > r1) bad_config("r2 must not exceed r1");
    if (e < 1) bad_config("e must be >= 1");
    if (e_d < 1) bad_config("e_d must be >= 1");
    if (out.b_max == 0) out.b_max = e_d + 4 * e;
    if (out.b_max < e_d + e) bad_config("b_max must be >= e_d + e");
    return out;
}

double LinkConfig::good_snr() const { return std::exp2(r1) - 1.0; }
double LinkConfig::bad_snr() const { return std::exp2(r2) - 1.0; }

std::string LinkConfig::to_string() const {
    std::ostringstream os;
    os << "lambda=" << lambda << " r1=" << r1 << " r2=" << r2 << " e=" << e << " e_d=" << e_d
       << " b_max=" << b_max;
    return os.str();
}

SplitRates rate_split(double rho, const LinkConfig& cfg) {
    if (!(rho >= 0.0 && rho <= 1.0)) throw std::domain_error("rate_split: rho outside [0, 1]");
    if (rho == 0.0) return {cfg.r1, cfg.r2};
    if (rho == 1.0) return {0.0, 0.0};
    return {std::log2(rho + (1.0 - rho) * std::exp2(cfg.r1)),
            std::log2(rho + (1.0 - rho) * std::exp2(cfg.r2))};
}

InfoLattice::InfoLattice(const LinkConfig& cfg)
    : r1_(cfg.r1),
      r2_(cfg.r2),
      cap_(static_cast<int>(std::ceil(cfg.r1 / cfg.r2 * (1.0 - kCapSlack)))) {}

double InfoLattice::bits(int index) const {
    return index >= cap_ ? r1_ : static_cast<double>(index) * r2_;
}

int InfoLattice::floor_index(double m) const {
    if (m >= r1_ * (1.0 - kCapSlack)) return cap_;
    const int k = static_cast<int>(std::floor(m / r2_ + 1e-9));
    return std::clamp(k, 0, cap_ - 1);
}

bool is_absorbing(const LatticeState& s, const LinkConfig& cfg) {
    return s.b >= cfg.e_d && s.m == InfoLattice(cfg).cap_index();
}

bool is_absorbing(const RealState& s, const LinkConfig& cfg) {
    return s.b >= cfg.e_d && s.m >= cfg.r1;
}

RealState to_real(const LatticeState& s, const LinkConfig& cfg) {
    return {static_cast<double>(s.b), InfoLattice(cfg).bits(s.m)};
}

LatticeState step_ts(const LatticeState& s, TsAction a, ChannelState g, const LinkConfig& cfg) {
    if (is_absorbing(s, cfg)) throw PreconditionError("step_ts: state is absorbing");
    const InfoLattice lattice(cfg);
    const bool good = g == ChannelState::Good;
    if (a == TsAction::Harvest) {
        return {good ? std::min(s.b + cfg.e, cfg.b_max) : s.b, s.m};
    }
    if (s.b < 1) throw PreconditionError("step_ts: decoding needs at least one energy unit");
    return {s.b - 1, good ? lattice.cap_index() : lattice.add_bad(s.m)};
}

RealState step_ps(const RealState& s, double rho, ChannelState g, const LinkConfig& cfg) {
    if (is_absorbing(s, cfg)) throw PreconditionError("step_ps: state is absorbing");
    const SplitRates rates = rate_split(rho, cfg);
    const double spend = rho != 1.0 ? 1.0 : 0.0;
    if (spend > 0.0 && s.b < 1.0) {
        throw PreconditionError("step_ps: decoding needs at least one energy unit");
    }
    const bool good = g == ChannelState::Good;
    RealState next;
    next.b = good ? std::min(s.b + rho * cfg.e - spend, static_cast<double>(cfg.b_max))
                  : s.b - spend;
    next.m = std::min(s.m + (good ? rates.good : rates.bad), cfg.r1);
    if (next.m >= cfg.r1 * (1.0 - kCapSlack)) next.m = cfg.r1;
    return next;
}

StateSpace::StateSpace(const LinkConfig& cfg) : cfg_(cfg.validated()), lattice_(cfg_) {
    const int levels = lattice_.size();
    states_.reserve(static_cast<std::size_t>(cfg_.b_max + 1) * static_cast<std::size_t>(levels));
    for (int b = 0; b <= cfg_.b_max; ++b) {
        for (int m = 0; m < levels; ++m) {
            states_.push_back({b, m});
            absorbing_.push_back(b >= cfg_.e_d && m == lattice_.cap_index() ? 1 : 0);
        }
    }
}

StateSpace enumerate_states(const LinkConfig& cfg) { return StateSpace(cfg); }

ActionSet allowed_actions(const LatticeState& s, const LinkConfig& cfg) {
    if (is_absorbing(s, cfg)) throw PreconditionError("allowed_actions: state is absorbing");
    const bool full = s.m == InfoLattice(cfg).cap_index();
    return {true, s.b >= 1 && !full};
}

}  // namespace harqeh
