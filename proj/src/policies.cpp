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

#include "harqeh/policies.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace harqeh {

namespace {

class BatteryFirst final : public Policy {
public:
    BatteryFirst(const LinkConfig& cfg, int threshold) : Policy(cfg), threshold_(threshold) {}

    std::string spec() const override { return "bf:threshold=" + std::to_string(threshold_); }

protected:
    double choose(const RealState& s, std::uint64_t, StreamRng&) const override {
        return s.b < threshold_ ? 1.0 : 0.0;
    }
    std::optional<double> lattice_harvest_probability(const LatticeState& s) const override {
        return s.b < threshold_ ? 1.0 : 0.0;
    }

private:
    int threshold_;
};

class InformationFirst final : public Policy {
public:
    using Policy::Policy;
    std::string spec() const override { return "if"; }

protected:
    double choose(const RealState&, std::uint64_t, StreamRng&) const override { return 0.0; }
    std::optional<double> lattice_harvest_probability(const LatticeState&) const override { return 0.0; }
};

class CoinToss final : public Policy {
public:
    using Policy::Policy;
    std::string spec() const override { return "ct"; }

protected:
    double choose(const RealState& s, std::uint64_t, StreamRng& rng) const override {
        if (s.b >= cfg_.e_d + 1) return 0.0;
        return rng.bernoulli(0.5) ? 1.0 : 0.0;
    }
    std::optional<double> lattice_harvest_probability(const LatticeState& s) const override {
        return s.b >= cfg_.e_d + 1 ? 0.0 : 0.5;
    }
};

class Tabular final : public Policy {
public:
    Tabular(ActionGrid grid)
        : Policy(grid.space.config()), grid_(std::move(grid)) {}

    std::string spec() const override { return "tabular:tie=" + std::string(to_string(grid_.tie_break)); }

protected:
    double choose(const RealState& s, std::uint64_t, StreamRng&) const override {
        const int b = std::clamp(static_cast<int>(std::floor(s.b)), 0, cfg_.b_max);
        const int m = grid_.space.lattice().floor_index(s.m);
        return grid_.at({b, m}) == Cell::Id ? 0.0 : 1.0;
    }
    std::optional<double> lattice_harvest_probability(const LatticeState& s) const override {
        return grid_.at(s) == Cell::Id ? 0.0 : 1.0;
    }

private:
    ActionGrid grid_;
};

class FirstSlot final : public Policy {
public:
    FirstSlot(double rho0, PolicyPtr continuation)
        : Policy(continuation->config()), rho0_(rho0), continuation_(std::move(continuation)) {}

    std::string spec() const override {
        return "first:rho=" + std::to_string(rho0_) + "," + continuation_->spec();
    }

protected:
    double choose(const RealState& s, std::uint64_t slot, StreamRng& rng) const override {
        return slot == 0 ? rho0_ : continuation_->decide(s, slot, rng);
    }
    std::optional<double> lattice_harvest_probability(const LatticeState&) const override {
        return std::nullopt;
    }

private:
    double rho0_;
    PolicyPtr continuation_;
};

}  // namespace

PolicyPtr bf_policy(const LinkConfig& cfg, std::optional<int> threshold) {
    const LinkConfig c = cfg.validated();
    const int t = threshold.value_or(c.e_d + 1);
    if (t < 1 || t > c.b_max) throw std::invalid_argument("bf_policy: threshold must lie in [1, b_max]");
    return std::make_shared<BatteryFirst>(c, t);
}

PolicyPtr if_policy(const LinkConfig& cfg) { return std::make_shared<InformationFirst>(cfg); }

PolicyPtr ct_policy(const LinkConfig& cfg) { return std::make_shared<CoinToss>(cfg); }

PolicyPtr tabular_policy(const ValueTable& vt, TieBreak tie_break) {
    if (tie_break == TieBreak::MarkTie) {
        throw std::invalid_argument("tabular_policy: a marked tie is not an action; use prefer-eh or prefer-id");
    }
    return std::make_shared<Tabular>(extract_policy(vt, tie_break));
}

PolicyPtr split_once_policy(double rho0, PolicyPtr continuation) {
    if (!(rho0 > 0.0 && rho0 < 1.0)) throw std::invalid_argument("split_once_policy: rho0 must lie in (0, 1)");
    if (!continuation) throw std::invalid_argument("split_once_policy: null continuation");
    return std::make_shared<FirstSlot>(rho0, std::move(continuation));
}

PolicyPtr decode_once_policy(PolicyPtr continuation) {
    if (!continuation) throw std::invalid_argument("decode_once_policy: null continuation");
    return std::make_shared<FirstSlot>(0.0, std::move(continuation));
}

std::string_view to_string(TieBreak t) {
    switch (t) {
        case TieBreak::PreferEh: return "prefer-eh";
        case TieBreak::PreferId: return "prefer-id";
        case TieBreak::MarkTie: return "mark";
    }
    return "?";
}

TieBreak parse_tie_break(std::string_view s) {
    if (s == "prefer-eh") return TieBreak::PreferEh;
    if (s == "prefer-id") return TieBreak::PreferId;
    if (s == "mark") return TieBreak::MarkTie;
    throw std::invalid_argument("unknown tie-break '" + std::string(s) + "'");
}

PolicyPtr make_policy(std::string_view spec, const LinkConfig& cfg) {
    const auto colon = spec.find(':');
    const std::string_view name = spec.substr(0, colon);
    std::string_view params = colon == std::string_view::npos ? std::string_view{} : spec.substr(colon + 1);

    std::optional<int> threshold;
    TieBreak tie = TieBreak::PreferEh;
    while (!params.empty()) {
        const auto comma = params.find(',');
        const std::string_view kv = params.substr(0, comma);
        params = comma == std::string_view::npos ? std::string_view{} : params.substr(comma + 1);
        const auto eq = kv.find('=');
        if (eq == std::string_view::npos) throw std::invalid_argument("policy spec: expected key=value in '" + std::string(spec) + "'");
        const std::string_view key = kv.substr(0, eq);
        const std::string_view value = kv.substr(eq + 1);
        if (name == "bf" && key == "threshold") {
            int t = 0;
            const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), t);
            if (ec != std::errc{} || ptr != value.data() + value.size()) {
                throw std::invalid_argument("policy spec: bad threshold '" + std::string(value) + "'");
            }
            threshold = t;
        } else if (name == "tabular" && key == "tie") {
            tie = parse_tie_break(value);
        } else {
            throw std::invalid_argument("policy spec: unknown parameter '" + std::string(key) + "' for '" +
                                        std::string(name) + "'");
        }
    }

    if (name == "bf") return bf_policy(cfg, threshold);
    if (name == "if") return if_policy(cfg);
    if (name == "ct") return ct_policy(cfg);
    if (name == "tabular") return tabular_policy(value_iteration_ssp(cfg), tie);
    throw std::invalid_argument("unknown policy '" + std::string(name) + "'");
}

}  // namespace harqeh
