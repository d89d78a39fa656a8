#pragma once

// Domain types shared by every module: normalized voting-power vectors on a
// fixed-point grid, protocol parameters, the step cost function and the
// block-horizon utility ledger.
//
// Powers are stored as integer multiples of the smallest declarable unit
// epsilon (grid = 1/epsilon). Threshold checks reduce to integer
// cross-products against the rational threshold t, so coalition membership
// never depends on floating-point rounding.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "censim/rational.hpp"

namespace censim {

using NodeId = std::uint32_t;
using PowerUnits = std::int64_t; // multiples of epsilon

enum class TerminationPolicy { PowerOnly, PowerAndVisibility };

struct ProtocolParams {
    Rat t{1, 2};                 // honest power threshold, fraction of total
    int eta = 1;                 // detectability threshold, count of excluded nodes
    Rat alpha{100, 1};           // per-block detection cost, reward units
    std::int64_t timeout_blocks = 10;
    PowerUnits grid = 20;        // 1/epsilon
    TerminationPolicy policy = TerminationPolicy::PowerOnly;

    Rat epsilon() const { return Rat{1, grid}; }
};

// units/grid >= t, as an exact integer comparison
inline bool reaches_threshold(PowerUnits units, PowerUnits grid, const Rat& t) {
    return static_cast<__int128>(units) * t.den() >= static_cast<__int128>(t.num()) * grid;
}

class PowerDistribution {
public:
    PowerDistribution() = default;

    PowerDistribution(std::vector<PowerUnits> units, PowerUnits grid)
        : units_(std::move(units)), grid_(grid) {
        if (grid_ < 1) throw std::invalid_argument("PowerDistribution: grid must be >= 1");
        for (auto u : units_)
            if (u < 0) throw std::invalid_argument("PowerDistribution: negative power");
    }

    // Rounds fractional powers onto the grid; rejects anything farther than
    // tol grid units from an exact multiple of epsilon.
    static PowerDistribution from_fractions(const std::vector<double>& fractions,
                                            PowerUnits grid, double tol = 1e-9) {
        std::vector<PowerUnits> units;
        units.reserve(fractions.size());
        for (double f : fractions) {
            double scaled = f * static_cast<double>(grid);
            double rounded = std::round(scaled);
            if (std::abs(scaled - rounded) > tol * static_cast<double>(grid))
                throw std::invalid_argument("power " + std::to_string(f) +
                                            " is not a multiple of epsilon");
            units.push_back(static_cast<PowerUnits>(rounded));
        }
        return PowerDistribution(std::move(units), grid);
    }

    std::size_t n() const { return units_.size(); }
    PowerUnits grid() const { return grid_; }
    PowerUnits units(NodeId i) const { return units_.at(i); }
    const std::vector<PowerUnits>& all_units() const { return units_; }

    PowerUnits total_units() const {
        return std::accumulate(units_.begin(), units_.end(), PowerUnits{0});
    }

    Rat power(NodeId i) const { return Rat{units_.at(i), grid_}; }

    std::vector<Rat> powers() const {
        std::vector<Rat> out;
        out.reserve(units_.size());
        for (std::size_t i = 0; i < units_.size(); ++i) out.push_back(Rat{units_[i], grid_});
        return out;
    }

private:
    std::vector<PowerUnits> units_;
    PowerUnits grid_ = 1;
};

// ---------------------------------------------------------------------------
// Scenario validation

enum class ValidationCode {
    NotNormalized,     // sum of powers != 1
    BigPlayer,         // some node holds more than 1 - t
    ThresholdTooLow,   // t < 1/2
    BadParams,         // parameter range violation
};

struct ValidationIssue {
    ValidationCode code;
    std::string message;
};

struct ValidationReport {
    std::vector<ValidationIssue> issues;
    bool runnable() const { return issues.empty(); }
};

// Accumulates every violation instead of failing fast so sweep drivers can
// log all of them for a rejected scenario.
inline ValidationReport validate_scenario(const PowerDistribution& powers,
                                          const ProtocolParams& params) {
    ValidationReport report;
    auto flag = [&](ValidationCode code, std::string msg) {
        report.issues.push_back({code, std::move(msg)});
    };

    if (powers.n() < 2)
        flag(ValidationCode::BadParams, "need at least 2 nodes");
    if (powers.total_units() != powers.grid())
        flag(ValidationCode::NotNormalized,
             "powers sum to " + Rat{powers.total_units(), powers.grid()}.str() + ", expected 1");

    if (params.t < Rat{1, 2})
        flag(ValidationCode::ThresholdTooLow, "t = " + params.t.str() + " is below 1/2");
    if (params.t > Rat{1})
        flag(ValidationCode::BadParams, "t = " + params.t.str() + " exceeds 1");

    const Rat max_power = Rat{1} - params.t;
    for (NodeId i = 0; i < powers.n(); ++i) {
        if (powers.power(i) > max_power)
            flag(ValidationCode::BigPlayer,
                 "node " + std::to_string(i) + " power " + powers.power(i).str() +
                     " exceeds 1 - t = " + max_power.str());
    }

    if (params.eta < 1 || static_cast<std::size_t>(params.eta) > powers.n())
        flag(ValidationCode::BadParams,
             "eta = " + std::to_string(params.eta) + " outside [1, n]");
    if (params.alpha <= Rat{1})
        flag(ValidationCode::BadParams, "alpha = " + params.alpha.str() +
                                            " must exceed the max per-block attack profit (1)");
    if (params.timeout_blocks < 1)
        flag(ValidationCode::BadParams, "timeout must be >= 1 block");
    if (params.grid < 1)
        flag(ValidationCode::BadParams, "1/epsilon must be a positive integer");

    return report;
}

// ---------------------------------------------------------------------------
// Cost model: a single step at eta excluded nodes.

inline Rat cost_of_strategy(std::size_t excluded_count, const ProtocolParams& params) {
    return excluded_count >= static_cast<std::size_t>(params.eta) ? params.alpha : Rat{0};
}

// ---------------------------------------------------------------------------
// T-block utility accounting

struct RewardLedger {
    std::vector<double> rewards; // accumulated block rewards per node
    std::vector<double> costs;   // accumulated strategy costs per node
    std::int64_t blocks = 0;

    RewardLedger() = default;
    explicit RewardLedger(std::size_t n) : rewards(n, 0.0), costs(n, 0.0) {}
};

// Average per-block utility: (sum_t r_t - f(sigma_t) v_i) / T per node.
inline std::vector<double> average_utility(const RewardLedger& ledger) {
    if (ledger.blocks < 1)
        throw std::invalid_argument("average_utility: ledger has no elapsed blocks");
    std::vector<double> out(ledger.rewards.size());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = (ledger.rewards[i] - ledger.costs[i]) / static_cast<double>(ledger.blocks);
    return out;
}

// ---------------------------------------------------------------------------
// Per-node outcome probabilities over the chance orders.
//
// p1: join, attack fails        p2: not join, attack fails
// p3: join, succeed, in N_a     p4: not join, attack succeeds
// p5: join, succeed, excluded
//
// For a pure profile a node either joins or not, so p1+p3+p5 and p2+p4 each
// sum to at most 1 and one of the two groups is identically zero.
struct ProbabilityProfile {
    Rat p1, p2, p3, p4, p5;
};

// ---------------------------------------------------------------------------
// Scenario grid generator

// All distributions of `grid` units over n nodes with every node holding at
// least one unit, filtered through validate_scenario. Lexicographic order.
// Infeasible (n, grid) combinations simply produce an empty set.
inline std::vector<PowerDistribution> power_grid(std::size_t n, PowerUnits grid,
                                                 const ProtocolParams& params) {
    if (n < 2) throw std::invalid_argument("power_grid: need n >= 2");
    if (grid < 1) throw std::invalid_argument("power_grid: need grid >= 1");

    std::vector<PowerDistribution> out;
    std::vector<PowerUnits> parts(n, 0);
    auto recurse = [&](auto&& self, std::size_t idx, PowerUnits remaining) -> void {
        if (idx + 1 == n) {
            if (remaining >= 1) {
                parts[idx] = remaining;
                PowerDistribution dist(parts, grid);
                if (validate_scenario(dist, params).runnable()) out.push_back(dist);
            }
            return;
        }
        // keep at least one unit for each remaining node
        for (PowerUnits u = 1; u + static_cast<PowerUnits>(n - idx - 1) <= remaining; ++u) {
            parts[idx] = u;
            self(self, idx + 1, remaining - u);
        }
    };
    recurse(recurse, 0, grid);
    return out;
}

} // namespace censim
