#pragma once

// Block reward as a function of the effective participant count. The default
// protocol pays a constant 1 per block; the participation-dependent variants
// are the reward-function countermeasure.

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "censim/rational.hpp"

namespace censim {

class RewardFunction {
public:
    enum class Kind { Constant, Linear, Table };

    RewardFunction() : kind_(Kind::Constant), a_(1) {}

    static RewardFunction constant(Rat value) {
        if (value < Rat{0}) throw std::invalid_argument("reward: negative constant");
        RewardFunction f;
        f.kind_ = Kind::Constant;
        f.a_ = value;
        return f;
    }

    // f(n_eff) = slope * n_eff
    static RewardFunction linear(Rat slope) {
        if (slope < Rat{0}) throw std::invalid_argument("reward: negative slope");
        RewardFunction f;
        f.kind_ = Kind::Linear;
        f.a_ = slope;
        return f;
    }

    // values[k-1] is the reward at k effective participants.
    static RewardFunction table(std::vector<Rat> values) {
        if (values.empty()) throw std::invalid_argument("reward: empty table");
        for (std::size_t i = 1; i < values.size(); ++i)
            if (values[i] < values[i - 1])
                throw std::invalid_argument("reward: table must be non-decreasing");
        if (values.front() < Rat{0}) throw std::invalid_argument("reward: negative reward");
        RewardFunction f;
        f.kind_ = Kind::Table;
        f.table_ = std::move(values);
        return f;
    }

    Rat operator()(std::size_t n_effective) const {
        if (n_effective < 1) throw std::invalid_argument("reward: need >= 1 participant");
        switch (kind_) {
        case Kind::Constant: return a_;
        case Kind::Linear: return a_ * Rat{static_cast<std::int64_t>(n_effective)};
        case Kind::Table:
            if (n_effective > table_.size())
                throw std::invalid_argument("reward: table undefined at " +
                                            std::to_string(n_effective));
            return table_[n_effective - 1];
        }
        throw std::logic_error("reward: bad kind");
    }

    // Defined and monotone on [1, n]?
    bool valid_on(std::size_t n) const {
        if (kind_ == Kind::Table) return table_.size() >= n;
        return n >= 1;
    }

    Kind kind() const { return kind_; }

    std::string describe() const {
        switch (kind_) {
        case Kind::Constant: return "constant:" + a_.str();
        case Kind::Linear: return "linear:" + a_.str();
        case Kind::Table: {
            std::string out = "table:";
            for (std::size_t i = 0; i < table_.size(); ++i) {
                if (i) out += ",";
                out += table_[i].str();
            }
            return out;
        }
        }
        return "?";
    }

private:
    Kind kind_;
    Rat a_{1};
    std::vector<Rat> table_;
};

} // namespace censim
