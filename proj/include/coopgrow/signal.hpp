#pragma once

#include <algorithm>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "coopgrow/error.hpp"

namespace coopgrow {

/// Right-continuous step function: values[i] holds on [breakpoints[i],
/// breakpoints[i+1]); the last value holds from the last breakpoint onwards.
template <typename T>
class PiecewiseConstantSignal {
public:
    PiecewiseConstantSignal(std::vector<double> breakpoints, std::vector<T> values)
        : breakpoints_(std::move(breakpoints)), values_(std::move(values))
    {
        if (breakpoints_.empty() || breakpoints_.size() != values_.size()) {
            throw ConfigError("piecewise signal needs one value per breakpoint");
        }
        for (std::size_t i = 1; i < breakpoints_.size(); ++i) {
            if (!(breakpoints_[i] > breakpoints_[i - 1])) {
                throw ConfigError("piecewise signal breakpoints must be strictly ascending");
            }
        }
    }

    static PiecewiseConstantSignal constant(T value, double start = 0.0)
    {
        return PiecewiseConstantSignal({start}, {std::move(value)});
    }

    const T& operator()(double t) const
    {
        if (t < breakpoints_.front()) {
            throw std::out_of_range("piecewise signal evaluated before its first breakpoint");
        }
        auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), t);
        return values_[static_cast<std::size_t>(it - breakpoints_.begin()) - 1];
    }

    const std::vector<double>& breakpoints() const { return breakpoints_; }
    const std::vector<T>& values() const { return values_; }

private:
    std::vector<double> breakpoints_;
    std::vector<T> values_;
};

}  // namespace coopgrow
