#pragma once

#include <Eigen/Dense>

#include "dce/errors.hpp"

namespace dce {

/// Uniformly sampled real series; times in seconds.
struct TimeSeries {
    double t0{};
    double dt{};
    Eigen::VectorXd values;

    Eigen::Index size() const { return values.size(); }
    double time(Eigen::Index k) const { return t0 + static_cast<double>(k) * dt; }
    double t_end() const { return time(size() - 1); }
    Eigen::VectorXd times() const {
        return Eigen::VectorXd::LinSpaced(size(), 0.0, static_cast<double>(size() - 1)) * dt +
               Eigen::VectorXd::Constant(size(), t0);
    }

    void validate() const {
        if (size() < 2) throw ValidationError("series", "time series needs at least two samples");
        if (!(dt > 0)) throw ValidationError("series.dt", "sampling interval must be positive");
    }
};

}  // namespace dce
