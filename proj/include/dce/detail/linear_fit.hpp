#pragma once

#include <Eigen/Dense>

namespace dce::detail {

struct LineFit {
    double slope{};
    double intercept{};
    double r_squared{};  // 0 when y has no variance
};

/// Ordinary least squares y = intercept + slope * x on centred data.
template <typename DerivedX, typename DerivedY>
LineFit fit_line(const Eigen::DenseBase<DerivedX>& x, const Eigen::DenseBase<DerivedY>& y) {
    const Eigen::ArrayXd xa = x.derived().template cast<double>().array();
    const Eigen::ArrayXd ya = y.derived().template cast<double>().array();
    const double xm = xa.mean();
    const double ym = ya.mean();
    const Eigen::ArrayXd dx = xa - xm;
    const Eigen::ArrayXd dy = ya - ym;
    const double sxx = dx.square().sum();
    LineFit f;
    f.slope = sxx > 0 ? (dx * dy).sum() / sxx : 0.0;
    f.intercept = ym - f.slope * xm;
    const double ss_tot = dy.square().sum();
    const double ss_res = (dy - f.slope * dx).square().sum();
    f.r_squared = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 0.0;
    return f;
}

}  // namespace dce::detail
