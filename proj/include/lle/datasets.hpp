#ifndef LLE_DATASETS_HPP
#define LLE_DATASETS_HPP

#include "lle/rng.hpp"
#include "lle/types.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>

namespace lle {

/// Synthetic manifold sample with the ground-truth parameters that generated it.
struct ManifoldSample {
    DataMatrix data;
    Matrix intrinsic; // n x d_int, row-aligned with data
    std::string name;
    std::uint64_t seed = 0;
};

namespace datasets {

inline constexpr double default_cap_height = 0.4;

namespace detail {

inline void require_points(Index n, Index minimum = 10) {
    if (n < minimum) {
        throw ParameterError("need at least " + std::to_string(minimum) + " points, got " + std::to_string(n));
    }
}

} // namespace detail

/* Unit sphere in R^3 with the polar cap z > 1 - cap_height removed.
 *
 * Directions come from normalized 3-D Gaussian draws (uniform on the sphere);
 * draws landing in the cap are rejected. Intrinsic coordinates are
 * (azimuth in (-pi, pi], polar angle in [0, pi]). */
inline ManifoldSample punctured_sphere(Index n, double cap_height, std::uint64_t seed) {
    detail::require_points(n);
    if (!(cap_height > 0.0 && cap_height < 2.0)) {
        throw ParameterError("cap_height must lie in (0, 2), got " + std::to_string(cap_height));
    }
    const double z_max = 1.0 - cap_height;

    PortableRng rng(seed);
    Matrix points(n, 3);
    Matrix intrinsic(n, 2);
    Index accepted = 0;
    while (accepted < n) {
        Eigen::Vector3d g(rng.gaussian(), rng.gaussian(), rng.gaussian());
        const double norm = g.norm();
        if (norm == 0.0) {
            continue;
        }
        g /= norm;
        if (g.z() > z_max) {
            continue;
        }
        points.row(accepted) = g.transpose();
        intrinsic(accepted, 0) = std::atan2(g.y(), g.x());
        intrinsic(accepted, 1) = std::acos(std::clamp(g.z(), -1.0, 1.0));
        ++accepted;
    }
    return {DataMatrix(std::move(points)), std::move(intrinsic), "punctured_sphere", seed};
}

/// Swiss roll (t cos t, h, t sin t) with t ~ U[1.5 pi, 4.5 pi], h ~ U[0, height].
inline ManifoldSample swiss_roll(Index n, double height, std::uint64_t seed) {
    detail::require_points(n);
    if (!(height > 0.0) || !std::isfinite(height)) {
        throw ParameterError("swiss roll height must be positive, got " + std::to_string(height));
    }
    constexpr double t_lo = 1.5 * std::numbers::pi;
    constexpr double t_hi = 4.5 * std::numbers::pi;

    PortableRng rng(seed);
    Matrix points(n, 3);
    Matrix intrinsic(n, 2);
    for (Index i = 0; i < n; ++i) {
        const double t = rng.uniform(t_lo, t_hi);
        const double h = rng.uniform(0.0, height);
        points.row(i) << t * std::cos(t), h, t * std::sin(t);
        intrinsic.row(i) << t, h;
    }
    return {DataMatrix(std::move(points)), std::move(intrinsic), "swiss_roll", seed};
}

inline double spiral_t_min() { return 0.5 * std::numbers::pi; }
inline double spiral_t_max(double turns) { return 0.5 * std::numbers::pi + 2.0 * std::numbers::pi * turns; }

/// Archimedean spiral (t cos t, t sin t), t ~ U[pi/2, pi/2 + 2 pi turns].
inline ManifoldSample spiral(Index n, double turns, std::uint64_t seed) {
    detail::require_points(n);
    if (!(turns > 0.0) || !std::isfinite(turns)) {
        throw ParameterError("spiral turns must be positive, got " + std::to_string(turns));
    }
    const double t_lo = spiral_t_min();
    const double t_hi = spiral_t_max(turns);

    PortableRng rng(seed);
    Matrix points(n, 2);
    Matrix intrinsic(n, 1);
    for (Index i = 0; i < n; ++i) {
        const double t = rng.uniform(t_lo, t_hi);
        points.row(i) << t * std::cos(t), t * std::sin(t);
        intrinsic(i, 0) = t;
    }
    return {DataMatrix(std::move(points)), std::move(intrinsic), "spiral", seed};
}

} // namespace datasets
} // namespace lle

#endif
