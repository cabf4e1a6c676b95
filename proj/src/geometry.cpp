#include "istn/geometry.hpp"

#include <algorithm>
#include <numbers>
#include <random>
#include <string>

#include "istn/errors.hpp"

namespace istn {

SphereShell::SphereShell(double radius_km, double earth_radius_km)
    : radius_km_(radius_km), earth_radius_km_(earth_radius_km)
{
    if (!(earth_radius_km > 0) || !std::isfinite(earth_radius_km)) {
        throw InvalidParameter("earth radius must be positive");
    }
    if (!(radius_km >= earth_radius_km) || !std::isfinite(radius_km)) {
        throw InvalidParameter("shell radius " + std::to_string(radius_km) +
                               " km is below the earth radius");
    }
}

double VisibleCap::one_minus_cos_theta() const
{
    double const h = std::sin(0.5 * theta_rad);
    return 2.0 * h * h;
}

double VisibleCap::area_km2() const
{
    double const r = shell.radius_km();
    return 2.0 * std::numbers::pi * r * r * one_minus_cos_theta();
}

double AnnulusGeometry::area_km2() const
{
    return std::numbers::pi * (r_max_km - r_min_km) * (r_max_km + r_min_km);
}

double max_visible_angle(SphereShell const& shell)
{
    // acos near 1 loses digits; the half-angle form keeps them.
    double const ratio = shell.earth_radius_km() / shell.radius_km();
    return 2.0 * std::asin(std::sqrt(0.5 * (1.0 - ratio)));
}

VisibleCap visible_cap(SphereShell const& shell,
                       std::optional<double> theta_override)
{
    double const theta_max = max_visible_angle(shell);
    if (!(theta_max > 0)) {
        throw DegenerateShell("shell radius equals the earth radius; the "
                              "visible cap is empty");
    }
    double theta = theta_max;
    if (theta_override) {
        theta = *theta_override;
        if (!(theta > 0) || theta > theta_max * (1 + 1e-12)) {
            throw OutOfRangeTheta("visible angle " + std::to_string(theta) +
                                  " rad outside (0, " +
                                  std::to_string(theta_max) + "]");
        }
        theta = std::min(theta, theta_max);
    }
    return VisibleCap{shell, theta_max, theta};
}

AnnulusGeometry displace(VisibleCap const& cap, double density_per_km2)
{
    if (!(density_per_km2 >= 0) || !std::isfinite(density_per_km2)) {
        throw InvalidParameter("density must be nonnegative");
    }
    double const rk = cap.shell.radius_km();
    double const re = cap.shell.earth_radius_km();
    double const r_min = rk - re;
    // R_max^2 = R_k^2 + R_E^2 - 2 R_E R_k cos(theta)
    //         = (R_k - R_E)^2 + 2 R_E R_k (1 - cos(theta))
    double const r_max =
        std::sqrt(r_min * r_min + 2.0 * re * rk * cap.one_minus_cos_theta());
    return AnnulusGeometry{r_min, r_max, density_per_km2 * rk / re};
}

std::size_t sample_poisson(double mean, Rng& rng)
{
    if (!(mean > 0)) {
        return 0;
    }
    std::poisson_distribution<std::size_t> dist(mean);
    return dist(rng);
}

PointSet3D sample_cap_ppp(VisibleCap const& cap, double density_per_km2,
                          Rng& rng, std::size_t tier_index)
{
    PointSet3D out;
    out.tier_index = tier_index;
    auto const n = sample_poisson(density_per_km2 * cap.area_km2(), rng);
    out.points.reserve(n);
    double const r = cap.shell.radius_km();
    double const span = cap.one_minus_cos_theta();
    for (std::size_t i = 0; i < n; ++i) {
        // t = 1 - cos(polar angle), uniform on [0, 1 - cos(theta)].
        double const t = rng.uniform() * span;
        double const sin_polar = std::sqrt(t * (2.0 - t));
        double const azimuth = 2.0 * std::numbers::pi * rng.uniform();
        out.points.push_back({r * sin_polar * std::cos(azimuth),
                              r * sin_polar * std::sin(azimuth),
                              r * (1.0 - t)});
    }
    return out;
}

PointSet2D sample_annulus_ppp(AnnulusGeometry const& annulus, Rng& rng,
                              std::size_t tier_index)
{
    PointSet2D out;
    out.tier_index = tier_index;
    auto const n = sample_poisson(annulus.mean_count(), rng);
    out.points.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        double const radius =
            sample_ring_radius(annulus.r_min_km, annulus.r_max_km, rng);
        double const azimuth = 2.0 * std::numbers::pi * rng.uniform();
        out.points.push_back(
            {radius * std::cos(azimuth), radius * std::sin(azimuth)});
    }
    return out;
}

double user_distance(Vec3 const& point, Vec3 const& user)
{
    return norm(point - user);
}

}  // namespace istn
