#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

#include "istn/rng.hpp"

namespace istn {

inline constexpr double kEarthRadiusKm = 6371.0;

struct Vec3 {
    double x = 0;
    double y = 0;
    double z = 0;

    friend Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
    friend Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
    friend Vec3 operator*(double s, Vec3 a) { return {s * a.x, s * a.y, s * a.z}; }
};

inline double dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline double norm(Vec3 a) { return std::sqrt(dot(a, a)); }
inline Vec3 cross(Vec3 a, Vec3 b)
{
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

struct Vec2 {
    double x = 0;
    double y = 0;
};

/// A base-station shell of radius R_k concentric with the user sphere R_E.
class SphereShell {
  public:
    //! Throws InvalidParameter unless 0 < earth_radius_km <= radius_km.
    SphereShell(double radius_km, double earth_radius_km = kEarthRadiusKm);

    static SphereShell from_altitude(double altitude_km,
                                     double earth_radius_km = kEarthRadiusKm)
    {
        return SphereShell(earth_radius_km + altitude_km, earth_radius_km);
    }

    double radius_km() const { return radius_km_; }
    double earth_radius_km() const { return earth_radius_km_; }
    double altitude_km() const { return radius_km_ - earth_radius_km_; }

  private:
    double radius_km_;
    double earth_radius_km_;
};

/// Portion of a shell visible from the typical user at (0, 0, R_E).
struct VisibleCap {
    SphereShell shell;
    double theta_max_rad;
    double theta_rad;

    //! 1 - cos(theta), evaluated without cancellation for tiny caps.
    double one_minus_cos_theta() const;
    double area_km2() const;
};

/// Displaced planar ring equivalent to a visible cap.
struct AnnulusGeometry {
    double r_min_km;
    double r_max_km;
    double density_per_km2;

    double area_km2() const;
    //! Expected number of points, density times ring area.
    double mean_count() const { return density_per_km2 * area_km2(); }
};

struct PointSet3D {
    std::size_t tier_index = 0;
    std::vector<Vec3> points;
};

struct PointSet2D {
    std::size_t tier_index = 0;
    std::vector<Vec2> points;
};

//! Typical user location (0, 0, R_E).
inline Vec3 typical_user(SphereShell const& shell)
{
    return {0.0, 0.0, shell.earth_radius_km()};
}

//! Maximum visible polar angle arccos(R_E / R_k).
double max_visible_angle(SphereShell const& shell);

VisibleCap visible_cap(SphereShell const& shell,
                       std::optional<double> theta_override = std::nullopt);

//! Cap-to-ring displacement with density scaled by R_k / R_E.
AnnulusGeometry displace(VisibleCap const& cap, double density_per_km2);

//! Number of points drawn for a PPP with the given mean; mean 0 gives 0.
std::size_t sample_poisson(double mean, Rng& rng);

PointSet3D sample_cap_ppp(VisibleCap const& cap, double density_per_km2,
                          Rng& rng, std::size_t tier_index = 0);

PointSet2D sample_annulus_ppp(AnnulusGeometry const& annulus, Rng& rng,
                              std::size_t tier_index = 0);

//! Distance of a single uniform point of the ring (radius law 2r/(b^2-a^2)).
inline double sample_ring_radius(double r_min, double r_max, Rng& rng)
{
    double const lo = r_min * r_min;
    return std::sqrt(lo + rng.uniform() * (r_max * r_max - lo));
}

double user_distance(Vec3 const& point, Vec3 const& user);

}  // namespace istn
