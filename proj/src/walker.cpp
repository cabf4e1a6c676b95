#include "istn/walker.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "istn/errors.hpp"

namespace istn {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kDeg = kPi / 180.0;

Vec3 unit(Vec3 v) { return (1.0 / norm(v)) * v; }

Vec3 from_lat_lon(double lat_deg, double lon_deg)
{
    double const lat = lat_deg * kDeg;
    double const lon = lon_deg * kDeg;
    return {std::cos(lat) * std::cos(lon), std::cos(lat) * std::sin(lon),
            std::sin(lat)};
}

// Orthonormal pair spanning the plane perpendicular to unit vector a.
void tangent_basis(Vec3 a, Vec3& e1, Vec3& e2)
{
    Vec3 const helper = std::abs(a.z) < 0.9 ? Vec3{0, 0, 1} : Vec3{1, 0, 0};
    e1 = unit(cross(helper, a));
    e2 = cross(a, e1);
}

std::size_t nearest_direction(std::vector<Vec3> const& points, Vec3 dir)
{
    std::size_t best = 0;
    double best_dot = -2.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        double const d = dot(points[i], dir);
        if (d > best_dot) {
            best_dot = d;
            best = i;
        }
    }
    return best;
}

void fill_visible(std::vector<Vec3> const& points, Vec3 user,
                  double earth_radius_km, TierSample& out)
{
    out.distances_km.clear();
    // Visible iff the polar angle from the user is within arccos(R_E / R):
    // <p, u> >= R_E^2 for any shell radius R.
    double const limit = earth_radius_km * earth_radius_km;
    for (auto const& p : points) {
        if (dot(p, user) >= limit) {
            out.distances_km.push_back(user_distance(p, user));
        }
    }
    if (out.distances_km.size() > 1) {
        auto it = std::min_element(out.distances_km.begin(), out.distances_km.end());
        std::iter_swap(out.distances_km.begin(), it);
    }
}

SphereShell terrestrial_shell(WalkerStarConfig const& cfg)
{
    return SphereShell::from_altitude(cfg.terrestrial_height_km, cfg.earth_radius_km);
}

SphereShell satellite_shell(WalkerStarConfig const& cfg)
{
    return SphereShell::from_altitude(cfg.altitude_km, cfg.earth_radius_km);
}

}  // namespace

void WalkerStarConfig::validate() const
{
    std::vector<std::string> problems;
    if (n_sats < 0) problems.push_back("n_sats must be nonnegative");
    if (n_sats > 0 && n_orbits <= 0) problems.push_back("n_orbits must be positive");
    if (n_sats > 0 && n_orbits > 0 && n_sats % n_orbits != 0) {
        problems.push_back("n_sats (" + std::to_string(n_sats) +
                           ") is not divisible by n_orbits (" +
                           std::to_string(n_orbits) + ")");
    }
    if (!(altitude_km > 0)) problems.push_back("altitude_km must be positive");
    if (!(terrestrial_height_km > 0)) {
        problems.push_back("terrestrial_height_km must be positive");
    }
    if (terrestrial_spacing_km < 0) {
        problems.push_back("terrestrial_spacing_km must be nonnegative");
    }
    if (terrestrial_spacing_km == 0 && !(terrestrial_mean_count > 0)) {
        problems.push_back("terrestrial_mean_count must be positive");
    }
    if (!(user_search_radius_deg > 0 && user_search_radius_deg < 90)) {
        problems.push_back("user_search_radius_deg must lie in (0, 90)");
    }
    if (!(earth_radius_km > 0)) problems.push_back("earth_radius_km must be positive");
    if (!problems.empty()) {
        std::string msg = "invalid Walker-star configuration:";
        for (auto const& p : problems) {
            msg += "\n  " + p;
        }
        throw ConfigError(msg);
    }
}

double WalkerStarConfig::spacing_km() const
{
    if (terrestrial_spacing_km > 0) {
        return terrestrial_spacing_km;
    }
    return std::sqrt(visible_cap(terrestrial_shell(*this)).area_km2() /
                     terrestrial_mean_count);
}

WalkerGeometry walker_star_geometry(WalkerStarConfig const& cfg, Rng& rng)
{
    cfg.validate();
    WalkerGeometry g;
    double const re = cfg.earth_radius_km;
    Vec3 const reference = from_lat_lon(cfg.reference_lat_deg, cfg.reference_lon_deg);
    Vec3 user_dir = reference;

    if (cfg.n_sats > 0) {
        double const rs = re + cfg.altitude_km;
        int const per_plane = cfg.n_sats / cfg.n_orbits;
        double const phase0 = 2.0 * kPi / per_plane * rng.uniform();
        g.satellites.reserve(static_cast<std::size_t>(cfg.n_sats));
        for (int p = 0; p < cfg.n_orbits; ++p) {
            double const raan = kPi * p / cfg.n_orbits;
            double const plane_shift = 2.0 * kPi * cfg.phasing_factor * p / cfg.n_sats;
            for (int s = 0; s < per_plane; ++s) {
                double const u = phase0 + 2.0 * kPi * s / per_plane + plane_shift;
                g.satellites.push_back({rs * std::cos(u) * std::cos(raan),
                                        rs * std::cos(u) * std::sin(raan),
                                        rs * std::sin(u)});
            }
        }
        g.reference_index = nearest_direction(g.satellites, reference);
        Vec3 const axis = unit(g.satellites[g.reference_index]);
        Vec3 e1;
        Vec3 e2;
        tangent_basis(axis, e1, e2);
        double const span = 1.0 - std::cos(cfg.user_search_radius_deg * kDeg);
        constexpr int kMaxAttempts = 100000;
        int attempt = 0;
        for (; attempt < kMaxAttempts; ++attempt) {
            double const t = span * rng.uniform();
            double const sin_polar = std::sqrt(t * (2.0 - t));
            double const az = 2.0 * kPi * rng.uniform();
            Vec3 const candidate =
                (1.0 - t) * axis +
                sin_polar * (std::cos(az) * e1 + std::sin(az) * e2);
            if (nearest_direction(g.satellites, candidate) == g.reference_index) {
                user_dir = unit(candidate);
                break;
            }
        }
        if (attempt == kMaxAttempts) {
            throw PreconditionViolation(
                "no user position found in the reference satellite's cell");
        }
    }
    g.user = re * user_dir;

    double const spacing = cfg.spacing_km();
    auto const ter_cap = visible_cap(terrestrial_shell(cfg));
    double const r_ter = ter_cap.shell.radius_km();
    double const reach = r_ter * std::sin(ter_cap.theta_max_rad) + spacing;
    int const half = static_cast<int>(std::ceil(reach / spacing)) + 1;
    double const ox = rng.uniform();
    double const oy = rng.uniform();
    Vec3 e1;
    Vec3 e2;
    tangent_basis(user_dir, e1, e2);
    for (int i = -half; i <= half; ++i) {
        for (int j = -half; j <= half; ++j) {
            Vec3 const p = g.user + ((i - ox) * spacing) * e1 + ((j - oy) * spacing) * e2;
            g.terrestrial.push_back((r_ter / norm(p)) * p);
        }
    }
    return g;
}

NetworkSnapshot walker_star_snapshot(WalkerStarConfig const& cfg,
                                     std::vector<TierConfig> const& tiers,
                                     Rng& rng)
{
    if (tiers.size() != 2) {
        throw InvalidParameter("the grid model needs a terrestrial and a satellite tier");
    }
    auto const g = walker_star_geometry(cfg, rng);
    NetworkSnapshot snap;
    snap.tiers.resize(2);
    fill_visible(g.terrestrial, g.user, cfg.earth_radius_km, snap.tiers[0]);
    fill_visible(g.satellites, g.user, cfg.earth_radius_km, snap.tiers[1]);
    if (!g.satellites.empty()) {
        double const ref_distance = user_distance(g.satellites[g.reference_index], g.user);
        if (snap.tiers[1].empty() || snap.tiers[1].nearest_km() != ref_distance) {
            throw PreconditionViolation("reference satellite is not the nearest one");
        }
    }
    evaluate_snapshot(tiers, rng, snap);
    return snap;
}

MatchedDensity matched_density(WalkerStarConfig const& cfg,
                               std::uint64_t n_probe, std::uint64_t seed)
{
    if (n_probe == 0) {
        throw InvalidParameter("at least one probe snapshot is required");
    }
    double ter_sum = 0.0;
    double sat_sum = 0.0;
    TierSample scratch;
    for (std::uint64_t i = 0; i < n_probe; ++i) {
        Rng rng(seed, i);
        auto const g = walker_star_geometry(cfg, rng);
        fill_visible(g.terrestrial, g.user, cfg.earth_radius_km, scratch);
        ter_sum += static_cast<double>(scratch.distances_km.size());
        fill_visible(g.satellites, g.user, cfg.earth_radius_km, scratch);
        sat_sum += static_cast<double>(scratch.distances_km.size());
    }
    MatchedDensity out;
    double const n = static_cast<double>(n_probe);
    out.mean_visible_terrestrial = ter_sum / n;
    out.mean_visible_satellites = sat_sum / n;
    out.terrestrial_density_per_km2 =
        out.mean_visible_terrestrial / visible_cap(terrestrial_shell(cfg)).area_km2();
    out.satellite_density_per_km2 =
        out.mean_visible_satellites / visible_cap(satellite_shell(cfg)).area_km2();
    return out;
}

std::vector<TierConfig> matched_ppp_tiers(WalkerStarConfig const& cfg,
                                          std::vector<TierConfig> tiers,
                                          MatchedDensity const& density)
{
    if (tiers.size() != 2) {
        throw InvalidParameter("the grid model needs a terrestrial and a satellite tier");
    }
    tiers[0].shell = terrestrial_shell(cfg);
    tiers[0].theta_rad = 0;
    tiers[0].density_per_km2 = density.terrestrial_density_per_km2;
    tiers[1].shell = satellite_shell(cfg);
    tiers[1].theta_rad = 0;
    tiers[1].density_per_km2 = density.satellite_density_per_km2;
    return tiers;
}

McCoverage estimate_grid_coverage(WalkerStarConfig const& cfg,
                                  std::vector<TierConfig> const& tiers,
                                  std::vector<double> const& thresholds_db,
                                  McOptions const& opts)
{
    cfg.validate();
    auto out = detail::estimate_coverage_with(
        2, thresholds_db, opts, [&](std::uint64_t index, NetworkSnapshot& snap) {
            Rng rng(opts.seed, index);
            snap = walker_star_snapshot(cfg, tiers, rng);
        });
    out.curve.method = CoverageMethod::GridBaseline;
    return out;
}

}  // namespace istn
