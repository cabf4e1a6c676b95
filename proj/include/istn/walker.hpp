#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "istn/geometry.hpp"
#include "istn/simulator.hpp"
#include "istn/tier.hpp"

namespace istn {

/*!
 * Deterministic Walker-star constellation plus a regular terrestrial grid.
 *
 * Orbital planes are polar with ascending nodes spread evenly over 180
 * degrees; satellites are evenly spaced within each plane, and plane p is
 * shifted by phasing_factor * 360 / n_sats degrees relative to plane p-1.
 * Each snapshot adds a common random phase to every satellite.
 *
 * The terrestrial tier is a square lattice on the tangent plane at the
 * user, lifted to the terrestrial shell, with a uniformly random offset of
 * the user inside its lattice cell.
 */
struct WalkerStarConfig {
    int n_sats = 1000;
    int n_orbits = 20;
    double altitude_km = 530;
    int phasing_factor = 1;
    double reference_lat_deg = 36;
    double reference_lon_deg = 126;
    //! Lattice spacing; 0 derives it from terrestrial_mean_count.
    double terrestrial_spacing_km = 0;
    double terrestrial_mean_count = 50;
    double terrestrial_height_km = 0.03;
    //! Angular radius around the reference sub-satellite point searched
    //! for user positions; must cover the reference satellite's cell.
    double user_search_radius_deg = 8;
    double earth_radius_km = kEarthRadiusKm;

    //! Throws ConfigError listing every violated rule.
    void validate() const;
    double spacing_km() const;
};

/// Positions of one grid snapshot in Earth-centred coordinates.
struct WalkerGeometry {
    Vec3 user;
    std::vector<Vec3> satellites;
    std::vector<Vec3> terrestrial;
    std::size_t reference_index = 0;  // meaningful when satellites exist
};

WalkerGeometry walker_star_geometry(WalkerStarConfig const& cfg, Rng& rng);

//! tiers[0] supplies the terrestrial link budget and fading, tiers[1] the
//! satellite ones; densities and shells in `tiers` are ignored.
NetworkSnapshot walker_star_snapshot(WalkerStarConfig const& cfg,
                                     std::vector<TierConfig> const& tiers,
                                     Rng& rng);

struct MatchedDensity {
    double terrestrial_density_per_km2 = 0;
    double satellite_density_per_km2 = 0;
    double mean_visible_terrestrial = 0;
    double mean_visible_satellites = 0;
};

//! Average visible counts over n_probe grid snapshots, converted to PPP
//! densities on the corresponding shells.
MatchedDensity matched_density(WalkerStarConfig const& cfg,
                               std::uint64_t n_probe, std::uint64_t seed);

//! Copy of `tiers` with shells from `cfg` and the matched densities.
std::vector<TierConfig> matched_ppp_tiers(WalkerStarConfig const& cfg,
                                          std::vector<TierConfig> tiers,
                                          MatchedDensity const& density);

McCoverage estimate_grid_coverage(WalkerStarConfig const& cfg,
                                  std::vector<TierConfig> const& tiers,
                                  std::vector<double> const& thresholds_db,
                                  McOptions const& opts);

}  // namespace istn
