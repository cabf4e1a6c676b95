#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "istn/fading.hpp"
#include "istn/geometry.hpp"

namespace istn {

inline constexpr double kSpeedOfLightKmPerS = 3.0e5;

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double x) { return 10.0 * std::log10(x); }
inline double dbm_to_watt(double dbm) { return db_to_linear(dbm - 30.0); }
inline double watt_to_dbm(double w) { return linear_to_db(w) + 30.0; }

//! Free-space aperture factor (c / (4 pi f))^2 in km^2.
double aperture_factor_km2(double carrier_hz);

/*!
 * Physical and statistical description of one network tier.
 *
 * main_lobe_gain and side_lobe_gain already combine the BS gain, the user
 * gain and the aperture factor (c / 4 pi f)^2, so that P * G * r^-alpha is
 * the received power with r in km.
 */
struct TierConfig {
    std::string name;
    SphereShell shell{kEarthRadiusKm + 1.0};
    double theta_rad = 0;  // 0 selects the maximum visible angle
    double density_per_km2 = 0;
    double tx_power_w = 1;
    double carrier_hz = 1e9;
    double bandwidth_hz = 1e6;
    double main_lobe_gain = 1;
    double side_lobe_gain = 1;
    double path_loss_exp = 2;
    double bias = 1;
    FadingLaw fading = FadingLaw::rayleigh();
    double noise_psd_w_per_hz = 0;

    VisibleCap cap() const;
    AnnulusGeometry annulus() const;
    //! Interferer-to-serving antenna gain ratio.
    double gain_ratio() const { return side_lobe_gain / main_lobe_gain; }
    double noise_power_w() const { return noise_psd_w_per_hz * bandwidth_hz; }
    //! Noise normalized by the serving link budget: N0 W / (G P).
    double normalized_noise() const
    {
        return noise_power_w() / (main_lobe_gain * tx_power_w);
    }
    //! ERP factor P G B E used by the association rule.
    double erp_factor() const;

    //! Throws InvalidParameter listing the first violated invariant.
    void validate() const;
};

//! Inputs in the link-budget units used by the reference parameter table.
struct LinkBudget {
    std::string name;
    double altitude_km = 0;
    double earth_radius_km = kEarthRadiusKm;
    double carrier_ghz = 1;
    double bandwidth_mhz = 1;
    double tx_power_dbm = 30;
    double tx_main_gain_dbi = 0;
    double tx_side_gain_dbi = 0;
    double user_main_gain_dbi = 0;
    double user_side_gain_dbi = 0;
    double path_loss_exp = 2;
    double bias = 1;
    double noise_psd_dbm_per_hz = -174;
};

TierConfig make_tier(LinkBudget const& budget, FadingLaw fading,
                     double density_per_km2, double theta_rad = 0);

//! Density on the shell that puts `mean_count` points in the visible cap.
double density_for_mean_count(TierConfig const& tier, double mean_count);
//! Mean number of visible points (density times cap area).
double mean_visible_count(TierConfig const& tier);

//! Copy of the tiers with noise removed (interference-limited regime).
std::vector<TierConfig> interference_limited(std::vector<TierConfig> tiers);

namespace presets {

// Reference two-tier link budgets (terrestrial macro cell, LEO satellite).
LinkBudget terrestrial();
LinkBudget satellite();

ShadowedRicianParams frequent_heavy_shadowing();
ShadowedRicianParams average_shadowing();
ShadowedRicianParams infrequent_light_shadowing();

//! Looks up "FHS", "AS", "ILS" (case-insensitive); throws InvalidParameter.
ShadowedRicianParams shadowing(std::string const& name);

//! Terrestrial Rayleigh + satellite shadowed-Rician pair with the given
//! mean visible counts per tier.
std::vector<TierConfig> two_tier(ShadowedRicianParams const& shadowing,
                                 double terrestrial_mean_count,
                                 double satellite_mean_count);

}  // namespace presets

}  // namespace istn
