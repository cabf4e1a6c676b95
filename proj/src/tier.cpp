#include "istn/tier.hpp"

#include <algorithm>
#include <cctype>
#include <numbers>

#include "istn/errors.hpp"

namespace istn {

double aperture_factor_km2(double carrier_hz)
{
    double const a = kSpeedOfLightKmPerS / (4.0 * std::numbers::pi * carrier_hz);
    return a * a;
}

VisibleCap TierConfig::cap() const
{
    if (theta_rad > 0) {
        return visible_cap(shell, theta_rad);
    }
    return visible_cap(shell);
}

AnnulusGeometry TierConfig::annulus() const
{
    return displace(cap(), density_per_km2);
}

double TierConfig::erp_factor() const
{
    return tx_power_w * main_lobe_gain * bias * fading.mean();
}

void TierConfig::validate() const
{
    auto fail = [this](std::string const& what) {
        throw InvalidParameter("tier '" + name + "': " + what);
    };
    if (!(density_per_km2 >= 0)) fail("density must be nonnegative");
    if (!(tx_power_w > 0)) fail("transmit power must be positive");
    if (!(main_lobe_gain > 0)) fail("main-lobe gain must be positive");
    if (!(side_lobe_gain > 0)) fail("side-lobe gain must be positive");
    if (side_lobe_gain > main_lobe_gain) {
        fail("side-lobe gain exceeds main-lobe gain");
    }
    if (!(path_loss_exp >= 2)) fail("path-loss exponent must be >= 2");
    if (!(bias > 0)) fail("bias must be positive");
    if (!(noise_psd_w_per_hz >= 0)) fail("noise PSD must be nonnegative");
    if (!(bandwidth_hz > 0)) fail("bandwidth must be positive");
    (void)cap();
}

TierConfig make_tier(LinkBudget const& budget, FadingLaw fading,
                     double density_per_km2, double theta_rad)
{
    TierConfig t;
    t.name = budget.name;
    t.shell = SphereShell::from_altitude(budget.altitude_km,
                                         budget.earth_radius_km);
    t.theta_rad = theta_rad;
    t.density_per_km2 = density_per_km2;
    t.tx_power_w = dbm_to_watt(budget.tx_power_dbm);
    t.carrier_hz = budget.carrier_ghz * 1e9;
    t.bandwidth_hz = budget.bandwidth_mhz * 1e6;
    double const aperture = aperture_factor_km2(t.carrier_hz);
    t.main_lobe_gain = db_to_linear(budget.tx_main_gain_dbi) *
                       db_to_linear(budget.user_main_gain_dbi) * aperture;
    t.side_lobe_gain = db_to_linear(budget.tx_side_gain_dbi) *
                       db_to_linear(budget.user_side_gain_dbi) * aperture;
    t.path_loss_exp = budget.path_loss_exp;
    t.bias = budget.bias;
    t.fading = std::move(fading);
    t.noise_psd_w_per_hz = dbm_to_watt(budget.noise_psd_dbm_per_hz);
    t.validate();
    return t;
}

double density_for_mean_count(TierConfig const& tier, double mean_count)
{
    return mean_count / tier.cap().area_km2();
}

double mean_visible_count(TierConfig const& tier)
{
    return tier.density_per_km2 * tier.cap().area_km2();
}

std::vector<TierConfig> interference_limited(std::vector<TierConfig> tiers)
{
    for (auto& t : tiers) {
        t.noise_psd_w_per_hz = 0;
    }
    return tiers;
}

namespace presets {

LinkBudget terrestrial()
{
    LinkBudget b;
    b.name = "terrestrial";
    b.altitude_km = 0.03;
    b.carrier_ghz = 3.5;
    b.bandwidth_mhz = 100;
    b.tx_power_dbm = 46;
    b.tx_main_gain_dbi = 0;
    b.tx_side_gain_dbi = 0;
    b.path_loss_exp = 4;
    return b;
}

LinkBudget satellite()
{
    LinkBudget b;
    b.name = "satellite";
    b.altitude_km = 530;
    b.carrier_ghz = 1.9925;
    b.bandwidth_mhz = 5;
    b.tx_power_dbm = 50;
    b.tx_main_gain_dbi = 38;
    b.tx_side_gain_dbi = 28;
    b.path_loss_exp = 2;
    return b;
}

ShadowedRicianParams frequent_heavy_shadowing()
{
    return ShadowedRicianParams::make(1, 0.063, 8.97e-4);
}

ShadowedRicianParams average_shadowing()
{
    return ShadowedRicianParams::make(10, 0.126, 0.835);
}

ShadowedRicianParams infrequent_light_shadowing()
{
    return ShadowedRicianParams::make(19, 0.158, 1.29);
}

ShadowedRicianParams shadowing(std::string const& name)
{
    std::string key = name;
    std::transform(key.begin(), key.end(), key.begin(),
                   [](unsigned char c) { return std::toupper(c); });
    if (key == "FHS") return frequent_heavy_shadowing();
    if (key == "AS") return average_shadowing();
    if (key == "ILS") return infrequent_light_shadowing();
    throw InvalidParameter("unknown shadowing preset '" + name + "'");
}

std::vector<TierConfig> two_tier(ShadowedRicianParams const& shadowing,
                                 double terrestrial_mean_count,
                                 double satellite_mean_count)
{
    auto ter = make_tier(terrestrial(), FadingLaw::rayleigh(), 0.0);
    ter.density_per_km2 = density_for_mean_count(ter, terrestrial_mean_count);
    auto sat = make_tier(satellite(), FadingLaw(shadowing), 0.0);
    sat.density_per_km2 = density_for_mean_count(sat, satellite_mean_count);
    return {ter, sat};
}

}  // namespace presets

}  // namespace istn
