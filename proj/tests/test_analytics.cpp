#include <algorithm>
#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "istn/analytics.hpp"
#include "istn/errors.hpp"
#include "istn/quadrature.hpp"
#include "oracles.hpp"

using namespace istn;

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<TierConfig> two_tier(char const* preset, double ter, double sat)
{
    return presets::two_tier(presets::shadowing(preset), ter, sat);
}

std::vector<TierConfig> rayleigh_pair(double sat_altitude, double sat_mean)
{
    auto tb = presets::terrestrial();
    tb.path_loss_exp = 2;
    auto sb = presets::satellite();
    sb.path_loss_exp = 2;
    sb.altitude_km = sat_altitude;
    auto ter = make_tier(tb, FadingLaw::rayleigh(), 0);
    ter.density_per_km2 = density_for_mean_count(ter, 30);
    auto sat = make_tier(sb, FadingLaw::rayleigh(), 0);
    sat.density_per_km2 = density_for_mean_count(sat, sat_mean);
    return interference_limited({ter, sat});
}

// Probability that no BS of tier j is received with a higher ERP than the
// anchor's nearest BS at distance r (zero once the whole j ring competes).
double competitor_factor(std::vector<TierConfig> const& tiers, std::size_t k, std::size_t j,
                         double r)
{
    auto const rj = tiers[j].annulus();
    double const ratio = tiers[j].erp_factor() / tiers[k].erp_factor();
    double const t = std::pow(ratio * std::pow(r, tiers[k].path_loss_exp),
                              1 / tiers[j].path_loss_exp);
    if (t <= rj.r_min_km) return 1;
    if (t > rj.r_max_km) return 0;
    return std::exp(-kPi * rj.density_per_km2 * (t * t - rj.r_min_km * rj.r_min_km));
}

// Coverage of Rayleigh tiers from the nearest-distance law, the competitor
// factors and the Laplace oracle evaluated at T r^alpha / mean power.
std::vector<double> rayleigh_coverage_oracle(std::vector<TierConfig> const& tiers, double t)
{
    std::vector<double> out;
    for (std::size_t k = 0; k < tiers.size(); ++k) {
        auto const ring = tiers[k].annulus();
        double const lt = ring.density_per_km2;
        auto f = [&](double r) {
            double w = 2 * kPi * lt * r *
                       std::exp(-kPi * lt * (r * r - ring.r_min_km * ring.r_min_km));
            for (std::size_t j = 0; j < tiers.size(); ++j) {
                if (j != k) w *= competitor_factor(tiers, k, j, r);
            }
            if (w == 0) return 0.0;
            double const s = t * std::pow(r, tiers[k].path_loss_exp) / tiers[k].fading.mean();
            return w * test::laplace_oracle(tiers[k], r, s).real();
        };
        std::vector<double> knots;
        for (double x : association_knots(tiers, k)) knots.push_back(x);
        out.push_back(quad::integrate(f, ring.r_min_km, ring.r_max_km, {1e-8, 1e-13, 4000},
                                      knots));
    }
    return out;
}

double max_gap(std::vector<TierConfig> const& tiers, KappaPolicy const& kappa)
{
    double worst = 0;
    for (double db = -10; db <= 30; db += 2.5) {
        double const t = db_to_linear(db);
        worst = std::max(worst, std::abs(coverage_exact(tiers, t).total -
                                         coverage_approx(tiers, t, kappa).total));
    }
    return worst;
}

}  // namespace

// ---------------------------------------------------------------------------
// Distance laws and association
// ---------------------------------------------------------------------------

TEST(FirstTouch, PdfIntegratesToOneAndMatchesCdf)
{
    for (auto const& tier : two_tier("AS", 50, 10)) {
        auto const ring = tier.annulus();
        double const total = quad::integrate([&](double r) { return first_touch_pdf(ring, r); },
                                             ring.r_min_km, ring.r_max_km, {1e-12, 1e-15, 2000});
        EXPECT_NEAR(total, 1.0, 1e-10);
        double const mid = 0.5 * (ring.r_min_km + ring.r_max_km);
        double const part = quad::integrate([&](double r) { return first_touch_pdf(ring, r); },
                                            ring.r_min_km, mid, {1e-12, 1e-15, 2000});
        EXPECT_NEAR(first_touch_cdf(ring, mid), part, 1e-10);
        EXPECT_NEAR(void_probability(ring), std::exp(-ring.mean_count()), 1e-15);
    }
}

TEST(Association, ConditionalDistancePdfIntegratesToOne)
{
    auto const tiers = two_tier("AS", 50, 10);
    for (std::size_t k = 0; k < 2; ++k) {
        auto const ring = tiers[k].annulus();
        auto const knots = association_knots(tiers, k);
        double const total = quad::integrate(
            [&](double r) { return conditional_distance_pdf(tiers, k, r); }, ring.r_min_km,
            ring.r_max_km, {1e-10, 1e-15, 4000}, knots);
        EXPECT_NEAR(total, 1.0, 1e-7) << k;
    }
}

TEST(Association, FactorMatchesDirectCompetitorLaw)
{
    auto const tiers = two_tier("ILS", 50, 10);
    for (std::size_t k = 0; k < 2; ++k) {
        auto const ring = tiers[k].annulus();
        for (int i = 0; i <= 20; ++i) {
            double const r = ring.r_min_km + (ring.r_max_km - ring.r_min_km) * i / 20.0;
            EXPECT_NEAR(association_factor(tiers, k, 1 - k, r), competitor_factor(tiers, k, 1 - k, r),
                        1e-12);
        }
    }
}

TEST(Association, VoidAwareMassesAndEmptyNetworkSumToOne)
{
    AnalyticOptions opts;
    opts.void_aware_tail = true;
    for (double sat : {0.5, 10.0, 50.0}) {
        auto const tiers = two_tier("AS", 3, sat);
        double sum = void_probability(tiers[0].annulus()) * void_probability(tiers[1].annulus());
        for (std::size_t k = 0; k < 2; ++k) sum += association_mass(tiers, k, opts);
        EXPECT_NEAR(sum, 1.0, 1e-7) << sat;
    }
}

// The default factor treats a competitor threshold beyond R_max,j as a
// certain loss even when tier j is empty, so it can only lose mass.
TEST(Association, DefaultTailNeverExceedsVoidAwareTail)
{
    AnalyticOptions aware;
    aware.void_aware_tail = true;
    for (double sat : {0.5, 10.0, 50.0}) {
        auto const tiers = two_tier("AS", 3, sat);
        for (std::size_t k = 0; k < 2; ++k) {
            EXPECT_LE(association_mass(tiers, k), association_mass(tiers, k, aware) + 1e-12);
        }
        double const sum = association_mass(tiers, 0) + association_mass(tiers, 1);
        EXPECT_LE(sum, 1.0 + 1e-9);
    }
    // With a dense competitor the two agree closely.
    auto const dense = two_tier("AS", 50, 10);
    EXPECT_NEAR(association_mass(dense, 0), association_mass(dense, 0, aware), 1e-4);
}

TEST(Association, BiasActsLikeTransmitPower)
{
    auto a = two_tier("AS", 50, 10);
    auto b = a;
    a[1].bias = 3.0;
    b[1].tx_power_w *= 3.0;
    for (std::size_t k = 0; k < 2; ++k) {
        EXPECT_NEAR(association_mass(a, k), association_mass(b, k), 1e-12);
    }
    // A common bias on every tier changes nothing.
    auto c = two_tier("AS", 50, 10);
    auto d = c;
    d[0].bias = d[1].bias = 7.0;
    EXPECT_NEAR(association_mass(c, 0), association_mass(d, 0), 1e-12);
}

TEST(Association, TerrestrialShareGrowsWithTerrestrialBias)
{
    auto tiers = two_tier("AS", 50, 10);
    double prev = -1;
    for (double b : {0.01, 0.1, 1.0, 10.0, 100.0}) {
        tiers[0].bias = b;
        double const share = association_mass(tiers, 0);
        EXPECT_GT(share, prev);
        prev = share;
    }
}

TEST(Association, StrongerSatelliteFadingMeanPullsUsersAway)
{
    double const fhs = association_mass(two_tier("FHS", 50, 10), 0);
    double const as = association_mass(two_tier("AS", 50, 10), 0);
    double const ils = association_mass(two_tier("ILS", 50, 10), 0);
    EXPECT_GT(fhs, as);
    EXPECT_GT(as, ils);
}

// ---------------------------------------------------------------------------
// Laplace transform and its derivatives
// ---------------------------------------------------------------------------

TEST(Laplace, MatchesGeneratingFunctionalOracle)
{
    for (char const* preset : {"FHS", "AS", "ILS"}) {
        auto const tiers = two_tier(preset, 50, 10);
        for (std::size_t k = 0; k < 2; ++k) {
            auto const ring = tiers[k].annulus();
            double const r = ring.r_min_km + 0.1 * (ring.r_max_km - ring.r_min_km);
            double const scale = std::pow(r, tiers[k].path_loss_exp);
            for (double s : {0.1 * scale, scale, 10 * scale}) {
                double const ref = test::laplace_oracle(tiers[k], r, s).real();
                EXPECT_NEAR(laplace_interference(tiers[k], r, s) / ref, 1.0, 1e-8)
                    << preset << " k=" << k << " s=" << s;
            }
        }
    }
}

TEST(Laplace, BatchMatchesSingleEvaluations)
{
    auto const tier = two_tier("AS", 50, 10)[1];
    double const r = 700;
    std::vector<double> const s{1e4, 1e5, 1e6};
    auto const batch = laplace_batch(tier, r, s);
    for (std::size_t i = 0; i < s.size(); ++i) {
        EXPECT_NEAR(batch[i], laplace_interference(tier, r, s[i]), 1e-12);
    }
}

TEST(Laplace, DerivativesMatchCauchyOracleUpToNinthOrder)
{
    auto const tier = two_tier("AS", 50, 10)[1];
    auto const ring = tier.annulus();
    Rng rng(99);
    for (int point = 0; point < 5; ++point) {
        double const r = ring.r_min_km + rng.uniform() * 0.5 * (ring.r_max_km - ring.r_min_km);
        // Put s E[X] in [1, 20] so that every order up to 9 carries weight.
        double const mean = -laplace_derivatives(tier, r, 0.0, 1)[1];
        double const s = (1 + 19 * rng.uniform()) / mean;
        auto const d = laplace_derivatives(tier, r, s, 9);
        auto const ref = test::cauchy_derivatives(tier, r, s, 9, 0.5 * s);
        for (int q = 0; q <= 9; ++q) {
            EXPECT_NEAR(d[q] / ref[q], 1.0, 1e-6) << "point " << point << " q=" << q;
            // Complete monotonicity: (-1)^q L^(q) >= 0.
            EXPECT_GE((q % 2 ? -1 : 1) * d[q], 0.0);
        }
    }
}

TEST(Laplace, LowOrderDerivativesMatchRealFiniteDifferences)
{
    auto const tier = two_tier("ILS", 50, 10)[1];
    double const r = 900;
    double const s = r * r;
    double const h = 1e-3 * s;
    auto L = [&](double x) { return laplace_interference(tier, r, x); };
    auto const d = laplace_derivatives(tier, r, s, 2);
    double const d1 = (L(s + h) - L(s - h)) / (2 * h);
    double const d2 = (L(s + h) - 2 * L(s) + L(s - h)) / (h * h);
    EXPECT_NEAR(d[1] / d1, 1.0, 1e-5);
    EXPECT_NEAR(d[2] / d2, 1.0, 1e-3);
}

TEST(Laplace, ScaledDerivativesAreBoundedAndConsistent)
{
    auto const tier = two_tier("ILS", 50, 10)[1];
    double const r = 800;
    double const s = 5 * r * r;
    auto const raw = laplace_derivatives(tier, r, s, 12);
    auto const scaled = laplace_scaled_derivatives(tier, r, s, 12);
    double factorial = 1;
    for (int q = 0; q <= 12; ++q) {
        if (q > 0) factorial *= q;
        EXPECT_GE(scaled[q], 0.0);
        EXPECT_LE(scaled[q], 1.0);
        double const expect = std::pow(-1.0, q) * raw[q] * std::pow(s, q) / factorial;
        EXPECT_NEAR(scaled[q] / expect, 1.0, 1e-10) << q;
    }
}

TEST(Laplace, MomentsAtZeroFromRadialIntegrals)
{
    auto const tier = two_tier("AS", 50, 10)[1];
    auto const ring = tier.annulus();
    auto const& mix = tier.fading.mixture();
    double const r = 600;
    double const g = tier.gain_ratio();
    double const lt = ring.density_per_km2;
    double eh = 0;
    double eh2 = 0;
    for (std::size_t i = 0; i < mix.weights.size(); ++i) {
        double const a = mix.first_shape + static_cast<double>(i);
        eh += mix.weights[i] * a * mix.scale;
        eh2 += mix.weights[i] * a * (a + 1) * mix.scale * mix.scale;
    }
    // Campbell: E[I] = 2 pi lt g E[h] int v^(1-2) dv, Var[I] uses v^(1-4).
    double const mean = 2 * kPi * lt * g * eh * std::log(ring.r_max_km / r) +
                        tier.normalized_noise();
    double const var = 2 * kPi * lt * g * g * eh2 * 0.5 * (std::pow(r, -2) - std::pow(ring.r_max_km, -2));
    auto const d = laplace_derivatives(tier, r, 0.0, 2);
    EXPECT_DOUBLE_EQ(d[0], 1.0);
    EXPECT_NEAR(-d[1] / mean, 1.0, 1e-10);
    EXPECT_NEAR(d[2] / (var + mean * mean), 1.0, 1e-10);
}

// ---------------------------------------------------------------------------
// Coverage
// ---------------------------------------------------------------------------

TEST(Coverage, ExactMatchesRayleighOracle)
{
    auto tiers = presets::two_tier(presets::frequent_heavy_shadowing(), 50, 10);
    tiers[1].fading = FadingLaw::rayleigh(0.7);
    for (double db : {-10.0, 0.0, 10.0, 20.0}) {
        double const t = db_to_linear(db);
        auto const got = coverage_exact(tiers, t);
        auto const ref = rayleigh_coverage_oracle(tiers, t);
        for (std::size_t k = 0; k < 2; ++k) {
            EXPECT_NEAR(got.per_tier[k], ref[k], 1e-7) << db << " k=" << k;
        }
        EXPECT_NEAR(got.total, ref[0] + ref[1], 1e-7);
    }
}

TEST(Coverage, ProbabilitiesStayInUnitIntervalAndDecrease)
{
    auto const tiers = two_tier("ILS", 50, 10);
    double prev = 1.0 + 1e-12;
    for (double db = -10; db <= 30; db += 5) {
        auto const p = coverage_exact(tiers, db_to_linear(db));
        EXPECT_GE(p.total, 0.0);
        EXPECT_LE(p.total, prev);
        prev = p.total;
    }
}

TEST(Coverage, ExactEqualsApproxForUnitShape)
{
    for (double sat : {10.0, 50.0}) {
        auto const tiers = two_tier("FHS", 50, sat);
        for (auto policy : {KappaPolicy::lower_bound(), KappaPolicy::minimax()}) {
            EXPECT_LT(max_gap(tiers, policy), 1e-6) << sat;
        }
    }
}

TEST(Coverage, DefaultKappaKeepsApproxWithinTwoPercent)
{
    CurveOptions const defaults;
    EXPECT_EQ(defaults.kappa.kind(), KappaPolicy::Kind::Minimax);
    for (char const* preset : {"AS", "ILS"}) {
        for (double sat : {10.0, 50.0}) {
            EXPECT_LE(max_gap(two_tier(preset, 50, sat), defaults.kappa), 0.02)
                << preset << " " << sat;
        }
    }
}

TEST(Coverage, ThresholdBelowZeroThrowsAndCurveRecordsError)
{
    auto const tiers = two_tier("AS", 50, 10);
    EXPECT_THROW(coverage_exact(tiers, -1.0), Error);
    auto const curve = coverage_curve(rayleigh_pair(530, 30), {0.0}, CoverageMethod::ClosedForm);
    EXPECT_TRUE(curve.points[0].ok());
    auto const bad = coverage_curve(tiers, {0.0}, CoverageMethod::ClosedForm);
    EXPECT_FALSE(bad.points[0].ok());
    EXPECT_TRUE(std::isnan(bad.points[0].total));
    EXPECT_THROW(coverage_curve(tiers, {5.0, 0.0}, CoverageMethod::Exact), InvalidParameter);
}

TEST(Kappa, PolicyValues)
{
    for (int l = 1; l < 12; ++l) {
        double const lb = std::pow(std::tgamma(l + 2.0), -1.0 / (l + 1));
        EXPECT_NEAR(kappa_lower_bound(l), lb, 1e-14);
        EXPECT_GE(kappa_minimax(l), lb);
        EXPECT_LE(kappa_minimax(l), 1.0);
    }
    EXPECT_EQ(KappaPolicy::minimax().kappas(3)[0], 1.0);
    EXPECT_THROW(KappaPolicy::scalar(0.5).kappas(3), KappaOutOfRange);
    EXPECT_THROW(KappaPolicy::scalar(1.2).kappas(3), KappaOutOfRange);
    EXPECT_NO_THROW(KappaPolicy::scalar(0.8).kappas(3));
}

TEST(Kappa, MinimaxBeatsLowerBoundForShadowedLinks)
{
    auto const tiers = two_tier("AS", 50, 10);
    EXPECT_LT(max_gap(tiers, KappaPolicy::minimax()), max_gap(tiers, KappaPolicy::lower_bound()));
}

TEST(Kappa, FittedScalarIsAdmissibleAndBestOnItsGrid)
{
    auto const tiers = two_tier("AS", 50, 10);
    std::vector<double> const grid{-10, 0, 10, 20, 30};
    auto grid_gap = [&](double k) {
        double worst = 0;
        for (double db : grid) {
            double const t = db_to_linear(db);
            worst = std::max(worst, std::abs(coverage_exact(tiers, t).total -
                                             coverage_approx(tiers, t, KappaPolicy::scalar(k)).total));
        }
        return worst;
    };
    double const k = fit_scalar_kappa(tiers, grid);
    EXPECT_GE(k, 1 / std::sqrt(2.0));
    EXPECT_LE(k, 1.0);
    for (double other : {0.75, 0.85, 1.0}) {
        EXPECT_LE(grid_gap(k), grid_gap(other) + 1e-9) << other;
    }
}

// ---------------------------------------------------------------------------
// Closed form
// ---------------------------------------------------------------------------

TEST(ClosedForm, MatchesPrintedHyperbolicSineFormAt530Km)
{
    auto const tiers = rayleigh_pair(530, 30);
    std::array<double, 2> const eps{1.9521, 0};
    auto const r1 = tiers[0].annulus();
    auto const r2 = tiers[1].annulus();
    double const e1 = tiers[0].erp_factor();
    double const e2 = tiers[1].erp_factor();
    double const lt1 = r1.density_per_km2;
    double const lt2 = r2.density_per_km2;
    auto sq = [](double x) { return x * x; };
    double const vis1 = 1 - std::exp(-kPi * lt1 * (sq(r1.r_max_km) - sq(r1.r_min_km)));
    double const vis2 = 1 - std::exp(-kPi * lt2 * (sq(r2.r_max_km) - sq(r2.r_min_km)));
    double const xi1 = 2 * kPi * lt1 / vis1;
    double const xi2 = 2 * kPi * lt2 / vis2;
    double const chi1 = kPi * lt1 * sq(r1.r_min_km);
    double const chi = chi1 + kPi * lt2 * sq(r2.r_min_km);
    double const omega1 = -kPi * lt1;
    double const omega = omega1 - kPi * lt2 * e2 / e1;
    double const mu = -kPi * lt1 * e1 / e2 - kPi * lt2;
    double const l12 = r2.r_min_km * std::sqrt(e1 / e2);
    double const u12 = r2.r_max_km * std::sqrt(e1 / e2);
    ASSERT_GT(l12, r1.r_min_km);
    ASSERT_LT(u12, r1.r_max_km);
    for (double db : {-10.0, -3.0, 0.0, 5.0, 12.0, 20.0}) {
        double const t = db_to_linear(db);
        auto psi = [&](TierConfig const& tier, AnnulusGeometry const& ring, double e) {
            double const tg = t * tier.gain_ratio();
            return -kPi * ring.density_per_km2 * tg *
                   std::log((tg + sq(ring.r_max_km / (ring.r_min_km + e))) / (1 + tg));
        };
        double const p1 = psi(tiers[0], r1, eps[0]);
        double const p2 = psi(tiers[1], r2, eps[1]);
        double const c1 = p1 + omega1;
        double const c2 = p1 + omega;
        double const c3 = p2 + mu;
        double const tier1 =
            vis1 * (xi1 * std::exp(chi1) / c1 * std::exp(c1 * (sq(l12) + sq(r1.r_min_km)) / 2) *
                        std::sinh(c1 * (sq(l12) - sq(r1.r_min_km)) / 2) +
                    xi1 * std::exp(chi) / c2 * std::exp(c2 * (sq(u12) + sq(l12)) / 2) *
                        std::sinh(c2 * (sq(u12) - sq(l12)) / 2));
        double const tier2 =
            vis2 * xi2 * std::exp(chi) / c3 *
            std::exp(c3 * (sq(r2.r_max_km) + sq(r2.r_min_km)) / 2) *
            std::sinh(c3 * (sq(r2.r_max_km) - sq(r2.r_min_km)) / 2);
        auto const got = coverage_closed_form(tiers, t, eps);
        EXPECT_NEAR(got.per_tier[0], tier1, 1e-10 * std::max(1.0, tier1)) << db;
        EXPECT_NEAR(got.per_tier[1], tier2, 1e-10 * std::max(1.0, tier2)) << db;
    }
}

TEST(ClosedForm, PreconditionsAreEnforced)
{
    auto tiers = rayleigh_pair(530, 30);
    auto bad = tiers;
    bad[1].path_loss_exp = 2.5;
    EXPECT_THROW(coverage_closed_form(bad, 1.0, {0, 0}), PreconditionViolation);
    bad = tiers;
    bad[1].fading = FadingLaw(presets::average_shadowing());
    EXPECT_THROW(coverage_closed_form(bad, 1.0, {0, 0}), PreconditionViolation);
    EXPECT_THROW(coverage_closed_form({tiers[0]}, 1.0, {0, 0}), PreconditionViolation);
}

TEST(ClosedForm, TracksExactAt530And1000Km)
{
    struct Case {
        double h;
        std::array<double, 2> eps;
    };
    for (auto c : {Case{530, {1.9521, 0}}, Case{1000, {2.1474, 1.3535}}}) {
        auto const tiers = rayleigh_pair(c.h, 30);
        for (double db = -10; db <= 20; db += 1) {
            double const t = db_to_linear(db);
            EXPECT_NEAR(coverage_closed_form(tiers, t, c.eps).total, coverage_exact(tiers, t).total,
                        0.05)
                << c.h << " " << db;
        }
    }
}
