#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "istn/analytics.hpp"
#include "istn/rng.hpp"
#include "istn/tier.hpp"

namespace istn {

//! How a snapshot places the visible BSs of each tier: on the displaced
//! planar ring, or on the spherical cap itself.
enum class Representation { Annulus, Sphere };

/// Visible BSs of one tier in a snapshot, nearest first.
struct TierSample {
    std::vector<double> distances_km;
    std::vector<double> fading;  // one power draw per link, same order

    bool empty() const { return distances_km.empty(); }
    double nearest_km() const { return distances_km.front(); }
};

/*!
 * One realization of every tier plus the association and SINR outcome.
 *
 * The user associates with the tier maximizing P G B E D^-alpha over tiers
 * with at least one visible BS (mean fading, not the instantaneous draw),
 * and is served by the nearest BS of that tier. sinr[k] is the SINR the
 * user would see if served by tier k's nearest BS (NaN for empty tiers).
 */
struct NetworkSnapshot {
    std::vector<TierSample> tiers;
    std::optional<std::size_t> serving;
    std::vector<double> sinr;

    double serving_distance_km() const;
    //! SINR of the serving link; NaN when no tier is visible.
    double serving_sinr() const;
};

NetworkSnapshot run_snapshot(std::vector<TierConfig> const& tiers, Rng& rng,
                             Representation rep = Representation::Annulus);

//! Allocation-free variant reusing `out`.
void run_snapshot_into(std::vector<TierConfig> const& tiers, Rng& rng,
                       Representation rep, NetworkSnapshot& out);

//! Draws fading for the given distances, then applies association and
//! SINR. Shared by the PPP and Walker-star snapshot generators.
void evaluate_snapshot(std::vector<TierConfig> const& tiers, Rng& rng,
                       NetworkSnapshot& snap);

struct McEstimate {
    double value = 0;
    double half_width_95 = 0;
    std::uint64_t n_snapshots = 0;
    std::uint64_t seed = 0;
};

//! Binomial estimate with normal-approximation 95% half width.
McEstimate binomial_estimate(std::uint64_t hits, std::uint64_t n,
                             std::uint64_t seed);

struct McOptions {
    std::uint64_t n_snapshots = 100000;
    std::uint64_t seed = 1;
    //! 0 selects the hardware concurrency. Results do not depend on it.
    unsigned workers = 0;
    Representation representation = Representation::Annulus;
};

struct McCoverage {
    CoverageCurve curve;               // method MonteCarlo, per-tier split
    std::vector<McEstimate> estimates;  // one per threshold (total)
};

McCoverage estimate_coverage(std::vector<TierConfig> const& tiers,
                             std::vector<double> const& thresholds_db,
                             McOptions const& opts);

struct AssociationCounts {
    std::vector<std::uint64_t> per_tier;
    std::uint64_t none = 0;
    std::uint64_t n_snapshots = 0;
    std::uint64_t seed = 0;

    McEstimate tier(std::size_t k) const;
    McEstimate unserved() const;
};

//! Empirical P[J = k] for every tier and P[J = None].
AssociationCounts estimate_association_proportions(
    std::vector<TierConfig> const& tiers, McOptions const& opts);

//! Serving distances of snapshots associated with tier k.
std::vector<double> serving_distance_samples(
    std::vector<TierConfig> const& tiers, std::size_t k,
    McOptions const& opts);

/// Sample mean and its standard error.
struct MeanEstimate {
    double mean = 0;
    double std_error = 0;
    std::uint64_t n = 0;
};

//! E[exp(-s (I + noise))] for interferers of `tier` beyond a pinned
//! serving distance r (PPP on the ring [r, R_max]).
MeanEstimate empirical_laplace(TierConfig const& tier, double r, double s,
                               std::uint64_t n_snapshots, std::uint64_t seed);

namespace detail {

//! Worker count actually used for n snapshots (0 = hardware concurrency).
unsigned resolve_workers(unsigned requested, std::uint64_t n);

//! Fills `snap` for snapshot `index` (its RNG stream is derived inside).
using SnapshotGenerator =
    std::function<void(std::uint64_t index, NetworkSnapshot& snap)>;

//! Coverage counting over generated snapshots; the result depends only on
//! the generator, never on the worker count.
McCoverage estimate_coverage_with(std::size_t n_tiers,
                                  std::vector<double> const& thresholds_db,
                                  McOptions const& opts,
                                  SnapshotGenerator const& generate);

}  // namespace detail

}  // namespace istn
