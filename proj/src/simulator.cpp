#include "istn/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <thread>

#include "istn/errors.hpp"
#include "istn/geometry.hpp"

namespace istn {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void move_nearest_first(TierSample& t)
{
    if (t.distances_km.size() < 2) {
        return;
    }
    auto it = std::min_element(t.distances_km.begin(), t.distances_km.end());
    std::iter_swap(t.distances_km.begin(), it);
}

void sample_positions(std::vector<TierConfig> const& tiers, Rng& rng,
                      Representation rep, NetworkSnapshot& snap)
{
    snap.tiers.resize(tiers.size());
    for (std::size_t k = 0; k < tiers.size(); ++k) {
        auto& sample = snap.tiers[k];
        sample.distances_km.clear();
        if (rep == Representation::Annulus) {
            auto const ring = tiers[k].annulus();
            auto const n = sample_poisson(ring.mean_count(), rng);
            for (std::size_t i = 0; i < n; ++i) {
                sample.distances_km.push_back(
                    sample_ring_radius(ring.r_min_km, ring.r_max_km, rng));
            }
        } else {
            auto const cap = tiers[k].cap();
            auto const user = typical_user(cap.shell);
            auto const points = sample_cap_ppp(cap, tiers[k].density_per_km2, rng, k);
            for (auto const& p : points.points) {
                sample.distances_km.push_back(user_distance(p, user));
            }
        }
        move_nearest_first(sample);
    }
}

// Contiguous index blocks per worker; each block fills its own state and
// the caller merges states in worker order.
template<class State, class Body>
std::vector<State> run_blocks(std::uint64_t n, unsigned workers, Body body,
                              State const& init)
{
    std::vector<State> states(workers, init);
    auto run = [&](unsigned w) {
        std::uint64_t const begin = n * w / workers;
        std::uint64_t const end = n * (w + 1) / workers;
        for (std::uint64_t i = begin; i < end; ++i) {
            body(i, states[w]);
        }
    };
    if (workers == 1) {
        run(0);
        return states;
    }
    std::vector<std::thread> threads;
    for (unsigned w = 0; w < workers; ++w) {
        threads.emplace_back(run, w);
    }
    for (auto& t : threads) {
        t.join();
    }
    return states;
}

}  // namespace

namespace detail {

unsigned resolve_workers(unsigned requested, std::uint64_t n)
{
    unsigned w = requested;
    if (w == 0) {
        w = std::max(1u, std::thread::hardware_concurrency());
    }
    if (n < w) {
        w = static_cast<unsigned>(std::max<std::uint64_t>(n, 1));
    }
    return w;
}

}  // namespace detail

double NetworkSnapshot::serving_distance_km() const
{
    return serving ? tiers[*serving].nearest_km() : kNaN;
}

double NetworkSnapshot::serving_sinr() const
{
    return serving ? sinr[*serving] : kNaN;
}

void evaluate_snapshot(std::vector<TierConfig> const& tiers, Rng& rng,
                       NetworkSnapshot& snap)
{
    snap.serving.reset();
    snap.sinr.assign(tiers.size(), kNaN);
    double best = -1.0;
    for (std::size_t k = 0; k < tiers.size(); ++k) {
        auto const& tier = tiers[k];
        auto& sample = snap.tiers[k];
        sample.fading.clear();
        if (sample.empty()) {
            continue;
        }
        double const alpha = tier.path_loss_exp;
        double interference = 0.0;
        double signal = 0.0;
        for (std::size_t i = 0; i < sample.distances_km.size(); ++i) {
            double const h = tier.fading.sample(rng);
            sample.fading.push_back(h);
            double const rx = h * std::pow(sample.distances_km[i], -alpha);
            if (i == 0) {
                signal = rx;
            } else {
                interference += rx;
            }
        }
        double const denom =
            tier.gain_ratio() * interference + tier.normalized_noise();
        snap.sinr[k] = denom > 0 ? signal / denom
                                 : std::numeric_limits<double>::infinity();
        double const erp =
            tier.erp_factor() * std::pow(sample.nearest_km(), -alpha);
        if (erp > best) {
            best = erp;
            snap.serving = k;
        }
    }
}

void run_snapshot_into(std::vector<TierConfig> const& tiers, Rng& rng,
                       Representation rep, NetworkSnapshot& out)
{
    sample_positions(tiers, rng, rep, out);
    evaluate_snapshot(tiers, rng, out);
}

NetworkSnapshot run_snapshot(std::vector<TierConfig> const& tiers, Rng& rng,
                             Representation rep)
{
    NetworkSnapshot snap;
    run_snapshot_into(tiers, rng, rep, snap);
    return snap;
}

McEstimate binomial_estimate(std::uint64_t hits, std::uint64_t n,
                             std::uint64_t seed)
{
    McEstimate e;
    e.n_snapshots = n;
    e.seed = seed;
    if (n == 0) {
        e.value = kNaN;
        e.half_width_95 = kNaN;
        return e;
    }
    double const p = static_cast<double>(hits) / static_cast<double>(n);
    e.value = p;
    e.half_width_95 = 1.96 * std::sqrt(p * (1.0 - p) / static_cast<double>(n));
    return e;
}

McCoverage detail::estimate_coverage_with(std::size_t n_tiers,
                                          std::vector<double> const& thresholds_db,
                                          McOptions const& opts,
                                          SnapshotGenerator const& generate)
{
    if (opts.n_snapshots < 1) {
        throw InvalidParameter("at least one snapshot is required");
    }
    std::vector<double> thresholds;
    for (double db : thresholds_db) {
        thresholds.push_back(db_to_linear(db));
    }
    std::size_t const n_t = thresholds.size();
    std::size_t const n_k = n_tiers;
    struct State {
        std::vector<std::uint64_t> hits;  // [threshold][tier]
        NetworkSnapshot snap;
    };
    State init{std::vector<std::uint64_t>(n_t * n_k, 0), {}};
    unsigned const workers = resolve_workers(opts.workers, opts.n_snapshots);
    auto states = run_blocks<State>(
        opts.n_snapshots, workers,
        [&](std::uint64_t index, State& st) {
            generate(index, st.snap);
            if (!st.snap.serving) {
                return;
            }
            std::size_t const k = *st.snap.serving;
            double const sinr = st.snap.sinr[k];
            for (std::size_t t = 0; t < n_t; ++t) {
                if (sinr > thresholds[t]) {
                    ++st.hits[t * n_k + k];
                }
            }
        },
        init);

    std::vector<std::uint64_t> hits(n_t * n_k, 0);
    for (auto const& st : states) {
        for (std::size_t i = 0; i < hits.size(); ++i) {
            hits[i] += st.hits[i];
        }
    }
    McCoverage out;
    out.curve.method = CoverageMethod::MonteCarlo;
    double const n = static_cast<double>(opts.n_snapshots);
    for (std::size_t t = 0; t < n_t; ++t) {
        CoveragePoint point;
        point.threshold_db = thresholds_db[t];
        std::uint64_t total = 0;
        for (std::size_t k = 0; k < n_k; ++k) {
            point.per_tier.push_back(static_cast<double>(hits[t * n_k + k]) / n);
            total += hits[t * n_k + k];
        }
        point.total = static_cast<double>(total) / n;
        out.curve.points.push_back(point);
        out.estimates.push_back(binomial_estimate(total, opts.n_snapshots, opts.seed));
    }
    return out;
}

McCoverage estimate_coverage(std::vector<TierConfig> const& tiers,
                             std::vector<double> const& thresholds_db,
                             McOptions const& opts)
{
    for (auto const& t : tiers) {
        t.validate();
    }
    return detail::estimate_coverage_with(
        tiers.size(), thresholds_db, opts,
        [&](std::uint64_t index, NetworkSnapshot& snap) {
            Rng rng(opts.seed, index);
            run_snapshot_into(tiers, rng, opts.representation, snap);
        });
}

McEstimate AssociationCounts::tier(std::size_t k) const
{
    return binomial_estimate(per_tier.at(k), n_snapshots, seed);
}

McEstimate AssociationCounts::unserved() const
{
    return binomial_estimate(none, n_snapshots, seed);
}

AssociationCounts estimate_association_proportions(
    std::vector<TierConfig> const& tiers, McOptions const& opts)
{
    if (opts.n_snapshots < 1) {
        throw InvalidParameter("at least one snapshot is required");
    }
    for (auto const& t : tiers) {
        t.validate();
    }
    struct State {
        std::vector<std::uint64_t> counts;  // tiers..., none
        NetworkSnapshot snap;
    };
    State init{std::vector<std::uint64_t>(tiers.size() + 1, 0), {}};
    unsigned const workers = detail::resolve_workers(opts.workers, opts.n_snapshots);
    auto states = run_blocks<State>(
        opts.n_snapshots, workers,
        [&](std::uint64_t index, State& st) {
            Rng rng(opts.seed, index);
            run_snapshot_into(tiers, rng, opts.representation, st.snap);
            ++st.counts[st.snap.serving ? *st.snap.serving : tiers.size()];
        },
        init);
    AssociationCounts out;
    out.per_tier.assign(tiers.size(), 0);
    out.n_snapshots = opts.n_snapshots;
    out.seed = opts.seed;
    for (auto const& st : states) {
        for (std::size_t k = 0; k < tiers.size(); ++k) {
            out.per_tier[k] += st.counts[k];
        }
        out.none += st.counts[tiers.size()];
    }
    return out;
}

std::vector<double> serving_distance_samples(
    std::vector<TierConfig> const& tiers, std::size_t k, McOptions const& opts)
{
    struct State {
        std::vector<double> samples;
        NetworkSnapshot snap;
    };
    unsigned const workers = detail::resolve_workers(opts.workers, opts.n_snapshots);
    auto states = run_blocks<State>(
        opts.n_snapshots, workers,
        [&](std::uint64_t index, State& st) {
            Rng rng(opts.seed, index);
            run_snapshot_into(tiers, rng, opts.representation, st.snap);
            if (st.snap.serving == k) {
                st.samples.push_back(st.snap.serving_distance_km());
            }
        },
        State{});
    std::vector<double> out;
    for (auto const& st : states) {
        out.insert(out.end(), st.samples.begin(), st.samples.end());
    }
    return out;
}

MeanEstimate empirical_laplace(TierConfig const& tier, double r, double s,
                               std::uint64_t n_snapshots, std::uint64_t seed)
{
    auto const ring = tier.annulus();
    if (!(r >= ring.r_min_km && r <= ring.r_max_km)) {
        throw InvalidParameter("pinned serving distance outside the ring");
    }
    AnnulusGeometry const beyond{r, ring.r_max_km, ring.density_per_km2};
    double const mean_count = beyond.mean_count();
    double sum = 0.0;
    double sum_sq = 0.0;
    for (std::uint64_t i = 0; i < n_snapshots; ++i) {
        Rng rng(seed, i);
        auto const n = sample_poisson(mean_count, rng);
        double interference = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            double const v = sample_ring_radius(r, ring.r_max_km, rng);
            interference += tier.fading.sample(rng) * std::pow(v, -tier.path_loss_exp);
        }
        double const x = tier.gain_ratio() * interference + tier.normalized_noise();
        double const value = std::exp(-s * x);
        sum += value;
        sum_sq += value * value;
    }
    MeanEstimate out;
    out.n = n_snapshots;
    double const n = static_cast<double>(n_snapshots);
    out.mean = sum / n;
    double const var = std::max(sum_sq / n - out.mean * out.mean, 0.0);
    out.std_error = std::sqrt(var / n);
    return out;
}

}  // namespace istn
