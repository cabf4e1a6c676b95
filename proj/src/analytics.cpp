#include "istn/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>

#include <boost/math/special_functions/gamma.hpp>

#include "istn/errors.hpp"
#include "istn/quadrature.hpp"

namespace istn {

namespace {

constexpr double kPi = std::numbers::pi;

// r^2 - r_min^2 without cancellation near r_min.
double excess_sq(double r, double r_min) { return (r - r_min) * (r + r_min); }

double visibility(AnnulusGeometry const& a) { return -std::expm1(-a.mean_count()); }

void check_index(std::vector<TierConfig> const& tiers, std::size_t k)
{
    if (k >= tiers.size()) {
        throw InvalidParameter("tier index " + std::to_string(k) +
                               " out of range");
    }
}

// Branch data of P_{k,j} for one competing tier j.
struct Competitor {
    double density = 0;
    double r_min_sq = 0;
    double void_prob = 1;
    double log_coeff = 0;  // (2 / alpha_j) log A
    double r_power = 0;    // 2 alpha_k / alpha_j
    double lower = 0;      // L_{k,j}
    double upper = 0;      // U_{k,j}
};

class AssociationModel {
  public:
    AssociationModel(std::vector<TierConfig> const& tiers, std::size_t k,
                     AnalyticOptions const& opts)
        : anchor_(tiers.at(k).annulus()), void_aware_(opts.void_aware_tail)
    {
        for (std::size_t j = 0; j < tiers.size(); ++j) {
            if (j == k) {
                continue;
            }
            auto const ratios = tier_ratios(tiers, k, j);
            auto const ring = tiers[j].annulus();
            double const a = ratios.p_hat * ratios.g_hat * ratios.b_hat *
                             ratios.e_hat;
            Competitor c;
            c.density = ring.density_per_km2;
            c.r_min_sq = ring.r_min_km * ring.r_min_km;
            c.void_prob = void_probability(ring);
            c.log_coeff = 2.0 / tiers[j].path_loss_exp * std::log(a);
            c.r_power = 2.0 * tiers[k].path_loss_exp / tiers[j].path_loss_exp;
            c.lower = ratios.l_bound_km;
            c.upper = ratios.u_bound_km;
            competitors_.push_back(c);
        }
    }

    AnnulusGeometry const& anchor() const { return anchor_; }

    double factor(Competitor const& c, double r) const
    {
        if (r <= c.lower) {
            return 1.0;
        }
        if (r > c.upper) {
            return void_aware_ ? c.void_prob : 0.0;
        }
        double const t_sq = std::exp(c.log_coeff + c.r_power * std::log(r));
        return std::exp(-kPi * c.density * std::max(t_sq - c.r_min_sq, 0.0));
    }

    double weight(double r) const
    {
        double w = 1.0;
        for (auto const& c : competitors_) {
            w *= factor(c, r);
            if (w == 0) {
                break;
            }
        }
        return w;
    }

    //! 2 pi lt r exp(-pi lt (r^2 - R_min^2)), the unnormalized first touch.
    double first_touch(double r) const
    {
        double const lt = anchor_.density_per_km2;
        return 2.0 * kPi * lt * r *
               std::exp(-kPi * lt * excess_sq(r, anchor_.r_min_km));
    }

    //! Beyond this radius the weight vanishes identically.
    double upper_limit() const
    {
        double u = anchor_.r_max_km;
        if (!void_aware_) {
            for (auto const& c : competitors_) {
                u = std::min(u, c.upper);
            }
        }
        return std::max(u, anchor_.r_min_km);
    }

    std::vector<double> knots() const
    {
        std::vector<double> out;
        for (auto const& c : competitors_) {
            out.push_back(c.lower);
            out.push_back(c.upper);
        }
        return out;
    }

  private:
    AnnulusGeometry anchor_;
    bool void_aware_;
    std::vector<Competitor> competitors_;
};

// Integrates f(r) * first_touch(r) * weight(r) over the anchor's support.
template<class F>
double integrate_anchor(AssociationModel const& model, F&& f,
                        AnalyticOptions const& opts)
{
    auto const& ring = model.anchor();
    if (!(ring.density_per_km2 > 0)) {
        return 0.0;
    }
    double const a = ring.r_min_km;
    double const b = model.upper_limit();
    auto const breaks = model.knots();
    quad::Options q;
    q.rel_tol = opts.outer_rel_tol;
    q.abs_tol = 1e-13;
    return quad::integrate(
        [&](double r) {
            double const w = model.weight(r);
            if (w == 0) {
                return 0.0;
            }
            return model.first_touch(r) * w * f(r);
        },
        a, b, q, breaks);
}

// ---------------------------------------------------------------------------
// Interference kernel
// ---------------------------------------------------------------------------

// Per-tier constants of the PGFL integrand. The fading law is a Gamma
// mixture with common scale theta, so with y = s G theta v^-alpha,
// p = 1 / (1 + y) and z = y p:
//   1 - M            = z sum_i w_i (1 + p + ... + p^(a_i - 1))
//   s^n/n! (-d/ds)^n M = z^n sum_i w_i C(a_i + n - 1, n) p^(a_i)
// Every term is nonnegative, so no cancellation occurs at any order.
struct InterferenceKernel {
    explicit InterferenceKernel(TierConfig const& tier)
    {
        auto const ring = tier.annulus();
        two_pi_density = 2.0 * kPi * ring.density_per_km2;
        r_max = ring.r_max_km;
        alpha = tier.path_loss_exp;
        auto const& mix = tier.fading.mixture();
        gain_scale = tier.gain_ratio() * mix.scale;
        weights = mix.weights;
        first_shape = mix.first_shape;
        last_shape = mix.last_shape();
        noise = tier.normalized_noise();
    }

    double y_of(double s, double v) const
    {
        return s * gain_scale * std::pow(v, -alpha);
    }

    //! z * sum_i w_i G_{a_i}(p).
    double bracket(double y) const
    {
        double const p = 1.0 / (1.0 + y);
        double const z = y * p;
        double geom = 0.0;
        double pj = 1.0;
        double acc = 0.0;
        for (int a = 1; a <= last_shape; ++a) {
            geom += pj;
            pj *= p;
            if (a >= first_shape) {
                acc += weights[static_cast<std::size_t>(a - first_shape)] * geom;
            }
        }
        return z * acc;
    }

    double two_pi_density = 0;
    double r_max = 0;
    double alpha = 2;
    double gain_scale = 1;
    std::vector<double> weights;
    int first_shape = 1;
    int last_shape = 1;
    double noise = 0;
};

quad::Options inner_options(AnalyticOptions const& opts, double rel_tol)
{
    quad::Options q;
    q.rel_tol = std::min(opts.inner_rel_tol, rel_tol);
    q.abs_tol = 1e-15;
    return q;
}

// d_q = s^q/q! (-1)^q L^(q)(s), q = 0..q_max.
std::vector<double> scaled_derivatives(InterferenceKernel const& k, double r,
                                       double s, int q_max,
                                       AnalyticOptions const& opts)
{
    auto const dim = static_cast<std::size_t>(q_max) + 1;
    std::vector<double> e(dim, 0.0);  // e[0] = -eta, e[n] = s^n/n! (-1)^n eta^(n)
    if (s > 0 && r < k.r_max && k.two_pi_density > 0) {
        std::size_t const n_shapes = k.weights.size();
        // binom[i * dim + n] = C(a_i + n - 1, n)
        std::vector<double> binom(n_shapes * dim, 1.0);
        for (std::size_t i = 0; i < n_shapes; ++i) {
            double const a = k.first_shape + static_cast<double>(i);
            for (std::size_t n = 1; n < dim; ++n) {
                binom[i * dim + n] =
                    binom[i * dim + n - 1] * (a + n - 1.0) / static_cast<double>(n);
            }
        }
        std::vector<double> wp(n_shapes);
        auto const knots = quad::make_knots(r, k.r_max, {});
        e = quad::integrate_vector(
            [&](double v, std::span<double> out) {
                double const y = k.y_of(s, v);
                double const scale = k.two_pi_density * v;
                out[0] = scale * k.bracket(y);
                if (dim == 1) {
                    return;
                }
                double const p = 1.0 / (1.0 + y);
                double const z = y * p;
                double pa = std::pow(p, k.first_shape);
                for (std::size_t i = 0; i < n_shapes; ++i) {
                    wp[i] = k.weights[i] * pa;
                    pa *= p;
                }
                double zn = scale;
                for (std::size_t n = 1; n < dim; ++n) {
                    zn *= z;
                    double acc = 0.0;
                    for (std::size_t i = 0; i < n_shapes; ++i) {
                        acc += wp[i] * binom[i * dim + n];
                    }
                    out[n] = zn * acc;
                }
            },
            dim, std::span<double const>(knots), inner_options(opts, 1.0));
    }
    double const noise_term = s * k.noise;
    if (dim > 1) {
        e[1] += noise_term;
    }
    std::vector<double> d(dim, 0.0);
    d[0] = std::exp(-noise_term - e[0]);
    for (std::size_t n = 0; n + 1 < dim; ++n) {
        double acc = 0.0;
        for (std::size_t i = 0; i <= n; ++i) {
            acc += static_cast<double>(i + 1) * e[i + 1] * d[n - i];
        }
        d[n + 1] = acc / static_cast<double>(n + 1);
    }
    return d;
}

std::vector<double> laplace_values(InterferenceKernel const& k, double r,
                                   std::vector<double> const& s_values,
                                   double rel_tol, AnalyticOptions const& opts)
{
    std::vector<double> brackets(s_values.size(), 0.0);
    if (r < k.r_max && k.two_pi_density > 0 && !s_values.empty()) {
        auto const knots = quad::make_knots(r, k.r_max, {});
        std::vector<double> v_scale(s_values.size());
        brackets = quad::integrate_vector(
            [&](double v, std::span<double> out) {
                double const base = k.gain_scale * std::pow(v, -k.alpha);
                double const scale = k.two_pi_density * v;
                for (std::size_t j = 0; j < s_values.size(); ++j) {
                    out[j] = scale * k.bracket(s_values[j] * base);
                }
            },
            s_values.size(), std::span<double const>(knots),
            inner_options(opts, rel_tol));
    }
    std::vector<double> out(s_values.size());
    for (std::size_t j = 0; j < s_values.size(); ++j) {
        out[j] = std::exp(-s_values[j] * k.noise - brackets[j]);
    }
    return out;
}

void require_laplace_args(TierConfig const& tier, double r, double s)
{
    if (!(s >= 0)) {
        throw NegativeInput("Laplace argument must be nonnegative");
    }
    auto const ring = tier.annulus();
    if (!(r >= ring.r_min_km * (1 - 1e-12) && r <= ring.r_max_km * (1 + 1e-12))) {
        throw InvalidParameter("serving distance outside the tier's ring");
    }
}

void require_threshold(double t)
{
    if (!(t > 0) || !std::isfinite(t)) {
        throw InvalidParameter("coverage threshold must be positive");
    }
}

void validate_all(std::vector<TierConfig> const& tiers)
{
    if (tiers.empty()) {
        throw InvalidParameter("at least one tier is required");
    }
    for (auto const& t : tiers) {
        t.validate();
    }
}

double clamp01(double x) { return std::clamp(x, 0.0, 1.0); }

}  // namespace

// ---------------------------------------------------------------------------
// Names
// ---------------------------------------------------------------------------

std::string to_string(CoverageMethod method)
{
    switch (method) {
        case CoverageMethod::Exact: return "exact";
        case CoverageMethod::Approx: return "approx";
        case CoverageMethod::ClosedForm: return "closed_form";
        case CoverageMethod::MonteCarlo: return "mc";
        case CoverageMethod::GridBaseline: return "grid_baseline";
    }
    return "unknown";
}

CoverageMethod parse_coverage_method(std::string const& name)
{
    for (auto m : {CoverageMethod::Exact, CoverageMethod::Approx,
                   CoverageMethod::ClosedForm, CoverageMethod::MonteCarlo,
                   CoverageMethod::GridBaseline}) {
        if (to_string(m) == name) {
            return m;
        }
    }
    throw InvalidParameter("unknown method '" + name + "'");
}

// ---------------------------------------------------------------------------
// Nearest-distance laws
// ---------------------------------------------------------------------------

double void_probability(AnnulusGeometry const& annulus)
{
    return std::exp(-annulus.mean_count());
}

double first_touch_pdf(AnnulusGeometry const& annulus, double r)
{
    double const lt = annulus.density_per_km2;
    if (!(r > annulus.r_min_km && r < annulus.r_max_km) || !(lt > 0)) {
        return 0.0;
    }
    return 2.0 * kPi * lt * r *
           std::exp(-kPi * lt * excess_sq(r, annulus.r_min_km)) /
           visibility(annulus);
}

double first_touch_cdf(AnnulusGeometry const& annulus, double r)
{
    if (r <= annulus.r_min_km || !(annulus.density_per_km2 > 0)) {
        return 0.0;
    }
    if (r >= annulus.r_max_km) {
        return 1.0;
    }
    double const lt = annulus.density_per_km2;
    return clamp01(-std::expm1(-kPi * lt * excess_sq(r, annulus.r_min_km)) /
                   visibility(annulus));
}

// ---------------------------------------------------------------------------
// Association
// ---------------------------------------------------------------------------

TierRatios tier_ratios(std::vector<TierConfig> const& tiers, std::size_t k,
                       std::size_t j)
{
    check_index(tiers, k);
    check_index(tiers, j);
    auto const& tk = tiers[k];
    auto const& tj = tiers[j];
    TierRatios out{};
    out.p_hat = tj.tx_power_w / tk.tx_power_w;
    out.g_hat = tj.main_lobe_gain / tk.main_lobe_gain;
    out.b_hat = tj.bias / tk.bias;
    out.e_hat = tj.fading.mean() / tk.fading.mean();
    out.alpha_hat = tj.path_loss_exp / tk.path_loss_exp;
    auto const ring = tj.annulus();
    if (j == k) {
        out = TierRatios{1, 1, 1, 1, 1, ring.r_max_km, ring.r_min_km};
        return out;
    }
    double const log_a =
        std::log(out.p_hat) + std::log(out.g_hat) + std::log(out.b_hat) +
        std::log(out.e_hat);
    auto bound = [&](double radius) {
        return std::exp((tj.path_loss_exp * std::log(radius) - log_a) /
                        tk.path_loss_exp);
    };
    out.u_bound_km = bound(ring.r_max_km);
    out.l_bound_km = bound(ring.r_min_km);
    return out;
}

double association_factor(std::vector<TierConfig> const& tiers, std::size_t k,
                          std::size_t j, double r, AnalyticOptions const& opts)
{
    check_index(tiers, k);
    check_index(tiers, j);
    if (j == k) {
        auto const ring = tiers[k].annulus();
        if (r <= ring.r_min_km) {
            return 1.0;
        }
        return std::exp(-kPi * ring.density_per_km2 *
                        excess_sq(std::min(r, ring.r_max_km), ring.r_min_km));
    }
    std::vector<TierConfig> pair{tiers[k], tiers[j]};
    AssociationModel model(pair, 0, opts);
    return model.weight(r);
}

double association_weight(std::vector<TierConfig> const& tiers, std::size_t k,
                          double r, AnalyticOptions const& opts)
{
    check_index(tiers, k);
    return AssociationModel(tiers, k, opts).weight(r);
}

double association_probability(std::vector<TierConfig> const& tiers,
                               std::size_t k, AnalyticOptions const& opts)
{
    check_index(tiers, k);
    validate_all(tiers);
    AssociationModel model(tiers, k, opts);
    double const vis = visibility(model.anchor());
    if (!(vis > 0)) {
        return 0.0;
    }
    double const mass = integrate_anchor(model, [](double) { return 1.0; }, opts);
    return clamp01(mass / vis);
}

double association_mass(std::vector<TierConfig> const& tiers, std::size_t k,
                        AnalyticOptions const& opts)
{
    check_index(tiers, k);
    validate_all(tiers);
    AssociationModel model(tiers, k, opts);
    return clamp01(integrate_anchor(model, [](double) { return 1.0; }, opts));
}

double conditional_distance_pdf(std::vector<TierConfig> const& tiers,
                                std::size_t k, double r,
                                AnalyticOptions const& opts)
{
    check_index(tiers, k);
    AssociationModel model(tiers, k, opts);
    auto const& ring = model.anchor();
    if (!(r > ring.r_min_km && r < ring.r_max_km)) {
        return 0.0;
    }
    double const mass = integrate_anchor(model, [](double) { return 1.0; }, opts);
    if (!(mass > 0)) {
        return 0.0;
    }
    return model.first_touch(r) * model.weight(r) / mass;
}

std::vector<double> association_knots(std::vector<TierConfig> const& tiers,
                                      std::size_t k)
{
    check_index(tiers, k);
    AssociationModel model(tiers, k, {});
    auto const& ring = model.anchor();
    std::vector<double> out;
    for (double x : model.knots()) {
        if (x > ring.r_min_km && x < ring.r_max_km) {
            out.push_back(x);
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

// ---------------------------------------------------------------------------
// Laplace transform
// ---------------------------------------------------------------------------

double laplace_interference(TierConfig const& tier, double r, double s,
                            AnalyticOptions const& opts)
{
    require_laplace_args(tier, r, s);
    InterferenceKernel const kernel(tier);
    return laplace_values(kernel, r, {s}, 1.0, opts)[0];
}

std::vector<double> laplace_scaled_derivatives(TierConfig const& tier,
                                               double r, double s, int q_max,
                                               AnalyticOptions const& opts)
{
    require_laplace_args(tier, r, s);
    if (q_max < 0) {
        throw InvalidParameter("derivative order must be nonnegative");
    }
    return scaled_derivatives(InterferenceKernel(tier), r, s, q_max, opts);
}

std::vector<double> laplace_derivatives(TierConfig const& tier, double r,
                                        double s, int q_max,
                                        AnalyticOptions const& opts)
{
    require_laplace_args(tier, r, s);
    if (q_max < 0) {
        throw InvalidParameter("derivative order must be nonnegative");
    }
    InterferenceKernel const kernel(tier);
    auto const dim = static_cast<std::size_t>(q_max) + 1;
    std::vector<double> out(dim);
    if (s > 0) {
        auto const d = scaled_derivatives(kernel, r, s, q_max, opts);
        double const log_s = std::log(s);
        for (std::size_t q = 0; q < dim; ++q) {
            double const mag =
                d[q] == 0 ? 0.0
                          : std::exp(std::lgamma(q + 1.0) + std::log(d[q]) -
                                     static_cast<double>(q) * log_s);
            out[q] = (q % 2 == 0) ? mag : -mag;
        }
    } else {
        // Moments at s = 0: the radial integral of v^(1 - n alpha) is
        // elementary, and E[X^n] follows from the cumulant recurrence.
        std::vector<double> cum(dim, 0.0);
        double const r_max = kernel.r_max;
        for (std::size_t n = 1; n < dim && r < r_max; ++n) {
            double const p = 2.0 - static_cast<double>(n) * kernel.alpha;
            double const radial =
                std::abs(p) < 1e-12
                    ? std::log(r_max / r)
                    : (std::pow(r_max, p) - std::pow(r, p)) / p;
            double mix = 0.0;
            for (std::size_t i = 0; i < kernel.weights.size(); ++i) {
                double const a = kernel.first_shape + static_cast<double>(i);
                // rising factorial (a)_n
                double const rising = std::exp(std::lgamma(a + n) - std::lgamma(a));
                mix += kernel.weights[i] * rising;
            }
            cum[n] = kernel.two_pi_density * mix *
                     std::pow(kernel.gain_scale, static_cast<double>(n)) * radial;
        }
        if (dim > 1) {
            cum[1] += kernel.noise;
        }
        std::vector<double> moments(dim, 0.0);
        moments[0] = 1.0;
        for (std::size_t n = 0; n + 1 < dim; ++n) {
            double acc = 0.0;
            double binom = 1.0;
            for (std::size_t i = 0; i <= n; ++i) {
                acc += binom * cum[i + 1] * moments[n - i];
                binom = binom * static_cast<double>(n - i) / static_cast<double>(i + 1);
            }
            moments[n + 1] = acc;
        }
        for (std::size_t q = 0; q < dim; ++q) {
            out[q] = (q % 2 == 0) ? moments[q] : -moments[q];
        }
    }
    for (std::size_t q = 0; q < dim; ++q) {
        if (!std::isfinite(out[q])) {
            throw DerivativeOverflow("Laplace derivative of order " +
                                     std::to_string(q) +
                                     " is not representable");
        }
    }
    return out;
}

std::vector<double> laplace_batch(TierConfig const& tier, double r,
                                  std::vector<double> const& s_values,
                                  AnalyticOptions const& opts)
{
    for (double s : s_values) {
        require_laplace_args(tier, r, s);
    }
    return laplace_values(InterferenceKernel(tier), r, s_values, 1.0, opts);
}

// ---------------------------------------------------------------------------
// Kappa
// ---------------------------------------------------------------------------

double kappa_lower_bound(int l)
{
    if (l <= 0) {
        return 1.0;
    }
    return std::exp(-std::lgamma(l + 2.0) / (l + 1.0));
}

namespace {

// sup_x |P(a, x) - (1 - e^(-kappa x))^a| on a dense grid.
double binomial_gap(int a, double kappa)
{
    double const x_max = a + 12.0 * std::sqrt(static_cast<double>(a)) + 30.0;
    constexpr int n = 800;
    double worst = 0.0;
    for (int i = 1; i <= n; ++i) {
        double const x = x_max * i / n;
        double const approx = std::pow(-std::expm1(-kappa * x), a);
        worst = std::max(worst,
                         std::abs(boost::math::gamma_p(static_cast<double>(a), x) -
                                  approx));
    }
    return worst;
}

template<class F>
double golden_minimize(F&& f, double lo, double hi, int iterations)
{
    double const g = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi - g * (hi - lo);
    double x2 = lo + g * (hi - lo);
    double f1 = f(x1);
    double f2 = f(x2);
    for (int it = 0; it < iterations; ++it) {
        if (f1 <= f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        }
    }
    return f1 <= f2 ? x1 : x2;
}

}  // namespace

double kappa_minimax(int l)
{
    if (l <= 0) {
        return 1.0;
    }
    static std::mutex mutex;
    static std::map<int, double> cache;
    {
        std::lock_guard<std::mutex> lock(mutex);
        if (auto it = cache.find(l); it != cache.end()) {
            return it->second;
        }
    }
    double const kappa = golden_minimize(
        [l](double k) { return binomial_gap(l + 1, k); }, kappa_lower_bound(l),
        1.0, 50);
    std::lock_guard<std::mutex> lock(mutex);
    cache[l] = kappa;
    return kappa;
}

std::vector<double> KappaPolicy::kappas(int max_shape) const
{
    std::vector<double> out(static_cast<std::size_t>(std::max(max_shape, 1)));
    for (int l = 0; l < static_cast<int>(out.size()); ++l) {
        double k = 1.0;
        if (l > 0) {
            switch (kind_) {
                case Kind::LowerBound: k = kappa_lower_bound(l); break;
                case Kind::Minimax: k = kappa_minimax(l); break;
                case Kind::Scalar: k = value_; break;
            }
        }
        double const lb = kappa_lower_bound(l);
        if (!(k >= lb * (1 - 1e-12) && k <= 1.0 + 1e-12)) {
            std::ostringstream os;
            os << "kappa " << k << " for l = " << l << " outside [" << lb
               << ", 1]";
            throw KappaOutOfRange(os.str());
        }
        out[static_cast<std::size_t>(l)] = k;
    }
    return out;
}

std::string KappaPolicy::describe() const
{
    switch (kind_) {
        case Kind::LowerBound: return "lower_bound";
        case Kind::Minimax: return "minimax";
        case Kind::Scalar: {
            std::ostringstream os;
            os.precision(9);
            os << "scalar(" << value_ << ")";
            return os.str();
        }
    }
    return "unknown";
}

// ---------------------------------------------------------------------------
// Coverage
// ---------------------------------------------------------------------------

CoveragePoint coverage_exact(std::vector<TierConfig> const& tiers,
                             double t_linear, AnalyticOptions const& opts)
{
    require_threshold(t_linear);
    validate_all(tiers);
    CoveragePoint point;
    point.threshold_db = linear_to_db(t_linear);
    for (std::size_t k = 0; k < tiers.size(); ++k) {
        InterferenceKernel const kernel(tiers[k]);
        auto const& mix = tiers[k].fading.mixture();
        int const q_max = mix.last_shape() - 1;
        AssociationModel const model(tiers, k, opts);
        double const alpha = tiers[k].path_loss_exp;
        double const value = integrate_anchor(
            model,
            [&](double r) {
                double const nu = t_linear * std::pow(r, alpha) / mix.scale;
                auto const d = scaled_derivatives(kernel, r, nu, q_max, opts);
                // sum_i w_i sum_{q < a_i} d_q, with running partial sums
                double partial = 0.0;
                double total = 0.0;
                int q = 0;
                for (std::size_t i = 0; i < mix.weights.size(); ++i) {
                    int const a = mix.first_shape + static_cast<int>(i);
                    for (; q < a; ++q) {
                        partial += d[static_cast<std::size_t>(q)];
                    }
                    total += mix.weights[i] * partial;
                }
                return std::min(total, 1.0);
            },
            opts);
        point.per_tier.push_back(clamp01(value));
    }
    for (double v : point.per_tier) {
        point.total += v;
    }
    point.total = clamp01(point.total);
    return point;
}

CoveragePoint coverage_approx(std::vector<TierConfig> const& tiers,
                              double t_linear, KappaPolicy const& kappa,
                              AnalyticOptions const& opts)
{
    require_threshold(t_linear);
    validate_all(tiers);
    CoveragePoint point;
    point.threshold_db = linear_to_db(t_linear);
    for (std::size_t k = 0; k < tiers.size(); ++k) {
        InterferenceKernel const kernel(tiers[k]);
        auto const& mix = tiers[k].fading.mixture();
        auto const kappas = kappa.kappas(mix.last_shape());
        AssociationModel const model(tiers, k, opts);
        double const alpha = tiers[k].path_loss_exp;

        // Signed binomial coefficients per (component, q).
        std::vector<double> unit_s;
        std::vector<double> coeff;
        for (std::size_t i = 0; i < mix.weights.size(); ++i) {
            int const a = mix.first_shape + static_cast<int>(i);
            double const kap = kappas[static_cast<std::size_t>(a - 1)];
            double binom = 1.0;
            for (int q = 1; q <= a; ++q) {
                binom = binom * (a - q + 1) / q;
                unit_s.push_back(kap * q);
                coeff.push_back(mix.weights[i] * ((q % 2 == 1) ? binom : -binom));
            }
        }
        std::vector<double> s_values(unit_s.size());
        // The alternating binomial sum amplifies Laplace errors by up to
        // 2^m, so the inner quadrature runs at a tighter tolerance.
        double const inner_tol = mix.last_shape() > 1 ? 1e-12 : 1.0;
        double const value = integrate_anchor(
            model,
            [&](double r) {
                double const nu = t_linear * std::pow(r, alpha) / mix.scale;
                for (std::size_t j = 0; j < unit_s.size(); ++j) {
                    s_values[j] = unit_s[j] * nu;
                }
                auto const lv = laplace_values(kernel, r, s_values, inner_tol, opts);
                double sum = 0.0;
                for (std::size_t j = 0; j < lv.size(); ++j) {
                    sum += coeff[j] * lv[j];
                }
                return clamp01(sum);
            },
            opts);
        point.per_tier.push_back(clamp01(value));
    }
    for (double v : point.per_tier) {
        point.total += v;
    }
    point.total = clamp01(point.total);
    return point;
}

ClosedFormParams closed_form_params(std::vector<TierConfig> const& tiers,
                                    double t_linear,
                                    std::array<double, 2> epsilon)
{
    if (tiers.size() != 2) {
        throw PreconditionViolation("closed form needs exactly two tiers");
    }
    for (auto const& t : tiers) {
        if (std::abs(t.path_loss_exp - 2.0) > 1e-12) {
            throw PreconditionViolation("closed form needs path-loss exponent 2 in tier '" +
                                        t.name + "'");
        }
        if (t.fading.shape() != 1 || t.fading.mixture().weights.size() != 1) {
            throw PreconditionViolation("closed form needs Rayleigh fading in tier '" +
                                        t.name + "'");
        }
    }
    require_threshold(t_linear);
    validate_all(tiers);
    ClosedFormParams p;
    p.epsilon = epsilon;
    std::array<AnnulusGeometry, 2> const rings{tiers[0].annulus(), tiers[1].annulus()};
    for (std::size_t k = 0; k < 2; ++k) {
        auto const& ring = rings[k];
        double const lt = ring.density_per_km2;
        p.visibility[k] = visibility(ring);
        p.xi[k] = p.visibility[k] > 0 ? 2.0 * kPi * lt / p.visibility[k] : 0.0;
        double const tg = t_linear * tiers[k].gain_ratio();
        double const ratio = ring.r_max_km / (ring.r_min_km + epsilon[k]);
        p.psi[k] = -kPi * lt * tg * std::log((tg + ratio * ratio) / (1.0 + tg));
        p.chi_terms[k] = kPi * lt * ring.r_min_km * ring.r_min_km;
    }
    for (std::size_t j = 0; j < 2; ++j) {
        double const lt = rings[j].density_per_km2;
        p.omega_terms[j] = -kPi * lt * tiers[j].erp_factor() / tiers[0].erp_factor();
        p.mu_terms[j] = -kPi * lt * tiers[j].erp_factor() / tiers[1].erp_factor();
    }
    p.omega = p.omega_terms[0] + p.omega_terms[1];
    p.mu = p.mu_terms[0] + p.mu_terms[1];
    p.chi = p.chi_terms[0] + p.chi_terms[1];
    return p;
}

namespace {

// int_a^b r exp(chi + c r^2) dr for c <= 0, evaluated without overflow.
double gaussian_ring_integral(double chi, double c, double a, double b)
{
    if (!(b > a)) {
        return 0.0;
    }
    double const a2 = a * a;
    double const b2 = b * b;
    if (c == 0) {
        return std::exp(chi) * 0.5 * (b2 - a2);
    }
    return std::exp(chi + c * a2) * std::expm1(c * (b2 - a2)) / (2.0 * c);
}

}  // namespace

CoveragePoint coverage_closed_form(std::vector<TierConfig> const& tiers,
                                   double t_linear,
                                   std::array<double, 2> epsilon)
{
    auto const p = closed_form_params(tiers, t_linear, epsilon);
    CoveragePoint point;
    point.threshold_db = linear_to_db(t_linear);
    for (std::size_t k = 0; k < 2; ++k) {
        std::size_t const j = 1 - k;
        auto const ring = tiers[k].annulus();
        auto const ratios = tier_ratios(tiers, k, j);
        auto const& comp = k == 0 ? p.omega_terms : p.mu_terms;
        double const own = comp[k];
        double const both = comp[0] + comp[1];
        double const lo = ring.r_min_km;
        double const hi = ring.r_max_km;
        double const l_knot = std::clamp(ratios.l_bound_km, lo, hi);
        double const u_knot = std::clamp(ratios.u_bound_km, lo, hi);
        // Competitor silent below L, exponential competition up to U, and
        // no association beyond U.
        double const inner =
            gaussian_ring_integral(p.chi_terms[k], p.psi[k] + own, lo, l_knot) +
            gaussian_ring_integral(p.chi, p.psi[k] + both, l_knot, u_knot);
        point.per_tier.push_back(clamp01(p.visibility[k] * p.xi[k] * inner));
    }
    point.total = clamp01(point.per_tier[0] + point.per_tier[1]);
    return point;
}

CoverageCurve coverage_curve(std::vector<TierConfig> const& tiers,
                             std::vector<double> const& thresholds_db,
                             CoverageMethod method, CurveOptions const& opts)
{
    if (method == CoverageMethod::MonteCarlo ||
        method == CoverageMethod::GridBaseline) {
        throw InvalidParameter("coverage_curve evaluates analytic methods only");
    }
    if (!std::is_sorted(thresholds_db.begin(), thresholds_db.end())) {
        throw InvalidParameter("thresholds must be sorted");
    }
    CoverageCurve curve;
    curve.method = method;
    for (double db : thresholds_db) {
        CoveragePoint point;
        try {
            double const t = db_to_linear(db);
            switch (method) {
                case CoverageMethod::Exact:
                    point = coverage_exact(tiers, t, opts.analytic);
                    break;
                case CoverageMethod::Approx:
                    point = coverage_approx(tiers, t, opts.kappa, opts.analytic);
                    break;
                default:
                    point = coverage_closed_form(tiers, t, opts.epsilon);
                    break;
            }
        } catch (std::exception const& e) {
            point = CoveragePoint{};
            point.total = std::numeric_limits<double>::quiet_NaN();
            point.error = e.what();
        }
        point.threshold_db = db;
        curve.points.push_back(std::move(point));
    }
    return curve;
}

double fit_scalar_kappa(std::vector<TierConfig> const& tiers,
                        std::vector<double> const& thresholds_db,
                        AnalyticOptions const& opts)
{
    std::vector<double> exact;
    for (double db : thresholds_db) {
        exact.push_back(coverage_exact(tiers, db_to_linear(db), opts).total);
    }
    auto objective = [&](double kappa) {
        double worst = 0.0;
        for (std::size_t i = 0; i < thresholds_db.size(); ++i) {
            double const approx =
                coverage_approx(tiers, db_to_linear(thresholds_db[i]),
                                KappaPolicy::scalar(kappa), opts)
                    .total;
            worst = std::max(worst, std::abs(approx - exact[i]));
        }
        return worst;
    };
    return golden_minimize(objective, kappa_lower_bound(1), 1.0, 25);
}

}  // namespace istn
