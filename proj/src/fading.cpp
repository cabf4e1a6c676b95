#include "istn/fading.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include <boost/math/special_functions/gamma.hpp>

#include "istn/errors.hpp"

namespace istn {

namespace {

void require_nonnegative(double x)
{
    if (!(x >= 0)) {
        throw NegativeInput("fading law evaluated at negative power " +
                            std::to_string(x));
    }
}

// exp(-x) sum_{q<=l} x^q / q!, accumulated in log space.
double poisson_tail_sum(int l, double x)
{
    if (x == 0) {
        return 1.0;
    }
    double const log_x = std::log(x);
    double sum = 0.0;
    for (int q = 0; q <= l; ++q) {
        sum += std::exp(-x + q * log_x - std::lgamma(q + 1.0));
    }
    return sum;
}

}  // namespace

// ---------------------------------------------------------------------------
// Shadowed-Rician
// ---------------------------------------------------------------------------

ShadowedRicianParams ShadowedRicianParams::make(int m, double b, double omega)
{
    if (m < 1) {
        throw InvalidParameter("shadowed-Rician m must be a positive integer");
    }
    if (!(b > 0) || !std::isfinite(b)) {
        throw InvalidParameter("shadowed-Rician b must be positive");
    }
    if (!(omega >= 0) || !std::isfinite(omega)) {
        throw InvalidParameter("shadowed-Rician omega must be nonnegative");
    }
    return ShadowedRicianParams{m, b, omega};
}

double ShadowedRicianParams::z() const
{
    double const two_bm = 2.0 * b * m;
    return std::pow(two_bm / (two_bm + omega), m) / (2.0 * b);
}

double ShadowedRicianParams::beta() const { return 1.0 / (2.0 * b); }

double ShadowedRicianParams::delta() const
{
    return omega / (2.0 * b * (2.0 * b * m + omega));
}

double ShadowedRicianParams::log_zeta(int l) const
{
    if (l < 0 || l >= m) {
        return -std::numeric_limits<double>::infinity();
    }
    double const two_bm = 2.0 * b * m;
    double const log_z =
        m * std::log(two_bm / (two_bm + omega)) - std::log(2.0 * b);
    if (l == 0) {
        return log_z;
    }
    double const d = delta();
    if (d == 0) {
        return -std::numeric_limits<double>::infinity();
    }
    // (-delta)^l (1-m)_l = delta^l (m-1)! / (m-1-l)!
    return log_z + l * std::log(d) + std::lgamma(static_cast<double>(m)) -
           std::lgamma(static_cast<double>(m - l)) -
           2.0 * std::lgamma(l + 1.0);
}

double ShadowedRicianParams::zeta(int l) const { return std::exp(log_zeta(l)); }

GammaMixture sr_mixture(ShadowedRicianParams const& p)
{
    GammaMixture mix;
    mix.scale = p.scale();
    mix.first_shape = 1;
    mix.weights.resize(static_cast<std::size_t>(p.m));
    double const log_scale = std::log(mix.scale);
    for (int l = 0; l < p.m; ++l) {
        mix.weights[static_cast<std::size_t>(l)] = std::exp(
            p.log_zeta(l) + std::lgamma(l + 1.0) + (l + 1) * log_scale);
    }
    return mix;
}

double sr_pdf(ShadowedRicianParams const& p, double x)
{
    require_nonnegative(x);
    if (x == 0) {
        return p.z();
    }
    double const rate = 1.0 / p.scale();
    double const log_x = std::log(x);
    double sum = 0.0;
    for (int l = 0; l < p.m; ++l) {
        sum += std::exp(p.log_zeta(l) + l * log_x - rate * x);
    }
    return sum;
}

double sr_cdf(ShadowedRicianParams const& p, double x)
{
    require_nonnegative(x);
    if (x == 0) {
        return 0.0;
    }
    auto const mix = sr_mixture(p);
    double const xt = x / mix.scale;
    double sum = 0.0;
    for (int l = 0; l < p.m; ++l) {
        sum += mix.weights[static_cast<std::size_t>(l)] *
               boost::math::gamma_p(l + 1.0, xt);
    }
    return std::min(sum, 1.0);
}

double sr_ccdf_expanded(ShadowedRicianParams const& p, double x)
{
    require_nonnegative(x);
    auto const mix = sr_mixture(p);
    double const xt = x / mix.scale;
    double sum = 0.0;
    for (int l = 0; l < p.m; ++l) {
        sum += mix.weights[static_cast<std::size_t>(l)] *
               (1.0 - poisson_tail_sum(l, xt));
    }
    return 1.0 - sum;
}

double sr_mgf_term(ShadowedRicianParams const& p, double s, double g)
{
    // (2bm)^m (1+2bsg)^(m-1) / [(2bm+omega)(1+2bsg) - omega]^m
    //   = (1 + 2bsg)^(m-1) / (1 + scale * s g)^m
    double const x = s * g;
    return std::exp((p.m - 1) * std::log1p(2.0 * p.b * x) -
                    p.m * std::log1p(p.scale() * x));
}

double sr_sample(ShadowedRicianParams const& p, Rng& rng)
{
    std::normal_distribution<double> gauss(0.0, std::sqrt(p.b));
    double los = 0.0;
    if (p.omega > 0) {
        std::gamma_distribution<double> gamma(p.m, p.omega / p.m);
        los = std::sqrt(gamma(rng));
    }
    // The diffuse part is circular, so the LOS phase can be fixed to zero.
    double const re = gauss(rng) + los;
    double const im = gauss(rng);
    return re * re + im * im;
}

// ---------------------------------------------------------------------------
// Nakagami
// ---------------------------------------------------------------------------

NakagamiParams NakagamiParams::make(int m, double mean_power)
{
    if (m < 1) {
        throw InvalidParameter("Nakagami m must be a positive integer");
    }
    if (!(mean_power > 0) || !std::isfinite(mean_power)) {
        throw InvalidParameter("Nakagami mean power must be positive");
    }
    return NakagamiParams{m, mean_power};
}

double nakagami_sample(NakagamiParams const& p, Rng& rng)
{
    if (p.m == 1) {
        return -p.mean_power * std::log(rng.uniform_open0());
    }
    std::gamma_distribution<double> gamma(p.m, p.mean_power / p.m);
    return gamma(rng);
}

// ---------------------------------------------------------------------------
// FadingLaw
// ---------------------------------------------------------------------------

FadingLaw::FadingLaw(ShadowedRicianParams p)
    : params_(ShadowedRicianParams::make(p.m, p.b, p.omega)),
      mixture_(sr_mixture(p))
{
}

FadingLaw::FadingLaw(NakagamiParams p)
    : params_(NakagamiParams::make(p.m, p.mean_power))
{
    mixture_.scale = p.mean_power / p.m;
    mixture_.first_shape = p.m;
    mixture_.weights = {1.0};
}

double FadingLaw::pdf(double x) const
{
    require_nonnegative(x);
    if (auto const* sr = shadowed_rician()) {
        return sr_pdf(*sr, x);
    }
    auto const& mix = mixture_;
    double const a = mix.first_shape;
    if (x == 0) {
        return a == 1 ? 1.0 / mix.scale : 0.0;
    }
    return std::exp((a - 1) * std::log(x / mix.scale) - x / mix.scale -
                    std::lgamma(a)) /
           mix.scale;
}

double FadingLaw::cdf(double x) const
{
    require_nonnegative(x);
    if (auto const* sr = shadowed_rician()) {
        return sr_cdf(*sr, x);
    }
    return boost::math::gamma_p(static_cast<double>(mixture_.first_shape),
                                x / mixture_.scale);
}

double FadingLaw::ccdf(double x) const
{
    require_nonnegative(x);
    double sum = 0.0;
    for (std::size_t i = 0; i < mixture_.weights.size(); ++i) {
        sum += mixture_.weights[i] *
               boost::math::gamma_q(
                   static_cast<double>(mixture_.first_shape) + i,
                   x / mixture_.scale);
    }
    return sum;
}

double FadingLaw::mgf(double x) const
{
    double sum = 0.0;
    double const lp = std::log1p(mixture_.scale * x);
    for (std::size_t i = 0; i < mixture_.weights.size(); ++i) {
        double const shape = mixture_.first_shape + static_cast<double>(i);
        sum += mixture_.weights[i] * std::exp(-shape * lp);
    }
    return sum;
}

double FadingLaw::mean() const
{
    if (auto const* sr = shadowed_rician()) {
        return 2.0 * sr->b + sr->omega;
    }
    return nakagami()->mean_power;
}

double FadingLaw::sample(Rng& rng) const
{
    if (auto const* sr = shadowed_rician()) {
        return sr_sample(*sr, rng);
    }
    return nakagami_sample(*nakagami(), rng);
}

std::string FadingLaw::describe() const
{
    std::ostringstream os;
    if (auto const* sr = shadowed_rician()) {
        os << "shadowed-rician(m=" << sr->m << ", b=" << sr->b
           << ", omega=" << sr->omega << ")";
    } else {
        auto const* nk = nakagami();
        os << "nakagami(m=" << nk->m << ", mean=" << nk->mean_power << ")";
    }
    return os.str();
}

double mean_power(FadingLaw const& law) { return law.mean(); }

}  // namespace istn
