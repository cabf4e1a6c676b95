#pragma once

#include <string>
#include <variant>
#include <vector>

#include "istn/rng.hpp"

namespace istn {

/*!
 * Land-mobile-satellite shadowed-Rician power law.
 *
 * m is the Nakagami shape of the line-of-sight amplitude, 2b the diffuse
 * multipath power and omega the mean line-of-sight power. Derived constants
 * follow the usual parameterization:
 *   Z = (2bm / (2bm + omega))^m / (2b),  beta = 1 / (2b),
 *   delta = omega / (2b (2bm + omega)).
 */
struct ShadowedRicianParams {
    int m = 1;
    double b = 0.5;
    double omega = 0.0;

    //! Validated construction; throws InvalidParameter.
    static ShadowedRicianParams make(int m, double b, double omega);

    double z() const;
    double beta() const;
    double delta() const;
    //! 1 / (beta - delta) = 2b + omega / m.
    double scale() const { return 2.0 * b + omega / m; }
    //! log of zeta(l) = Z (-delta)^l (1-m)_l / (l!)^2, which is positive.
    double log_zeta(int l) const;
    double zeta(int l) const;
};

/// Gamma-distributed channel power (Nakagami-m amplitude).
struct NakagamiParams {
    int m = 1;
    double mean_power = 1.0;

    static NakagamiParams make(int m, double mean_power);
};

/*!
 * A fading power law written as a finite mixture of Gamma laws sharing one
 * scale: component i has shape first_shape + i and weight weights[i].
 *
 * Shadowed-Rician power with integer m is exactly such a mixture (shapes
 * 1..m, weights zeta(l) l! scale^(l+1)); Nakagami-m is the single component
 * of shape m. Every analytic quantity the coverage expressions need (CCDF
 * series, MGF, MGF derivatives) is evaluated through this form.
 */
struct GammaMixture {
    double scale = 1.0;
    int first_shape = 1;
    std::vector<double> weights;

    int last_shape() const
    {
        return first_shape + static_cast<int>(weights.size()) - 1;
    }
};

class FadingLaw {
  public:
    FadingLaw(ShadowedRicianParams p);
    FadingLaw(NakagamiParams p);

    static FadingLaw rayleigh(double mean_power = 1.0)
    {
        return FadingLaw(NakagamiParams::make(1, mean_power));
    }

    bool is_shadowed_rician() const
    {
        return std::holds_alternative<ShadowedRicianParams>(params_);
    }
    ShadowedRicianParams const* shadowed_rician() const
    {
        return std::get_if<ShadowedRicianParams>(&params_);
    }
    NakagamiParams const* nakagami() const
    {
        return std::get_if<NakagamiParams>(&params_);
    }

    //! Nakagami shape m of the law (highest Gamma shape in the mixture).
    int shape() const { return mixture_.last_shape(); }
    GammaMixture const& mixture() const { return mixture_; }

    double pdf(double x) const;
    double cdf(double x) const;
    double ccdf(double x) const;
    //! E[exp(-x H)].
    double mgf(double x) const;
    double mean() const;
    double sample(Rng& rng) const;

    std::string describe() const;

  private:
    std::variant<ShadowedRicianParams, NakagamiParams> params_;
    GammaMixture mixture_;
};

double sr_pdf(ShadowedRicianParams const& p, double x);
double sr_cdf(ShadowedRicianParams const& p, double x);
//! 1 - sum_l zeta(l) Gamma(l+1) / (beta-delta)^(l+1)
//!       * (1 - exp(-xt) sum_{q<=l} xt^q / q!),  xt = (beta - delta) x.
double sr_ccdf_expanded(ShadowedRicianParams const& p, double x);
//! E[exp(-s g H)] in the closed rational form.
double sr_mgf_term(ShadowedRicianParams const& p, double s, double g);
double sr_sample(ShadowedRicianParams const& p, Rng& rng);
double nakagami_sample(NakagamiParams const& p, Rng& rng);

double mean_power(FadingLaw const& law);

//! Mixture weights of the shadowed-Rician law (index l = shape - 1).
GammaMixture sr_mixture(ShadowedRicianParams const& p);

}  // namespace istn
