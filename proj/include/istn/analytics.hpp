#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "istn/geometry.hpp"
#include "istn/tier.hpp"

namespace istn {

enum class CoverageMethod { Exact, Approx, ClosedForm, MonteCarlo, GridBaseline };

std::string to_string(CoverageMethod method);
//! Accepts exact | approx | closed_form | mc | grid_baseline.
CoverageMethod parse_coverage_method(std::string const& name);

struct AnalyticOptions {
    //! The association factor for a competing tier j is zero once the
    //! competing threshold distance exceeds R_max,j. Setting this flag
    //! replaces that zero by the void probability of tier j, i.e. an empty
    //! tier j no longer blocks association with the anchor tier.
    bool void_aware_tail = false;
    double outer_rel_tol = 1e-8;
    double inner_rel_tol = 1e-9;
};

// ---------------------------------------------------------------------------
// Nearest-distance laws on the displaced ring
// ---------------------------------------------------------------------------

double void_probability(AnnulusGeometry const& annulus);
//! Nearest-BS distance density given at least one BS in the ring.
double first_touch_pdf(AnnulusGeometry const& annulus, double r);
double first_touch_cdf(AnnulusGeometry const& annulus, double r);

// ---------------------------------------------------------------------------
// Association
// ---------------------------------------------------------------------------

/// Ratios of tier j relative to the anchor tier k, plus the knot radii
/// (in anchor distance) where tier j's competition switches branch.
struct TierRatios {
    double p_hat;
    double g_hat;
    double b_hat;
    double e_hat;
    double alpha_hat;
    double u_bound_km;
    double l_bound_km;
};

TierRatios tier_ratios(std::vector<TierConfig> const& tiers, std::size_t k,
                       std::size_t j);

//! P[tier j does not beat anchor k | anchor nearest at r]; for j == k this
//! is the anchor's own void factor exp(-pi lt_k (r^2 - R_min,k^2)).
double association_factor(std::vector<TierConfig> const& tiers, std::size_t k,
                          std::size_t j, double r,
                          AnalyticOptions const& opts = {});

//! Product of association factors over all j != k.
double association_weight(std::vector<TierConfig> const& tiers, std::size_t k,
                          double r, AnalyticOptions const& opts = {});

//! P[J = k | tier k visible].
double association_probability(std::vector<TierConfig> const& tiers,
                               std::size_t k,
                               AnalyticOptions const& opts = {});

//! P[J = k] = P[J = k | visible] * P[visible].
double association_mass(std::vector<TierConfig> const& tiers, std::size_t k,
                        AnalyticOptions const& opts = {});

//! Serving-distance density given J = k and tier k visible.
double conditional_distance_pdf(std::vector<TierConfig> const& tiers,
                                std::size_t k, double r,
                                AnalyticOptions const& opts = {});

//! Knots (U and L radii) of tier k's association integrand inside
//! [R_min,k, R_max,k].
std::vector<double> association_knots(std::vector<TierConfig> const& tiers,
                                      std::size_t k);

// ---------------------------------------------------------------------------
// Interference Laplace transform
// ---------------------------------------------------------------------------

//! E[exp(-s (I + noise)) | serving distance r] for the tier's interferers,
//! which form a PPP on the ring beyond r.
double laplace_interference(TierConfig const& tier, double r, double s,
                            AnalyticOptions const& opts = {});

//! d^q L / ds^q for q = 0..q_max. Throws DerivativeOverflow when a value
//! is not representable.
std::vector<double> laplace_derivatives(TierConfig const& tier, double r,
                                        double s, int q_max,
                                        AnalyticOptions const& opts = {});

//! s^q / q! * (-1)^q d^q L / ds^q for q = 0..q_max, i.e.
//! E[(sX)^q exp(-sX)] / q!. Every entry lies in [0, 1].
std::vector<double> laplace_scaled_derivatives(TierConfig const& tier,
                                               double r, double s, int q_max,
                                               AnalyticOptions const& opts = {});

//! L(s) at several s values sharing one quadrature.
std::vector<double> laplace_batch(TierConfig const& tier, double r,
                                  std::vector<double> const& s_values,
                                  AnalyticOptions const& opts = {});

// ---------------------------------------------------------------------------
// Coverage
// ---------------------------------------------------------------------------

struct CoveragePoint {
    double threshold_db = 0;
    double total = 0;
    //! Conditional coverage x association x visibility, one per tier.
    std::vector<double> per_tier;
    std::string error;

    bool ok() const { return error.empty(); }
};

struct CoverageCurve {
    CoverageMethod method = CoverageMethod::Exact;
    std::vector<CoveragePoint> points;
};

/*!
 * Tuning parameter of the binomial approximation of the incomplete gamma
 * function, one value per Gamma shape a = l + 1. Every value must lie in
 * [Gamma(l+2)^(-1/(l+1)), 1]; l = 0 always uses 1.
 */
class KappaPolicy {
  public:
    enum class Kind { LowerBound, Minimax, Scalar };

    static KappaPolicy lower_bound() { return KappaPolicy(Kind::LowerBound, 0); }
    //! Per-shape kappa minimizing sup_x |P(a, x) - (1 - exp(-kappa x))^a|.
    static KappaPolicy minimax() { return KappaPolicy(Kind::Minimax, 0); }
    //! One kappa for every l >= 1.
    static KappaPolicy scalar(double kappa) { return KappaPolicy(Kind::Scalar, kappa); }

    Kind kind() const { return kind_; }
    double scalar_value() const { return value_; }

    //! kappa for l = 0..max_shape-1; throws KappaOutOfRange.
    std::vector<double> kappas(int max_shape) const;
    std::string describe() const;

  private:
    KappaPolicy(Kind kind, double value) : kind_(kind), value_(value) {}

    Kind kind_;
    double value_;
};

//! Lower end of the admissible kappa range for index l.
double kappa_lower_bound(int l);
//! Per-shape minimax kappa (cached).
double kappa_minimax(int l);

CoveragePoint coverage_exact(std::vector<TierConfig> const& tiers,
                             double t_linear,
                             AnalyticOptions const& opts = {});

CoveragePoint coverage_approx(std::vector<TierConfig> const& tiers,
                              double t_linear, KappaPolicy const& kappa,
                              AnalyticOptions const& opts = {});

/// Constants of the two-tier interference-limited closed form.
struct ClosedFormParams {
    std::array<double, 2> xi{};         // 2 pi lt_k / (1 - void_k)
    std::array<double, 2> psi{};        // Laplace exponent coefficient
    std::array<double, 2> omega_terms{};  // competition coefficients, anchor 0
    double omega = 0;
    std::array<double, 2> mu_terms{};   // competition coefficients, anchor 1
    double mu = 0;
    std::array<double, 2> chi_terms{};  // pi lt_k R_min,k^2
    double chi = 0;
    std::array<double, 2> epsilon{};
    std::array<double, 2> visibility{};  // 1 - void_k
};

//! Throws PreconditionViolation unless K = 2, both path-loss exponents are
//! 2 and both fading laws are exponential-power (Rayleigh).
ClosedFormParams closed_form_params(std::vector<TierConfig> const& tiers,
                                    double t_linear,
                                    std::array<double, 2> epsilon);

CoveragePoint coverage_closed_form(std::vector<TierConfig> const& tiers,
                                   double t_linear,
                                   std::array<double, 2> epsilon);

struct CurveOptions {
    KappaPolicy kappa = KappaPolicy::minimax();
    std::array<double, 2> epsilon{0.0, 0.0};
    AnalyticOptions analytic;
};

//! Evaluates one analytic method on a threshold grid (dB). A failing point
//! keeps its error message and the sweep continues.
CoverageCurve coverage_curve(std::vector<TierConfig> const& tiers,
                             std::vector<double> const& thresholds_db,
                             CoverageMethod method,
                             CurveOptions const& opts = {});

//! Scalar kappa in [1/sqrt(2), 1] minimizing max_T |approx - exact| over
//! the given thresholds.
double fit_scalar_kappa(std::vector<TierConfig> const& tiers,
                        std::vector<double> const& thresholds_db,
                        AnalyticOptions const& opts = {});

}  // namespace istn
