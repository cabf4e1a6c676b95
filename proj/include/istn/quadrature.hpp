#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <queue>
#include <span>
#include <string>
#include <vector>

#include "istn/errors.hpp"

namespace istn::quad {

struct Options {
    double rel_tol = 1e-9;
    double abs_tol = 1e-14;
    std::size_t max_intervals = 4000;
};

namespace detail {

// 15-point Kronrod extension of the 7-point Gauss rule (QUADPACK qk15).
inline constexpr std::array<double, 8> kKronrodNodes{
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
inline constexpr std::array<double, 8> kKronrodWeights{
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
// Gauss weights for Kronrod nodes 1, 3, 5 and the centre.
inline constexpr std::array<double, 4> kGaussWeights{
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Interval {
    double a;
    double b;
    std::size_t slot;  // offset into the value/error pools
    double score;
};

struct ByScore {
    bool operator()(Interval const& x, Interval const& y) const
    {
        return x.score < y.score;
    }
};

}  // namespace detail

/*!
 * Globally adaptive Gauss-Kronrod (G7/K15) integration of a vector-valued
 * integrand over [knots.front(), knots.back()].
 *
 * The integrand is called as f(x, out) and must write `dim` values into
 * `out`. Interior knots are used as forced breakpoints, which is how the
 * piecewise-smooth association integrands are handled.
 * Convergence requires every component to satisfy
 * err_i <= max(abs_tol, rel_tol * |I_i|). Throws QuadratureFailure when the
 * interval budget runs out first.
 */
template<class F>
std::vector<double> integrate_vector(F&& f, std::size_t dim,
                                     std::span<double const> knots,
                                     Options const& opts = {})
{
    using namespace detail;
    std::vector<double> total(dim, 0.0);
    if (knots.size() < 2 || dim == 0) {
        return total;
    }

    std::vector<double> values;
    std::vector<double> errors;
    std::vector<std::size_t> free_slots;
    std::vector<double> fc(dim), f1(dim), f2(dim), kron(dim), gauss(dim);

    auto alloc = [&]() -> std::size_t {
        if (!free_slots.empty()) {
            auto s = free_slots.back();
            free_slots.pop_back();
            return s;
        }
        auto s = values.size();
        values.resize(s + dim);
        errors.resize(s + dim);
        return s;
    };

    auto rule = [&](double a, double b, std::size_t slot) {
        double const centre = 0.5 * (a + b);
        double const half = 0.5 * (b - a);
        f(centre, std::span<double>(fc));
        for (std::size_t i = 0; i < dim; ++i) {
            kron[i] = kKronrodWeights[7] * fc[i];
            gauss[i] = kGaussWeights[3] * fc[i];
        }
        for (std::size_t j = 0; j < 7; ++j) {
            double const dx = half * kKronrodNodes[j];
            f(centre - dx, std::span<double>(f1));
            f(centre + dx, std::span<double>(f2));
            for (std::size_t i = 0; i < dim; ++i) {
                double const sum = f1[i] + f2[i];
                kron[i] += kKronrodWeights[j] * sum;
                if (j % 2 == 1) {
                    gauss[i] += kGaussWeights[j / 2] * sum;
                }
            }
        }
        for (std::size_t i = 0; i < dim; ++i) {
            values[slot + i] = kron[i] * half;
            errors[slot + i] = std::abs((kron[i] - gauss[i]) * half);
        }
    };

    auto tolerance = [&](std::size_t i) {
        return std::max(opts.abs_tol, opts.rel_tol * std::abs(total[i]));
    };
    auto score_of = [&](std::size_t slot) {
        double worst = 0.0;
        for (std::size_t i = 0; i < dim; ++i) {
            worst = std::max(worst, errors[slot + i] / tolerance(i));
        }
        return worst;
    };

    std::priority_queue<Interval, std::vector<Interval>, ByScore> heap;
    std::vector<double> err_total(dim, 0.0);
    for (std::size_t k = 0; k + 1 < knots.size(); ++k) {
        double const a = knots[k];
        double const b = knots[k + 1];
        if (!(b > a)) {
            continue;
        }
        auto slot = alloc();
        rule(a, b, slot);
        for (std::size_t i = 0; i < dim; ++i) {
            total[i] += values[slot + i];
            err_total[i] += errors[slot + i];
        }
        heap.push({a, b, slot, 0.0});
    }
    {
        // Scores need the totals; rebuild once all pieces are in.
        std::vector<Interval> items;
        while (!heap.empty()) {
            items.push_back(heap.top());
            heap.pop();
        }
        for (auto& it : items) {
            it.score = score_of(it.slot);
            heap.push(it);
        }
    }

    auto converged = [&]() {
        for (std::size_t i = 0; i < dim; ++i) {
            if (err_total[i] > tolerance(i)) {
                return false;
            }
        }
        return true;
    };

    std::size_t count = heap.size();
    while (!converged()) {
        if (heap.empty()) {
            break;
        }
        Interval worst = heap.top();
        double const mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b) || count >= opts.max_intervals) {
            throw QuadratureFailure(
                "adaptive quadrature did not reach tolerance on [" +
                std::to_string(knots.front()) + ", " +
                std::to_string(knots.back()) + "]");
        }
        heap.pop();
        auto left = alloc();
        auto right = alloc();
        rule(worst.a, mid, left);
        rule(mid, worst.b, right);
        for (std::size_t i = 0; i < dim; ++i) {
            total[i] += values[left + i] + values[right + i] -
                        values[worst.slot + i];
            err_total[i] += errors[left + i] + errors[right + i] -
                            errors[worst.slot + i];
        }
        free_slots.push_back(worst.slot);
        heap.push({worst.a, mid, left, score_of(left)});
        heap.push({mid, worst.b, right, score_of(right)});
        ++count;
    }
    return total;
}

//! Builds a sorted knot list from [a, b] plus interior breakpoints.
inline std::vector<double> make_knots(double a, double b,
                                      std::span<double const> breakpoints)
{
    std::vector<double> knots{a};
    for (double x : breakpoints) {
        if (x > a && x < b) {
            knots.push_back(x);
        }
    }
    knots.push_back(b);
    std::sort(knots.begin(), knots.end());
    knots.erase(std::unique(knots.begin(), knots.end()), knots.end());
    return knots;
}

//! Scalar convenience wrapper; `breakpoints` may be unsorted and may lie
//! outside [a, b] (those are ignored).
template<class F>
double integrate(F&& f, double a, double b, Options const& opts = {},
                 std::span<double const> breakpoints = {})
{
    if (!(b > a)) {
        return 0.0;
    }
    auto const knots = make_knots(a, b, breakpoints);
    auto result = integrate_vector(
        [&f](double x, std::span<double> out) { out[0] = f(x); }, 1,
        std::span<double const>(knots), opts);
    return result[0];
}

}  // namespace istn::quad
