#pragma once

#include <algorithm>
#include <cmath>
#include <limits>

#include "cfmec/errors.hpp"

namespace cfmec::offload {

template <class Objective>
ThetaOptimum maximize_over_theta(Objective&& objective, std::span<const double> grid,
                                 ThetaInterval feasible, double tol) {
    std::vector<double> xs;
    for (double th : grid)
        if (feasible.contains(th)) xs.push_back(th);
    if (xs.empty()) throw StabilityError("no theta on the search grid gives stable queues");
    std::sort(xs.begin(), xs.end());

    ThetaOptimum best{xs[0], -std::numeric_limits<double>::infinity()};
    std::size_t k = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double v = objective(xs[i]);
        if (v > best.value) {
            best = {xs[i], v};
            k = i;
        }
    }

    // Neighbouring grid points bracket the maximum of a unimodal objective.
    // Where the neighbour is unstable, stop halfway to the stability edge.
    double left = xs[k];
    double right = xs[k];
    if (k > 0) {
        left = xs[k - 1];
    } else {
        const double edge = std::max(feasible.lo, 0.0);
        if (xs[k] > edge) left = 0.5 * (edge + xs[k]);
        if (feasible.lo < 0.0) left = std::max(0.0, std::min(left, xs[k]));
    }
    if (k + 1 < xs.size()) {
        right = xs[k + 1];
    } else {
        const double edge = std::min(feasible.hi, 1.0);
        if (xs[k] < edge) right = 0.5 * (edge + xs[k]);
        if (feasible.hi > 1.0) right = std::min(1.0, std::max(right, xs[k]));
    }
    if (!(right - left > tol)) return best;

    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = left, b = right;
    double c = b - invphi * (b - a);
    double d = a + invphi * (b - a);
    double fc = objective(c);
    double fd = objective(d);
    while (b - a > tol) {
        if (fc >= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - invphi * (b - a);
            fc = objective(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + invphi * (b - a);
            fd = objective(d);
        }
    }
    if (fc > best.value) best = {c, fc};
    if (fd > best.value) best = {d, fd};
    return best;
}

}  // namespace cfmec::offload
