#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

// Numerical kernels used by the analytics: Gauss hypergeometric 2F1,
// incomplete gamma functions, Gamma(M,1) expectations, adaptive quadrature,
// numerical Laplace inversion and real polynomial roots.
namespace cfmec::specfun {

// 2F1(a, b; c; z) for real z <= 0. Throws NumericalError if the series does
// not converge within the term budget.
double hyp2f1(double a, double b, double c, double z);

// Upper incomplete gamma Gamma(s, x) (not regularized), s > 0, x >= 0.
double upper_incomplete_gamma(double s, double x);

// Regularized upper incomplete gamma Q(s, x) = Gamma(s, x) / Gamma(s).
double upper_incomplete_gamma_regularized(double s, double x);

// Regularized lower incomplete gamma P(s, x) = gamma(s, x) / Gamma(s).
double lower_incomplete_gamma_regularized(double s, double x);

// Gauss quadrature for E[g^power f(g)], g ~ Gamma(shape, 1). The rule absorbs
// g^(shape - 1 + power) e^-g into the weight, so only f is sampled.
class GammaQuadrature {
public:
    GammaQuadrature(double shape, std::size_t nodes, double power = 0.0);

    double shape() const noexcept { return shape_; }
    double power() const noexcept { return power_; }
    std::span<const double> nodes() const noexcept { return x_; }
    std::span<const double> weights() const noexcept { return w_; }

    // Returns E[g^power f(g)]. Non-finite samples raise NumericalError.
    template <class F>
    double expect(F&& f) const {
        double acc = 0.0;
        for (std::size_t k = 0; k < x_.size(); ++k) acc += w_[k] * f(x_[k]);
        check_finite(acc);
        return scale_ * acc;
    }

private:
    static void check_finite(double v);

    double shape_;
    double power_;
    double scale_;  // Gamma(shape + power) / Gamma(shape)
    std::vector<double> x_;
    std::vector<double> w_;
};

struct GammaExpectationSettings {
    std::size_t nodes = 64;
    // Relative disagreement allowed between the n- and 2n-node rules.
    double resolution_tol = 1e-6;
};

// E[g^power f(g)] with g ~ Gamma(M, 1), evaluated on n and 2n nodes; the 2n
// result is returned. Throws NumericalError when the two differ by more than
// the resolution tolerance.
double gamma_expectation(const std::function<double(double)>& f, double shape,
                         const GammaExpectationSettings& settings = {}, double power = 0.0);

struct QuadratureResult {
    double value = 0.0;
    double error_estimate = 0.0;
    std::size_t intervals = 0;
};

// Adaptive Gauss-Kronrod (7/15) on [a, b] with a global absolute tolerance.
QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           double abs_tol = 1e-9, std::size_t max_intervals = 2000);

enum class LaplaceMethod { euler, talbot };

struct LaplaceInversionSettings {
    LaplaceMethod method = LaplaceMethod::euler;
    // Euler: number of alternating-series terms before binomial averaging.
    // Talbot: number of contour nodes.
    int terms = 24;
    double tolerance = 1e-7;
};

void validate(const LaplaceInversionSettings& s);

using LaplaceTransform = std::function<std::complex<double>(std::complex<double>)>;

// CDF at t of the density whose Laplace transform is given, computed by
// inverting transform(s)/s. Clamped to [0, 1].
double invert_laplace_cdf(const LaplaceTransform& transform, double t,
                          const LaplaceInversionSettings& settings = {});

// Raw inverse of an arbitrary transform at t (no clamping, no division by s).
double invert_laplace(const LaplaceTransform& transform, double t,
                      const LaplaceInversionSettings& settings = {});

struct PolyRoots {
    std::vector<double> roots;      // real roots, ascending
    std::vector<double> residuals;  // |p(root)| / sum_k |c_k| |root|^k
};

// Real roots of c[0] + c[1] x + ... + c[n] x^n via companion-matrix
// eigenvalues, Newton-polished. Throws NumericalError if a polished root
// keeps a relative residual above max_residual.
PolyRoots poly_roots_real(std::span<const double> coeffs, double max_residual = 1e-6);

// Horner evaluation of c[0] + c[1] x + ... .
double poly_eval(std::span<const double> coeffs, double x);

// Tolerances used by the analytical pipeline, gathered so callers and tests
// can pin them in one place.
struct NumericalSettings {
    double radial_abs_tol = 1e-9;
    GammaExpectationSettings gamma;
    LaplaceInversionSettings laplace;
    // Truncation threshold for Poisson sums over the number of connected APs
    // and for queue-length sums.
    double tail_tol = 1e-10;
    // Raw probabilities further than this outside [0,1] are reported.
    double clamp_warn = 1e-6;
};

namespace detail {
// Individual 2F1 evaluation paths, exposed for cross-checks.
double hyp2f1_series(double a, double b, double c, double z);
double hyp2f1_pfaff(double a, double b, double c, double z);
double hyp2f1_reciprocal(double a, double b, double c, double z);
double reciprocal_gamma(double x);
}  // namespace detail

}  // namespace cfmec::specfun
