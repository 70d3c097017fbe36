#include "cfmec/specfun.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <queue>
#include <sstream>
#include <tuple>
#include <unsupported/Eigen/Polynomials>

#include "cfmec/errors.hpp"

namespace cfmec::specfun {

namespace {

constexpr int kMaxSeriesTerms = 200000;
constexpr double kEps = 2.220446049250313e-16;

bool is_nonpositive_integer(double x) { return x <= 0.0 && x == std::nearbyint(x); }

[[noreturn]] void fail_hyp(const char* path, double a, double b, double c, double z, int n,
                           double sum, double term) {
    std::ostringstream os;
    os << "hyp2f1 " << path << " did not converge: a=" << a << " b=" << b << " c=" << c
       << " z=" << z << " terms=" << n << " partial=" << sum << " last_term=" << term;
    throw NumericalError(os.str());
}

}  // namespace

namespace detail {

double reciprocal_gamma(double x) {
    if (is_nonpositive_integer(x)) return 0.0;
    return 1.0 / boost::math::tgamma(x);
}

// Plain Gauss series, |z| < 1.
double hyp2f1_series(double a, double b, double c, double z) {
    if (z == 0.0) return 1.0;
    if (!(std::abs(z) < 1.0)) fail_hyp("series", a, b, c, z, 0, 0.0, 0.0);
    double sum = 1.0;
    double term = 1.0;
    int quiet = 0;
    for (int n = 0; n < kMaxSeriesTerms; ++n) {
        const double ratio = (a + n) * (b + n) / ((c + n) * (n + 1.0)) * z;
        term *= ratio;
        sum += term;
        if (term == 0.0) return sum;  // terminating polynomial
        if (std::abs(term) <= kEps * std::abs(sum) && std::abs(ratio) < 1.0) {
            if (++quiet >= 3) return sum;
        } else {
            quiet = 0;
        }
    }
    fail_hyp("series", a, b, c, z, kMaxSeriesTerms, sum, term);
}

double hyp2f1_pfaff(double a, double b, double c, double z) {
    const double w = z / (z - 1.0);
    return std::pow(1.0 - z, -a) * hyp2f1_series(a, c - b, c, w);
}

// Connection formula in 1/z, valid for z < -1 when a - b is not an integer.
double hyp2f1_reciprocal(double a, double b, double c, double z) {
    const double mz = -z;
    const double gc = boost::math::tgamma(c);
    const double t1 = gc * boost::math::tgamma(b - a) * reciprocal_gamma(b) *
                      reciprocal_gamma(c - a) * std::pow(mz, -a) *
                      hyp2f1_series(a, 1.0 - c + a, 1.0 - b + a, 1.0 / z);
    const double t2 = gc * boost::math::tgamma(a - b) * reciprocal_gamma(a) *
                      reciprocal_gamma(c - b) * std::pow(mz, -b) *
                      hyp2f1_series(b, 1.0 - c + b, 1.0 - a + b, 1.0 / z);
    return t1 + t2;
}

}  // namespace detail

double hyp2f1(double a, double b, double c, double z) {
    if (is_nonpositive_integer(c)) throw ConfigError("hyp2f1: c must not be a non-positive integer");
    if (!(z <= 0.0) || !std::isfinite(z)) throw ConfigError("hyp2f1: z must be finite and <= 0");
    if (z == 0.0) return 1.0;
    if (z >= -0.5) return detail::hyp2f1_series(a, b, c, z);
    const double ab = a - b;
    const bool integer_gap = std::abs(ab - std::nearbyint(ab)) < 1e-8;
    if (z >= -9.0 || integer_gap) return detail::hyp2f1_pfaff(a, b, c, z);
    return detail::hyp2f1_reciprocal(a, b, c, z);
}

double upper_incomplete_gamma(double s, double x) {
    if (!(s > 0.0) || !(x >= 0.0)) throw ConfigError("upper_incomplete_gamma: need s > 0, x >= 0");
    return boost::math::tgamma(s, x);
}

double upper_incomplete_gamma_regularized(double s, double x) {
    if (!(s > 0.0) || !(x >= 0.0)) throw ConfigError("incomplete gamma: need s > 0, x >= 0");
    return boost::math::gamma_q(s, x);
}

double lower_incomplete_gamma_regularized(double s, double x) {
    if (!(s > 0.0) || !(x >= 0.0)) throw ConfigError("incomplete gamma: need s > 0, x >= 0");
    return boost::math::gamma_p(s, x);
}

// ---------------------------------------------------------------------------
// Gauss-Laguerre rules (Golub-Welsch on the Jacobi matrix of x^a e^-x).

namespace {

struct LaguerreRule {
    std::vector<double> x;
    std::vector<double> w;  // normalized to sum 1
};

std::shared_ptr<const LaguerreRule> laguerre_rule(double a, std::size_t n) {
    static std::mutex mu;
    static std::map<std::pair<double, std::size_t>, std::shared_ptr<const LaguerreRule>> cache;
    std::lock_guard lock(mu);
    auto key = std::make_pair(a, n);
    if (auto it = cache.find(key); it != cache.end()) return it->second;

    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n),
                                              static_cast<Eigen::Index>(n));
    for (std::size_t k = 0; k < n; ++k) {
        const auto i = static_cast<Eigen::Index>(k);
        J(i, i) = 2.0 * static_cast<double>(k) + 1.0 + a;
        if (k + 1 < n) {
            const double kk = static_cast<double>(k + 1);
            const double off = std::sqrt(kk * (kk + a));
            J(i, i + 1) = off;
            J(i + 1, i) = off;
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    if (es.info() != Eigen::Success) throw NumericalError("Gauss-Laguerre eigen-decomposition failed");
    auto rule = std::make_shared<LaguerreRule>();
    rule->x.resize(n);
    rule->w.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        const auto i = static_cast<Eigen::Index>(k);
        rule->x[k] = es.eigenvalues()(i);
        const double v = es.eigenvectors()(0, i);
        rule->w[k] = v * v;
    }
    cache.emplace(key, rule);
    return rule;
}

}  // namespace

GammaQuadrature::GammaQuadrature(double shape, std::size_t nodes, double power)
    : shape_(shape), power_(power) {
    if (!(shape > 0.0)) throw ConfigError("GammaQuadrature: shape must be > 0");
    if (nodes < 2) throw ConfigError("GammaQuadrature: need at least 2 nodes");
    if (!(shape + power > 0.0)) throw ConfigError("GammaQuadrature: shape + power must be > 0");
    auto rule = laguerre_rule(shape - 1.0 + power, nodes);
    x_ = rule->x;
    w_ = rule->w;
    scale_ = std::exp(std::lgamma(shape + power) - std::lgamma(shape));
}

void GammaQuadrature::check_finite(double v) {
    if (!std::isfinite(v)) throw NumericalError("gamma expectation: integrand produced a non-finite value");
}

double gamma_expectation(const std::function<double(double)>& f, double shape,
                         const GammaExpectationSettings& settings, double power) {
    const GammaQuadrature coarse(shape, settings.nodes, power);
    const GammaQuadrature fine(shape, 2 * settings.nodes, power);
    const double v1 = coarse.expect(f);
    const double v2 = fine.expect(f);
    const double scale = std::max(std::abs(v2), 1e-12);
    if (std::abs(v1 - v2) > settings.resolution_tol * scale) {
        std::ostringstream os;
        os << "gamma_expectation: " << settings.nodes << "-node and " << 2 * settings.nodes
           << "-node rules disagree (" << v1 << " vs " << v2 << ")";
        throw NumericalError(os.str());
    }
    return v2;
}

// ---------------------------------------------------------------------------
// Adaptive Gauss-Kronrod.

QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           double abs_tol, std::size_t max_intervals) {
    using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
    QuadratureResult out;
    if (a == b) return out;
    const auto& xk = GK::abscissa();
    const auto& wk = GK::weights();
    // The 7-point Gauss nodes are the even-indexed Kronrod abscissae.
    const auto& wg = boost::math::quadrature::gauss<double, 7>::weights();

    struct Piece {
        double lo, hi, value, error;
        bool operator<(const Piece& o) const { return error < o.error; }
    };
    auto rule = [&](double lo, double hi) {
        const double c = 0.5 * (lo + hi);
        const double h = 0.5 * (hi - lo);
        const double fc = f(c);
        double k = wk[0] * fc;
        double g = wg[0] * fc;
        for (std::size_t i = 1; i < xk.size(); ++i) {
            const double fs = f(c - h * xk[i]) + f(c + h * xk[i]);
            k += wk[i] * fs;
            if (i % 2 == 0) g += wg[i / 2] * fs;
        }
        if (!std::isfinite(k)) throw NumericalError("integrate: non-finite integrand");
        return Piece{lo, hi, k * h, std::abs((k - g) * h)};
    };

    std::priority_queue<Piece> heap;
    Piece first = rule(a, b);
    heap.push(first);
    double total = first.value;
    double err = first.error;
    while (err > abs_tol && heap.size() < max_intervals) {
        Piece p = heap.top();
        heap.pop();
        const double mid = 0.5 * (p.lo + p.hi);
        if (!(mid > p.lo && mid < p.hi)) {  // interval exhausted at double precision
            heap.push(p);
            break;
        }
        Piece l = rule(p.lo, mid);
        Piece r = rule(mid, p.hi);
        total += l.value + r.value - p.value;
        err += l.error + r.error - p.error;
        heap.push(l);
        heap.push(r);
    }
    // Re-sum to drop the running-update round-off.
    total = 0.0;
    err = 0.0;
    out.intervals = heap.size();
    while (!heap.empty()) {
        total += heap.top().value;
        err += heap.top().error;
        heap.pop();
    }
    out.value = total;
    out.error_estimate = err;
    if (err > abs_tol) {
        std::ostringstream os;
        os << "integrate: error estimate " << err << " above tolerance " << abs_tol << " on [" << a
           << ", " << b << "] after " << out.intervals << " intervals";
        throw NumericalError(os.str());
    }
    return out;
}

// ---------------------------------------------------------------------------
// Laplace inversion.

void validate(const LaplaceInversionSettings& s) {
    if (s.terms < 10) throw ConfigError("Laplace inversion needs at least 10 terms");
    if (!(s.tolerance > 0.0)) throw ConfigError("Laplace inversion tolerance must be > 0");
}

namespace {

constexpr int kEulerAveraging = 11;

// Abate-Whitt Euler algorithm. Returns estimates using n and n+1 terms.
std::pair<double, double> euler_pair(const LaplaceTransform& F, double t, int n, double tol) {
    const double A = std::log(100.0 / tol);
    const double u = std::exp(0.5 * A) / t;
    const int total = n + kEulerAveraging + 1;
    std::vector<double> partial(static_cast<std::size_t>(total) + 1);
    double s = 0.5 * F({A / (2.0 * t), 0.0}).real();
    partial[0] = s;
    for (int k = 1; k <= total; ++k) {
        const std::complex<double> z(A / (2.0 * t), k * std::numbers::pi / t);
        const double term = F(z).real();
        s += (k % 2 ? -term : term);
        partial[static_cast<std::size_t>(k)] = s;
    }
    auto averaged = [&](int start) {
        double acc = 0.0;
        double binom = 1.0;
        for (int k = 0; k <= kEulerAveraging; ++k) {
            acc += binom * partial[static_cast<std::size_t>(start + k)];
            binom = binom * (kEulerAveraging - k) / (k + 1.0);
        }
        return u * acc / std::ldexp(1.0, kEulerAveraging);
    };
    return {averaged(n), averaged(n + 1)};
}

// Fixed Talbot contour (Abate-Valko).
double talbot(const LaplaceTransform& F, double t, int m) {
    const double r = 2.0 * m / (5.0 * t);
    double acc = 0.5 * std::exp(r * t) * F({r, 0.0}).real();
    for (int k = 1; k < m; ++k) {
        const double th = k * std::numbers::pi / m;
        const double cot = std::cos(th) / std::sin(th);
        const std::complex<double> delta(r * th * cot, r * th);
        const double sigma = th + (th * cot - 1.0) * cot;
        acc += (std::exp(t * delta) * F(delta) * std::complex<double>(1.0, sigma)).real();
    }
    return r / m * acc;
}

}  // namespace

double invert_laplace(const LaplaceTransform& transform, double t,
                      const LaplaceInversionSettings& settings) {
    validate(settings);
    if (!(t > 0.0)) throw ConfigError("invert_laplace: t must be > 0");
    double value;
    if (settings.method == LaplaceMethod::euler) {
        const auto [v, v_next] = euler_pair(transform, t, settings.terms, settings.tolerance);
        if (!std::isfinite(v) || std::abs(v - v_next) > settings.tolerance) {
            std::ostringstream os;
            os << "Laplace inversion did not settle at t=" << t << ": estimates " << v << " ("
               << settings.terms << " terms) and " << v_next << " (" << settings.terms + 1
               << " terms)";
            throw NumericalError(os.str());
        }
        value = v_next;
    } else {
        value = talbot(transform, t, settings.terms);
        if (!std::isfinite(value)) throw NumericalError("Talbot inversion produced a non-finite value");
    }
    return value;
}

double invert_laplace_cdf(const LaplaceTransform& transform, double t,
                          const LaplaceInversionSettings& settings) {
    auto cdf_transform = [&](std::complex<double> s) { return transform(s) / s; };
    return std::clamp(invert_laplace(cdf_transform, t, settings), 0.0, 1.0);
}

// ---------------------------------------------------------------------------
// Polynomials.

double poly_eval(std::span<const double> c, double x) {
    double acc = 0.0;
    for (std::size_t i = c.size(); i-- > 0;) acc = acc * x + c[i];
    return acc;
}

namespace {

double poly_deriv_eval(std::span<const double> c, double x) {
    double acc = 0.0;
    for (std::size_t i = c.size(); i-- > 1;) acc = acc * x + static_cast<double>(i) * c[i];
    return acc;
}

double relative_residual(std::span<const double> c, double x) {
    double scale = 0.0;
    double p = 1.0;
    for (double ck : c) {
        scale += std::abs(ck) * p;
        p *= std::abs(x);
    }
    return scale > 0.0 ? std::abs(poly_eval(c, x)) / scale : 0.0;
}

}  // namespace

PolyRoots poly_roots_real(std::span<const double> coeffs, double max_residual) {
    std::vector<double> c(coeffs.begin(), coeffs.end());
    while (!c.empty() && c.back() == 0.0) c.pop_back();
    if (c.size() < 2) throw ConfigError("poly_roots_real: polynomial degree must be >= 1");
    if (c.size() > 17) throw ConfigError("poly_roots_real: degree above 16 is not supported");

    PolyRoots out;
    if (c.size() == 2) {
        out.roots.push_back(-c[0] / c[1]);
    } else {
        Eigen::VectorXd v(static_cast<Eigen::Index>(c.size()));
        for (std::size_t i = 0; i < c.size(); ++i) v(static_cast<Eigen::Index>(i)) = c[i];
        Eigen::PolynomialSolver<double, Eigen::Dynamic> solver(v);
        const auto& roots = solver.roots();
        double max_abs = 0.0;
        for (Eigen::Index i = 0; i < roots.size(); ++i) max_abs = std::max(max_abs, std::abs(roots(i)));
        const double imag_tol = 1e-7 * std::max(1.0, max_abs);
        for (Eigen::Index i = 0; i < roots.size(); ++i) {
            if (std::abs(roots(i).imag()) <= imag_tol) out.roots.push_back(roots(i).real());
        }
    }
    for (double& x : out.roots) {
        for (int it = 0; it < 50; ++it) {
            const double d = poly_deriv_eval(c, x);
            if (d == 0.0) break;
            const double step = poly_eval(c, x) / d;
            const double nx = x - step;
            if (!std::isfinite(nx)) break;
            if (relative_residual(c, nx) > relative_residual(c, x)) break;
            x = nx;
            if (std::abs(step) <= 4.0 * kEps * std::max(1.0, std::abs(x))) break;
        }
    }
    std::sort(out.roots.begin(), out.roots.end());
    for (double x : out.roots) {
        const double r = relative_residual(c, x);
        out.residuals.push_back(r);
        if (r > max_residual) {
            std::ostringstream os;
            os << "poly_roots_real: root " << x << " has residual " << r;
            throw NumericalError(os.str());
        }
    }
    return out;
}

}  // namespace cfmec::specfun
