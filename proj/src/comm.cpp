#include "cfmec/comm.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "cfmec/errors.hpp"

namespace cfmec::comm {

namespace {

using specfun::hyp2f1;
constexpr double kPi = std::numbers::pi;

// Derivative coefficients of log F1 and log F2 at s, in two forms:
//   raw[j]    = h^(j)(s)
//   scaled[j] = s^j h^(j)(s) / (j-1)!     (j >= 1)
// scaled[0] / raw[0] hold log F itself.
struct LogDerivs {
    std::vector<double> raw;
    std::vector<double> scaled;
};

LogDerivs log_f1_derivs(double s, int order, const NetworkConfig& net) {
    const double a = std::pow(net.d0(), -net.alpha());
    const double c = kPi * net.lambda_d() * net.d0() * net.d0();
    const double sa = s * a;
    LogDerivs d;
    d.raw.resize(static_cast<std::size_t>(order) + 1);
    d.scaled.resize(d.raw.size());
    d.raw[0] = d.scaled[0] = -c * sa / (1.0 + sa);
    double fact = 1.0;
    for (int j = 1; j <= order; ++j) {
        fact *= j;
        const double sign = (j % 2) ? -1.0 : 1.0;
        d.raw[j] = c * sign * fact * std::pow(a, j) / std::pow(1.0 + sa, j + 1);
        d.scaled[j] = c * sign * j * std::pow(sa / (1.0 + sa), j) / (1.0 + sa);
    }
    return d;
}

LogDerivs log_f2_derivs(double s, int order, const NetworkConfig& net) {
    const double al = net.alpha();
    const double d0 = net.d0();
    const double a = std::pow(d0, -al);
    const double sa = s * a;
    const double q = 2.0 / al;
    const double lam = kPi * net.lambda_d();
    LogDerivs d;
    d.raw.resize(static_cast<std::size_t>(order) + 1);
    d.scaled.resize(d.raw.size());
    d.raw[0] = d.scaled[0] =
        sa == 0.0 ? 0.0
                  : -lam * q * d0 * d0 * sa / (1.0 - q) * hyp2f1(1.0, 1.0 - q, 2.0 - q, -sa);
    double fact = 1.0;
    for (int j = 1; j <= order; ++j) {
        fact *= j;
        const double sign = (j % 2) ? -1.0 : 1.0;
        const double f = hyp2f1(j + 1.0, j - q, j - q + 1.0, -sa);
        // k_j = (2/alpha) d0^(2 - j alpha) / (j - 2/alpha) 2F1(...)
        const double kj = q * std::pow(d0, 2.0 - j * al) / (j - q) * f;
        d.raw[j] = lam * sign * fact * kj;
        d.scaled[j] = lam * sign * j * q * d0 * d0 * std::pow(sa, j) / (j - q) * f;
    }
    return d;
}

// Derivatives of F = exp(h) from those of h:
// F^(m) = sum_{i<m} C(m-1, i) h^(m-i) F^(i).
std::vector<double> exp_derivs_raw(const std::vector<double>& h) {
    const std::size_t n = h.size();
    std::vector<double> F(n);
    F[0] = std::exp(h[0]);
    for (std::size_t m = 1; m < n; ++m) {
        double acc = 0.0;
        double binom = 1.0;
        for (std::size_t i = 0; i < m; ++i) {
            acc += binom * h[m - i] * F[i];
            binom = binom * static_cast<double>(m - 1 - i) / static_cast<double>(i + 1);
        }
        F[m] = acc;
    }
    return F;
}

// Same recursion on the scaled quantities f_m = s^m F^(m) / m!:
// f_m = (1/m) sum_{i<m} f_i * scaled[m-i].
std::vector<double> exp_derivs_scaled(const std::vector<double>& scaled) {
    const std::size_t n = scaled.size();
    std::vector<double> f(n);
    f[0] = std::exp(scaled[0]);
    for (std::size_t m = 1; m < n; ++m) {
        double acc = 0.0;
        for (std::size_t i = 0; i < m; ++i) acc += f[i] * scaled[m - i];
        f[m] = acc / static_cast<double>(m);
    }
    return f;
}

double ap_success_at_s(double s, const NetworkConfig& net) {
    const int order = net.antennas_per_ap() - 1;
    const auto f1 = exp_derivs_scaled(log_f1_derivs(s, order, net).scaled);
    const auto f2 = exp_derivs_scaled(log_f2_derivs(s, order, net).scaled);
    double p = 0.0;
    for (int m = 0; m <= order; ++m) {
        double lm = 0.0;  // s^m L^(m) / m!
        for (int i = 0; i <= m; ++i) lm += f1[i] * f2[m - i];
        p += (m % 2 ? -lm : lm);
    }
    return std::clamp(p, 0.0, 1.0);
}

// int_0^R r * uplink_ap_success(r) dr.
double radial_success_integral(const NetworkConfig& net, const specfun::NumericalSettings& ns) {
    const double R = net.coverage_radius();
    if (R == 0.0) return 0.0;
    const double d0 = net.d0();
    const double inner = std::min(R, d0);
    double total = 0.5 * inner * inner * uplink_ap_success(d0, net);
    if (R > d0) {
        const double weight = net.lambda_b() > 0.0 ? 2.0 * kPi * net.lambda_b() : 1.0 / (R * R);
        auto integrand = [&](double r) { return weight * r * uplink_ap_success(r, net); };
        total += specfun::integrate(integrand, d0, R, ns.radial_abs_tol).value / weight;
    }
    return total;
}

double clamp_prob(double v, double warn, bool& flagged) {
    if (v < -warn || v > 1.0 + warn) flagged = true;
    return std::clamp(v, 0.0, 1.0);
}

// P(v, x) / x^v, finite at x = 0.
double lower_gamma_over_power(double v, double x) {
    if (x == 0.0) return 1.0 / std::tgamma(v + 1.0);
    return specfun::lower_incomplete_gamma_regularized(v, x) * std::exp(-v * std::log(x));
}

// log-Gamma ratio Gamma(M + j) / (Gamma(M) Gamma(j)).
double log_plateau_coeff(int M, int j) {
    return std::lgamma(M + j) - std::lgamma(M) - std::lgamma(static_cast<double>(j));
}

// rho(s) and scaled derivatives c_j = s^j rho^(j)(s) / (j-1)!, j = 1..order.
std::vector<double> rho_scaled(double s, int order, const NetworkConfig& net,
                               const specfun::NumericalSettings& ns) {
    const double R = net.coverage_radius();
    const double al = net.alpha();
    const double d0 = net.d0();
    const int M = net.antennas_per_ap();
    const double a = std::pow(d0, -al);
    const double sa = s * a;
    const double q = 2.0 / al;
    std::vector<double> out(static_cast<std::size_t>(order) + 1, 0.0);
    if (R == 0.0 || s == 0.0) return out;

    // Plateau part (r < min(R, d0)), common to both branches.
    const double rp = std::min(R, d0);
    auto plateau = [&](int j) {
        return 0.5 * rp * rp *
               std::exp(log_plateau_coeff(M, j) + j * std::log(sa) - (M + j) * std::log1p(sa));
    };
    if (R <= d0) {
        out[0] = -0.5 * R * R * std::expm1(-M * std::log1p(sa));
        for (int j = 1; j <= order; ++j) out[j] = ((j % 2) ? 1.0 : -1.0) * plateau(j);
        return out;
    }

    const double sR = s * std::pow(R, -al);
    const double sq = std::pow(s, q);
    // E[g^{2/alpha} (Q(v, s g R^-alpha) - Q(v, s g d0^-alpha))]. The bracket
    // behaves like g^v near 0, so g^v goes into the quadrature weight and the
    // sampled function P(v, c g) / g^v is entire.
    auto tail = [&](double v) {
        const double c1 = std::pow(sR, v);
        const double c2 = std::pow(sa, v);
        return specfun::gamma_expectation(
            [&](double g) {
                return c2 * lower_gamma_over_power(v, sa * g) - c1 * lower_gamma_over_power(v, sR * g);
            },
            M, ns.gamma, q + v);
    };
    out[0] = -0.5 * R * R * std::expm1(-M * std::log1p(sR)) +
             0.5 * sq * std::tgamma(1.0 - q) * tail(1.0 - q);
    for (int j = 1; j <= order; ++j) {
        const double ratio = std::exp(std::lgamma(j - q) - std::lgamma(static_cast<double>(j)));
        const double mag = plateau(j) + sq / al * ratio * tail(j - q);
        out[j] = ((j % 2) ? 1.0 : -1.0) * mag;
    }
    return out;
}

}  // namespace

LaplaceDerivativeTable uplink_laplace_derivs(double s, int max_order, const NetworkConfig& net) {
    if (!(s >= 0.0) || max_order < 0) throw ConfigError("uplink_laplace_derivs: need s >= 0, order >= 0");
    LaplaceDerivativeTable t;
    t.s = s;
    t.f1 = exp_derivs_raw(log_f1_derivs(s, max_order, net).raw);
    t.f2 = exp_derivs_raw(log_f2_derivs(s, max_order, net).raw);
    t.laplace.resize(t.f1.size());
    for (std::size_t m = 0; m < t.laplace.size(); ++m) {
        double acc = 0.0;
        double binom = 1.0;
        for (std::size_t i = 0; i <= m; ++i) {
            acc += binom * t.f1[i] * t.f2[m - i];
            binom = binom * static_cast<double>(m - i) / static_cast<double>(i + 1);
        }
        t.laplace[m] = acc;
    }
    return t;
}

double uplink_ap_success(double r, const NetworkConfig& net) {
    const double s = net.sir_threshold_ul() / pathloss(r, net);
    return ap_success_at_s(s, net);
}

double mean_ap_success(const NetworkConfig& net, const specfun::NumericalSettings& ns) {
    const double R = net.coverage_radius();
    if (R == 0.0) return uplink_ap_success(0.0, net);
    return 2.0 * radial_success_integral(net, ns) / (R * R);
}

double uplink_outage(const NetworkConfig& net, const specfun::NumericalSettings& ns) {
    const double exponent = 2.0 * kPi * net.lambda_b() * radial_success_integral(net, ns);
    return std::clamp(std::exp(-exponent), 0.0, 1.0);
}

GammaInterferenceParams gamma_interference_params(const NetworkConfig& net) {
    const double al = net.alpha();
    const double d0 = net.d0();
    const double R = net.coverage_radius();
    GammaInterferenceParams g;
    g.shape = al * (al - 1.0) / (2.0 * (al - 2.0) * (al - 2.0)) * net.lambda_b() * net.lambda_d() *
              kPi * kPi * R * R * d0 * d0;
    g.scale = 2.0 * std::pow(d0, -al) * (al - 2.0) / (al - 1.0);
    return g;
}

double interference_mean(const NetworkConfig& net) {
    const double al = net.alpha();
    const double R = net.coverage_radius();
    return net.lambda_b() * net.lambda_d() * kPi * kPi * al * R * R / (al - 2.0) *
           std::pow(net.d0(), 2.0 - al);
}

double interference_variance(const NetworkConfig& net) {
    const double al = net.alpha();
    const double R = net.coverage_radius();
    return 2.0 * al * kPi * kPi * net.lambda_b() * net.lambda_d() * R * R / (al - 1.0) *
           std::pow(net.d0(), 2.0 - 2.0 * al);
}

RhoDerivativeTable rho_derivs(double s, int max_order, const NetworkConfig& net,
                              const specfun::NumericalSettings& ns) {
    if (!(s > 0.0) || max_order < 0) throw ConfigError("rho_derivs: need s > 0, order >= 0");
    RhoDerivativeTable t;
    t.s = s;
    t.values = rho_scaled(s, max_order, net, ns);
    // Undo the s^j / (j-1)! scaling.
    for (int j = 1; j <= max_order; ++j) {
        t.values[j] *= std::exp(std::lgamma(static_cast<double>(j)) - j * std::log(s));
    }
    return t;
}

DownlinkOutage downlink_outage(const NetworkConfig& net, const specfun::NumericalSettings& ns) {
    DownlinkOutage out;
    const auto gp = gamma_interference_params(net);
    out.zeta = gp.shape;
    if (gp.shape == 0.0) {
        out.degenerate = true;
        return out;
    }
    // A shape within rounding of an integer is that integer; the bracket is
    // exact there and should not straddle a spurious extra term.
    const double near = std::round(gp.shape);
    const bool integral = std::abs(gp.shape - near) <= 1e-9 * std::max(1.0, near);
    const double kf = integral ? near : std::floor(gp.shape);
    const double kc = integral ? near : std::ceil(gp.shape);
    if (kc > 1e6) throw NumericalError("downlink_outage: interference shape too large to sum");
    const int k_hi = static_cast<int>(kc);
    const double s = 1.0 / (net.sir_threshold_dl() * gp.scale);
    const auto c = rho_scaled(s, std::max(k_hi - 1, 0), net, ns);
    const double lam = 2.0 * kPi * net.lambda_b();

    // a_m = s^m L_P^(m)(s) / m!, kept relative to a_0 = exp(-2 pi lambda_b rho).
    std::vector<double> a(static_cast<std::size_t>(std::max(k_hi, 1)), 0.0);
    a[0] = 1.0;
    for (int m = 1; m < k_hi; ++m) {
        double acc = 0.0;
        for (int i = 0; i < m; ++i) acc += a[i] * c[m - i];
        a[m] = -lam * acc / m;
    }
    auto truncated = [&](int k) {
        double sum = 0.0;
        for (int m = 0; m < k; ++m) sum += (m % 2 ? -a[m] : a[m]);
        if (!std::isfinite(sum)) throw NumericalError("downlink_outage: series overflow");
        if (sum <= 0.0) return sum;
        return std::exp(std::log(sum) - lam * c[0]);
    };
    const double lo = truncated(static_cast<int>(kf));
    const double hi = truncated(k_hi);
    out.lower = clamp_prob(lo, ns.clamp_warn, out.clamped);
    out.upper = clamp_prob(hi, ns.clamp_warn, out.clamped);
    out.point = out.lower + (gp.shape - kf) * (out.upper - out.lower);
    return out;
}

double scmp(const NetworkConfig& net, const specfun::NumericalSettings& ns) {
    return comm_profile(net, ns).scmp;
}

CommProfile comm_profile(const NetworkConfig& net, const specfun::NumericalSettings& ns) {
    CommProfile p;
    const double R = net.coverage_radius();
    p.coverage_radius = R;
    p.mean_aps = mean_connected_aps(net);
    const double integral = radial_success_integral(net, ns);
    p.ap_success = R > 0.0 ? 2.0 * integral / (R * R) : uplink_ap_success(0.0, net);
    p.uplink_outage = std::clamp(std::exp(-2.0 * kPi * net.lambda_b() * integral), 0.0, 1.0);
    p.downlink = downlink_outage(net, ns);
    p.scmp = (1.0 - p.uplink_outage) * (1.0 - p.downlink.point);
    return p;
}

}  // namespace cfmec::comm
