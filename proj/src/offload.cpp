#include "cfmec/offload.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <sstream>

#include <boost/math/special_functions/gamma.hpp>

#include "cfmec/comm.hpp"
#include "cfmec/errors.hpp"

namespace cfmec::offload {

namespace {

using cplx = std::complex<double>;
using Poly = std::vector<double>;  // ascending coefficients

Poly poly_mul_linear(const Poly& p, double c0, double c1) {
    Poly out(p.size() + 1, 0.0);
    for (std::size_t i = 0; i < p.size(); ++i) {
        out[i] += c0 * p[i];
        out[i + 1] += c1 * p[i];
    }
    return out;
}

Poly poly_add(Poly a, const Poly& b) {
    if (b.size() > a.size()) a.resize(b.size(), 0.0);
    for (std::size_t i = 0; i < b.size(); ++i) a[i] += b[i];
    return a;
}

// Distinct service rates with their pooled probabilities.
struct Mixture {
    std::vector<double> p;
    std::vector<double> mu;
};

Mixture merged_mec_mixture(const ComputeConfig& comp) {
    Mixture m;
    for (std::size_t i = 0; i < comp.num_types(); ++i) {
        const double mu = comp.mu_m()[i];
        const double p = comp.type_probs()[i];
        if (p == 0.0) continue;
        auto it = std::find(m.mu.begin(), m.mu.end(), mu);
        if (it == m.mu.end()) {
            m.mu.push_back(mu);
            m.p.push_back(p);
        } else {
            m.p[static_cast<std::size_t>(it - m.mu.begin())] += p;
        }
    }
    return m;
}

cplx service_transform(std::span<const double> p, std::span<const double> mu, cplx s) {
    cplx acc = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) acc += p[i] * mu[i] / (s + mu[i]);
    return acc;
}

double poisson_pmf(int n, double m) {
    if (m == 0.0) return n == 0 ? 1.0 : 0.0;
    return std::exp(n * std::log(m) - m - std::lgamma(n + 1.0));
}

// P[N > n] for N ~ Poisson(m).
double poisson_upper_tail(int n, double m) {
    if (m == 0.0) return 0.0;
    return boost::math::gamma_p(n + 1.0, m);
}

template <class Term>
double poisson_mixture(double m, double tol, Term&& term) {
    if (!(m > 0.0)) return 0.0;
    const int n_max = static_cast<int>(std::ceil(m + 12.0 * std::sqrt(m) + 30.0));
    double acc = 0.0;
    for (int n = 1;; ++n) {
        const double w = poisson_pmf(n, m);
        if (w > 1e-300) acc += w * term(n);
        if (n >= m && poisson_upper_tail(n, m) < tol) break;
        if (n > n_max) {
            std::ostringstream os;
            os << "Poisson sum over n did not reach tail " << tol << " by n=" << n;
            throw NumericalError(os.str());
        }
    }
    return acc;
}

}  // namespace

double min_load_selection_prob(double mean_aps) {
    if (mean_aps == 0.0) return 1.0;
    return -std::expm1(-mean_aps) / mean_aps;
}

ArrivalRates arrival_rates(const NetworkConfig& net, const ComputeConfig& comp, double uplink_outage) {
    if (!(uplink_outage >= 0.0 && uplink_outage <= 1.0))
        throw ConfigError("arrival_rates: uplink outage must lie in [0, 1]");
    const double theta = comp.offload_prob();
    const double ok = 1.0 - uplink_outage;
    const double R = net.coverage_radius();
    ArrivalRates r;
    r.lambda_c = net.lambda_d() * net.network_area() * theta * ok;
    r.lambda_o = (1.0 - theta) * net.lambda_d() * std::numbers::pi * R * R * ok;
    r.lambda_m = r.lambda_o * min_load_selection_prob(mean_connected_aps(net));
    return r;
}

ThetaInterval stable_theta_interval(const NetworkConfig& net, const ComputeConfig& comp,
                                    double uplink_outage) {
    const auto full_cs = arrival_rates(net, comp.with_offload_prob(1.0), uplink_outage);
    const auto full_mec = arrival_rates(net, comp.with_offload_prob(0.0), uplink_outage);
    ThetaInterval iv;
    iv.hi = full_cs.lambda_c > 0.0 ? comp.mu_c_aggregate() / full_cs.lambda_c
                                   : std::numeric_limits<double>::infinity();
    iv.lo = full_mec.lambda_m > 0.0 ? 1.0 - comp.mu_m_aggregate() / full_mec.lambda_m
                                    : -std::numeric_limits<double>::infinity();
    return iv;
}

// ---------------------------------------------------------------------------

QueueSpectrum::QueueSpectrum(std::vector<double> omega, std::vector<double> eps, double rho,
                             std::vector<double> residuals)
    : omega_(std::move(omega)), eps_(std::move(eps)), rho_(rho), residuals_(std::move(residuals)) {}

double QueueSpectrum::max_omega() const noexcept {
    double m = 0.0;
    for (double w : omega_) m = std::max(m, w);
    return m;
}

double QueueSpectrum::pmf(std::size_t v) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < omega_.size(); ++i)
        acc += eps_[i] * std::pow(omega_[i], static_cast<double>(v));
    return acc;
}

double QueueSpectrum::tail(std::size_t v) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < omega_.size(); ++i)
        acc += eps_[i] * std::pow(omega_[i], static_cast<double>(v)) / (1.0 - omega_[i]);
    return acc;
}

QueueSpectrum queue_spectrum(const ComputeConfig& comp, double lambda_m) {
    if (!(lambda_m >= 0.0)) throw ConfigError("queue_spectrum: lambda_m must be >= 0");
    const double rho = lambda_m / comp.mu_m_aggregate();
    if (rho >= 1.0) {
        std::ostringstream os;
        os << "MEC queue unstable: rho_m = " << rho;
        throw StabilityError(os.str());
    }
    const Mixture mix = merged_mec_mixture(comp);
    const std::size_t I = mix.mu.size();
    if (lambda_m == 0.0) {
        std::vector<double> eps(I, 0.0);
        eps[0] = 1.0;
        return QueueSpectrum(std::vector<double>(I, 0.0), std::move(eps), 0.0,
                             std::vector<double>(I, 0.0));
    }
    const double lam = lambda_m;

    // omega^2 sum_l p_l mu_l prod_{k!=l} (omega(mu_k+lam) - lam)
    //   - prod_q (omega(mu_q+lam) - lam), which vanishes at omega = 1.
    Poly S{0.0};
    for (std::size_t l = 0; l < I; ++l) {
        Poly term{mix.p[l] * mix.mu[l]};
        for (std::size_t k = 0; k < I; ++k)
            if (k != l) term = poly_mul_linear(term, -lam, mix.mu[k] + lam);
        S = poly_add(S, term);
    }
    Poly T{1.0};
    for (std::size_t q = 0; q < I; ++q) T = poly_mul_linear(T, -lam, mix.mu[q] + lam);
    Poly P = poly_mul_linear(poly_mul_linear(S, 0.0, 1.0), 0.0, 1.0);
    for (std::size_t i = 0; i < T.size(); ++i) P[i] -= T[i];
    while (P.size() > 1 && P.back() == 0.0) P.pop_back();

    // Deflate the omega = 1 root.
    const std::size_t d = P.size() - 1;
    Poly Q(d, 0.0);
    Q[d - 1] = P[d];
    for (std::size_t k = d - 1; k >= 1; --k) Q[k - 1] = P[k] + Q[k];

    const auto roots = specfun::poly_roots_real(Q);
    std::vector<double> omega;
    std::vector<double> resid;
    for (std::size_t i = 0; i < roots.roots.size(); ++i) {
        const double w = roots.roots[i];
        if (w > 0.0 && w < 1.0) {
            omega.push_back(w);
            resid.push_back(roots.residuals[i]);
        }
    }
    if (omega.size() != I) {
        std::ostringstream os;
        os << "queue_spectrum: expected " << I << " roots in (0,1), found " << omega.size();
        throw ConsistencyError(os.str());
    }

    // (1 - rho) N(z) = N(0) sum_q eps_q prod_{r!=q} (1 - omega_r z),
    // N(z) = sum_l p_l mu_l prod_{k!=l} (mu_k + lam - lam z).
    Poly N{0.0};
    for (std::size_t l = 0; l < I; ++l) {
        Poly term{mix.p[l] * mix.mu[l]};
        for (std::size_t k = 0; k < I; ++k)
            if (k != l) term = poly_mul_linear(term, mix.mu[k] + lam, -lam);
        N = poly_add(N, term);
    }
    N.resize(I, 0.0);
    Eigen::MatrixXd A(static_cast<Eigen::Index>(I), static_cast<Eigen::Index>(I));
    Eigen::VectorXd b(static_cast<Eigen::Index>(I));
    for (std::size_t q = 0; q < I; ++q) {
        Poly basis{1.0};
        for (std::size_t r = 0; r < I; ++r)
            if (r != q) basis = poly_mul_linear(basis, 1.0, -omega[r]);
        basis.resize(I, 0.0);
        for (std::size_t j = 0; j < I; ++j)
            A(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(q)) = basis[j];
    }
    for (std::size_t j = 0; j < I; ++j) b(static_cast<Eigen::Index>(j)) = (1.0 - rho) * N[j] / N[0];
    const Eigen::VectorXd e = A.colPivHouseholderQr().solve(b);
    std::vector<double> eps(e.data(), e.data() + e.size());

    QueueSpectrum qs(std::move(omega), std::move(eps), rho, std::move(resid));
    const double norm = qs.tail(0);
    if (std::abs(norm - 1.0) > 1e-9) {
        std::ostringstream os;
        os << "queue_spectrum: pmf sums to " << norm;
        throw ConsistencyError(os.str());
    }
    for (std::size_t v = 0; qs.tail(v) > 1e-12 && v < 100000; ++v) {
        if (qs.pmf(v) < -1e-12) {
            std::ostringstream os;
            os << "queue_spectrum: negative pmf " << qs.pmf(v) << " at v=" << v;
            throw ConsistencyError(os.str());
        }
    }
    return qs;
}

double min_queue_pmf(const QueueSpectrum& q, int n, std::size_t v) {
    if (n < 1) throw ConfigError("min_queue_pmf: n must be >= 1");
    return std::pow(q.tail(v), n) - std::pow(q.tail(v + 1), n);
}

double scp_cs(const ComputeConfig& comp, double lambda_c, const specfun::LaplaceInversionSettings& ls) {
    const double rho = lambda_c / comp.mu_c_aggregate();
    if (rho >= 1.0) {
        std::ostringstream os;
        os << "CS queue unstable: rho_c = " << rho;
        throw StabilityError(os.str());
    }
    const auto p = comp.type_probs();
    const auto mu = comp.mu_c();
    auto sojourn = [&](cplx s) {
        const cplx b = service_transform(p, mu, s);
        return (1.0 - rho) * s * b / (s - lambda_c + lambda_c * b);
    };
    return specfun::invert_laplace_cdf(sojourn, comp.target_latency(), ls);
}

// ---------------------------------------------------------------------------

MecLatency::MecLatency(const ComputeConfig& comp, QueueSpectrum spectrum,
                       const specfun::NumericalSettings& ns)
    : comp_(&comp), q_(std::move(spectrum)), ns_(ns) {}

double MecLatency::service_sum_cdf(std::size_t v) {
    while (cdf_cache_.size() <= v) {
        const double k = static_cast<double>(cdf_cache_.size()) + 1.0;
        const auto p = comp_->type_probs();
        const auto mu = comp_->mu_m();
        auto transform = [&](cplx s) { return std::exp(k * std::log(service_transform(p, mu, s))); };
        cdf_cache_.push_back(specfun::invert_laplace_cdf(transform, comp_->target_latency(), ns_.laplace));
    }
    return cdf_cache_[v];
}

double MecLatency::given_n(int n) {
    if (n < 1) throw ConfigError("MecLatency::given_n: n must be >= 1");
    constexpr std::size_t kMaxV = 2000000;
    double acc = 0.0;
    double at_least = std::pow(q_.tail(0), n);
    for (std::size_t v = 0;; ++v) {
        const double next = std::pow(q_.tail(v + 1), n);
        acc += (at_least - next) * service_sum_cdf(v);
        at_least = next;
        if (next < ns_.tail_tol) break;
        if (v >= kMaxV) throw NumericalError("MecLatency: queue-length sum did not converge");
    }
    return std::clamp(acc, 0.0, 1.0);
}

double MecLatency::mixture(double mean_aps) {
    return poisson_mixture(mean_aps, ns_.tail_tol, [&](int n) { return given_n(n); });
}

double scp_mec_exponential(double mu_m, double rho_m, double t, double mean_aps, double tail_tol) {
    return poisson_mixture(mean_aps, tail_tol, [&](int n) {
        return -std::expm1(-mu_m * t * (1.0 - std::pow(rho_m, n)));
    });
}

double scp_mec(const NetworkConfig& net, const ComputeConfig& comp, double lambda_m,
               const specfun::NumericalSettings& ns) {
    MecLatency lat(comp, queue_spectrum(comp, lambda_m), ns);
    return lat.mixture(mean_connected_aps(net));
}

double scp(const NetworkConfig& net, const ComputeConfig& comp, double uplink_outage,
           const specfun::NumericalSettings& ns) {
    const auto rates = arrival_rates(net, comp, uplink_outage);
    const double theta = comp.offload_prob();
    const double pc = theta > 0.0 ? scp_cs(comp, rates.lambda_c, ns.laplace) : 0.0;
    const double pm = theta < 1.0 ? scp_mec(net, comp, rates.lambda_m, ns) : 0.0;
    return theta * pc + (1.0 - theta) * pm;
}

double scp(const NetworkConfig& net, const ComputeConfig& comp, const specfun::NumericalSettings& ns) {
    return scp(net, comp, comm::uplink_outage(net, ns), ns);
}

ThetaOptimum optimal_theta(const NetworkConfig& net, const ComputeConfig& comp,
                           std::span<const double> theta_grid, double uplink_outage,
                           const specfun::NumericalSettings& ns) {
    for (double th : theta_grid)
        if (!(th >= 0.0 && th <= 1.0)) throw ConfigError("optimal_theta: grid must lie in [0, 1]");
    const auto feasible = stable_theta_interval(net, comp, uplink_outage);
    return maximize_over_theta(
        [&](double th) { return scp(net, comp.with_offload_prob(th), uplink_outage, ns); },
        theta_grid, feasible);
}

std::vector<double> uniform_grid(double lo, double hi, std::size_t points) {
    if (points < 2) return {lo};
    std::vector<double> g(points);
    for (std::size_t i = 0; i < points; ++i)
        g[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
    g.back() = hi;
    return g;
}

}  // namespace cfmec::offload
