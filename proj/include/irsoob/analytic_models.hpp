#ifndef IRSOOB_ANALYTIC_MODELS_HPP
#define IRSOOB_ANALYTIC_MODELS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "irsoob/math_kernels.hpp"

namespace irsoob::analytic {

struct UeBetas {
    double beta_r = 0.0;  // cascaded product beta_f * beta_g
    double beta_d = 0.0;
};

struct AnalyticParams {
    std::size_t n_elements = 0;
    double tx_snr = 1.0;  // linear P / sigma^2
    std::vector<UeBetas> ues;
    std::size_t l1 = 1;
    std::size_t l2 = 1;

    std::size_t paths() const noexcept { return l1 * l2; }
    std::size_t effective_paths() const noexcept { return std::min(paths(), n_elements); }

    void validate() const {
        if (!(tx_snr > 0.0) || !std::isfinite(tx_snr)) throw std::invalid_argument("analytic: tx_snr must be positive");
        if (ues.empty()) throw std::invalid_argument("analytic: need at least one UE");
        if (l1 == 0 || l2 == 0) throw std::invalid_argument("analytic: path counts must be >= 1");
        for (const auto& u : ues) {
            if (!(u.beta_r > 0.0) || !(u.beta_d > 0.0)) throw std::invalid_argument("analytic: path losses must be positive");
        }
    }
};

namespace detail {

constexpr double pi = std::numbers::pi;
constexpr double pi2_16 = pi * pi / 16.0;

template <class F>
double ue_average(const AnalyticParams& p, F per_ue) {
    p.validate();
    double s = 0.0;
    for (const auto& u : p.ues) s += per_ue(u);
    return s / static_cast<double>(p.ues.size());
}

inline void check_ue(const UeBetas& u) {
    if (!(u.beta_r > 0.0) || !(u.beta_d > 0.0)) throw std::invalid_argument("analytic: path losses must be positive");
}

}  // namespace detail

inline double theorem1_sumse_x(const AnalyticParams& p) {
    const double n = static_cast<double>(p.n_elements);
    return detail::ue_average(p, [&](const UeBetas& u) {
        const double snr = n * n * detail::pi2_16 * u.beta_r +
                           n * (u.beta_r - detail::pi2_16 * u.beta_r +
                                std::pow(detail::pi, 1.5) / 4.0 * std::sqrt(u.beta_d * u.beta_r)) +
                           u.beta_d;
        return std::log2(1.0 + snr * p.tx_snr);
    });
}

inline double theorem1_sumse_y(const AnalyticParams& p) {
    const double n = static_cast<double>(p.n_elements);
    return detail::ue_average(p, [&](const UeBetas& u) { return std::log2(1.0 + (n * u.beta_r + u.beta_d) * p.tx_snr); });
}

inline double outage_oob_sub6(double rho, std::size_t n, const UeBetas& u) {
    detail::check_ue(u);
    if (rho < 0.0) throw std::invalid_argument("outage: threshold must be nonnegative");
    return -std::expm1(-rho / (static_cast<double>(n) * u.beta_r + u.beta_d));
}

// Large-N CCDF of the OOB SNR offset Z = |h_with|^2 - |h_without|^2. With no
// IRS the offset collapses to the direct gain itself.
inline double ccdf_offset_sub6(double z, std::size_t n, const UeBetas& u) {
    detail::check_ue(u);
    if (std::isnan(z)) throw std::invalid_argument("ccdf_offset_sub6: z is NaN");
    if (n == 0) return z < 0.0 ? 1.0 : std::exp(-z / u.beta_d);
    const double nb = static_cast<double>(n) * u.beta_r / u.beta_d;
    if (z < 0.0) return 1.0 - std::exp(z / u.beta_d) / (nb + 2.0);
    return (nb + 1.0) / (nb + 2.0) * std::exp(-z / (u.beta_d * (1.0 + nb)));
}

inline double offset_correlation_rho12(std::size_t n, const UeBetas& u) {
    detail::check_ue(u);
    return 1.0 / (1.0 + static_cast<double>(n) * u.beta_r / u.beta_d);
}

struct OffsetDistributionParams {
    double mu1 = 0.0;
    double mu2 = 0.0;
    double sigma1 = 0.0;
    double sigma2 = 0.0;
    double rho12 = 0.0;
    double gamma_s = 0.0;
    double alpha_plus = 0.0;
    double alpha_minus = 0.0;
};

// Auxiliaries of the difference-of-correlated-exponentials law. rho12 is the
// power correlation, i.e. the squared modulus of the complex correlation, so
// it enters the denominators as (1 - rho12).
inline OffsetDistributionParams make_offset_params(std::size_t n, const UeBetas& u) {
    detail::check_ue(u);
    if (n == 0) throw std::invalid_argument("offset params: undefined without an IRS");
    OffsetDistributionParams o;
    o.mu1 = static_cast<double>(n) * u.beta_r + u.beta_d;
    o.mu2 = u.beta_d;
    o.sigma1 = o.mu1;
    o.sigma2 = o.mu2;
    o.rho12 = offset_correlation_rho12(n, u);
    const double d = o.mu1 * o.mu2 * (1.0 - o.rho12);
    o.gamma_s = 2.0 * std::sqrt(std::pow(o.mu2 - o.mu1, 2) + 4.0 * o.mu1 * o.mu2 * (1.0 - o.rho12)) / d;
    o.alpha_plus = o.gamma_s + 2.0 * (o.mu2 - o.mu1) / d;
    o.alpha_minus = o.gamma_s - 2.0 * (o.mu2 - o.mu1) / d;
    return o;
}

// Exact-form CCDF of Z for a Gaussian cascaded term, for cross-checking the
// large-N form at small N.
inline double ccdf_offset_sub6_exact(double z, std::size_t n, const UeBetas& u) {
    if (n == 0) return ccdf_offset_sub6(z, 0, u);
    const auto o = make_offset_params(n, u);
    const double d = o.mu1 * o.mu2 * (1.0 - o.rho12);
    if (z < 0.0) return 1.0 - 8.0 / (d * o.gamma_s * o.alpha_minus) * std::exp(o.alpha_minus * z / 4.0);
    return 8.0 / (d * o.gamma_s * o.alpha_plus) * std::exp(-o.alpha_plus * z / 4.0);
}

inline double theorem3_sumse_x(const AnalyticParams& p) {
    const double n = static_cast<double>(p.n_elements);
    return detail::ue_average(p, [&](const UeBetas& u) {
        const double snr = n * n * u.beta_r + n * std::pow(detail::pi, 1.5) / 4.0 * std::sqrt(u.beta_d * u.beta_r) + u.beta_d;
        return std::log2(1.0 + snr * p.tx_snr);
    });
}

inline double theorem3_sumse_y(const AnalyticParams& p) {
    if (p.n_elements == 0) {
        return detail::ue_average(p, [&](const UeBetas& u) { return std::log2(1.0 + u.beta_d * p.tx_snr); });
    }
    const double n = static_cast<double>(p.n_elements);
    const double lb = static_cast<double>(p.effective_paths());
    return detail::ue_average(p, [&](const UeBetas& u) {
        return lb / n * std::log2(1.0 + (n * n / lb * u.beta_r + u.beta_d) * p.tx_snr) +
               (1.0 - lb / n) * std::log2(1.0 + u.beta_d * p.tx_snr);
    });
}

// Outage CDF of the OOB gain with a single-path-optimized IRS. The exponential
// prefactor is folded into a scaled incomplete gamma so nothing overflows.
inline double theorem4_cdf(double rho, std::size_t n, std::size_t paths, const UeBetas& u) {
    detail::check_ue(u);
    if (rho < 0.0 || std::isnan(rho)) throw std::invalid_argument("theorem4_cdf: threshold must be nonnegative");
    if (paths == 0) throw std::invalid_argument("theorem4_cdf: path count must be >= 1");
    const double base = -std::expm1(-rho / u.beta_d);
    if (n == 0 || rho == 0.0) return base;
    const double nn = static_cast<double>(n);
    const double lb = static_cast<double>(std::min(paths, n));
    const double c = nn * nn * u.beta_r / lb;
    // (Lb e^{Lb bd/(N^2 br)}/(N^2 br)) I0(rho; bd, c) = e^{bd/c} Gamma(1, bd/c; rho/c).
    const double aligned = math::scaled_upper_incomplete_gamma1(u.beta_d / c, rho / c);
    const double f = base - lb / nn * (aligned - std::exp(-rho / u.beta_d));
    if (f < -1e-9 || f > 1.0 + 1e-9) throw std::runtime_error("theorem4_cdf: result outside [0, 1]");
    return std::clamp(f, 0.0, 1.0);
}

inline double log_binomial(double n, double k) {
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

// Probability that exactly i of the L OOB path angles coincide with the L
// angles the IRS is aligned to (hypergeometric).
inline double matching_paths_pmf(std::size_t l, std::size_t n, std::size_t i) {
    if (l >= n) throw std::invalid_argument("matching_paths_pmf: need L < N");
    const std::size_t i0 = 2 * l > n ? 2 * l - n : 0;
    if (i < i0 || i > l) return 0.0;
    const double L = static_cast<double>(l);
    const double N = static_cast<double>(n);
    const double I = static_cast<double>(i);
    return std::exp(log_binomial(L, I) + log_binomial(N - L, L - I) - log_binomial(N, L));
}

inline double theorem5_sumse_x(const AnalyticParams& p) {
    const double n = static_cast<double>(p.n_elements);
    return detail::ue_average(p, [&](const UeBetas& u) {
        const double snr = n * n * u.beta_r + n * std::sqrt(detail::pi * u.beta_d * u.beta_r) + u.beta_d;
        return std::log2(1.0 + snr * p.tx_snr);
    });
}

inline double theorem5_sumse_y(const AnalyticParams& p) {
    const std::size_t l = p.paths();
    const std::size_t n = p.n_elements;
    if (n == 0) {
        return detail::ue_average(p, [&](const UeBetas& u) { return std::log2(1.0 + u.beta_d * p.tx_snr); });
    }
    const double nn = static_cast<double>(n);
    if (l >= n) {
        return detail::ue_average(p, [&](const UeBetas& u) { return std::log2(1.0 + (u.beta_d + nn * u.beta_r) * p.tx_snr); });
    }
    const double ll = static_cast<double>(l);
    return detail::ue_average(p, [&](const UeBetas& u) {
        double s = 0.0;
        for (std::size_t i = 0; i <= l; ++i) {
            const double w = matching_paths_pmf(l, n, i);
            if (w == 0.0) continue;
            s += w * std::log2(1.0 + (u.beta_d + static_cast<double>(i) * nn * nn / (ll * ll) * u.beta_r) * p.tx_snr);
        }
        return s;
    });
}

inline double mr_asymptotic_se(std::size_t q, std::size_t n, double tx_snr, const UeBetas& u) {
    detail::check_ue(u);
    if (q == 0) throw std::invalid_argument("mr_asymptotic_se: Q must be >= 1");
    return std::log2(1.0 + std::log(static_cast<double>(q)) * (static_cast<double>(n) * u.beta_r + u.beta_d) * tx_snr);
}

struct DecayBoundParams {
    double c1 = 0.0;
    double c2 = 0.0;
    double alpha = 0.0;
    double eta = 0.0;
};

inline DecayBoundParams make_decay_bound_params(std::size_t n, double beta_r) {
    if (!(beta_r > 0.0) || n == 0) throw std::invalid_argument("decay bound: need N >= 1 and beta_r > 0");
    const double nn = static_cast<double>(n);
    return {std::sqrt((1.0 - detail::pi2_16) * beta_r), detail::pi / std::sqrt(16.0 - detail::pi * detail::pi),
            2.0 * nn * (1.0 - detail::pi2_16) * beta_r, nn * detail::pi * std::sqrt(beta_r) / 4.0};
}

// Large-N in-band outage bound 2Q(c2 sqrt(N)); the threshold drops out in
// the limit.
inline double inband_outage_bound(std::size_t n) {
    if (n == 0) throw std::invalid_argument("inband_outage_bound: N must be >= 1");
    const double c2 = detail::pi / std::sqrt(16.0 - detail::pi * detail::pi);
    return 2.0 * math::gauss_q(c2 * std::sqrt(static_cast<double>(n)));
}

// CLT form before the limit: Q(c2 sqrt(N) - a) - Q(c2 sqrt(N) + a) with
// a = sqrt(rho)/(c1 sqrt(N)).
inline double inband_outage_clt(double rho, std::size_t n, double beta_r) {
    if (rho < 0.0) throw std::invalid_argument("inband_outage_clt: threshold must be nonnegative");
    const auto d = make_decay_bound_params(n, beta_r);
    const double sn = std::sqrt(static_cast<double>(n));
    const double a = std::sqrt(rho) / (d.c1 * sn);
    return math::gauss_q(d.c2 * sn - a) - math::gauss_q(d.c2 * sn + a);
}

inline double inband_offset_ccdf_bound(double rho, std::size_t n, const UeBetas& u) {
    detail::check_ue(u);
    const auto d = make_decay_bound_params(n, u.beta_r);
    const double bd = u.beta_d;
    const double e = (bd * d.eta * d.eta - (bd + d.alpha) * rho) / (bd * bd + d.alpha * bd);
    return 1.0 - std::sqrt(bd / (bd + d.alpha)) * std::exp(-e);
}

}  // namespace irsoob::analytic

#endif
