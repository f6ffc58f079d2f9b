#ifndef IRSOOB_IRS_CONTROL_HPP
#define IRSOOB_IRS_CONTROL_HPP

#include <cmath>
#include <complex>
#include <cstddef>
#include <map>
#include <numbers>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "irsoob/channel_models.hpp"
#include "irsoob/math_kernels.hpp"

namespace irsoob::irs {

using channel::CascadedPath;
using math::cplx;
using math::cvector;

struct IrsPhaseConfig {
    cvector coefficients;

    std::size_t size() const noexcept { return coefficients.size(); }

    bool unit_modulus(double tol = 1e-12) const {
        for (const auto& c : coefficients) {
            if (std::abs(std::abs(c) - 1.0) > tol) return false;
        }
        return true;
    }
};

struct EffectiveChannel {
    cplx value{};
    double gain = 0.0;

    static EffectiveChannel of(cplx v) { return {v, std::norm(v)}; }
};

namespace detail {

inline cplx unit_phase(cplx z) {
    const double m = std::abs(z);
    return m > 0.0 ? z / m : cplx{1.0, 0.0};
}

// Sums that cancel to rounding level carry no phase information.
inline cplx cancelling_phase(cplx s, double scale) {
    return std::abs(s) > 1e-12 * scale ? s / std::abs(s) : cplx{1.0, 0.0};
}

inline double gain_scale(std::span<const CascadedPath> paths) {
    double t = 0.0;
    for (const auto& p : paths) t += std::abs(p.gain);
    return t;
}

}  // namespace detail

inline IrsPhaseConfig optimize_sub6(cplx h_d, std::span<const cplx> f, std::span<const cplx> g) {
    if (f.size() != g.size()) throw std::invalid_argument("optimize_sub6: f and g lengths differ");
    if (f.empty()) throw std::invalid_argument("optimize_sub6: N must be >= 1");
    const cplx ref = detail::unit_phase(h_d);
    IrsPhaseConfig out{cvector(f.size())};
    for (std::size_t n = 0; n < f.size(); ++n) {
        out.coefficients[n] = ref * std::conj(detail::unit_phase(f[n] * g[n]));
    }
    return out;
}

inline IrsPhaseConfig optimize_mmwave_los(cplx h_d, cplx gamma, double omega1, std::size_t n) {
    if (n == 0) throw std::invalid_argument("optimize_mmwave_los: N must be >= 1");
    const math::ResolvableAngleBook book(n);
    if (!book.contains(omega1)) throw std::invalid_argument("optimize_mmwave_los: omega must lie on the anglebook");
    const cplx ref = detail::unit_phase(h_d) * std::conj(detail::unit_phase(gamma));
    IrsPhaseConfig out{cvector(n)};
    for (std::size_t k = 0; k < n; ++k) {
        out.coefficients[k] = ref * std::polar(1.0, -std::numbers::pi * static_cast<double>(k) * omega1);
    }
    return out;
}

// Paths that share a grid angle add coherently; the merged list keeps the
// first-seen order of angles.
inline std::vector<CascadedPath> merge_clustered(std::span<const CascadedPath> paths) {
    std::vector<CascadedPath> out;
    std::map<std::size_t, std::size_t> slot;
    for (const auto& p : paths) {
        auto [it, fresh] = slot.try_emplace(p.index, out.size());
        if (fresh) {
            out.push_back(p);
        } else {
            out[it->second].gain += p.gain;
        }
    }
    return out;
}

inline IrsPhaseConfig optimize_mmwave_nlos(cplx h_d, std::span<const CascadedPath> cascaded, std::size_t n) {
    if (cascaded.empty()) throw std::invalid_argument("optimize_mmwave_nlos: need at least one path");
    if (n == 0) throw std::invalid_argument("optimize_mmwave_nlos: N must be >= 1");
    const auto merged = merge_clustered(cascaded);
    const cplx ref = detail::unit_phase(h_d);
    const double scale = detail::gain_scale(merged);
    IrsPhaseConfig out{cvector(n)};
    for (std::size_t k = 0; k < n; ++k) {
        cplx s{};
        for (const auto& p : merged) {
            s += std::conj(p.gain) * std::polar(1.0, -std::numbers::pi * static_cast<double>(k) * p.omega);
        }
        out.coefficients[k] = ref * detail::cancelling_phase(s, scale);
    }
    return out;
}

// Sub-6: h_d + sum_n g_n theta_n f_n.
inline EffectiveChannel effective_channel(cplx h_d, std::span<const cplx> f, std::span<const cplx> g,
                                          const IrsPhaseConfig& theta) {
    if (f.size() != g.size() || f.size() != theta.size()) {
        throw std::invalid_argument("effective_channel: dimension mismatch");
    }
    cplx v = h_d;
    for (std::size_t n = 0; n < f.size(); ++n) v += g[n] * theta.coefficients[n] * f[n];
    return EffectiveChannel::of(v);
}

// mmWave: h_d + (N/sqrt(L)) sum_l gamma_l a_dot^H(omega_l) theta, L being the
// nominal path count before any clustering.
inline EffectiveChannel effective_channel(cplx h_d, std::span<const CascadedPath> paths, std::size_t nominal_paths,
                                          const IrsPhaseConfig& theta) {
    if (theta.size() == 0) return EffectiveChannel::of(h_d);
    if (nominal_paths == 0) throw std::invalid_argument("effective_channel: nominal path count must be >= 1");
    const double n = static_cast<double>(theta.size());
    cplx acc{};
    for (const auto& p : paths) acc += p.gain * math::normalized_projection(p.omega, theta.coefficients);
    return EffectiveChannel::of(h_d + (n / std::sqrt(static_cast<double>(nominal_paths))) * acc);
}

// Exact phasors exp(i*pi*n*omega_m) for grid angles omega_m = -1 + 2m/N,
// read from a table of N-th roots of unity.
class GridProjector {
public:
    explicit GridProjector(std::size_t n) : n_(n), roots_(n) {
        if (n == 0) throw std::invalid_argument("GridProjector: N must be >= 1");
        for (std::size_t k = 0; k < n; ++k) {
            roots_[k] = std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n));
        }
    }

    std::size_t size() const noexcept { return n_; }

    cplx phasor(std::size_t element, std::size_t m) const {
        const cplx r = roots_[(element * m) % n_];
        return element % 2 == 0 ? r : -r;
    }

    // a_dot^H(omega_m) theta.
    cplx project(std::size_t m, std::span<const cplx> theta) const {
        cplx acc{};
        for (std::size_t k = 0; k < n_; ++k) acc += phasor(k, m) * theta[k];
        return acc / static_cast<double>(n_);
    }

private:
    std::size_t n_;
    cvector roots_;
};

inline IrsPhaseConfig optimize_mmwave_nlos(cplx h_d, std::span<const CascadedPath> cascaded, const GridProjector& grid) {
    if (cascaded.empty()) throw std::invalid_argument("optimize_mmwave_nlos: need at least one path");
    const auto merged = merge_clustered(cascaded);
    const cplx ref = detail::unit_phase(h_d);
    const double scale = detail::gain_scale(merged);
    const std::size_t n = grid.size();
    IrsPhaseConfig out{cvector(n)};
    for (std::size_t k = 0; k < n; ++k) {
        cplx s{};
        for (const auto& p : merged) s += std::conj(p.gain * grid.phasor(k, p.index));
        out.coefficients[k] = ref * detail::cancelling_phase(s, scale);
    }
    return out;
}

inline EffectiveChannel effective_channel(cplx h_d, std::span<const CascadedPath> paths, std::size_t nominal_paths,
                                          const IrsPhaseConfig& theta, const GridProjector& grid) {
    if (theta.size() == 0) return EffectiveChannel::of(h_d);
    if (theta.size() != grid.size()) throw std::invalid_argument("effective_channel: projector size mismatch");
    if (nominal_paths == 0) throw std::invalid_argument("effective_channel: nominal path count must be >= 1");
    const double n = static_cast<double>(theta.size());
    cplx acc{};
    for (const auto& p : merge_clustered(paths)) acc += p.gain * grid.project(p.index, theta.coefficients);
    return EffectiveChannel::of(h_d + (n / std::sqrt(static_cast<double>(nominal_paths))) * acc);
}

enum class ResponseStatistic { amplitude, power };
enum class GainModel { rayleigh, unit_modulus_random_phase };

// Ensemble behind the directional response: N elements, optimized path angles
// (one angle selects the LoS optimizer, several the NLoS one) and the law of
// the per-path gains.
struct CorrelationEnsemble {
    std::size_t n = 0;
    std::vector<double> path_angles;
    GainModel gains = GainModel::rayleigh;
};

// Normalized response E|a_dot^H(nu) theta_opt| (or its square) at every nu.
template <class URBG>
std::vector<double> correlation_response_curve(const CorrelationEnsemble& ens, std::span<const double> nus,
                                               std::size_t trials, URBG& rng,
                                               ResponseStatistic stat = ResponseStatistic::amplitude) {
    if (trials < 100) throw std::invalid_argument("correlation_response: need at least 100 trials");
    if (ens.n == 0 || ens.path_angles.empty()) throw std::invalid_argument("correlation_response: empty ensemble");
    const math::ResolvableAngleBook book(ens.n);
    std::vector<CascadedPath> paths;
    for (double a : ens.path_angles) {
        if (!book.contains(a)) throw std::invalid_argument("correlation_response: path angle off the anglebook");
        paths.push_back({book.index_of(a), a, {}});
    }
    for (double nu : nus) {
        if (!book.contains(nu)) throw std::invalid_argument("correlation_response: nu off the anglebook");
    }
    std::vector<double> acc(nus.size(), 0.0);
    std::uniform_real_distribution<double> uphase(0.0, 2.0 * std::numbers::pi);
    for (std::size_t t = 0; t < trials; ++t) {
        for (auto& p : paths) {
            p.gain = ens.gains == GainModel::rayleigh ? channel::complex_gaussian(rng, 1.0)
                                                      : std::polar(1.0, uphase(rng));
        }
        const cplx h_d{1.0, 0.0};
        const IrsPhaseConfig theta = paths.size() == 1
                                         ? optimize_mmwave_los(h_d, paths[0].gain, paths[0].omega, ens.n)
                                         : optimize_mmwave_nlos(h_d, paths, ens.n);
        for (std::size_t i = 0; i < nus.size(); ++i) {
            const double m = std::abs(math::normalized_projection(nus[i], theta.coefficients));
            acc[i] += stat == ResponseStatistic::amplitude ? m : m * m;
        }
    }
    for (auto& a : acc) a /= static_cast<double>(trials);
    return acc;
}

template <class URBG>
double correlation_response(const CorrelationEnsemble& ens, double nu, std::size_t trials, URBG& rng,
                            ResponseStatistic stat = ResponseStatistic::amplitude) {
    const double nus[] = {nu};
    return correlation_response_curve(ens, nus, trials, rng, stat).front();
}

}  // namespace irsoob::irs

#endif
