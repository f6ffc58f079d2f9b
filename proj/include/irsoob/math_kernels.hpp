#ifndef IRSOOB_MATH_KERNELS_HPP
#define IRSOOB_MATH_KERNELS_HPP

#include <cmath>
#include <complex>
#include <concepts>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace irsoob::math {

using cplx = std::complex<double>;
using cvector = std::vector<cplx>;

class quadrature_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

template <std::floating_point T>
inline void require_finite(T x, const char* what) {
    if (!std::isfinite(x)) {
        throw std::invalid_argument(std::string(what) + " must be finite");
    }
}

// Unit-norm ULA response, entry n = exp(-i*pi*n*angle)/sqrt(N).
template <std::floating_point T = double>
struct SteeringVector {
    std::size_t length = 0;
    T angle = 0;
    std::vector<std::complex<T>> entries;

    // The N-normalized variant used when composing cascaded channels.
    std::vector<std::complex<T>> normalized() const {
        std::vector<std::complex<T>> out(entries);
        const T s = T(1) / std::sqrt(static_cast<T>(length));
        for (auto& e : out) e *= s;
        return out;
    }
};

template <std::floating_point T = double>
inline SteeringVector<T> steering_vector(std::size_t n, T phi) {
    if (n == 0) throw std::invalid_argument("steering_vector: N must be >= 1");
    require_finite(phi, "steering_vector: angle");
    if (phi < T(-1) || phi >= T(1)) {
        throw std::invalid_argument("steering_vector: angle must lie in [-1, 1)");
    }
    SteeringVector<T> sv{n, phi, std::vector<std::complex<T>>(n)};
    const T scale = T(1) / std::sqrt(static_cast<T>(n));
    for (std::size_t i = 0; i < n; ++i) {
        sv.entries[i] = std::polar(scale, -std::numbers::pi_v<T> * static_cast<T>(i) * phi);
    }
    return sv;
}

// Conjugate inner product a^H b.
template <std::floating_point T>
inline std::complex<T> inner(std::span<const std::complex<T>> a, std::span<const std::complex<T>> b) {
    if (a.size() != b.size()) throw std::invalid_argument("inner: length mismatch");
    std::complex<T> acc{};
    for (std::size_t i = 0; i < a.size(); ++i) acc += std::conj(a[i]) * b[i];
    return acc;
}

// (1/N) * sum_n exp(+i*pi*n*nu) * theta_n, i.e. the normalized steering
// vector at nu projected onto theta.
inline cplx normalized_projection(double nu, std::span<const cplx> theta) {
    const std::size_t n = theta.size();
    cplx acc{};
    for (std::size_t i = 0; i < n; ++i) {
        acc += std::polar(1.0, std::numbers::pi * static_cast<double>(i) * nu) * theta[i];
    }
    return acc / static_cast<double>(n);
}

class ResolvableAngleBook {
public:
    explicit ResolvableAngleBook(std::size_t n) : n_(n) {
        if (n == 0) throw std::invalid_argument("ResolvableAngleBook: N must be >= 1");
        angles_.resize(n);
        for (std::size_t i = 0; i < n; ++i) angles_[i] = angle_of(i);
    }

    std::size_t size() const noexcept { return n_; }
    const std::vector<double>& angles() const noexcept { return angles_; }
    double operator[](std::size_t i) const { return angles_.at(i); }

    double angle_of(std::size_t i) const noexcept {
        return -1.0 + 2.0 * static_cast<double>(i) / static_cast<double>(n_);
    }

    // Grid index of an angle; angles off the grid snap to the nearest point
    // with wrap-around.
    std::size_t index_of(double angle) const {
        require_finite(angle, "ResolvableAngleBook: angle");
        const double pos = (angle + 1.0) * static_cast<double>(n_) / 2.0;
        const auto m = static_cast<long long>(std::llround(pos));
        const auto nn = static_cast<long long>(n_);
        return static_cast<std::size_t>(((m % nn) + nn) % nn);
    }

    double nearest(double angle) const { return angles_[index_of(angle)]; }

    bool contains(double angle, double tol = 1e-12) const {
        return std::abs(nearest(angle) - angle) <= tol;
    }

    // Grid index of wrap(angle_i + angle_j); exact because the grid is closed
    // under addition modulo 2 when N is even.
    std::size_t sum_index(std::size_t i, std::size_t j) const {
        if (n_ % 2 != 0) throw std::domain_error("ResolvableAngleBook: cascaded sums need even N");
        return (i + j + n_ / 2) % n_;
    }

private:
    std::size_t n_;
    std::vector<double> angles_;
};

template <std::floating_point T = double>
inline T principal_sine_wrap(T x) {
    require_finite(x, "principal_sine_wrap: input");
    if (x >= T(1)) return x - T(2);
    if (x < T(-1)) return x + T(2);
    return x;
}

template <std::floating_point T = double>
inline T fejer_kernel(std::size_t n, T x) {
    if (n == 0) throw std::invalid_argument("fejer_kernel: N must be >= 1");
    require_finite(x, "fejer_kernel: input");
    const T pi = std::numbers::pi_v<T>;
    const T den = std::sin(T(0.5) * pi * x);
    const T nn = static_cast<T>(n);
    if (std::abs(den) < T(1e-12)) {
        // x = 2m: ratio tends to (+/-1)^m * N depending on the parity of N*m.
        const auto m = static_cast<long long>(std::llround(x / T(2)));
        const bool flip = (static_cast<long long>(n - 1) * m) % 2 != 0;
        return flip ? -nn : nn;
    }
    return std::sin(T(0.5) * nn * pi * x) / den;
}

template <std::floating_point T = double>
inline T gauss_q(T x) {
    if (std::isnan(x)) throw std::invalid_argument("gauss_q: input is NaN");
    return T(0.5) * std::erfc(x / std::numbers::sqrt2_v<T>);
}

namespace detail {

constexpr double quad_tol = 1e-11;
constexpr double tail_tol = 1e-14;

template <class F>
double kronrod(F f, double a, double b, double& err, double& l1) {
    if (!(b > a)) return 0.0;
    double e = 0.0;
    double m = 0.0;
    const double r = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 20, quad_tol, &e, &m);
    if (!std::isfinite(r)) throw quadrature_error("quadrature failed to converge");
    err += e;
    l1 += m;
    return r;
}

// Integrates exp(-phi(t)) on [a, inf) for a convex-ish exponent phi whose
// minimiser on [a, inf) is t0. The integrand is rescaled by exp(phi(t0)) and
// the range is truncated where the rescaled tail drops below tail_tol.
template <class Phi>
double integrate_exp_tail(Phi phi, double a, double t0, double scale, double& log_scale) {
    log_scale = -phi(t0);
    auto g = [&](double t) { return std::exp(-(phi(t) - phi(t0))); };
    // Local width of the peak from the slope and curvature at t0.
    const double h = 1e-4 * std::max(1.0, std::abs(t0));
    const double p0 = phi(t0);
    const double d1 = std::abs(phi(t0 + h) - p0) / h;
    const double d2 = std::max(0.0, (phi(t0 + h) - 2.0 * p0 + phi(t0 - h)) / (h * h));
    const double width = std::min(scale, 1.0 / std::max({d1, std::sqrt(d2), 1e-300}));
    // A peak this close to the lower limit is integrated from the limit.
    const bool split = t0 - a > 1e-6 * width;
    const double start = split ? t0 : a;
    // Grow the truncation point geometrically until the integrand and the
    // remaining tail are negligible.
    double step = std::max(width, 1e-300);
    double hi = start + step;
    for (int it = 0; it < 200; ++it) {
        if (g(hi) * step < tail_tol * 1e-3) break;
        step *= 2.0;
        hi = start + step;
    }
    double total = 0.0;
    double err = 0.0;
    double l1 = 0.0;
    if (split) total += kronrod(g, a, t0, err, l1);
    total += kronrod(g, start, hi, err, l1);
    if (err > 1e-9 * std::max(l1, std::numeric_limits<double>::min())) {
        throw quadrature_error("quadrature failed to converge");
    }
    return total;
}

}  // namespace detail

// Natural log of Gamma(alpha, x; b), usable when the value underflows.
inline double log_generalized_upper_incomplete_gamma(double alpha, double x, double b) {
    require_finite(alpha, "generalized_upper_incomplete_gamma: alpha");
    require_finite(x, "generalized_upper_incomplete_gamma: x");
    require_finite(b, "generalized_upper_incomplete_gamma: b");
    if (!(x > 0.0) || b < 0.0) {
        throw std::invalid_argument("generalized_upper_incomplete_gamma: need x > 0, b >= 0");
    }
    double log_scale = 0.0;
    double v = 0.0;
    if (x < 1.0 && b < 1.0) {
        // t = e^u; stationary point solves e^{2u} - alpha e^u - b = 0.
        auto phi = [=](double u) { return std::exp(u) + b * std::exp(-u) - alpha * u; };
        const double us = std::log(0.5 * (alpha + std::sqrt(alpha * alpha + 4.0 * b)));
        const double a = std::log(x);
        v = detail::integrate_exp_tail(phi, a, std::isfinite(us) ? std::max(a, us) : a, 1.0, log_scale);
    } else {
        // t = x + s, with the constant x - (alpha-1) ln x moved into the scale.
        const double am1 = alpha - 1.0;
        auto phi = [=](double s) { return s + b / (x + s) - am1 * std::log1p(s / x); };
        const double ts = 0.5 * (am1 + std::sqrt(am1 * am1 + 4.0 * b));
        v = detail::integrate_exp_tail(phi, 0.0, std::max(0.0, ts - x), std::max(1.0, std::abs(am1)), log_scale);
        log_scale += -x + am1 * std::log(x);
    }
    return std::log(v) + log_scale;
}

// Gamma(alpha, x; b) = integral over [x, inf) of t^(alpha-1) exp(-t - b/t).
inline double generalized_upper_incomplete_gamma(double alpha, double x, double b) {
    return std::exp(log_generalized_upper_incomplete_gamma(alpha, x, b));
}

// Natural log of the I0 integral, usable when the value itself underflows.
// Substituting t = c2 u gives I0(x; c1, c2) = c2 Gamma(1, c1/c2; x/c2).
inline double log_i0_integral(double x, double c1, double c2) {
    require_finite(x, "i0_integral: x");
    if (!(c1 > 0.0) || !(c2 > 0.0) || x < 0.0 || !std::isfinite(c1) || !std::isfinite(c2)) {
        throw std::invalid_argument("i0_integral: need x >= 0, c1 > 0, c2 > 0");
    }
    if (x == 0.0) return std::log(c2) - c1 / c2;
    return std::log(c2) + log_generalized_upper_incomplete_gamma(1.0, c1 / c2, x / c2);
}

// I0(x; c1, c2) = integral over [c1, inf) of exp(-(x/t + t/c2)).
inline double i0_integral(double x, double c1, double c2) {
    return std::exp(log_i0_integral(x, c1, c2));
}

// exp(x) * Gamma(1, x; b) = integral over [0, inf) of exp(-s - b/(s+x)).
// Bounded by 1, so it stays finite where exp(x) and Gamma(1, x; b) do not.
inline double scaled_upper_incomplete_gamma1(double x, double b) {
    require_finite(x, "scaled_upper_incomplete_gamma1: x");
    require_finite(b, "scaled_upper_incomplete_gamma1: b");
    if (!(x > 0.0) || b < 0.0) {
        throw std::invalid_argument("scaled_upper_incomplete_gamma1: need x > 0, b >= 0");
    }
    if (b == 0.0) return 1.0;
    double log_scale = 0.0;
    double v = 0.0;
    if (x < 1.0 && b < 1.0) {
        // s + x = e^u.
        auto phi = [=](double u) { return (std::exp(u) - x) + b * std::exp(-u) - u; };
        const double a = std::log(x);
        const double us = std::log(0.5 * (1.0 + std::sqrt(1.0 + 4.0 * b)));
        v = detail::integrate_exp_tail(phi, a, std::max(a, us), 1.0, log_scale);
    } else {
        auto phi = [=](double s) { return s + b / (s + x); };
        v = detail::integrate_exp_tail(phi, 0.0, std::max(0.0, std::sqrt(b) - x), std::max(1.0, x), log_scale);
    }
    return std::min(1.0, v * std::exp(log_scale));
}

inline double db_to_linear(double db) {
    require_finite(db, "db_to_linear: input");
    return std::pow(10.0, db / 10.0);
}

inline double linear_to_db(double lin) {
    if (!(lin > 0.0)) throw std::invalid_argument("linear_to_db: input must be positive");
    return 10.0 * std::log10(lin);
}

}  // namespace irsoob::math

#endif
