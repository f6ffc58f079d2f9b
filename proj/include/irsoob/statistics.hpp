#ifndef IRSOOB_STATISTICS_HPP
#define IRSOOB_STATISTICS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

namespace irsoob::sim {

class EmpiricalDistribution {
public:
    EmpiricalDistribution() = default;
    explicit EmpiricalDistribution(std::vector<double> samples) : s_(std::move(samples)) {
        for (double v : s_) {
            if (std::isnan(v)) throw std::invalid_argument("EmpiricalDistribution: NaN sample");
        }
        std::sort(s_.begin(), s_.end());
    }

    std::size_t size() const noexcept { return s_.size(); }
    bool empty() const noexcept { return s_.empty(); }
    const std::vector<double>& samples() const noexcept { return s_; }

    // Fraction of samples strictly above x.
    double ccdf(double x) const {
        require_samples();
        const auto it = std::upper_bound(s_.begin(), s_.end(), x);
        return static_cast<double>(s_.end() - it) / static_cast<double>(s_.size());
    }

    // Fraction of samples at or below x.
    double cdf(double x) const { return 1.0 - ccdf(x); }

    // Fraction of samples strictly below rho.
    double below(double rho) const {
        require_samples();
        const auto it = std::lower_bound(s_.begin(), s_.end(), rho);
        return static_cast<double>(it - s_.begin()) / static_cast<double>(s_.size());
    }

    double quantile(double p) const {
        require_samples();
        if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("quantile: p must lie in [0, 1]");
        const double pos = p * static_cast<double>(s_.size() - 1);
        const auto lo = static_cast<std::size_t>(std::floor(pos));
        const auto hi = std::min(lo + 1, s_.size() - 1);
        return s_[lo] + (pos - static_cast<double>(lo)) * (s_[hi] - s_[lo]);
    }

private:
    void require_samples() const {
        if (s_.empty()) throw std::invalid_argument("EmpiricalDistribution: no samples");
    }
    std::vector<double> s_;
};

inline double empirical_ccdf(const EmpiricalDistribution& d, double x) { return d.ccdf(x); }
inline double empirical_outage(const EmpiricalDistribution& d, double rho) { return d.below(rho); }

// sup_x |F_n(x) - F(x)| against a continuous reference CDF.
inline double ks_distance(const EmpiricalDistribution& d, const std::function<double(double)>& cdf) {
    const auto& s = d.samples();
    if (s.empty()) throw std::invalid_argument("ks_distance: no samples");
    const double n = static_cast<double>(s.size());
    double dmax = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double f = cdf(s[i]);
        dmax = std::max({dmax, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
    }
    return dmax;
}

// sup_x of sign * (F_a(x) - F_b(x)) over the pooled sample points; sign = 0
// gives the two-sided statistic.
inline double ks_two_sample(const EmpiricalDistribution& a, const EmpiricalDistribution& b, int sign = 0) {
    const auto& x = a.samples();
    const auto& y = b.samples();
    if (x.empty() || y.empty()) throw std::invalid_argument("ks_two_sample: no samples");
    const double na = static_cast<double>(x.size());
    const double nb = static_cast<double>(y.size());
    std::size_t i = 0;
    std::size_t j = 0;
    double best = 0.0;
    while (i < x.size() || j < y.size()) {
        double v;
        if (j >= y.size() || (i < x.size() && x[i] <= y[j])) {
            v = x[i];
        } else {
            v = y[j];
        }
        while (i < x.size() && x[i] == v) ++i;
        while (j < y.size() && y[j] == v) ++j;
        const double diff = static_cast<double>(i) / na - static_cast<double>(j) / nb;
        const double val = sign == 0 ? std::abs(diff) : sign * diff;
        best = std::max(best, val);
    }
    return best;
}

// Asymptotic Kolmogorov p-value for the two-sample statistic.
inline double ks_two_sample_pvalue(double d, std::size_t n1, std::size_t n2) {
    const double ne = static_cast<double>(n1) * static_cast<double>(n2) / static_cast<double>(n1 + n2);
    const double sn = std::sqrt(ne);
    const double lambda = (sn + 0.12 + 0.11 / sn) * d;
    if (lambda < 1e-3) return 1.0;
    double sum = 0.0;
    for (int k = 1; k <= 200; ++k) {
        const double term = std::exp(-2.0 * k * k * lambda * lambda);
        sum += (k % 2 == 1 ? 2.0 : -2.0) * term;
        if (term < 1e-16) break;
    }
    return std::clamp(sum, 0.0, 1.0);
}

// DKW half-width: P(sup |F_n - F| > eps) <= alpha.
inline double dkw_epsilon(std::size_t n, double alpha = 0.0027) {
    if (n == 0) throw std::invalid_argument("dkw_epsilon: no samples");
    return std::sqrt(std::log(2.0 / alpha) / (2.0 * static_cast<double>(n)));
}

struct DominanceReport {
    double min_difference = 0.0;
    double argmin = 0.0;
    double ks_one_sided = 0.0;
    double epsilon = 0.0;
    bool pass = false;
};

// Checks CCDF_with >= CCDF_without on the grid up to the joint DKW floor.
inline DominanceReport dominance_test(const EmpiricalDistribution& with, const EmpiricalDistribution& without,
                                      std::span<const double> grid) {
    if (grid.empty()) throw std::invalid_argument("dominance_test: empty grid");
    DominanceReport r;
    r.min_difference = std::numeric_limits<double>::infinity();
    for (double x : grid) {
        const double d = with.ccdf(x) - without.ccdf(x);
        if (d < r.min_difference) {
            r.min_difference = d;
            r.argmin = x;
        }
    }
    // Largest excess of F_with over F_without, i.e. of CCDF_without over CCDF_with.
    r.ks_one_sided = ks_two_sample(with, without, +1);
    r.epsilon = dkw_epsilon(with.size()) + dkw_epsilon(without.size());
    r.pass = r.min_difference >= -r.epsilon;
    return r;
}

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};

inline LinearFit least_squares(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("least_squares: need >= 2 paired points");
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxx = 0.0;
    double sxy = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0) throw std::invalid_argument("least_squares: degenerate abscissae");
    LinearFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    f.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
    return f;
}

struct MeanStderr {
    double mean = 0.0;
    double std_error = 0.0;
};

inline MeanStderr mean_stderr(std::span<const double> v) {
    if (v.empty()) throw std::invalid_argument("mean_stderr: empty input");
    const double n = static_cast<double>(v.size());
    const double m = std::accumulate(v.begin(), v.end(), 0.0) / n;
    if (v.size() < 2) return {m, std::numeric_limits<double>::quiet_NaN()};
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return {m, std::sqrt(ss / (n - 1.0) / n)};
}

}  // namespace irsoob::sim

#endif
