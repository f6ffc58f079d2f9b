#ifndef IRSOOB_CHANNEL_MODELS_HPP
#define IRSOOB_CHANNEL_MODELS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "irsoob/math_kernels.hpp"

namespace irsoob::channel {

using math::cplx;
using math::cvector;

struct Point2 {
    double x = 0.0;
    double y = 0.0;
    bool operator==(const Point2&) const = default;
};

inline double distance(Point2 a, Point2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

struct Rect {
    Point2 lo;
    Point2 hi;
};

struct NodeGeometry {
    Point2 bs_x{0.0, 50.0};
    Point2 bs_y{50.0, 0.0};
    Point2 irs{1025.0, 1025.0};
    Rect ue_region{{950.0, 950.0}, {1100.0, 1100.0}};
};

enum class LinkClass { bs_irs, irs_ue, direct };

struct PathLossParams {
    double c0_db = -30.0;
    double d0 = 1.0;
    double alpha_bs_irs = 2.0;
    double alpha_irs_ue = 2.0;
    double alpha_direct = 4.5;

    double alpha(LinkClass c) const noexcept {
        switch (c) {
            case LinkClass::bs_irs: return alpha_bs_irs;
            case LinkClass::irs_ue: return alpha_irs_ue;
            case LinkClass::direct: return alpha_direct;
        }
        return alpha_direct;
    }

    void validate() const {
        if (!(c0_db < 0.0) || !std::isfinite(c0_db)) throw std::invalid_argument("path loss: c0_db must be negative");
        if (!(d0 > 0.0) || !std::isfinite(d0)) throw std::invalid_argument("path loss: d0 must be positive");
        for (double a : {alpha_bs_irs, alpha_irs_ue, alpha_direct}) {
            if (!(a >= 2.0) || !std::isfinite(a)) throw std::invalid_argument("path loss: exponents must be >= 2");
        }
    }
};

inline double path_loss(const PathLossParams& p, double distance_m, LinkClass link) {
    p.validate();
    if (!std::isfinite(distance_m) || distance_m < p.d0) {
        throw std::invalid_argument("path_loss: distance must be >= d0");
    }
    return math::db_to_linear(p.c0_db) * std::pow(p.d0 / distance_m, p.alpha(link));
}

struct UeLoss {
    double beta_d = 0.0;  // BS -> UE
    double beta_g = 0.0;  // IRS -> UE
};

struct OperatorLosses {
    double beta_f = 0.0;  // BS -> IRS
    std::vector<UeLoss> ues;
};

inline OperatorLosses link_budget(const PathLossParams& p, Point2 bs, Point2 irs, const std::vector<Point2>& ues) {
    OperatorLosses out;
    out.beta_f = path_loss(p, distance(bs, irs), LinkClass::bs_irs);
    out.ues.reserve(ues.size());
    for (const auto& u : ues) {
        out.ues.push_back({path_loss(p, distance(bs, u), LinkClass::direct),
                           path_loss(p, distance(irs, u), LinkClass::irs_ue)});
    }
    return out;
}

// Uniform placement over the UE rectangle, rejecting points within d0 of any
// infrastructure node.
template <class URBG>
std::vector<Point2> place_ues(URBG& rng, const NodeGeometry& geo, std::size_t count, double d0) {
    const Rect& r = geo.ue_region;
    if (!(r.hi.x > r.lo.x) || !(r.hi.y > r.lo.y)) {
        throw std::invalid_argument("place_ues: degenerate UE region");
    }
    std::uniform_real_distribution<double> ux(r.lo.x, r.hi.x);
    std::uniform_real_distribution<double> uy(r.lo.y, r.hi.y);
    std::vector<Point2> out;
    out.reserve(count);
    std::size_t attempts = 0;
    while (out.size() < count) {
        if (++attempts > 1000 * (count + 1)) throw std::runtime_error("place_ues: cannot satisfy d0 clearance");
        Point2 p{ux(rng), uy(rng)};
        if (distance(p, geo.irs) <= d0 || distance(p, geo.bs_x) <= d0 || distance(p, geo.bs_y) <= d0) continue;
        out.push_back(p);
    }
    return out;
}

template <class URBG>
cplx complex_gaussian(URBG& rng, double variance) {
    std::normal_distribution<double> nd(0.0, std::sqrt(variance / 2.0));
    const double re = nd(rng);
    const double im = nd(rng);
    return {re, im};
}

template <class URBG>
cvector complex_gaussian_vector(URBG& rng, std::size_t n, double variance) {
    cvector v(n);
    std::normal_distribution<double> nd(0.0, std::sqrt(variance / 2.0));
    for (auto& e : v) {
        const double re = nd(rng);
        const double im = nd(rng);
        e = {re, im};
    }
    return v;
}

struct Sub6PathLosses {
    OperatorLosses x;
    OperatorLosses y;
};

struct Sub6ChannelRealization {
    cvector f_x;
    cvector f_y;
    std::vector<cplx> h_d_x;
    std::vector<cplx> h_d_y;
    std::vector<cvector> g_x;
    std::vector<cvector> g_y;
};

template <class URBG>
Sub6ChannelRealization sample_sub6(URBG& rng, std::size_t n, const Sub6PathLosses& losses) {
    Sub6ChannelRealization r;
    r.f_x = complex_gaussian_vector(rng, n, losses.x.beta_f);
    r.f_y = complex_gaussian_vector(rng, n, losses.y.beta_f);
    auto draw = [&](const OperatorLosses& ol, std::vector<cplx>& hd, std::vector<cvector>& g) {
        hd.reserve(ol.ues.size());
        g.reserve(ol.ues.size());
        for (const auto& u : ol.ues) {
            hd.push_back(complex_gaussian(rng, u.beta_d));
            g.push_back(complex_gaussian_vector(rng, n, u.beta_g));
        }
    };
    draw(losses.x, r.h_d_x, r.g_x);
    draw(losses.y, r.h_d_y, r.g_y);
    return r;
}

struct CascadedPath {
    std::size_t index = 0;  // grid index of omega
    double omega = 0.0;
    cplx gain{};
};

// One operator's mmWave channels: the BS->IRS link plus one IRS->UE link and
// direct path per UE.
struct MmWaveChannelRealization {
    std::size_t n = 0;
    std::size_t l1 = 0;
    std::size_t l2 = 0;
    std::vector<std::size_t> bs_index;
    std::vector<double> bs_angles;
    cvector bs_gains;
    std::vector<std::vector<std::size_t>> ue_index;
    std::vector<std::vector<double>> ue_angles;
    std::vector<cvector> ue_gains;
    std::vector<std::vector<CascadedPath>> cascaded;
    std::vector<cplx> h_d;

    std::size_t paths() const noexcept { return l1 * l2; }

    // f = sqrt(N/L1) * sum_i gamma_i * conj(a_N(phi_i)).
    cvector bs_channel() const { return array_channel(bs_angles, bs_gains, l1); }
    cvector ue_channel(std::size_t ue) const { return array_channel(ue_angles.at(ue), ue_gains.at(ue), l2); }

private:
    cvector array_channel(const std::vector<double>& angles, const cvector& gains, std::size_t l) const {
        cvector v(n);
        const double s = std::sqrt(static_cast<double>(n) / static_cast<double>(l));
        for (std::size_t i = 0; i < angles.size(); ++i) {
            const auto a = math::steering_vector(n, angles[i]);
            for (std::size_t k = 0; k < n; ++k) v[k] += s * gains[i] * std::conj(a.entries[k]);
        }
        return v;
    }
};

// Draws count grid indices: distinct when count <= N, otherwise with
// replacement so that paths cluster.
template <class URBG>
std::vector<std::size_t> sample_grid_indices(URBG& rng, std::size_t n, std::size_t count) {
    std::vector<std::size_t> out;
    out.reserve(count);
    if (count > n) {
        std::uniform_int_distribution<std::size_t> u(0, n - 1);
        for (std::size_t i = 0; i < count; ++i) out.push_back(u(rng));
        return out;
    }
    for (std::size_t j = n - count; j < n; ++j) {
        std::uniform_int_distribution<std::size_t> u(0, j);
        const std::size_t t = u(rng);
        out.push_back(std::find(out.begin(), out.end(), t) == out.end() ? t : j);
    }
    std::shuffle(out.begin(), out.end(), rng);
    return out;
}

inline void rebuild_cascade(MmWaveChannelRealization& r, const math::ResolvableAngleBook& book) {
    r.cascaded.assign(r.ue_index.size(), {});
    for (std::size_t u = 0; u < r.ue_index.size(); ++u) {
        auto& c = r.cascaded[u];
        c.reserve(r.paths());
        for (std::size_t i = 0; i < r.l1; ++i) {
            for (std::size_t j = 0; j < r.l2; ++j) {
                const std::size_t idx = book.sum_index(r.bs_index[i], r.ue_index[u][j]);
                c.push_back({idx, book[idx], r.bs_gains[i] * r.ue_gains[u][j]});
            }
        }
    }
}

// Redraws path gains and direct channels, keeping the angles.
template <class URBG>
void redraw_gains(URBG& rng, MmWaveChannelRealization& r, const OperatorLosses& losses,
                  const math::ResolvableAngleBook& book) {
    r.bs_gains = complex_gaussian_vector(rng, r.l1, losses.beta_f);
    for (std::size_t u = 0; u < losses.ues.size(); ++u) {
        r.h_d[u] = complex_gaussian(rng, losses.ues[u].beta_d);
        r.ue_gains[u] = complex_gaussian_vector(rng, r.l2, losses.ues[u].beta_g);
    }
    rebuild_cascade(r, book);
}

template <class URBG>
MmWaveChannelRealization sample_mmwave(URBG& rng, std::size_t n, std::size_t l1, std::size_t l2,
                                       const OperatorLosses& losses, const math::ResolvableAngleBook& book) {
    if (l1 == 0 || l2 == 0) throw std::invalid_argument("sample_mmwave: path counts must be >= 1");
    if (book.size() != n) throw std::invalid_argument("sample_mmwave: anglebook size must equal N");
    MmWaveChannelRealization r;
    r.n = n;
    r.l1 = l1;
    r.l2 = l2;
    r.bs_index = sample_grid_indices(rng, n, l1);
    for (auto i : r.bs_index) r.bs_angles.push_back(book[i]);
    const std::size_t ues = losses.ues.size();
    r.ue_index.resize(ues);
    r.ue_angles.resize(ues);
    r.ue_gains.resize(ues);
    r.h_d.resize(ues);
    for (std::size_t u = 0; u < ues; ++u) {
        r.ue_index[u] = sample_grid_indices(rng, n, l2);
        for (auto i : r.ue_index[u]) r.ue_angles[u].push_back(book[i]);
    }
    redraw_gains(rng, r, losses, book);
    return r;
}

}  // namespace irsoob::channel

#endif
