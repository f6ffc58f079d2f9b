#ifndef IRSOOB_SIMULATION_HPP
#define IRSOOB_SIMULATION_HPP

#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <initializer_list>
#include <limits>
#include <mutex>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "irsoob/channel_models.hpp"
#include "irsoob/irs_control.hpp"
#include "irsoob/scheduler.hpp"
#include "irsoob/statistics.hpp"

namespace irsoob::sim {

using math::cplx;
using Rng = std::mt19937_64;

// Independent stream for a (seed, ids...) tuple.
inline Rng make_stream(std::uint64_t seed, std::initializer_list<std::uint64_t> ids) {
    std::vector<std::uint32_t> words;
    words.reserve(2 * (ids.size() + 1));
    auto push = [&](std::uint64_t v) {
        words.push_back(static_cast<std::uint32_t>(v));
        words.push_back(static_cast<std::uint32_t>(v >> 32));
    };
    push(seed);
    for (auto v : ids) push(v);
    std::seed_seq seq(words.begin(), words.end());
    return Rng(seq);
}

enum class Regime { sub6, mmwave_los, mmwave_nlos };
enum class AngleRedraw { per_slot, per_trial };

inline std::string_view to_string(Regime r) {
    switch (r) {
        case Regime::sub6: return "sub6";
        case Regime::mmwave_los: return "mmwave_los";
        case Regime::mmwave_nlos: return "mmwave_nlos";
    }
    return "sub6";
}

inline Regime regime_from_string(std::string_view s) {
    if (s == "sub6") return Regime::sub6;
    if (s == "mmwave_los") return Regime::mmwave_los;
    if (s == "mmwave_nlos") return Regime::mmwave_nlos;
    throw std::invalid_argument("unknown regime '" + std::string(s) + "' (expected sub6, mmwave_los or mmwave_nlos)");
}

struct SimulationPoint {
    Regime regime = Regime::sub6;
    SchedulerKind scheduler_x = SchedulerKind::round_robin;
    SchedulerKind scheduler_y = SchedulerKind::round_robin;
    std::size_t n = 64;
    double tx_snr = 1e13;
    std::size_t l1 = 1;
    std::size_t l2 = 1;
    std::size_t slots = 5000;
    double tau = 1000.0;
    AngleRedraw angles = AngleRedraw::per_slot;
    bool record_phases = false;
    bool track_oob_beamforming = false;

    void validate() const {
        if (slots == 0) throw std::invalid_argument("simulation: slots must be >= 1");
        if (!(tx_snr > 0.0) || !std::isfinite(tx_snr)) throw std::invalid_argument("simulation: tx_snr must be positive");
        if (regime != Regime::sub6) {
            if (l1 == 0 || l2 == 0) throw std::invalid_argument("simulation: path counts must be >= 1");
            if (n % 2 != 0) throw std::invalid_argument("simulation: mmWave needs an even N");
        }
        if (!(tau >= 1.0)) throw std::invalid_argument("simulation: tau must be >= 1");
    }
};

struct TrialLayout {
    channel::OperatorLosses x;
    channel::OperatorLosses y;
};

struct SlotOutcome {
    std::size_t slot = 0;
    std::size_t k = 0;
    std::size_t q = 0;
    std::optional<irs::IrsPhaseConfig> irs;
    double inband_gain = 0.0;
    double inband_gain_direct = 0.0;
    double inband_se = 0.0;
    double oob_gain = 0.0;
    double oob_gain_direct = 0.0;
    double oob_se = 0.0;
    // Mean over all OOB UEs of the SE each would get from its own IRS
    // beamforming configuration; NaN unless tracking was requested.
    double oob_beamforming_se = std::numeric_limits<double>::quiet_NaN();
};

namespace detail {

inline double se(double gain, double snr) { return std::log2(1.0 + gain * snr); }

inline void check_gain(double g) {
    if (!std::isfinite(g)) throw std::runtime_error("simulation: non-finite channel gain");
}

// Picks the served user from per-user gains for channel-aware schedulers.
inline std::size_t channel_aware_pick(SchedulerState& st, std::span<const double> gains, double snr) {
    if (st.kind == SchedulerKind::max_rate) return mr_select(gains, snr);
    std::vector<double> rates(gains.size());
    for (std::size_t i = 0; i < gains.size(); ++i) rates[i] = se(gains[i], snr);
    const std::size_t pick = pf_select(st, rates);
    pf_update(st, pick, rates);
    return pick;
}

inline channel::OperatorLosses subset(const channel::OperatorLosses& all, std::span<const std::size_t> idx) {
    channel::OperatorLosses out{all.beta_f, {}};
    for (auto i : idx) out.ues.push_back(all.ues.at(i));
    return out;
}

inline std::vector<std::size_t> iota(std::size_t n) {
    std::vector<std::size_t> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = i;
    return v;
}

inline double sub6_beamforming_gain(cplx h_d, std::span<const cplx> f, std::span<const cplx> g) {
    double s = std::abs(h_d);
    for (std::size_t n = 0; n < f.size(); ++n) s += std::abs(f[n] * g[n]);
    return s * s;
}

struct InbandChoice {
    irs::IrsPhaseConfig theta;
    double gain = 0.0;
};

inline InbandChoice mmwave_inband(Regime regime, cplx h_d, std::span<const channel::CascadedPath> paths,
                                  std::size_t nominal, const irs::GridProjector* grid) {
    if (grid == nullptr) return {{}, std::norm(h_d)};
    if (regime == Regime::mmwave_los) {
        // The in-band link is its dominant single path with full array gain.
        const channel::CascadedPath dominant[] = {paths.front()};
        auto th = irs::optimize_mmwave_los(h_d, dominant[0].gain, dominant[0].omega, grid->size());
        const double g = irs::effective_channel(h_d, dominant, 1, th, *grid).gain;
        return {std::move(th), g};
    }
    auto th = irs::optimize_mmwave_nlos(h_d, paths, *grid);
    const double g = irs::effective_channel(h_d, paths, nominal, th, *grid).gain;
    return {std::move(th), g};
}

template <class URBG>
std::vector<SlotOutcome> run_sub6(const SimulationPoint& p, const TrialLayout& lay, URBG& rng) {
    const std::size_t K = lay.x.ues.size();
    const std::size_t Q = lay.y.ues.size();
    SchedulerState sx(p.scheduler_x, K, p.tau);
    SchedulerState sy(p.scheduler_y, Q, p.tau);
    const bool all_x = sx.needs_all_rates();
    const bool all_y = sy.needs_all_rates() || p.track_oob_beamforming;
    const auto every_x = iota(K);
    const auto every_y = iota(Q);
    std::vector<SlotOutcome> trace;
    trace.reserve(p.slots);
    for (std::size_t t = 0; t < p.slots; ++t) {
        SlotOutcome o;
        o.slot = t;
        std::size_t rr_k = all_x ? 0 : rr_select(sx);
        std::size_t rr_q = sy.kind == SchedulerKind::round_robin ? rr_select(sy) : 0;
        const std::vector<std::size_t> idx_x = all_x ? every_x : std::vector<std::size_t>{rr_k};
        const std::vector<std::size_t> idx_y = all_y ? every_y : std::vector<std::size_t>{rr_q};
        const auto ch = channel::sample_sub6(rng, p.n, {subset(lay.x, idx_x), subset(lay.y, idx_y)});

        std::size_t ik = 0;
        if (all_x) {
            std::vector<double> bf(K);
            for (std::size_t i = 0; i < K; ++i) bf[i] = sub6_beamforming_gain(ch.h_d_x[i], ch.f_x, ch.g_x[i]);
            ik = channel_aware_pick(sx, bf, p.tx_snr);
        }
        o.k = idx_x[ik];

        irs::IrsPhaseConfig theta;
        if (p.n > 0) theta = irs::optimize_sub6(ch.h_d_x[ik], ch.f_x, ch.g_x[ik]);
        o.inband_gain = irs::effective_channel(ch.h_d_x[ik], ch.f_x, ch.g_x[ik], theta).gain;
        o.inband_gain_direct = std::norm(ch.h_d_x[ik]);

        std::vector<double> gy(idx_y.size());
        for (std::size_t i = 0; i < idx_y.size(); ++i) {
            gy[i] = irs::effective_channel(ch.h_d_y[i], ch.f_y, ch.g_y[i], theta).gain;
            check_gain(gy[i]);
        }
        std::size_t iq = 0;
        if (sy.kind == SchedulerKind::round_robin) {
            iq = all_y ? rr_q : 0;
        } else {
            iq = channel_aware_pick(sy, gy, p.tx_snr);
        }
        o.q = idx_y[iq];
        o.oob_gain = gy[iq];
        o.oob_gain_direct = std::norm(ch.h_d_y[iq]);
        if (p.track_oob_beamforming) {
            double s = 0.0;
            for (std::size_t i = 0; i < Q; ++i) s += se(sub6_beamforming_gain(ch.h_d_y[i], ch.f_y, ch.g_y[i]), p.tx_snr);
            o.oob_beamforming_se = s / static_cast<double>(Q);
        }
        check_gain(o.inband_gain);
        o.inband_se = se(o.inband_gain, p.tx_snr);
        o.oob_se = se(o.oob_gain, p.tx_snr);
        if (p.record_phases) o.irs = std::move(theta);
        trace.push_back(std::move(o));
    }
    return trace;
}

template <class URBG>
std::vector<SlotOutcome> run_mmwave(const SimulationPoint& p, const TrialLayout& lay, URBG& rng) {
    const std::size_t K = lay.x.ues.size();
    const std::size_t Q = lay.y.ues.size();
    const std::size_t n = p.n;
    SchedulerState sx(p.scheduler_x, K, p.tau);
    SchedulerState sy(p.scheduler_y, Q, p.tau);
    const bool all_x = sx.needs_all_rates() || p.angles == AngleRedraw::per_trial;
    const bool all_y = sy.needs_all_rates() || p.angles == AngleRedraw::per_trial;
    const auto every_x = iota(K);
    const auto every_y = iota(Q);
    const std::size_t nominal = p.l1 * p.l2;

    std::optional<math::ResolvableAngleBook> book;
    std::optional<irs::GridProjector> grid;
    if (n > 0) {
        book.emplace(n);
        grid.emplace(n);
    }
    const irs::GridProjector* gp = grid ? &*grid : nullptr;
    // Without an IRS only the direct paths exist.
    auto draw = [&](const channel::OperatorLosses& ol) {
        if (n == 0) {
            channel::MmWaveChannelRealization r;
            for (const auto& u : ol.ues) r.h_d.push_back(channel::complex_gaussian(rng, u.beta_d));
            r.cascaded.resize(ol.ues.size());
            return r;
        }
        return channel::sample_mmwave(rng, n, p.l1, p.l2, ol, *book);
    };
    channel::MmWaveChannelRealization rx;
    channel::MmWaveChannelRealization ry;
    if (p.angles == AngleRedraw::per_trial) {
        rx = draw(lay.x);
        ry = draw(lay.y);
    }

    std::vector<SlotOutcome> trace;
    trace.reserve(p.slots);
    for (std::size_t t = 0; t < p.slots; ++t) {
        SlotOutcome o;
        o.slot = t;
        const std::size_t rr_k = sx.kind == SchedulerKind::round_robin ? rr_select(sx) : 0;
        const std::size_t rr_q = sy.kind == SchedulerKind::round_robin ? rr_select(sy) : 0;
        const std::vector<std::size_t> idx_x = all_x ? every_x : std::vector<std::size_t>{rr_k};
        const std::vector<std::size_t> idx_y = all_y ? every_y : std::vector<std::size_t>{rr_q};
        if (p.angles == AngleRedraw::per_slot) {
            rx = draw(subset(lay.x, idx_x));
            ry = draw(subset(lay.y, idx_y));
        } else if (n > 0) {
            channel::redraw_gains(rng, rx, lay.x, *book);
            channel::redraw_gains(rng, ry, lay.y, *book);
        } else {
            for (std::size_t i = 0; i < K; ++i) rx.h_d[i] = channel::complex_gaussian(rng, lay.x.ues[i].beta_d);
            for (std::size_t i = 0; i < Q; ++i) ry.h_d[i] = channel::complex_gaussian(rng, lay.y.ues[i].beta_d);
        }

        std::size_t ik = 0;
        InbandChoice chosen;
        if (sx.kind == SchedulerKind::round_robin) {
            ik = all_x ? rr_k : 0;
            chosen = mmwave_inband(p.regime, rx.h_d[ik], rx.cascaded[ik], nominal, gp);
        } else {
            std::vector<InbandChoice> options;
            std::vector<double> gains;
            for (std::size_t i = 0; i < K; ++i) {
                options.push_back(mmwave_inband(p.regime, rx.h_d[i], rx.cascaded[i], nominal, gp));
                gains.push_back(options.back().gain);
            }
            ik = channel_aware_pick(sx, gains, p.tx_snr);
            chosen = std::move(options[ik]);
        }
        o.k = idx_x[ik];
        o.inband_gain = chosen.gain;
        o.inband_gain_direct = std::norm(rx.h_d[ik]);
        check_gain(o.inband_gain);

        std::vector<double> gy(idx_y.size());
        for (std::size_t i = 0; i < idx_y.size(); ++i) {
            gy[i] = gp ? irs::effective_channel(ry.h_d[i], ry.cascaded[i], nominal, chosen.theta, *gp).gain
                       : std::norm(ry.h_d[i]);
            check_gain(gy[i]);
        }
        std::size_t iq = 0;
        if (sy.kind == SchedulerKind::round_robin) {
            iq = all_y ? rr_q : 0;
        } else {
            iq = channel_aware_pick(sy, gy, p.tx_snr);
        }
        o.q = idx_y[iq];
        o.oob_gain = gy[iq];
        o.oob_gain_direct = std::norm(ry.h_d[iq]);
        o.inband_se = se(o.inband_gain, p.tx_snr);
        o.oob_se = se(o.oob_gain, p.tx_snr);
        if (p.record_phases) o.irs = std::move(chosen.theta);
        trace.push_back(std::move(o));
    }
    return trace;
}

}  // namespace detail

// One trial: slots run in order, fading is redrawn every slot, the in-band
// operator configures the IRS for its scheduled UE and the OOB operator only
// observes the result.
template <class URBG>
std::vector<SlotOutcome> run_simulation(const SimulationPoint& p, const TrialLayout& layout, URBG& rng) {
    p.validate();
    if (layout.x.ues.empty() || layout.y.ues.empty()) throw std::invalid_argument("simulation: each operator needs UEs");
    if (p.regime == Regime::sub6) return detail::run_sub6(p, layout, rng);
    return detail::run_mmwave(p, layout, rng);
}

struct TraceSummary {
    double inband_sumse = 0.0;
    double oob_sumse = 0.0;
    double oob_sumse_direct = 0.0;
};

inline TraceSummary summarize(std::span<const SlotOutcome> trace, double tx_snr) {
    TraceSummary s;
    if (trace.empty()) return s;
    for (const auto& o : trace) {
        s.inband_sumse += o.inband_se;
        s.oob_sumse += o.oob_se;
        s.oob_sumse_direct += std::log2(1.0 + o.oob_gain_direct * tx_snr);
    }
    const double n = static_cast<double>(trace.size());
    s.inband_sumse /= n;
    s.oob_sumse /= n;
    s.oob_sumse_direct /= n;
    return s;
}

inline std::size_t default_workers() {
    const unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : hc;
}

// Runs fn(i) for i in [0, count) on a pool of workers. Each index owns its
// output slot, so results do not depend on scheduling order.
template <class Fn>
void parallel_for(std::size_t count, std::size_t workers, Fn&& fn) {
    if (workers == 0) workers = default_workers();
    workers = std::min(workers, count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < count; i = next++) {
                    try {
                        fn(i);
                    } catch (...) {
                        std::lock_guard lock(error_mutex);
                        if (!error) error = std::current_exception();
                    }
                }
            });
        }
    }
    if (error) std::rethrow_exception(error);
}

struct PfGapPoint {
    std::size_t q = 0;
    double pf_sumse = 0.0;
    double beamforming_se = 0.0;
    double gap = 0.0;
    double std_error = 0.0;
};

struct PfProbeConfig {
    std::size_t n = 4;
    double tau = 1000.0;
    std::size_t slots = 5000;
    std::size_t trials = 1;
    double tx_snr = 1e13;
    std::uint64_t seed = 1;
    std::size_t workers = 0;
    // Layout for a given OOB user count and trial index.
    std::function<TrialLayout(std::size_t q, std::size_t trial)> layout;
};

// Sub-6 gap between the OOB operator's PF throughput and the mean SE its
// users would reach with their own IRS beamforming configuration.
inline std::vector<PfGapPoint> pf_convergence_probe(std::span<const std::size_t> qs, const PfProbeConfig& cfg) {
    if (!cfg.layout) throw std::invalid_argument("pf_convergence_probe: layout generator required");
    if (cfg.trials == 0) throw std::invalid_argument("pf_convergence_probe: trials must be >= 1");
    std::vector<PfGapPoint> out;
    for (std::size_t qi = 0; qi < qs.size(); ++qi) {
        const std::size_t q = qs[qi];
        SimulationPoint p;
        p.regime = Regime::sub6;
        p.scheduler_y = SchedulerKind::proportional_fair;
        p.n = cfg.n;
        p.tau = cfg.tau;
        p.slots = cfg.slots;
        p.tx_snr = cfg.tx_snr;
        p.track_oob_beamforming = true;
        std::vector<double> pf(cfg.trials);
        std::vector<double> bf(cfg.trials);
        parallel_for(cfg.trials, cfg.workers, [&](std::size_t t) {
            const TrialLayout lay = cfg.layout(q, t);
            auto rng = make_stream(cfg.seed, {0x9f, q, t});
            const auto trace = run_simulation(p, lay, rng);
            double a = 0.0;
            double b = 0.0;
            for (const auto& o : trace) {
                a += o.oob_se;
                b += o.oob_beamforming_se;
            }
            pf[t] = a / static_cast<double>(trace.size());
            bf[t] = b / static_cast<double>(trace.size());
        });
        std::vector<double> gaps(cfg.trials);
        for (std::size_t t = 0; t < cfg.trials; ++t) gaps[t] = bf[t] - pf[t];
        const auto g = mean_stderr(gaps);
        PfGapPoint pt;
        pt.q = q;
        pt.pf_sumse = mean_stderr(pf).mean;
        pt.beamforming_se = mean_stderr(bf).mean;
        pt.gap = g.mean;
        pt.std_error = g.std_error;
        out.push_back(pt);
    }
    return out;
}

}  // namespace irsoob::sim

#endif
