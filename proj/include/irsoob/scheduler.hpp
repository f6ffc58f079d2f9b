#ifndef IRSOOB_SCHEDULER_HPP
#define IRSOOB_SCHEDULER_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace irsoob::sim {

enum class SchedulerKind { round_robin, proportional_fair, max_rate };

inline std::string_view to_string(SchedulerKind k) {
    switch (k) {
        case SchedulerKind::round_robin: return "rr";
        case SchedulerKind::proportional_fair: return "pf";
        case SchedulerKind::max_rate: return "mr";
    }
    return "rr";
}

inline SchedulerKind scheduler_from_string(std::string_view s) {
    if (s == "rr") return SchedulerKind::round_robin;
    if (s == "pf") return SchedulerKind::proportional_fair;
    if (s == "mr") return SchedulerKind::max_rate;
    throw std::invalid_argument("unknown scheduler '" + std::string(s) + "' (expected rr, pf or mr)");
}

struct SchedulerState {
    SchedulerKind kind = SchedulerKind::round_robin;
    double tau = 1000.0;
    std::vector<double> running_averages;
    std::size_t rr_next = 0;
    std::size_t count = 0;
    bool warm = false;

    SchedulerState(SchedulerKind k, std::size_t users, double horizon = 1000.0)
        : kind(k), tau(horizon), running_averages(users, 0.0), count(users) {
        if (users == 0) throw std::invalid_argument("SchedulerState: need at least one user");
        if (!(horizon >= 1.0)) throw std::invalid_argument("SchedulerState: tau must be >= 1");
    }

    // Schedulers whose choice depends on the current channel state.
    bool needs_all_rates() const noexcept { return kind != SchedulerKind::round_robin; }
};

inline std::size_t mr_select(std::span<const double> gains, double tx_snr) {
    if (gains.empty()) throw std::invalid_argument("mr_select: no users");
    std::size_t best = 0;
    double best_se = std::log2(1.0 + gains[0] * tx_snr);
    for (std::size_t i = 1; i < gains.size(); ++i) {
        const double se = std::log2(1.0 + gains[i] * tx_snr);
        if (se > best_se) {
            best_se = se;
            best = i;
        }
    }
    return best;
}

inline std::size_t pf_select(const SchedulerState& st, std::span<const double> rates) {
    if (rates.size() != st.count) throw std::invalid_argument("pf_select: rate vector size mismatch");
    std::size_t best = 0;
    double best_m = -1.0;
    for (std::size_t i = 0; i < rates.size(); ++i) {
        const double t = st.warm ? st.running_averages[i] : rates[i];
        const double m = t > 0.0 ? rates[i] / t : (rates[i] > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
        if (m > best_m) {
            best_m = m;
            best = i;
        }
    }
    return best;
}

// T_q <- (1 - 1/tau) T_q + R_q/tau for the served UE, (1 - 1/tau) T_q for
// the rest. The first call seeds every average with its first-slot rate.
inline SchedulerState& pf_update(SchedulerState& st, std::size_t q_star, std::span<const double> rates) {
    if (rates.size() != st.count || q_star >= st.count) throw std::invalid_argument("pf_update: index or size mismatch");
    if (!st.warm) {
        std::copy(rates.begin(), rates.end(), st.running_averages.begin());
        st.warm = true;
    }
    const double keep = 1.0 - 1.0 / st.tau;
    for (std::size_t i = 0; i < st.count; ++i) {
        st.running_averages[i] = keep * st.running_averages[i] + (i == q_star ? rates[i] / st.tau : 0.0);
    }
    return st;
}

inline std::size_t rr_select(SchedulerState& st) {
    const std::size_t q = st.rr_next;
    st.rr_next = (st.rr_next + 1) % st.count;
    return q;
}

}  // namespace irsoob::sim

#endif
