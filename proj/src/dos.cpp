#include "dosreg/dos.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>

#include "dosreg/errors.hpp"

namespace dosreg {

void DoSParams::validate() const {
    if (!(eta >= 1.0)) throw Error(ErrorKind::Validation, "DoS eta must be at least 1");
    if (!(tau_D > 0.0)) throw Error(ErrorKind::Validation, "DoS tau_D must be positive");
    if (!(kappa > 0.0)) throw Error(ErrorKind::Validation, "DoS kappa must be positive");
    if (!(T > 1.0)) throw Error(ErrorKind::Validation, "DoS T must exceed 1");
}

DoSSchedule::DoSSchedule(std::vector<AttackInterval> intervals)
    : intervals_(std::move(intervals)) {
    for (std::size_t i = 0; i < intervals_.size(); ++i) {
        const auto& iv = intervals_[i];
        if (iv.onset < 0 || iv.duration < 1) {
            throw Error(ErrorKind::Validation,
                        "attack interval needs onset >= 0 and duration >= 1");
        }
        if (i > 0 && intervals_[i - 1].end() > iv.onset) {
            throw Error(ErrorKind::Validation,
                        "attack intervals must be increasing and non-overlapping");
        }
    }
}

bool DoSSchedule::is_denied(long k) const {
    auto it = std::upper_bound(intervals_.begin(), intervals_.end(), k,
                               [](long v, const AttackInterval& iv) { return v < iv.onset; });
    if (it == intervals_.begin()) return false;
    --it;
    return k < it->end();
}

long DoSSchedule::lambda_D(long k1, long k2) const {
    if (k1 < 0 || k1 > k2) {
        throw Error(ErrorKind::Argument, "window requires 0 <= k1 <= k2");
    }
    long count = 0;
    for (const auto& iv : intervals_) {
        const long lo = std::max(k1, iv.onset);
        const long hi = std::min(k2, iv.end() - 1);
        if (hi >= lo) count += hi - lo + 1;
    }
    return count;
}

long DoSSchedule::lambda_N(long k1, long k2) const {
    return (k2 - k1 + 1) - lambda_D(k1, k2);
}

long DoSSchedule::count_transitions(long k1, long k2) const {
    if (k1 < 0 || k1 > k2) {
        throw Error(ErrorKind::Argument, "window requires 0 <= k1 <= k2");
    }
    return std::count_if(intervals_.begin(), intervals_.end(), [&](const AttackInterval& iv) {
        return iv.onset >= k1 && iv.onset <= k2;
    });
}

DoSSchedule DoSSchedule::shifted(long offset) const {
    std::vector<AttackInterval> out = intervals_;
    for (auto& iv : out) iv.onset += offset;
    return DoSSchedule(std::move(out));
}

void DoSSchedule::write(std::ostream& os) const {
    os << "# h_m tau_m\n";
    for (const auto& iv : intervals_) os << iv.onset << ' ' << iv.duration << '\n';
}

DoSSchedule DoSSchedule::read(std::istream& is) {
    std::vector<AttackInterval> out;
    std::string line;
    long lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (auto pos = line.find('#'); pos != std::string::npos) line.erase(pos);
        std::istringstream ls(line);
        long h = 0;
        long tau = 0;
        if (!(ls >> h)) continue;
        std::string rest;
        if (!(ls >> tau) || (ls >> rest)) {
            throw Error(ErrorKind::Validation,
                        "schedule line " + std::to_string(lineno) + ": expected 'h_m tau_m'");
        }
        out.push_back({h, tau});
    }
    return DoSSchedule(std::move(out));
}

namespace {

// Prefix counts over [0, horizon]: denied[k] = #denied instants in [0, k),
// onsets[k] = #onsets in [0, k).
struct PrefixCounts {
    std::vector<long> denied;
    std::vector<long> onsets;
};

PrefixCounts prefix_counts(const std::vector<AttackInterval>& ivs, long horizon) {
    PrefixCounts pc;
    pc.denied.assign(static_cast<std::size_t>(horizon + 2), 0);
    pc.onsets.assign(static_cast<std::size_t>(horizon + 2), 0);
    std::vector<char> denied(static_cast<std::size_t>(horizon + 1), 0);
    std::vector<char> onset(static_cast<std::size_t>(horizon + 1), 0);
    for (const auto& iv : ivs) {
        if (iv.onset <= horizon) onset[static_cast<std::size_t>(iv.onset)] = 1;
        for (long k = iv.onset; k < iv.end() && k <= horizon; ++k) {
            denied[static_cast<std::size_t>(k)] = 1;
        }
    }
    for (long k = 0; k <= horizon; ++k) {
        const auto i = static_cast<std::size_t>(k);
        pc.denied[i + 1] = pc.denied[i] + denied[i];
        pc.onsets[i + 1] = pc.onsets[i] + onset[i];
    }
    return pc;
}

// max over k1 < k2 ≤ horizon of count(k1,k2) − (k2 − k1)/rate, in O(horizon).
double worst_budget_excess(const std::vector<long>& prefix, double rate, long horizon) {
    double best = -std::numeric_limits<double>::infinity();
    double min_head = std::numeric_limits<double>::infinity();
    for (long k2 = 1; k2 <= horizon; ++k2) {
        const long k1 = k2 - 1;
        min_head = std::min(min_head, static_cast<double>(prefix[static_cast<std::size_t>(k1)]) -
                                          static_cast<double>(k1) / rate);
        const double tail = static_cast<double>(prefix[static_cast<std::size_t>(k2 + 1)]) -
                            static_cast<double>(k2) / rate;
        best = std::max(best, tail - min_head);
    }
    return best;
}

}  // namespace

DoSAssumptionReport verify_assumptions(const DoSSchedule& sched, const DoSParams& params,
                                       long horizon) {
    params.validate();
    if (horizon < 1) throw Error(ErrorKind::Argument, "horizon must be >= 1");
    const PrefixCounts pc = prefix_counts(sched.intervals(), horizon);
    DoSAssumptionReport rep;
    for (long k1 = 0; k1 < horizon; ++k1) {
        for (long k2 = k1 + 1; k2 <= horizon; ++k2) {
            const auto lo = static_cast<std::size_t>(k1);
            const auto hi = static_cast<std::size_t>(k2 + 1);
            const double span = static_cast<double>(k2 - k1);
            const auto n_onsets = static_cast<double>(pc.onsets[hi] - pc.onsets[lo]);
            const auto n_denied = static_cast<double>(pc.denied[hi] - pc.denied[lo]);
            if (rep.frequency_ok && n_onsets > params.eta + span / params.tau_D) {
                rep.frequency_ok = false;
                rep.first_frequency_violation = {k1, k2};
            }
            if (rep.duration_ok && n_denied > params.kappa + span / params.T) {
                rep.duration_ok = false;
                rep.first_duration_violation = {k1, k2};
            }
        }
    }
    return rep;
}

DoSSchedule generate_schedule(const DoSParams& params, long horizon, std::uint64_t seed) {
    params.validate();
    if (horizon < 1) throw Error(ErrorKind::Argument, "horizon must be >= 1");
    // Margin keeps accepted schedules strictly inside the budgets the
    // validator checks with exact comparisons.
    constexpr double kMargin = 1e-9;
    std::mt19937_64 rng(seed);
    const long spacing = std::max(1L, static_cast<long>(std::ceil(params.tau_D)));
    std::uniform_int_distribution<long> gap_dist(0, 2 * spacing);
    std::uniform_int_distribution<long> dur_dist(1, spacing);

    std::vector<AttackInterval> accepted;
    long cursor = 0;
    while (cursor <= horizon) {
        const long onset = cursor + gap_dist(rng);
        if (onset > horizon) break;
        const long drawn = std::min(dur_dist(rng), horizon - onset + 1);
        bool placed = false;
        for (long d = drawn; d >= 1 && !placed; --d) {
            auto candidate = accepted;
            candidate.push_back({onset, d});
            const PrefixCounts pc = prefix_counts(candidate, horizon);
            const bool freq_ok =
                worst_budget_excess(pc.onsets, params.tau_D, horizon) <= params.eta - kMargin;
            const bool dur_ok =
                worst_budget_excess(pc.denied, params.T, horizon) <= params.kappa - kMargin;
            if (freq_ok && dur_ok) {
                accepted = std::move(candidate);
                cursor = onset + d + 1;
                placed = true;
            }
        }
        if (!placed) cursor = onset + 1;
    }
    return DoSSchedule(std::move(accepted));
}

}  // namespace dosreg
