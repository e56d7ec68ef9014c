#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace dosreg {

// Budget parameters of the attacker.
//   frequency: n(k1,k2)      ≤ eta   + (k2 − k1)/tau_D
//   duration:  |Λ_D(k1,k2)| ≤ kappa + (k2 − k1)/T
struct DoSParams {
    double eta = 1.0;
    double tau_D = 15.0;
    double kappa = 40.0;
    double T = 10.0;

    void validate() const;
    bool operator==(const DoSParams&) const = default;
};

struct AttackInterval {
    long onset = 0;     // h_m
    long duration = 1;  // τ_m; attack covers [onset, onset + duration)

    [[nodiscard]] long end() const { return onset + duration; }
    bool operator==(const AttackInterval&) const = default;
};

class DoSSchedule {
public:
    DoSSchedule() = default;
    // Throws a validation error unless intervals are ordered and disjoint.
    explicit DoSSchedule(std::vector<AttackInterval> intervals);

    [[nodiscard]] const std::vector<AttackInterval>& intervals() const { return intervals_; }
    [[nodiscard]] bool empty() const { return intervals_.empty(); }

    [[nodiscard]] bool is_denied(long k) const;
    // Counts over the closed window [k1, k2].
    [[nodiscard]] long lambda_D(long k1, long k2) const;
    [[nodiscard]] long lambda_N(long k1, long k2) const;
    // Number of onsets h_m in [k1, k2].
    [[nodiscard]] long count_transitions(long k1, long k2) const;

    // Same attacks with every onset moved by `offset` (must keep onsets >= 0).
    [[nodiscard]] DoSSchedule shifted(long offset) const;

    // Plain text: one "h_m tau_m" pair per line; '#' starts a comment.
    void write(std::ostream& os) const;
    static DoSSchedule read(std::istream& is);

    bool operator==(const DoSSchedule&) const = default;

private:
    std::vector<AttackInterval> intervals_;
};

struct DoSAssumptionReport {
    bool frequency_ok = true;
    bool duration_ok = true;
    std::optional<std::pair<long, long>> first_frequency_violation;
    std::optional<std::pair<long, long>> first_duration_violation;

    [[nodiscard]] bool all_pass() const { return frequency_ok && duration_ok; }
};

// Exhaustive check of both budgets over every pair 0 ≤ k1 < k2 ≤ horizon.
DoSAssumptionReport verify_assumptions(const DoSSchedule& sched, const DoSParams& params,
                                       long horizon);

// Seeded greedy generator: draws (gap, duration) candidates and keeps each one
// only if both budgets still hold on every window up to `horizon`.
DoSSchedule generate_schedule(const DoSParams& params, long horizon, std::uint64_t seed);

}  // namespace dosreg
