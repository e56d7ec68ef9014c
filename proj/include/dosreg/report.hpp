#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "dosreg/learner.hpp"
#include "dosreg/matrix_kit.hpp"
#include "dosreg/optimal_control.hpp"
#include "dosreg/trace.hpp"

namespace dosreg {

// Shortest round-trippable text for a double ("%.17g"; inf/nan spelled out).
std::string format_number(double v);
std::string format_numbers(const Eigen::Ref<const Mat>& values);

using KeyValues = std::vector<std::pair<std::string, std::string>>;

void write_key_values(std::ostream& os, const KeyValues& kv);
KeyValues read_key_values(std::istream& is);

// ω1, ω2, α1, α2, T*, envelope coefficient (plus its log, since it overflows).
KeyValues bound_report(const ResilienceBound& bound, double T);

// Columns: j, ‖K_j − K_ref‖, ‖P_j − P_ref‖, residual.
void write_history_csv(std::ostream& os, const LearningResult& result, const RowVec& K_ref,
                       const Mat& P_ref);

// Header k,x1..xn,z1..zq,w1..wq,u,e,y_d,attacked,V,env_exact,env_relaxed.
void write_trace_csv(std::ostream& os, const SimTrace& trace);

}  // namespace dosreg
