#pragma once

#include <cstdint>
#include <vector>

#include "parcap/common.hpp"

namespace parcap {

// ---------------------------------------------------------------------------
// Dense two-phase primal simplex for the small covering/packing LPs used by
// the Hausdorff-content oracles. Bland's rule, deterministic.
// ---------------------------------------------------------------------------

struct LpResult {
    bool feasible = false;
    bool bounded = true;
    double value = 0;
    std::vector<double> x;
};

/// min c.x  s.t.  A x >= b, x >= 0   (row-major A, m x n)
LpResult lp_solve_cover(const std::vector<std::vector<double>>& A, const std::vector<double>& b,
                        const std::vector<double>& c);

/// max c.x  s.t.  A x <= b, x >= 0   (b >= 0 so the slack basis is feasible)
LpResult lp_solve_pack(const std::vector<std::vector<double>>& A, const std::vector<double>& b,
                       const std::vector<double>& c);

// ---------------------------------------------------------------------------
// Weighted set cover, exact by branch and bound with the LP relaxation bound.
// ---------------------------------------------------------------------------

struct SetCoverInstance {
    int n_elements = 0;
    std::vector<std::vector<int>> sets;  // element ids per set
    std::vector<double> weights;
};

struct SetCoverResult {
    bool feasible = false;
    double cost = 0;
    std::vector<int> chosen;       // set indices
    double lp_bound = 0;           // LP relaxation at the root
    double greedy_cost = 0;        // cost/coverage greedy incumbent
    long nodes_explored = 0;
};

/// Exact minimum-weight cover. Throws InvalidArgument when the pool exceeds
/// `max_pool` ("use greedy").
SetCoverResult solve_set_cover(const SetCoverInstance& inst, size_t max_pool = 2000);

}  // namespace parcap
