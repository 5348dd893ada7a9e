#pragma once

#include "parcap/capacity.hpp"
#include "parcap/setcover.hpp"

namespace parcap {

// ---------------------------------------------------------------------------
// Parabolic Hausdorff content over the dyadic rectangle family, the Frostman
// mass distribution, and the Wolff-type dyadic potential.
// ---------------------------------------------------------------------------

struct Cover {
    std::vector<DyadicRect> rects;
    double s = 0;
    double delta = 0;
    double cost = 0;  // sum of d_p(R)^s

    /// Every cell center of E inside some rect, all diameters < delta.
    bool feasible_for(const PointSet& E, const DyadicHierarchy& hier) const;
};

/// Deepest generation used by covers/leaves: the first whose rectangles fit
/// inside a single lattice cell (capped at 48).
int leaf_generation(const DyadicHierarchy& hier, const GridSpec& grid);

/// Greedy descent cover: starting at the root, keep a rectangle when its cost
/// beats the recursive cost of its intersecting children. Upper bound for the
/// delta-content restricted to dyadic covers.
Cover content_upper(const PointSet& E, double s, double delta, const DyadicHierarchy& hier,
                    int max_gen = -1);

/// Exact minimum-cost dyadic sub-cover by branch and bound with the LP
/// relaxation bound. Pool must stay within 2000 rectangles.
struct ExactContent {
    Cover cover;
    double lp_bound = 0;      // LP relaxation value (<= exact)
    double greedy_cost = 0;   // descent-cover cost (>= exact)
    long nodes = 0;
};
ExactContent content_exact_small(const PointSet& E, double s, double delta,
                                 const DyadicHierarchy& hier, int max_gen = -1);

/// Bottom-up Frostman construction: leaf masses d_p(leaf)^s on leaves meeting
/// E, then each generation caps mu(R) at d_p(R)^s by scaling R's subtree.
/// All slacks are nonnegative by construction and recorded as a certificate.
struct FrostmanMeasure {
    double s = 0;
    double total_mass = 0;
    int leaf_gen = 0;
    std::vector<std::pair<DyadicRect, double>> leaf_masses;
    struct GenSlack {
        int gen;
        double min_slack;  // min over rects of d_p(R)^s - mu(R)
        long rect_count;
    };
    std::vector<GenSlack> certificate;
    bool certificate_ok = true;  // every slack >= 0 (exact)
};
FrostmanMeasure frostman_measure(const PointSet& E, double s, const DyadicHierarchy& hier,
                                 int max_gen = -1);

/// Leaf masses spread uniformly over the E-cells inside each leaf.
DiscreteMeasure frostman_cell_measure(const FrostmanMeasure& fm, const PointSet& E,
                                      const DyadicHierarchy& hier);

/// LP packing value: max total leaf mass subject to mu(R) <= d_p(R)^s for all
/// rectangles of the hierarchy above the leaves (the dual of fractional cover).
double frostman_lp_value(const PointSet& E, double s, const DyadicHierarchy& hier,
                         int max_gen = -1);

/// Dyadic quadrature of the Wolff-type potential
/// [ sum_j ( mu(Q^-_{rho_j}(z)) / rho_j^n )^beta ln 2 ]^(1/beta),
/// rho_j = r 2^-j down to the lattice leaf scale, beta = p/(n(p-2)+p).
double wolff_potential(const DiscreteMeasure& mu, const SpaceTimePoint& z, double r, double p,
                       int n);

/// Lattice Lebesgue-measure vs capacity ratio |E| / cap^((n+p)/n).
struct LebesgueCheck {
    double volume = 0;
    double cap = 0;
    double ratio = 0;        // 0/0 reported as vacuous pass
    bool vacuous = false;
    bool flagged_violation = false;  // cap ~ 0 with |E| > 0
};
LebesgueCheck lebesgue_capacity_check(const PointSet& E, const SolverParams& params,
                                      double mass_tol = 1e-10);

}  // namespace parcap
