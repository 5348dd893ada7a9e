#include "parcap/setcover.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace parcap {

namespace {

constexpr double kEps = 1e-9;

// Tableau simplex with Bland's rule. Columns: structural + slack/surplus
// (+ artificials in phase 1). `basis[r]` is the column basic in row r.
struct Tableau {
    long m = 0, cols = 0;
    std::vector<std::vector<double>> T;  // m rows, cols+1 (rhs last)
    std::vector<long> basis;

    bool pivot_until_optimal(const std::vector<double>& cost) {
        for (long guard = 0; guard < 200000; ++guard) {
            // reduced costs: d_j = c_j - c_B . B^-1 A_j (computed row-wise)
            long enter = -1;
            for (long j = 0; j < cols; ++j) {
                double d = cost[j];
                for (long r = 0; r < m; ++r) d -= cost[basis[r]] * T[r][j];
                if (d < -kEps) {
                    enter = j;
                    break;  // Bland: smallest index
                }
            }
            if (enter < 0) return true;
            long leave = -1;
            double best = std::numeric_limits<double>::infinity();
            for (long r = 0; r < m; ++r) {
                if (T[r][enter] > kEps) {
                    const double ratio = T[r][cols] / T[r][enter];
                    if (ratio < best - kEps ||
                        (ratio < best + kEps && (leave < 0 || basis[r] < basis[leave]))) {
                        best = ratio;
                        leave = r;
                    }
                }
            }
            if (leave < 0) return false;  // unbounded
            const double pv = T[leave][enter];
            for (long j = 0; j <= cols; ++j) T[leave][j] /= pv;
            for (long r = 0; r < m; ++r) {
                if (r == leave) continue;
                const double f = T[r][enter];
                if (f == 0) continue;
                for (long j = 0; j <= cols; ++j) T[r][j] -= f * T[leave][j];
            }
            basis[leave] = enter;
        }
        return false;
    }

    double objective(const std::vector<double>& cost) const {
        double v = 0;
        for (long r = 0; r < m; ++r) v += cost[basis[r]] * T[r][cols];
        return v;
    }
};

}  // namespace

LpResult lp_solve_cover(const std::vector<std::vector<double>>& A, const std::vector<double>& b,
                        const std::vector<double>& c) {
    const long m = static_cast<long>(A.size());
    const long n = static_cast<long>(c.size());
    LpResult res;
    if (m == 0) {
        res.feasible = true;
        res.x.assign(n, 0.0);
        return res;
    }
    // A x - s + a = b with b >= 0
    Tableau tb;
    tb.m = m;
    tb.cols = n + m + m;
    tb.T.assign(m, std::vector<double>(tb.cols + 1, 0.0));
    tb.basis.resize(m);
    for (long r = 0; r < m; ++r) {
        if (b[r] < 0) throw InvalidArgument("lp_solve_cover: negative rhs unsupported");
        for (long j = 0; j < n; ++j) tb.T[r][j] = A[r][j];
        tb.T[r][n + r] = -1.0;       // surplus
        tb.T[r][n + m + r] = 1.0;    // artificial
        tb.T[r][tb.cols] = b[r];
        tb.basis[r] = n + m + r;
    }
    std::vector<double> phase1(tb.cols, 0.0);
    for (long r = 0; r < m; ++r) phase1[n + m + r] = 1.0;
    if (!tb.pivot_until_optimal(phase1)) return res;
    if (tb.objective(phase1) > 1e-7) return res;  // infeasible

    std::vector<double> phase2(tb.cols, 0.0);
    for (long j = 0; j < n; ++j) phase2[j] = c[j];
    for (long r = 0; r < m; ++r) phase2[n + m + r] = 1e9;  // keep artificials out
    if (!tb.pivot_until_optimal(phase2)) {
        res.bounded = false;
        return res;
    }
    res.feasible = true;
    res.x.assign(n, 0.0);
    for (long r = 0; r < m; ++r)
        if (tb.basis[r] < n) res.x[tb.basis[r]] = tb.T[r][tb.cols];
    res.value = 0;
    for (long j = 0; j < n; ++j) res.value += c[j] * res.x[j];
    return res;
}

LpResult lp_solve_pack(const std::vector<std::vector<double>>& A, const std::vector<double>& b,
                       const std::vector<double>& c) {
    const long m = static_cast<long>(A.size());
    const long n = static_cast<long>(c.size());
    LpResult res;
    if (n == 0) {
        res.feasible = true;
        return res;
    }
    // max c.x s.t. A x + s = b -> min (-c).x, slack basis feasible
    Tableau tb;
    tb.m = m;
    tb.cols = n + m;
    tb.T.assign(std::max<long>(m, 0), std::vector<double>(tb.cols + 1, 0.0));
    tb.basis.resize(m);
    for (long r = 0; r < m; ++r) {
        if (b[r] < -kEps) throw InvalidArgument("lp_solve_pack: negative rhs");
        for (long j = 0; j < n; ++j) tb.T[r][j] = A[r][j];
        tb.T[r][n + r] = 1.0;
        tb.T[r][tb.cols] = std::max(0.0, b[r]);
        tb.basis[r] = n + r;
    }
    std::vector<double> cost(tb.cols, 0.0);
    for (long j = 0; j < n; ++j) cost[j] = -c[j];
    if (!tb.pivot_until_optimal(cost)) {
        res.bounded = false;
        return res;
    }
    res.feasible = true;
    res.x.assign(n, 0.0);
    for (long r = 0; r < m; ++r)
        if (tb.basis[r] < n) res.x[tb.basis[r]] = tb.T[r][tb.cols];
    res.value = 0;
    for (long j = 0; j < n; ++j) res.value += c[j] * res.x[j];
    return res;
}

namespace {

double greedy_cover(const SetCoverInstance& inst, std::vector<int>& chosen) {
    std::vector<char> covered(inst.n_elements, 0);
    long remaining = inst.n_elements;
    double cost = 0;
    chosen.clear();
    while (remaining > 0) {
        int best = -1;
        double best_ratio = std::numeric_limits<double>::infinity();
        for (size_t s = 0; s < inst.sets.size(); ++s) {
            long nw = 0;
            for (int e : inst.sets[s])
                if (!covered[e]) ++nw;
            if (nw == 0) continue;
            const double ratio = inst.weights[s] / nw;
            if (ratio < best_ratio - 1e-15) {
                best_ratio = ratio;
                best = static_cast<int>(s);
            }
        }
        if (best < 0) return std::numeric_limits<double>::infinity();  // infeasible
        chosen.push_back(best);
        cost += inst.weights[best];
        for (int e : inst.sets[best])
            if (!covered[e]) {
                covered[e] = 1;
                --remaining;
            }
    }
    return cost;
}

struct BnB {
    const SetCoverInstance& inst;
    double incumbent;
    std::vector<int> best_choice;
    long nodes = 0;

    explicit BnB(const SetCoverInstance& i) : inst(i), incumbent(std::numeric_limits<double>::infinity()) {}

    LpResult lp_relax(const std::vector<int>& state) const {
        // state: 0 free, 1 in, -1 out
        std::vector<char> covered(inst.n_elements, 0);
        for (size_t s = 0; s < inst.sets.size(); ++s)
            if (state[s] == 1)
                for (int e : inst.sets[s]) covered[e] = 1;
        std::vector<int> elem_row(inst.n_elements, -1);
        long m = 0;
        for (int e = 0; e < inst.n_elements; ++e)
            if (!covered[e]) elem_row[e] = static_cast<int>(m++);
        std::vector<int> col_set;
        for (size_t s = 0; s < inst.sets.size(); ++s)
            if (state[s] == 0) col_set.push_back(static_cast<int>(s));
        std::vector<std::vector<double>> A(m, std::vector<double>(col_set.size(), 0.0));
        std::vector<double> b(m, 1.0), c(col_set.size());
        for (size_t j = 0; j < col_set.size(); ++j) {
            c[j] = inst.weights[col_set[j]];
            for (int e : inst.sets[col_set[j]])
                if (elem_row[e] >= 0) A[elem_row[e]][j] = 1.0;
        }
        LpResult lp = lp_solve_cover(A, b, c);
        if (lp.feasible) {
            // expand back to full index space
            std::vector<double> full(inst.sets.size(), 0.0);
            for (size_t j = 0; j < col_set.size(); ++j) full[col_set[j]] = lp.x[j];
            lp.x = std::move(full);
        }
        return lp;
    }

    void search(std::vector<int>& state, double fixed_cost) {
        ++nodes;
        if (nodes > 200000) throw Error("set cover branch and bound exceeded node budget");
        LpResult lp = lp_relax(state);
        if (!lp.feasible) return;
        const double bound = fixed_cost + lp.value;
        if (bound >= incumbent - 1e-12) return;
        // branch on the most fractional set (closest to 1/2, lowest index ties)
        int frac = -1;
        double best_dist_half = 1.0;
        for (size_t s = 0; s < inst.sets.size(); ++s) {
            if (state[s] != 0) continue;
            const double v = lp.x[s];
            if (std::abs(v - std::round(v)) <= 1e-7) continue;
            const double dist_half = std::abs(v - 0.5);
            if (dist_half < best_dist_half - 1e-15) {
                best_dist_half = dist_half;
                frac = static_cast<int>(s);
            }
        }
        if (frac < 0) {
            // integral LP solution: round and accept
            double cost = fixed_cost;
            std::vector<int> choice;
            for (size_t s = 0; s < inst.sets.size(); ++s) {
                if (state[s] == 1) choice.push_back(static_cast<int>(s));
                if (state[s] == 0 && lp.x[s] > 0.5) {
                    choice.push_back(static_cast<int>(s));
                    cost += inst.weights[s];
                }
            }
            if (cost < incumbent) {
                incumbent = cost;
                best_choice = choice;
            }
            return;
        }
        state[frac] = 1;
        search(state, fixed_cost + inst.weights[frac]);
        state[frac] = -1;
        search(state, fixed_cost);
        state[frac] = 0;
    }
};

}  // namespace

SetCoverResult solve_set_cover(const SetCoverInstance& inst, size_t max_pool) {
    if (inst.sets.size() > max_pool)
        throw InvalidArgument("set cover pool too large: use greedy");
    SetCoverResult out;
    std::vector<int> greedy_choice;
    out.greedy_cost = greedy_cover(inst, greedy_choice);
    if (!std::isfinite(out.greedy_cost)) return out;  // infeasible

    BnB bnb(inst);
    bnb.incumbent = out.greedy_cost + 1e-12;
    bnb.best_choice = greedy_choice;
    std::vector<int> state(inst.sets.size(), 0);
    LpResult root = bnb.lp_relax(state);
    out.lp_bound = root.feasible ? root.value : 0.0;
    bnb.search(state, 0.0);
    out.feasible = true;
    out.cost = std::min(bnb.incumbent, out.greedy_cost);
    out.chosen = bnb.best_choice;
    out.nodes_explored = bnb.nodes;
    std::sort(out.chosen.begin(), out.chosen.end());
    return out;
}

}  // namespace parcap
