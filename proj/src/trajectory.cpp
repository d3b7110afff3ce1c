#include "snapff/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <utility>

namespace snapff {

namespace {

// Smallest t >= 0 with f(t) = target, for f increasing and continuous.
double solve_increasing(const std::function<double(double)>& f, double target) {
    if (f(0.0) >= target) return 0.0;
    double hi = 1.0;
    int guard = 0;
    while (f(hi) < target) {
        hi *= 2.0;
        if (++guard > 200) throw std::runtime_error("plan_fourth_order: root bracket failed");
    }
    double lo = 0.0;
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        if (f(mid) < target)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

// Continuous-time minimal stage durations for the symmetric fourth-order
// profile: t_d snap phase, t_j constant-jerk phase, t_a constant-acceleration
// phase, t_v constant-velocity phase.
struct stage_times {
    double td, tj, ta, tv;
};

stage_times continuous_recipe(double x, double v, double a, double j, double d) {
    double td = std::min(std::min(std::pow(x / (8.0 * d), 0.25), std::cbrt(v / (2.0 * d))),
                         std::min(std::sqrt(a / d), j / d));
    auto x_of_tj = [&](double tj) {
        return 2.0 * d * td * (td + tj) * (2.0 * td + tj) * (2.0 * td + tj);
    };
    auto v_of_tj = [&](double tj) { return d * td * (td + tj) * (2.0 * td + tj); };
    double tj = std::min(std::min(solve_increasing(x_of_tj, x), solve_increasing(v_of_tj, v)),
                         std::max(0.0, a / (d * td) - td));
    auto x_of_ta = [&](double ta) {
        return d * td * (td + tj) * (2.0 * td + tj + ta) * (4.0 * td + 2.0 * tj + ta);
    };
    double ta = std::min(solve_increasing(x_of_ta, x),
                         std::max(0.0, v / (d * td * (td + tj)) - (2.0 * td + tj)));
    double tv = std::max(0.0, x / (d * td * (td + tj) * (2.0 * td + tj + ta)) -
                                  (4.0 * td + 2.0 * tj + ta));
    return {td, tj, ta, tv};
}

double k_of(std::int64_t nd, std::int64_t nj, std::int64_t na, std::int64_t nv) {
    return static_cast<double>(nd) * static_cast<double>(nd + nj) *
           static_cast<double>(2 * nd + nj + na) * static_cast<double>(4 * nd + 2 * nj + na + nv);
}

}  // namespace

trajectory plan_fourth_order(const motion_bounds& b, double ts) {
    if (!std::isfinite(ts) || !(ts > 0.0))
        throw std::invalid_argument("plan_fourth_order: ts must be positive");
    for (double v : {b.distance, b.v_max, b.a_max, b.j_max, b.d_max})
        if (!std::isfinite(v)) throw std::invalid_argument("plan_fourth_order: non-finite bound");
    if (b.distance < 0.0)
        throw std::invalid_argument("plan_fourth_order: distance must be >= 0");
    if (!(b.v_max > 0.0) || !(b.a_max > 0.0) || !(b.j_max > 0.0) || !(b.d_max > 0.0))
        throw std::invalid_argument("plan_fourth_order: bounds must be positive");

    trajectory t;
    t.ts = ts;
    if (b.distance == 0.0) {
        t.pos.assign(1, 0.0);
        t.vel.assign(1, 0.0);
        t.acc.assign(1, 0.0);
        t.jerk.assign(1, 0.0);
        t.snap.assign(1, 0.0);
        t.n_d = t.n_j = t.n_a = t.n_v = 0;
        return t;
    }

    const double x = b.distance, v = b.v_max, a = b.a_max, j = b.j_max, d = b.d_max;
    stage_times st = continuous_recipe(x, v, a, j, d);
    auto count = [&](double tt) {
        return static_cast<std::int64_t>(std::ceil(tt / ts - 1e-9));
    };
    std::int64_t nd = std::max<std::int64_t>(1, count(st.td));
    std::int64_t nj = std::max<std::int64_t>(0, count(st.tj));
    std::int64_t na = std::max<std::int64_t>(0, count(st.ta));
    std::int64_t nv = std::max<std::int64_t>(0, count(st.tv));

    // Feasibility of an integer phase-count candidate: peak snap needed to
    // cover the distance, and the implied jerk/acceleration/velocity peaks,
    // all inside the bounds (with a tiny relative slack for rounding).
    const double t2 = ts * ts, t3 = t2 * ts, t4 = t3 * ts;
    auto ok = [&](std::int64_t cd, std::int64_t cj, std::int64_t ca, std::int64_t cv) {
        if (cd < 1 || cj < 0 || ca < 0 || cv < 0) return false;
        double K = k_of(cd, cj, ca, cv);
        double dh = x / (t4 * K);
        const double slack = 1.0 + 1e-12;
        return dh <= d * slack && dh * ts * static_cast<double>(cd) <= j * slack &&
               dh * t2 * static_cast<double>(cd) * static_cast<double>(cd + cj) <= a * slack &&
               dh * t3 * static_cast<double>(cd) * static_cast<double>(cd + cj) *
                       static_cast<double>(2 * cd + cj + ca) <=
                   v * slack;
    };
    if (!ok(nd, nj, na, nv))
        throw std::runtime_error("plan_fourth_order: no feasible discrete profile");

    // Greedy refinement: shave single samples off the phases (shortest-impact
    // first) while the result stays feasible.
    bool improved = true;
    while (improved) {
        improved = false;
        if (ok(nd, nj, na, nv - 1)) { --nv; improved = true; continue; }
        if (ok(nd, nj, na - 1, nv)) { --na; improved = true; continue; }
        if (ok(nd, nj - 1, na, nv)) { --nj; improved = true; continue; }
        if (ok(nd - 1, nj, na, nv)) { --nd; improved = true; continue; }
    }

    const double K = k_of(nd, nj, na, nv);
    if (K >= 9.0e15)
        throw std::runtime_error("plan_fourth_order: profile too long for exact accumulation");
    const double dh = x / (t4 * K);

    // Snap sign staircase; 8 active snap phases of nd samples each.
    const std::pair<int, std::int64_t> seg[] = {
        {+1, nd}, {0, nj}, {-1, nd}, {0, na}, {-1, nd}, {0, nj}, {+1, nd}, {0, nv},
        {-1, nd}, {0, nj}, {+1, nd}, {0, na}, {+1, nd}, {0, nj}, {-1, nd}};
    std::size_t total = static_cast<std::size_t>(8 * nd + 4 * nj + 2 * na + nv);
    std::size_t n = total + 1;
    std::vector<double> s(n, 0.0);
    std::size_t at = 0;
    for (const auto& [sign, cnt] : seg)
        for (std::int64_t i = 0; i < cnt; ++i) s[at++] = static_cast<double>(sign);

    // Integer-valued accumulations (exact in double while < 2^53), scaled once
    // at the end. This makes the rest-to-rest tails and the peak values exact.
    std::vector<double> J(n, 0.0), A(n, 0.0), V(n, 0.0), P(n, 0.0);
    for (std::size_t k = 0; k + 1 < n; ++k) {
        J[k + 1] = J[k] + s[k];
        A[k + 1] = A[k] + J[k];
        V[k + 1] = V[k] + A[k];
        P[k + 1] = P[k] + V[k];
    }
    t.snap.resize(n);
    t.jerk.resize(n);
    t.acc.resize(n);
    t.vel.resize(n);
    t.pos.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        t.snap[k] = dh * s[k];
        t.jerk[k] = dh * ts * J[k];
        t.acc[k] = dh * t2 * A[k];
        t.vel[k] = dh * t3 * V[k];
        t.pos[k] = dh * t4 * P[k];
    }
    t.d_peak = dh;
    t.n_d = nd;
    t.n_j = nj;
    t.n_a = na;
    t.n_v = nv;
    return t;
}

const std::vector<double>& derivative(const trajectory& t, int order) {
    switch (order) {
        case 0: return t.pos;
        case 1: return t.vel;
        case 2: return t.acc;
        case 3: return t.jerk;
        case 4: return t.snap;
        default: throw std::out_of_range("derivative: order must be in [0, 4]");
    }
}

}  // namespace snapff
