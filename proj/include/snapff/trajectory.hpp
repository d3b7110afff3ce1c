#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace snapff {

// Symmetric point-to-point motion bounds (all positive; distance >= 0).
struct motion_bounds {
    double distance = 0.0;  // [m]
    double v_max = 0.0;     // [m/s]
    double a_max = 0.0;     // [m/s^2]
    double j_max = 0.0;     // [m/s^3]
    double d_max = 0.0;     // [m/s^4] snap bound
};

// Fourth-order (snap-limited) rest-to-rest trajectory sampled at ts.
// The snap signal is a staircase in {-d_peak, 0, +d_peak}; every lower
// derivative is its exact forward-Euler cumulative sum, so the discrete
// chain jerk[k+1] = jerk[k] + ts*snap[k] (and likewise down to pos)
// reproduces the stored arrays.
struct trajectory {
    double ts = 0.0;
    double d_peak = 0.0;               // realized snap magnitude
    std::int64_t n_d = 0, n_j = 0, n_a = 0, n_v = 0;  // phase sample counts
    std::vector<double> pos, vel, acc, jerk, snap;

    std::size_t size() const { return pos.size(); }
    double duration() const { return ts * static_cast<double>(pos.size() - 1); }
};

trajectory plan_fourth_order(const motion_bounds& b, double ts);

// Stored derivative array by order: 0 = pos, 1 = vel, 2 = acc, 3 = jerk, 4 = snap.
const std::vector<double>& derivative(const trajectory& t, int order);

}  // namespace snapff
