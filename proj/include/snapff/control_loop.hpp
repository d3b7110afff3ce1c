#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "snapff/modal_plant.hpp"
#include "snapff/signal.hpp"
#include "snapff/trajectory.hpp"

namespace snapff {

// First-order lead compensator C(q^-1) = k (1 + s/w_z)/(1 + s/w_p) with
// s discretized by backward difference; w_z = w0/3, w_p = 3 w0, and the gain
// k set so that |C G| = 1 at the target crossover w0 on the design plant.
struct lead_controller {
    double ts = 0.0;
    double bandwidth_hz = 0.0;
    double gain = 0.0;
    rational_filter filt;  // gain folded into the numerator
};

lead_controller design_lead_controller(const frozen_plant& design_plant, double bandwidth_hz);

std::complex<double> frequency_response(const lead_controller& c, double omega);
std::vector<double> impulse_response(const lead_controller& c, std::size_t n);

// Largest closed-loop pole magnitude of the loop around plant fp with
// controller c (|z| < 1 means asymptotically stable).
double max_closed_loop_pole(const frozen_plant& fp, const lead_controller& c);

// Position reference for the tracking loop: the planned position with a
// two-sample preview (r[k] = pos[k+2]), held at the final position, padded
// out to n samples. The preview makes the rigid-body part of the loop
// exactly invertible by the acceleration feedforward m*acc.
std::vector<double> reference_from(const trajectory& t, std::size_t n);

// Lifted (finite-horizon) representations over n samples.
lifted_lti plant_lifted(const frozen_plant& fp, std::size_t n);
lifted_lti sensitivity_lifted(const frozen_plant& fp, const lead_controller& c, std::size_t n);
// Process sensitivity G*S: maps an additive plant-input signal to the output.
lifted_lti process_sensitivity_lifted(const frozen_plant& fp, const lead_controller& c,
                                      std::size_t n);

// Closed-loop tracking error e = S (r - G f) over the horizon r.size();
// f is a plant-input feedforward force (empty means zero). Throws if the
// response diverges (unstable loop).
std::vector<double> closed_loop_error(const frozen_plant& fp, const lead_controller& c,
                                      const std::vector<double>& r, const std::vector<double>& f);

}  // namespace snapff
