#pragma once

#include <complex>
#include <cstddef>
#include <utility>
#include <vector>

#include "snapff/signal.hpp"

namespace snapff {

// One flexible mode of the free-free beam.
struct flex_mode {
    double omega;   // natural frequency [rad/s]
    double zeta;    // damping ratio [-]
    double beta_l;  // dimensionless eigenvalue beta*L of the mode shape
    double sigma;   // shape coefficient for the free-free eigenfunction
};

struct beam_config {
    double mass = 1.0;     // [kg]
    double length = 0.5;   // [m]
    double f1_hz = 80.0;   // first flexible resonance [Hz]
    double zeta = 0.02;    // damping ratio for all modes
    double ts = 2.5e-4;    // sample time [s]
    int n_modes = 2;       // number of flexible modes kept
    // Force actuator locations and weights; defaults to equal split at both ends.
    std::vector<std::pair<double, double>> actuators;
};

// Position-parameterized modal model of a flexible beam driven by a fixed
// actuator set, with the performance (sensor) location as free parameter rho.
struct modal_plant {
    double mass = 0.0;
    double length = 0.0;
    double ts = 0.0;
    double rigid_gain = 0.0;               // c_l * b_l = 1/mass
    std::vector<flex_mode> modes;
    std::vector<std::pair<double, double>> actuators;
    std::vector<double> b;                 // modal input gains, b_i = (1/m) sum_a w_a phi_i(x_a)
};

// The q^-1-domain plant frozen at sensor position rho: a parallel connection
// of a rigid-body double integrator and one second-order section per mode.
struct frozen_plant {
    double ts = 0.0;
    double rho = 0.0;
    std::vector<rational_filter> sections;
};

// First n roots x = beta*L of the free-free characteristic equation
// cos(x) cosh(x) = 1 (x > 0).
std::vector<double> free_free_roots(int n);

modal_plant build_free_free_beam(const beam_config& cfg);

// Free-free eigenfunction of mode i (1-based) evaluated at x in [0, L].
double mode_shape(const modal_plant& p, int i, double x);

frozen_plant freeze(const modal_plant& p, double rho);

// Frequency response of the frozen plant at angular frequency w,
// 0 < w < pi/ts (strictly below Nyquist).
std::complex<double> frequency_response(const frozen_plant& fp, double omega);

// Static flexible compliance at rho: sum of flexible-section DC gains scaled
// so that a constant force F yields steady flexible deflection compliance*F.
// Equals -m * sum_i D_i(rho) / omega_i^2 (units m/N when multiplied back).
double compliance(const modal_plant& p, double rho);

// Model-based snap feedforward parameter delta(rho) = m * compliance(rho),
// units kg*s^2: the force component m*delta*snap compensates the flexible lag.
double analytic_snap(const modal_plant& p, double rho);

// Time response of the frozen plant to force input u (zero initial state).
std::vector<double> simulate(const frozen_plant& fp, const std::vector<double>& u);

// Impulse response of the frozen plant, n samples.
std::vector<double> impulse_response(const frozen_plant& fp, std::size_t n);

}  // namespace snapff
