#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <vector>

#include "snapff/control_loop.hpp"
#include "snapff/modal_plant.hpp"
#include "snapff/trajectory.hpp"

namespace snapff {

// Feedforward basis Psi (n x 2): column 0 is the planned acceleration and
// column 1 the planned snap, both zero-padded to the horizon. The model
// feedforward is f = Psi * theta with theta = (mass estimate, snap parameter).
Eigen::MatrixXd build_basis(const trajectory& t, std::size_t n);

struct ilc_weights {
    double w_e = 1.0;     // tracking-error weight
    double w_f = 0.0;     // absolute feedforward-effort weight
    double w_df = 0.0;    // feedforward-change weight
    // If >= 0, overrides w_f with w_f_rel * ||Psi' (GS)' (GS) Psi||_F / ||Psi' Psi||_F,
    // a scale-free way to regularize across problem sizes.
    double w_f_rel = -1.0;
};

// Norm-optimal gains for the lifted update theta_{j+1} = L e_j + Q theta_j,
// derived from minimizing w_e||e_{j+1}||^2 + w_f||f_{j+1}||^2 + w_df||f_{j+1}-f_j||^2
// with e_{j+1} modeled as e_j - (GS) Psi (theta_{j+1} - theta_j).
struct ilc_gains {
    Eigen::MatrixXd learning;    // L, n_theta x n
    Eigen::MatrixXd robustness;  // Q, n_theta x n_theta
    Eigen::MatrixXd gspsi;       // (GS) Psi, n x n_theta (model side)
    double w_f_abs = 0.0;        // resolved absolute effort weight
};

ilc_gains compute_gains(const lifted_lti& gs, const Eigen::MatrixXd& psi, const ilc_weights& w);

Eigen::VectorXd ilc_step(const ilc_gains& g, const Eigen::VectorXd& theta,
                         const std::vector<double>& e);

struct ilc_trial {
    double norm_e = 0.0;
    double norm_f = 0.0;
    Eigen::VectorXd theta;  // parameters applied during this trial
};

struct ilc_session {
    std::vector<ilc_trial> history;
    Eigen::VectorXd theta;  // parameters after the final update
    ilc_gains gains;
};

// Run `trials` ILC trials at sensor position rho, with the learning gains
// computed from the plant model frozen at model_rho (the plant actually
// simulated is frozen at rho). horizon >= trajectory length; the tail past
// the motion lets residual vibration decay inside the lifted window.
// basis_columns: 1 = acceleration only, 2 = acceleration + snap.
ilc_session run_ilc(const modal_plant& plant, double rho, double model_rho,
                    const lead_controller& c, const trajectory& t, const ilc_weights& w,
                    int trials, std::size_t horizon, int basis_columns = 2);

}  // namespace snapff
