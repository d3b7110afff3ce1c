#pragma once

#include <string>
#include <vector>

#include "snapff/config.hpp"
#include "snapff/control_loop.hpp"
#include "snapff/gp.hpp"
#include "snapff/ilcbf.hpp"
#include "snapff/modal_plant.hpp"
#include "snapff/trajectory.hpp"

namespace snapff {

// Everything derived once from an experiment_config: the beam, the feedback
// controller designed at the nominal position, the planned move, and the
// lifted horizon (move plus settling tail).
struct experiment_setup {
    modal_plant plant;
    lead_controller controller;
    trajectory traj;
    std::size_t horizon = 0;
};

experiment_setup build_setup(const experiment_config& cfg);

struct training_result {
    std::vector<double> positions;
    std::vector<ilc_session> sessions;
    std::vector<double> mass_estimates;  // learned theta_acc per position
    std::vector<double> snap_estimates;  // learned theta_snap per position
    double nominal_mass = 0.0;           // baseline from the nominal-position session
    double nominal_snap = 0.0;
};

training_result run_training(const experiment_config& cfg, const experiment_setup& s);
void write_training_outputs(const experiment_config& cfg, const training_result& tr);

struct training_targets {
    std::vector<double> positions;
    std::vector<double> snap;
    std::vector<double> mass;
};

training_targets load_training_targets(const std::string& path);
// Baseline (mass, snap) pair at the nominal position; throws if the nominal
// position is not on the training grid.
std::pair<double, double> nominal_baseline(const training_targets& t, double nominal_position);

gp_model fit_model(const experiment_config& cfg, const training_targets& targets);
void write_gp_outputs(const experiment_config& cfg, const gp_model& m);

struct evaluation_row {
    double rho = 0.0;
    double delta_gp = 0.0;
    double norm_gp = 0.0, norm_pi = 0.0, norm_acc = 0.0;
    double max_gp = 0.0, max_pi = 0.0, max_acc = 0.0;
    bool outside_hull = false;
    bool ok = true;
    std::string message;
};

struct evaluation_result {
    std::vector<evaluation_row> rows;
    double nominal_mass = 0.0, nominal_snap = 0.0;
    double trace_position = 0.0;
    std::vector<double> trace_gp, trace_pi, trace_acc;
    bool trace_ok = false;
};

evaluation_result run_evaluation(const experiment_config& cfg, const experiment_setup& s,
                                 const gp_model& m, double nominal_mass, double nominal_snap);
void write_evaluation_outputs(const experiment_config& cfg, const evaluation_result& ev);

void write_trajectory_csv(const experiment_config& cfg, const trajectory& t);
void write_bode_csv(const experiment_config& cfg, const modal_plant& plant, double rho);

// Zero-padded millimetre tag used in per-position file names ("010", "248").
std::string position_tag_mm(double rho);
std::string format_g17(double v);

// Full command-line entry point; args includes the program name.
int run_cli(const std::vector<std::string>& args);

}  // namespace snapff
