#pragma once

#include <map>
#include <string>
#include <vector>

#include "snapff/modal_plant.hpp"
#include "snapff/trajectory.hpp"

namespace snapff {

// Flat key-value configuration parsed from an ini-style file:
// '[section]' headers, 'key = value' lines, '#' comments. Keys are stored as
// "section.key" (or bare "key" before any section header).
struct config_map {
    std::map<std::string, std::string> values;

    static config_map parse_file(const std::string& path);
    static config_map parse_string(const std::string& text, const std::string& origin = "<string>");

    bool has(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& def) const;
    double get_double(const std::string& key, double def) const;
    int get_int(const std::string& key, int def) const;
    unsigned get_unsigned(const std::string& key, unsigned def) const;
    std::vector<double> get_double_list(const std::string& key,
                                        const std::vector<double>& def) const;
};

// Full experiment description with benchmark defaults.
struct experiment_config {
    beam_config beam;                       // 1 kg, 0.5 m, 80 Hz, 2% damping, 4 kHz
    double bandwidth_hz = 4.0;
    motion_bounds motion{0.1, 0.5, 5.0, 100.0, 4000.0};
    double w_e = 1.0;
    double w_f_rel = 1e-8;
    double w_df = 0.0;
    int trials = 6;
    double nominal_position = 0.25;
    double tail_s = 0.15;                   // horizon tail after the move
    std::vector<double> train_positions{0.010, 0.130, 0.250, 0.370, 0.490};
    std::vector<double> eval_positions{0.030, 0.110, 0.248, 0.387, 0.470};
    double trace_position = 0.030;
    int gp_starts = 16;
    int gp_evals = 500;
    unsigned gp_seed = 12345;
    std::string out_dir = "out";

    static experiment_config from(const config_map& c);
    std::size_t horizon(std::size_t traj_len) const;
};

}  // namespace snapff
