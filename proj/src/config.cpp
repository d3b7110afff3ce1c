#include "snapff/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace snapff {

namespace {

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& raw) {
    try {
        std::size_t used = 0;
        double v = std::stod(raw, &used);
        if (trim(raw.substr(used)).empty()) return v;
    } catch (const std::exception&) {
    }
    throw std::invalid_argument("config: key '" + key + "' has non-numeric value '" + raw + "'");
}

}  // namespace

config_map config_map::parse_string(const std::string& text, const std::string& origin) {
    config_map c;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw std::invalid_argument("config: unterminated section at " + origin + ":" +
                                            std::to_string(lineno));
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config: expected 'key = value' at " + origin + ":" +
                                        std::to_string(lineno));
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        if (key.empty())
            throw std::invalid_argument("config: empty key at " + origin + ":" +
                                        std::to_string(lineno));
        if (!section.empty()) key = section + "." + key;
        c.values[key] = val;
    }
    return c;
}

config_map config_map::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_string(ss.str(), path);
}

bool config_map::has(const std::string& key) const { return values.count(key) > 0; }

std::string config_map::get_string(const std::string& key, const std::string& def) const {
    auto it = values.find(key);
    return it == values.end() ? def : it->second;
}

double config_map::get_double(const std::string& key, double def) const {
    auto it = values.find(key);
    return it == values.end() ? def : parse_double(key, it->second);
}

int config_map::get_int(const std::string& key, int def) const {
    double v = get_double(key, static_cast<double>(def));
    if (v != std::floor(v))
        throw std::invalid_argument("config: key '" + key + "' must be an integer");
    return static_cast<int>(v);
}

unsigned config_map::get_unsigned(const std::string& key, unsigned def) const {
    int v = get_int(key, static_cast<int>(def));
    if (v < 0) throw std::invalid_argument("config: key '" + key + "' must be >= 0");
    return static_cast<unsigned>(v);
}

std::vector<double> config_map::get_double_list(const std::string& key,
                                                const std::vector<double>& def) const {
    auto it = values.find(key);
    if (it == values.end()) return def;
    std::vector<double> out;
    std::string raw = it->second;
    std::size_t pos = 0;
    while (pos <= raw.size()) {
        auto comma = raw.find(',', pos);
        std::string tok = trim(comma == std::string::npos ? raw.substr(pos)
                                                          : raw.substr(pos, comma - pos));
        if (!tok.empty()) out.push_back(parse_double(key, tok));
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    if (out.empty())
        throw std::invalid_argument("config: key '" + key + "' has an empty list");
    return out;
}

experiment_config experiment_config::from(const config_map& c) {
    experiment_config e;
    e.beam.mass = c.get_double("beam.mass", e.beam.mass);
    e.beam.length = c.get_double("beam.length", e.beam.length);
    e.beam.f1_hz = c.get_double("beam.f1_hz", e.beam.f1_hz);
    e.beam.zeta = c.get_double("beam.zeta", e.beam.zeta);
    e.beam.ts = c.get_double("beam.ts", e.beam.ts);
    e.beam.n_modes = c.get_int("beam.modes", e.beam.n_modes);
    e.bandwidth_hz = c.get_double("controller.bandwidth_hz", e.bandwidth_hz);
    e.motion.distance = c.get_double("motion.distance", e.motion.distance);
    e.motion.v_max = c.get_double("motion.v_max", e.motion.v_max);
    e.motion.a_max = c.get_double("motion.a_max", e.motion.a_max);
    e.motion.j_max = c.get_double("motion.j_max", e.motion.j_max);
    e.motion.d_max = c.get_double("motion.d_max", e.motion.d_max);
    e.w_e = c.get_double("ilc.w_e", e.w_e);
    e.w_f_rel = c.get_double("ilc.w_f_rel", e.w_f_rel);
    e.w_df = c.get_double("ilc.w_df", e.w_df);
    e.trials = c.get_int("ilc.trials", e.trials);
    e.nominal_position = c.get_double("ilc.nominal_position", e.nominal_position);
    e.tail_s = c.get_double("ilc.tail_s", e.tail_s);
    e.train_positions = c.get_double_list("train.positions", e.train_positions);
    e.eval_positions = c.get_double_list("evaluate.positions", e.eval_positions);
    e.trace_position = c.get_double("evaluate.trace_position", e.trace_position);
    e.gp_starts = c.get_int("gp.starts", e.gp_starts);
    e.gp_evals = c.get_int("gp.evals_per_start", e.gp_evals);
    e.gp_seed = c.get_unsigned("gp.seed", e.gp_seed);
    e.out_dir = c.get_string("output.dir", e.out_dir);
    return e;
}

std::size_t experiment_config::horizon(std::size_t traj_len) const {
    auto tail = static_cast<std::size_t>(std::llround(tail_s / beam.ts));
    return traj_len + tail;
}

}  // namespace snapff
