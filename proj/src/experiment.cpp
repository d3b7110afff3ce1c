#include "snapff/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>

namespace snapff {

namespace {

namespace fs = std::filesystem;

std::ofstream open_out(const experiment_config& cfg, const std::string& name) {
    fs::create_directories(cfg.out_dir);
    fs::path p = fs::path(cfg.out_dir) / name;
    std::ofstream out(p);
    if (!out) throw std::runtime_error("cannot open output file " + p.string());
    return out;
}

std::string out_path(const experiment_config& cfg, const std::string& name) {
    return (fs::path(cfg.out_dir) / name).string();
}

std::size_t nominal_index(const std::vector<double>& positions, double nominal) {
    for (std::size_t i = 0; i < positions.size(); ++i)
        if (std::abs(positions[i] - nominal) < 1e-9) return i;
    return positions.size();
}

}  // namespace

std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string position_tag_mm(double rho) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%03ld", std::lround(rho * 1000.0));
    return buf;
}

experiment_setup build_setup(const experiment_config& cfg) {
    experiment_setup s;
    s.plant = build_free_free_beam(cfg.beam);
    if (cfg.nominal_position < 0.0 || cfg.nominal_position > cfg.beam.length)
        throw std::invalid_argument("experiment: nominal position outside the beam");
    s.controller = design_lead_controller(freeze(s.plant, cfg.nominal_position), cfg.bandwidth_hz);
    s.traj = plan_fourth_order(cfg.motion, cfg.beam.ts);
    s.horizon = cfg.horizon(s.traj.size());
    return s;
}

training_result run_training(const experiment_config& cfg, const experiment_setup& s) {
    training_result tr;
    tr.positions = cfg.train_positions;
    ilc_weights w;
    w.w_e = cfg.w_e;
    w.w_df = cfg.w_df;
    w.w_f_rel = cfg.w_f_rel;
    for (double rho : tr.positions) {
        auto session = run_ilc(s.plant, rho, cfg.nominal_position, s.controller, s.traj, w,
                               cfg.trials, s.horizon);
        tr.mass_estimates.push_back(session.theta(0));
        tr.snap_estimates.push_back(session.theta(1));
        tr.sessions.push_back(std::move(session));
    }
    std::size_t ni = nominal_index(tr.positions, cfg.nominal_position);
    if (ni < tr.positions.size()) {
        tr.nominal_mass = tr.mass_estimates[ni];
        tr.nominal_snap = tr.snap_estimates[ni];
    } else {
        auto session = run_ilc(s.plant, cfg.nominal_position, cfg.nominal_position, s.controller,
                               s.traj, w, cfg.trials, s.horizon);
        tr.nominal_mass = session.theta(0);
        tr.nominal_snap = session.theta(1);
    }
    return tr;
}

void write_training_outputs(const experiment_config& cfg, const training_result& tr) {
    for (std::size_t i = 0; i < tr.positions.size(); ++i) {
        auto out = open_out(cfg, "ilc_history_" + position_tag_mm(tr.positions[i]) + "mm.csv");
        out << "trial,norm_e,norm_f,theta_acc,theta_snap\n";
        const auto& hist = tr.sessions[i].history;
        for (std::size_t j = 0; j < hist.size(); ++j)
            out << (j + 1) << "," << format_g17(hist[j].norm_e) << ","
                << format_g17(hist[j].norm_f) << "," << format_g17(hist[j].theta(0)) << ","
                << format_g17(hist[j].theta(1)) << "\n";
    }
    auto out = open_out(cfg, "training_targets.csv");
    out << "rho,delta,mhat\n";
    for (std::size_t i = 0; i < tr.positions.size(); ++i)
        out << format_g17(tr.positions[i]) << "," << format_g17(tr.snap_estimates[i]) << ","
            << format_g17(tr.mass_estimates[i]) << "\n";
}

training_targets load_training_targets(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open " + path + " (run the train command first)");
    std::string line;
    if (!std::getline(in, line) || line != "rho,delta,mhat")
        throw std::runtime_error("unexpected header in " + path);
    training_targets t;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string a, b, c;
        if (!std::getline(ss, a, ',') || !std::getline(ss, b, ',') || !std::getline(ss, c))
            throw std::runtime_error("malformed row in " + path + ": " + line);
        t.positions.push_back(std::stod(a));
        t.snap.push_back(std::stod(b));
        t.mass.push_back(std::stod(c));
    }
    if (t.positions.empty()) throw std::runtime_error("no training rows in " + path);
    return t;
}

std::pair<double, double> nominal_baseline(const training_targets& t, double nominal_position) {
    std::size_t ni = nominal_index(t.positions, nominal_position);
    if (ni >= t.positions.size())
        throw std::runtime_error(
            "nominal position missing from training targets; include it in train.positions");
    return {t.mass[ni], t.snap[ni]};
}

gp_model fit_model(const experiment_config& cfg, const training_targets& targets) {
    gp_training_set data{targets.positions, targets.snap};
    gp_fit_options opt;
    opt.starts = cfg.gp_starts;
    opt.evals_per_start = cfg.gp_evals;
    opt.seed = cfg.gp_seed;
    return make_gp_model(fit_hyperparameters(data, opt), data);
}

void write_gp_outputs(const experiment_config& cfg, const gp_model& m) {
    fs::create_directories(cfg.out_dir);
    save_gp_model(m, out_path(cfg, "gp_model.txt"));
    const int npts = 301;
    std::vector<double> grid(npts);
    for (int i = 0; i < npts; ++i)
        grid[i] = cfg.beam.length * static_cast<double>(i) / (npts - 1);
    Eigen::VectorXd mean, var;
    gp_posterior(m, grid, mean, var);
    auto out = open_out(cfg, "gp_curve.csv");
    out << "rho,mean,var\n";
    for (int i = 0; i < npts; ++i)
        out << format_g17(grid[i]) << "," << format_g17(mean(i)) << "," << format_g17(var(i))
            << "\n";
}

evaluation_result run_evaluation(const experiment_config& cfg, const experiment_setup& s,
                                 const gp_model& m, double nominal_mass, double nominal_snap) {
    evaluation_result ev;
    ev.nominal_mass = nominal_mass;
    ev.nominal_snap = nominal_snap;
    ev.trace_position = cfg.trace_position;

    const std::size_t n = s.horizon;
    auto r = reference_from(s.traj, n);
    Eigen::MatrixXd psi = build_basis(s.traj, n);
    auto make_f = [&](double mass_c, double snap_c) {
        std::vector<double> f(n);
        for (std::size_t k = 0; k < n; ++k)
            f[k] = mass_c * psi(static_cast<Eigen::Index>(k), 0) +
                   snap_c * psi(static_cast<Eigen::Index>(k), 1);
        return f;
    };

    double hull_lo = *std::min_element(m.train.positions.begin(), m.train.positions.end());
    double hull_hi = *std::max_element(m.train.positions.begin(), m.train.positions.end());

    std::vector<double> positions = cfg.eval_positions;
    bool trace_listed = false;
    for (double p : positions)
        if (std::abs(p - cfg.trace_position) < 1e-12) trace_listed = true;
    if (!trace_listed) positions.push_back(cfg.trace_position);

    for (double rho : positions) {
        evaluation_row row;
        row.rho = rho;
        row.outside_hull = rho < hull_lo || rho > hull_hi;
        try {
            row.delta_gp = estimate_delta(m, rho);
            frozen_plant truth = freeze(s.plant, rho);
            auto e_gp = closed_loop_error(truth, s.controller, r, make_f(nominal_mass, row.delta_gp));
            auto e_pi = closed_loop_error(truth, s.controller, r, make_f(nominal_mass, nominal_snap));
            auto e_ac = closed_loop_error(truth, s.controller, r, make_f(nominal_mass, 0.0));
            auto maxabs = [](const std::vector<double>& v) {
                double mx = 0.0;
                for (double x : v) mx = std::max(mx, std::abs(x));
                return mx;
            };
            row.norm_gp = norm2(e_gp);
            row.norm_pi = norm2(e_pi);
            row.norm_acc = norm2(e_ac);
            row.max_gp = maxabs(e_gp);
            row.max_pi = maxabs(e_pi);
            row.max_acc = maxabs(e_ac);
            if (std::abs(rho - cfg.trace_position) < 1e-12 && !ev.trace_ok) {
                ev.trace_gp = e_gp;
                ev.trace_pi = e_pi;
                ev.trace_acc = e_ac;
                ev.trace_ok = true;
            }
        } catch (const std::exception& e) {
            row.ok = false;
            row.message = e.what();
        }
        bool listed = true;
        if (!trace_listed && std::abs(rho - cfg.trace_position) < 1e-12) listed = false;
        if (listed) ev.rows.push_back(row);
    }
    return ev;
}

void write_evaluation_outputs(const experiment_config& cfg, const evaluation_result& ev) {
    auto out = open_out(cfg, "comparison.csv");
    out << "# nominal_mass = " << format_g17(ev.nominal_mass) << "\n";
    out << "# nominal_snap = " << format_g17(ev.nominal_snap) << "\n";
    out << "rho,delta_gp,norm_gp,norm_pi,norm_acc,max_gp,max_pi,max_acc\n";
    for (const auto& row : ev.rows) {
        if (!row.ok) {
            out << "# evaluation failed at rho=" << format_g17(row.rho) << ": " << row.message
                << "\n";
            continue;
        }
        out << format_g17(row.rho) << "," << format_g17(row.delta_gp) << ","
            << format_g17(row.norm_gp) << "," << format_g17(row.norm_pi) << ","
            << format_g17(row.norm_acc) << "," << format_g17(row.max_gp) << ","
            << format_g17(row.max_pi) << "," << format_g17(row.max_acc) << "\n";
    }
    if (ev.trace_ok) {
        auto tr = open_out(cfg, "error_trace_" + position_tag_mm(ev.trace_position) + "mm.csv");
        tr << "k,t,e_gp,e_pi,e_acc\n";
        for (std::size_t k = 0; k < ev.trace_gp.size(); ++k)
            tr << k << "," << format_g17(static_cast<double>(k) * cfg.beam.ts) << ","
               << format_g17(ev.trace_gp[k]) << "," << format_g17(ev.trace_pi[k]) << ","
               << format_g17(ev.trace_acc[k]) << "\n";
    }
}

void write_trajectory_csv(const experiment_config& cfg, const trajectory& t) {
    auto out = open_out(cfg, "trajectory.csv");
    out << "k,t,pos,vel,acc,jerk,snap\n";
    for (std::size_t k = 0; k < t.size(); ++k)
        out << k << "," << format_g17(static_cast<double>(k) * t.ts) << ","
            << format_g17(t.pos[k]) << "," << format_g17(t.vel[k]) << "," << format_g17(t.acc[k])
            << "," << format_g17(t.jerk[k]) << "," << format_g17(t.snap[k]) << "\n";
}

void write_bode_csv(const experiment_config& cfg, const modal_plant& plant, double rho) {
    frozen_plant fp = freeze(plant, rho);
    auto out = open_out(cfg, "bode_" + position_tag_mm(rho) + "mm.csv");
    out << "freq_hz,mag,phase_rad\n";
    const int npts = 200;
    const double f_lo = 0.1, f_hi = 1900.0;
    for (int i = 0; i < npts; ++i) {
        double f = f_lo * std::pow(f_hi / f_lo, static_cast<double>(i) / (npts - 1));
        auto g = frequency_response(fp, 2.0 * std::numbers::pi * f);
        out << format_g17(f) << "," << format_g17(std::abs(g)) << ","
            << format_g17(std::arg(g)) << "\n";
    }
}

namespace {

std::vector<double> parse_position_list(const std::string& raw, bool mm) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos <= raw.size()) {
        auto comma = raw.find(',', pos);
        std::string tok =
            comma == std::string::npos ? raw.substr(pos) : raw.substr(pos, comma - pos);
        auto b = tok.find_first_not_of(" \t");
        if (b != std::string::npos) {
            auto e = tok.find_last_not_of(" \t");
            tok = tok.substr(b, e - b + 1);
            double v = 0.0;
            std::size_t used = 0;
            try {
                v = std::stod(tok, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used != tok.size())
                throw std::invalid_argument("bad position value '" + tok + "'");
            out.push_back(mm ? v / 1000.0 : v);
        }
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    if (out.empty()) throw std::invalid_argument("--positions list is empty");
    return out;
}

void print_hull_warnings(const evaluation_result& ev, const gp_model& m) {
    double lo = *std::min_element(m.train.positions.begin(), m.train.positions.end());
    double hi = *std::max_element(m.train.positions.begin(), m.train.positions.end());
    for (const auto& row : ev.rows)
        if (row.outside_hull)
            std::cout << "warning: rho=" << row.rho << " m lies outside the training hull ["
                      << lo << ", " << hi << "]; the GP estimate reverts toward the prior there\n";
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"position-dependent snap feedforward: simulate, learn, fit, evaluate"};
    app.require_subcommand(1);

    std::string config_path, out_dir, positions_arg;
    int trials = 0;
    double wf = -1.0;
    long long seed = -1;
    bool mm = false;
    app.add_option("--config", config_path, "configuration file (ini style)");
    app.add_option("--out", out_dir, "output directory (overrides config)");
    app.add_option("--positions", positions_arg,
                   "comma-separated sensor positions [m]; training grid for 'train', "
                   "test set for 'evaluate', curve positions for 'bode'");
    app.add_option("--trials", trials, "ILC trials per position (override)");
    app.add_option("--seed", seed, "GP hyperparameter fit seed (override)");
    app.add_option("--wf", wf, "relative feedforward effort weight (override)");
    app.add_flag("--mm", mm, "interpret --positions in millimetres");

    auto* cmd_train = app.add_subcommand(
        "train", "run ILC with basis functions at each training position");
    auto* cmd_fit = app.add_subcommand(
        "fit", "fit the GP snap-parameter model to the training targets");
    auto* cmd_evaluate = app.add_subcommand(
        "evaluate", "compare GP, position-independent and acceleration-only feedforward");
    auto* cmd_bode = app.add_subcommand("bode", "write plant frequency responses");
    auto* cmd_plan = app.add_subcommand("plan", "plan the benchmark move and write it out");
    for (auto* sub : {cmd_train, cmd_fit, cmd_evaluate, cmd_bode, cmd_plan}) sub->fallthrough();

    try {
        std::vector<const char*> argv;
        argv.reserve(args.size());
        for (const auto& a : args) argv.push_back(a.c_str());
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        experiment_config cfg;
        if (!config_path.empty()) cfg = experiment_config::from(config_map::parse_file(config_path));
        if (!out_dir.empty()) cfg.out_dir = out_dir;
        if (trials > 0) cfg.trials = trials;
        if (wf >= 0.0) cfg.w_f_rel = wf;
        if (seed >= 0) cfg.gp_seed = static_cast<unsigned>(seed);
        std::vector<double> poslist;
        if (!positions_arg.empty()) poslist = parse_position_list(positions_arg, mm);

        if (cmd_plan->parsed()) {
            auto t = plan_fourth_order(cfg.motion, cfg.beam.ts);
            write_trajectory_csv(cfg, t);
            double vmax = 0, amax = 0, jmax = 0;
            for (double v : t.vel) vmax = std::max(vmax, std::abs(v));
            for (double v : t.acc) amax = std::max(amax, std::abs(v));
            for (double v : t.jerk) jmax = std::max(jmax, std::abs(v));
            std::cout << "planned move: " << t.pos.back() << " m in " << t.duration() << " s ("
                      << t.size() << " samples)\n"
                      << "peaks: v=" << vmax << " a=" << amax << " j=" << jmax
                      << " d=" << t.d_peak << "\n"
                      << "wrote " << out_path(cfg, "trajectory.csv") << "\n";
        } else if (cmd_train->parsed()) {
            if (!poslist.empty()) cfg.train_positions = poslist;
            auto setup = build_setup(cfg);
            auto tr = run_training(cfg, setup);
            write_training_outputs(cfg, tr);
            std::cout << "move " << setup.traj.duration() << " s, lifted horizon "
                      << setup.horizon << " samples\n";
            for (std::size_t i = 0; i < tr.positions.size(); ++i) {
                const auto& h = tr.sessions[i].history;
                std::cout << "rho=" << tr.positions[i] << " m: |e| " << h.front().norm_e
                          << " -> " << h.back().norm_e << ", mhat=" << tr.mass_estimates[i]
                          << " kg, delta=" << tr.snap_estimates[i] << " kg s^2\n";
            }
            std::cout << "wrote " << out_path(cfg, "training_targets.csv") << "\n";
        } else if (cmd_fit->parsed()) {
            auto targets = load_training_targets(out_path(cfg, "training_targets.csv"));
            auto model = fit_model(cfg, targets);
            write_gp_outputs(cfg, model);
            std::cout << "gp fit: sigma_f2=" << model.hyp.sigma_f2
                      << " length_scale=" << model.hyp.length_scale
                      << " sigma_n2=" << model.hyp.sigma_n2 << "\n"
                      << "log marginal likelihood: "
                      << log_marginal_likelihood(model.hyp, model.train) << "\n"
                      << "wrote " << out_path(cfg, "gp_model.txt") << "\n";
        } else if (cmd_evaluate->parsed()) {
            if (!poslist.empty()) cfg.eval_positions = poslist;
            auto model = load_gp_model(out_path(cfg, "gp_model.txt"));
            auto targets = load_training_targets(out_path(cfg, "training_targets.csv"));
            auto [mhat, dpi] = nominal_baseline(targets, cfg.nominal_position);
            auto setup = build_setup(cfg);
            auto ev = run_evaluation(cfg, setup, model, mhat, dpi);
            write_evaluation_outputs(cfg, ev);
            print_hull_warnings(ev, model);
            for (const auto& row : ev.rows) {
                if (!row.ok) {
                    std::cout << "rho=" << row.rho << " m: evaluation failed: " << row.message
                              << "\n";
                    continue;
                }
                std::cout << "rho=" << row.rho << " m: |e| gp=" << row.norm_gp
                          << " fixed=" << row.norm_pi << " acc-only=" << row.norm_acc
                          << " (fixed/gp " << row.norm_pi / row.norm_gp << "x)\n";
            }
            std::cout << "wrote " << out_path(cfg, "comparison.csv") << "\n";
        } else if (cmd_bode->parsed()) {
            std::vector<double> rhos = poslist.empty()
                                           ? std::vector<double>{cfg.nominal_position}
                                           : poslist;
            auto plant = build_free_free_beam(cfg.beam);
            for (double rho : rhos) {
                write_bode_csv(cfg, plant, rho);
                std::cout << "wrote "
                          << out_path(cfg, "bode_" + position_tag_mm(rho) + "mm.csv") << "\n";
            }
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

}  // namespace snapff
