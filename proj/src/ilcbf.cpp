#include "snapff/ilcbf.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace snapff {

Eigen::MatrixXd build_basis(const trajectory& t, std::size_t n) {
    if (n < t.size()) throw std::invalid_argument("build_basis: horizon shorter than trajectory");
    Eigen::MatrixXd psi = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), 2);
    for (std::size_t k = 0; k < t.size(); ++k) {
        psi(static_cast<Eigen::Index>(k), 0) = t.acc[k];
        psi(static_cast<Eigen::Index>(k), 1) = t.snap[k];
    }
    return psi;
}

ilc_gains compute_gains(const lifted_lti& gs, const Eigen::MatrixXd& psi, const ilc_weights& w) {
    const Eigen::Index n = psi.rows(), nth = psi.cols();
    if (gs.size() != static_cast<std::size_t>(n))
        throw std::invalid_argument("compute_gains: horizon mismatch between GS and basis");
    if (!(w.w_e > 0.0)) throw std::invalid_argument("compute_gains: w_e must be positive");
    if (w.w_f < 0.0 && w.w_f_rel < 0.0)
        throw std::invalid_argument("compute_gains: w_f must be >= 0");
    if (w.w_df < 0.0) throw std::invalid_argument("compute_gains: w_df must be >= 0");

    ilc_gains g;
    g.gspsi.resize(n, nth);
    std::vector<double> col(static_cast<std::size_t>(n));
    for (Eigen::Index j = 0; j < nth; ++j) {
        for (Eigen::Index k = 0; k < n; ++k) col[static_cast<std::size_t>(k)] = psi(k, j);
        auto out = convolve_truncated(gs.h, col, static_cast<std::size_t>(n));
        for (Eigen::Index k = 0; k < n; ++k) g.gspsi(k, j) = out[static_cast<std::size_t>(k)];
    }

    Eigen::MatrixXd b = g.gspsi.transpose() * g.gspsi;
    Eigen::MatrixXd p = psi.transpose() * psi;
    double w_f = w.w_f;
    if (w.w_f_rel >= 0.0) {
        double pn = p.norm();
        w_f = (pn > 0.0) ? w.w_f_rel * b.norm() / pn : 0.0;
    }
    g.w_f_abs = w_f;

    Eigen::MatrixXd r = w.w_e * b + (w_f + w.w_df) * p;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(r);
    if (lu.rank() < nth) {
        // Identify a column that contributes nothing so the error is actionable.
        Eigen::Index worst = 0;
        double wn = g.gspsi.col(0).norm() + psi.col(0).norm();
        for (Eigen::Index j = 1; j < nth; ++j) {
            double nj = g.gspsi.col(j).norm() + psi.col(j).norm();
            if (nj < wn) { wn = nj; worst = j; }
        }
        throw std::runtime_error("compute_gains: normal equations singular (basis column " +
                                 std::to_string(worst) + " contributes no weighted output)");
    }
    Eigen::MatrixXd rinv = lu.inverse();
    g.learning = rinv * (w.w_e * g.gspsi.transpose());
    g.robustness = rinv * (w.w_e * b + w.w_df * p);
    return g;
}

Eigen::VectorXd ilc_step(const ilc_gains& g, const Eigen::VectorXd& theta,
                         const std::vector<double>& e) {
    if (static_cast<Eigen::Index>(e.size()) != g.learning.cols())
        throw std::invalid_argument("ilc_step: error length mismatch");
    if (theta.size() != g.robustness.rows())
        throw std::invalid_argument("ilc_step: parameter length mismatch");
    Eigen::Map<const Eigen::VectorXd> ev(e.data(), static_cast<Eigen::Index>(e.size()));
    return g.learning * ev + g.robustness * theta;
}

ilc_session run_ilc(const modal_plant& plant, double rho, double model_rho,
                    const lead_controller& c, const trajectory& t, const ilc_weights& w,
                    int trials, std::size_t horizon, int basis_columns) {
    if (trials < 1) throw std::invalid_argument("run_ilc: trials must be >= 1");
    if (horizon < t.size()) throw std::invalid_argument("run_ilc: horizon shorter than trajectory");
    if (basis_columns < 1 || basis_columns > 2)
        throw std::invalid_argument("run_ilc: basis_columns must be 1 or 2");

    frozen_plant truth = freeze(plant, rho);
    frozen_plant model = freeze(plant, model_rho);
    const std::size_t n = horizon;

    auto r = reference_from(t, n);
    Eigen::MatrixXd psi = build_basis(t, n).leftCols(basis_columns);
    auto hg_true = impulse_response(truth, n);
    auto hc = impulse_response(c, n);
    auto hgc_true = convolve_truncated(hg_true, hc, n);
    auto gs_model = process_sensitivity_lifted(model, c, n);

    ilc_session s;
    s.gains = compute_gains(gs_model, psi, w);
    s.theta = Eigen::VectorXd::Zero(psi.cols());

    double theta1_norm = -1.0;
    std::vector<double> f(n, 0.0);
    for (int j = 0; j < trials; ++j) {
        Eigen::VectorXd fv = psi * s.theta;
        for (std::size_t k = 0; k < n; ++k) f[k] = fv(static_cast<Eigen::Index>(k));
        std::vector<double> rhs = r;
        auto gf = convolve_truncated(hg_true, f, n);
        for (std::size_t k = 0; k < n; ++k) rhs[k] -= gf[k];
        auto e = solve_unit_plus_toeplitz(hgc_true, rhs);

        ilc_trial trial;
        trial.norm_e = norm2(e);
        trial.norm_f = fv.norm();
        trial.theta = s.theta;
        s.history.push_back(trial);

        s.theta = ilc_step(s.gains, s.theta, e);
        if (!s.theta.allFinite())
            throw std::runtime_error("run_ilc: parameters diverged at trial " + std::to_string(j));
        if (theta1_norm < 0.0)
            theta1_norm = s.theta.norm();
        else if (s.theta.norm() > 1e6 * (theta1_norm + 1e-300))
            throw std::runtime_error("run_ilc: parameters diverged at trial " + std::to_string(j));
    }
    return s;
}

}  // namespace snapff
