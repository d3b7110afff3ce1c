#include "snapff/control_loop.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace snapff {

namespace {

std::vector<double> conv_full(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> y(a.size() + b.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) y[i + j] += a[i] * b[j];
    return y;
}

std::complex<double> eval_poly(const std::vector<double>& c, std::complex<double> qinv) {
    std::complex<double> v = 0.0, zk = 1.0;
    for (double ci : c) {
        v += ci * zk;
        zk *= qinv;
    }
    return v;
}

rational_filter lead_sections(double ts, double w0) {
    double wz = w0 / 3.0, wp = 3.0 * w0;
    // Backward difference s <- (1 - q^-1)/ts.
    std::vector<double> num = {1.0 + 1.0 / (ts * wz), -1.0 / (ts * wz)};
    std::vector<double> den = {1.0 + 1.0 / (ts * wp), -1.0 / (ts * wp)};
    return {num, den};
}

}  // namespace

lead_controller design_lead_controller(const frozen_plant& design_plant, double bandwidth_hz) {
    if (!(bandwidth_hz > 0.0))
        throw std::invalid_argument("design_lead_controller: bandwidth must be positive");
    double w0 = 2.0 * std::numbers::pi * bandwidth_hz;
    if (!(w0 < std::numbers::pi / design_plant.ts))
        throw std::invalid_argument("design_lead_controller: bandwidth at or above Nyquist");

    lead_controller c;
    c.ts = design_plant.ts;
    c.bandwidth_hz = bandwidth_hz;
    c.filt = lead_sections(design_plant.ts, w0);

    std::complex<double> qinv = std::exp(std::complex<double>(0.0, -w0 * design_plant.ts));
    std::complex<double> c1 = eval_poly(c.filt.num, qinv) / eval_poly(c.filt.den, qinv);
    std::complex<double> g = frequency_response(design_plant, w0);
    double mag = std::abs(c1 * g);
    if (!(mag > 0.0) || !std::isfinite(mag))
        throw std::runtime_error("design_lead_controller: plant response degenerate at crossover");
    c.gain = 1.0 / mag;
    for (double& v : c.filt.num) v *= c.gain;

    // Crossover lands at w0 by construction; check the margin and closed-loop
    // stability on the design plant before handing the controller out.
    double pm_deg = 180.0 + std::arg(frequency_response(c, w0) * g) * 180.0 / std::numbers::pi;
    if (pm_deg < 30.0)
        throw std::runtime_error("design_lead_controller: phase margin below 30 degrees");
    double pmax = max_closed_loop_pole(design_plant, c);
    if (!(pmax <= 1.0 - 1e-6))
        throw std::runtime_error("design_lead_controller: closed loop unstable on design plant");
    return c;
}

std::complex<double> frequency_response(const lead_controller& c, double omega) {
    if (!(omega > 0.0) || !(omega < std::numbers::pi / c.ts))
        throw std::out_of_range("frequency_response: omega outside (0, pi/ts)");
    std::complex<double> qinv = std::exp(std::complex<double>(0.0, -omega * c.ts));
    return eval_poly(c.filt.num, qinv) / eval_poly(c.filt.den, qinv);
}

std::vector<double> impulse_response(const lead_controller& c, std::size_t n) {
    return impulse_response(c.filt, n);
}

double max_closed_loop_pole(const frozen_plant& fp, const lead_controller& c) {
    // Characteristic polynomial in ascending powers of q^-1:
    //   D_G(q^-1) C_den(q^-1) + N_G(q^-1) C_num(q^-1),
    // where the plant sections are combined over a common denominator.
    std::vector<double> dg = {1.0};
    for (const auto& s : fp.sections) dg = conv_full(dg, s.den);
    std::vector<double> ng(1, 0.0);
    for (std::size_t i = 0; i < fp.sections.size(); ++i) {
        std::vector<double> term = fp.sections[i].num;
        for (std::size_t j = 0; j < fp.sections.size(); ++j)
            if (j != i) term = conv_full(term, fp.sections[j].den);
        if (term.size() > ng.size()) ng.resize(term.size(), 0.0);
        for (std::size_t k = 0; k < term.size(); ++k) ng[k] += term[k];
    }
    std::vector<double> cp = conv_full(dg, c.filt.den);
    std::vector<double> nc = conv_full(ng, c.filt.num);
    if (nc.size() > cp.size()) cp.resize(nc.size(), 0.0);
    for (std::size_t k = 0; k < nc.size(); ++k) cp[k] += nc[k];

    // Ascending q^-1 coefficients read as a polynomial in z of degree M give
    // the closed-loop poles directly. Drop exact trailing zeros (roots at 0).
    while (cp.size() > 1 && cp.back() == 0.0) cp.pop_back();
    if (std::abs(cp[0]) < 1e-300)
        throw std::runtime_error("max_closed_loop_pole: degenerate leading coefficient");
    std::size_t m = cp.size() - 1;
    if (m == 0) return 0.0;
    Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(m, m);
    for (std::size_t k = 0; k < m; ++k) comp(0, k) = -cp[k + 1] / cp[0];
    for (std::size_t k = 1; k < m; ++k) comp(k, k - 1) = 1.0;
    Eigen::VectorXcd ev = Eigen::EigenSolver<Eigen::MatrixXd>(comp, false).eigenvalues();
    double pmax = 0.0;
    for (Eigen::Index i = 0; i < ev.size(); ++i) pmax = std::max(pmax, std::abs(ev[i]));
    return pmax;
}

std::vector<double> reference_from(const trajectory& t, std::size_t n) {
    if (t.pos.empty()) throw std::invalid_argument("reference_from: empty trajectory");
    std::vector<double> r(n, t.pos.back());
    for (std::size_t k = 0; k < n; ++k)
        if (k + 2 < t.pos.size()) r[k] = t.pos[k + 2];
    return r;
}

lifted_lti plant_lifted(const frozen_plant& fp, std::size_t n) {
    return {impulse_response(fp, n)};
}

lifted_lti sensitivity_lifted(const frozen_plant& fp, const lead_controller& c, std::size_t n) {
    auto hgc = convolve_truncated(impulse_response(fp, n), impulse_response(c, n), n);
    std::vector<double> e0(n, 0.0);
    if (n > 0) e0[0] = 1.0;
    return {solve_unit_plus_toeplitz(hgc, e0)};
}

lifted_lti process_sensitivity_lifted(const frozen_plant& fp, const lead_controller& c,
                                      std::size_t n) {
    auto hg = impulse_response(fp, n);
    auto hs = sensitivity_lifted(fp, c, n);
    return {convolve_truncated(hg, hs.h, n)};
}

std::vector<double> closed_loop_error(const frozen_plant& fp, const lead_controller& c,
                                      const std::vector<double>& r, const std::vector<double>& f) {
    const std::size_t n = r.size();
    if (!f.empty() && f.size() != n)
        throw std::invalid_argument("closed_loop_error: feedforward length mismatch");
    auto hg = impulse_response(fp, n);
    auto hgc = convolve_truncated(hg, impulse_response(c, n), n);
    std::vector<double> rhs = r;
    if (!f.empty()) {
        auto gf = convolve_truncated(hg, f, n);
        for (std::size_t k = 0; k < n; ++k) rhs[k] -= gf[k];
    }
    return solve_unit_plus_toeplitz(hgc, rhs);
}

}  // namespace snapff
