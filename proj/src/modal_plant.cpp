#include "snapff/modal_plant.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace snapff {

namespace {

// cos(x) - 1/cosh(x) has the same positive roots as cos(x)cosh(x) = 1 and
// stays bounded, which keeps the bisection well behaved for higher modes.
double characteristic(double x) { return std::cos(x) - 1.0 / std::cosh(x); }

double bisect_root(double lo, double hi) {
    double flo = characteristic(lo);
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        double fm = characteristic(mid);
        if (fm == 0.0) return mid;
        if ((flo < 0.0) == (fm < 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace

std::vector<double> free_free_roots(int n) {
    if (n < 0) throw std::invalid_argument("free_free_roots: n must be >= 0");
    std::vector<double> roots;
    roots.reserve(n);
    for (int i = 1; i <= n; ++i) {
        // Roots approach (2i+1)*pi/2 from below; bracket around that center.
        double center = (2.0 * i + 1.0) * std::numbers::pi / 2.0;
        roots.push_back(bisect_root(center - 1.0, center + 1.0));
    }
    return roots;
}

modal_plant build_free_free_beam(const beam_config& cfg) {
    if (!(cfg.mass > 0.0)) throw std::invalid_argument("beam_config: mass must be positive");
    if (!(cfg.length > 0.0)) throw std::invalid_argument("beam_config: length must be positive");
    if (!(cfg.f1_hz > 0.0)) throw std::invalid_argument("beam_config: f1_hz must be positive");
    if (!(cfg.zeta > 0.0) || !(cfg.zeta < 1.0))
        throw std::invalid_argument("beam_config: zeta must be in (0, 1)");
    if (!(cfg.ts > 0.0)) throw std::invalid_argument("beam_config: ts must be positive");
    if (cfg.n_modes < 0) throw std::invalid_argument("beam_config: n_modes must be >= 0");
    double f_nyq = 0.5 / cfg.ts;

    modal_plant p;
    p.mass = cfg.mass;
    p.length = cfg.length;
    p.ts = cfg.ts;
    p.rigid_gain = 1.0 / cfg.mass;
    p.actuators = cfg.actuators;
    if (p.actuators.empty())
        p.actuators = {{0.0, 0.5}, {cfg.length, 0.5}};
    for (auto& [x, w] : p.actuators) {
        if (x < 0.0 || x > cfg.length)
            throw std::out_of_range("beam_config: actuator position outside [0, length]");
        (void)w;
    }

    auto roots = free_free_roots(cfg.n_modes);
    for (int i = 0; i < cfg.n_modes; ++i) {
        flex_mode m;
        m.beta_l = roots[i];
        // Frequencies scale as (beta_i/beta_1)^2 for a uniform beam.
        double ratio = (roots[i] * roots[i]) / (roots[0] * roots[0]);
        double fi = cfg.f1_hz * ratio;
        if (fi >= f_nyq)
            throw std::invalid_argument("beam_config: mode frequency at or above Nyquist");
        m.omega = 2.0 * std::numbers::pi * fi;
        m.zeta = cfg.zeta;
        m.sigma = (std::cosh(m.beta_l) - std::cos(m.beta_l)) /
                  (std::sinh(m.beta_l) - std::sin(m.beta_l));
        p.modes.push_back(m);
    }

    for (int i = 1; i <= cfg.n_modes; ++i) {
        double bi = 0.0;
        for (auto& [x, w] : p.actuators) bi += w * mode_shape(p, i, x);
        p.b.push_back(bi / p.mass);
    }
    return p;
}

double mode_shape(const modal_plant& p, int i, double x) {
    if (i < 1 || static_cast<std::size_t>(i) > p.modes.size())
        throw std::out_of_range("mode_shape: mode index out of range");
    if (x < 0.0 || x > p.length) throw std::out_of_range("mode_shape: x outside [0, length]");
    const flex_mode& m = p.modes[i - 1];
    double z = m.beta_l * x / p.length;
    return std::cosh(z) + std::cos(z) - m.sigma * (std::sinh(z) + std::sin(z));
}

frozen_plant freeze(const modal_plant& p, double rho) {
    if (rho < 0.0 || rho > p.length) throw std::out_of_range("freeze: rho outside [0, length]");
    frozen_plant fp;
    fp.ts = p.ts;
    fp.rho = rho;
    double ts2 = p.ts * p.ts;
    // Rigid-body double integrator: c_l b_l Ts^2 / (1 - q^-1)^2.
    fp.sections.push_back({{p.rigid_gain * ts2}, {1.0, -2.0, 1.0}});
    for (std::size_t i = 0; i < p.modes.size(); ++i) {
        const flex_mode& m = p.modes[i];
        double di = mode_shape(p, static_cast<int>(i) + 1, rho) * p.b[i];
        double wts = m.omega * p.ts;
        // Backward-difference discretization of 1/(s^2 + 2 zeta w s + w^2).
        double d0 = 1.0 + 2.0 * m.zeta * wts + wts * wts;
        double d1 = -2.0 - 2.0 * m.zeta * wts;
        fp.sections.push_back({{di * ts2}, {d0, d1, 1.0}});
    }
    return fp;
}

std::complex<double> frequency_response(const frozen_plant& fp, double omega) {
    if (!(omega > 0.0) || !(omega < std::numbers::pi / fp.ts))
        throw std::out_of_range("frequency_response: omega outside (0, pi/ts)");
    std::complex<double> qinv = std::exp(std::complex<double>(0.0, -omega * fp.ts));
    std::complex<double> g = 0.0;
    for (const auto& s : fp.sections) {
        std::complex<double> num = 0.0, den = 0.0, zk = 1.0;
        for (std::size_t k = 0; k < std::max(s.num.size(), s.den.size()); ++k) {
            if (k < s.num.size()) num += s.num[k] * zk;
            if (k < s.den.size()) den += s.den[k] * zk;
            zk *= qinv;
        }
        g += num / den;
    }
    return g;
}

double compliance(const modal_plant& p, double rho) {
    if (rho < 0.0 || rho > p.length) throw std::out_of_range("compliance: rho outside [0, length]");
    double c = 0.0;
    for (std::size_t i = 0; i < p.modes.size(); ++i) {
        double di = mode_shape(p, static_cast<int>(i) + 1, rho) * p.b[i];
        c += di / (p.modes[i].omega * p.modes[i].omega);
    }
    return -p.mass * c;
}

double analytic_snap(const modal_plant& p, double rho) {
    return p.mass * compliance(p, rho);
}

std::vector<double> simulate(const frozen_plant& fp, const std::vector<double>& u) {
    for (double x : u)
        if (!std::isfinite(x)) throw std::invalid_argument("simulate: non-finite input");
    std::vector<double> y(u.size(), 0.0);
    for (const auto& s : fp.sections) {
        auto ys = filter_signal(s, u);
        for (std::size_t k = 0; k < y.size(); ++k) y[k] += ys[k];
    }
    return y;
}

std::vector<double> impulse_response(const frozen_plant& fp, std::size_t n) {
    std::vector<double> h(n, 0.0);
    for (const auto& s : fp.sections) {
        auto hs = impulse_response(s, n);
        for (std::size_t k = 0; k < n; ++k) h[k] += hs[k];
    }
    return h;
}

}  // namespace snapff
