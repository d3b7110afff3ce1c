#include "snapff/signal.hpp"

#include <cmath>
#include <stdexcept>

#include "snapff/kernels.hpp"

namespace snapff {

namespace {

void check_filter(const rational_filter& f) {
    if (f.num.empty() || f.den.empty())
        throw std::invalid_argument("rational_filter: empty coefficient vector");
    if (f.den[0] == 0.0)
        throw std::invalid_argument("rational_filter: den[0] must be nonzero");
    for (double c : f.num)
        if (!std::isfinite(c)) throw std::invalid_argument("rational_filter: non-finite numerator");
    for (double c : f.den)
        if (!std::isfinite(c)) throw std::invalid_argument("rational_filter: non-finite denominator");
}

}  // namespace

std::vector<double> impulse_response(const rational_filter& f, std::size_t n) {
    check_filter(f);
    std::vector<double> h(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        double acc = (k < f.num.size()) ? f.num[k] : 0.0;
        std::size_t jmax = std::min(k, f.den.size() - 1);
        for (std::size_t j = 1; j <= jmax; ++j) acc -= f.den[j] * h[k - j];
        h[k] = acc / f.den[0];
    }
    return h;
}

std::vector<double> filter_signal(const rational_filter& f, const std::vector<double>& u) {
    check_filter(f);
    for (double x : u)
        if (!std::isfinite(x)) throw std::invalid_argument("filter_signal: non-finite input");
    std::vector<double> y(u.size(), 0.0);
    for (std::size_t k = 0; k < u.size(); ++k) {
        double acc = 0.0;
        std::size_t imax = std::min(k, f.num.size() - 1);
        for (std::size_t i = 0; i <= imax; ++i) acc += f.num[i] * u[k - i];
        std::size_t jmax = std::min(k, f.den.size() - 1);
        for (std::size_t j = 1; j <= jmax; ++j) acc -= f.den[j] * y[k - j];
        y[k] = acc / f.den[0];
    }
    return y;
}

std::vector<double> convolve_truncated(const std::vector<double>& a,
                                       const std::vector<double>& b, std::size_t n) {
    std::vector<double> y(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        // y[k] = sum_{i=0}^{k} a[i] b[k-i], with out-of-range terms zero.
        std::size_t lo = (k + 1 > b.size()) ? k + 1 - b.size() : 0;
        std::size_t hi = std::min(k + 1, a.size());
        double acc = 0.0;
        if (lo < hi) acc = kernels::dot_reverse(a.data() + lo, b.data() + (k - hi + 1), hi - lo);
        y[k] = acc;
    }
    return y;
}

std::vector<double> solve_unit_plus_toeplitz(const std::vector<double>& h,
                                             const std::vector<double>& rhs) {
    if (h.size() < rhs.size())
        throw std::invalid_argument("solve_unit_plus_toeplitz: impulse response shorter than rhs");
    const double diag = 1.0 + (h.empty() ? 0.0 : h[0]);
    if (diag == 0.0) throw std::invalid_argument("solve_unit_plus_toeplitz: singular diagonal");
    double guard = 0.0;
    for (double r : rhs) guard = std::max(guard, std::abs(r));
    guard = 1e9 * (1.0 + guard);
    std::vector<double> e(rhs.size(), 0.0);
    for (std::size_t k = 0; k < rhs.size(); ++k) {
        double acc = kernels::dot_reverse(h.data() + 1, e.data(), k);
        e[k] = (rhs[k] - acc) / diag;
        if (!std::isfinite(e[k]) || std::abs(e[k]) > guard)
            throw std::runtime_error("solve_unit_plus_toeplitz: response diverged (unstable loop)");
    }
    return e;
}

std::vector<double> lifted_lti::apply(const std::vector<double>& u) const {
    if (u.size() != h.size())
        throw std::invalid_argument("lifted_lti::apply: size mismatch");
    std::vector<double> y(u.size(), 0.0);
    for (std::size_t k = 0; k < u.size(); ++k)
        y[k] = kernels::dot_reverse(h.data(), u.data(), k + 1);
    return y;
}

lifted_lti lifted_series(const lifted_lti& a, const lifted_lti& b) {
    if (a.size() != b.size())
        throw std::invalid_argument("lifted_series: size mismatch");
    return {convolve_truncated(a.h, b.h, a.size())};
}

double norm2(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

}  // namespace snapff
