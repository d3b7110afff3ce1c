#pragma once

#include <cstddef>
#include <vector>

namespace snapff {

// Rational discrete-time transfer function in powers of q^-1:
//   H(q^-1) = (num[0] + num[1] q^-1 + ...) / (den[0] + den[1] q^-1 + ...)
// den[0] must be nonzero (causal, implementable filter).
struct rational_filter {
    std::vector<double> num;
    std::vector<double> den;
};

// First n samples of the impulse response of f.
std::vector<double> impulse_response(const rational_filter& f, std::size_t n);

// Filter u through f (direct form, zero initial conditions).
std::vector<double> filter_signal(const rational_filter& f, const std::vector<double>& u);

// Causal convolution truncated to n samples: y[k] = sum_{i<=k} a[i] b[k-i].
std::vector<double> convolve_truncated(const std::vector<double>& a,
                                       const std::vector<double>& b, std::size_t n);

// Solve (I + T(h)) e = rhs by forward substitution, where T(h) is the
// lower-triangular Toeplitz matrix with first column h (h[0] on the
// diagonal). Requires h.size() >= rhs.size() entries available; only the
// first rhs.size() entries of h are used. Throws on blow-up (|e| > guard).
std::vector<double> solve_unit_plus_toeplitz(const std::vector<double>& h,
                                             const std::vector<double>& rhs);

// Finite-horizon LTI system in lifted form: the N x N lower-triangular
// Toeplitz matrix whose first column is the impulse response h.
struct lifted_lti {
    std::vector<double> h;

    std::size_t size() const { return h.size(); }
    // y = T(h) u, truncated to min(size, u.size()) == requires equal sizes.
    std::vector<double> apply(const std::vector<double>& u) const;
};

// Lifted series interconnection: T(a) * T(b) == T(conv(a.h, b.h) truncated).
lifted_lti lifted_series(const lifted_lti& a, const lifted_lti& b);

// Euclidean norm.
double norm2(const std::vector<double>& v);

}  // namespace snapff
