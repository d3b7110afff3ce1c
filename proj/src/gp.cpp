#include "snapff/gp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

namespace snapff {

namespace {

constexpr double k_jitter_rel = 1e-10;
constexpr double k_noise_floor_rel = 1e-12;

void check_hyp(const gp_hyperparameters& h) {
    if (!(h.sigma_f2 > 0.0) || !std::isfinite(h.sigma_f2))
        throw std::invalid_argument("gp: sigma_f2 must be positive");
    if (!(h.length_scale > 0.0) || !std::isfinite(h.length_scale))
        throw std::invalid_argument("gp: length_scale must be positive");
    if (h.sigma_n2 < 0.0 || !std::isfinite(h.sigma_n2))
        throw std::invalid_argument("gp: sigma_n2 must be >= 0");
}

void check_data(const gp_training_set& d) {
    if (d.positions.empty()) throw std::invalid_argument("gp: empty training set");
    if (d.positions.size() != d.targets.size())
        throw std::invalid_argument("gp: positions/targets size mismatch");
    for (double v : d.positions)
        if (!std::isfinite(v)) throw std::invalid_argument("gp: non-finite training position");
    for (double v : d.targets)
        if (!std::isfinite(v)) throw std::invalid_argument("gp: non-finite training target");
}

double variance_of(const std::vector<double>& y) {
    double mean = 0.0;
    for (double v : y) mean += v;
    mean /= static_cast<double>(y.size());
    double var = 0.0;
    for (double v : y) var += (v - mean) * (v - mean);
    return var / static_cast<double>(y.size());
}

Eigen::MatrixXd training_covariance(const gp_hyperparameters& h, const std::vector<double>& p) {
    Eigen::MatrixXd k = kernel_matrix(h, p, p);
    double diag = h.sigma_n2 + k_jitter_rel * h.sigma_f2;
    for (Eigen::Index i = 0; i < k.rows(); ++i) k(i, i) += diag;
    return k;
}

}  // namespace

double rbf_kernel(const gp_hyperparameters& h, double a, double b) {
    double d = (a - b) / h.length_scale;
    return h.sigma_f2 * std::exp(-0.5 * d * d);
}

Eigen::MatrixXd kernel_matrix(const gp_hyperparameters& h, const std::vector<double>& pa,
                              const std::vector<double>& pb) {
    check_hyp(h);
    Eigen::MatrixXd k(static_cast<Eigen::Index>(pa.size()), static_cast<Eigen::Index>(pb.size()));
    for (std::size_t i = 0; i < pa.size(); ++i)
        for (std::size_t j = 0; j < pb.size(); ++j)
            k(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                rbf_kernel(h, pa[i], pb[j]);
    return k;
}

gp_model make_gp_model(const gp_hyperparameters& h, const gp_training_set& data) {
    check_hyp(h);
    check_data(data);
    gp_model m;
    m.hyp = h;
    m.train = data;
    Eigen::LLT<Eigen::MatrixXd> llt(training_covariance(h, data.positions));
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("gp: covariance factorization failed (ill-conditioned)");
    m.chol_l = llt.matrixL();
    Eigen::Map<const Eigen::VectorXd> y(data.targets.data(),
                                        static_cast<Eigen::Index>(data.targets.size()));
    m.alpha = llt.solve(y);
    return m;
}

double log_marginal_likelihood(const gp_hyperparameters& h, const gp_training_set& data) {
    check_hyp(h);
    check_data(data);
    Eigen::LLT<Eigen::MatrixXd> llt(training_covariance(h, data.positions));
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("gp: covariance factorization failed (ill-conditioned)");
    Eigen::Map<const Eigen::VectorXd> y(data.targets.data(),
                                        static_cast<Eigen::Index>(data.targets.size()));
    Eigen::VectorXd alpha = llt.solve(y);
    double logdet_half = 0.0;
    Eigen::MatrixXd l = llt.matrixL();
    for (Eigen::Index i = 0; i < l.rows(); ++i) logdet_half += std::log(l(i, i));
    double n = static_cast<double>(data.positions.size());
    return -0.5 * y.dot(alpha) - logdet_half - 0.5 * n * std::log(2.0 * std::numbers::pi);
}

void gp_posterior(const gp_model& m, const std::vector<double>& query, Eigen::VectorXd& mean,
                  Eigen::VectorXd& variance) {
    for (double v : query)
        if (!std::isfinite(v)) throw std::invalid_argument("gp_posterior: non-finite query");
    Eigen::MatrixXd ks = kernel_matrix(m.hyp, m.train.positions, query);
    mean = ks.transpose() * m.alpha;
    Eigen::MatrixXd v = m.chol_l.triangularView<Eigen::Lower>().solve(ks);
    variance.resize(static_cast<Eigen::Index>(query.size()));
    for (Eigen::Index j = 0; j < variance.size(); ++j) {
        double var = m.hyp.sigma_f2 - v.col(j).squaredNorm();
        if (var < -1e-12 * m.hyp.sigma_f2)
            throw std::runtime_error("gp_posterior: negative variance beyond tolerance");
        variance(j) = std::max(var, 0.0);
    }
}

Eigen::MatrixXd gp_posterior_cov(const gp_model& m, const std::vector<double>& query) {
    Eigen::MatrixXd ks = kernel_matrix(m.hyp, m.train.positions, query);
    Eigen::MatrixXd kss = kernel_matrix(m.hyp, query, query);
    Eigen::MatrixXd v = m.chol_l.triangularView<Eigen::Lower>().solve(ks);
    return kss - v.transpose() * v;
}

double estimate_delta(const gp_model& m, double rho) {
    Eigen::VectorXd mean, var;
    gp_posterior(m, {rho}, mean, var);
    return mean(0);
}

gp_hyperparameters fit_hyperparameters(const gp_training_set& data, const gp_fit_options& opt) {
    check_data(data);
    if (opt.starts < 1 || opt.evals_per_start < 10)
        throw std::invalid_argument("fit_hyperparameters: bad fit options");

    const double var_y = std::max(variance_of(data.targets), 1e-30);
    const double noise_floor = k_noise_floor_rel * var_y;
    double span = 0.0;
    if (data.positions.size() > 1) {
        auto [lo, hi] = std::minmax_element(data.positions.begin(), data.positions.end());
        span = *hi - *lo;
    }
    const double lam0 = (span > 0.0) ? 0.5 * span : 1.0;

    // Objective in log space; failed factorizations get a large penalty so the
    // simplex backs away from degenerate regions.
    auto objective = [&](const Eigen::Vector3d& x) {
        gp_hyperparameters h;
        h.sigma_f2 = std::exp(x(0));
        h.length_scale = std::exp(x(1));
        h.sigma_n2 = std::max(std::exp(x(2)), noise_floor);
        if (!std::isfinite(h.sigma_f2) || !std::isfinite(h.length_scale) ||
            !std::isfinite(h.sigma_n2))
            return 1e300;
        try {
            double lml = log_marginal_likelihood(h, data);
            return std::isfinite(lml) ? -lml : 1e300;
        } catch (const std::exception&) {
            return 1e300;
        }
    };

    std::mt19937 rng(opt.seed);
    std::normal_distribution<double> n01(0.0, 1.0);
    Eigen::Vector3d best_x = Eigen::Vector3d::Zero();
    double best_f = 1e301;

    for (int s = 0; s < opt.starts; ++s) {
        Eigen::Vector3d x0(std::log(var_y) + 2.0 * n01(rng), std::log(lam0) + 1.5 * n01(rng),
                           std::log(var_y * 1e-6) + 3.0 * n01(rng));
        // Nelder-Mead on the 3-dimensional log-parameter space.
        constexpr int dim = 3;
        Eigen::Vector3d pts[dim + 1];
        double fv[dim + 1];
        int evals = 0;
        pts[0] = x0;
        fv[0] = objective(x0);
        ++evals;
        for (int i = 0; i < dim; ++i) {
            pts[i + 1] = x0;
            pts[i + 1](i) += 0.5;
            fv[i + 1] = objective(pts[i + 1]);
            ++evals;
        }
        auto order = [&] {
            for (int i = 0; i <= dim; ++i)
                for (int k = i + 1; k <= dim; ++k)
                    if (fv[k] < fv[i]) {
                        std::swap(fv[i], fv[k]);
                        std::swap(pts[i], pts[k]);
                    }
        };
        while (evals < opt.evals_per_start) {
            order();
            double spread = std::abs(fv[dim] - fv[0]);
            double diam = 0.0;
            for (int i = 1; i <= dim; ++i) diam = std::max(diam, (pts[i] - pts[0]).norm());
            if (spread < 1e-13 && diam < 1e-11) break;
            Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
            for (int i = 0; i < dim; ++i) centroid += pts[i];
            centroid /= static_cast<double>(dim);
            Eigen::Vector3d xr = centroid + (centroid - pts[dim]);
            double fr = objective(xr);
            ++evals;
            if (fr < fv[0]) {
                Eigen::Vector3d xe = centroid + 2.0 * (centroid - pts[dim]);
                double fe = objective(xe);
                ++evals;
                if (fe < fr) { pts[dim] = xe; fv[dim] = fe; }
                else { pts[dim] = xr; fv[dim] = fr; }
            } else if (fr < fv[dim - 1]) {
                pts[dim] = xr;
                fv[dim] = fr;
            } else {
                Eigen::Vector3d xc = centroid + 0.5 * (pts[dim] - centroid);
                double fc = objective(xc);
                ++evals;
                if (fc < fv[dim]) { pts[dim] = xc; fv[dim] = fc; }
                else {
                    for (int i = 1; i <= dim; ++i) {
                        pts[i] = pts[0] + 0.5 * (pts[i] - pts[0]);
                        fv[i] = objective(pts[i]);
                        ++evals;
                    }
                }
            }
        }
        order();
        if (fv[0] < best_f) {
            best_f = fv[0];
            best_x = pts[0];
        }
    }

    // Coordinate polish around the winning start.
    double step = 0.25;
    for (int round = 0; round < 40 && step > 1e-12; ++round) {
        bool moved = false;
        for (int i = 0; i < 3; ++i) {
            for (double sgn : {+1.0, -1.0}) {
                Eigen::Vector3d cand = best_x;
                cand(i) += sgn * step;
                double fc = objective(cand);
                if (fc < best_f) {
                    best_f = fc;
                    best_x = cand;
                    moved = true;
                }
            }
        }
        if (!moved) step *= 0.5;
    }

    if (best_f >= 1e300)
        throw std::runtime_error("fit_hyperparameters: all starts failed to factorize");
    gp_hyperparameters h;
    h.sigma_f2 = std::exp(best_x(0));
    h.length_scale = std::exp(best_x(1));
    h.sigma_n2 = std::max(std::exp(best_x(2)), noise_floor);
    return h;
}

namespace {

std::string g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

void save_gp_model(const gp_model& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_gp_model: cannot open " + path);
    out << "snapff-gp-model-v1\n";
    out << "sigma_f2 = " << g17(m.hyp.sigma_f2) << "\n";
    out << "length_scale = " << g17(m.hyp.length_scale) << "\n";
    out << "sigma_n2 = " << g17(m.hyp.sigma_n2) << "\n";
    out << "n = " << m.train.positions.size() << "\n";
    for (std::size_t i = 0; i < m.train.positions.size(); ++i)
        out << g17(m.train.positions[i]) << " " << g17(m.train.targets[i]) << "\n";
    if (!out) throw std::runtime_error("save_gp_model: write failed for " + path);
}

gp_model load_gp_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_gp_model: cannot open " + path);
    std::string header;
    std::getline(in, header);
    if (header != "snapff-gp-model-v1")
        throw std::runtime_error("load_gp_model: unsupported model version in " + path);
    auto read_kv = [&](const std::string& key) {
        std::string line;
        if (!std::getline(in, line))
            throw std::runtime_error("load_gp_model: truncated file " + path);
        auto eq = line.find('=');
        if (eq == std::string::npos || line.substr(0, line.find(' ')) != key)
            throw std::runtime_error("load_gp_model: expected key '" + key + "' in " + path);
        return std::stod(line.substr(eq + 1));
    };
    gp_hyperparameters h;
    h.sigma_f2 = read_kv("sigma_f2");
    h.length_scale = read_kv("length_scale");
    h.sigma_n2 = read_kv("sigma_n2");
    std::string nline;
    if (!std::getline(in, nline) || nline.rfind("n =", 0) != 0)
        throw std::runtime_error("load_gp_model: expected training count in " + path);
    std::size_t n = std::stoul(nline.substr(3));
    gp_training_set data;
    for (std::size_t i = 0; i < n; ++i) {
        double p, y;
        if (!(in >> p >> y))
            throw std::runtime_error("load_gp_model: truncated training data in " + path);
        data.positions.push_back(p);
        data.targets.push_back(y);
    }
    return make_gp_model(h, data);
}

}  // namespace snapff
