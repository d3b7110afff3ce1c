#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace snapff {

struct gp_hyperparameters {
    double sigma_f2 = 1.0;      // signal variance
    double length_scale = 1.0;  // RBF length scale
    double sigma_n2 = 0.0;      // observation noise variance
};

struct gp_training_set {
    std::vector<double> positions;
    std::vector<double> targets;
};

// Zero-mean GP with squared-exponential kernel
//   k(a, b) = sigma_f2 * exp(-(a-b)^2 / (2 length_scale^2)).
// The training covariance always carries jitter 1e-10*sigma_f2 on top of
// sigma_n2 to keep the Cholesky factorization well posed.
struct gp_model {
    gp_hyperparameters hyp;
    gp_training_set train;
    Eigen::MatrixXd chol_l;  // lower Cholesky factor of K + (sigma_n2 + jitter) I
    Eigen::VectorXd alpha;   // (K + (sigma_n2 + jitter) I)^{-1} y
};

double rbf_kernel(const gp_hyperparameters& h, double a, double b);
Eigen::MatrixXd kernel_matrix(const gp_hyperparameters& h, const std::vector<double>& pa,
                              const std::vector<double>& pb);

gp_model make_gp_model(const gp_hyperparameters& h, const gp_training_set& data);

double log_marginal_likelihood(const gp_hyperparameters& h, const gp_training_set& data);

// Posterior mean and pointwise variance at the query positions. Variances
// are clamped at zero; values below -1e-12*sigma_f2 indicate a broken
// factorization and throw.
void gp_posterior(const gp_model& m, const std::vector<double>& query, Eigen::VectorXd& mean,
                  Eigen::VectorXd& variance);
// Full posterior covariance at the query positions.
Eigen::MatrixXd gp_posterior_cov(const gp_model& m, const std::vector<double>& query);

double estimate_delta(const gp_model& m, double rho);

struct gp_fit_options {
    int starts = 16;
    int evals_per_start = 500;
    unsigned seed = 12345;
};

// Maximize the log marginal likelihood over (sigma_f2, length_scale, sigma_n2)
// in log space: multistart Nelder-Mead followed by a coordinate polish.
// sigma_n2 is floored at 1e-12 * var(targets) to keep the likelihood bounded
// when targets are noiseless.
gp_hyperparameters fit_hyperparameters(const gp_training_set& data, const gp_fit_options& opt);

void save_gp_model(const gp_model& m, const std::string& path);
gp_model load_gp_model(const std::string& path);

}  // namespace snapff
