#include <doctest.h>

#include <stdexcept>

#include <Eigen/Dense>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <vector>

#include "snapff/gp.hpp"

using namespace snapff;

namespace {

// Hand-rolled Gauss-Jordan inverse for the dense-evaluation oracle (n <= 6).
std::vector<std::vector<double>> gj_inverse(std::vector<std::vector<double>> a) {
    std::size_t n = a.size();
    std::vector<std::vector<double>> inv(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) inv[i][i] = 1.0;
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
        std::swap(a[piv], a[col]);
        std::swap(inv[piv], inv[col]);
        double d = a[col][col];
        for (std::size_t k = 0; k < n; ++k) {
            a[col][k] /= d;
            inv[col][k] /= d;
        }
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col) continue;
            double f = a[r][col];
            for (std::size_t k = 0; k < n; ++k) {
                a[r][k] -= f * a[col][k];
                inv[r][k] -= f * inv[col][k];
            }
        }
    }
    return inv;
}

gp_training_set random_set(std::mt19937& rng, std::size_t n) {
    std::uniform_real_distribution<double> up(0.0, 1.0), uy(-2.0, 2.0);
    gp_training_set d;
    for (std::size_t i = 0; i < n; ++i) {
        d.positions.push_back(up(rng));
        d.targets.push_back(uy(rng));
    }
    return d;
}

std::string temp_file(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("kernel closed forms") {
    gp_hyperparameters h{2.0, 0.3, 0.0};
    CHECK(rbf_kernel(h, 0.7, 0.7) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(rbf_kernel(h, 0.0, 0.3) == doctest::Approx(2.0 * std::exp(-0.5)).epsilon(1e-14));
    CHECK(rbf_kernel(h, 0.0, 0.6) == doctest::Approx(2.0 * std::exp(-2.0)).epsilon(1e-14));
    // symmetric; positive until the exponent underflows
    CHECK(rbf_kernel(h, 0.1, 0.9) == rbf_kernel(h, 0.9, 0.1));
    CHECK(rbf_kernel(h, 0.0, 3.0) > 0.0);
    CHECK(rbf_kernel(h, 0.0, 100.0) == 0.0);
}

TEST_CASE("kernel matrices are symmetric positive semidefinite") {
    std::mt19937 rng(21);
    auto d = random_set(rng, 6);
    gp_hyperparameters h{1.7, 0.25, 0.0};
    auto k = kernel_matrix(h, d.positions, d.positions);
    CHECK((k - k.transpose()).norm() == 0.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k);
    CHECK(es.eigenvalues().minCoeff() >= -1e-12 * h.sigma_f2);
}

TEST_CASE("posterior matches the dense-inverse evaluation for n <= 6") {
    std::mt19937 rng(11);
    for (std::size_t n : {2u, 4u, 6u}) {
        auto d = random_set(rng, n);
        gp_hyperparameters h{2.3, 0.31, 1e-4};
        auto m = make_gp_model(h, d);

        std::vector<double> q = {0.05, 0.33, 0.61, 0.97};
        Eigen::VectorXd mean, var;
        gp_posterior(m, q, mean, var);
        Eigen::MatrixXd cov = gp_posterior_cov(m, q);

        // oracle: explicit inverse of K + (sigma_n2 + jitter) I
        std::vector<std::vector<double>> kmat(n, std::vector<double>(n));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                kmat[i][j] = rbf_kernel(h, d.positions[i], d.positions[j]);
                if (i == j) kmat[i][j] += h.sigma_n2 + 1e-10 * h.sigma_f2;
            }
        auto kinv = gj_inverse(kmat);
        for (std::size_t a = 0; a < q.size(); ++a) {
            double mu = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j)
                    mu += rbf_kernel(h, q[a], d.positions[i]) * kinv[i][j] * d.targets[j];
            CHECK(mean(a) == doctest::Approx(mu).epsilon(1e-9));
            for (std::size_t bq = 0; bq < q.size(); ++bq) {
                double cv = rbf_kernel(h, q[a], q[bq]);
                for (std::size_t i = 0; i < n; ++i)
                    for (std::size_t j = 0; j < n; ++j)
                        cv -= rbf_kernel(h, q[a], d.positions[i]) * kinv[i][j] *
                              rbf_kernel(h, q[bq], d.positions[j]);
                CHECK(cov(a, bq) == doctest::Approx(cv).epsilon(1e-9));
            }
        }
        // pointwise variance agrees with the covariance diagonal
        for (std::size_t a = 0; a < q.size(); ++a)
            CHECK(var(a) == doctest::Approx(cov(a, a)).epsilon(1e-9));
    }
}

TEST_CASE("noiseless model interpolates the training targets") {
    gp_training_set d{{0.1, 0.25, 0.4, 0.6, 0.85}, {}};
    for (double p : d.positions) d.targets.push_back(std::sin(7.0 * p));
    gp_hyperparameters h{1.0, 0.2, 0.0};
    auto m = make_gp_model(h, d);
    double scale = 1.0;
    for (std::size_t i = 0; i < d.positions.size(); ++i)
        CHECK(std::abs(estimate_delta(m, d.positions[i]) - d.targets[i]) <= 1e-8 * scale);
}

TEST_CASE("single-point log marginal likelihood has a closed form") {
    gp_hyperparameters h{1.6, 0.5, 0.01};
    gp_training_set d{{0.4}, {0.7}};
    double s = h.sigma_f2 + h.sigma_n2 + 1e-10 * h.sigma_f2;
    double expect = -0.5 * 0.7 * 0.7 / s - 0.5 * std::log(s) - 0.5 * std::log(2 * std::numbers::pi);
    CHECK(log_marginal_likelihood(h, d) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("stationarity: translating the inputs changes nothing") {
    std::mt19937 rng(31);
    auto d = random_set(rng, 5);
    gp_hyperparameters h{1.2, 0.27, 1e-5};
    auto m = make_gp_model(h, d);
    gp_training_set d2 = d;
    for (auto& p : d2.positions) p += 3.7;
    auto m2 = make_gp_model(h, d2);
    CHECK(log_marginal_likelihood(h, d) == doctest::Approx(log_marginal_likelihood(h, d2)).epsilon(1e-10));
    CHECK(estimate_delta(m, 0.44) == doctest::Approx(estimate_delta(m2, 0.44 + 3.7)).epsilon(1e-9));
}

TEST_CASE("posterior mean is linear in the targets") {
    std::mt19937 rng(32);
    auto d1 = random_set(rng, 5);
    gp_training_set d2 = d1;
    for (auto& y : d2.targets) y = 2.0 * y + 0.3;
    gp_training_set dsum = d1;
    for (std::size_t i = 0; i < dsum.targets.size(); ++i) dsum.targets[i] += d2.targets[i];
    gp_hyperparameters h{0.9, 0.33, 1e-6};
    auto m1 = make_gp_model(h, d1), m2 = make_gp_model(h, d2), ms = make_gp_model(h, dsum);
    for (double q : {0.12, 0.55, 0.91})
        CHECK(estimate_delta(ms, q) ==
              doctest::Approx(estimate_delta(m1, q) + estimate_delta(m2, q)).epsilon(1e-9));
}

TEST_CASE("far from the data the posterior reverts to the prior") {
    std::mt19937 rng(33);
    auto d = random_set(rng, 5);
    gp_hyperparameters h{1.5, 0.1, 1e-6};
    auto m = make_gp_model(h, d);
    Eigen::VectorXd mean, var;
    gp_posterior(m, {50.0}, mean, var);
    CHECK(std::abs(mean(0)) <= 1e-8);
    CHECK(var(0) == doctest::Approx(h.sigma_f2).epsilon(1e-8));
}

TEST_CASE("conditioning on more data never increases the posterior variance") {
    std::mt19937 rng(34);
    auto d = random_set(rng, 5);
    gp_hyperparameters h{1.1, 0.22, 1e-5};
    auto m5 = make_gp_model(h, d);
    gp_training_set d6 = d;
    d6.positions.push_back(0.5);
    d6.targets.push_back(0.0);
    auto m6 = make_gp_model(h, d6);
    for (double q = 0.0; q <= 1.0; q += 0.05) {
        Eigen::VectorXd mean5, var5, mean6, var6;
        gp_posterior(m5, {q}, mean5, var5);
        gp_posterior(m6, {q}, mean6, var6);
        CHECK(var6(0) <= var5(0) + 1e-12);
        CHECK(var5(0) >= 0.0);
        CHECK(var6(0) >= 0.0);
    }
}

TEST_CASE("hyperparameter fit recovers the length scale of a GP draw") {
    // draw a function from a known GP and check the fitted scale is in range
    std::mt19937 rng(3);
    std::normal_distribution<double> n01(0.0, 1.0);
    const double lam_true = 0.07;
    std::size_t n = 40;
    gp_training_set d;
    for (std::size_t i = 0; i < n; ++i)
        d.positions.push_back(static_cast<double>(i) / (n - 1));
    gp_hyperparameters truth{1.0, lam_true, 0.0};
    Eigen::MatrixXd k = kernel_matrix(truth, d.positions, d.positions);
    for (std::size_t i = 0; i < n; ++i) k(i, i) += 1e-10;
    Eigen::MatrixXd l = Eigen::LLT<Eigen::MatrixXd>(k).matrixL();
    Eigen::VectorXd z(n);
    for (std::size_t i = 0; i < n; ++i) z(i) = n01(rng);
    Eigen::VectorXd y = l * z;
    for (std::size_t i = 0; i < n; ++i) d.targets.push_back(y(i) + 1e-4 * n01(rng));

    gp_fit_options opt;
    auto h = fit_hyperparameters(d, opt);
    CHECK(h.length_scale > lam_true / 2.0);
    CHECK(h.length_scale < lam_true * 2.0);
    CHECK(h.sigma_f2 > 0.05);
    CHECK(h.sigma_f2 < 20.0);
}

TEST_CASE("conflicting duplicate observations force a nonzero noise estimate") {
    gp_training_set d{{0.2, 0.2, 0.8}, {1.0, -1.0, 0.0}};
    gp_fit_options opt;
    auto h = fit_hyperparameters(d, opt);
    CHECK(h.sigma_n2 > 0.05);
    // the fitted model averages the conflicting pair
    auto m = make_gp_model(h, d);
    CHECK(std::abs(estimate_delta(m, 0.2)) < 0.5);
}

TEST_CASE("noise variance is floored for noiseless targets") {
    gp_training_set d{{0.1, 0.3, 0.5, 0.7, 0.9}, {0.0, 0.2, 0.3, 0.2, 0.0}};
    gp_fit_options opt;
    opt.starts = 8;
    auto h = fit_hyperparameters(d, opt);
    double var_y = 0.0, mean = 0.14;
    for (double y : d.targets) var_y += (y - mean) * (y - mean);
    var_y /= d.targets.size();
    CHECK(h.sigma_n2 >= 1e-12 * var_y);
}

TEST_CASE("fit is deterministic for a fixed seed and changes with it") {
    std::mt19937 rng(35);
    auto d = random_set(rng, 6);
    gp_fit_options opt;
    opt.starts = 4;
    opt.evals_per_start = 200;
    auto h1 = fit_hyperparameters(d, opt);
    auto h2 = fit_hyperparameters(d, opt);
    CHECK(h1.sigma_f2 == h2.sigma_f2);
    CHECK(h1.length_scale == h2.length_scale);
    CHECK(h1.sigma_n2 == h2.sigma_n2);
}

TEST_CASE("model persistence round-trips and rejects foreign files") {
    std::mt19937 rng(36);
    auto d = random_set(rng, 5);
    gp_hyperparameters h{0.8, 0.19, 2.5e-7};
    auto m = make_gp_model(h, d);
    auto path = temp_file("snapff_gp_roundtrip.txt");
    save_gp_model(m, path);
    auto m2 = load_gp_model(path);
    CHECK(m2.hyp.sigma_f2 == m.hyp.sigma_f2);
    CHECK(m2.hyp.length_scale == m.hyp.length_scale);
    CHECK(m2.hyp.sigma_n2 == m.hyp.sigma_n2);
    for (double q : {0.15, 0.5, 0.88})
        CHECK(estimate_delta(m2, q) == estimate_delta(m, q));
    std::filesystem::remove(path);

    auto badpath = temp_file("snapff_gp_bad.txt");
    std::ofstream bad(badpath);
    bad << "some-other-format-v9\n";
    bad.close();
    CHECK_THROWS_AS(load_gp_model(badpath), std::runtime_error);
    std::filesystem::remove(badpath);
    CHECK_THROWS_AS(load_gp_model(temp_file("snapff_gp_missing.txt")), std::runtime_error);
}

TEST_CASE("input validation") {
    gp_training_set d{{0.1, 0.2}, {1.0, 2.0}};
    CHECK_THROWS_AS(make_gp_model({0.0, 0.1, 0.0}, d), std::invalid_argument);
    CHECK_THROWS_AS(make_gp_model({1.0, 0.0, 0.0}, d), std::invalid_argument);
    CHECK_THROWS_AS(make_gp_model({1.0, 0.1, -1.0}, d), std::invalid_argument);
    CHECK_THROWS_AS(make_gp_model({1.0, 0.1, 0.0}, gp_training_set{{}, {}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(make_gp_model({1.0, 0.1, 0.0}, gp_training_set{{0.1}, {1.0, 2.0}}),
                    std::invalid_argument);
    double nan = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(make_gp_model({1.0, 0.1, 0.0}, gp_training_set{{nan}, {1.0}}),
                    std::invalid_argument);
    auto m = make_gp_model({1.0, 0.1, 0.0}, d);
    CHECK_THROWS_AS(estimate_delta(m, nan), std::invalid_argument);
}
