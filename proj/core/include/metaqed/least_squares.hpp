#pragma once

// Thin wrapper over Eigen's MINPACK-derived Levenberg-Marquardt solver.

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <string>

namespace metaqed {

struct LeastSquaresProblem {
    std::size_t residual_count = 0;
    std::function<void(const Eigen::VectorXd& x, Eigen::VectorXd& residuals)> residuals;
    /// Optional analytic Jacobian (residual_count x parameters). Central
    /// differences are used when empty.
    std::function<void(const Eigen::VectorXd& x, Eigen::MatrixXd& jacobian)> jacobian;
};

struct LeastSquaresOptions {
    int max_evaluations = 4000;
    double ftol = 1e-14;
    double xtol = 1e-14;
    double diff_step = 1e-6;  ///< relative step for numeric Jacobians
};

struct LeastSquaresResult {
    Eigen::VectorXd x;
    double rms = 0.0;
    int evaluations = 0;
    int status = 0;
    bool converged = false;
    std::string message;
};

LeastSquaresResult solve_least_squares(const LeastSquaresProblem& problem, Eigen::VectorXd x0,
                                       const LeastSquaresOptions& options = {});

}  // namespace metaqed
