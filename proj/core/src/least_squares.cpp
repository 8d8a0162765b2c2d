#include "metaqed/least_squares.hpp"

#include <unsupported/Eigen/NonLinearOptimization>

#include <algorithm>
#include <cmath>

namespace metaqed {

namespace {

struct Functor {
    const LeastSquaresProblem* problem;
    Eigen::Index n_inputs;
    double step;
    mutable int evaluations = 0;

    Eigen::Index inputs() const { return n_inputs; }
    Eigen::Index values() const { return static_cast<Eigen::Index>(problem->residual_count); }

    int operator()(const Eigen::VectorXd& x, Eigen::VectorXd& r) const {
        r.resize(values());
        problem->residuals(x, r);
        ++evaluations;
        return r.allFinite() ? 0 : -1;
    }

    int df(const Eigen::VectorXd& x, Eigen::MatrixXd& jac) const {
        jac.resize(values(), inputs());
        if (problem->jacobian) {
            problem->jacobian(x, jac);
            return jac.allFinite() ? 0 : -1;
        }
        Eigen::VectorXd xp = x, xm = x, rp(values()), rm(values());
        for (Eigen::Index j = 0; j < inputs(); ++j) {
            const double h = step * std::max(std::abs(x[j]), 1.0);
            xp[j] = x[j] + h;
            xm[j] = x[j] - h;
            problem->residuals(xp, rp);
            problem->residuals(xm, rm);
            evaluations += 2;
            jac.col(j) = (rp - rm) / (2.0 * h);
            xp[j] = x[j];
            xm[j] = x[j];
        }
        return jac.allFinite() ? 0 : -1;
    }
};

const char* describe(int status) {
    using namespace Eigen::LevenbergMarquardtSpace;
    switch (status) {
        case ImproperInputParameters: return "improper input parameters";
        case RelativeReductionTooSmall: return "relative reduction below ftol";
        case RelativeErrorTooSmall: return "relative step below xtol";
        case RelativeErrorAndReductionTooSmall: return "ftol and xtol satisfied";
        case CosinusTooSmall: return "residual orthogonal to Jacobian";
        case TooManyFunctionEvaluation: return "evaluation budget exhausted";
        case FtolTooSmall: return "ftol too small, no further reduction possible";
        case XtolTooSmall: return "xtol too small, no further improvement possible";
        case GtolTooSmall: return "gtol too small";
        case UserAsked: return "residual evaluation failed";
        default: return "unknown status";
    }
}

}  // namespace

LeastSquaresResult solve_least_squares(const LeastSquaresProblem& problem, Eigen::VectorXd x0,
                                       const LeastSquaresOptions& options) {
    Functor f{&problem, x0.size(), options.diff_step};
    Eigen::LevenbergMarquardt<Functor> lm(f);
    lm.parameters.maxfev = options.max_evaluations;
    lm.parameters.ftol = options.ftol;
    lm.parameters.xtol = options.xtol;
    const int status = lm.minimize(x0);

    LeastSquaresResult out;
    out.x = x0;
    out.status = status;
    out.evaluations = f.evaluations;
    out.message = describe(status);
    Eigen::VectorXd r(f.values());
    problem.residuals(x0, r);
    out.rms = r.size() > 0 ? std::sqrt(r.squaredNorm() / static_cast<double>(r.size())) : 0.0;
    out.converged = std::isfinite(out.rms) &&
                    (status == 1 || status == 2 || status == 3 || status == 4 || status == 6 ||
                     status == 7 || status == 8);
    return out;
}

}  // namespace metaqed
