#include "metaqed/eigensolver.hpp"

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "metaqed/errors.hpp"

namespace metaqed {

namespace {

EigenPairs dense_lowest(const SparseMatrix& h, Eigen::Index count) {
    const Eigen::MatrixXd d = Eigen::MatrixXd(h);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(d);
    if (es.info() != Eigen::Success) throw NumericError("dense eigensolver failed");
    EigenPairs out;
    out.values = es.eigenvalues().head(count);
    out.vectors = es.eigenvectors().leftCols(count);
    out.dense = true;
    return out;
}

// Lower bound on the spectrum from Gershgorin discs.
double gershgorin_lower(const SparseMatrix& h) {
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(h.rows());
    Eigen::VectorXd off = Eigen::VectorXd::Zero(h.rows());
    for (Eigen::Index k = 0; k < h.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(h, k); it; ++it) {
            if (it.row() == it.col())
                diag[it.row()] += it.value();
            else
                off[it.row()] += std::abs(it.value());
        }
    return (diag - off).minCoeff();
}

// Orthonormalizes the columns of x against q and among themselves. The
// projection against q is done blockwise, twice. Columns that collapse are
// replaced by fresh random directions so the block keeps its width.
void orthonormalize(const Eigen::MatrixXd& q, Eigen::MatrixXd& x, std::mt19937_64& rng) {
    std::normal_distribution<double> normal;
    if (q.cols() > 0)
        for (int pass = 0; pass < 2; ++pass) x -= q * (q.transpose() * x);
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        for (int attempt = 0; attempt < 4; ++attempt) {
            auto col = x.col(j);
            const double before = col.norm();
            for (int pass = 0; pass < 2; ++pass) {
                if (attempt > 0 && q.cols() > 0) col -= q * (q.transpose() * col);
                if (j > 0) col -= x.leftCols(j) * (x.leftCols(j).transpose() * col);
            }
            const double after = col.norm();
            if (after > 1e-10 * std::max(before, 1e-300)) {
                col /= after;
                break;
            }
            for (Eigen::Index i = 0; i < col.size(); ++i) col[i] = normal(rng);
        }
    }
}

// Smallest Ritz value of a short Lanczos run on h itself. Extremal Ritz
// values converge quickly and are upper bounds of the true minimum.
double lanczos_lower_estimate(const SparseMatrix& h, int steps, std::mt19937_64& rng) {
    const Eigen::Index n = h.rows();
    const Eigen::Index m = std::min<Eigen::Index>(n, steps);
    std::normal_distribution<double> normal;
    Eigen::MatrixXd v(n, m);
    for (Eigen::Index i = 0; i < n; ++i) v(i, 0) = normal(rng);
    v.col(0).normalize();
    Eigen::VectorXd alpha(m), beta = Eigen::VectorXd::Zero(m);
    Eigen::Index used = m;
    for (Eigen::Index j = 0; j < m; ++j) {
        Eigen::VectorXd w = h * v.col(j);
        alpha[j] = v.col(j).dot(w);
        for (int pass = 0; pass < 2; ++pass) w -= v.leftCols(j + 1) * (v.leftCols(j + 1).transpose() * w);
        if (j + 1 == m) break;
        beta[j] = w.norm();
        if (beta[j] < 1e-12) {
            used = j + 1;
            break;
        }
        v.col(j + 1) = w / beta[j];
    }
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(used, used);
    for (Eigen::Index j = 0; j < used; ++j) {
        t(j, j) = alpha[j];
        if (j + 1 < used) t(j, j + 1) = t(j + 1, j) = beta[j];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t, Eigen::EigenvaluesOnly);
    return es.eigenvalues()[0];
}

}  // namespace

EigenPairs lowest_eigenpairs(const SparseMatrix& h, Eigen::Index count,
                             const EigenOptions& opt) {
    const Eigen::Index n = h.rows();
    if (h.cols() != n) throw DomainError("lowest_eigenpairs: matrix must be square");
    if (count < 1 || count > n) throw DomainError("lowest_eigenpairs: invalid eigenpair count");
    if (n <= opt.dense_threshold) return dense_lowest(h, count);

    const Eigen::Index block = std::min<Eigen::Index>(n, count + std::max<Eigen::Index>(8, count / 2));
    double scale = 1.0;
    for (Eigen::Index k = 0; k < h.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(h, k); it; ++it) scale = std::max(scale, std::abs(it.value()));
    // Shift just below the bottom of the spectrum so the wanted eigenvalues
    // dominate the inverted operator. The Gershgorin bound is a safe floor.
    std::mt19937_64 rng(opt.seed);
    const double estimate = lanczos_lower_estimate(h, 80, rng);
    const double shift = std::max(gershgorin_lower(h), estimate - 1e-3 * scale) - 1e-6 * scale;

    SparseMatrix shifted = h;
    for (Eigen::Index i = 0; i < n; ++i) shifted.coeffRef(i, i) -= shift;
    Eigen::SimplicialLDLT<SparseMatrix> ldlt(shifted);
    if (ldlt.info() != Eigen::Success)
        throw NumericError("lowest_eigenpairs: factorization of shifted matrix failed");

    std::normal_distribution<double> normal;
    Eigen::MatrixXd start(n, block);
    for (Eigen::Index j = 0; j < block; ++j)
        for (Eigen::Index i = 0; i < n; ++i) start(i, j) = normal(rng);
    orthonormalize(Eigen::MatrixXd(n, 0), start, rng);

    const Eigen::Index max_cols = std::min<Eigen::Index>(n, block * opt.krylov_blocks);
    double worst = 0.0;
    for (int restart = 0; restart <= opt.max_restarts; ++restart) {
        Eigen::MatrixXd q(n, max_cols);
        q.leftCols(block) = start;
        Eigen::Index cols = block;
        while (cols + block <= max_cols) {
            Eigen::MatrixXd x = ldlt.solve(q.middleCols(cols - block, block));
            orthonormalize(q.leftCols(cols), x, rng);
            q.middleCols(cols, block) = x;
            cols += block;
        }
        const Eigen::MatrixXd basis = q.leftCols(cols);
        const Eigen::MatrixXd hq = h * basis;
        Eigen::MatrixXd t = basis.transpose() * hq;
        t = 0.5 * (t + t.transpose()).eval();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
        if (es.info() != Eigen::Success) throw NumericError("lowest_eigenpairs: Ritz step failed");

        const Eigen::MatrixXd ritz = basis * es.eigenvectors().leftCols(block);
        const Eigen::MatrixXd hritz = hq * es.eigenvectors().leftCols(block);
        worst = 0.0;
        for (Eigen::Index j = 0; j < count; ++j)
            worst = std::max(worst, (hritz.col(j) - es.eigenvalues()[j] * ritz.col(j)).norm());
        if (worst <= opt.tolerance * scale) {
            EigenPairs out;
            out.values = es.eigenvalues().head(count);
            out.vectors = ritz.leftCols(count);
            out.dense = false;
            return out;
        }
        start = ritz;
        orthonormalize(Eigen::MatrixXd(n, 0), start, rng);
    }
    std::ostringstream os;
    os << "lowest_eigenpairs: no convergence after " << opt.max_restarts
       << " restarts (worst residual " << worst << ")";
    throw NumericError(os.str());
}

}  // namespace metaqed
