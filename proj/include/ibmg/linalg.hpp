#pragma once

// Small linear-algebra kernels shared by the smoothers and the coarse solver:
// factorized local solvers (with optional pressure-mean bordering for
// singular saddle-point blocks), symmetric Gauss-Seidel, power iteration, and
// preconditioned Chebyshev iteration.

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <cmath>
#include <functional>
#include <iostream>
#include <memory>
#include <random>
#include <stdexcept>
#include <vector>

namespace ibmg {

using Vector = Eigen::VectorXd;
using LinearMap = std::function<Vector(const Vector&)>;

/// Mean-zero projection over the entries flagged in `mask` (all entries when empty).
inline void project_mean(Vector& x, const std::vector<char>& mask = {})
{
    if (mask.empty()) {
        if (x.size() > 0) {
            x.array() -= x.mean();
        }
        return;
    }
    double s = 0.0;
    int count = 0;
    for (Eigen::Index k = 0; k < x.size(); ++k) {
        if (mask[std::size_t(k)]) {
            s += x[k];
            ++count;
        }
    }
    if (count == 0) {
        return;
    }
    s /= count;
    for (Eigen::Index k = 0; k < x.size(); ++k) {
        if (mask[std::size_t(k)]) {
            x[k] -= s;
        }
    }
}

/// Direct solver for a saddle-point block. With `bordered`, the constant mode
/// over the flagged pressure entries is removed by the augmented system
/// [K c; c^T 0], and the pressure part of the solution is mean-projected.
class LocalSolver {
public:
    LocalSolver() = default;

    LocalSolver(const Eigen::SparseMatrix<double>& K, std::vector<char> pressure_mask, bool bordered, bool dense)
        : mask_(std::move(pressure_mask)), bordered_(bordered), dense_(dense)
    {
        Eigen::SparseMatrix<double> M = bordered_ ? border(K) : K;
        if (dense_) {
            dense_lu_ = std::make_unique<Eigen::PartialPivLU<Eigen::MatrixXd>>(Eigen::MatrixXd(M));
            return;
        }
        sparse_lu_ = std::make_unique<Eigen::SparseLU<Eigen::SparseMatrix<double>>>();
        sparse_lu_->compute(M);
        if (sparse_lu_->info() != Eigen::Success) {
            // Numerically singular block: shift the pressure diagonal.
            const double shift = 1e-12 * max_abs(K);
            Eigen::SparseMatrix<double> S = M;
            for (Eigen::Index k = 0; k < K.rows(); ++k) {
                if (mask_[std::size_t(k)]) {
                    S.coeffRef(k, k) += shift;
                }
            }
            sparse_lu_->compute(S);
            if (sparse_lu_->info() != Eigen::Success) {
                throw std::runtime_error("LocalSolver: factorization failed");
            }
        }
    }

    Eigen::Index size() const { return Eigen::Index(mask_.size()); }

    Vector solve(const Vector& b) const
    {
        Vector rhs = b;
        if (bordered_) {
            rhs.conservativeResize(b.size() + 1);
            rhs[b.size()] = 0.0;
        }
        Vector x = dense_ ? Vector(dense_lu_->solve(rhs)) : Vector(sparse_lu_->solve(rhs));
        if (bordered_) {
            x.conservativeResize(b.size());
            project_mean(x, mask_);
        }
        return x;
    }

private:
    static double max_abs(const Eigen::SparseMatrix<double>& K)
    {
        double m = 0.0;
        for (int c = 0; c < K.outerSize(); ++c) {
            for (Eigen::SparseMatrix<double>::InnerIterator it(K, c); it; ++it) {
                m = std::max(m, std::abs(it.value()));
            }
        }
        return m;
    }

    Eigen::SparseMatrix<double> border(const Eigen::SparseMatrix<double>& K) const
    {
        const auto n = K.rows();
        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(std::size_t(K.nonZeros()) + 2 * mask_.size());
        for (int c = 0; c < K.outerSize(); ++c) {
            for (Eigen::SparseMatrix<double>::InnerIterator it(K, c); it; ++it) {
                trip.emplace_back(int(it.row()), int(it.col()), it.value());
            }
        }
        // Scale the border like the matrix so pivoting stays balanced.
        const double s = max_abs(K);
        for (Eigen::Index k = 0; k < n; ++k) {
            if (mask_[std::size_t(k)]) {
                trip.emplace_back(int(k), int(n), s);
                trip.emplace_back(int(n), int(k), s);
            }
        }
        Eigen::SparseMatrix<double> M(n + 1, n + 1);
        M.setFromTriplets(trip.begin(), trip.end());
        return M;
    }

    std::vector<char> mask_;
    bool bordered_ = false;
    bool dense_ = false;
    std::unique_ptr<Eigen::PartialPivLU<Eigen::MatrixXd>> dense_lu_;
    std::unique_ptr<Eigen::SparseLU<Eigen::SparseMatrix<double>>> sparse_lu_;
};

using CsrMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// One forward and one backward Gauss-Seidel sweep for K z = r from z = 0.
class SymmetricGaussSeidel {
public:
    SymmetricGaussSeidel() = default;
    explicit SymmetricGaussSeidel(const CsrMatrix& K)
        : K_(&K), inv_diag_(K.rows())
    {
        for (int r = 0; r < K.outerSize(); ++r) {
            double d = 0.0;
            for (CsrMatrix::InnerIterator it(K, r); it; ++it) {
                if (it.col() == r) {
                    d = it.value();
                }
            }
            if (d == 0.0) {
                throw std::runtime_error("SymmetricGaussSeidel: zero diagonal");
            }
            inv_diag_[r] = 1.0 / d;
        }
    }

    Vector apply(const Vector& r) const
    {
        const CsrMatrix& K = *K_;
        Vector z = Vector::Zero(r.size());
        const int n = int(K.rows());
        for (int i = 0; i < n; ++i) {
            z[i] = inv_diag_[i] * (r[i] - off_diagonal_dot(i, z));
        }
        for (int i = n - 1; i >= 0; --i) {
            z[i] = inv_diag_[i] * (r[i] - off_diagonal_dot(i, z));
        }
        return z;
    }

private:
    double off_diagonal_dot(int i, const Vector& z) const
    {
        double s = 0.0;
        for (CsrMatrix::InnerIterator it(*K_, i); it; ++it) {
            if (it.col() != i) {
                s += it.value() * z[it.col()];
            }
        }
        return s;
    }

    const CsrMatrix* K_ = nullptr;
    Vector inv_diag_;
};

/// Largest eigenvalue estimate of precond * op by power iteration from a
/// seeded start vector; returns a non-positive value when the estimate failed.
inline double estimate_lambda_max(const LinearMap& op, const LinearMap& precond, Eigen::Index n, int iters,
                                  const std::function<void(Vector&)>& project = {})
{
    std::mt19937_64 rng(0x1b3c5d7f);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Vector x(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        x[k] = dist(rng);
    }
    if (project) project(x);
    double nx = x.norm();
    if (!(nx > 0.0)) {
        return -1.0;
    }
    x /= nx;
    double lambda = -1.0;
    for (int it = 0; it < iters; ++it) {
        Vector y = precond(op(x));
        if (project) project(y);
        const double ny = y.norm();
        if (!std::isfinite(ny) || ny == 0.0) {
            return -1.0;
        }
        lambda = ny;
        x = y / ny;
    }
    return lambda;
}

/// Preconditioned Chebyshev iteration on [lambda_min, lambda_max] with a zero
/// initial guess; a fixed linear map of the right-hand side.
class Chebyshev {
public:
    Chebyshev() = default;
    Chebyshev(LinearMap op, LinearMap precond, double lambda_min, double lambda_max, int iters,
              std::function<void(Vector&)> project = {})
        : op_(std::move(op)), precond_(std::move(precond)), project_(std::move(project)),
          lmin_(lambda_min), lmax_(lambda_max), iters_(iters)
    {
        if (iters_ < 1 || !(lmax_ > lmin_) || !(lmin_ > 0.0)) {
            throw std::invalid_argument("Chebyshev: invalid configuration");
        }
    }

    Vector apply(const Vector& b) const
    {
        const double theta = 0.5 * (lmax_ + lmin_);
        const double delta = 0.5 * (lmax_ - lmin_);
        const double sigma = theta / delta;
        double rho = 1.0 / sigma;
        Vector d = precond(b) / theta;
        Vector x = d;
        for (int k = 1; k < iters_; ++k) {
            Vector r = b - op_(x);
            const double rho_next = 1.0 / (2.0 * sigma - rho);
            d = (rho_next * rho) * d + (2.0 * rho_next / delta) * precond(r);
            x += d;
            rho = rho_next;
        }
        if (project_) project_(x);
        return x;
    }

    double lambda_min() const { return lmin_; }
    double lambda_max() const { return lmax_; }

private:
    Vector precond(const Vector& r) const
    {
        Vector z = precond_(r);
        if (project_) project_(z);
        return z;
    }

    LinearMap op_;
    LinearMap precond_;
    std::function<void(Vector&)> project_;
    double lmin_ = 0.0;
    double lmax_ = 1.0;
    int iters_ = 1;
};

} // namespace ibmg
