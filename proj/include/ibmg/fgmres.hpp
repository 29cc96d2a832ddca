#pragma once

// Right-preconditioned flexible GMRES (no restart) on BlockVectors, used both
// as the outer solver and as the fixed-iteration wrapper around smoothers.

#include "ibmg/mac_grid.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <vector>

namespace ibmg {

using BlockOperator = std::function<void(const BlockVector& in, BlockVector& out)>;

struct FgmresResult {
    int iterations = 0;
    /// ||r_k|| / ||b|| for k = 0 .. iterations (Arnoldi estimate).
    std::vector<double> relative_residuals;
    bool converged = false;
    bool breakdown = false;
};

struct FgmresOptions {
    int max_iters = 100;
    /// Relative to ||b||; zero disables the test (fixed iteration count).
    double rtol = 0.0;
    /// Remove the pressure mean from every preconditioned direction and from the result.
    bool project_pressure = true;
};

/// Solves op(x) = b starting from x; precond maps a residual-like vector to a
/// correction. The preconditioner may change from one iteration to the next.
inline FgmresResult fgmres(const BlockOperator& op, const BlockOperator& precond, const BlockVector& b,
                           BlockVector& x, const FgmresOptions& opt)
{
    FgmresResult res;
    const auto& lv = b.level();
    const int m = opt.max_iters;

    BlockVector r(lv);
    op(x, r);
    axpby(1.0, b, -1.0, r);
    const double beta = norm(r);
    double bnorm = norm(b);
    if (bnorm == 0.0) {
        bnorm = 1.0;
    }
    res.relative_residuals.push_back(beta / bnorm);
    if (beta == 0.0 || (opt.rtol > 0.0 && beta / bnorm <= opt.rtol) || m == 0) {
        res.converged = beta == 0.0 || (opt.rtol > 0.0 && beta / bnorm <= opt.rtol);
        return res;
    }

    std::vector<BlockVector> V;
    std::vector<BlockVector> Z;
    V.reserve(std::size_t(m) + 1);
    Z.reserve(std::size_t(m));
    V.push_back(r);
    scale(1.0 / beta, V.back());

    // Hessenberg columns, Givens rotations, and the rotated rhs.
    std::vector<std::vector<double>> H(std::size_t(m), std::vector<double>(std::size_t(m) + 1, 0.0));
    std::vector<double> cs(std::size_t(m), 0.0), sn(std::size_t(m), 0.0), g(std::size_t(m) + 1, 0.0);
    g[0] = beta;

    BlockVector w(lv);
    int k = 0;
    for (; k < m; ++k) {
        Z.emplace_back(lv);
        precond(V[std::size_t(k)], Z.back());
        if (opt.project_pressure) {
            project_pressure_mean(Z.back());
        }
        op(Z.back(), w);
        auto& hk = H[std::size_t(k)];
        for (int i = 0; i <= k; ++i) {
            hk[std::size_t(i)] = block_inner_product(w, V[std::size_t(i)]);
            axpy(-hk[std::size_t(i)], V[std::size_t(i)], w);
        }
        const double hnext = norm(w);
        hk[std::size_t(k) + 1] = hnext;

        for (int i = 0; i < k; ++i) {
            const double a = hk[std::size_t(i)];
            const double c = hk[std::size_t(i) + 1];
            hk[std::size_t(i)] = cs[std::size_t(i)] * a + sn[std::size_t(i)] * c;
            hk[std::size_t(i) + 1] = -sn[std::size_t(i)] * a + cs[std::size_t(i)] * c;
        }
        const double a = hk[std::size_t(k)];
        const double c = hk[std::size_t(k) + 1];
        const double rr = std::hypot(a, c);
        if (rr == 0.0) {
            res.breakdown = true;
            break;
        }
        cs[std::size_t(k)] = a / rr;
        sn[std::size_t(k)] = c / rr;
        hk[std::size_t(k)] = rr;
        hk[std::size_t(k) + 1] = 0.0;
        g[std::size_t(k) + 1] = -sn[std::size_t(k)] * g[std::size_t(k)];
        g[std::size_t(k)] = cs[std::size_t(k)] * g[std::size_t(k)];

        const double rel = std::abs(g[std::size_t(k) + 1]) / bnorm;
        res.relative_residuals.push_back(rel);

        const bool happy = hnext <= 1e3 * std::numeric_limits<double>::epsilon() * rr;
        if ((opt.rtol > 0.0 && rel <= opt.rtol) || happy) {
            res.converged = (opt.rtol > 0.0 && rel <= opt.rtol) || happy;
            ++k;
            break;
        }
        if (k + 1 < m) {
            V.push_back(w);
            scale(1.0 / hnext, V.back());
        }
    }
    res.iterations = k;

    // Back substitution for y, then x += Z y.
    std::vector<double> y(std::size_t(k), 0.0);
    for (int i = k - 1; i >= 0; --i) {
        double s = g[std::size_t(i)];
        for (int j = i + 1; j < k; ++j) {
            s -= H[std::size_t(j)][std::size_t(i)] * y[std::size_t(j)];
        }
        y[std::size_t(i)] = s / H[std::size_t(i)][std::size_t(i)];
    }
    for (int j = 0; j < k; ++j) {
        axpy(y[std::size_t(j)], Z[std::size_t(j)], x);
    }
    if (opt.project_pressure) {
        project_pressure_mean(x);
    }
    return res;
}

} // namespace ibmg
