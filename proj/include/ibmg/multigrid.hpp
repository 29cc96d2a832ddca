#pragma once

// Geometric multigrid V-cycle over a SystemHierarchy with a direct solve on
// the coarsest level.

#include "ibmg/grid_transfer.hpp"
#include "ibmg/linalg.hpp"
#include "ibmg/smoothers.hpp"
#include "ibmg/stokes_ib_system.hpp"

#include <memory>
#include <stdexcept>
#include <vector>

namespace ibmg {

/// Dense LU of a level's L_IB bordered by the pressure-mean constraint.
class CoarseSolver {
public:
    explicit CoarseSolver(const StokesIBLevelSystem& sys)
        : sys_(sys)
    {
        const auto nv = sys.dofs().velocity_size();
        std::vector<char> mask(sys.dofs().size());
        for (std::size_t k = nv; k < mask.size(); ++k) {
            mask[k] = 1;
        }
        solver_ = LocalSolver(Eigen::SparseMatrix<double>(sys.matrix()), std::move(mask), true, true);
    }

    BlockVector solve(const BlockVector& b) const
    {
        BlockVector rhs = b;
        project_pressure_mean(rhs);
        BlockVector x(b.level());
        sys_.scatter(solver_.solve(sys_.gather(rhs)), x);
        return x;
    }

private:
    const StokesIBLevelSystem& sys_;
    LocalSolver solver_;
};

inline BlockVector coarse_solve(const StokesIBLevelSystem& sys, const BlockVector& b)
{
    return CoarseSolver(sys).solve(b);
}

struct MultigridOptions {
    int nu1 = 1;
    int nu2 = 1;

    void validate() const
    {
        if (nu1 < 0 || nu2 < 0 || nu1 + nu2 < 1) {
            throw std::invalid_argument("multigrid: need nu1, nu2 >= 0 and nu1 + nu2 >= 1");
        }
    }
};

/// Smoothers for every non-coarsest level plus the coarse factorization.
class MultigridPreconditioner {
public:
    MultigridPreconditioner(const SystemHierarchy& hier, const SmootherConfig& smoother, MultigridOptions opt = {})
        : hier_(hier), opt_(opt), coarse_(hier.level(0))
    {
        opt_.validate();
        smoothers_.resize(std::size_t(hier.n_levels()));
        for (int l = 1; l < hier.n_levels(); ++l) {
            smoothers_[std::size_t(l)] = std::make_unique<LevelSmoother>(hier.level(l), smoother);
        }
    }

    /// Replaces the smoother on level l >= 1.
    void set_smoother(int l, std::unique_ptr<LevelSmoother> s)
    {
        if (l < 1 || l >= hier_.n_levels()) {
            throw std::out_of_range("set_smoother: level out of range");
        }
        smoothers_[std::size_t(l)] = std::move(s);
    }

    const SystemHierarchy& hierarchy() const { return hier_; }
    const MultigridOptions& options() const { return opt_; }
    const LevelSmoother& smoother(int l) const { return *smoothers_.at(std::size_t(l)); }

    /// One V-cycle on the finest level starting from w.
    BlockVector cycle(const BlockVector& w, const BlockVector& b) const
    {
        BlockVector x = w;
        cycle_level(hier_.n_levels() - 1, x, b);
        return x;
    }

    /// Preconditioner action: one V-cycle from a zero initial guess.
    void apply(const BlockVector& r, BlockVector& z) const
    {
        z = BlockVector(r.level());
        cycle_level(hier_.n_levels() - 1, z, r);
    }

private:
    void cycle_level(int l, BlockVector& w, const BlockVector& b) const
    {
        const auto& sys = hier_.level(l);
        if (l == 0) {
            // Exact coarse solve of the error equation.
            const BlockVector r = sys.residual(w, b);
            axpy(1.0, coarse_.solve(r), w);
            project_pressure_mean(w);
            return;
        }
        const auto& sm = *smoothers_[std::size_t(l)];
        if (opt_.nu1 > 0) {
            sm.smooth(w, b, opt_.nu1);
        }
        const auto& coarse_level = hier_.level(l - 1).level();
        BlockVector rc = restrict_block(coarse_level, sys.residual(w, b));
        project_pressure_mean(rc);
        BlockVector ec(coarse_level);
        cycle_level(l - 1, ec, rc);
        axpy(1.0, prolong_block(sys.level(), ec), w);
        if (opt_.nu2 > 0) {
            sm.smooth(w, b, opt_.nu2);
        }
    }

    const SystemHierarchy& hier_;
    MultigridOptions opt_;
    CoarseSolver coarse_;
    std::vector<std::unique_ptr<LevelSmoother>> smoothers_;
};

/// One V-cycle with freshly built smoothers (convenience; prefer a cached
/// MultigridPreconditioner for repeated cycles).
inline BlockVector v_cycle(const SystemHierarchy& hier, const SmootherConfig& smoother, const BlockVector& w,
                           const BlockVector& b, int nu1, int nu2)
{
    MultigridPreconditioner mg(hier, smoother, MultigridOptions{nu1, nu2});
    return mg.cycle(w, b);
}

} // namespace ibmg
