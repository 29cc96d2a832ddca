#pragma once

// Level operators of the Stokes-IB saddle-point system
//
//   L_IB = [ A - dt E   G ]      E = [S K J] on the finest level,
//          [   -D       0 ]      E^l = R_u E^{l+1} P_u below it,
//
// applied matrix-free and also assembled over the level's unknown numbering.

#include "ibmg/eulerian_operators.hpp"
#include "ibmg/grid_transfer.hpp"
#include "ibmg/mac_grid.hpp"

#include <Eigen/SparseCore>

#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

namespace ibmg {

class StokesIBLevelSystem {
public:
    StokesIBLevelSystem(const StaggeredLevel& level, const FluidParams& fluid, SparseMatrix elasticity)
        : level_(level), fluid_(fluid), E_(std::move(elasticity)), dofs_(level)
    {
        fluid_.validate();
        if (E_.rows() == 0 && E_.cols() == 0) {
            E_.resize(int(level.velocity_size()), int(level.velocity_size()));
        }
        if (std::size_t(E_.rows()) != level.velocity_size() || std::size_t(E_.cols()) != level.velocity_size()) {
            throw std::invalid_argument("StokesIBLevelSystem: elasticity shape mismatch");
        }
        mask_elasticity();
        assemble();
    }

    const StaggeredLevel& level() const { return level_; }
    const FluidParams& fluid() const { return fluid_; }
    double dt() const { return fluid_.dt; }
    const SparseMatrix& elasticity() const { return E_; }
    const DofMap& dofs() const { return dofs_; }

    /// L_IB over the unknown numbering of dofs().
    const SparseMatrix& matrix() const { return L_; }
    /// A_IB = A - dt E over the velocity unknowns (the leading block of matrix()).
    const SparseMatrix& momentum_matrix() const { return A_IB_; }
    /// G restricted to velocity-unknown rows and pressure columns.
    const SparseMatrix& gradient_matrix() const { return G_; }
    const SparseMatrix& divergence_matrix() const { return D_; }

    /// out = L_IB w.
    void apply(const BlockVector& w, BlockVector& out) const
    {
        if (w.level() != level_ || out.level() != level_) {
            throw std::invalid_argument("apply_LIB: shape mismatch");
        }
        auto ou = out.u();
        apply_A(fluid_, level_, w.u(), ou);
        std::vector<double> gp(level_.velocity_size());
        apply_G(level_, w.p(), gp);
        Eigen::Map<const Eigen::VectorXd> uvec(w.u().data(), Eigen::Index(w.u().size()));
        Eigen::VectorXd Eu = E_ * uvec;
        const double dt = fluid_.dt;
        for (std::size_t k = 0; k < ou.size(); ++k) {
            ou[k] += gp[k] - dt * Eu[Eigen::Index(k)];
        }
        apply_D_unknown(w.u(), out.p());
        for (double& v : out.p()) {
            v = -v;
        }
    }

    BlockVector apply(const BlockVector& w) const
    {
        BlockVector out(level_);
        apply(w, out);
        return out;
    }

    /// r = b - L_IB w.
    BlockVector residual(const BlockVector& w, const BlockVector& b) const
    {
        if (b.level() != level_) {
            throw std::invalid_argument("residual: shape mismatch");
        }
        BlockVector r = apply(w);
        axpby(1.0, b, -1.0, r);
        return r;
    }

    /// Storage vector -> unknown vector.
    Eigen::VectorXd gather(const BlockVector& w) const
    {
        Eigen::VectorXd x(Eigen::Index(dofs_.size()));
        for (std::size_t k = 0; k < dofs_.size(); ++k) {
            x[Eigen::Index(k)] = w[std::size_t(dofs_.storage(k))];
        }
        return x;
    }

    void scatter(const Eigen::VectorXd& x, BlockVector& w) const
    {
        w.set_zero();
        for (std::size_t k = 0; k < dofs_.size(); ++k) {
            w[std::size_t(dofs_.storage(k))] = x[Eigen::Index(k)];
        }
    }

private:
    // D applied with wall-normal faces treated as zero.
    void apply_D_unknown(std::span<const double> u, std::span<double> out) const
    {
        const int n = level_.n();
        const double ih = 1.0 / level_.h();
        for (int j = 0; j < n; ++j) {
            for (int i = 0; i < n; ++i) {
                const double e = i + 1 < n ? u[level_.u1(i + 1, j)] : 0.0;
                const double w = i > 0 ? u[level_.u1(i, j)] : 0.0;
                const double t = j + 1 < n ? u[level_.u2(i, j + 1)] : 0.0;
                const double s = j > 0 ? u[level_.u2(i, j)] : 0.0;
                out[level_.p_local(i, j)] = (e - w + t - s) * ih;
            }
        }
    }

    void mask_elasticity()
    {
        std::vector<Eigen::Triplet<double>> trip;
        bool dirty = false;
        for (int r = 0; r < E_.outerSize(); ++r) {
            for (SparseMatrix::InnerIterator it(E_, r); it; ++it) {
                if (level_.is_unknown(std::size_t(it.row())) && level_.is_unknown(std::size_t(it.col()))) {
                    trip.emplace_back(int(it.row()), int(it.col()), it.value());
                }
                else {
                    dirty = true;
                }
            }
        }
        if (dirty) {
            E_.setFromTriplets(trip.begin(), trip.end());
        }
        E_.makeCompressed();
    }

    void assemble()
    {
        const int nu = int(dofs_.size());
        const int nv = int(dofs_.velocity_size());
        const int np = int(level_.pressure_size());
        const auto vel_unknown = [&](std::size_t k) { return dofs_.unknown(k); };
        const auto p_col = [&](std::size_t k) { return int(k - level_.velocity_size()); };

        std::vector<Eigen::Triplet<double>> a_trip, g_trip, d_trip;
        for_each_A_entry(fluid_, level_, [&](std::size_t r, std::size_t c, double v) {
            a_trip.emplace_back(vel_unknown(r), vel_unknown(c), v);
        });
        const double dt = fluid_.dt;
        for (int r = 0; r < E_.outerSize(); ++r) {
            for (SparseMatrix::InnerIterator it(E_, r); it; ++it) {
                a_trip.emplace_back(vel_unknown(std::size_t(it.row())), vel_unknown(std::size_t(it.col())),
                                    -dt * it.value());
            }
        }
        for_each_G_entry(level_, [&](std::size_t r, std::size_t c, double v) {
            g_trip.emplace_back(vel_unknown(r), p_col(c), v);
        });
        for_each_D_entry(level_, [&](std::size_t r, std::size_t c, double v) {
            d_trip.emplace_back(p_col(r), vel_unknown(c), v);
        });

        A_IB_.resize(nv, nv);
        A_IB_.setFromTriplets(a_trip.begin(), a_trip.end());
        G_.resize(nv, np);
        G_.setFromTriplets(g_trip.begin(), g_trip.end());
        D_.resize(np, nv);
        D_.setFromTriplets(d_trip.begin(), d_trip.end());

        std::vector<Eigen::Triplet<double>> l_trip = std::move(a_trip);
        l_trip.reserve(l_trip.size() + g_trip.size() + d_trip.size());
        for (const auto& t : g_trip) {
            l_trip.emplace_back(t.row(), nv + t.col(), t.value());
        }
        for (const auto& t : d_trip) {
            l_trip.emplace_back(nv + t.row(), t.col(), -t.value());
        }
        L_.resize(nu, nu);
        L_.setFromTriplets(l_trip.begin(), l_trip.end());
        L_.makeCompressed();
        A_IB_.makeCompressed();
    }

    StaggeredLevel level_;
    FluidParams fluid_;
    SparseMatrix E_;
    DofMap dofs_;
    SparseMatrix L_;
    SparseMatrix A_IB_;
    SparseMatrix G_;
    SparseMatrix D_;
};

inline BlockVector apply_LIB(const StokesIBLevelSystem& sys, const BlockVector& w) { return sys.apply(w); }

inline BlockVector residual(const StokesIBLevelSystem& sys, const BlockVector& w, const BlockVector& b)
{
    return sys.residual(w, b);
}

/// One system per level; E coarsened by Galerkin triple products, A, G, D
/// rediscretized with each level's spacing (same dt on every level).
class SystemHierarchy {
public:
    SystemHierarchy(const GridHierarchy& grid, const FluidParams& fluid, const SparseMatrix& finest_elasticity)
        : grid_(grid)
    {
        const int L = grid.n_levels();
        std::vector<SparseMatrix> E(static_cast<std::size_t>(L));
        E[std::size_t(L - 1)] = finest_elasticity;
        prolong_.resize(std::size_t(L));
        for (int l = L - 1; l >= 1; --l) {
            const auto& fine = grid.level(l);
            const auto& coarse = grid.level(l - 1);
            prolong_[std::size_t(l)] = assemble_velocity_prolongation(coarse, fine);
            const SparseMatrix& P = prolong_[std::size_t(l)];
            const SparseMatrix R = SparseMatrix(P.transpose()) * 0.25;
            const SparseMatrix& Ef = E[std::size_t(l)];
            if (Ef.nonZeros() == 0) {
                E[std::size_t(l - 1)].resize(int(coarse.velocity_size()), int(coarse.velocity_size()));
            }
            else {
                SparseMatrix EP = Ef * P;
                E[std::size_t(l - 1)] = R * EP;
                E[std::size_t(l - 1)].prune(0.0);
            }
        }
        for (int l = 0; l < L; ++l) {
            systems_.push_back(std::make_unique<StokesIBLevelSystem>(grid.level(l), fluid, std::move(E[std::size_t(l)])));
        }
    }

    const GridHierarchy& grid() const { return grid_; }
    int n_levels() const { return int(systems_.size()); }
    const StokesIBLevelSystem& level(int l) const { return *systems_.at(std::size_t(l)); }
    const StokesIBLevelSystem& finest() const { return *systems_.back(); }
    /// P_u from level l-1 to level l (l >= 1).
    const SparseMatrix& velocity_prolongation(int l) const { return prolong_.at(std::size_t(l)); }

private:
    GridHierarchy grid_;
    std::vector<std::unique_ptr<StokesIBLevelSystem>> systems_;
    std::vector<SparseMatrix> prolong_;
};

inline SystemHierarchy build_hierarchy_systems(const GridHierarchy& grid, const FluidParams& fluid,
                                               const SparseMatrix& finest_elasticity)
{
    return SystemHierarchy(grid, fluid, finest_elasticity);
}

} // namespace ibmg
