#pragma once

// Four-point regularized delta kernel, force spreading S, velocity
// interpolation J, and the Eulerian elasticity matrix S K J on the finest grid.

#include "ibmg/fiber_structure.hpp"
#include "ibmg/mac_grid.hpp"

#include <Eigen/SparseCore>

#include <array>
#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ibmg {

/// Peskin's four-point kernel function.
inline double phi(double r)
{
    const double a = std::abs(r);
    if (a < 1.0) {
        return 0.125 * (3.0 - 2.0 * a + std::sqrt(1.0 + 4.0 * a - 4.0 * a * a));
    }
    if (a < 2.0) {
        return 0.125 * (5.0 - 2.0 * a - std::sqrt(-7.0 + 12.0 * a - 4.0 * a * a));
    }
    return 0.0;
}

/// Per-node 4 x 4 kernel stencils for both velocity components, frozen at the
/// configuration passed to the constructor.
class CouplingOperators {
public:
    struct Stencil {
        int i0 = 0;
        int j0 = 0;
        std::array<double, 4> wx{};
        std::array<double, 4> wy{};
    };

    CouplingOperators(const StaggeredLevel& level, std::span<const FiberMesh> meshes)
        : level_(level)
    {
        const double h = level.h();
        const int n = level.n();
        for (const auto& mesh : meshes) {
            for (std::size_t k = 0; k < mesh.n_nodes(); ++k) {
                const Point X = mesh.position(k);
                const double wall_dist = std::min({X.x, X.y, 1.0 - X.x, 1.0 - X.y});
                if (!(wall_dist >= 2.0 * h)) {
                    throw std::invalid_argument(
                        "CouplingOperators: Lagrangian node within 2h of the boundary at (" +
                        std::to_string(X.x) + ", " + std::to_string(X.y) + ")");
                }
                const double sx = X.x / h;
                const double sy = X.y / h;
                u1_.push_back(make_stencil(sx, sy - 0.5));
                u2_.push_back(make_stencil(sx - 0.5, sy));
                weight_.push_back(mesh.ds1 * mesh.ds2);
            }
        }
        for (std::size_t k = 0; k < u1_.size(); ++k) {
            if (u1_[k].i0 < 0 || u1_[k].i0 + 3 > n || u1_[k].j0 < 0 || u1_[k].j0 + 3 > n - 1 ||
                u2_[k].i0 < 0 || u2_[k].i0 + 3 > n - 1 || u2_[k].j0 < 0 || u2_[k].j0 + 3 > n) {
                throw std::logic_error("CouplingOperators: stencil outside grid");
            }
        }
    }

    const StaggeredLevel& level() const { return level_; }
    std::size_t n_nodes() const { return u1_.size(); }
    std::size_t n_dofs() const { return 2 * u1_.size(); }
    const Stencil& u1_stencil(std::size_t node) const { return u1_[node]; }
    const Stencil& u2_stencil(std::size_t node) const { return u2_[node]; }
    /// ds1 * ds2 of the node's mesh.
    double quadrature_weight(std::size_t node) const { return weight_[node]; }

    /// f = S F: velocity-sized Eulerian force density.
    std::vector<double> spread(std::span<const double> F) const
    {
        if (F.size() != n_dofs()) {
            throw std::invalid_argument("spread: shape mismatch");
        }
        std::vector<double> f(level_.velocity_size(), 0.0);
        const double ih2 = 1.0 / (level_.h() * level_.h());
        for (std::size_t k = 0; k < n_nodes(); ++k) {
            const double scale = weight_[k] * ih2;
            for_each_face(k, [&](std::size_t face, double w, int d) {
                f[face] += F[2 * k + d] * w * scale;
            });
        }
        return f;
    }

    /// U = J u: interleaved node velocities.
    std::vector<double> interpolate(std::span<const double> u) const
    {
        if (u.size() != level_.velocity_size()) {
            throw std::invalid_argument("interpolate: shape mismatch");
        }
        std::vector<double> U(n_dofs(), 0.0);
        for (std::size_t k = 0; k < n_nodes(); ++k) {
            for_each_face(k, [&](std::size_t face, double w, int d) { U[2 * k + d] += u[face] * w; });
        }
        return U;
    }

    /// J as a sparse (node DOF x velocity storage) matrix.
    SparseMatrix assemble_J() const
    {
        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(32 * n_nodes());
        for (std::size_t k = 0; k < n_nodes(); ++k) {
            for_each_face(k, [&](std::size_t face, double w, int d) {
                if (w != 0.0) {
                    trip.emplace_back(int(2 * k + d), int(face), w);
                }
            });
        }
        SparseMatrix J(int(n_dofs()), int(level_.velocity_size()));
        J.setFromTriplets(trip.begin(), trip.end());
        return J;
    }

    /// S as a sparse (velocity storage x node DOF) matrix.
    SparseMatrix assemble_S() const
    {
        Eigen::VectorXd w(n_dofs());
        const double ih2 = 1.0 / (level_.h() * level_.h());
        for (std::size_t k = 0; k < n_nodes(); ++k) {
            w[Eigen::Index(2 * k)] = w[Eigen::Index(2 * k + 1)] = weight_[k] * ih2;
        }
        SparseMatrix JT = assemble_J().transpose();
        return JT * w.asDiagonal();
    }

private:
    static Stencil make_stencil(double sx, double sy)
    {
        Stencil s;
        s.i0 = int(std::floor(sx)) - 1;
        s.j0 = int(std::floor(sy)) - 1;
        for (int a = 0; a < 4; ++a) {
            s.wx[a] = phi(sx - (s.i0 + a));
            s.wy[a] = phi(sy - (s.j0 + a));
        }
        return s;
    }

    template <class Fn>
    void for_each_face(std::size_t k, Fn&& fn) const
    {
        const auto& s1 = u1_[k];
        for (int b = 0; b < 4; ++b) {
            for (int a = 0; a < 4; ++a) {
                fn(level_.u1(s1.i0 + a, s1.j0 + b), s1.wx[a] * s1.wy[b], 0);
            }
        }
        const auto& s2 = u2_[k];
        for (int b = 0; b < 4; ++b) {
            for (int a = 0; a < 4; ++a) {
                fn(level_.u2(s2.i0 + a, s2.j0 + b), s2.wx[a] * s2.wy[b], 1);
            }
        }
    }

    StaggeredLevel level_;
    std::vector<Stencil> u1_;
    std::vector<Stencil> u2_;
    std::vector<double> weight_;
};

/// Block-diagonal stiffness over the concatenated node numbering of `meshes`.
inline SparseMatrix assemble_K_matrix(std::span<const FiberMesh> meshes)
{
    std::size_t total = 0;
    for (const auto& m : meshes) {
        total += m.n_dofs();
    }
    std::vector<Eigen::Triplet<double>> trip;
    int offset = 0;
    for (const auto& m : meshes) {
        const SparseMatrix K = assemble_K_matrix(m);
        for (int r = 0; r < K.outerSize(); ++r) {
            for (SparseMatrix::InnerIterator it(K, r); it; ++it) {
                trip.emplace_back(offset + int(it.row()), offset + int(it.col()), it.value());
            }
        }
        offset += int(m.n_dofs());
    }
    SparseMatrix K(static_cast<Eigen::Index>(total), static_cast<Eigen::Index>(total));
    K.setFromTriplets(trip.begin(), trip.end());
    return K;
}

/// Concatenated node coordinates of all meshes.
inline std::vector<double> gather_positions(std::span<const FiberMesh> meshes)
{
    std::vector<double> X;
    for (const auto& m : meshes) {
        X.insert(X.end(), m.X.begin(), m.X.end());
    }
    return X;
}

/// E = S K J over finest-level velocity storage indices.
inline SparseMatrix assemble_SKJ(const CouplingOperators& ops, const SparseMatrix& K)
{
    if (std::size_t(K.rows()) != ops.n_dofs() || std::size_t(K.cols()) != ops.n_dofs()) {
        throw std::invalid_argument("assemble_SKJ: stiffness shape mismatch");
    }
    const SparseMatrix J = ops.assemble_J();
    const SparseMatrix S = ops.assemble_S();
    SparseMatrix KJ = K * J;
    SparseMatrix E = S * KJ;
    E.prune(0.0);
    return E;
}

} // namespace ibmg
