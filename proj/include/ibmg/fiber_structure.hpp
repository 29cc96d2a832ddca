#pragma once

// Lagrangian fiber meshes and the linear fiber force F = alpha d^2X/ds1^2
// (zero-rest-length fibers).
//
// Node (l, m) of a mesh has flat index k = m * M1 + l; coordinate arrays are
// interleaved, entry 2k holds x and 2k + 1 holds y.

#include "ibmg/mac_grid.hpp"

#include <Eigen/SparseCore>

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ibmg {

enum class Geometry { thick, thin, suspension };

inline std::string to_string(Geometry g)
{
    switch (g) {
    case Geometry::thick: return "thick";
    case Geometry::thin: return "thin";
    case Geometry::suspension: return "suspension";
    }
    return "?";
}

inline Geometry parse_geometry(const std::string& s)
{
    if (s == "thick") return Geometry::thick;
    if (s == "thin") return Geometry::thin;
    if (s == "suspension") return Geometry::suspension;
    throw std::invalid_argument("unknown problem '" + s + "' (expected thick|thin|suspension)");
}

/// Stiffness normalized by the explicit-stability threshold 3.93 / 0.005.
struct StiffnessSpec {
    double gamma = 0.0;
    Geometry geometry = Geometry::thick;

    double alpha() const
    {
        constexpr double explicit_limit = 3.93 / 0.005;
        return geometry == Geometry::thick ? gamma * explicit_limit : 7.0 * gamma * explicit_limit;
    }
};

struct FiberMesh {
    std::vector<double> X; // interleaved node coordinates
    int M1 = 0;
    int M2 = 1;
    double ds1 = 0.0;
    double ds2 = 1.0;
    bool periodic_s1 = true;
    double alpha = 0.0;

    std::size_t n_nodes() const { return std::size_t(M1) * M2; }
    std::size_t n_dofs() const { return 2 * n_nodes(); }
    std::size_t node(int l, int m) const { return std::size_t(m) * M1 + l; }
    Point position(std::size_t k) const { return {X[2 * k], X[2 * k + 1]}; }
};

/// Transverse weight ds2 of a codimension-one fiber: the fiber spacing w/6 of
/// the N = 64 shell, so a membrane with stiffness 7 alpha carries the force of
/// the shell's seven fibers.
inline constexpr double membrane_ds2 = (1.0 / 16.0) / 6.0;

namespace detail {
inline void require_multiple_of_8(int N, const char* what)
{
    if (N < 8 || N % 8 != 0) {
        throw std::invalid_argument(std::string(what) + ": N must be a positive multiple of 8, got " +
                                    std::to_string(N));
    }
}

inline FiberMesh make_circle(Point c, double r, int M, double alpha)
{
    FiberMesh mesh;
    mesh.M1 = M;
    mesh.M2 = 1;
    mesh.ds1 = 2.0 * std::numbers::pi / M;
    mesh.ds2 = membrane_ds2;
    mesh.alpha = alpha;
    mesh.X.resize(2 * std::size_t(M));
    for (int l = 0; l < M; ++l) {
        const double s = l * mesh.ds1;
        mesh.X[2 * l] = c.x + r * std::cos(s);
        mesh.X[2 * l + 1] = c.y + r * std::sin(s);
    }
    return mesh;
}
} // namespace detail

/// Annulus of inner radius 1/4 and width 1/16 centred at (1/2, 1/2):
/// M1 = 19N/8 nodes around, M2 = ceil(3N/32) + 1 fibers across.
inline FiberMesh make_thick_annulus(int N, double alpha = 0.0)
{
    detail::require_multiple_of_8(N, "make_thick_annulus");
    constexpr double r = 0.25;
    constexpr double w = 1.0 / 16.0;
    FiberMesh mesh;
    mesh.M1 = 19 * N / 8;
    mesh.M2 = (3 * N + 31) / 32 + 1;
    mesh.ds1 = 2.0 * std::numbers::pi / mesh.M1;
    mesh.ds2 = w / (mesh.M2 - 1);
    mesh.alpha = alpha;
    mesh.X.resize(mesh.n_dofs());
    for (int m = 0; m < mesh.M2; ++m) {
        const double s2 = m * mesh.ds2;
        for (int l = 0; l < mesh.M1; ++l) {
            const double s1 = l * mesh.ds1;
            const auto k = mesh.node(l, m);
            mesh.X[2 * k] = 0.5 + (r + s2) * std::cos(s1);
            mesh.X[2 * k + 1] = 0.5 + (r + s2) * std::sin(s1);
        }
    }
    return mesh;
}

/// Single closed fiber of radius 1/4 centred at (1/2, 1/2) with 19N/8 nodes.
inline FiberMesh make_thin_membrane(int N, double alpha = 0.0)
{
    detail::require_multiple_of_8(N, "make_thin_membrane");
    return detail::make_circle({0.5, 0.5}, 0.25, 19 * N / 8, alpha);
}

/// Sixteen non-overlapping circles of radius 1/16 at seeded random positions.
/// Node spacing along each circle is about 2h/3.
inline std::vector<FiberMesh> make_suspension(int N, std::uint64_t seed, double alpha = 0.0)
{
    detail::require_multiple_of_8(N, "make_suspension");
    constexpr int count = 16;
    constexpr double r = 1.0 / 16.0;
    const double h = 1.0 / N;
    // Gap between circles: 4h, capped at r/4 so that coarse grids remain feasible.
    const double margin = std::min(4.0 * h, r / 4.0);
    // Kernel support (2h) must stay inside the domain.
    const double wall_clearance = r + std::max(margin, 2.0 * h);
    const double min_center_dist = 2.0 * r + margin;
    const int nodes = int(std::ceil(2.0 * std::numbers::pi * r / (2.0 * h / 3.0)));

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> coord(wall_clearance, 1.0 - wall_clearance);
    constexpr int max_restarts = 200;
    constexpr int max_attempts = 5000;
    for (int restart = 0; restart < max_restarts; ++restart) {
        std::vector<Point> centers;
        int attempts = 0;
        while (int(centers.size()) < count && attempts < max_attempts) {
            ++attempts;
            const Point c{coord(rng), coord(rng)};
            bool ok = true;
            for (const auto& o : centers) {
                if (std::hypot(c.x - o.x, c.y - o.y) <= min_center_dist) {
                    ok = false;
                    break;
                }
            }
            if (ok) {
                centers.push_back(c);
            }
        }
        if (int(centers.size()) == count) {
            std::vector<FiberMesh> out;
            out.reserve(count);
            for (const auto& c : centers) {
                out.push_back(detail::make_circle(c, r, nodes, alpha));
            }
            return out;
        }
    }
    throw std::runtime_error("make_suspension: placement failed for seed " + std::to_string(seed));
}

/// Periodic (or free-ended) second difference alpha (X_{l+1} - 2 X_l + X_{l-1}) / ds1^2
/// along each fiber; fibers with different m do not interact.
inline std::vector<double> apply_K(const FiberMesh& mesh, std::span<const double> X)
{
    if (X.size() != mesh.n_dofs()) {
        throw std::invalid_argument("apply_K: shape mismatch");
    }
    std::vector<double> F(X.size(), 0.0);
    const double c = mesh.alpha / (mesh.ds1 * mesh.ds1);
    const int M1 = mesh.M1;
    for (int m = 0; m < mesh.M2; ++m) {
        for (int l = 0; l < M1; ++l) {
            const auto k = mesh.node(l, m);
            for (int d = 0; d < 2; ++d) {
                const double xc = X[2 * k + d];
                double acc = 0.0;
                if (mesh.periodic_s1 || l + 1 < M1) {
                    acc += X[2 * mesh.node((l + 1) % M1, m) + d] - xc;
                }
                if (mesh.periodic_s1 || l > 0) {
                    acc += X[2 * mesh.node((l + M1 - 1) % M1, m) + d] - xc;
                }
                F[2 * k + d] = c * acc;
            }
        }
    }
    return F;
}

/// Force through the tension form F = D_s1(T tau), with T = alpha |D_s1 X| and
/// tau = D_s1 X / |D_s1 X| at half-indices.
inline std::vector<double> apply_tension_force(const FiberMesh& mesh, std::span<const double> X)
{
    if (X.size() != mesh.n_dofs()) {
        throw std::invalid_argument("apply_tension_force: shape mismatch");
    }
    const int M1 = mesh.M1;
    const int n_links = mesh.periodic_s1 ? M1 : M1 - 1;
    std::vector<double> F(X.size(), 0.0);
    std::vector<double> Ttau(2 * std::size_t(std::max(n_links, 0)));
    for (int m = 0; m < mesh.M2; ++m) {
        for (int l = 0; l < n_links; ++l) {
            const auto a = mesh.node(l, m);
            const auto b = mesh.node((l + 1) % M1, m);
            const double dx = (X[2 * b] - X[2 * a]) / mesh.ds1;
            const double dy = (X[2 * b + 1] - X[2 * a + 1]) / mesh.ds1;
            const double stretch = std::hypot(dx, dy);
            const double T = mesh.alpha * stretch;
            Ttau[2 * l] = stretch > 0.0 ? T * dx / stretch : 0.0;
            Ttau[2 * l + 1] = stretch > 0.0 ? T * dy / stretch : 0.0;
        }
        for (int l = 0; l < M1; ++l) {
            const auto k = mesh.node(l, m);
            for (int d = 0; d < 2; ++d) {
                const bool has_right = mesh.periodic_s1 || l < n_links;
                const bool has_left = mesh.periodic_s1 || l > 0;
                const double right = has_right ? Ttau[2 * l + d] : 0.0;
                const double left = has_left ? Ttau[2 * ((l + M1 - 1) % M1) + d] : 0.0;
                F[2 * k + d] = (right - left) / mesh.ds1;
            }
        }
    }
    return F;
}

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Explicit stiffness matrix over the mesh's interleaved coordinate DOFs.
inline SparseMatrix assemble_K_matrix(const FiberMesh& mesh)
{
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(6 * mesh.n_dofs());
    const double c = mesh.alpha / (mesh.ds1 * mesh.ds1);
    const int M1 = mesh.M1;
    for (int m = 0; m < mesh.M2; ++m) {
        for (int l = 0; l < M1; ++l) {
            const auto k = mesh.node(l, m);
            for (int d = 0; d < 2; ++d) {
                const int row = int(2 * k + d);
                if (mesh.periodic_s1 || l + 1 < M1) {
                    trip.emplace_back(row, int(2 * mesh.node((l + 1) % M1, m) + d), c);
                    trip.emplace_back(row, row, -c);
                }
                if (mesh.periodic_s1 || l > 0) {
                    trip.emplace_back(row, int(2 * mesh.node((l + M1 - 1) % M1, m) + d), c);
                    trip.emplace_back(row, row, -c);
                }
            }
        }
    }
    SparseMatrix K(int(mesh.n_dofs()), int(mesh.n_dofs()));
    K.setFromTriplets(trip.begin(), trip.end());
    return K;
}

} // namespace ibmg
