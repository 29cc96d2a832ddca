#pragma once

// Second-order MAC operators for the regularized lid-driven cavity:
//   A = (rho/dt) I - mu Lap_h,   G = grad_h,   D = div_h.
// All operators are homogeneous: wall data enters only through build_rhs.
// Tangential velocity at a wall uses the ghost value 2 * wall - interior.

#include "ibmg/mac_grid.hpp"

#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>

namespace ibmg {

struct FluidParams {
    double rho = 0.0;
    double mu = 1.0;
    double dt = 1.0;

    void validate() const
    {
        if (!(mu > 0.0) || !(dt > 0.0) || !(rho >= 0.0)) {
            throw std::invalid_argument("FluidParams: require mu > 0, dt > 0, rho >= 0");
        }
    }
};

/// Zero velocity on the walls except u1(x, 1) = lid_speed * (1 - cos 2 pi x) / 2.
struct CavityBC {
    double lid_speed = 1.0;

    double lid(double x) const
    {
        return lid_speed * 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * x));
    }
};

namespace detail {
inline void require_size(std::size_t got, std::size_t want, const char* what)
{
    if (got != want) {
        throw std::invalid_argument(std::string(what) + ": shape mismatch");
    }
}
} // namespace detail

/// Visits every nonzero (row, col, value) of A in velocity storage indices.
/// Rows and columns are unknown faces only.
template <class Visit>
void for_each_A_entry(const FluidParams& fp, const StaggeredLevel& lv, Visit&& visit)
{
    const int n = lv.n();
    const double ih2 = 1.0 / (lv.h() * lv.h());
    const double mass = fp.rho / fp.dt;
    const double c = fp.mu * ih2;

    for (int j = 0; j < n; ++j) {
        for (int i = 1; i < n; ++i) {
            const auto row = lv.u1(i, j);
            double diag = mass + 4.0 * c;
            if (i + 1 < n) visit(row, lv.u1(i + 1, j), -c);
            if (i - 1 > 0) visit(row, lv.u1(i - 1, j), -c);
            if (j + 1 < n) visit(row, lv.u1(i, j + 1), -c); else diag += c;
            if (j > 0) visit(row, lv.u1(i, j - 1), -c); else diag += c;
            visit(row, row, diag);
        }
    }
    for (int j = 1; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            const auto row = lv.u2(i, j);
            double diag = mass + 4.0 * c;
            if (j + 1 < n) visit(row, lv.u2(i, j + 1), -c);
            if (j - 1 > 0) visit(row, lv.u2(i, j - 1), -c);
            if (i + 1 < n) visit(row, lv.u2(i + 1, j), -c); else diag += c;
            if (i > 0) visit(row, lv.u2(i - 1, j), -c); else diag += c;
            visit(row, row, diag);
        }
    }
}

/// Visits the nonzeros of G (rows: unknown velocity faces, cols: pressure
/// storage indices).
template <class Visit>
void for_each_G_entry(const StaggeredLevel& lv, Visit&& visit)
{
    const int n = lv.n();
    const double ih = 1.0 / lv.h();
    for (int j = 0; j < n; ++j) {
        for (int i = 1; i < n; ++i) {
            visit(lv.u1(i, j), lv.p(i, j), ih);
            visit(lv.u1(i, j), lv.p(i - 1, j), -ih);
        }
    }
    for (int j = 1; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            visit(lv.u2(i, j), lv.p(i, j), ih);
            visit(lv.u2(i, j), lv.p(i, j - 1), -ih);
        }
    }
}

/// Visits the nonzeros of D restricted to unknown velocity columns.
template <class Visit>
void for_each_D_entry(const StaggeredLevel& lv, Visit&& visit)
{
    const int n = lv.n();
    const double ih = 1.0 / lv.h();
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            const auto row = lv.p(i, j);
            if (!lv.u1_is_wall(i + 1)) visit(row, lv.u1(i + 1, j), ih);
            if (!lv.u1_is_wall(i)) visit(row, lv.u1(i, j), -ih);
            if (!lv.u2_is_wall(j + 1)) visit(row, lv.u2(i, j + 1), ih);
            if (!lv.u2_is_wall(j)) visit(row, lv.u2(i, j), -ih);
        }
    }
}

/// out = A u on unknown faces, 0 on wall-normal faces. Spans are velocity-sized.
inline void apply_A(const FluidParams& fp, const StaggeredLevel& lv, std::span<const double> u,
                    std::span<double> out)
{
    detail::require_size(u.size(), lv.velocity_size(), "apply_A");
    detail::require_size(out.size(), lv.velocity_size(), "apply_A");
    const int n = lv.n();
    const double ih2 = 1.0 / (lv.h() * lv.h());
    const double mass = fp.rho / fp.dt;

    for (int j = 0; j < n; ++j) {
        out[lv.u1(0, j)] = 0.0;
        out[lv.u1(n, j)] = 0.0;
        for (int i = 1; i < n; ++i) {
            const double c = u[lv.u1(i, j)];
            const double up = j + 1 < n ? u[lv.u1(i, j + 1)] : -c;
            const double dn = j > 0 ? u[lv.u1(i, j - 1)] : -c;
            const double lap = (u[lv.u1(i + 1, j)] + u[lv.u1(i - 1, j)] + up + dn - 4.0 * c) * ih2;
            out[lv.u1(i, j)] = mass * c - fp.mu * lap;
        }
    }
    for (int i = 0; i < n; ++i) {
        out[lv.u2(i, 0)] = 0.0;
        out[lv.u2(i, n)] = 0.0;
    }
    for (int j = 1; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            const double c = u[lv.u2(i, j)];
            const double rt = i + 1 < n ? u[lv.u2(i + 1, j)] : -c;
            const double lt = i > 0 ? u[lv.u2(i - 1, j)] : -c;
            const double lap = (u[lv.u2(i, j + 1)] + u[lv.u2(i, j - 1)] + rt + lt - 4.0 * c) * ih2;
            out[lv.u2(i, j)] = mass * c - fp.mu * lap;
        }
    }
}

/// out = G p; p is pressure-sized, out velocity-sized (zero on wall faces).
inline void apply_G(const StaggeredLevel& lv, std::span<const double> p, std::span<double> out)
{
    detail::require_size(p.size(), lv.pressure_size(), "apply_G");
    detail::require_size(out.size(), lv.velocity_size(), "apply_G");
    const int n = lv.n();
    const double ih = 1.0 / lv.h();
    for (int j = 0; j < n; ++j) {
        out[lv.u1(0, j)] = 0.0;
        out[lv.u1(n, j)] = 0.0;
        for (int i = 1; i < n; ++i) {
            out[lv.u1(i, j)] = (p[lv.p_local(i, j)] - p[lv.p_local(i - 1, j)]) * ih;
        }
    }
    for (int i = 0; i < n; ++i) {
        out[lv.u2(i, 0)] = 0.0;
        out[lv.u2(i, n)] = 0.0;
    }
    for (int j = 1; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            out[lv.u2(i, j)] = (p[lv.p_local(i, j)] - p[lv.p_local(i, j - 1)]) * ih;
        }
    }
}

/// out = D u using every stored face value (wall faces included).
inline void apply_D(const StaggeredLevel& lv, std::span<const double> u, std::span<double> out)
{
    detail::require_size(u.size(), lv.velocity_size(), "apply_D");
    detail::require_size(out.size(), lv.pressure_size(), "apply_D");
    const int n = lv.n();
    const double ih = 1.0 / lv.h();
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            out[lv.p_local(i, j)] = (u[lv.u1(i + 1, j)] - u[lv.u1(i, j)]) * ih +
                                    (u[lv.u2(i, j + 1)] - u[lv.u2(i, j)]) * ih;
        }
    }
}

/// Right-hand side (force + wall lift, 0). `force` is the caller-evaluated
/// S K X^n term; `u_prev`, when non-empty, contributes (rho/dt) u^n.
inline BlockVector build_rhs(const FluidParams& fp, const CavityBC& bc, const StaggeredLevel& lv,
                             std::span<const double> force, std::span<const double> u_prev = {})
{
    detail::require_size(force.size(), lv.velocity_size(), "build_rhs");
    if (!u_prev.empty()) {
        detail::require_size(u_prev.size(), lv.velocity_size(), "build_rhs");
    }
    BlockVector b(lv);
    auto bu = b.u();
    for (std::size_t k = 0; k < lv.velocity_size(); ++k) {
        if (!lv.is_unknown(k)) {
            continue;
        }
        bu[k] = force[k];
        if (!u_prev.empty()) {
            bu[k] += fp.rho / fp.dt * u_prev[k];
        }
    }
    // Ghost value 2 * lid - u1(i, n-1) above the top row.
    const int n = lv.n();
    const double ih2 = 1.0 / (lv.h() * lv.h());
    for (int i = 1; i < n; ++i) {
        bu[lv.u1(i, n - 1)] += 2.0 * fp.mu * bc.lid(lv.u1_location(i, n - 1).x) * ih2;
    }
    return b;
}

} // namespace ibmg
