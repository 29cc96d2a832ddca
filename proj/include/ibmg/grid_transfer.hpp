#pragma once

// Inter-level transfers for refinement ratio 2.
//
// Velocity: lowest-order Raviart-Thomas prolongation (linear across the face
// normal, constant along it) and its adjoint under the h^2-weighted inner
// products, R_u = (h_f^2 / h_c^2) P_u^T = P_u^T / 4. Both act on the unknown
// faces only; wall-normal faces are treated as zero on input and output.
// Pressure: bilinear prolongation (linear extrapolation in boundary cells) and
// 4-cell averaging restriction.

#include "ibmg/fiber_structure.hpp"
#include "ibmg/mac_grid.hpp"

#include <Eigen/SparseCore>

#include <array>
#include <span>
#include <stdexcept>
#include <vector>

namespace ibmg {

namespace detail {

inline void require_pair(const StaggeredLevel& coarse, const StaggeredLevel& fine, const char* what)
{
    if (fine.n() != 2 * coarse.n()) {
        throw std::invalid_argument(std::string(what) + ": level mismatch");
    }
}

struct Tap {
    int index;
    double weight;
};

// Visits (fine storage, coarse storage, weight) for the velocity prolongation.
template <class Visit>
void for_each_velocity_prolongation_entry(const StaggeredLevel& c, const StaggeredLevel& f, Visit&& visit)
{
    const int nf = f.n();
    // u1: normal direction x.
    for (int j = 0; j < nf; ++j) {
        for (int i = 1; i < nf; ++i) {
            const int J = j / 2;
            if (i % 2 == 0) {
                visit(f.u1(i, j), c.u1(i / 2, J), 1.0);
            }
            else {
                const int lo = (i - 1) / 2;
                const int hi = lo + 1;
                if (!c.u1_is_wall(lo)) visit(f.u1(i, j), c.u1(lo, J), 0.5);
                if (!c.u1_is_wall(hi)) visit(f.u1(i, j), c.u1(hi, J), 0.5);
            }
        }
    }
    // u2: normal direction y.
    for (int j = 1; j < nf; ++j) {
        for (int i = 0; i < nf; ++i) {
            const int I = i / 2;
            if (j % 2 == 0) {
                visit(f.u2(i, j), c.u2(I, j / 2), 1.0);
            }
            else {
                const int lo = (j - 1) / 2;
                const int hi = lo + 1;
                if (!c.u2_is_wall(lo)) visit(f.u2(i, j), c.u2(I, lo), 0.5);
                if (!c.u2_is_wall(hi)) visit(f.u2(i, j), c.u2(I, hi), 0.5);
            }
        }
    }
}

// Linear interpolation taps along one axis from coarse centers to fine center i.
inline std::array<Tap, 2> pressure_taps(int i, int nc)
{
    if (i % 2 == 0) {
        const int I = i / 2;
        if (I - 1 >= 0) return {{{I, 0.75}, {I - 1, 0.25}}};
        return {{{I, 1.25}, {I + 1, -0.25}}};
    }
    const int I = (i - 1) / 2;
    if (I + 1 < nc) return {{{I, 0.75}, {I + 1, 0.25}}};
    return {{{I, 1.25}, {I - 1, -0.25}}};
}

} // namespace detail

/// Fine velocity (velocity-sized) from coarse velocity.
inline void prolong_velocity(const StaggeredLevel& coarse, const StaggeredLevel& fine,
                             std::span<const double> uc, std::span<double> uf)
{
    detail::require_pair(coarse, fine, "prolong_velocity");
    if (uc.size() != coarse.velocity_size() || uf.size() != fine.velocity_size()) {
        throw std::invalid_argument("prolong_velocity: shape mismatch");
    }
    std::fill(uf.begin(), uf.end(), 0.0);
    detail::for_each_velocity_prolongation_entry(
        coarse, fine, [&](std::size_t fi, std::size_t ci, double w) { uf[fi] += w * uc[ci]; });
}

/// Coarse velocity from fine velocity; the weighted adjoint of prolong_velocity.
inline void restrict_velocity(const StaggeredLevel& coarse, const StaggeredLevel& fine,
                              std::span<const double> uf, std::span<double> uc)
{
    detail::require_pair(coarse, fine, "restrict_velocity");
    if (uc.size() != coarse.velocity_size() || uf.size() != fine.velocity_size()) {
        throw std::invalid_argument("restrict_velocity: shape mismatch");
    }
    std::fill(uc.begin(), uc.end(), 0.0);
    detail::for_each_velocity_prolongation_entry(
        coarse, fine, [&](std::size_t fi, std::size_t ci, double w) { uc[ci] += 0.25 * w * uf[fi]; });
}

inline void prolong_pressure(const StaggeredLevel& coarse, const StaggeredLevel& fine,
                             std::span<const double> pc, std::span<double> pf)
{
    detail::require_pair(coarse, fine, "prolong_pressure");
    if (pc.size() != coarse.pressure_size() || pf.size() != fine.pressure_size()) {
        throw std::invalid_argument("prolong_pressure: shape mismatch");
    }
    const int nc = coarse.n();
    for (int j = 0; j < fine.n(); ++j) {
        const auto ty = detail::pressure_taps(j, nc);
        for (int i = 0; i < fine.n(); ++i) {
            const auto tx = detail::pressure_taps(i, nc);
            double v = 0.0;
            for (const auto& a : tx) {
                for (const auto& b : ty) {
                    v += a.weight * b.weight * pc[coarse.p_local(a.index, b.index)];
                }
            }
            pf[fine.p_local(i, j)] = v;
        }
    }
}

inline void restrict_pressure(const StaggeredLevel& coarse, const StaggeredLevel& fine,
                              std::span<const double> pf, std::span<double> pc)
{
    detail::require_pair(coarse, fine, "restrict_pressure");
    if (pc.size() != coarse.pressure_size() || pf.size() != fine.pressure_size()) {
        throw std::invalid_argument("restrict_pressure: shape mismatch");
    }
    for (int J = 0; J < coarse.n(); ++J) {
        for (int I = 0; I < coarse.n(); ++I) {
            pc[coarse.p_local(I, J)] =
                0.25 * (pf[fine.p_local(2 * I, 2 * J)] + pf[fine.p_local(2 * I + 1, 2 * J)] +
                        pf[fine.p_local(2 * I, 2 * J + 1)] + pf[fine.p_local(2 * I + 1, 2 * J + 1)]);
        }
    }
}

/// Block transfers (velocity + pressure) between BlockVectors.
inline BlockVector restrict_block(const StaggeredLevel& coarse, const BlockVector& fine)
{
    BlockVector out(coarse);
    restrict_velocity(coarse, fine.level(), fine.u(), out.u());
    restrict_pressure(coarse, fine.level(), fine.p(), out.p());
    return out;
}

inline BlockVector prolong_block(const StaggeredLevel& fine, const BlockVector& coarse)
{
    BlockVector out(fine);
    prolong_velocity(coarse.level(), fine, coarse.u(), out.u());
    prolong_pressure(coarse.level(), fine, coarse.p(), out.p());
    return out;
}

/// P_u as a sparse (fine velocity storage x coarse velocity storage) matrix.
inline SparseMatrix assemble_velocity_prolongation(const StaggeredLevel& coarse, const StaggeredLevel& fine)
{
    detail::require_pair(coarse, fine, "assemble_velocity_prolongation");
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(3 * fine.velocity_size());
    detail::for_each_velocity_prolongation_entry(coarse, fine, [&](std::size_t fi, std::size_t ci, double w) {
        trip.emplace_back(int(fi), int(ci), w);
    });
    SparseMatrix P(int(fine.velocity_size()), int(coarse.velocity_size()));
    P.setFromTriplets(trip.begin(), trip.end());
    return P;
}

/// R_u = P_u^T / 4.
inline SparseMatrix assemble_velocity_restriction(const StaggeredLevel& coarse, const StaggeredLevel& fine)
{
    SparseMatrix R = SparseMatrix(assemble_velocity_prolongation(coarse, fine).transpose()) * 0.25;
    return R;
}

} // namespace ibmg
