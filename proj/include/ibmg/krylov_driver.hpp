#pragma once

// Outer FGMRES solve preconditioned by one V-cycle per iteration, and the
// semi-implicit time step of the lid-driven cavity with immersed fibers.

#include "ibmg/fgmres.hpp"
#include "ibmg/fiber_structure.hpp"
#include "ibmg/ib_coupling.hpp"
#include "ibmg/multigrid.hpp"
#include "ibmg/parallel.hpp"
#include "ibmg/stokes_ib_system.hpp"

#include <chrono>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ibmg {

/// One experiment point.
struct RunConfig {
    Geometry problem = Geometry::thick;
    int N = 64;
    double gamma = 5.0;
    double mu = 1.0;
    double rho = 0.0;
    SmootherKind smoother = SmootherKind::SC;
    int box = 8;
    int overlap = 2;
    int nu1 = 1;
    int nu2 = 1;
    int wrap = 2;
    double tol = 1e-12;
    int max_iters = 100;
    std::uint64_t seed = 1;
    double lid_speed = 1.0;
    SCSmootherConfig sc;
    int threads = 1;

    double h() const { return 1.0 / N; }
    double dt() const { return 0.32 * h(); }
    FluidParams fluid() const { return FluidParams{rho, mu, dt()}; }

    SmootherConfig smoother_config() const
    {
        SmootherConfig s;
        s.kind = smoother;
        s.box_size = box;
        s.overlap = overlap;
        s.fgmres_iters = wrap;
        s.sc = sc;
        s.threads = threads;
        return s;
    }
};

struct SolveReport {
    int iterations = 0;
    /// ||b - L w_k|| / ||b||, k = 0 .. iterations.
    std::vector<double> residual_history;
    bool converged = false;
    bool breakdown = false;
    double wall_time = 0.0;
    RunConfig config;

    double final_relres() const { return residual_history.empty() ? 0.0 : residual_history.back(); }
};

/// FGMRES from w = 0, right-preconditioned by one V-cycle per iteration.
inline std::pair<BlockVector, SolveReport> solve(const SystemHierarchy& hier, const MultigridPreconditioner& mg,
                                                 const BlockVector& b, double tol = 1e-12, int max_iters = 100)
{
    const auto t0 = std::chrono::steady_clock::now();
    const auto& sys = hier.finest();
    BlockVector w(sys.level());
    const BlockOperator op = [&sys](const BlockVector& in, BlockVector& out) { sys.apply(in, out); };
    const BlockOperator pc = [&mg](const BlockVector& in, BlockVector& out) { mg.apply(in, out); };
    FgmresOptions opt;
    opt.max_iters = max_iters;
    opt.rtol = tol;
    opt.project_pressure = true;
    const FgmresResult res = fgmres(op, pc, b, w, opt);

    SolveReport rep;
    rep.iterations = res.iterations;
    rep.residual_history = res.relative_residuals;
    rep.converged = !rep.residual_history.empty() && rep.residual_history.back() <= tol;
    rep.breakdown = res.breakdown;
    rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return {std::move(w), std::move(rep)};
}

/// Fiber meshes of the configured problem with stiffness from gamma.
inline std::vector<FiberMesh> build_structure(const RunConfig& cfg)
{
    const double alpha = StiffnessSpec{cfg.gamma, cfg.problem}.alpha();
    switch (cfg.problem) {
    case Geometry::thick: return {make_thick_annulus(cfg.N, alpha)};
    case Geometry::thin: return {make_thin_membrane(cfg.N, alpha)};
    case Geometry::suspension: return make_suspension(cfg.N, cfg.seed, alpha);
    }
    throw std::invalid_argument("build_structure: unknown problem");
}

/// Discrete problem at time level n: grid, structure, lagged coupling, and
/// the assembled level systems.
struct StepProblem {
    RunConfig config;
    GridHierarchy grid;
    std::vector<FiberMesh> meshes;
    CouplingOperators coupling;
    SparseMatrix K;
    std::unique_ptr<SystemHierarchy> systems;

    explicit StepProblem(const RunConfig& cfg)
        : StepProblem(cfg, build_structure(cfg))
    {
    }

    StepProblem(const RunConfig& cfg, std::vector<FiberMesh> structure)
        : config(cfg), grid(cfg.N), meshes(std::move(structure)),
          coupling(grid.finest(), std::span<const FiberMesh>(meshes)), K(assemble_K_matrix(std::span<const FiberMesh>(meshes)))
    {
        systems = std::make_unique<SystemHierarchy>(grid, cfg.fluid(), assemble_SKJ(coupling, K));
    }

    const StaggeredLevel& finest() const { return grid.finest(); }

    /// (S K X^n + (rho/dt) u^n + lift, 0).
    BlockVector rhs(std::span<const double> X, std::span<const double> u_prev = {}) const
    {
        Eigen::Map<const Eigen::VectorXd> x(X.data(), Eigen::Index(X.size()));
        const Eigen::VectorXd F = K * x;
        const std::vector<double> f = coupling.spread(std::span<const double>(F.data(), std::size_t(F.size())));
        return build_rhs(config.fluid(), CavityBC{config.lid_speed}, finest(), f, u_prev);
    }

    /// X^{n+1} = X^n + dt J u^{n+1}.
    std::vector<double> update_positions(std::span<const double> X, const BlockVector& w) const
    {
        const std::vector<double> U = coupling.interpolate(w.u());
        std::vector<double> out(X.begin(), X.end());
        for (std::size_t k = 0; k < out.size(); ++k) {
            out[k] += config.dt() * U[k];
        }
        return out;
    }
};

struct StepResult {
    /// (u^{n+1}, p^{n+1}) on the finest level; wall-normal faces zero.
    BlockVector w;
    std::vector<double> X;
    SolveReport report;
};

/// One step from (u^n, X^n); u_prev empty means u^n = 0 and X_prev empty
/// means the reference configuration of the meshes.
inline StepResult semi_implicit_step(const StepProblem& prob, std::span<const double> u_prev = {},
                                     std::span<const double> X_prev = {})
{
    const auto t0 = std::chrono::steady_clock::now();
    const std::vector<double> X0 =
        X_prev.empty() ? gather_positions(std::span<const FiberMesh>(prob.meshes)) : std::vector<double>(X_prev.begin(), X_prev.end());
    const RunConfig& cfg = prob.config;
    MultigridPreconditioner mg(*prob.systems, cfg.smoother_config(), MultigridOptions{cfg.nu1, cfg.nu2});
    const BlockVector b = prob.rhs(X0, u_prev);
    auto [w, rep] = solve(*prob.systems, mg, b, cfg.tol, cfg.max_iters);
    rep.config = cfg;
    rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::vector<double> X1 = prob.update_positions(X0, w);
    return StepResult{std::move(w), std::move(X1), std::move(rep)};
}

/// Builds the problem and runs one step from rest.
inline StepResult run_step(const RunConfig& cfg)
{
    const StepProblem prob(cfg);
    return semi_implicit_step(prob);
}

} // namespace ibmg
