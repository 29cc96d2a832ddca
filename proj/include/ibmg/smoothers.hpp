#pragma once

// Multigrid smoothers for the Stokes-IB level systems:
//   - restricted additive Schwarz (RAS) and restricted multiplicative Schwarz
//     (RMS) over overlapping boxes of cells, each box solved directly;
//   - the Schur-complement approximate block factorization (SC) with
//     Chebyshev/Gauss-Seidel inner solves;
// each wrapped in a fixed number of FGMRES iterations.

#include "ibmg/fgmres.hpp"
#include "ibmg/linalg.hpp"
#include "ibmg/parallel.hpp"
#include "ibmg/stokes_ib_system.hpp"

#include <algorithm>
#include <iostream>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace ibmg {

enum class SmootherKind { RAS, RMS, SC };

inline std::string to_string(SmootherKind k)
{
    switch (k) {
    case SmootherKind::RAS: return "RAS";
    case SmootherKind::RMS: return "RMS";
    case SmootherKind::SC: return "SC";
    }
    return "?";
}

inline SmootherKind parse_smoother(const std::string& s)
{
    if (s == "RAS") return SmootherKind::RAS;
    if (s == "RMS") return SmootherKind::RMS;
    if (s == "SC") return SmootherKind::SC;
    throw std::invalid_argument("unknown smoother '" + s + "' (expected RAS|RMS|SC)");
}

struct SCSmootherConfig {
    int cheby_iters_A = 2;
    int cheby_iters_M = 2;
    int power_iters = 10;
    double lambda_safety = 1.1;
    double lambda_min_ratio = 0.1;

    void validate() const
    {
        if (cheby_iters_A < 1 || cheby_iters_M < 1 || power_iters < 1) {
            throw std::invalid_argument("SCSmootherConfig: iteration counts must be >= 1");
        }
    }
};

struct SmootherConfig {
    SmootherKind kind = SmootherKind::SC;
    int box_size = 8;
    int overlap = 2;
    /// FGMRES iterations per smoothing application; 0 applies the basic algorithm directly.
    int fgmres_iters = 2;
    SCSmootherConfig sc;
    int threads = 1;
};

/// One application of a basic smoothing algorithm: w_out from (w, b).
class BasicSmoother {
public:
    virtual ~BasicSmoother() = default;
    virtual void apply(const BlockVector& w, const BlockVector& b, BlockVector& out) const = 0;

    BlockVector apply(const BlockVector& w, const BlockVector& b) const
    {
        BlockVector out(w.level());
        apply(w, b, out);
        return out;
    }
};

// ---------------------------------------------------------------------------
// Schwarz

struct Subdomain {
    int x0 = 0, x1 = 0, y0 = 0, y1 = 0;   // overlapped cell range [x0, x1) x [y0, y1)
    std::vector<int> dofs;                // G_i, sorted unknown indices
    std::vector<int> owned;               // positions p in dofs with dofs[p] in the restricted set
    bool whole_domain = false;
};

class SubdomainPartition {
public:
    int box_size = 0;
    int overlap = 0;
    int boxes_per_side = 0;
    std::vector<Subdomain> subdomains;
    /// Owner box of every unknown (restricted, non-overlapping sets).
    std::vector<int> owner;
};

/// Tiles the level with box_size x box_size cell boxes extended by `overlap`
/// cells (clipped at the walls). A face on the seam between two boxes belongs
/// to the restricted set of the lower-indexed box.
inline SubdomainPartition partition_level(const StokesIBLevelSystem& sys, int box_size, int overlap)
{
    const auto& lv = sys.level();
    const int n = lv.n();
    if (box_size < 1 || n % box_size != 0) {
        throw std::invalid_argument("partition_level: box size " + std::to_string(box_size) +
                                    " does not divide n = " + std::to_string(n));
    }
    if (overlap < 0) {
        throw std::invalid_argument("partition_level: overlap must be >= 0");
    }
    const auto& dofs = sys.dofs();
    const int nb = n / box_size;

    SubdomainPartition part;
    part.box_size = box_size;
    part.overlap = overlap;
    part.boxes_per_side = nb;
    part.owner.assign(dofs.size(), -1);

    const auto owner_box = [&](int i) { return i == 0 ? 0 : std::min(nb - 1, (i - 1) / box_size); };
    const auto set_owner = [&](std::size_t storage, int box) {
        const int u = dofs.unknown(storage);
        if (u >= 0) part.owner[std::size_t(u)] = box;
    };
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i <= n; ++i) {
            set_owner(lv.u1(i, j), (j / box_size) * nb + owner_box(i));
        }
    }
    for (int j = 0; j <= n; ++j) {
        for (int i = 0; i < n; ++i) {
            set_owner(lv.u2(i, j), owner_box(j) * nb + i / box_size);
        }
    }
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            set_owner(lv.p(i, j), (j / box_size) * nb + i / box_size);
        }
    }

    for (int by = 0; by < nb; ++by) {
        for (int bx = 0; bx < nb; ++bx) {
            const int id = by * nb + bx;
            Subdomain s;
            s.x0 = std::max(0, bx * box_size - overlap);
            s.x1 = std::min(n, (bx + 1) * box_size + overlap);
            s.y0 = std::max(0, by * box_size - overlap);
            s.y1 = std::min(n, (by + 1) * box_size + overlap);
            s.whole_domain = s.x0 == 0 && s.y0 == 0 && s.x1 == n && s.y1 == n;
            const auto add = [&](std::size_t storage) {
                const int u = dofs.unknown(storage);
                if (u >= 0) s.dofs.push_back(u);
            };
            for (int j = s.y0; j < s.y1; ++j) {
                for (int i = s.x0; i <= s.x1; ++i) add(lv.u1(i, j));
            }
            for (int j = s.y0; j <= s.y1; ++j) {
                for (int i = s.x0; i < s.x1; ++i) add(lv.u2(i, j));
            }
            for (int j = s.y0; j < s.y1; ++j) {
                for (int i = s.x0; i < s.x1; ++i) add(lv.p(i, j));
            }
            std::sort(s.dofs.begin(), s.dofs.end());
            for (std::size_t p = 0; p < s.dofs.size(); ++p) {
                if (part.owner[std::size_t(s.dofs[p])] == id) {
                    s.owned.push_back(int(p));
                }
            }
            part.subdomains.push_back(std::move(s));
        }
    }
    return part;
}

/// R_i L R_i^T for one subdomain (column-major, local numbering).
inline Eigen::SparseMatrix<double> extract_local_matrix(const CsrMatrix& L, const std::vector<int>& dofs,
                                                        std::vector<int>& scratch_map)
{
    for (std::size_t p = 0; p < dofs.size(); ++p) {
        scratch_map[std::size_t(dofs[p])] = int(p);
    }
    std::vector<Eigen::Triplet<double>> trip;
    for (std::size_t p = 0; p < dofs.size(); ++p) {
        for (CsrMatrix::InnerIterator it(L, dofs[p]); it; ++it) {
            const int q = scratch_map[std::size_t(it.col())];
            if (q >= 0) {
                trip.emplace_back(int(p), q, it.value());
            }
        }
    }
    for (int d : dofs) {
        scratch_map[std::size_t(d)] = -1;
    }
    Eigen::SparseMatrix<double> K(Eigen::Index(dofs.size()), Eigen::Index(dofs.size()));
    K.setFromTriplets(trip.begin(), trip.end());
    return K;
}

/// RAS (additive) or RMS (multiplicative) sweep with factorizations cached at
/// construction.
class SchwarzSmoother final : public BasicSmoother {
public:
    /// Subdomains up to this many unknowns are factored densely.
    static constexpr std::size_t dense_limit = 300;

    SchwarzSmoother(const StokesIBLevelSystem& sys, int box_size, int overlap, bool multiplicative, int threads = 1)
        : sys_(sys), multiplicative_(multiplicative), threads_(threads),
          part_(partition_level(sys, std::min(box_size, sys.level().n()), overlap))
    {
        const auto nv = int(sys.dofs().velocity_size());
        solvers_.resize(part_.subdomains.size());
        const std::size_t count = part_.subdomains.size();
        const int nt = std::max(1, threads_);
        std::vector<std::vector<int>> maps(std::size_t(nt), std::vector<int>(sys.dofs().size(), -1));
        // Each worker owns a contiguous block of subdomains and one scratch map.
        parallel_for(std::size_t(nt), nt, [&](std::size_t w) {
            const std::size_t begin = count * w / std::size_t(nt);
            const std::size_t end = count * (w + 1) / std::size_t(nt);
            for (std::size_t s = begin; s < end; ++s) {
                const auto& sd = part_.subdomains[s];
                const auto K = extract_local_matrix(sys_.matrix(), sd.dofs, maps[w]);
                std::vector<char> mask(sd.dofs.size());
                for (std::size_t p = 0; p < sd.dofs.size(); ++p) {
                    mask[p] = sd.dofs[p] >= nv;
                }
                solvers_[s] = std::make_unique<LocalSolver>(K, std::move(mask), sd.whole_domain,
                                                            sd.dofs.size() <= dense_limit);
            }
        });
    }

    const SubdomainPartition& partition() const { return part_; }
    bool multiplicative() const { return multiplicative_; }

    using BasicSmoother::apply;
    void apply(const BlockVector& w, const BlockVector& b, BlockVector& out) const override
    {
        Vector x = sys_.gather(w);
        const Vector rhs = sys_.gather(b);
        const auto& L = sys_.matrix();
        if (multiplicative_) {
            for (std::size_t s = 0; s < part_.subdomains.size(); ++s) {
                const auto& sd = part_.subdomains[s];
                Vector ri(Eigen::Index(sd.dofs.size()));
                for (std::size_t p = 0; p < sd.dofs.size(); ++p) {
                    const int row = sd.dofs[p];
                    double acc = rhs[row];
                    for (CsrMatrix::InnerIterator it(L, row); it; ++it) {
                        acc -= it.value() * x[it.col()];
                    }
                    ri[Eigen::Index(p)] = acc;
                }
                const Vector xi = solvers_[s]->solve(ri);
                for (int p : sd.owned) {
                    x[sd.dofs[std::size_t(p)]] += xi[p];
                }
            }
        }
        else {
            const Vector r = rhs - L * x;
            parallel_for(part_.subdomains.size(), threads_, [&](std::size_t s) {
                const auto& sd = part_.subdomains[s];
                Vector ri(Eigen::Index(sd.dofs.size()));
                for (std::size_t p = 0; p < sd.dofs.size(); ++p) {
                    ri[Eigen::Index(p)] = r[sd.dofs[p]];
                }
                const Vector xi = solvers_[s]->solve(ri);
                // Owned sets are disjoint across subdomains.
                for (int p : sd.owned) {
                    x[sd.dofs[std::size_t(p)]] += xi[p];
                }
            });
        }
        sys_.scatter(x, out);
    }

private:
    const StokesIBLevelSystem& sys_;
    bool multiplicative_;
    int threads_;
    SubdomainPartition part_;
    std::vector<std::unique_ptr<LocalSolver>> solvers_;
};

inline BlockVector ras_apply(const SchwarzSmoother& s, const BlockVector& w, const BlockVector& b)
{
    if (s.multiplicative()) throw std::invalid_argument("ras_apply: smoother is multiplicative");
    return s.apply(w, b);
}

inline BlockVector rms_apply(const SchwarzSmoother& s, const BlockVector& w, const BlockVector& b)
{
    if (!s.multiplicative()) throw std::invalid_argument("rms_apply: smoother is additive");
    return s.apply(w, b);
}

// ---------------------------------------------------------------------------
// Schur complement

/// Approximate block factorization
///   L^-1 ~ [I  -A~^-1 G; 0  I] diag(A~^-1, M~^-1) [I  0; D A~^-1  I],
/// with M = D A~^-1 G. Both inner inverses are replaceable.
class SchurComplementSmoother final : public BasicSmoother {
public:
    SchurComplementSmoother(const StokesIBLevelSystem& sys, const SCSmootherConfig& cfg)
        : sys_(sys), cfg_(cfg)
    {
        cfg_.validate();
        const auto& A = sys.momentum_matrix();
        gs_A_ = SymmetricGaussSeidel(A);
        const LinearMap opA = [&A](const Vector& x) { return Vector(A * x); };
        const LinearMap pcA = [this](const Vector& r) { return gs_A_.apply(r); };
        const double lA = bounded_estimate(opA, pcA, A.rows(), {}, "A_IB");
        cheb_A_ = Chebyshev(opA, pcA, cfg_.lambda_min_ratio * lA, cfg_.lambda_safety * lA, cfg_.cheby_iters_A);
        velocity_solve_ = [this](const Vector& r) { return cheb_A_.apply(r); };

        // Sparse approximate Schur complement, sign-flipped to be positive
        // semidefinite: S^ = -D diag(A_IB)^-1 G.
        Vector inv_diag = A.diagonal().cwiseInverse();
        CsrMatrix DinvG = sys.divergence_matrix() * inv_diag.asDiagonal();
        S_hat_ = -(DinvG * sys.gradient_matrix());
        S_hat_.makeCompressed();
        gs_S_ = SymmetricGaussSeidel(S_hat_);

        const auto project = [](Vector& x) { project_mean(x); };
        const LinearMap opS = [this](const Vector& x) { return schur_operator(x); };
        const LinearMap pcS = [this](const Vector& r) { return gs_S_.apply(r); };
        const double lS = bounded_estimate(opS, pcS, S_hat_.rows(), project, "Schur");
        cheb_S_ = Chebyshev(opS, pcS, cfg_.lambda_min_ratio * lS, cfg_.lambda_safety * lS, cfg_.cheby_iters_M,
                            project);
        // M~^-1 = -S~^-1.
        schur_solve_ = [this](const Vector& y) { return Vector(-cheb_S_.apply(y)); };
    }

    /// Replaces A~^-1 and M~^-1 (e.g. by exact inverses).
    void set_inner_solvers(LinearMap velocity_solve, LinearMap schur_solve)
    {
        velocity_solve_ = std::move(velocity_solve);
        schur_solve_ = std::move(schur_solve);
    }

    /// Sparse approximate Schur complement D diag(A_IB)^-1 G.
    CsrMatrix approximate_schur_complement() const { return -S_hat_; }

    using BasicSmoother::apply;
    void apply(const BlockVector& w, const BlockVector& b, BlockVector& out) const override
    {
        const BlockVector r = sys_.residual(w, b);
        const Vector rr = sys_.gather(r);
        const auto nv = Eigen::Index(sys_.dofs().velocity_size());
        const auto np = rr.size() - nv;
        const Vector ru = rr.head(nv);
        const Vector rp = rr.tail(np);

        const Vector t = velocity_solve_(ru);
        const Vector y = rp + sys_.divergence_matrix() * t;
        const Vector xp = schur_solve_(y);
        const Vector xu = velocity_solve_(ru - sys_.gradient_matrix() * xp);

        Vector x(rr.size());
        x.head(nv) = xu;
        x.tail(np) = xp;
        sys_.scatter(x, out);
        axpy(1.0, w, out);
    }

private:
    // x -> -D A~^-1 G x
    Vector schur_operator(const Vector& x) const
    {
        const Vector g = sys_.gradient_matrix() * x;
        return -(sys_.divergence_matrix() * cheb_A_.apply(g));
    }

    double bounded_estimate(const LinearMap& op, const LinearMap& pc, Eigen::Index n,
                            const std::function<void(Vector&)>& project, const char* what) const
    {
        const double l = estimate_lambda_max(op, pc, n, cfg_.power_iters, project);
        if (!(l > 0.0) || !std::isfinite(l)) {
            std::cerr << "warning: SC smoother eigenvalue estimate failed for " << what
                      << "; using fixed bounds\n";
            return 1.0;
        }
        return l;
    }

    const StokesIBLevelSystem& sys_;
    SCSmootherConfig cfg_;
    SymmetricGaussSeidel gs_A_;
    Chebyshev cheb_A_;
    CsrMatrix S_hat_;
    SymmetricGaussSeidel gs_S_;
    Chebyshev cheb_S_;
    LinearMap velocity_solve_;
    LinearMap schur_solve_;
};

inline BlockVector sc_apply(const SchurComplementSmoother& s, const BlockVector& w, const BlockVector& b)
{
    return s.apply(w, b);
}

// ---------------------------------------------------------------------------
// FGMRES wrapper

inline std::unique_ptr<BasicSmoother> make_basic_smoother(const StokesIBLevelSystem& sys, const SmootherConfig& cfg)
{
    switch (cfg.kind) {
    case SmootherKind::RAS:
        return std::make_unique<SchwarzSmoother>(sys, cfg.box_size, cfg.overlap, false, cfg.threads);
    case SmootherKind::RMS:
        return std::make_unique<SchwarzSmoother>(sys, cfg.box_size, cfg.overlap, true, cfg.threads);
    case SmootherKind::SC:
        return std::make_unique<SchurComplementSmoother>(sys, cfg.sc);
    }
    throw std::invalid_argument("make_basic_smoother: unknown kind");
}

/// A basic smoother bound to one level plus its FGMRES wrap count.
class LevelSmoother {
public:
    LevelSmoother(const StokesIBLevelSystem& sys, std::unique_ptr<BasicSmoother> inner, int fgmres_iters)
        : sys_(sys), inner_(std::move(inner)), wrap_(fgmres_iters)
    {
        if (wrap_ < 0) {
            throw std::invalid_argument("LevelSmoother: fgmres_iters must be >= 0");
        }
    }

    LevelSmoother(const StokesIBLevelSystem& sys, const SmootherConfig& cfg)
        : LevelSmoother(sys, make_basic_smoother(sys, cfg), cfg.fgmres_iters)
    {
    }

    const BasicSmoother& inner() const { return *inner_; }
    int fgmres_iters() const { return wrap_; }

    /// nu smoothing applications on w.
    void smooth(BlockVector& w, const BlockVector& b, int nu) const
    {
        if (nu < 1) {
            throw std::invalid_argument("smooth: nu must be >= 1");
        }
        for (int s = 0; s < nu; ++s) {
            if (wrap_ == 0) {
                BlockVector next(w.level());
                inner_->apply(w, b, next);
                w = std::move(next);
                continue;
            }
            const BlockOperator op = [this](const BlockVector& in, BlockVector& out) { sys_.apply(in, out); };
            const BlockOperator pc = [this](const BlockVector& in, BlockVector& out) {
                BlockVector zero(in.level());
                inner_->apply(zero, in, out);
            };
            FgmresOptions opt;
            opt.max_iters = wrap_;
            opt.rtol = 0.0;
            opt.project_pressure = true;
            fgmres(op, pc, b, w, opt);
        }
    }

private:
    const StokesIBLevelSystem& sys_;
    std::unique_ptr<BasicSmoother> inner_;
    int wrap_;
};

inline void smooth(const LevelSmoother& s, BlockVector& w, const BlockVector& b, int nu) { s.smooth(w, b, nu); }

} // namespace ibmg
