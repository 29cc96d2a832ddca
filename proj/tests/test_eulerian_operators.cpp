#include "ibmg/eulerian_operators.hpp"

#include "oracle_dense.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <numbers>

using namespace ibmg;

namespace {

std::vector<double> velocity_of(const StaggeredLevel& lv, double (*f1)(double, double), double (*f2)(double, double))
{
    std::vector<double> u(lv.velocity_size(), 0.0);
    const int n = lv.n();
    for (int j = 0; j < n; ++j)
        for (int i = 0; i <= n; ++i) {
            const Point x = lv.u1_location(i, j);
            u[lv.u1(i, j)] = f1(x.x, x.y);
        }
    for (int j = 0; j <= n; ++j)
        for (int i = 0; i < n; ++i) {
            const Point x = lv.u2_location(i, j);
            u[lv.u2(i, j)] = f2(x.x, x.y);
        }
    return u;
}

double zero(double, double) { return 0.0; }

// Max interior truncation error of the discrete Laplacian on sin(2 pi x) sin(2 pi y).
double laplacian_error(int n)
{
    const StaggeredLevel lv(0, n);
    const auto f = [](double x, double y) { return std::sin(2 * std::numbers::pi * x) * std::sin(2 * std::numbers::pi * y); };
    std::vector<double> u(lv.velocity_size(), 0.0);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i <= n; ++i) u[lv.u1(i, j)] = f(lv.u1_location(i, j).x, lv.u1_location(i, j).y);
    std::vector<double> out(lv.velocity_size());
    apply_A(FluidParams{0.0, 1.0, 1.0}, lv, u, out);
    double err = 0.0;
    const double k2 = 8.0 * std::numbers::pi * std::numbers::pi;
    for (int j = 1; j < n - 1; ++j)
        for (int i = 2; i < n - 1; ++i) {
            const Point x = lv.u1_location(i, j);
            // -Lap f = 8 pi^2 f
            err = std::max(err, std::abs(out[lv.u1(i, j)] - k2 * f(x.x, x.y)));
        }
    return err;
}

} // namespace

TEST(ApplyA, ConstantInteriorIsAnnihilated)
{
    const StaggeredLevel lv(1, 16);
    std::vector<double> u(lv.velocity_size(), 3.0), out(lv.velocity_size());
    apply_A(FluidParams{0.0, 1.0, 1.0}, lv, u, out);
    for (int j = 1; j < 15; ++j)
        for (int i = 2; i < 15; ++i) EXPECT_NEAR(out[lv.u1(i, j)], 0.0, 1e-10);
}

TEST(ApplyA, QuadraticGivesMinusTwo)
{
    const StaggeredLevel lv(1, 16);
    const auto u = velocity_of(lv, [](double x, double) { return x * x; }, zero);
    std::vector<double> out(lv.velocity_size());
    apply_A(FluidParams{0.0, 1.0, 1.0}, lv, u, out);
    for (int j = 1; j < 15; ++j)
        for (int i = 2; i < 15; ++i) EXPECT_NEAR(out[lv.u1(i, j)], -2.0, 1e-10);
}

TEST(ApplyA, MassLimitIsScaledIdentity)
{
    const StaggeredLevel lv(1, 16);
    const BlockVector w = test::random_block(lv, 7);
    std::vector<double> out(lv.velocity_size());
    const double dt = 0.02;
    apply_A(FluidParams{1.0, 1e-300, dt}, lv, w.u(), out);
    for (std::size_t k = 0; k < lv.velocity_size(); ++k) EXPECT_NEAR(out[k], w[k] / dt, 1e-12 * std::abs(w[k] / dt) + 1e-300);
}

TEST(ApplyA, SymmetricOnUnknowns)
{
    const StaggeredLevel lv(1, 16);
    const FluidParams fp{1.0, 0.3, 0.02};
    const BlockVector a = test::random_block(lv, 11), b = test::random_block(lv, 12);
    std::vector<double> Aa(lv.velocity_size()), Ab(lv.velocity_size());
    apply_A(fp, lv, a.u(), Aa);
    apply_A(fp, lv, b.u(), Ab);
    double s1 = 0.0, s2 = 0.0, scale = 0.0;
    for (std::size_t k = 0; k < lv.velocity_size(); ++k) {
        s1 += Aa[k] * b[k];
        s2 += a[k] * Ab[k];
        scale += std::abs(Aa[k] * b[k]);
    }
    EXPECT_LE(std::abs(s1 - s2), 1e-14 * scale);
}

TEST(ApplyA, MatchesDenseOracle)
{
    const int n = 16;
    const StaggeredLevel lv(0, n);
    const oracle::Layout L(n);
    const FluidParams fp{1.0, 0.7, 0.01};
    const auto A = oracle::dense_A(L, fp.rho, fp.mu, fp.dt);
    const BlockVector w = test::random_block(lv, 13);
    std::vector<double> out(lv.velocity_size());
    apply_A(fp, lv, w.u(), out);
    const DofMap dofs(lv);
    Eigen::VectorXd x(L.n_velocity), y(L.n_velocity);
    for (int k = 0; k < L.n_velocity; ++k) {
        x[k] = w[std::size_t(dofs.storage(std::size_t(k)))];
        y[k] = out[std::size_t(dofs.storage(std::size_t(k)))];
    }
    EXPECT_LE((A * x - y).cwiseAbs().maxCoeff(), 1e-13 * y.cwiseAbs().maxCoeff());
}

TEST(ApplyA, LaplacianIsSecondOrder)
{
    const double e16 = laplacian_error(16), e32 = laplacian_error(32), e64 = laplacian_error(64);
    const double r1 = e16 / e32, r2 = e32 / e64;
    EXPECT_GE(r1, 3.5);
    EXPECT_LE(r1, 4.5);
    EXPECT_GE(r2, 3.5);
    EXPECT_LE(r2, 4.5);
}

TEST(ApplyG, ExactOnLinears)
{
    const StaggeredLevel lv(1, 16);
    std::vector<double> px(lv.pressure_size()), py(lv.pressure_size()), pc(lv.pressure_size(), 2.0);
    for (int j = 0; j < 16; ++j)
        for (int i = 0; i < 16; ++i) {
            px[lv.p_local(i, j)] = lv.center_location(i, j).x;
            py[lv.p_local(i, j)] = lv.center_location(i, j).y;
        }
    std::vector<double> gx(lv.velocity_size()), gy(lv.velocity_size()), gc(lv.velocity_size());
    apply_G(lv, px, gx);
    apply_G(lv, py, gy);
    apply_G(lv, pc, gc);
    for (int j = 0; j < 16; ++j)
        for (int i = 1; i < 16; ++i) {
            EXPECT_NEAR(gx[lv.u1(i, j)], 1.0, 1e-12);
            EXPECT_NEAR(gy[lv.u1(i, j)], 0.0, 1e-12);
            EXPECT_NEAR(gc[lv.u1(i, j)], 0.0, 1e-12);
        }
}

TEST(ApplyD, ExactOnLinears)
{
    const StaggeredLevel lv(1, 16);
    const auto u = velocity_of(lv, [](double x, double) { return x; }, [](double, double y) { return -y; });
    const auto v = velocity_of(lv, [](double x, double) { return x; }, zero);
    std::vector<double> du(lv.pressure_size()), dv(lv.pressure_size());
    apply_D(lv, u, du);
    apply_D(lv, v, dv);
    for (std::size_t k = 0; k < lv.pressure_size(); ++k) {
        EXPECT_NEAR(du[k], 0.0, 1e-12);
        EXPECT_NEAR(dv[k], 1.0, 1e-12);
    }
}

TEST(ApplyGD, SummationByParts)
{
    const StaggeredLevel lv(1, 16);
    const BlockVector w = test::random_block(lv, 21, false);
    std::vector<double> gp(lv.velocity_size()), du(lv.pressure_size());
    apply_G(lv, w.p(), gp);
    apply_D(lv, w.u(), du);
    double lhs = 0.0, rhs = 0.0, scale = 0.0;
    for (std::size_t k = 0; k < lv.velocity_size(); ++k) {
        lhs += gp[k] * w[k];
        scale += std::abs(gp[k] * w[k]);
    }
    for (std::size_t k = 0; k < lv.pressure_size(); ++k) rhs -= w.p()[k] * du[k];
    EXPECT_LE(std::abs(lhs - rhs), 1e-14 * scale);
}

TEST(ApplyGD, MatchDenseOracle)
{
    const int n = 8;
    const StaggeredLevel lv(0, n);
    const oracle::Layout L(n);
    const auto [G, D] = oracle::dense_G_D(L);
    const BlockVector w = test::random_block(lv, 22, false);
    const DofMap dofs(lv);
    std::vector<double> gp(lv.velocity_size()), du(lv.pressure_size());
    apply_G(lv, w.p(), gp);
    apply_D(lv, w.u(), du);
    Eigen::VectorXd u(L.n_velocity), p = test::to_eigen(w.p());
    for (int k = 0; k < L.n_velocity; ++k) u[k] = w[std::size_t(dofs.storage(std::size_t(k)))];
    const Eigen::VectorXd Gp = G * p, Du = D * u;
    for (int k = 0; k < L.n_velocity; ++k) EXPECT_NEAR(Gp[k], gp[std::size_t(dofs.storage(std::size_t(k)))], 1e-12);
    for (int k = 0; k < L.n_pressure; ++k) EXPECT_NEAR(Du[k], du[std::size_t(k)], 1e-12);
}

TEST(Operators, ShapeMismatchThrows)
{
    const StaggeredLevel lv(0, 8);
    std::vector<double> small(3), out(lv.velocity_size());
    EXPECT_THROW(apply_A(FluidParams{}, lv, small, out), std::invalid_argument);
    EXPECT_THROW(apply_G(lv, small, out), std::invalid_argument);
    EXPECT_THROW(apply_D(lv, small, out), std::invalid_argument);
}

TEST(FluidParams, Validation)
{
    EXPECT_THROW((FluidParams{0.0, 0.0, 1.0}.validate()), std::invalid_argument);
    EXPECT_THROW((FluidParams{0.0, 1.0, 0.0}.validate()), std::invalid_argument);
    EXPECT_THROW((FluidParams{-1.0, 1.0, 1.0}.validate()), std::invalid_argument);
    EXPECT_NO_THROW((FluidParams{0.0, 1.0, 1.0}.validate()));
}

TEST(CavityBC, LidIsRegularized)
{
    const CavityBC bc;
    EXPECT_NEAR(bc.lid(0.0), 0.0, 1e-15);
    EXPECT_NEAR(bc.lid(1.0), 0.0, 1e-15);
    EXPECT_NEAR(bc.lid(0.5), 1.0, 1e-15);
}

TEST(BuildRhs, ZeroDataGivesZero)
{
    const StaggeredLevel lv(1, 16);
    const std::vector<double> f(lv.velocity_size(), 0.0);
    const BlockVector b = build_rhs(FluidParams{}, CavityBC{0.0}, lv, f);
    for (double v : b.data()) EXPECT_EQ(v, 0.0);
}

TEST(BuildRhs, LidLiftIsLocalToTopRow)
{
    const StaggeredLevel lv(1, 16);
    const FluidParams fp{0.0, 0.5, 0.02};
    const std::vector<double> f(lv.velocity_size(), 0.0);
    const BlockVector b = build_rhs(fp, CavityBC{}, lv, f);
    const CavityBC bc;
    for (int j = 0; j < 16; ++j)
        for (int i = 0; i <= 16; ++i) {
            const double v = b[lv.u1(i, j)];
            if (j == 15 && i > 0 && i < 16) {
                EXPECT_NEAR(v, 2.0 * fp.mu * bc.lid(i / 16.0) * 256.0, 1e-10);
            }
            else {
                EXPECT_EQ(v, 0.0);
            }
        }
    for (std::size_t k = lv.u1_size(); k < lv.size(); ++k) EXPECT_EQ(b[k], 0.0);
}

TEST(BuildRhs, LiftMatchesGhostExtrapolation)
{
    // A applied to the inhomogeneous field equals A_hom(u) - lift when the
    // ghost above the lid is 2 lid - u.
    const int n = 16;
    const StaggeredLevel lv(0, n);
    const FluidParams fp{0.0, 1.0, 1.0};
    const BlockVector w = test::random_block(lv, 31);
    std::vector<double> Au(lv.velocity_size());
    apply_A(fp, lv, w.u(), Au);
    const std::vector<double> f(lv.velocity_size(), 0.0);
    const BlockVector b = build_rhs(fp, CavityBC{}, lv, f);
    const CavityBC bc;
    const double ih2 = double(n) * n;
    for (int i = 1; i < n; ++i) {
        const double c = w[lv.u1(i, n - 1)];
        const double ghost = 2.0 * bc.lid(i / double(n)) - c;
        const double lap = (w[lv.u1(i + 1, n - 1)] + w[lv.u1(i - 1, n - 1)] + ghost + w[lv.u1(i, n - 2)] - 4.0 * c) * ih2;
        EXPECT_NEAR(-lap, Au[lv.u1(i, n - 1)] - b[lv.u1(i, n - 1)], 1e-9);
    }
}

TEST(BuildRhs, MassTermAddsPreviousVelocity)
{
    const StaggeredLevel lv(1, 16);
    const FluidParams fp{1.0, 1.0, 0.02};
    const BlockVector prev = test::random_block(lv, 41);
    const std::vector<double> f(lv.velocity_size(), 0.0);
    const BlockVector b = build_rhs(fp, CavityBC{0.0}, lv, f, prev.u());
    for (std::size_t k = 0; k < lv.velocity_size(); ++k) EXPECT_DOUBLE_EQ(b[k], prev[k] / fp.dt);
}
