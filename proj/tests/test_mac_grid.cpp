#include "ibmg/mac_grid.hpp"

#include "test_util.hpp"

#include <gtest/gtest.h>

#include <set>

using namespace ibmg;

TEST(GridHierarchy, CoarsestOnly)
{
    const GridHierarchy g(8);
    EXPECT_EQ(g.n_levels(), 1);
    EXPECT_DOUBLE_EQ(g.finest().h(), 0.125);
}

TEST(GridHierarchy, FourLevelsAt64)
{
    const GridHierarchy g = build_hierarchy(64);
    ASSERT_EQ(g.n_levels(), 4);
    const int expect[] = {8, 16, 32, 64};
    for (int l = 0; l < 4; ++l) {
        EXPECT_EQ(g.level(l).n(), expect[l]);
        EXPECT_EQ(g.level(l).level_index(), l);
        EXPECT_DOUBLE_EQ(g.level(l).h() * g.level(l).n(), 1.0);
        if (l > 0) {
            EXPECT_DOUBLE_EQ(g.level(l).h(), 0.5 * g.level(l - 1).h());
        }
    }
}

TEST(GridHierarchy, RejectsInvalidSizes)
{
    EXPECT_THROW(GridHierarchy(12), std::invalid_argument);
    EXPECT_THROW(GridHierarchy(24), std::invalid_argument);
    EXPECT_THROW(GridHierarchy(4), std::invalid_argument);
    EXPECT_THROW(GridHierarchy(0), std::invalid_argument);
}

TEST(StaggeredLevel, SizesAndLocations)
{
    const StaggeredLevel lv(1, 16);
    EXPECT_EQ(lv.u1_size(), 17u * 16u);
    EXPECT_EQ(lv.u2_size(), 16u * 17u);
    EXPECT_EQ(lv.pressure_size(), 256u);
    EXPECT_EQ(lv.size(), 2u * 17u * 16u + 256u);

    const Point a = lv.u1_location(3, 5);
    EXPECT_DOUBLE_EQ(a.x, 3.0 / 16);
    EXPECT_DOUBLE_EQ(a.y, 5.5 / 16);
    const Point b = lv.u2_location(3, 5);
    EXPECT_DOUBLE_EQ(b.x, 3.5 / 16);
    EXPECT_DOUBLE_EQ(b.y, 5.0 / 16);
    const Point c = lv.center_location(0, 0);
    EXPECT_DOUBLE_EQ(c.x, 0.5 / 16);
    EXPECT_DOUBLE_EQ(c.y, 0.5 / 16);
}

TEST(StaggeredLevel, IndicesAreABijection)
{
    const StaggeredLevel lv(0, 8);
    std::set<std::size_t> seen;
    for (int j = 0; j < 8; ++j)
        for (int i = 0; i <= 8; ++i) seen.insert(lv.u1(i, j));
    for (int j = 0; j <= 8; ++j)
        for (int i = 0; i < 8; ++i) seen.insert(lv.u2(i, j));
    for (int j = 0; j < 8; ++j)
        for (int i = 0; i < 8; ++i) seen.insert(lv.p(i, j));
    EXPECT_EQ(seen.size(), lv.size());
    EXPECT_EQ(*seen.rbegin(), lv.size() - 1);
}

TEST(StaggeredLevel, WallFacesAreNotUnknowns)
{
    const StaggeredLevel lv(0, 8);
    for (int j = 0; j < 8; ++j) {
        EXPECT_FALSE(lv.is_unknown(lv.u1(0, j)));
        EXPECT_FALSE(lv.is_unknown(lv.u1(8, j)));
        EXPECT_TRUE(lv.is_unknown(lv.u1(1, j)));
    }
    for (int i = 0; i < 8; ++i) {
        EXPECT_FALSE(lv.is_unknown(lv.u2(i, 0)));
        EXPECT_FALSE(lv.is_unknown(lv.u2(i, 8)));
        EXPECT_TRUE(lv.is_unknown(lv.u2(i, 7)));
    }
    EXPECT_TRUE(lv.is_unknown(lv.p(0, 0)));
    EXPECT_FALSE(lv.is_unknown(lv.size()));
}

TEST(DofMap, AscendingVelocityFirst)
{
    const StaggeredLevel lv(0, 8);
    const DofMap dofs(lv);
    EXPECT_EQ(dofs.size(), 2u * 7u * 8u + 64u);
    EXPECT_EQ(dofs.velocity_size(), 2u * 7u * 8u);
    for (std::size_t k = 1; k < dofs.size(); ++k) {
        EXPECT_LT(dofs.storage(k - 1), dofs.storage(k));
    }
    for (std::size_t k = 0; k < dofs.size(); ++k) {
        EXPECT_EQ(dofs.unknown(std::size_t(dofs.storage(k))), int(k));
    }
    EXPECT_EQ(dofs.unknown(lv.u1(0, 0)), -1);
}

TEST(BlockVector, InnerProductOfOnes)
{
    const StaggeredLevel lv(0, 8);
    BlockVector a(lv);
    for (auto& v : a.data()) v = 1.0;
    EXPECT_DOUBLE_EQ(block_inner_product(a, a), 3.25);
    const BlockVector z(lv);
    EXPECT_EQ(block_inner_product(a, z), 0.0);
}

TEST(BlockVector, InnerProductSymmetricAndPositive)
{
    const StaggeredLevel lv(1, 16);
    const BlockVector a = test::random_block(lv, 1, false);
    const BlockVector b = test::random_block(lv, 2, false);
    EXPECT_DOUBLE_EQ(block_inner_product(a, b), block_inner_product(b, a));
    EXPECT_GT(block_inner_product(a, a), 0.0);
}

TEST(BlockVector, LinearSpaceOperations)
{
    const StaggeredLevel lv(0, 8);
    const BlockVector x = test::random_block(lv, 3, false);
    BlockVector y = test::random_block(lv, 4, false);
    const BlockVector y0 = y;

    axpy(0.0, x, y);
    EXPECT_EQ(y.storage(), y0.storage());

    axpby(1.0, x, 0.0, y);
    EXPECT_EQ(y.storage(), x.storage());

    BlockVector t = x;
    axpy(2.0, x, t);
    for (std::size_t k = 0; k < t.size(); ++k) EXPECT_DOUBLE_EQ(t[k], 3.0 * x[k]);

    BlockVector c(lv);
    copy(x, c);
    EXPECT_EQ(c.storage(), x.storage());
    EXPECT_TRUE(c.all_finite());
}

TEST(BlockVector, LevelMismatchThrows)
{
    const BlockVector a(StaggeredLevel(0, 8));
    BlockVector b(StaggeredLevel(1, 16));
    EXPECT_THROW(block_inner_product(a, b), std::invalid_argument);
    EXPECT_THROW(axpy(1.0, a, b), std::invalid_argument);
    EXPECT_THROW(copy(a, b), std::invalid_argument);
}

TEST(BlockVector, PressureMeanProjection)
{
    const StaggeredLevel lv(0, 8);
    BlockVector w = test::random_block(lv, 5, false);
    const std::vector<double> u(w.u().begin(), w.u().end());
    project_pressure_mean(w);
    double s = 0.0;
    for (double v : w.p()) s += v;
    EXPECT_NEAR(s, 0.0, 1e-13);
    EXPECT_TRUE(std::equal(u.begin(), u.end(), w.u().begin()));
}
