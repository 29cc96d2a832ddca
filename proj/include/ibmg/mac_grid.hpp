#pragma once

// Uniform staggered (MAC) grids on the unit square, the multilevel hierarchy,
// and the BlockVector container shared by every solver component.
//
// Storage layout of one level with n cells per side (h = 1/n):
//   u1  x-faces  (i, j), i in [0, n], j in [0, n)   at (i h, (j + 1/2) h)
//   u2  y-faces  (i, j), i in [0, n), j in [0, n]   at ((i + 1/2) h, j h)
//   p   centers  (i, j), i, j in [0, n)             at ((i + 1/2) h, (j + 1/2) h)
// concatenated as [u1 | u2 | p], each block with i running fastest.
// Wall-normal faces (u1 at i = 0, n; u2 at j = 0, n) are Dirichlet and are kept
// at zero in every homogeneous quantity.

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ibmg {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

class StaggeredLevel {
public:
    StaggeredLevel() = default;
    StaggeredLevel(int level_index, int n)
        : level_(level_index), n_(n), h_(1.0 / n)
    {
        if (n < 1) {
            throw std::invalid_argument("StaggeredLevel: n must be positive");
        }
    }

    int level_index() const { return level_; }
    int n() const { return n_; }
    double h() const { return h_; }

    std::size_t u1_size() const { return std::size_t(n_ + 1) * n_; }
    std::size_t u2_size() const { return std::size_t(n_) * (n_ + 1); }
    std::size_t velocity_size() const { return u1_size() + u2_size(); }
    std::size_t pressure_size() const { return std::size_t(n_) * n_; }
    std::size_t size() const { return velocity_size() + pressure_size(); }

    std::size_t u1(int i, int j) const { return std::size_t(j) * (n_ + 1) + i; }
    std::size_t u2(int i, int j) const { return u1_size() + std::size_t(j) * n_ + i; }
    std::size_t p(int i, int j) const { return velocity_size() + std::size_t(j) * n_ + i; }
    /// Pressure index relative to the start of the pressure block.
    std::size_t p_local(int i, int j) const { return std::size_t(j) * n_ + i; }

    Point u1_location(int i, int j) const { return {i * h_, (j + 0.5) * h_}; }
    Point u2_location(int i, int j) const { return {(i + 0.5) * h_, j * h_}; }
    Point center_location(int i, int j) const { return {(i + 0.5) * h_, (j + 0.5) * h_}; }

    bool u1_is_wall(int i) const { return i == 0 || i == n_; }
    bool u2_is_wall(int j) const { return j == 0 || j == n_; }

    /// True when storage index k is a free (non-Dirichlet) degree of freedom.
    bool is_unknown(std::size_t k) const
    {
        if (k < u1_size()) {
            return !u1_is_wall(int(k % (n_ + 1)));
        }
        if (k < velocity_size()) {
            return !u2_is_wall(int((k - u1_size()) / n_));
        }
        return k < size();
    }

    bool operator==(const StaggeredLevel&) const = default;

private:
    int level_ = 0;
    int n_ = 8;
    double h_ = 0.125;
};

/// Levels 0 (8 x 8, coarsest) through finest, refinement ratio 2.
class GridHierarchy {
public:
    static constexpr int coarsest_n = 8;
    static constexpr int refinement_ratio = 2;

    explicit GridHierarchy(int finest_n)
    {
        if (finest_n < coarsest_n || finest_n % coarsest_n != 0) {
            throw std::invalid_argument("GridHierarchy: finest_n must be 8 * 2^k, got " +
                                        std::to_string(finest_n));
        }
        int ratio = finest_n / coarsest_n;
        if ((ratio & (ratio - 1)) != 0) {
            throw std::invalid_argument("GridHierarchy: finest_n must be 8 * 2^k, got " +
                                        std::to_string(finest_n));
        }
        for (int n = coarsest_n, l = 0; n <= finest_n; n *= refinement_ratio, ++l) {
            levels_.emplace_back(l, n);
        }
    }

    int n_levels() const { return int(levels_.size()); }
    int finest_n() const { return levels_.back().n(); }
    const StaggeredLevel& level(int l) const { return levels_.at(std::size_t(l)); }
    const StaggeredLevel& finest() const { return levels_.back(); }
    const StaggeredLevel& coarsest() const { return levels_.front(); }

private:
    std::vector<StaggeredLevel> levels_;
};

inline GridHierarchy build_hierarchy(int finest_n) { return GridHierarchy(finest_n); }

/// Velocity/pressure pair on one level, stored contiguously as [u1 | u2 | p].
class BlockVector {
public:
    BlockVector() = default;
    explicit BlockVector(const StaggeredLevel& level)
        : level_(level), data_(level.size(), 0.0)
    {
    }

    const StaggeredLevel& level() const { return level_; }
    int level_index() const { return level_.level_index(); }

    std::span<double> data() { return data_; }
    std::span<const double> data() const { return data_; }
    std::span<double> u() { return {data_.data(), level_.velocity_size()}; }
    std::span<const double> u() const { return {data_.data(), level_.velocity_size()}; }
    std::span<double> p() { return {data_.data() + level_.velocity_size(), level_.pressure_size()}; }
    std::span<const double> p() const
    {
        return {data_.data() + level_.velocity_size(), level_.pressure_size()};
    }

    double& operator[](std::size_t k) { return data_[k]; }
    double operator[](std::size_t k) const { return data_[k]; }
    std::size_t size() const { return data_.size(); }

    void set_zero() { std::fill(data_.begin(), data_.end(), 0.0); }

    bool all_finite() const
    {
        for (double v : data_) {
            if (!std::isfinite(v)) {
                return false;
            }
        }
        return true;
    }

    std::vector<double>& storage() { return data_; }
    const std::vector<double>& storage() const { return data_; }

private:
    StaggeredLevel level_;
    std::vector<double> data_;
};

namespace detail {
inline void require_same_level(const BlockVector& a, const BlockVector& b, const char* what)
{
    if (a.level() != b.level()) {
        throw std::invalid_argument(std::string(what) + ": level mismatch");
    }
}
} // namespace detail

/// Grid-weighted inner product: sum of entry products times h^2 over both blocks.
inline double block_inner_product(const BlockVector& a, const BlockVector& b)
{
    detail::require_same_level(a, b, "block_inner_product");
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        s += a[k] * b[k];
    }
    const double h = a.level().h();
    return s * h * h;
}

inline double norm(const BlockVector& a) { return std::sqrt(block_inner_product(a, a)); }

/// y <- y + alpha x
inline void axpy(double alpha, const BlockVector& x, BlockVector& y)
{
    detail::require_same_level(x, y, "axpy");
    for (std::size_t k = 0; k < x.size(); ++k) {
        y[k] += alpha * x[k];
    }
}

/// y <- alpha x + beta y
inline void axpby(double alpha, const BlockVector& x, double beta, BlockVector& y)
{
    detail::require_same_level(x, y, "axpby");
    for (std::size_t k = 0; k < x.size(); ++k) {
        y[k] = alpha * x[k] + beta * y[k];
    }
}

inline void scale(double alpha, BlockVector& y)
{
    for (double& v : y.data()) {
        v *= alpha;
    }
}

inline void copy(const BlockVector& x, BlockVector& y)
{
    detail::require_same_level(x, y, "copy");
    std::copy(x.data().begin(), x.data().end(), y.data().begin());
}

/// Removes the mean of the pressure block (the constant null mode of the
/// all-Dirichlet cavity).
inline void project_pressure_mean(std::span<double> p)
{
    if (p.empty()) {
        return;
    }
    double mean = 0.0;
    for (double v : p) {
        mean += v;
    }
    mean /= double(p.size());
    for (double& v : p) {
        v -= mean;
    }
}

inline void project_pressure_mean(BlockVector& w) { project_pressure_mean(w.p()); }

/// Compact numbering of the unknown (non-Dirichlet) storage indices of a level.
class DofMap {
public:
    DofMap() = default;
    explicit DofMap(const StaggeredLevel& level)
        : to_storage_(), to_unknown_(level.size(), -1)
    {
        for (std::size_t k = 0; k < level.size(); ++k) {
            if (level.is_unknown(k)) {
                to_unknown_[k] = int(to_storage_.size());
                to_storage_.push_back(int(k));
                if (k < level.velocity_size()) {
                    ++n_velocity_;
                }
            }
        }
    }

    std::size_t size() const { return to_storage_.size(); }
    std::size_t velocity_size() const { return n_velocity_; }
    int storage(std::size_t unknown) const { return to_storage_[unknown]; }
    int unknown(std::size_t storage) const { return to_unknown_[storage]; }
    const std::vector<int>& storage_indices() const { return to_storage_; }

private:
    std::vector<int> to_storage_;
    std::vector<int> to_unknown_;
    std::size_t n_velocity_ = 0;
};

} // namespace ibmg
