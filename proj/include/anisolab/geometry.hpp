#pragma once

// Anisotropic rectangles M_r^k(x), the matching quasi-metric, axis-aligned target
// sets, and the projection facts used to steer paths along columns of A.

#include "anisolab/core.hpp"
#include "anisolab/stable_driver.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace anisolab {

inline void require_same_dimension(Eigen::Index a, Eigen::Index b) {
    if (a != b)
        throw std::invalid_argument("dimension mismatch: " + std::to_string(a) + " vs " +
                                    std::to_string(b));
}

/// Closed axis-aligned box; bounds may be infinite. Degenerate (lo == hi) sides are allowed.
struct AxisBox {
    Vec lo;
    Vec hi;

    [[nodiscard]] bool contains(const Vec& x) const {
        require_same_dimension(x.size(), lo.size());
        for (Eigen::Index i = 0; i < x.size(); ++i)
            if (x[i] < lo[i] || x[i] > hi[i]) return false;
        return true;
    }

    [[nodiscard]] double volume() const {
        double v = 1.0;
        for (Eigen::Index i = 0; i < lo.size(); ++i) v *= std::max(0.0, hi[i] - lo[i]);
        return v;
    }

    /// Euclidean distance from a point to the box (0 inside).
    [[nodiscard]] double distance_to(const Vec& x) const {
        double s = 0.0;
        for (Eigen::Index i = 0; i < x.size(); ++i) {
            const double gap = std::max({lo[i] - x[i], x[i] - hi[i], 0.0});
            s += gap * gap;
        }
        return std::sqrt(s);
    }

    [[nodiscard]] double distance_to(const AxisBox& other) const {
        double s = 0.0;
        for (Eigen::Index i = 0; i < lo.size(); ++i) {
            const double gap = std::max({other.lo[i] - hi[i], lo[i] - other.hi[i], 0.0});
            s += gap * gap;
        }
        return std::sqrt(s);
    }
};

/// Finite union of closed axis boxes.
struct BoxUnion {
    std::vector<AxisBox> boxes;

    [[nodiscard]] bool contains(const Vec& x) const {
        for (const auto& b : boxes)
            if (b.contains(x)) return true;
        return false;
    }

    /// Sum of box volumes (an upper bound when boxes overlap).
    [[nodiscard]] double volume() const {
        double v = 0.0;
        for (const auto& b : boxes) v += b.volume();
        return v;
    }

    [[nodiscard]] double distance_to(const AxisBox& other) const {
        double d = std::numeric_limits<double>::infinity();
        for (const auto& b : boxes) d = std::min(d, b.distance_to(other));
        return d;
    }
};

/// The open rectangle M_r^k(x) with halfwidth k r^(alpha_max/alpha_i) along axis i.
class AnisotropicBox {
public:
    AnisotropicBox(Vec center, double r, double k, const StableIndexSet& indices)
        : center_(std::move(center)), r_(r), k_(k) {
        require_same_dimension(center_.size(), static_cast<Eigen::Index>(indices.dimension()));
        require_config(r > 0.0 && r <= 1.0, "box scale r must lie in (0,1]");
        require_config(k > 0.0, "box dilation k must be positive");
        halfwidths_.resize(center_.size());
        for (Eigen::Index i = 0; i < center_.size(); ++i)
            halfwidths_[i] = k * std::pow(r, indices.alpha_max() / indices[static_cast<std::size_t>(i)]);
    }

    [[nodiscard]] const Vec& center() const noexcept { return center_; }
    [[nodiscard]] double r() const noexcept { return r_; }
    [[nodiscard]] double k() const noexcept { return k_; }
    [[nodiscard]] const Vec& halfwidths() const noexcept { return halfwidths_; }
    [[nodiscard]] Eigen::Index dimension() const noexcept { return center_.size(); }

    [[nodiscard]] bool contains(const Vec& x) const {
        require_same_dimension(x.size(), center_.size());
        for (Eigen::Index i = 0; i < x.size(); ++i)
            if (!(std::abs(x[i] - center_[i]) < halfwidths_[i])) return false;
        return true;
    }

    [[nodiscard]] double volume() const {
        double v = 1.0;
        for (Eigen::Index i = 0; i < halfwidths_.size(); ++i) v *= 2.0 * halfwidths_[i];
        return v;
    }

    [[nodiscard]] AxisBox closure() const {
        return {center_ - halfwidths_, center_ + halfwidths_};
    }

private:
    Vec center_;
    double r_;
    double k_;
    Vec halfwidths_;
};

[[nodiscard]] inline Vec box_halfwidths(const AnisotropicBox& box) { return box.halfwidths(); }

/// d(x,y) = sup_k { |x_k-y_k|^(alpha_k/alpha_max) if the gap is <= 1, else 1 }.
[[nodiscard]] inline double aniso_metric(const Vec& x, const Vec& y, const StableIndexSet& indices) {
    require_same_dimension(x.size(), y.size());
    require_same_dimension(x.size(), static_cast<Eigen::Index>(indices.dimension()));
    double d = 0.0;
    for (Eigen::Index k = 0; k < x.size(); ++k) {
        const double gap = std::abs(x[k] - y[k]);
        const double term =
            gap > 1.0 ? 1.0 : std::pow(gap, indices[static_cast<std::size_t>(k)] / indices.alpha_max());
        d = std::max(d, term);
    }
    return d;
}

/// Orthogonal projection of v onto the line spanned by u.
[[nodiscard]] inline Vec project_onto(const Vec& v, const Vec& u) {
    require_same_dimension(v.size(), u.size());
    const double uu = u.squaredNorm();
    if (!(uu > 0.0)) throw std::invalid_argument("project_onto: zero direction vector");
    return (v.dot(u) / uu) * u;
}

struct ColumnProjection {
    Eigen::Index axis;  // zero-based column index
    Vec projection;
    double ratio;       // |v - p| / |v|
};

/// Among the projections of v onto the columns A e_k, the one with the smallest relative
/// residual. Ties go to the smallest column index.
[[nodiscard]] inline ColumnProjection best_column_projection(const Mat& a, const Vec& v) {
    require_same_dimension(a.rows(), a.cols());
    require_same_dimension(a.rows(), v.size());
    const double norm_v = v.norm();
    if (!(norm_v > 0.0)) throw std::invalid_argument("best_column_projection: zero vector");
    Eigen::FullPivLU<Mat> lu(a);
    if (lu.rank() < a.rows()) throw std::invalid_argument("best_column_projection: singular matrix");

    ColumnProjection best{0, Vec(), std::numeric_limits<double>::infinity()};
    for (Eigen::Index k = 0; k < a.cols(); ++k) {
        Vec p = project_onto(v, a.col(k));
        const double ratio = (v - p).norm() / norm_v;
        if (ratio < best.ratio) best = {k, std::move(p), ratio};
    }
    return best;
}

/// Regular grid inside a box, spaced per axis proportionally to the halfwidths
/// (so it is anisotropic for anisotropic boxes). `fill` in (0,1) is the fraction of each
/// halfwidth covered.
[[nodiscard]] inline std::vector<Vec> anisotropic_grid(const AnisotropicBox& box,
                                                       int points_per_axis, double fill) {
    require_config(points_per_axis >= 1, "points_per_axis must be positive");
    require_config(fill > 0.0 && fill < 1.0, "grid fill fraction must lie in (0,1)");
    const auto d = box.dimension();
    std::vector<Vec> points;
    std::vector<int> counter(static_cast<std::size_t>(d), 0);
    while (true) {
        Vec p(d);
        for (Eigen::Index i = 0; i < d; ++i) {
            const double u = points_per_axis == 1
                                 ? 0.0
                                 : -1.0 + 2.0 * counter[static_cast<std::size_t>(i)] /
                                              static_cast<double>(points_per_axis - 1);
            p[i] = box.center()[i] + fill * box.halfwidths()[i] * u;
        }
        points.push_back(std::move(p));
        Eigen::Index i = 0;
        for (; i < d; ++i) {
            if (++counter[static_cast<std::size_t>(i)] < points_per_axis) break;
            counter[static_cast<std::size_t>(i)] = 0;
        }
        if (i == d) break;
    }
    return points;
}

} // namespace anisolab
