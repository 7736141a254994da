#pragma once

// Coefficient fields x -> A(x) for dX = A(X_-) dZ, with the built-in presets.

#include "anisolab/core.hpp"
#include "anisolab/geometry.hpp"

#include <cmath>
#include <functional>
#include <memory>

namespace anisolab {

class CoefficientField {
public:
    explicit CoefficientField(Eigen::Index dimension) : dimension_(dimension) {}
    virtual ~CoefficientField() = default;

    [[nodiscard]] Eigen::Index dimension() const noexcept { return dimension_; }

    /// Writes A(x) into `out`, which is already sized d x d.
    virtual void evaluate(const Vec& x, Mat& out) const = 0;

    [[nodiscard]] virtual double determinant(const Vec& x) const {
        Mat a(dimension_, dimension_);
        evaluate(x, a);
        return a.determinant();
    }

    virtual void inverse_evaluate(const Vec& x, Mat& out) const {
        Mat a(dimension_, dimension_);
        evaluate(x, a);
        out = a.inverse();
    }

    [[nodiscard]] Mat operator()(const Vec& x) const {
        Mat a(dimension_, dimension_);
        evaluate(x, a);
        return a;
    }

    [[nodiscard]] Mat inverse(const Vec& x) const {
        Mat a(dimension_, dimension_);
        inverse_evaluate(x, a);
        return a;
    }

    /// Lambda(D): largest absolute entry of A and of A^{-1} over a grid of samples in D.
    [[nodiscard]] double bound(const AxisBox& region, int points_per_axis = 9) const {
        double sup = 0.0;
        Mat a(dimension_, dimension_), inv(dimension_, dimension_);
        for_each_sample(region, points_per_axis, [&](const Vec& x) {
            evaluate(x, a);
            inverse_evaluate(x, inv);
            sup = std::max({sup, a.cwiseAbs().maxCoeff(), inv.cwiseAbs().maxCoeff()});
        });
        return sup;
    }

    /// Sampled modulus of continuity: max |A(x) - A(y)|_max over grid neighbours x, x + delta e_i.
    [[nodiscard]] double modulus(const AxisBox& region, double delta, int points_per_axis = 9) const {
        double sup = 0.0;
        Mat a(dimension_, dimension_), b(dimension_, dimension_);
        for_each_sample(region, points_per_axis, [&](const Vec& x) {
            evaluate(x, a);
            for (Eigen::Index i = 0; i < dimension_; ++i) {
                Vec y = x;
                y[i] += delta;
                evaluate(y, b);
                sup = std::max(sup, (a - b).cwiseAbs().maxCoeff());
            }
        });
        return sup;
    }

    /// Largest |A(x) A(x)^{-1} - I| over the samples; a consistency check of inverse_evaluate.
    [[nodiscard]] double inverse_residual(const AxisBox& region, int points_per_axis = 5) const {
        double worst = 0.0;
        Mat a(dimension_, dimension_), inv(dimension_, dimension_);
        for_each_sample(region, points_per_axis, [&](const Vec& x) {
            evaluate(x, a);
            inverse_evaluate(x, inv);
            worst = std::max(worst, (a * inv - Mat::Identity(dimension_, dimension_)).cwiseAbs().maxCoeff());
        });
        return worst;
    }

private:
    template <class Fn>
    void for_each_sample(const AxisBox& region, int n, Fn&& fn) const {
        require_same_dimension(region.lo.size(), dimension_);
        std::vector<int> idx(static_cast<std::size_t>(dimension_), 0);
        Vec x(dimension_);
        while (true) {
            for (Eigen::Index i = 0; i < dimension_; ++i) {
                const double u = n == 1 ? 0.5 : idx[static_cast<std::size_t>(i)] / static_cast<double>(n - 1);
                x[i] = region.lo[i] + u * (region.hi[i] - region.lo[i]);
            }
            fn(x);
            Eigen::Index i = 0;
            for (; i < dimension_; ++i) {
                if (++idx[static_cast<std::size_t>(i)] < n) break;
                idx[static_cast<std::size_t>(i)] = 0;
            }
            if (i == dimension_) return;
        }
    }

    Eigen::Index dimension_;
};

class ConstantField final : public CoefficientField {
public:
    explicit ConstantField(Mat a)
        : CoefficientField(a.rows()), a_(std::move(a)) {
        require_same_dimension(a_.rows(), a_.cols());
        det_ = a_.determinant();
        require_config(std::abs(det_) > 1e-12, "constant coefficient matrix is singular");
        inv_ = a_.inverse();
    }

    void evaluate(const Vec&, Mat& out) const override { out = a_; }
    [[nodiscard]] double determinant(const Vec&) const override { return det_; }
    void inverse_evaluate(const Vec&, Mat& out) const override { out = inv_; }

private:
    Mat a_;
    Mat inv_;
    double det_;
};

[[nodiscard]] inline std::shared_ptr<CoefficientField> identity_field(Eigen::Index d) {
    return std::make_shared<ConstantField>(Mat::Identity(d, d));
}

[[nodiscard]] inline std::shared_ptr<CoefficientField> diagonal_field(const Vec& diagonal) {
    return std::make_shared<ConstantField>(Mat(diagonal.asDiagonal()));
}

/// A(x) = R(theta(x)) diag(scales): a rotation in the (e_1, e_2) plane by
/// theta(x) = theta0 + amplitude * sin(frequency * (x_1 + x_2)), identity on other axes.
class RotationField final : public CoefficientField {
public:
    RotationField(Eigen::Index d, double theta0, double amplitude, double frequency, Vec scales)
        : CoefficientField(d),
          theta0_(theta0),
          amplitude_(amplitude),
          frequency_(frequency),
          scales_(std::move(scales)) {
        require_config(d >= 2, "rotation field needs d >= 2");
        require_same_dimension(scales_.size(), d);
        for (Eigen::Index i = 0; i < d; ++i)
            require_config(std::abs(scales_[i]) > 1e-12, "rotation field scales must be nonzero");
        det_ = scales_.prod();
    }

    [[nodiscard]] double angle(const Vec& x) const {
        return theta0_ + amplitude_ * std::sin(frequency_ * (x[0] + x[1]));
    }

    void evaluate(const Vec& x, Mat& out) const override {
        const double th = angle(x);
        const double c = std::cos(th), s = std::sin(th);
        out.setZero();
        out(0, 0) = c * scales_[0];
        out(0, 1) = -s * scales_[1];
        out(1, 0) = s * scales_[0];
        out(1, 1) = c * scales_[1];
        for (Eigen::Index i = 2; i < dimension(); ++i) out(i, i) = scales_[i];
    }

    [[nodiscard]] double determinant(const Vec&) const override { return det_; }

    void inverse_evaluate(const Vec& x, Mat& out) const override {
        // (R S)^{-1} = S^{-1} R^T
        const double th = angle(x);
        const double c = std::cos(th), s = std::sin(th);
        out.setZero();
        out(0, 0) = c / scales_[0];
        out(0, 1) = s / scales_[0];
        out(1, 0) = -s / scales_[1];
        out(1, 1) = c / scales_[1];
        for (Eigen::Index i = 2; i < dimension(); ++i) out(i, i) = 1.0 / scales_[i];
    }

private:
    double theta0_;
    double amplitude_;
    double frequency_;
    Vec scales_;
    double det_;
};

/// Arbitrary field from a callable; determinant and inverse go through LU.
class FunctionField final : public CoefficientField {
public:
    using Function = std::function<void(const Vec&, Mat&)>;

    FunctionField(Eigen::Index d, Function fn) : CoefficientField(d), fn_(std::move(fn)) {}

    void evaluate(const Vec& x, Mat& out) const override { fn_(x, out); }

private:
    Function fn_;
};

} // namespace anisolab
