#pragma once

#include "enex/features.hpp"

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace enex {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Training vectors of one subject for one feature.
struct ClassSamples {
    std::string label;
    std::vector<std::vector<double>> samples;

    std::size_t count() const noexcept { return samples.size(); }
    std::size_t dimension() const noexcept { return samples.empty() ? 0 : samples.front().size(); }
};

struct WithinScatter {
    std::vector<Matrix> per_class;  // d_i
    Matrix total;                   // d = sum of d_i
};

struct ScatterStatistics {
    Matrix within;
    Matrix between;
    std::vector<Vector> class_means;
    Vector grand_mean;
};

/// Linear map applied to one feature before distance ranking. Columns are
/// discriminant directions in descending order of their Fisher ratio, each
/// scaled by the square root of that ratio.
struct FeatureTransform {
    FeatureId feature = FeatureId::clothing;
    Matrix matrix;
    double ridge = 0.0;
    bool discriminative = true;  // false when the between-class scatter vanished
    std::vector<double> eigenvalues;

    std::size_t input_dimension() const noexcept { return static_cast<std::size_t>(matrix.rows()); }
    std::size_t output_dimension() const noexcept { return static_cast<std::size_t>(matrix.cols()); }

    friend bool operator==(const FeatureTransform& a, const FeatureTransform& b) {
        return a.feature == b.feature && a.ridge == b.ridge && a.discriminative == b.discriminative &&
               a.eigenvalues == b.eigenvalues && a.matrix.rows() == b.matrix.rows() &&
               a.matrix.cols() == b.matrix.cols() && a.matrix == b.matrix;
    }
};

WithinScatter within_scatter(std::span<const ClassSamples> classes);

/// Weighted scatter of class means about the pooled mean. Needs two classes.
Matrix between_scatter(std::span<const ClassSamples> classes);

/// Scatter of every sample about the pooled mean; equals within + between.
Matrix total_scatter(std::span<const ClassSamples> classes);

ScatterStatistics scatter_statistics(std::span<const ClassSamples> classes);

/// 1e-6 * trace(within) / dim, never below 1e-9.
double default_ridge(const Matrix& within);

/// Fits the discriminant transform. Without an explicit ridge the
/// scale-aware default is used.
FeatureTransform fit_transform(std::span<const ClassSamples> classes, std::optional<double> ridge = std::nullopt,
                               FeatureId feature = FeatureId::clothing);

std::vector<double> project(const FeatureTransform& transform, std::span<const double> v);

/// trace((T' d T)^-1 (T' D T)).
double fisher_ratio(const Matrix& transform, const Matrix& within, const Matrix& between);

}  // namespace enex
