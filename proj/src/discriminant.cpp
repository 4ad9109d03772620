#include "enex/discriminant.hpp"

#include "enex/error.hpp"

#include <algorithm>
#include <cmath>

namespace enex {

namespace {

std::size_t checked_dimension(std::span<const ClassSamples> classes) {
    if (classes.empty()) {
        throw Error(ErrorCode::precondition, "no classes supplied");
    }
    const std::size_t dim = classes.front().dimension();
    if (dim == 0) {
        throw Error(ErrorCode::precondition, "class '" + classes.front().label + "' has no samples");
    }
    for (const ClassSamples& c : classes) {
        if (c.samples.empty()) {
            throw Error(ErrorCode::precondition, "class '" + c.label + "' has no samples");
        }
        for (const auto& s : c.samples) {
            if (s.size() != dim) {
                throw Error(ErrorCode::dimension_mismatch, "class '" + c.label + "' holds a " +
                                                               std::to_string(s.size()) + "-d vector, expected " +
                                                               std::to_string(dim));
            }
            if (!std::all_of(s.begin(), s.end(), [](double x) { return std::isfinite(x); })) {
                throw Error(ErrorCode::non_finite, "class '" + c.label + "' holds a non-finite value");
            }
        }
    }
    return dim;
}

Eigen::Map<const Vector> as_vector(const std::vector<double>& v) {
    return {v.data(), static_cast<Eigen::Index>(v.size())};
}

Vector class_mean(const ClassSamples& c, std::size_t dim) {
    Vector mean = Vector::Zero(static_cast<Eigen::Index>(dim));
    for (const auto& s : c.samples) mean += as_vector(s);
    return mean / static_cast<double>(c.count());
}

Vector pooled_mean(std::span<const ClassSamples> classes, std::size_t dim) {
    Vector mean = Vector::Zero(static_cast<Eigen::Index>(dim));
    std::size_t total = 0;
    for (const ClassSamples& c : classes) {
        for (const auto& s : c.samples) mean += as_vector(s);
        total += c.count();
    }
    return mean / static_cast<double>(total);
}

Matrix scatter_about(const ClassSamples& c, const Vector& centre) {
    const auto dim = centre.size();
    Matrix deviations(dim, static_cast<Eigen::Index>(c.count()));
    for (std::size_t j = 0; j < c.count(); ++j) {
        deviations.col(static_cast<Eigen::Index>(j)) = as_vector(c.samples[j]) - centre;
    }
    Matrix s = Matrix::Zero(dim, dim);
    s.selfadjointView<Eigen::Lower>().rankUpdate(deviations);
    return s.selfadjointView<Eigen::Lower>();
}

Matrix between_from_means(std::span<const ClassSamples> classes, const std::vector<Vector>& means,
                          const Vector& grand) {
    const auto dim = grand.size();
    Matrix between = Matrix::Zero(dim, dim);
    for (std::size_t i = 0; i < classes.size(); ++i) {
        const Vector delta = means[i] - grand;
        between.noalias() += static_cast<double>(classes[i].count()) * delta * delta.transpose();
    }
    return between;
}

}  // namespace

WithinScatter within_scatter(std::span<const ClassSamples> classes) {
    const std::size_t dim = checked_dimension(classes);
    WithinScatter result;
    result.total = Matrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    result.per_class.reserve(classes.size());
    for (const ClassSamples& c : classes) {
        result.per_class.push_back(scatter_about(c, class_mean(c, dim)));
        result.total += result.per_class.back();
    }
    return result;
}

Matrix between_scatter(std::span<const ClassSamples> classes) {
    const std::size_t dim = checked_dimension(classes);
    if (classes.size() < 2) {
        throw Error(ErrorCode::degenerate_problem, "between-class scatter needs at least two classes");
    }
    std::vector<Vector> means;
    means.reserve(classes.size());
    for (const ClassSamples& c : classes) means.push_back(class_mean(c, dim));
    return between_from_means(classes, means, pooled_mean(classes, dim));
}

Matrix total_scatter(std::span<const ClassSamples> classes) {
    const std::size_t dim = checked_dimension(classes);
    const Vector grand = pooled_mean(classes, dim);
    Matrix total = Matrix::Zero(grand.size(), grand.size());
    for (const ClassSamples& c : classes) total += scatter_about(c, grand);
    return total;
}

ScatterStatistics scatter_statistics(std::span<const ClassSamples> classes) {
    const std::size_t dim = checked_dimension(classes);
    if (classes.size() < 2) {
        throw Error(ErrorCode::degenerate_problem, "scatter statistics need at least two classes");
    }
    ScatterStatistics stats;
    stats.grand_mean = pooled_mean(classes, dim);
    stats.within = Matrix::Zero(stats.grand_mean.size(), stats.grand_mean.size());
    for (const ClassSamples& c : classes) {
        stats.class_means.push_back(class_mean(c, dim));
        stats.within += scatter_about(c, stats.class_means.back());
    }
    stats.between = between_from_means(classes, stats.class_means, stats.grand_mean);
    return stats;
}

double default_ridge(const Matrix& within) {
    const double scaled = 1e-6 * within.trace() / static_cast<double>(within.rows());
    return std::max(scaled, 1e-9);
}

FeatureTransform fit_transform(std::span<const ClassSamples> classes, std::optional<double> ridge,
                               FeatureId feature) {
    const ScatterStatistics stats = scatter_statistics(classes);
    const double eps = ridge ? *ridge : default_ridge(stats.within);
    if (!(eps > 0.0) || !std::isfinite(eps)) {
        throw Error(ErrorCode::invalid_argument, "ridge must be positive and finite");
    }
    const auto dim = stats.within.rows();

    // Whiten with the Cholesky factor of the regularised within-class scatter so
    // the generalised problem becomes a symmetric one with real eigenvalues.
    const Matrix regularised = stats.within + eps * Matrix::Identity(dim, dim);
    const Eigen::LLT<Matrix> llt(regularised);
    if (llt.info() != Eigen::Success) {
        throw Error(ErrorCode::non_finite, "regularised within-class scatter is not positive definite");
    }
    const Matrix lower = llt.matrixL();
    Matrix whitened = lower.triangularView<Eigen::Lower>().solve(stats.between);
    whitened = lower.triangularView<Eigen::Lower>().solve(whitened.transpose()).eval();
    whitened = 0.5 * (whitened + whitened.transpose()).eval();

    const Eigen::SelfAdjointEigenSolver<Matrix> eig(whitened);
    if (eig.info() != Eigen::Success) {
        throw Error(ErrorCode::non_finite, "eigen-decomposition failed");
    }
    const Vector& values = eig.eigenvalues();  // ascending
    const double top = values(dim - 1);

    FeatureTransform transform;
    transform.feature = feature;
    transform.ridge = eps;

    std::vector<Eigen::Index> kept;
    if (top > 0.0) {
        for (Eigen::Index k = dim - 1; k >= 0; --k) {
            if (values(k) > 1e-12 * top) kept.push_back(k);
        }
    }
    if (kept.empty()) {
        transform.discriminative = false;
        transform.matrix = eig.eigenvectors().col(dim - 1);
        transform.eigenvalues = {std::max(top, 0.0)};
    } else {
        const auto upper = lower.transpose();
        transform.matrix.resize(dim, static_cast<Eigen::Index>(kept.size()));
        for (std::size_t j = 0; j < kept.size(); ++j) {
            const Vector direction = upper.triangularView<Eigen::Upper>().solve(eig.eigenvectors().col(kept[j]));
            transform.matrix.col(static_cast<Eigen::Index>(j)) = std::sqrt(values(kept[j])) * direction;
            transform.eigenvalues.push_back(values(kept[j]));
        }
    }

    // Fix column signs so the largest-magnitude entry is positive.
    for (Eigen::Index j = 0; j < transform.matrix.cols(); ++j) {
        Eigen::Index arg = 0;
        transform.matrix.col(j).cwiseAbs().maxCoeff(&arg);
        if (transform.matrix(arg, j) < 0.0) transform.matrix.col(j) *= -1.0;
    }
    if (!transform.matrix.allFinite()) {
        throw Error(ErrorCode::non_finite, "fitted transform has non-finite entries");
    }
    return transform;
}

std::vector<double> project(const FeatureTransform& transform, std::span<const double> v) {
    if (v.size() != transform.input_dimension()) {
        throw Error(ErrorCode::dimension_mismatch, "vector has " + std::to_string(v.size()) +
                                                       " entries, transform expects " +
                                                       std::to_string(transform.input_dimension()));
    }
    const Eigen::Map<const Vector> x(v.data(), static_cast<Eigen::Index>(v.size()));
    const Vector y = transform.matrix.transpose() * x;
    return {y.data(), y.data() + y.size()};
}

double fisher_ratio(const Matrix& transform, const Matrix& within, const Matrix& between) {
    const Matrix w = transform.transpose() * within * transform;
    const Matrix b = transform.transpose() * between * transform;
    return w.ldlt().solve(b).trace();
}

}  // namespace enex
