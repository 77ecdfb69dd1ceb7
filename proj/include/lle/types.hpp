#ifndef LLE_TYPES_HPP
#define LLE_TYPES_HPP

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <exception>
#include <string>
#include <utility>

namespace lle {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;
using IndexMatrix = Eigen::Matrix<Index, Eigen::Dynamic, Eigen::Dynamic>;

/* Error hierarchy. Every failure the library can report derives from
 * lle::Error so callers (the CLI in particular) can map categories onto
 * exit codes without string matching. */
class Error : public std::exception {
public:
    explicit Error(std::string message) : message_(std::move(message)) {}

    const char* what() const noexcept override { return message_.c_str(); }

    const std::string& stage() const noexcept { return stage_; }

    /// Tags the error with the pipeline stage that raised it.
    void set_stage(const std::string& stage) {
        if (stage_.empty()) {
            stage_ = stage;
            message_ = stage + ": " + message_;
        }
    }

private:
    std::string message_;
    std::string stage_;
};

/// Invalid argument or configuration.
class ParameterError : public Error {
public:
    using Error::Error;
};

/// Malformed input file contents.
class FormatError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

/// A local Gram system that stays singular after regularization.
class DegenerateNeighborhoodError : public Error {
public:
    DegenerateNeighborhoodError(Index point, const std::string& what)
        : Error("degenerate neighborhood at point " + std::to_string(point) + ": " + what), point_(point) {}

    Index point() const noexcept { return point_; }

private:
    Index point_;
};

class EigenSolverError : public Error {
public:
    EigenSolverError(const std::string& what, double residual)
        : Error(what + " (achieved residual " + std::to_string(residual) + ")"), residual_(residual) {}

    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

/// n points in D dimensions, one point per row.
class DataMatrix {
public:
    DataMatrix() = default;

    explicit DataMatrix(Matrix points) : points_(std::move(points)) {
        if (points_.rows() < 2) {
            throw ParameterError("data matrix needs at least 2 points, got " + std::to_string(points_.rows()));
        }
        if (points_.cols() < 1) {
            throw ParameterError("data matrix needs at least 1 column");
        }
        if (!points_.allFinite()) {
            throw ParameterError("data matrix contains non-finite entries");
        }
    }

    const Matrix& points() const noexcept { return points_; }
    Index n() const noexcept { return points_.rows(); }
    Index d() const noexcept { return points_.cols(); }

    auto point(Index i) const { return points_.row(i); }

private:
    Matrix points_;
};

} // namespace lle

#endif
