#ifndef LLE_LOCAL_WEIGHTS_HPP
#define LLE_LOCAL_WEIGHTS_HPP

#include "lle/io.hpp"
#include "lle/neighbors.hpp"
#include "lle/parallel.hpp"
#include "lle/types.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Sparse>

#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace lle {

inline constexpr double default_reg_eps = 1e-3;

/// Relative objective change above which a point's regularization is reported.
inline constexpr double regularization_report_threshold = 0.01;

/// Difference vectors and Gram matrix of one neighborhood.
struct LocalSystem {
    Index center = 0;
    std::vector<Index> neighbors;
    Matrix z;    // D x K, column j = x_center - x_neighbors[j]
    Matrix gram; // K x K, z^T z
    double reg_eps = default_reg_eps;
};

struct LocalWeights {
    Index center = 0;
    Vector weights;
    double lagrange = 0.0;
    std::vector<Index> neighbor_indices;
    /// (w^T G_reg w - w^T G w) / w^T G_reg w, the share of the minimized
    /// objective contributed by the Tikhonov shift.
    double regularization_effect = 0.0;
};

inline LocalSystem build_local_system(const DataMatrix& data, const NeighborGraph& graph, Index i,
                                      double reg_eps = default_reg_eps) {
    if (i < 0 || i >= data.n() || i >= graph.n()) {
        throw ParameterError("point index " + std::to_string(i) + " out of range");
    }
    if (graph.n() != data.n()) {
        throw ParameterError("neighbor graph has " + std::to_string(graph.n()) + " rows but data has " +
                             std::to_string(data.n()) + " points");
    }
    if (!(reg_eps >= 0.0) || !std::isfinite(reg_eps)) {
        throw ParameterError("reg_eps must be a finite nonnegative number");
    }

    LocalSystem sys;
    sys.center = i;
    sys.neighbors = graph.row(i);
    sys.reg_eps = reg_eps;
    const Index k = static_cast<Index>(sys.neighbors.size());
    sys.z.resize(data.d(), k);
    for (Index j = 0; j < k; ++j) {
        sys.z.col(j) = (data.point(i) - data.point(sys.neighbors[static_cast<std::size_t>(j)])).transpose();
    }
    sys.gram = sys.z.transpose() * sys.z;
    return sys;
}

/// G + reg_eps * trace(G) * I, or G + reg_eps * I when the trace vanishes.
inline Matrix regularized_gram(const Matrix& gram, double reg_eps) {
    const double trace = gram.trace();
    const double shift = trace > 0.0 ? reg_eps * trace : reg_eps;
    Matrix reg = gram;
    reg.diagonal().array() += shift;
    return reg;
}

/* Minimizes w^T G_reg w subject to sum(w) = 1.
 *
 * Closed form w = G_reg^{-1} 1 / (1^T G_reg^{-1} 1), evaluated through a
 * Cholesky factorization; the multiplier is 2 / (1^T G_reg^{-1} 1). */
inline LocalWeights solve_local_weights(const LocalSystem& sys) {
    const Index k = sys.gram.rows();
    if (k < 1 || sys.gram.cols() != k) {
        throw ParameterError("local system at point " + std::to_string(sys.center) + " has a malformed Gram matrix");
    }

    LocalWeights out;
    out.center = sys.center;
    out.neighbor_indices = sys.neighbors;

    const Matrix reg = regularized_gram(sys.gram, sys.reg_eps);
    if (k == 1) {
        out.weights = Vector::Ones(1);
        out.lagrange = 2.0 * reg(0, 0);
    } else {
        Eigen::LLT<Matrix> llt(reg);
        if (llt.info() != Eigen::Success) {
            throw DegenerateNeighborhoodError(sys.center, "regularized Gram matrix is not positive definite");
        }
        const double rcond = llt.rcond();
        if (!(rcond >= std::numeric_limits<double>::epsilon())) {
            throw DegenerateNeighborhoodError(sys.center, "regularized Gram matrix is numerically singular (rcond " +
                                                              std::to_string(rcond) + ")");
        }
        const Vector u = llt.solve(Vector::Ones(k));
        const double total = u.sum();
        if (!(std::abs(total) > 0.0) || !std::isfinite(total)) {
            throw DegenerateNeighborhoodError(sys.center, "weight normalization vanished");
        }
        out.weights = u / total;
        out.lagrange = 2.0 / total;
    }

    const double reg_objective = out.weights.dot(reg * out.weights);
    const double raw_objective = out.weights.dot(sys.gram * out.weights);
    out.regularization_effect = reg_objective > 0.0 ? (reg_objective - raw_objective) / reg_objective : 0.0;
    return out;
}

/* Sparse n x n reconstruction weights. Row i holds the weights of point i at
 * its neighbor columns; the diagonal and every other column are zero. */
struct WeightMatrix {
    using Sparse = Eigen::SparseMatrix<double, Eigen::RowMajor>;

    Index n = 0;
    Sparse w;
    std::vector<double> lagrange;
    std::vector<double> regularization_effect;

    Vector row_sums() const { return w * Vector::Ones(n); }

    double row_sum_max_dev() const {
        return n == 0 ? 0.0 : (row_sums().array() - 1.0).abs().maxCoeff();
    }

    double diagonal_max_abs() const {
        double worst = 0.0;
        for (Index i = 0; i < n; ++i) {
            worst = std::max(worst, std::abs(w.coeff(i, i)));
        }
        return worst;
    }

    Index regularization_flagged() const {
        Index count = 0;
        for (double e : regularization_effect) {
            count += e > regularization_report_threshold ? 1 : 0;
        }
        return count;
    }

    Matrix dense() const { return Matrix(w); }

    /// "row col value" lines in storage order, for diffing runs.
    std::string to_coo_text() const {
        std::string out;
        for (Index r = 0; r < w.outerSize(); ++r) {
            for (Sparse::InnerIterator it(w, r); it; ++it) {
                out += std::to_string(it.row()) + ' ' + std::to_string(it.col()) + ' ' + io::format_double(it.value()) + '\n';
            }
        }
        return out;
    }
};

inline WeightMatrix assemble_weight_matrix(const DataMatrix& data, const NeighborGraph& graph,
                                           double reg_eps = default_reg_eps, int threads = 1) {
    const Index n = data.n();
    if (graph.n() != n) {
        throw ParameterError("neighbor graph does not match data");
    }

    std::vector<LocalWeights> rows(static_cast<std::size_t>(n));
    detail::parallel_for(n, threads, [&](Index i) {
        rows[static_cast<std::size_t>(i)] = solve_local_weights(build_local_system(data, graph, i, reg_eps));
    });

    WeightMatrix out;
    out.n = n;
    out.lagrange.reserve(static_cast<std::size_t>(n));
    out.regularization_effect.reserve(static_cast<std::size_t>(n));
    std::vector<Eigen::Triplet<double>> triplets;
    for (const auto& row : rows) {
        for (std::size_t j = 0; j < row.neighbor_indices.size(); ++j) {
            triplets.emplace_back(row.center, row.neighbor_indices[j], row.weights(static_cast<Index>(j)));
        }
        out.lagrange.push_back(row.lagrange);
        out.regularization_effect.push_back(row.regularization_effect);
    }
    out.w.resize(n, n);
    out.w.setFromTriplets(triplets.begin(), triplets.end());
    out.w.makeCompressed();
    return out;
}

} // namespace lle

#endif
