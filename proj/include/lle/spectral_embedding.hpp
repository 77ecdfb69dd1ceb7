#ifndef LLE_SPECTRAL_EMBEDDING_HPP
#define LLE_SPECTRAL_EMBEDDING_HPP

#include "lle/local_weights.hpp"
#include "lle/neighbors.hpp"
#include "lle/types.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>
#include <Eigen/Sparse>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace lle {

enum class NeighborRule { fixed_k, epsilon_ball };

struct LleConfig {
    Index k = 12;
    Index p = 2;
    MetricKind metric = MetricKind::euclidean;
    double reg_eps = default_reg_eps;
    /// Eigenpair residual bound relative to max(1, ||M||).
    double eig_tol = 1e-9;
    /// Trivial-eigenvalue threshold; unset means 1e-9 * (largest eigenvalue + 1).
    std::optional<double> zero_tol;
    std::uint64_t seed = 0;
    NeighborRule rule = NeighborRule::fixed_k;
    /// Radius for the epsilon-ball rule; k then acts as the per-row cap.
    double epsilon = 0.0;
    int threads = 1;

    void validate(Index n) const {
        if (k < 1 || k > n - 1) {
            throw ParameterError("k must lie in [1, n-1] = [1, " + std::to_string(n - 1) + "], got " + std::to_string(k));
        }
        if (p < 1 || p >= n) {
            throw ParameterError("p must lie in [1, n-1] = [1, " + std::to_string(n - 1) + "], got " + std::to_string(p));
        }
        if (!(reg_eps >= 0.0) || !std::isfinite(reg_eps)) {
            throw ParameterError("reg_eps must be a finite nonnegative number");
        }
        if (!(eig_tol > 0.0)) {
            throw ParameterError("eig_tol must be positive");
        }
        if (zero_tol && !(*zero_tol >= 0.0)) {
            throw ParameterError("zero_tol must be nonnegative");
        }
        if (rule == NeighborRule::epsilon_ball && !(epsilon >= 0.0)) {
            throw ParameterError("epsilon must be nonnegative");
        }
        if (threads < 1) {
            throw ParameterError("threads must be at least 1");
        }
    }
};

/// M = (I - W)^T (I - W), stored sparse.
struct AlignmentMatrix {
    using Sparse = Eigen::SparseMatrix<double>;

    Index n = 0;
    Sparse m;

    Matrix dense() const { return Matrix(m); }
};

struct EigenPairs {
    Vector values;  // ascending
    Matrix vectors; // n x count, unit columns
    double spectrum_max = 0.0;
    double max_residual = 0.0;
};

struct Embedding {
    Matrix y; // n x p
    Vector eigenvalues;
    double dropped_eigenvalue = 0.0;
    double zero_tol = 0.0;
    LleConfig config;
    std::vector<std::string> warnings;
};

inline AlignmentMatrix build_alignment_matrix(const WeightMatrix& w) {
    const Index n = w.n;
    AlignmentMatrix::Sparse identity(n, n);
    identity.setIdentity();
    const AlignmentMatrix::Sparse a = identity - AlignmentMatrix::Sparse(w.w);
    AlignmentMatrix::Sparse m = AlignmentMatrix::Sparse(a.transpose()) * a;
    // Exact symmetry; the product accumulates (i,j) and (j,i) in different orders.
    AlignmentMatrix::Sparse mt = m.transpose();
    m = 0.5 * (m + mt);
    m.prune(0.0);
    m.makeCompressed();
    return {n, std::move(m)};
}

namespace detail {

/// Flips v so its largest-magnitude entry (first one on ties) is positive.
inline void fix_sign(Eigen::Ref<Vector> v) {
    Index at = 0;
    double best = -1.0;
    for (Index i = 0; i < v.size(); ++i) {
        if (std::abs(v(i)) > best) {
            best = std::abs(v(i));
            at = i;
        }
    }
    if (v(at) < 0.0) {
        v = -v;
    }
}

inline double constant_cosine(const Vector& v) {
    const double n = static_cast<double>(v.size());
    return std::abs(v.sum()) / (std::sqrt(n) * v.norm());
}

/* Rayleigh-Ritz on span(V) intersected with the complement of the constant
 * vector; returns the bottom p Ritz pairs. With a clean spectrum this
 * reproduces eigenvectors 1..p. It stays exactly centered when near-zero
 * eigenvalues let the solver mix the constant vector into other columns, and
 * it ranks a wide near-null block by its actual eigenvalues. Since
 * M V = V diag(values), the projected matrix needs no access to M. */
inline std::pair<Vector, Matrix> centered_ritz(const Matrix& v, const Vector& values, Index p) {
    const Index n = v.rows();
    const Index m = v.cols();
    const Vector constant = Vector::Constant(n, 1.0 / std::sqrt(static_cast<double>(n)));
    const Vector captured = v * (v.transpose() * constant);
    if (captured.norm() < 1.0 - 1e-6) {
        throw Error("constant vector is not in the span of the computed eigenvectors");
    }
    const Matrix projected = v - constant * (constant.transpose() * v);
    Eigen::JacobiSVD<Matrix> svd(projected, Eigen::ComputeThinU);
    Matrix u = svd.matrixU().leftCols(m - 1);
    // Re-center and re-orthonormalize against rounding in the SVD.
    u -= constant * (constant.transpose() * u);
    u = Eigen::HouseholderQR<Matrix>(u).householderQ() * Matrix::Identity(n, m - 1);
    const Matrix c = v.transpose() * u;
    const Matrix h = c.transpose() * values.asDiagonal() * c;
    Eigen::SelfAdjointEigenSolver<Matrix> small(0.5 * (h + h.transpose()));
    Matrix vectors = u * small.eigenvectors().leftCols(p);
    for (Index col = 0; col < p; ++col) {
        vectors.col(col).normalize();
        fix_sign(vectors.col(col));
    }
    return {small.eigenvalues().head(p), vectors};
}

} // namespace detail

/* The `count` algebraically smallest eigenpairs of M.
 *
 * Dense symmetric tridiagonalization + implicit QR. Each returned pair is
 * checked against ||M v - lambda v|| <= eig_tol * max(1, ||M||_F). */
inline EigenPairs smallest_eigenpairs(const AlignmentMatrix& m, Index count, double eig_tol = 1e-9) {
    const Index n = m.n;
    if (count < 1 || count > n) {
        throw ParameterError("eigenpair count must lie in [1, " + std::to_string(n) + "], got " + std::to_string(count));
    }
    const Matrix dense = m.dense();
    Eigen::SelfAdjointEigenSolver<Matrix> solver(dense);
    const double scale = std::max(1.0, dense.norm());

    EigenPairs out;
    if (solver.info() != Eigen::Success) {
        throw EigenSolverError("symmetric eigensolver did not converge", std::numeric_limits<double>::infinity());
    }
    out.values = solver.eigenvalues().head(count);
    out.vectors = solver.eigenvectors().leftCols(count);
    out.spectrum_max = solver.eigenvalues()(n - 1);
    for (Index c = 0; c < count; ++c) {
        out.vectors.col(c).normalize();
        detail::fix_sign(out.vectors.col(c));
        const double residual = (m.m * out.vectors.col(c) - out.values(c) * out.vectors.col(c)).norm();
        out.max_residual = std::max(out.max_residual, residual);
    }
    if (!(out.max_residual <= eig_tol * scale)) {
        throw EigenSolverError("eigenpair residual exceeds tolerance", out.max_residual);
    }
    return out;
}

/* Bottom `count` eigenpairs of M = (I - W)^T (I - W) from the SVD of I - W.
 *
 * Same pairs as smallest_eigenpairs, but the right singular vectors resolve
 * a near-null space to machine precision in sigma instead of sigma^2, which
 * matters when several eigenvalues of M sit close to zero. */
inline EigenPairs smallest_eigenpairs_svd(const WeightMatrix& w, const AlignmentMatrix& m, Index count,
                                          double eig_tol = 1e-9) {
    const Index n = w.n;
    if (count < 1 || count > n) {
        throw ParameterError("eigenpair count must lie in [1, " + std::to_string(n) + "], got " + std::to_string(count));
    }
    const Matrix a = Matrix::Identity(n, n) - w.dense();
    Eigen::BDCSVD<Matrix> svd(a, Eigen::ComputeThinV);
    if (svd.info() != Eigen::Success) {
        throw EigenSolverError("SVD of I - W did not converge", std::numeric_limits<double>::infinity());
    }
    const double scale = std::max(1.0, m.dense().norm());

    EigenPairs out;
    out.values.resize(count);
    out.vectors.resize(n, count);
    out.spectrum_max = svd.singularValues()(0) * svd.singularValues()(0);
    for (Index c = 0; c < count; ++c) {
        const double sigma = svd.singularValues()(n - 1 - c);
        out.values(c) = sigma * sigma;
        out.vectors.col(c) = svd.matrixV().col(n - 1 - c).normalized();
        detail::fix_sign(out.vectors.col(c));
        const double residual = (m.m * out.vectors.col(c) - out.values(c) * out.vectors.col(c)).norm();
        out.max_residual = std::max(out.max_residual, residual);
    }
    if (!(out.max_residual <= eig_tol * scale)) {
        throw EigenSolverError("eigenpair residual exceeds tolerance", out.max_residual);
    }
    return out;
}

inline double default_zero_tol(double spectrum_max) { return 1e-9 * (spectrum_max + 1.0); }

/* Drops the trivial (constant) eigenvector and scales the next p by sqrt(n)
 * so that (1/n) Y^T Y = I.
 *
 * If the second eigenvalue is below zero_tol a degeneracy warning is
 * recorded. The embedding is the Rayleigh-Ritz solution on the bottom p+1
 * vectors, widened to the whole block below zero_tol when the smallest
 * vector is not near-constant (a disconnected graph lets the solver return
 * any null-space basis). */
inline Embedding select_embedding(const EigenPairs& pairs, Index p, Index n, double zero_tol) {
    const Index supplied = pairs.values.size();
    if (p < 1 || supplied < p + 1) {
        throw ParameterError("need at least p+1 = " + std::to_string(p + 1) + " eigenpairs, got " +
                             std::to_string(supplied));
    }
    if (pairs.vectors.rows() != n) {
        throw ParameterError("eigenvector length does not match n");
    }

    Embedding emb;
    emb.zero_tol = zero_tol;
    Index block = p + 1;
    const bool constant_first = detail::constant_cosine(pairs.vectors.col(0)) >= 1.0 - 1e-6;
    if (pairs.values(1) < zero_tol) {
        Index null_dim = 2;
        while (null_dim < supplied && pairs.values(null_dim) < zero_tol) {
            ++null_dim;
        }
        emb.warnings.push_back("degenerate spectrum: " + std::to_string(null_dim) +
                               " eigenvalues below zero_tol; the neighbor graph may be disconnected");
        if (!constant_first) {
            block = std::max(block, null_dim);
        }
    } else if (!constant_first) {
        throw Error("smallest eigenvector is not constant (cosine " +
                    std::to_string(detail::constant_cosine(pairs.vectors.col(0))) + ")");
    }

    emb.dropped_eigenvalue = pairs.values(0);
    const auto [ritz_values, ritz_vectors] =
        detail::centered_ritz(pairs.vectors.leftCols(block), pairs.values.head(block), p);
    emb.eigenvalues = ritz_values.cwiseMax(0.0);
    emb.y = std::sqrt(static_cast<double>(n)) * ritz_vectors;
    return emb;
}

/// Sum over i of ||y_i - sum_j w_ij y_j||^2, evaluated row by row from W.
inline double embedding_cost(const Matrix& y, const WeightMatrix& w) {
    if (y.rows() != w.n) {
        throw ParameterError("embedding has " + std::to_string(y.rows()) + " rows but W is " + std::to_string(w.n) + "x" +
                             std::to_string(w.n));
    }
    double total = 0.0;
    RowVector residual(y.cols());
    for (Index i = 0; i < w.n; ++i) {
        residual = y.row(i);
        for (WeightMatrix::Sparse::InnerIterator it(w.w, i); it; ++it) {
            residual -= it.value() * y.row(it.col());
        }
        total += residual.squaredNorm();
    }
    return total;
}

struct StageTimings {
    double knn = 0.0;
    double weights = 0.0;
    double alignment = 0.0;
    double eig = 0.0;

    double total() const { return knn + weights + alignment + eig; }
};

struct LleResult {
    Embedding embedding;
    NeighborGraph graph;
    WeightMatrix weights;
    AlignmentMatrix alignment;
    StageTimings timings;
    double max_residual = 0.0;
};

namespace detail {

template <class Fn>
auto run_stage(const char* stage, double& seconds, Fn&& fn) {
    const auto start = std::chrono::steady_clock::now();
    try {
        auto result = fn();
        seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        return result;
    } catch (Error& e) {
        e.set_stage(stage);
        throw;
    }
}

} // namespace detail

/// neighbors -> local weights -> M -> bottom p+1 eigenpairs -> embedding.
inline LleResult lle_fit(const DataMatrix& data, const LleConfig& config) {
    config.validate(data.n());
    LleResult r;
    r.graph = detail::run_stage("neighbors", r.timings.knn, [&] {
        return config.rule == NeighborRule::fixed_k
                   ? knn_graph(data, config.k, config.metric, config.threads)
                   : epsilon_ball_graph(data, config.epsilon, config.k, config.metric, config.threads);
    });
    r.weights = detail::run_stage("weights", r.timings.weights,
                                  [&] { return assemble_weight_matrix(data, r.graph, config.reg_eps, config.threads); });
    r.alignment = detail::run_stage("alignment", r.timings.alignment, [&] { return build_alignment_matrix(r.weights); });

    double zero_tol = 0.0;
    const EigenPairs pairs = detail::run_stage("eigensolver", r.timings.eig, [&] {
        Index count = config.p + 1;
        EigenPairs found = smallest_eigenpairs(r.alignment, count, config.eig_tol);
        zero_tol = config.zero_tol.value_or(default_zero_tol(found.spectrum_max));
        // A non-constant smallest vector means a null space that may be wider
        // than p + 1; widen the request until it is fully captured.
        while (count < data.n() && found.values(count - 1) < zero_tol &&
               detail::constant_cosine(found.vectors.col(0)) < 1.0 - 1e-6) {
            count = std::min(data.n(), 2 * count);
            found = smallest_eigenpairs(r.alignment, count, config.eig_tol);
        }
        // Several eigenvalues near zero: redo the bottom of the spectrum from
        // I - W so the near-null block is resolved at full precision.
        if (found.values(1) < zero_tol) {
            found = smallest_eigenpairs_svd(r.weights, r.alignment, count, config.eig_tol);
        }
        return found;
    });
    r.max_residual = pairs.max_residual;
    double select_seconds = 0.0;
    r.embedding = detail::run_stage("selection", select_seconds,
                                    [&] { return select_embedding(pairs, config.p, data.n(), zero_tol); });
    r.timings.eig += select_seconds;
    r.embedding.config = config;

    if (const Index closed = count_closed_classes(r.graph); closed > 1) {
        r.embedding.warnings.push_back("neighbor graph has " + std::to_string(closed) +
                                       " closed classes; the null space of M has dimension >= " + std::to_string(closed));
    }
    return r;
}

} // namespace lle

#endif
