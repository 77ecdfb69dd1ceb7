#ifndef LLE_EVALUATION_HPP
#define LLE_EVALUATION_HPP

#include "lle/local_weights.hpp"
#include "lle/neighbors.hpp"
#include "lle/spectral_embedding.hpp"
#include "lle/types.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

namespace lle {

struct PcaModel {
    RowVector mean;         // 1 x D
    Matrix components;      // P x D, orthonormal rows
    Vector explained_variance; // descending
};

inline PcaModel pca_fit(const DataMatrix& data, Index p) {
    const Index n = data.n();
    const Index d = data.d();
    if (p < 1 || p > std::min(n - 1, d)) {
        throw ParameterError("PCA dimension must lie in [1, min(n-1, D)] = [1, " + std::to_string(std::min(n - 1, d)) +
                             "], got " + std::to_string(p));
    }
    PcaModel model;
    model.mean = data.points().colwise().mean();
    const Matrix centered = data.points().rowwise() - model.mean;
    const Matrix cov = (centered.transpose() * centered) / static_cast<double>(n - 1);

    Eigen::SelfAdjointEigenSolver<Matrix> solver(cov);
    if (solver.info() != Eigen::Success) {
        throw EigenSolverError("covariance eigensolver did not converge", std::numeric_limits<double>::infinity());
    }
    model.components.resize(p, d);
    model.explained_variance.resize(p);
    for (Index c = 0; c < p; ++c) {
        const Index src = d - 1 - c;
        Vector v = solver.eigenvectors().col(src).normalized();
        detail::fix_sign(v);
        model.components.row(c) = v.transpose();
        model.explained_variance(c) = std::max(0.0, solver.eigenvalues()(src));
    }
    return model;
}

inline Matrix pca_transform(const PcaModel& model, const Matrix& data) {
    if (data.cols() != model.mean.size()) {
        throw ParameterError("PCA model expects " + std::to_string(model.mean.size()) + " columns, got " +
                             std::to_string(data.cols()));
    }
    return (data.rowwise() - model.mean) * model.components.transpose();
}

namespace detail {

/* rank[i][j] = position of j in i's neighbor ordering (1 = nearest), with
 * distance ties broken by index. rank[i][i] = 0. */
inline std::vector<std::vector<Index>> neighbor_ranks(const DataMatrix& data) {
    const Index n = data.n();
    std::vector<std::vector<Index>> ranks(static_cast<std::size_t>(n), std::vector<Index>(static_cast<std::size_t>(n), 0));
    for (Index i = 0; i < n; ++i) {
        const auto row = rank_row(data, i, MetricKind::euclidean, n - 1);
        for (std::size_t r = 0; r < row.order.size(); ++r) {
            ranks[static_cast<std::size_t>(i)][static_cast<std::size_t>(row.order[r])] = static_cast<Index>(r) + 1;
        }
    }
    return ranks;
}

inline void require_rank_metric_shape(Index n_high, Index n_low, Index k) {
    if (n_high != n_low) {
        throw ParameterError("row count mismatch: " + std::to_string(n_high) + " vs " + std::to_string(n_low));
    }
    if (k < 1 || 2 * k >= n_high) {
        throw ParameterError("neighborhood size must satisfy 1 <= k < n/2, got k = " + std::to_string(k) +
                             " with n = " + std::to_string(n_high));
    }
}

/// Penalizes points inside the `shown` k-neighborhoods that are ranked beyond k in `reference`.
inline double rank_intrusion_score(const DataMatrix& reference, const DataMatrix& shown, Index k) {
    require_rank_metric_shape(reference.n(), shown.n(), k);
    const Index n = reference.n();
    const auto ranks = neighbor_ranks(reference);
    double penalty = 0.0;
    for (Index i = 0; i < n; ++i) {
        const auto shown_knn = rank_row(shown, i, MetricKind::euclidean, k);
        for (Index j : shown_knn.order) {
            const Index r = ranks[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
            if (r > k) {
                penalty += static_cast<double>(r - k);
            }
        }
    }
    const double nd = static_cast<double>(n);
    const double kd = static_cast<double>(k);
    return 1.0 - 2.0 / (nd * kd * (2.0 * nd - 3.0 * kd - 1.0)) * penalty;
}

inline std::vector<double> average_ranks(const Vector& v) {
    const Index n = v.size();
    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return v(a) < v(b); });
    std::vector<double> ranks(static_cast<std::size_t>(n));
    for (Index start = 0; start < n;) {
        Index end = start + 1;
        while (end < n && v(order[static_cast<std::size_t>(end)]) == v(order[static_cast<std::size_t>(start)])) {
            ++end;
        }
        const double avg = 0.5 * static_cast<double>(start + end - 1) + 1.0;
        for (Index t = start; t < end; ++t) {
            ranks[static_cast<std::size_t>(order[static_cast<std::size_t>(t)])] = avg;
        }
        start = end;
    }
    return ranks;
}

} // namespace detail

/// Trustworthiness: are the low-space neighbors also neighbors in the input?
inline double trustworthiness(const DataMatrix& high, const Matrix& low, Index k) {
    detail::require_rank_metric_shape(high.n(), low.rows(), k);
    return detail::rank_intrusion_score(high, DataMatrix(low), k);
}

/// Continuity: are the input neighbors kept as neighbors in the low space?
inline double continuity(const DataMatrix& high, const Matrix& low, Index k) {
    detail::require_rank_metric_shape(high.n(), low.rows(), k);
    return detail::rank_intrusion_score(DataMatrix(low), high, k);
}

/// Mean Jaccard index of the k-neighborhoods before and after embedding.
inline double neighbor_overlap(const DataMatrix& high, const Matrix& low, Index k) {
    if (high.n() != low.rows()) {
        throw ParameterError("row count mismatch: " + std::to_string(high.n()) + " vs " + std::to_string(low.rows()));
    }
    const DataMatrix low_data(low);
    const NeighborGraph a = knn_graph(high, k);
    const NeighborGraph b = knn_graph(low_data, k);
    double total = 0.0;
    for (Index i = 0; i < high.n(); ++i) {
        std::vector<Index> x = a.row(i);
        std::vector<Index> y = b.row(i);
        std::sort(x.begin(), x.end());
        std::sort(y.begin(), y.end());
        std::vector<Index> common;
        std::set_intersection(x.begin(), x.end(), y.begin(), y.end(), std::back_inserter(common));
        const double inter = static_cast<double>(common.size());
        total += inter / (static_cast<double>(x.size() + y.size()) - inter);
    }
    return total / static_cast<double>(high.n());
}

/// Spearman rank correlation with average ranks for ties.
inline double spearman_intrinsic(const Vector& embedding, const Vector& intrinsic) {
    if (embedding.size() != intrinsic.size()) {
        throw ParameterError("length mismatch: " + std::to_string(embedding.size()) + " vs " +
                             std::to_string(intrinsic.size()));
    }
    if (embedding.size() < 3) {
        throw ParameterError("Spearman correlation needs at least 3 samples");
    }
    const auto ra = detail::average_ranks(embedding);
    const auto rb = detail::average_ranks(intrinsic);
    const double n = static_cast<double>(ra.size());
    const double mean = (n + 1.0) / 2.0;
    double sab = 0.0;
    double saa = 0.0;
    double sbb = 0.0;
    for (std::size_t i = 0; i < ra.size(); ++i) {
        const double a = ra[i] - mean;
        const double b = rb[i] - mean;
        sab += a * b;
        saa += a * a;
        sbb += b * b;
    }
    if (saa == 0.0 || sbb == 0.0) {
        throw ParameterError("Spearman correlation is undefined for constant input");
    }
    return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

struct QualityReport {
    std::optional<double> phi;
    double trustworthiness = 0.0;
    double continuity = 0.0;
    double neighbor_overlap = 0.0;
    /// Absolute value; eigenvector signs are arbitrary.
    std::optional<double> spearman_intrinsic;
};

/* All metrics for one embedding. phi needs the reconstruction weights and
 * spearman needs one-column intrinsic and low matrices; otherwise they stay
 * empty. */
inline QualityReport quality_report(const DataMatrix& high, const Matrix& low, Index k, const Matrix* intrinsic = nullptr,
                                    const WeightMatrix* weights = nullptr) {
    if (high.n() != low.rows()) {
        throw ParameterError("row count mismatch: " + std::to_string(high.n()) + " vs " + std::to_string(low.rows()));
    }
    QualityReport report;
    report.trustworthiness = trustworthiness(high, low, k);
    report.continuity = continuity(high, low, k);
    report.neighbor_overlap = neighbor_overlap(high, low, k);
    if (weights != nullptr) {
        report.phi = embedding_cost(low, *weights);
    }
    if (intrinsic != nullptr) {
        if (intrinsic->rows() != high.n()) {
            throw ParameterError("intrinsic parameters do not align with data rows");
        }
        if (intrinsic->cols() == 1 && low.cols() == 1) {
            report.spearman_intrinsic = std::abs(spearman_intrinsic(low.col(0), intrinsic->col(0)));
        }
    }
    return report;
}

} // namespace lle

#endif
