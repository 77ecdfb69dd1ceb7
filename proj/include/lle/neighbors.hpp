#ifndef LLE_NEIGHBORS_HPP
#define LLE_NEIGHBORS_HPP

#include "lle/parallel.hpp"
#include "lle/types.hpp"

#include <boost/graph/adjacency_list.hpp>
#include <boost/graph/strong_components.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace lle {

enum class MetricKind { euclidean, manhattan, cosine };

inline std::string_view to_string(MetricKind metric) {
    switch (metric) {
    case MetricKind::euclidean: return "euclidean";
    case MetricKind::manhattan: return "manhattan";
    case MetricKind::cosine: return "cosine";
    }
    return "unknown";
}

inline MetricKind parse_metric(std::string_view name) {
    if (name == "euclidean") return MetricKind::euclidean;
    if (name == "manhattan") return MetricKind::manhattan;
    if (name == "cosine") return MetricKind::cosine;
    throw ParameterError("unknown metric '" + std::string(name) + "'");
}

template <class A, class B>
double pairwise_distance(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b, MetricKind metric) {
    if (a.size() != b.size()) {
        throw ParameterError("dimension mismatch: " + std::to_string(a.size()) + " vs " + std::to_string(b.size()));
    }
    switch (metric) {
    case MetricKind::euclidean: {
        double sum = 0.0;
        for (Index c = 0; c < a.size(); ++c) {
            const double diff = a(c) - b(c);
            sum += diff * diff;
        }
        return std::sqrt(sum);
    }
    case MetricKind::manhattan: {
        double sum = 0.0;
        for (Index c = 0; c < a.size(); ++c) {
            sum += std::abs(a(c) - b(c));
        }
        return sum;
    }
    case MetricKind::cosine: {
        const double na = a.norm();
        const double nb = b.norm();
        if (na == 0.0 || nb == 0.0) {
            throw ParameterError("cosine distance is undefined for a zero vector");
        }
        const double cosine = a.dot(b) / (na * nb);
        return std::clamp(1.0 - cosine, 0.0, 2.0);
    }
    }
    return 0.0;
}

/* Neighborhood N_i of every point, nearest first.
 *
 * Rows have exactly k entries under the fixed-K rule; the epsilon-ball rule
 * produces rows of varying length in [1, k]. */
struct NeighborGraph {
    Index k = 0;
    std::vector<std::vector<Index>> indices;
    std::vector<std::vector<double>> distances;

    Index n() const noexcept { return static_cast<Index>(indices.size()); }
    Index row_size(Index i) const { return static_cast<Index>(indices[static_cast<std::size_t>(i)].size()); }
    const std::vector<Index>& row(Index i) const { return indices[static_cast<std::size_t>(i)]; }

    bool uniform() const {
        return std::all_of(indices.begin(), indices.end(), [&](const auto& r) { return static_cast<Index>(r.size()) == k; });
    }

    /// n x K view, only valid when every row holds k neighbors.
    IndexMatrix indices_matrix() const {
        if (!uniform()) {
            throw ParameterError("neighbor graph rows have varying length");
        }
        IndexMatrix out(n(), k);
        for (Index i = 0; i < n(); ++i) {
            for (Index j = 0; j < k; ++j) {
                out(i, j) = indices[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
            }
        }
        return out;
    }
};

namespace detail {

inline void require_metric_compatible(const DataMatrix& data, MetricKind metric) {
    if (metric != MetricKind::cosine) {
        return;
    }
    for (Index i = 0; i < data.n(); ++i) {
        if (data.point(i).squaredNorm() == 0.0) {
            throw ParameterError("cosine metric requires nonzero points; point " + std::to_string(i) + " is zero");
        }
    }
}

/// All other points ordered by (distance, index).
struct RankedRow {
    std::vector<Index> order;
    std::vector<double> dist;
};

inline RankedRow rank_row(const DataMatrix& data, Index i, MetricKind metric, Index keep) {
    const Index n = data.n();
    std::vector<double> dist(static_cast<std::size_t>(n));
    std::vector<Index> order;
    order.reserve(static_cast<std::size_t>(n - 1));
    for (Index j = 0; j < n; ++j) {
        if (j == i) {
            continue;
        }
        dist[static_cast<std::size_t>(j)] = pairwise_distance(data.point(i), data.point(j), metric);
        order.push_back(j);
    }
    auto closer = [&](Index a, Index b) {
        const double da = dist[static_cast<std::size_t>(a)];
        const double db = dist[static_cast<std::size_t>(b)];
        return da < db || (da == db && a < b);
    };
    keep = std::min<Index>(keep, static_cast<Index>(order.size()));
    std::partial_sort(order.begin(), order.begin() + keep, order.end(), closer);
    order.resize(static_cast<std::size_t>(keep));

    RankedRow row;
    row.dist.reserve(order.size());
    for (Index j : order) {
        row.dist.push_back(dist[static_cast<std::size_t>(j)]);
    }
    row.order = std::move(order);
    return row;
}

} // namespace detail

/// Exact brute-force K-nearest-neighbor graph; ties go to the lower index.
inline NeighborGraph knn_graph(const DataMatrix& data, Index k, MetricKind metric = MetricKind::euclidean,
                               int threads = 1) {
    const Index n = data.n();
    if (k < 1 || k > n - 1) {
        throw ParameterError("k must lie in [1, n-1] = [1, " + std::to_string(n - 1) + "], got " + std::to_string(k));
    }
    detail::require_metric_compatible(data, metric);

    NeighborGraph graph;
    graph.k = k;
    graph.indices.resize(static_cast<std::size_t>(n));
    graph.distances.resize(static_cast<std::size_t>(n));
    detail::parallel_for(n, threads, [&](Index i) {
        auto ranked = detail::rank_row(data, i, metric, k);
        graph.indices[static_cast<std::size_t>(i)] = std::move(ranked.order);
        graph.distances[static_cast<std::size_t>(i)] = std::move(ranked.dist);
    });
    return graph;
}

/* Epsilon-ball neighborhoods: every point within `radius`, clipped so each
 * row keeps at least one and at most k_max neighbors (nearest first). */
inline NeighborGraph epsilon_ball_graph(const DataMatrix& data, double radius, Index k_max,
                                        MetricKind metric = MetricKind::euclidean, int threads = 1) {
    const Index n = data.n();
    if (!(radius >= 0.0) || !std::isfinite(radius)) {
        throw ParameterError("epsilon radius must be a finite nonnegative number");
    }
    if (k_max < 1 || k_max > n - 1) {
        throw ParameterError("k_max must lie in [1, n-1], got " + std::to_string(k_max));
    }
    detail::require_metric_compatible(data, metric);

    NeighborGraph graph;
    graph.k = k_max;
    graph.indices.resize(static_cast<std::size_t>(n));
    graph.distances.resize(static_cast<std::size_t>(n));
    detail::parallel_for(n, threads, [&](Index i) {
        auto ranked = detail::rank_row(data, i, metric, k_max);
        std::size_t keep = 1;
        while (keep < ranked.dist.size() && ranked.dist[keep] <= radius) {
            ++keep;
        }
        ranked.order.resize(keep);
        ranked.dist.resize(keep);
        graph.indices[static_cast<std::size_t>(i)] = std::move(ranked.order);
        graph.distances[static_cast<std::size_t>(i)] = std::move(ranked.dist);
    });
    return graph;
}

/* Number of closed classes of the directed neighbor relation: strongly
 * connected components with no neighbor outside themselves. Each closed class
 * admits a vector constant on it with y = W y, so this count is a lower bound
 * on the null-space dimension of (I - W). */
inline Index count_closed_classes(const NeighborGraph& graph) {
    using Digraph = boost::adjacency_list<boost::vecS, boost::vecS, boost::directedS>;
    const Index n = graph.n();
    Digraph g(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) {
        for (Index j : graph.row(i)) {
            boost::add_edge(static_cast<std::size_t>(i), static_cast<std::size_t>(j), g);
        }
    }
    std::vector<int> component(static_cast<std::size_t>(n));
    const int count = boost::strong_components(g, component.data());
    std::vector<bool> leaves(static_cast<std::size_t>(count), false);
    for (Index i = 0; i < n; ++i) {
        for (Index j : graph.row(i)) {
            const int ci = component[static_cast<std::size_t>(i)];
            if (ci != component[static_cast<std::size_t>(j)]) {
                leaves[static_cast<std::size_t>(ci)] = true;
            }
        }
    }
    return static_cast<Index>(std::count(leaves.begin(), leaves.end(), false));
}

} // namespace lle

#endif
