#include "oracles.hpp"

#include "lle/datasets.hpp"
#include "lle/spectral_embedding.hpp"

#include <gtest/gtest.h>

#include <Eigen/QR>

#include <random>

namespace {

using lle::Index;
using lle::Matrix;
using lle::Vector;

lle::WeightMatrix weights_from_dense(const Matrix& dense) {
    lle::WeightMatrix w;
    w.n = dense.rows();
    w.w = dense.sparseView();
    return w;
}

Matrix random_matrix(std::mt19937_64& rng, Index n, Index d) {
    std::normal_distribution<double> normal;
    Matrix m(n, d);
    for (Index i = 0; i < m.size(); ++i) m(i) = normal(rng);
    return m;
}

// Three points 0, 1, 3 on a line with k = 1: W = [[0,1,0],[1,0,0],[0,1,0]].
// (I-W)^T (I-W) expanded by hand: [[2,-2,0],[-2,3,-1],[0,-1,1]].
TEST(AlignmentMatrix, ThreePointChainMatchesHandExpansion) {
    Matrix x(3, 1);
    x << 0, 1, 3;
    const lle::DataMatrix data(x);
    const auto w = lle::assemble_weight_matrix(data, lle::knn_graph(data, 1));
    const Matrix m = lle::build_alignment_matrix(w).dense();
    Matrix expected(3, 3);
    expected << 2, -2, 0, -2, 3, -1, 0, -1, 1;
    EXPECT_TRUE(m == expected) << m;
}

TEST(AlignmentMatrix, SymmetricPsdWithConstantNullVector) {
    const auto s = lle::datasets::swiss_roll(300, 21.0, 4);
    const auto w = lle::assemble_weight_matrix(s.data, lle::knn_graph(s.data, 10));
    const auto m = lle::build_alignment_matrix(w);
    const Matrix dense = m.dense();
    EXPECT_EQ((dense - dense.transpose()).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_LE((m.m * Vector::Ones(300)).cwiseAbs().maxCoeff(), 1e-10 * 300);
    std::mt19937_64 rng(4);
    for (int t = 0; t < 100; ++t) {
        const Vector z = random_matrix(rng, 300, 1);
        EXPECT_GE(z.dot(m.m * z), -1e-12 * z.squaredNorm());
    }
}

TEST(SmallestEigenpairs, DiagonalMatrix) {
    lle::AlignmentMatrix m;
    m.n = 3;
    Matrix d = Vector(Eigen::Vector3d(2, 0, 1)).asDiagonal();
    m.m = d.sparseView();
    const auto pairs = lle::smallest_eigenpairs(m, 3);
    EXPECT_NEAR(pairs.values(0), 0.0, 1e-15);
    EXPECT_NEAR(pairs.values(1), 1.0, 1e-15);
    EXPECT_NEAR(pairs.values(2), 2.0, 1e-15);
    EXPECT_NEAR(pairs.vectors(1, 0), 1.0, 1e-15);
    EXPECT_NEAR(pairs.vectors(2, 1), 1.0, 1e-15);
    EXPECT_NEAR(pairs.vectors(0, 2), 1.0, 1e-15);
}

TEST(SmallestEigenpairs, CountOutOfRange) {
    lle::AlignmentMatrix m;
    m.n = 2;
    m.m = Matrix(Matrix::Identity(2, 2)).sparseView();
    EXPECT_THROW(lle::smallest_eigenpairs(m, 0), lle::ParameterError);
    EXPECT_THROW(lle::smallest_eigenpairs(m, 3), lle::ParameterError);
}

// Toy 4x4 W with negative weights; rows sum to one.
Matrix toy_w() {
    Matrix w(4, 4);
    w << 0, 0.5, 0.5, 0,
         0.25, 0, 0.75, 0,
         0, 0.6, 0, 0.4,
         0, -0.5, 1.5, 0;
    return w;
}

TEST(SmallestEigenpairs, ToyMatrixMatchesCharacteristicPolynomial) {
    const auto m = lle::build_alignment_matrix(weights_from_dense(toy_w()));
    const Matrix dense = m.dense();
    const auto coeffs = oracle::characteristic_polynomial(dense);
    // lambda = 0 is a root (M 1 = 0): deflate it so every remaining root is simple.
    EXPECT_NEAR(static_cast<double>(coeffs[0]), 0.0, 1e-12);
    std::vector<long double> deflated(coeffs.begin() + 1, coeffs.end());
    const auto roots = oracle::real_roots(deflated, 1e-6L, oracle::gershgorin(dense) + 1.0);
    ASSERT_EQ(roots.size(), 3u);

    const auto pairs = lle::smallest_eigenpairs(m, 4);
    EXPECT_NEAR(pairs.values(0), 0.0, 1e-8);
    for (int r = 0; r < 3; ++r) EXPECT_NEAR(pairs.values(r + 1), roots[r], 1e-8);
    for (Index c = 0; c < 4; ++c) {
        EXPECT_NEAR(pairs.vectors.col(c).norm(), 1.0, 1e-12);
        for (Index d = c + 1; d < 4; ++d) EXPECT_NEAR(pairs.vectors.col(c).dot(pairs.vectors.col(d)), 0.0, 1e-8);
    }
}

TEST(SmallestEigenpairs, SmallestIsConstantAndSignConvention) {
    const auto s = lle::datasets::swiss_roll(200, 21.0, 9);
    const auto m = lle::build_alignment_matrix(lle::assemble_weight_matrix(s.data, lle::knn_graph(s.data, 10)));
    const auto pairs = lle::smallest_eigenpairs(m, 4);
    EXPECT_LE(pairs.values(0), lle::default_zero_tol(pairs.spectrum_max));
    const Vector c = Vector::Constant(200, 1.0 / std::sqrt(200.0));
    EXPECT_GT(std::abs(c.dot(pairs.vectors.col(0))), 1.0 - 1e-6);
    for (Index col = 0; col < 4; ++col) {
        Index at = 0;
        pairs.vectors.col(col).cwiseAbs().maxCoeff(&at);
        EXPECT_GT(pairs.vectors(at, col), 0.0);
        const double residual = (m.m * pairs.vectors.col(col) - pairs.values(col) * pairs.vectors.col(col)).norm();
        EXPECT_LE(residual, 1e-9 * std::max(1.0, m.dense().norm()));
    }
    EXPECT_TRUE(std::is_sorted(pairs.values.begin(), pairs.values.end()));
}

TEST(SelectEmbedding, ThreePointChainScaling) {
    Matrix x(3, 1);
    x << 0, 1, 3;
    const lle::DataMatrix data(x);
    const auto m = lle::build_alignment_matrix(lle::assemble_weight_matrix(data, lle::knn_graph(data, 1)));
    const auto pairs = lle::smallest_eigenpairs(m, 3);
    const auto emb = lle::select_embedding(pairs, 1, 3, 1e-9);
    EXPECT_TRUE(emb.y.col(0).isApprox(std::sqrt(3.0) * pairs.vectors.col(1)));
    EXPECT_NEAR((emb.y.transpose() * emb.y)(0, 0) / 3.0, 1.0, 1e-10);
    EXPECT_NEAR(emb.y.col(0).mean(), 0.0, 1e-8);
    EXPECT_TRUE(emb.warnings.empty());
}

TEST(SelectEmbedding, TooFewPairs) {
    lle::EigenPairs pairs;
    pairs.values = Vector::Zero(2);
    pairs.vectors = Matrix::Identity(3, 2);
    EXPECT_THROW(lle::select_embedding(pairs, 2, 3, 1e-9), lle::ParameterError);
}

TEST(SelectEmbedding, DisconnectedClustersWarnAndStayCentered) {
    // Two far-apart clusters of four points each, k = 2: no neighbor crosses clusters.
    Matrix x(8, 2);
    x << 0, 0, 1, 0.1, 0.2, 1, 1.1, 1.2,
         100, 100, 101, 100.3, 100.1, 101, 101.2, 101.1;
    const lle::DataMatrix data(x);
    lle::LleConfig config;
    config.k = 2;
    config.p = 1;
    const auto r = lle::lle_fit(data, config);
    ASSERT_FALSE(r.embedding.warnings.empty());
    EXPECT_NE(r.embedding.warnings.front().find("degenerate"), std::string::npos);

    // Cross-check the double zero eigenvalue against det(lambda I - M):
    // the constant and linear coefficients must both vanish.
    const Matrix dense = r.alignment.dense();
    const auto coeffs = oracle::characteristic_polynomial(dense);
    const double scale = static_cast<double>(std::abs(coeffs[2])) + 1.0;
    EXPECT_LE(std::abs(static_cast<double>(coeffs[0])), 1e-12 * scale);
    EXPECT_LE(std::abs(static_cast<double>(coeffs[1])), 1e-10 * scale);
    const auto pairs = lle::smallest_eigenpairs(r.alignment, 2);
    EXPECT_LT(pairs.values(1), lle::default_zero_tol(pairs.spectrum_max));

    EXPECT_LE(std::abs(r.embedding.y.col(0).mean()), 1e-8);
    EXPECT_NEAR(r.embedding.y.col(0).squaredNorm() / 8.0, 1.0, 1e-10);
    EXPECT_EQ(r.embedding.dropped_eigenvalue, r.embedding.dropped_eigenvalue);
}

TEST(SmallestEigenpairs, SvdPathAgreesOnCleanSpectrum) {
    const auto s = lle::datasets::swiss_roll(200, 21.0, 12);
    const auto w = lle::assemble_weight_matrix(s.data, lle::knn_graph(s.data, 10));
    const auto m = lle::build_alignment_matrix(w);
    const auto a = lle::smallest_eigenpairs(m, 4);
    const auto b = lle::smallest_eigenpairs_svd(w, m, 4);
    for (Index c = 0; c < 4; ++c) {
        EXPECT_NEAR(a.values(c), b.values(c), 1e-12);
    }
    for (Index c = 1; c < 4; ++c) {
        EXPECT_NEAR(std::abs(a.vectors.col(c).dot(b.vectors.col(c))), 1.0, 1e-8);
    }
}

// Two far-apart chains: null(I - W) is spanned by the two cluster indicators.
// Whatever basis the solver returns, the selected vector must be the centered
// indicator difference, because that is the only null vector orthogonal to 1.
TEST(SelectEmbedding, NullBlockYieldsCenteredIndicator) {
    Matrix x(10, 1);
    x << 0, 1, 2, 3, 4, 100, 101, 102, 103, 104;
    const lle::DataMatrix data(x);
    lle::LleConfig config;
    config.k = 2;
    config.p = 1;
    const auto r = lle::lle_fit(data, config);
    const Vector y = r.embedding.y.col(0);
    EXPECT_NEAR(r.embedding.eigenvalues(0), 0.0, 1e-12);
    for (Index i = 0; i < 5; ++i) {
        EXPECT_NEAR(std::abs(y(i)), 1.0, 1e-8);
        EXPECT_NEAR(y(i), -y(i + 5), 1e-8);
    }
}

TEST(SelectEmbedding, RejectsBlockWithoutConstant) {
    lle::EigenPairs pairs;
    pairs.values = Eigen::Vector3d(0.0, 0.5, 1.0);
    pairs.vectors = Matrix::Identity(4, 3);
    EXPECT_THROW(lle::select_embedding(pairs, 1, 4, 1e-9), lle::Error);
}

TEST(EmbeddingCost, FixedPointIsZero) {
    const Matrix w = toy_w();
    // y = 1 c^T is a fixed point of every row-stochastic W.
    const Matrix y = Vector::Ones(4) * Eigen::RowVector2d(3.0, -2.0);
    EXPECT_NEAR(lle::embedding_cost(y, weights_from_dense(w)), 0.0, 1e-24);
}

TEST(EmbeddingCost, EqualsQuadraticFormInM) {
    std::mt19937_64 rng(30);
    for (int trial = 0; trial < 10; ++trial) {
        const auto s = lle::datasets::swiss_roll(80, 21.0, static_cast<std::uint64_t>(trial));
        const auto w = lle::assemble_weight_matrix(s.data, lle::knn_graph(s.data, 6));
        const auto m = lle::build_alignment_matrix(w);
        const Matrix y = random_matrix(rng, 80, 3);
        const double direct = lle::embedding_cost(y, w);
        const double quadratic = (y.transpose() * (m.m * y)).trace();
        EXPECT_LE(std::abs(direct - quadratic), 1e-8 * (1.0 + quadratic));
        EXPECT_NEAR(direct, oracle::embedding_cost_dense(y, w.dense()), 1e-10 * (1.0 + direct));
    }
}

TEST(EmbeddingCost, RowMismatch) {
    EXPECT_THROW(lle::embedding_cost(Matrix::Zero(3, 1), weights_from_dense(toy_w())), lle::ParameterError);
}

TEST(LleFit, PaperSphereSettingCompletesWithInvariants) {
    const auto s = lle::datasets::punctured_sphere(800, 0.4, 7);
    lle::LleConfig config;
    config.k = 12;
    config.p = 2;
    const auto r = lle::lle_fit(s.data, config);
    const Matrix& y = r.embedding.y;
    ASSERT_EQ(y.rows(), 800);
    ASSERT_EQ(y.cols(), 2);
    EXPECT_LE(y.colwise().mean().cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_LE(((y.transpose() * y) / 800.0 - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-6);
    EXPECT_GE(r.embedding.eigenvalues.minCoeff(), 0.0);
    EXPECT_TRUE(std::is_sorted(r.embedding.eigenvalues.begin(), r.embedding.eigenvalues.end()));
}

TEST(LleFit, CostEqualsScaledEigenvalueSum) {
    std::mt19937_64 rng(40);
    for (int trial = 0; trial < 5; ++trial) {
        const lle::DataMatrix data(random_matrix(rng, 5 + trial * 10, 3));
        lle::LleConfig config;
        config.k = 2 + trial;
        config.p = trial == 0 ? 1 : 2;
        const auto r = lle::lle_fit(data, config);
        const double n = static_cast<double>(data.n());
        const double cost = lle::embedding_cost(r.embedding.y, r.weights);
        const double predicted = n * r.embedding.eigenvalues.sum();
        EXPECT_NEAR(cost, predicted, 1e-6 * std::max(cost, 1e-300) + 1e-8);
    }
}

TEST(LleFit, RejectsKEqualToN) {
    Matrix x(5, 2);
    x.setRandom();
    lle::LleConfig config;
    config.k = 5;
    config.p = 1;
    EXPECT_THROW(lle::lle_fit(lle::DataMatrix(x), config), lle::ParameterError);
    config.k = 2;
    config.p = 5;
    EXPECT_THROW(lle::lle_fit(lle::DataMatrix(x), config), lle::ParameterError);
}

TEST(LleFit, ErrorsCarryStageLabel) {
    Matrix x(6, 1);
    x << 0, 1, 2, 3, 4, 5;
    lle::LleConfig config;
    config.k = 4;
    config.p = 1;
    config.reg_eps = 0.0;
    try {
        (void)lle::lle_fit(lle::DataMatrix(x), config);
        FAIL();
    } catch (const lle::DegenerateNeighborhoodError& e) {
        EXPECT_EQ(e.stage(), "weights");
        EXPECT_EQ(std::string(e.what()).rfind("weights: ", 0), 0u);
    }
}

TEST(LleFit, InputRigidMotionKeepsSpectrumAndEmbedding) {
    std::mt19937_64 rng(50);
    const auto s = lle::datasets::swiss_roll(150, 21.0, 3);
    const Matrix q = Eigen::HouseholderQR<Matrix>(random_matrix(rng, 3, 3)).householderQ();
    lle::LleConfig config;
    config.k = 10;
    config.p = 2;
    const auto base = lle::lle_fit(s.data, config);
    const Matrix moved = (s.data.points() * q).rowwise() + Eigen::RowVector3d(4, -5, 6);
    const auto other = lle::lle_fit(lle::DataMatrix(moved), config);
    EXPECT_LE((base.embedding.eigenvalues - other.embedding.eigenvalues).cwiseAbs().maxCoeff(), 1e-8);
    for (Index c = 0; c < 2; ++c) {
        const double same = (base.embedding.y.col(c) - other.embedding.y.col(c)).cwiseAbs().maxCoeff();
        const double flipped = (base.embedding.y.col(c) + other.embedding.y.col(c)).cwiseAbs().maxCoeff();
        EXPECT_LE(std::min(same, flipped), 1e-5);
    }
}

TEST(LleFit, SmallInstanceBeatsRandomCandidates) {
    std::mt19937_64 rng(60);
    for (int trial = 0; trial < 5; ++trial) {
        const lle::DataMatrix data(random_matrix(rng, 8 + trial, 2));
        lle::LleConfig config;
        config.k = 3;
        config.p = 1;
        const auto r = lle::lle_fit(data, config);
        const double best = lle::embedding_cost(r.embedding.y, r.weights);
        for (int s = 0; s < 10000; ++s) {
            const Matrix y = oracle::random_centered_unit(rng, data.n());
            ASSERT_LE(best, lle::embedding_cost(y, r.weights) + 1e-12);
        }
    }
}

TEST(LleFit, ThreadCountIsBitwiseIrrelevant) {
    const auto s = lle::datasets::punctured_sphere(400, 0.4, 11);
    lle::LleConfig config;
    config.k = 12;
    config.p = 2;
    const auto a = lle::lle_fit(s.data, config);
    config.threads = 4;
    const auto b = lle::lle_fit(s.data, config);
    EXPECT_TRUE(a.embedding.y == b.embedding.y);
    EXPECT_TRUE(a.embedding.eigenvalues == b.embedding.eigenvalues);
}

TEST(LleFit, EpsilonBallRuleRuns) {
    const auto s = lle::datasets::swiss_roll(300, 21.0, 1);
    lle::LleConfig config;
    config.k = 12;
    config.p = 2;
    config.rule = lle::NeighborRule::epsilon_ball;
    config.epsilon = 3.0;
    const auto r = lle::lle_fit(s.data, config);
    EXPECT_FALSE(r.graph.uniform());
    EXPECT_LE(r.weights.row_sum_max_dev(), 1e-10);
    EXPECT_LE(r.embedding.y.colwise().mean().cwiseAbs().maxCoeff(), 1e-8);
}

} // namespace
