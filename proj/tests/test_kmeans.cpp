#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <set>

#include "kpod/evaluation.hpp"
#include "kpod/kmeans.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using kpod::Assignment;
using kpod::Centroids;
using kpod::Matrix;

namespace {

Matrix blobs(std::size_t per, std::size_t k, std::size_t p, double separation, double noise, kpod::Seed seed,
             Assignment& truth) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> d(0.0, 1.0);
    Matrix centers(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(p));
    for (Eigen::Index c = 0; c < centers.rows(); ++c)
        for (Eigen::Index j = 0; j < centers.cols(); ++j) centers(c, j) = separation * d(rng);
    Matrix data(static_cast<Eigen::Index>(per * k), static_cast<Eigen::Index>(p));
    truth.labels.clear();
    for (std::size_t i = 0; i < per * k; ++i) {
        const auto c = static_cast<Eigen::Index>(i % k);
        truth.labels.push_back(static_cast<int>(c));
        for (Eigen::Index j = 0; j < data.cols(); ++j) data(static_cast<Eigen::Index>(i), j) = centers(c, j) + noise * d(rng);
    }
    return data;
}

}  // namespace

TEST(KMeansObjective, HandAndLoopOracle) {
    Matrix y(2, 1);
    y << 0.0, 2.0;
    Centroids b{Matrix::Constant(1, 1, 1.0)};
    EXPECT_EQ(kpod::kmeans_objective(y, Assignment{{0, 0}}, b), 2.0);
    EXPECT_EQ(kpod::kmeans_objective(y, Assignment{{0, 1}}, Centroids{y}), 0.0);

    std::mt19937_64 rng(1);
    for (int rep = 0; rep < 30; ++rep) {
        const auto g = oracle::random_grid(9, 3, rng);
        const auto c = oracle::random_grid(3, 3, rng);
        std::vector<int> labels(9);
        for (auto& l : labels) l = static_cast<int>(rng() % 3);
        EXPECT_NEAR(kpod::kmeans_objective(testutil::to_matrix(g), Assignment{labels}, Centroids{testutil::to_matrix(c)}),
                    oracle::wcss(g, labels, c), 1e-12);
    }
}

TEST(KMeansObjective, RejectsBadLabels) {
    Matrix y = Matrix::Zero(2, 1);
    Centroids b{Matrix::Zero(2, 1)};
    EXPECT_THROW(kpod::kmeans_objective(y, Assignment{{0, 2}}, b), kpod::IndexError);
    EXPECT_THROW(kpod::kmeans_objective(y, Assignment{{0, -1}}, b), kpod::IndexError);
    EXPECT_THROW(kpod::kmeans_objective(y, Assignment{{0}}, b), kpod::DimensionError);
}

TEST(KMeansPlusPlus, KEqualsNPicksEveryRow) {
    std::mt19937_64 rng(2);
    const Matrix y = testutil::to_matrix(oracle::random_grid(7, 2, rng));
    const auto s = kpod::kmeanspp_init(y, 7, 42);
    std::vector<std::size_t> rows = s.rows;
    std::sort(rows.begin(), rows.end());
    std::vector<std::size_t> all(7);
    std::iota(all.begin(), all.end(), std::size_t{0});
    EXPECT_EQ(rows, all);
    EXPECT_FALSE(s.duplicate_centers);
    for (std::size_t c = 0; c < 7; ++c)
        EXPECT_EQ(s.centroids.centers.row(static_cast<Eigen::Index>(c)), y.row(static_cast<Eigen::Index>(s.rows[c])));
}

TEST(KMeansPlusPlus, KOneAndDeterminism) {
    std::mt19937_64 rng(3);
    const Matrix y = testutil::to_matrix(oracle::random_grid(30, 3, rng));
    const auto a = kpod::kmeanspp_init(y, 1, 9);
    ASSERT_EQ(a.rows.size(), 1u);
    EXPECT_EQ(a.centroids.centers.row(0), y.row(static_cast<Eigen::Index>(a.rows[0])));
    EXPECT_EQ(kpod::kmeanspp_init(y, 4, 1234).rows, kpod::kmeanspp_init(y, 4, 1234).rows);
    // Uniform first pick reaches many different rows across seeds.
    std::set<std::size_t> firsts;
    for (kpod::Seed s = 0; s < 200; ++s) firsts.insert(kpod::kmeanspp_init(y, 1, s).rows[0]);
    EXPECT_GT(firsts.size(), 25u);
}

TEST(KMeansPlusPlus, InfeasibleAndDuplicates) {
    const Matrix y = Matrix::Zero(3, 2);
    EXPECT_THROW(kpod::kmeanspp_init(y, 4, 0), kpod::InfeasibleError);
    EXPECT_THROW(kpod::kmeanspp_init(y, 0, 0), kpod::InfeasibleError);
    Matrix two(4, 1);
    two << 0.0, 0.0, 5.0, 5.0;
    const auto s = kpod::kmeanspp_init(two, 3, 1);
    EXPECT_TRUE(s.duplicate_centers);
    EXPECT_EQ(s.rows.size(), 3u);
}

TEST(KMeansPlusPlus, SecondCenterFollowsSquaredDistance) {
    // Two pairs on a line: {0, 1} and {3, 4}.
    Matrix y(4, 1);
    y << 0.0, 1.0, 3.0, 4.0;
    // From an outer point the squared distances are 1, 9, 16; from an inner
    // one they are 1, 4, 9. Both first picks are equally likely.
    const double analytic = 0.5 * (25.0 / 26.0) + 0.5 * (13.0 / 14.0);
    const int draws = 20000;
    int opposite = 0;
    for (int s = 0; s < draws; ++s) {
        const auto rows = kpod::kmeanspp_init(y, 2, static_cast<kpod::Seed>(s) * 7919 + 1).rows;
        opposite += (rows[0] < 2) != (rows[1] < 2);
    }
    const double freq = static_cast<double>(opposite) / draws;
    const double sigma = std::sqrt(analytic * (1 - analytic) / draws);
    EXPECT_NEAR(freq, analytic, 4 * sigma);
}

TEST(AssignStep, IdentityTieAndExhaustiveOracle) {
    Matrix c(2, 1);
    c << 0.0, 2.0;
    EXPECT_EQ(kpod::assign_step(c, Centroids{c}).labels, (std::vector<int>{0, 1}));
    EXPECT_EQ(kpod::assign_step(Matrix::Constant(1, 1, 1.0), Centroids{c}).labels, (std::vector<int>{0}));

    std::mt19937_64 rng(4);
    const auto g = oracle::random_grid(40, 3, rng);
    const auto cs = oracle::random_grid(5, 3, rng);
    const auto a = kpod::assign_step(testutil::to_matrix(g), Centroids{testutil::to_matrix(cs)});
    for (std::size_t i = 0; i < g.size(); ++i) {
        int best = 0;
        double bd = 1e300;
        for (int k = 0; k < 5; ++k) {
            double d = 0;
            for (std::size_t j = 0; j < 3; ++j) d += (g[i][j] - cs[k][j]) * (g[i][j] - cs[k][j]);
            if (d < bd) {
                bd = d;
                best = k;
            }
        }
        EXPECT_EQ(a.labels[i], best);
    }
}

TEST(UpdateStep, MeansAndGroupByOracle) {
    Matrix y(3, 2);
    y << 0.0, 0.0, 2.0, 2.0, 7.0, -1.0;
    const auto b = kpod::update_step(y, Assignment{{0, 0, 1}}, 2);
    EXPECT_EQ(b.centers.row(0), (Eigen::RowVector2d(1.0, 1.0)));
    EXPECT_EQ(b.centers.row(1), y.row(2));

    std::mt19937_64 rng(5);
    const auto g = oracle::random_grid(30, 2, rng);
    std::vector<int> labels(30);
    for (std::size_t i = 0; i < 30; ++i) labels[i] = static_cast<int>(i % 4);
    const auto m = kpod::update_step(testutil::to_matrix(g), Assignment{labels}, 4);
    for (int c = 0; c < 4; ++c)
        for (std::size_t j = 0; j < 2; ++j) {
            double s = 0;
            int n = 0;
            for (std::size_t i = 0; i < 30; ++i)
                if (labels[i] == c) {
                    s += g[i][j];
                    ++n;
                }
            EXPECT_NEAR(m.centers(c, static_cast<Eigen::Index>(j)), s / n, 1e-12);
        }
}

TEST(UpdateStep, EmptyClusterTakesFarthestPoint) {
    Matrix y(4, 1);
    y << 0.0, 1.0, 2.0, 10.0;
    // Cluster 0 = {0, 1, 2, 10} (mean 3.25), cluster 1 empty: 10 is farthest.
    const auto b = kpod::update_step(y, Assignment{{0, 0, 0, 0}}, 2);
    EXPECT_DOUBLE_EQ(b.centers(1, 0), 10.0);
    EXPECT_DOUBLE_EQ(b.centers(0, 0), 1.0);
}

TEST(Lloyd, RecoversSeparatedBlobs) {
    Assignment truth;
    const Matrix y = blobs(20, 4, 3, 50.0, 1.0, 77, truth);
    const auto r = kpod::lloyd(y, 4, 5, {100, 1e-6, 5});
    EXPECT_EQ(kpod::rand_index(r.assignment, truth), 1.0);
    EXPECT_TRUE(r.converged);
    EXPECT_NEAR(r.objective, kpod::kmeans_objective(y, r.assignment, r.centroids), 1e-9);
}

TEST(Lloyd, RepeatedRowsGiveZeroObjective) {
    Matrix y(9, 2);
    for (Eigen::Index i = 0; i < 9; ++i) y.row(i) << static_cast<double>(i % 3) * 10.0, -static_cast<double>(i % 3);
    EXPECT_EQ(kpod::lloyd(y, 3, 0, {100, 1e-6, 5}).objective, 0.0);
}

TEST(Lloyd, MonotoneTrace) {
    std::mt19937_64 rng(6);
    for (int rep = 0; rep < 40; ++rep) {
        const Matrix y = testutil::to_matrix(oracle::random_grid(50, 3, rng));
        const auto r = kpod::lloyd(y, 1 + rep % 6, static_cast<kpod::Seed>(rep), {200, 1e-14, 1});
        for (std::size_t t = 1; t < r.trace.size(); ++t) EXPECT_LE(r.trace[t], r.trace[t - 1]);
    }
}

TEST(Lloyd, FixedPointAfterAssignmentStops) {
    Assignment truth;
    const Matrix y = blobs(15, 3, 2, 30.0, 1.0, 8, truth);
    const auto r = kpod::lloyd(y, 3, 2, {100, 1e-300, 1});
    ASSERT_TRUE(r.converged);
    EXPECT_EQ(kpod::assign_step(y, r.centroids), r.assignment);
    EXPECT_LT((kpod::update_step(y, r.assignment, 3).centers - r.centroids.centers).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Lloyd, DeterministicInSeed) {
    std::mt19937_64 rng(9);
    const Matrix y = testutil::to_matrix(oracle::random_grid(60, 4, rng));
    const auto a = kpod::lloyd(y, 5, 31, {100, 1e-6, 3});
    const auto b = kpod::lloyd(y, 5, 31, {100, 1e-6, 3});
    EXPECT_EQ(a.assignment, b.assignment);
    EXPECT_EQ(a.centroids.centers, b.centroids.centers);
    EXPECT_THROW(kpod::lloyd(y, 61, 0), kpod::InfeasibleError);
}

TEST(Lloyd, PermutationEquivariantFromExplicitStart) {
    std::mt19937_64 rng(10);
    const Matrix y = testutil::to_matrix(oracle::random_grid(25, 2, rng));
    Centroids start{y.topRows(3)};
    std::vector<Eigen::Index> perm(25);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    Matrix permuted(25, 2);
    for (Eigen::Index i = 0; i < 25; ++i) permuted.row(i) = y.row(perm[static_cast<std::size_t>(i)]);
    const auto a = kpod::lloyd_from(y, start, {100, 1e-300, 1});
    const auto b = kpod::lloyd_from(permuted, start, {100, 1e-300, 1});
    for (Eigen::Index i = 0; i < 25; ++i)
        EXPECT_EQ(b.assignment.labels[static_cast<std::size_t>(i)], a.assignment.labels[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])]);
    EXPECT_LT((a.centroids.centers - b.centroids.centers).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Lloyd, NeverBelowEnumeratedOptimum) {
    std::mt19937_64 rng(12);
    for (int rep = 0; rep < 30; ++rep) {
        const std::size_t n = 3 + rep % 6;
        const int k = 1 + rep % 3;
        const auto g = oracle::random_grid(n, 1 + rep % 2, rng);
        const double best = oracle::optimal_wcss(g, k);
        const auto r = kpod::lloyd(testutil::to_matrix(g), static_cast<std::size_t>(k), static_cast<kpod::Seed>(rep), {100, 1e-9, 20});
        EXPECT_GE(r.objective, best - 1e-9);
    }
}
