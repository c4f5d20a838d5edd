#include <gtest/gtest.h>

#include <random>

#include "kpod/baselines.hpp"
#include "kpod/evaluation.hpp"
#include "kpod/missingness.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using kpod::Mask;
using kpod::MaskedMatrix;
using kpod::Matrix;

TEST(MeanImpute, CompleteDataIsLloyd) {
    std::mt19937_64 rng(1);
    const Matrix v = testutil::to_matrix(oracle::random_grid(30, 3, rng));
    const auto a = kpod::mean_impute_cluster(MaskedMatrix::fully_observed(v), 3, 8);
    const auto b = kpod::lloyd(v, 3, 8);
    EXPECT_EQ(a.assignment, b.assignment);
    EXPECT_EQ(a.centroids.centers, b.centroids.centers);
}

TEST(MeanImpute, EqualsFirstKPodIterate) {
    std::mt19937_64 rng(2);
    const MaskedMatrix x(testutil::to_matrix(oracle::random_grid(40, 5, rng)),
                         testutil::to_mask(testutil::random_flags(40, 5, 0.3, rng)));
    kpod::KPodConfig cfg;
    cfg.k = 4;
    cfg.seed = 99;
    cfg.standardize_first = true;
    const auto mi = kpod::mean_impute_cluster(x, 4, 99, cfg.inner, true);
    const auto init = kpod::kpod_initialize(x, cfg);
    EXPECT_EQ(mi.assignment, init.assignment);
    const auto fit = kpod::kpod_fit(x, cfg);
    const auto work = kpod::standardize(x).first;
    EXPECT_EQ(fit.observed_objective_trace.front(),
              kpod::project_observed(work, kpod::reconstruct(mi.assignment, mi.centroids)));
}

TEST(Deletion, CompleteKeepsEverything) {
    std::mt19937_64 rng(3);
    const Matrix v = testutil::to_matrix(oracle::random_grid(20, 4, rng));
    const auto d = kpod::delete_cluster(MaskedMatrix::fully_observed(v), 2, 5);
    EXPECT_EQ(d.kept_columns, (std::vector<std::size_t>{0, 1, 2, 3}));
    EXPECT_EQ(d.clustering.assignment, kpod::lloyd(v, 2, 5).assignment);
}

TEST(Deletion, DropsMarColumns) {
    std::mt19937_64 rng(4);
    const Matrix v = testutil::to_matrix(oracle::random_grid(178, 13, rng));
    kpod::MechanismSpec spec;
    spec.kind = kpod::Mechanism::mar;
    spec.mar_columns = {0, 3, 6};
    spec.target_rate = 0.1;
    const auto r = kpod::ampute(v, spec);
    const auto d = kpod::delete_cluster(r.data, 3, 1);
    EXPECT_EQ(d.kept_columns, (std::vector<std::size_t>{1, 2, 4, 5, 7, 8, 9, 10, 11, 12}));
    EXPECT_EQ(d.kept_columns, kpod::complete_columns(r.data));
}

TEST(Deletion, InfeasibleWhenEveryColumnHasGaps) {
    Matrix v = Matrix::Ones(3, 2);
    Mask m = Mask::Constant(3, 2, true);
    m(0, 0) = false;
    m(1, 1) = false;
    EXPECT_THROW(kpod::delete_cluster(MaskedMatrix(v, m), 2, 0), kpod::InfeasibleError);
}

TEST(Baselines, KPodNoWorseThanMeanImputeOnAverage) {
    double kpod_total = 0.0, mi_total = 0.0;
    const int seeds = 50;
    for (int s = 0; s < seeds; ++s) {
        kpod::MixtureSpec mix{100, 10, 3, 5.0, 10.0, static_cast<kpod::Seed>(s)};
        const auto sim = kpod::simulate_mixture(mix);
        kpod::MechanismSpec spec;
        spec.target_rate = 0.3;
        spec.seed = static_cast<kpod::Seed>(1000 + s);
        const auto r = kpod::ampute(sim.values, spec);
        kpod::KPodConfig cfg;
        cfg.k = 3;
        cfg.seed = static_cast<kpod::Seed>(s);
        cfg.standardize_first = true;
        cfg.inner.n_init = 10;
        kpod_total += kpod::rand_index(kpod::kpod_fit(r.data, cfg).assignment, sim.labels);
        mi_total += kpod::rand_index(kpod::mean_impute_cluster(r.data, 3, cfg.seed, cfg.inner, true).assignment, sim.labels);
    }
    EXPECT_GE(kpod_total / seeds, mi_total / seeds);
}
