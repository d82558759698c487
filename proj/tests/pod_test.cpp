// Copyright 2026 The PODR Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cmath>

#include "podr/error.hpp"
#include "podr/pod.hpp"
#include "test_support.hpp"

namespace podr {
namespace {

SnapshotMatrixd from_matrix(const Eigen::MatrixXd &m) {
    SnapshotMatrixd s;
    s.columns = m;
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
        s.columns.col(c).normalize();
        s.labels.push_back(static_cast<double>(c));
    }
    return s;
}

SnapshotMatrixd cavity_ux() {
    std::vector<Field2D> f;
    for (const VelocityField &v : testing::cavity_ensemble()) {
        f.push_back(v.ux);
    }
    return build_snapshot_matrix<double>(f, {100, 200, 300, 400, 500, 600, 700, 800, 900, 1000});
}

Eigen::VectorXd cavity_target_ux() {
    const ExperimentConfig cfg = testing::cavity_config("test_data/shared");
    return flow_state(cfg, 550).ux.values().normalized();
}

TEST(SnapshotMatrix, OnesFieldNormalises) {
    Field2D f(2, 2, Eigen::VectorXd::Ones(4));
    const std::vector<Field2D> fields{f};
    const auto s = build_snapshot_matrix<double>(fields, {1.0});
    EXPECT_TRUE(s.columns.col(0).isApprox(Eigen::VectorXd::Constant(4, 0.5), 1e-15));
}

TEST(SnapshotMatrix, CavityEnsembleShapeAndLabels) {
    const SnapshotMatrixd s = cavity_ux();
    EXPECT_EQ(s.n(), 4096);
    EXPECT_EQ(s.m(), 10);
    EXPECT_EQ(s.labels.front(), 100);
    EXPECT_EQ(s.labels.back(), 1000);
    for (Eigen::Index c = 0; c < s.m(); ++c) {
        EXPECT_NEAR(s.columns.col(c).norm(), 1.0, 1e-12);
    }
    EXPECT_TRUE(s.warnings.empty());
}

TEST(SnapshotMatrix, ZeroSnapshotNamed) {
    std::vector<Field2D> f{Field2D(2, 2, Eigen::VectorXd::Ones(4)), Field2D(2, 2)};
    try {
        build_snapshot_matrix<double>(f, {0, 1});
        FAIL();
    } catch (const NumericalError &e) {
        EXPECT_NE(std::string(e.what()).find("snapshot 1"), std::string::npos);
    }
}

TEST(SnapshotMatrix, DuplicateLabelsWarn) {
    std::vector<Field2D> f{Field2D(2, 2, Eigen::VectorXd::Ones(4)), Field2D(2, 2, Eigen::VectorXd::LinSpaced(4, 1, 4))};
    const auto s = build_snapshot_matrix<double>(f, {5, 5});
    EXPECT_EQ(s.warnings.size(), 1u);
}

TEST(PodDecompose, IdenticalColumnsAreRankDeficient) {
    Eigen::MatrixXd m = testing::random_matrix(32, 3, 1);
    m.col(2) = m.col(1);
    const PodBasisd b = pod_decompose(from_matrix(m));
    EXPECT_NEAR(b.sigma[2], 0.0, 1e-12);
}

TEST(PodDecompose, OrthonormalColumnsGiveUnitSigma) {
    const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(testing::random_matrix(16, 4, 2)).householderQ();
    const PodBasisd b = pod_decompose(from_matrix(q.leftCols(4)));
    EXPECT_TRUE(b.sigma.isApprox(Eigen::VectorXd::Ones(4), 1e-12));
}

TEST(PodDecompose, ReconstructionOrthonormalitySortingSigns) {
    const SnapshotMatrixd s = from_matrix(testing::random_matrix(64, 5, 3));
    const PodBasisd b = pod_decompose(s);
    EXPECT_EQ(b.m(), 5);
    EXPECT_EQ(b.n_b, 5);
    EXPECT_LE((b.u * b.sigma.asDiagonal() * b.v.transpose() - s.columns).norm(), 1e-10);
    EXPECT_LE((b.u.transpose() * b.u - Eigen::MatrixXd::Identity(5, 5)).norm(), 1e-10);
    EXPECT_LE((b.v.transpose() * b.v - Eigen::MatrixXd::Identity(5, 5)).norm(), 1e-10);
    for (Eigen::Index i = 0; i + 1 < b.sigma.size(); ++i) {
        EXPECT_GE(b.sigma[i], b.sigma[i + 1]);
    }
    for (Eigen::Index i = 0; i < b.m(); ++i) {
        EXPECT_GT(b.u(dominant_index(b.u.col(i)), i), 0.0);
    }
}

TEST(PodDecompose, RequiresFewerSnapshotsThanGridPoints) {
    EXPECT_THROW(pod_decompose(from_matrix(testing::random_matrix(4, 4, 1))), ConfigError);
}

TEST(ProjEstimator, Examples) {
    Eigen::Vector2d s(2, 1);
    EXPECT_NEAR(proj_error_estimator(s, 2, 1), std::sqrt(0.5), 1e-15);
    EXPECT_EQ(proj_error_estimator(s, 2, 2), 0.0);
    EXPECT_THROW(proj_error_estimator(s, 2, 0), ConfigError);
}

TEST(ProjEstimator, MonotoneInNb) {
    const PodBasisd b = pod_decompose(from_matrix(testing::random_matrix(64, 8, 4)));
    for (int k = 1; k < 8; ++k) {
        EXPECT_GE(proj_error_estimator(b.sigma, 8, k), proj_error_estimator(b.sigma, 8, k + 1));
    }
}

TEST(SelectNb, Examples) {
    Eigen::Vector3d s(2, 1, 0.5);
    EXPECT_EQ(select_nb(s, 3, proj_error_estimator(s, 3, 1)), 1);
    EXPECT_EQ(select_nb(s, 3, 10.0), 1);
    EXPECT_EQ(select_nb(s, 3, 0.0), 3);
    EXPECT_EQ(select_nb(s, 3, 0.3), 2);
}

TEST(SelectNb, CavityCaseOneWithinTen) {
    const PodBasisd b = pod_decompose(cavity_ux());
    const int nb = select_nb(b.sigma, b.m(), 5e-3);
    EXPECT_GE(nb, 1);
    EXPECT_LE(nb, 10);
}

TEST(ExactProjection, Examples) {
    const PodBasisd b = pod_decompose(from_matrix(testing::random_matrix(32, 4, 5)));
    EXPECT_NEAR(exact_projection_error(Eigen::VectorXd(b.u.col(0)), b, 1), 0.0, 1e-12);
    Eigen::MatrixXd full = Eigen::HouseholderQR<Eigen::MatrixXd>(b.u).householderQ();
    const Eigen::VectorXd orth = full.col(10);
    EXPECT_NEAR(exact_projection_error(orth, b, 4), 1.0, 1e-12);
    EXPECT_THROW(exact_projection_error(Eigen::VectorXd::Ones(5), b, 1), ConfigError);
}

TEST(ExactProjection, ColumnMatchesCoefficientTail) {
    const SnapshotMatrixd s = from_matrix(testing::random_matrix(64, 6, 6));
    const PodBasisd b = pod_decompose(s);
    for (int nb = 1; nb <= 6; ++nb) {
        for (Eigen::Index j = 0; j < 6; ++j) {
            const Eigen::VectorXd x = s.columns.col(j);
            double tail = 0;
            for (Eigen::Index i = nb; i < 6; ++i) {
                tail += std::pow(b.u.col(i).dot(x), 2);
            }
            EXPECT_NEAR(exact_projection_error(x, b, nb), std::sqrt(tail), 1e-12);
        }
    }
}

TEST(ExactProjection, ParsevalForAnyUnitVector) {
    const PodBasisd b = pod_decompose(from_matrix(testing::random_matrix(64, 6, 7)));
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const Eigen::VectorXd x = testing::random_vector(64, 100 + seed).normalized();
        const double e = exact_projection_error(x, b, 6);
        EXPECT_NEAR(pod_coefficients(x, b, 6).squaredNorm() + e * e, 1.0, 1e-10);
    }
}

TEST(ExactProjection, EstimatorIsTheTrainingMean) {
    for (const SnapshotMatrixd &s : {from_matrix(testing::random_matrix(128, 9, 8)), cavity_ux()}) {
        const PodBasisd b = pod_decompose(s);
        for (int nb = 1; nb <= b.m(); ++nb) {
            double mean = 0;
            for (Eigen::Index j = 0; j < s.m(); ++j) {
                mean += std::pow(exact_projection_error(Eigen::VectorXd(s.columns.col(j)), b, nb), 2);
            }
            mean /= static_cast<double>(s.m());
            EXPECT_NEAR(mean, std::pow(proj_error_estimator(b.sigma, b.m(), nb), 2), 1e-12) << nb;
        }
    }
}

TEST(ExactProjection, CavityDecayIsLogLinear) {
    const PodBasisd b = pod_decompose(cavity_ux());
    const Eigen::VectorXd x = cavity_target_ux();
    std::vector<double> nb, loge;
    for (int k = 1; k <= 5; ++k) {
        nb.push_back(k);
        loge.push_back(std::log(exact_projection_error(x, b, k)));
    }
    const auto fit = testing::fit_line(nb, loge);
    EXPECT_LT(fit.slope, 0.0);
    EXPECT_GE(fit.r2, 0.9);
}

TEST(PodBasisFile, RoundTripAndDiagnostics) {
    PodBasisd b = pod_decompose(from_matrix(testing::random_matrix(16, 3, 9)));
    b.n_b = 2;
    const PodBasisd c = decode_pod_basis(encode_pod_basis(b));
    EXPECT_EQ(c.n_b, 2);
    EXPECT_EQ(c.u, b.u);
    EXPECT_EQ(c.sigma, b.sigma);
    EXPECT_EQ(c.v, b.v);
    std::vector<char> bytes = encode_pod_basis(b);
    bytes[1] = 'X';
    try {
        decode_pod_basis(bytes);
        FAIL();
    } catch (const FormatError &e) {
        EXPECT_EQ(e.kind(), FormatError::Kind::BadMagic);
    }
    bytes = encode_pod_basis(b);
    bytes.pop_back();
    EXPECT_THROW(decode_pod_basis(bytes), FormatError);
}

TEST(PodTemplate, FloatScalarWorks) {
    Field2D f(4, 4, Eigen::VectorXd::LinSpaced(16, 1, 16));
    Field2D g(4, 4, Eigen::VectorXd::LinSpaced(16, 16, 1));
    const std::vector<Field2D> fields{f, g};
    const auto s = build_snapshot_matrix<float>(fields, {0, 1});
    const PodBasis<float> b = pod_decompose(s);
    EXPECT_NEAR((b.u * b.sigma.asDiagonal() * b.v.transpose() - s.columns).norm(), 0.0f, 1e-5f);
}

}  // namespace
}  // namespace podr
