#include "rpsc/evalmetrics.hpp"
#include "rpsc/spectral.hpp"

#include <gtest/gtest.h>

using namespace rpsc;

namespace {

Matrix cliques(const std::vector<Index>& sizes, double bridge = 0.0) {
  Index n = 0;
  for (Index s : sizes) n += s;
  Matrix a = Matrix::Constant(n, n, bridge);
  Index off = 0;
  for (Index s : sizes) {
    a.block(off, off, s, s).setOnes();
    off += s;
  }
  a.diagonal().setZero();
  return a;
}

std::vector<int> block_labels(const std::vector<Index>& sizes) {
  std::vector<int> out;
  for (std::size_t c = 0; c < sizes.size(); ++c) out.insert(out.end(), static_cast<std::size_t>(sizes[c]), static_cast<int>(c));
  return out;
}

}  // namespace

TEST(Laplacian, SingleEdge) {
  Matrix a(2, 2);
  a << 0, 1, 1, 0;
  const auto eig = laplacian_spectrum(a);
  EXPECT_NEAR(eig.values[0], 0.0, 1e-12);
  EXPECT_NEAR(eig.values[1], 2.0, 1e-12);
}

TEST(Laplacian, TwoDisjointEdges) {
  Matrix a = Matrix::Zero(4, 4);
  a(0, 1) = a(1, 0) = 1.0;
  a(2, 3) = a(3, 2) = 3.0;
  const auto eig = laplacian_spectrum(a);
  EXPECT_NEAR(eig.values[0], 0.0, 1e-12);
  EXPECT_NEAR(eig.values[1], 0.0, 1e-12);
  EXPECT_NEAR(eig.values[2], 2.0, 1e-12);
}

TEST(Laplacian, SpectrumWithinZeroTwo) {
  Rng rng(3);
  for (int rep = 0; rep < 20; ++rep) {
    Matrix w = gaussian_matrix(15, 15, 1.0, rng).cwiseAbs();
    for (Index i = 0; i < 15; ++i)
      for (Index j = 0; j < 15; ++j)
        if ((i * 7 + j * 3 + rep) % 4 == 0) w(i, j) = 0.0;
    Matrix a = w + w.transpose();
    a.diagonal().setZero();
    const auto eig = laplacian_spectrum(a);
    EXPECT_GE(eig.values.minCoeff(), -1e-12);
    EXPECT_LE(eig.values.maxCoeff(), 2.0 + 1e-12);
    const Matrix lap = normalized_laplacian(a);
    for (Index k = 0; k < 15; ++k)
      EXPECT_LE((lap * eig.vectors.col(k) - eig.values[k] * eig.vectors.col(k)).norm(), 1e-8);
  }
}

TEST(Laplacian, IsolatedNodeAndValidation) {
  Matrix a = Matrix::Zero(3, 3);
  a(0, 1) = a(1, 0) = 1.0;
  const Matrix lap = normalized_laplacian(a);
  EXPECT_EQ(lap(2, 2), 1.0);
  Matrix asym = a;
  asym(0, 2) = 1.0;
  EXPECT_THROW(normalized_laplacian(asym), ValidationError);
  Matrix neg = a;
  neg(0, 1) = neg(1, 0) = -1.0;
  EXPECT_THROW(normalized_laplacian(neg), ValidationError);
  EXPECT_THROW(normalized_laplacian(Matrix::Zero(2, 3)), DimensionError);
}

TEST(Eigengap, CountsCliques) {
  EXPECT_EQ(estimate_num_clusters(cliques({5, 6, 7}), 10), 3);
  EXPECT_EQ(estimate_num_clusters(cliques({5, 6, 7}, 0.01), 10), 3);
  EXPECT_EQ(estimate_num_clusters(cliques({12}), 10), 1);
  EXPECT_THROW(estimate_num_clusters(cliques({3}), 0), ConfigError);
}

TEST(Eigengap, FromSpectrum) {
  Vector v(5);
  v << 0.0, 0.0, 0.1, 0.9, 1.0;
  EXPECT_EQ(eigengap_from_spectrum(v, 4), 3);
  EXPECT_EQ(eigengap_from_spectrum(v, 2), 2);  // gap search limited to L_max
  EXPECT_EQ(eigengap_from_spectrum(Vector::Zero(1), 3), 1);
}

TEST(Components, Blocks) {
  const auto ids = connected_components(cliques({2, 3, 1, 4}));
  EXPECT_EQ(count_components(ids), 4);
  EXPECT_EQ(ids, (std::vector<int>{0, 0, 1, 1, 1, 2, 3, 3, 3, 3}));
}

TEST(Components, PathAndEmpty) {
  Matrix path = Matrix::Zero(6, 6);
  for (Index i = 0; i + 1 < 6; ++i) path(i, i + 1) = path(i + 1, i) = 1.0;
  EXPECT_EQ(count_components(connected_components(path)), 1);
  EXPECT_EQ(count_components(connected_components(Matrix::Zero(5, 5))), 5);
  path(2, 3) = path(3, 2) = 0.1;
  EXPECT_EQ(count_components(connected_components(path, 0.5)), 2);
}

TEST(KMeans, OnePointPerCluster) {
  Rng rng(4);
  const Matrix pts = gaussian_matrix(7, 3, 1.0, rng);
  const auto km = kmeans(pts, 7, 1);
  EXPECT_NEAR(km.cost, 0.0, 1e-20);
  std::vector<int> sorted = km.labels;
  std::sort(sorted.begin(), sorted.end());
  EXPECT_EQ(sorted, (std::vector<int>{0, 1, 2, 3, 4, 5, 6}));
}

TEST(KMeans, SeparatedBlobsAndDeterminism) {
  Rng rng(5);
  Matrix pts = gaussian_matrix(60, 2, 0.1, rng);
  for (Index i = 0; i < 60; ++i) pts(i, 0) += 10.0 * static_cast<double>(i / 20);
  const auto a = kmeans(pts, 3, 9), b = kmeans(pts, 3, 9);
  EXPECT_EQ(a.labels, b.labels);
  EXPECT_EQ(a.cost, b.cost);
  std::vector<int> truth(60);
  for (int i = 0; i < 60; ++i) truth[i] = i / 20;
  EXPECT_EQ(clustering_error(a.labels, truth).ce, 0.0);
  EXPECT_THROW(kmeans(pts, 0, 1), ConfigError);
  EXPECT_THROW(kmeans(pts, 61, 1), ConfigError);
}

TEST(Spectral, RecoversCliques) {
  const std::vector<Index> sizes{8, 10, 12};
  const auto res = spectral_clustering(cliques(sizes), 3, 11);
  EXPECT_EQ(clustering_error(res.labels, block_labels(sizes)).ce, 0.0);
  const auto weak = spectral_clustering(cliques(sizes, 0.02), 3, 11);
  EXPECT_EQ(clustering_error(weak.labels, block_labels(sizes)).ce, 0.0);
}

TEST(Spectral, SingleClusterIsConstant) {
  const auto res = spectral_clustering(cliques({4, 4}), 1, 1);
  EXPECT_EQ(res.labels, std::vector<int>(8, 0));
  EXPECT_THROW(spectral_clustering(cliques({4}), 0, 1), ConfigError);
  EXPECT_THROW(spectral_clustering(cliques({4}), 5, 1), ConfigError);
}

TEST(Spectral, PermutationInvariant) {
  const std::vector<Index> sizes{6, 9, 5};
  const Matrix a = cliques(sizes, 0.05);
  const std::vector<int> truth = block_labels(sizes);
  std::vector<Index> perm(20);
  std::iota(perm.begin(), perm.end(), Index{0});
  Rng rng(6);
  std::shuffle(perm.begin(), perm.end(), rng);
  const Matrix pa = a(perm, perm);
  std::vector<int> ptruth(20);
  for (Index i = 0; i < 20; ++i) ptruth[i] = truth[perm[i]];
  const auto res = spectral_clustering(pa, 3, 2);
  EXPECT_EQ(clustering_error(res.labels, ptruth).ce, 0.0);
}

TEST(Spectral, IsolatedNodeGetsALabel) {
  Matrix a = cliques({4, 4});
  a.conservativeResize(9, 9);
  a.row(8).setZero();
  a.col(8).setZero();
  const auto res = spectral_clustering(a, 2, 3);
  ASSERT_EQ(res.labels.size(), 9u);
  EXPECT_GE(res.labels[8], 0);
  EXPECT_LT(res.labels[8], 2);
}
