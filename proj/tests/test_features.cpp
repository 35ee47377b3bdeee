#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "arc/features.hpp"
#include "arc/pipeline.hpp"
#include "test_support.hpp"

using namespace arc;

namespace {

Matrix laplacian_matrix(std::size_t k, double a, double s) {
  Matrix m(k, k);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) m(i, j) = a * std::exp(-std::abs(double(i) - double(j)) / s);
  return m;
}

Matrix identity(std::size_t k) {
  Matrix m(k, k);
  for (std::size_t i = 0; i < k; ++i) m(i, i) = 1.0;
  return m;
}

double fit_sse(const Matrix& m, double a, double s) {
  double e = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) {
      const double r = m(i, j) - a * std::exp(-std::abs(double(i) - double(j)) / s);
      e += r * r;
    }
  return e;
}

// Reference cosine with no zero-norm shortcut and no clamping.
double plain_cosine(std::span<const double> u, std::span<const double> v) {
  double uv = 0.0, uu = 0.0, vv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    uv += u[i] * v[i];
    uu += u[i] * u[i];
    vv += v[i] * v[i];
  }
  return uv / std::sqrt(uu * vv);
}

}  // namespace

TEST(Exploitation, DefaultGivesSevenVectorsStartingAtInput) {
  Network net = oracle::random_network({16, 20, 5}, 1);
  Vector x = oracle::random_input(16, 2);
  auto vs = exploitation_vectors(net, x, ExploitConfig{});
  ASSERT_EQ(vs.size(), 7u);
  EXPECT_EQ(vs[0], x);
  for (const auto& v : vs) {
    EXPECT_LE(norm_inf((v - x).span()), 8.0 / 255.0 + 1e-12);
    for (double c : v) {
      EXPECT_GE(c, 0.0);
      EXPECT_LE(c, 1.0);
    }
  }
}

TEST(Exploitation, ZeroEpsKeepsEveryVectorAtInput) {
  Network net = oracle::random_network({16, 20, 5}, 1);
  Vector x = oracle::random_input(16, 2);
  ExploitConfig cfg;
  cfg.eps = 0.0;
  for (const auto& v : exploitation_vectors(net, x, cfg)) EXPECT_EQ(v, x);
}

TEST(Exploitation, LabelFrozenAtStart) {
  // Steps follow the least-likely class of the start point; the first step is
  // exactly alpha times the sign of that class's CE gradient.
  Network net = oracle::random_network({12, 16, 4}, 3);
  Vector x = Vector(std::vector<double>(12, 0.5));
  ExploitConfig cfg;
  auto vs = exploitation_vectors(net, x, cfg);
  const std::size_t ll = least_likely_class(net, x);
  Vector g = grad_input(net, x, {LossKind::kCrossEntropy, LabelRule::kGroundTruth}, ll);
  for (std::size_t i = 0; i < 12; ++i) EXPECT_NEAR(vs[1][i] - x[i], cfg.alpha * sign(g[i]), 1e-15);
}

TEST(Exploitation, NoiseModesStayInBall) {
  Network net = oracle::random_network({16, 20, 5}, 1);
  Vector x = oracle::random_input(16, 2);
  for (ExploitMode mode : {ExploitMode::kGaussianNoise, ExploitMode::kUniformNoise}) {
    ExploitConfig cfg;
    cfg.mode = mode;
    cfg.seed = 4;
    auto vs = exploitation_vectors(net, x, cfg);
    EXPECT_EQ(vs, exploitation_vectors(net, x, cfg));
    for (const auto& v : vs) EXPECT_LE(norm_inf((v - x).span()), cfg.eps + 1e-12);
    EXPECT_FALSE(vs[1] == x);
  }
}

TEST(Cosine, WorkedValues) {
  const Vector v{0.3, -1.2, 4.0};
  EXPECT_NEAR(cosine(v.span(), v.span()), 1.0, 1e-15);
  EXPECT_EQ(cosine(Vector{1, 0}.span(), Vector{0, 1}.span()), 0.0);
  EXPECT_NEAR(cosine(Vector{1, 1}.span(), Vector{1, 0}.span()), 0.70710678118654752, 1e-15);
  EXPECT_EQ(cosine(Vector{0, 0}.span(), Vector{1, 0}.span()), 0.0);
  EXPECT_EQ(cosine(Vector{1e-13, 0}.span(), Vector{1, 0}.span()), 0.0);
  EXPECT_THROW(cosine(Vector{1, 0}.span(), Vector{1, 0, 0}.span()), Error);
}

TEST(ArcMatrixTest, LinearModelGivesAllOnes) {
  Network net({8, 4}, {oracle::random_network({8, 4}, 5).weights()[0]}, {Vector(4)});
  ArcMatrix m = arc_matrix(net, oracle::random_input(8, 1), ExploitConfig{});
  for (double v : m.values.values()) EXPECT_EQ(v, 1.0);
  EXPECT_EQ(m.selected_n, 0u);
}

TEST(ArcMatrixTest, OrthogonalClassGivesIdentityAndIsNotSelected) {
  // Class 0: the gradient at step i is e_i. Class 1: constant gradient.
  std::vector<Matrix> jacs;
  for (std::size_t i = 0; i < 7; ++i) {
    Matrix j(2, 7);
    j(0, i) = 1.0;
    j(1, 0) = 2.0;
    j(1, 3) = -1.0;
    jacs.push_back(j);
  }
  EXPECT_EQ(consistency_matrix(jacs, 0), identity(7));
  ArcMatrix m = arc_matrix_from_jacobians(jacs);
  EXPECT_EQ(m.selected_n, 1u);
  for (double v : m.values.values()) EXPECT_NEAR(v, 1.0, 1e-15);
}

TEST(ArcMatrixTest, TieGoesToLowestClass) {
  std::vector<Matrix> jacs(3, Matrix{{1, 0}, {0, 1}, {1, 1}});
  EXPECT_EQ(arc_matrix_from_jacobians(jacs).selected_n, 0u);
}

TEST(ArcMatrixTest, ZeroGradientRowsCounted) {
  std::vector<Matrix> jacs{Matrix{{0, 0}}, Matrix{{1, 0}}, Matrix{{1, 0}}};
  ArcMatrix m = arc_matrix_from_jacobians(jacs);
  EXPECT_EQ(m.zero_gradients, 1u);
  EXPECT_EQ(m.values(0, 0), 0.0);
  EXPECT_EQ(m.values(1, 1), 1.0);
}

TEST(ArcMatrixTest, SelectionMatchesExhaustiveRecheck) {
  Network net = oracle::random_network({16, 24, 24, 6}, 21);
  for (std::uint64_t s = 0; s < 25; ++s) {
    Vector x = oracle::random_input(16, 300 + s);
    ExploitConfig cfg;
    ArcMatrix m = arc_matrix(net, x, cfg);
    std::vector<Matrix> jacs;
    for (const auto& v : exploitation_vectors(net, x, cfg)) jacs.push_back(jacobian(net, v));
    std::vector<double> sums(6, 0.0);
    for (std::size_t n = 0; n < 6; ++n)
      for (std::size_t i = 0; i < jacs.size(); ++i)
        for (std::size_t j = 0; j < jacs.size(); ++j) sums[n] += plain_cosine(jacs[i].row(n), jacs[j].row(n));
    // Near-ties differ between the two cosine formulas in the last ulp, so the
    // selected class must be maximal to 1e-9 and every strictly better class is an error.
    const double best = *std::max_element(sums.begin(), sums.end());
    EXPECT_GE(sums[m.selected_n], best - 1e-9) << "sample " << s;
    for (std::size_t n = 0; n < m.selected_n; ++n)
      EXPECT_LT(sums[n], sums[m.selected_n] + 1e-9) << "sample " << s << " lower class " << n;
  }
}

TEST(ArcMatrixTest, SymmetricUnitDiagonalInRange) {
  Network net = oracle::random_network({16, 24, 24, 6}, 22);
  for (std::uint64_t s = 0; s < 20; ++s) {
    ArcMatrix m = arc_matrix(net, oracle::random_input(16, s), ExploitConfig{});
    for (std::size_t i = 0; i < 7; ++i) {
      if (m.zero_gradients == 0) {
        EXPECT_NEAR(m.values(i, i), 1.0, 1e-9);
      }
      for (std::size_t j = 0; j < 7; ++j) {
        EXPECT_NEAR(m.values(i, j), m.values(j, i), 1e-9);
        EXPECT_LE(std::abs(m.values(i, j)), 1.0);
      }
    }
  }
}

TEST(ArcMean, WorkedValues) {
  Matrix ones(7, 7);
  for (double& v : ones.values()) v = 1.0;
  EXPECT_EQ(arc_mean(ones), 1.0);
  EXPECT_EQ(arc_mean(identity(7)), 0.0);
  // Checkerboard (-1)^(i+j) with zero diagonal, 4x4: off the diagonal there
  // are 4 entries of +1 and 8 of -1.
  Matrix cb(4, 4);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) cb(i, j) = i == j ? 0.0 : ((i + j) % 2 ? -1.0 : 1.0);
  EXPECT_DOUBLE_EQ(arc_mean(cb), (4.0 - 8.0) / 12.0);
}

TEST(ArcVectorTest, AllOnesPinsSigmaAtUpperBound) {
  Matrix ones(7, 7);
  for (double& v : ones.values()) v = 1.0;
  ArcVector v = arc_vector(ones);
  EXPECT_NEAR(v.A, 1.0, 1e-3);
  EXPECT_EQ(v.sigma, kSigmaMax);
  EXPECT_EQ(v.arc_mean, 1.0);
}

TEST(ArcVectorTest, GeneratedLaplacianRecovered) {
  ArcVector v = arc_vector(laplacian_matrix(7, 0.9, 1.5));
  EXPECT_NEAR(v.A, 0.9, 1e-6);
  EXPECT_NEAR(v.sigma, 1.5, 1e-6);
}

TEST(ArcVectorTest, IdentityDecaysFastAndMatchesGrid) {
  Matrix id = identity(7);
  ArcVector v = arc_vector(id);
  EXPECT_LT(v.sigma, 0.5);
  const int n = 2000;
  const double a_lo = 0.0, a_hi = 1.5, s_lo = 1e-3, s_hi = 50.0;
  const double da = (a_hi - a_lo) / (n - 1), ds = (s_hi - s_lo) / (n - 1);
  double best = INFINITY;
  int bi = 0, bk = 0;
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) {
      const double e = fit_sse(id, a_lo + i * da, s_lo + k * ds);
      if (e < best) {
        best = e;
        bi = i;
        bk = k;
      }
    }
  double resolution = 0.0;
  for (int di = -1; di <= 1; ++di)
    for (int dk = -1; dk <= 1; ++dk) {
      const int i = std::clamp(bi + di, 0, n - 1), k = std::clamp(bk + dk, 0, n - 1);
      resolution = std::max(resolution, std::abs(fit_sse(id, a_lo + i * da, s_lo + k * ds) - best));
    }
  EXPECT_LE(v.sse, best + 1e-12);
  EXPECT_LE(best - v.sse, resolution + 1e-12);
}

TEST(ArcVectorTest, RejectsNonFiniteMatrix) {
  Matrix m = identity(3);
  m(0, 1) = NAN;
  EXPECT_THROW(arc_vector(m), Error);
}

TEST(Heatmap, CsvAndPgm) {
  Matrix m{{1.0, -1.0}, {0.0, 0.5}};
  std::ostringstream csv;
  write_heatmap_csv(csv, m);
  EXPECT_EQ(csv.str(), "1,-1\n0,0.5\n");
  std::ostringstream pgm;
  write_heatmap_pgm(pgm, m);
  const std::string s = pgm.str();
  const std::string header = "P5\n2 2\n255\n";
  ASSERT_EQ(s.size(), header.size() + 4);
  EXPECT_EQ(s.substr(0, header.size()), header);
  EXPECT_EQ(static_cast<unsigned char>(s[header.size() + 0]), 255);
  EXPECT_EQ(static_cast<unsigned char>(s[header.size() + 1]), 0);
  EXPECT_EQ(static_cast<unsigned char>(s[header.size() + 2]), 128);
  EXPECT_EQ(static_cast<unsigned char>(s[header.size() + 3]), 191);
}

TEST(Heatmap, LargeTExport) {
  Network net = oracle::random_network({16, 20, 5}, 1);
  ExploitConfig cfg;
  cfg.steps = 48;
  ArcMatrix m = arc_matrix(net, oracle::random_input(16, 2), cfg);
  ASSERT_EQ(m.values.rows(), 49u);
  std::ostringstream pgm;
  write_heatmap_pgm(pgm, m.values);
  EXPECT_EQ(pgm.str().size(), std::string("P5\n49 49\n255\n").size() + 49 * 49);
}

TEST(Features, ExtractionIsDeterministicAndCsvRoundTrips) {
  Network net = oracle::random_network({8, 12, 3}, 4);
  Dataset d;
  d.num_classes = 3;
  for (std::uint64_t s = 0; s < 5; ++s) {
    d.inputs.push_back(oracle::random_input(8, s));
    d.labels.push_back(s % 3);
  }
  auto a = extract_features(net, d, ExploitConfig{}, "benign", "none", {0, 255});
  auto b = extract_features(net, d, ExploitConfig{}, "benign", "none", {0, 255});
  std::ostringstream os, os2;
  write_features_csv(os, a);
  write_features_csv(os2, b);
  EXPECT_EQ(os.str(), os2.str());
  EXPECT_EQ(os.str().substr(0, kFeatureHeader.size()), kFeatureHeader);
  std::istringstream is(os.str());
  auto back = read_features_csv(is);
  ASSERT_EQ(back.size(), a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(back[i].A, a[i].A);
    EXPECT_EQ(back[i].sigma, a[i].sigma);
    EXPECT_EQ(back[i].arc_mean, a[i].arc_mean);
    EXPECT_EQ(back[i].selected_n, a[i].selected_n);
    EXPECT_EQ(back[i].eps, a[i].eps);
  }
}
