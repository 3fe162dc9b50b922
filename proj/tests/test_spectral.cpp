#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <functional>

#include "pglfree/kernels.hpp"
#include "pglfree/spectral.hpp"

using namespace pglfree;
namespace bmp = boost::multiprecision;

namespace {

// Explicit matrix of (1/k) sum_f lambda(f) composed with the projection onto mean-zero
// functions, singular values by Jacobi SVD.
double oracle_norm(const GroupTable& t, const std::vector<PglElement>& gens) {
  const auto n = static_cast<Eigen::Index>(t.order());
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (const auto& f : gens) {
    for (std::uint32_t x = 0; x < t.order(); ++x) m(t.index_of(mul(f, t.element(x))), x) += 1.0 / gens.size();
  }
  const Eigen::MatrixXd proj = Eigen::MatrixXd::Identity(n, n) - Eigen::MatrixXd::Constant(n, n, 1.0 / n);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m * proj);
  return svd.singularValues()(0);
}

std::vector<PglElement> random_gens(const GroupTable& t, std::uint32_t k, Stream& rng) {
  std::vector<PglElement> g;
  for (std::uint32_t i = 0; i < k; ++i) g.push_back(sample_uniform(t, rng));
  return g;
}

std::string oracle_walk_count(const GroupTable& t, const std::vector<PglElement>& gens, std::uint32_t m) {
  // Counts index tuples (i1, j1, ..., im, jm) with g_i1^-1 g_j1 ... = e by direct recursion.
  std::uint64_t count = 0;
  const auto k = gens.size();
  std::function<void(const PglElement&, std::uint32_t)> rec = [&](const PglElement& acc, std::uint32_t depth) {
    if (depth == 2 * m) {
      count += acc.is_identity() ? 1 : 0;
      return;
    }
    for (std::size_t i = 0; i < k; ++i) rec(mul(acc, depth % 2 == 0 ? inv(gens[i]) : gens[i]), depth + 1);
  };
  rec(pgl_identity(t.prime()), 0);
  return std::to_string(count);
}

}  // namespace

TEST(Spectral, SandwichAgainstJacobiOracle) {
  Stream rng(11, "sandwich");
  for (std::uint32_t p : {5u, 7u}) {
    const auto t = table_for(p);
    for (std::uint32_t k : {2u, 5u, 12u}) {
      const auto gens = random_gens(*t, k, rng);
      const double exact = oracle_norm(*t, gens);
      const AveragingOperator op(*t, gens);
      EXPECT_NEAR(dense_norm(op), exact, 1e-10);
      Stream prng(3, "power", p, k);
      const NormEstimate est = estimate_norm_power(op, PowerOptions{}, prng);
      EXPECT_LE(est.lower_bound, exact + 1e-12);
      for (std::uint32_t m = 2; m <= 5; ++m) {
        const TraceBound tb = certify_norm_trace(*t, gens, m);
        EXPECT_TRUE(std::isfinite(tb.upper));
        EXPECT_GE(tb.upper, exact - 1e-12);
      }
    }
  }
}

TEST(Spectral, WalkCountMatchesBruteForce) {
  Stream rng(12, "walks");
  const auto t = table_for(5);
  for (std::uint32_t k : {2u, 3u, 4u}) {
    const auto gens = random_gens(*t, k, rng);
    for (std::uint32_t m : {1u, 2u, 3u}) {
      EXPECT_EQ(trace_walk_count(*t, gens, m, false), oracle_walk_count(*t, gens, m));
      EXPECT_EQ(trace_walk_count(*t, gens, m, true), oracle_walk_count(*t, gens, m));
    }
  }
}

TEST(Spectral, TraceBoundIsRoundedUpExactly) {
  Stream rng(13, "rounding");
  const auto t = table_for(7);
  for (int i = 0; i < 5; ++i) {
    const auto gens = random_gens(*t, 6, rng);
    const TraceBound tb = certify_norm_trace(*t, gens, 8);
    // upper is a double, hence an exact binary rational
    const bmp::cpp_rational u(tb.upper);
    bmp::cpp_rational lhs = bmp::cpp_rational(bmp::cpp_int(tb.denominator));
    for (int j = 0; j < 16; ++j) lhs *= u;
    EXPECT_GE(lhs, bmp::cpp_rational(bmp::cpp_int(tb.numerator)));
    const TraceBound again = trace_bound_from_count(t->order(), 6, 8, tb.c_m);
    EXPECT_EQ(again.upper, tb.upper);
    EXPECT_EQ(again.numerator, tb.numerator);
  }
}

TEST(Spectral, FullGroupAveragingHasZeroNorm) {
  const auto t = table_for(5);
  const std::vector<PglElement> all(t->elements().begin(), t->elements().end());
  const TraceBound tb = certify_norm_trace(*t, all, 2);
  EXPECT_TRUE(tb.degenerate);
  EXPECT_EQ(tb.upper, 0.0);
  GapOptions go;
  go.method = GapMethod::trace;
  const auto cert = certify_gap(*t, all, 1e-12, go);
  EXPECT_EQ(cert.verdict, GapVerdict::certified);
  EXPECT_LE(*cert.certified_upper(), 1e-12);
  EXPECT_LT(dense_norm(AveragingOperator(*t, all)), 1e-12);
}

TEST(Spectral, SingleGeneratorRefutes) {
  const auto t = table_for(7);
  const std::vector<PglElement> one{canonicalize(Mat2::make(7, 1, 1, 0, 1))};
  const auto cert = certify_gap(*t, one, 1.0 - 1e-6);
  EXPECT_EQ(cert.verdict, GapVerdict::refuted);
  EXPECT_GT(cert.estimate.lower_bound, 1.0 - 1e-6);
}

TEST(Spectral, SignCharacterOfS3Refutes) {
  const auto t = table_for(2);
  std::vector<PglElement> involutions;
  for (const auto& g : t->elements()) {
    if (!g.is_identity() && mul(g, g).is_identity()) involutions.push_back(g);
  }
  ASSERT_EQ(involutions.size(), 3u);
  EXPECT_TRUE(check_generation(*t, involutions));
  for (auto m : {GapMethod::dense, GapMethod::automatic}) {
    GapOptions go;
    go.method = m;
    const auto cert = certify_gap(*t, involutions, 0.99, go);
    EXPECT_EQ(cert.verdict, GapVerdict::refuted);
  }
  EXPECT_NEAR(oracle_norm(*t, involutions), 1.0, 1e-12);
}

TEST(Spectral, BorelSubgroupIsNotGeneratingAndRefutes) {
  const auto t = table_for(5);
  const std::vector<PglElement> borel{canonicalize(Mat2::make(5, 1, 1, 0, 1)), canonicalize(Mat2::make(5, 2, 0, 0, 1))};
  EXPECT_EQ(closure_size(*t, borel), 20u);
  EXPECT_FALSE(check_generation(*t, borel));
  const auto cert = certify_gap(*t, borel, 0.9);
  EXPECT_EQ(cert.verdict, GapVerdict::refuted);
  EXPECT_NEAR(oracle_norm(*t, borel), 1.0, 1e-12);
}

TEST(Spectral, AutomaticPipelineAndRecheck) {
  Stream rng(14, "auto");
  const auto t = table_for(7);
  for (std::uint32_t k : {4u, 16u}) {
    const auto gens = random_gens(*t, k, rng);
    const double exact = oracle_norm(*t, gens);
    const double eps = std::min(1.0, exact + 0.05);
    const auto cert = certify_gap(*t, gens, eps, GapOptions{}, 1);
    ASSERT_EQ(cert.verdict, GapVerdict::certified);
    EXPECT_GE(*cert.certified_upper(), exact - 1e-12);
    EXPECT_LE(*cert.certified_upper(), eps);
    EXPECT_TRUE(recheck_gap(cert).ok);
    const auto refuted = certify_gap(*t, gens, exact - 0.05, GapOptions{}, 1);
    EXPECT_EQ(refuted.verdict, GapVerdict::refuted);
    EXPECT_TRUE(recheck_gap(refuted).ok);
    EXPECT_TRUE(recheck_gap(refuted, 0).ok);  // power iteration from delta_e
    GapCertificate forged = cert;
    forged.trace.reset();
    forged.method = "dense";
    forged.dense_norm = exact - 0.01;
    EXPECT_FALSE(recheck_gap(forged).ok);
  }
}

TEST(Kernels, SerialAndParallelAreBitIdentical) {
  Stream rng(15, "kernels");
  const std::size_t n = 3 * kernels::kReductionBlock + 17;
  std::vector<double> x(n), y(n);
  for (auto& v : x) v = rng.uniform01() - 0.5;
  for (auto& v : y) v = rng.uniform01() - 0.5;
  EXPECT_EQ(kernels::serial::dot(x, y), kernels::parallel::dot(x, y));
  std::vector<double> a(x.begin(), x.begin() + 97 * 126), b = a;
  kernels::serial::subtract_block_means(a, 97);
  kernels::parallel::subtract_block_means(b, 97);
  EXPECT_EQ(a, b);

  const auto t = table_for(7);
  const auto gens = random_gens(*t, 5, rng);
  const AveragingOperator op(*t, gens);
  std::vector<double> v(op.dimension()), o1(op.dimension()), o2(op.dimension());
  for (auto& e : v) e = rng.uniform01();
  kernels::serial::average_gather(op.pull(), v, o1);
  kernels::parallel::average_gather(op.pull(), v, o2);
  EXPECT_EQ(o1, o2);

  std::vector<std::uint64_t> cur(op.dimension()), n1(op.dimension()), n2(op.dimension());
  for (auto& e : cur) e = rng.below(1000);
  const std::vector<std::uint64_t> w(op.push().count, 3);
  kernels::serial::convolve_counts<std::uint64_t>(cur, op.push(), w, n1);
  kernels::parallel::convolve_counts<std::uint64_t>(cur, op.push(), w, n2);
  EXPECT_EQ(n1, n2);
}

TEST(Spectral, AdjointIsTranspose) {
  Stream rng(16, "adjoint");
  const auto t = table_for(5);
  const AveragingOperator op(*t, random_gens(*t, 3, rng));
  std::vector<double> u(op.dimension()), v(op.dimension()), tu(op.dimension()), tsv(op.dimension());
  for (auto& e : u) e = rng.uniform01();
  for (auto& e : v) e = rng.uniform01();
  op.apply(u, tu);
  op.apply_adjoint(v, tsv);
  EXPECT_NEAR(kernels::serial::dot(tu, v), kernels::serial::dot(u, tsv), 1e-12);
}
