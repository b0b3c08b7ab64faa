#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <thread>

#include "hole/holo_ops.hpp"
#include "hole/rng.hpp"
#include "oracles.hpp"

using namespace hole;

namespace {

DenseVector random_vector(std::size_t d, Rng& rng) {
  DenseVector v(d);
  for (auto& x : v) x = uniform_real(rng, -1.0, 1.0);
  return v;
}

void expect_vec_eq(const DenseVector& got, const DenseVector& want, double tol = 1e-12) {
  ASSERT_EQ(got.size(), want.size());
  for (std::size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got[i], want[i], tol) << "index " << i;
}

}  // namespace

TEST(Ccorr, WorkedExampleBothBackends) {
  const DenseVector a{1, 2, 0}, b{3, 0, 1};
  expect_vec_eq(ccorr(a, b, Backend::Naive), DenseVector{3, 2, 7});
  expect_vec_eq(ccorr(a, b, Backend::Fft), DenseVector{3, 2, 7});
  expect_vec_eq(oracle::ccorr(a, b), DenseVector{3, 2, 7});
}

TEST(Ccorr, DeltaOnTheLeftIsIdentity) {
  const DenseVector b{0.25, -3, 8, 1.5};
  for (auto be : {Backend::Naive, Backend::Fft}) expect_vec_eq(ccorr(delta(4), b, be), b);
}

TEST(Ccorr, DeltaOnTheRightGivesInvolution) {
  for (auto be : {Backend::Naive, Backend::Fft}) expect_vec_eq(ccorr(DenseVector{1, 2, 0}, delta(3), be), DenseVector{1, 0, 2});
}

TEST(Ccorr, FirstComponentIsDotProduct) {
  Rng rng = make_rng(11, Stream::Evaluation);
  for (std::size_t d : {1, 2, 5, 64, 257}) {
    const auto a = random_vector(d, rng), b = random_vector(d, rng);
    EXPECT_NEAR(ccorr(a, b)[0], dot(a, b), 1e-12);
  }
}

TEST(Ccorr, NotCommutative) {
  expect_vec_eq(ccorr(DenseVector{3, 0, 1}, DenseVector{1, 2, 0}), DenseVector{3, 7, 2});
  EXPECT_NE(ccorr(DenseVector{1, 2, 0}, DenseVector{3, 0, 1}), ccorr(DenseVector{3, 0, 1}, DenseVector{1, 2, 0}));
}

TEST(Cconv, WorkedExampleAndCommutativity) {
  const DenseVector a{1, 2, 0}, b{3, 0, 1};
  expect_vec_eq(cconv(a, b, Backend::Naive), DenseVector{5, 6, 1});
  expect_vec_eq(cconv(a, b, Backend::Fft), DenseVector{5, 6, 1});
  expect_vec_eq(cconv(b, a, Backend::Fft), DenseVector{5, 6, 1});
  expect_vec_eq(oracle::cconv(a, b), DenseVector{5, 6, 1});
  expect_vec_eq(cconv(delta(3), DenseVector{4, 5, 6}), DenseVector{4, 5, 6});
}

TEST(Cconv, NaiveIsExactlyCommutative) {
  Rng rng = make_rng(5, Stream::Evaluation);
  for (std::size_t d : {1, 2, 3, 7, 16, 33}) {
    const auto a = random_vector(d, rng), b = random_vector(d, rng);
    EXPECT_EQ(cconv(a, b, Backend::Naive), cconv(b, a, Backend::Naive));
    const auto f1 = cconv(a, b, Backend::Fft), f2 = cconv(b, a, Backend::Fft);
    for (std::size_t i = 0; i < d; ++i) EXPECT_NEAR(f1[i], f2[i], 1e-12);
  }
}

TEST(Involution, Examples) {
  EXPECT_EQ(involution(DenseVector{1, 2, 0}), (DenseVector{1, 0, 2}));
  EXPECT_EQ(involution(DenseVector{7}), (DenseVector{7}));
  expect_vec_eq(cconv(involution(DenseVector{1, 2, 0}), DenseVector{3, 0, 1}), DenseVector{3, 2, 7});
}

TEST(Involution, IsSelfInverse) {
  Rng rng = make_rng(9, Stream::Evaluation);
  for (std::size_t d : {1, 2, 6, 31}) {
    const auto a = random_vector(d, rng);
    EXPECT_EQ(involution(involution(a)), a);
  }
}

TEST(HoloOps, BackendsMatchLongDoubleOracles) {
  Rng rng = make_rng(2024, Stream::Evaluation);
  for (std::size_t d : {1, 2, 3, 4, 5, 16, 17, 128, 257}) {
    for (int rep = 0; rep < 5; ++rep) {
      const auto a = random_vector(d, rng), b = random_vector(d, rng);
      const auto want_corr = oracle::ccorr(a, b);
      const auto want_conv = oracle::cconv(a, b);
      EXPECT_LE(oracle::rel_err(ccorr(a, b, Backend::Naive), want_corr), 1e-12) << d;
      EXPECT_LE(oracle::rel_err(ccorr(a, b, Backend::Fft), want_corr), 1e-10) << d;
      EXPECT_LE(oracle::rel_err(cconv(a, b, Backend::Naive), want_conv), 1e-12) << d;
      EXPECT_LE(oracle::rel_err(cconv(a, b, Backend::Fft), want_conv), 1e-10) << d;
    }
  }
}

TEST(HoloOps, DftOracleAgreesWithDirectOracle) {
  Rng rng = make_rng(77, Stream::Evaluation);
  for (std::size_t d : {1, 3, 8, 13}) {
    const auto a = random_vector(d, rng), b = random_vector(d, rng);
    EXPECT_LE(oracle::rel_err(oracle::ccorr_dft(a, b), oracle::ccorr(a, b)), 1e-12);
  }
}

TEST(HoloOps, TripleProductIdentities) {
  Rng rng = make_rng(12, Stream::Evaluation);
  for (int rep = 0; rep < 20; ++rep) {
    const auto a = random_vector(64, rng), b = random_vector(64, rng), c = random_vector(64, rng);
    const double x = dot(c, ccorr(a, b));
    EXPECT_NEAR(x, dot(a, ccorr(c, b)), 1e-10);
    EXPECT_NEAR(x, dot(b, cconv(a, c)), 1e-10);
  }
}

TEST(HoloOps, DimensionMismatchAndEmpty) {
  try {
    (void)ccorr(DenseVector{1, 2}, DenseVector{1, 2, 3});
    FAIL() << "expected DimensionMismatch";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DimensionMismatch);
  }
  EXPECT_THROW((void)cconv(DenseVector{}, DenseVector{}), Error);
  EXPECT_THROW((void)involution(DenseVector{}), Error);
}

TEST(HoloOps, NonFiniteInputsRejected) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const double inf = std::numeric_limits<double>::infinity();
  for (auto be : {Backend::Naive, Backend::Fft}) {
    try {
      (void)ccorr(DenseVector{1, nan}, DenseVector{1, 2}, be);
      FAIL() << "expected NonFinite";
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::NonFinite);
    }
    EXPECT_THROW((void)cconv(DenseVector{1, 2}, DenseVector{inf, 2}, be), Error);
  }
}

TEST(FftContext, ReusesPlansAcrossLengths) {
  FftContext ctx;
  Rng rng = make_rng(4, Stream::Evaluation);
  for (int round = 0; round < 3; ++round) {
    for (std::size_t d : {8, 9, 8, 100}) {
      const auto a = random_vector(d, rng), b = random_vector(d, rng);
      DenseVector out(d);
      ctx.ccorr(a, b, out);
      EXPECT_LE(oracle::rel_err(out, oracle::ccorr(a, b)), 1e-10);
    }
  }
}

TEST(FftContext, OneContextPerThread) {
  auto work = [](std::uint64_t seed, double* worst) {
    Rng rng = make_rng(seed, Stream::Evaluation);
    double w = 0;
    for (int i = 0; i < 50; ++i) {
      const std::size_t d = 16 + (i % 5);
      const auto a = random_vector(d, rng), b = random_vector(d, rng);
      w = std::max(w, oracle::rel_err(ccorr(a, b), oracle::ccorr(a, b)));
    }
    *worst = w;
  };
  double w1 = 1, w2 = 1;
  std::thread t1(work, 1, &w1), t2(work, 2, &w2);
  t1.join();
  t2.join();
  EXPECT_LE(w1, 1e-10);
  EXPECT_LE(w2, 1e-10);
}
