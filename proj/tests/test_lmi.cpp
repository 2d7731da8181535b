#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "delaycert/lmi.hpp"
#include "support/lmi_oracle.hpp"
#include "support/oracles.hpp"

using namespace delaycert;
using Catch::Approx;

namespace {

DelaySystem<double> example_system() {
  Mat a(2, 2), ad(2, 2);
  a << 0.8, 0.0, 0.05, 0.9;
  ad << -0.1, 0.0, -0.2, -0.1;
  return {a, ad, 2, 26};
}

LkfVariables<double> random_vars(std::mt19937& rng, Index n,
                                 XStructure xs = XStructure::full) {
  LkfVariables<double> v;
  v.p = symmetrize(oracle::random_mat(rng, 4 * n, 4 * n));
  v.q1 = symmetrize(oracle::random_mat(rng, n, n));
  v.q2 = symmetrize(oracle::random_mat(rng, n, n));
  v.r1 = symmetrize(oracle::random_mat(rng, n, n));
  v.r2 = symmetrize(oracle::random_mat(rng, n, n));
  v.s1 = symmetrize(oracle::random_mat(rng, n, n));
  v.s2 = symmetrize(oracle::random_mat(rng, n, n));
  if (xs == XStructure::full) {
    v.x = oracle::random_mat(rng, 3 * n, 3 * n);
  } else {
    v.x = Mat::Zero(3 * n, 3 * n);
    for (Index b = 0; b < 3; ++b)
      v.x.block(b * n, b * n, n, n) = oracle::random_mat(rng, n, n);
    v.x_structure = XStructure::block_diagonal;
  }
  return v;
}

oracle::LmiInputs to_oracle(const DelaySystem<double>& sys,
                            const LkfVariables<double>& v) {
  return {sys.a, sys.ad, sys.h1, sys.h2,
          v.p,   v.q1,   v.q2,   v.r1, v.r2, v.s1, v.s2, v.x};
}

}  // namespace

TEST_CASE("scalar_coeffs: printed values at h1 = 1, 2, 3") {
  auto c1 = scalar_coeffs(1);
  REQUIRE(c1.c1 == 1.0);
  REQUIRE(c1.c2 == 1.0);
  REQUIRE(c1.c3 == 1.0);
  auto c2 = scalar_coeffs(2);
  REQUIRE(c2.c1 == Approx(3.0));
  REQUIRE(c2.c2 == Approx(3.2));
  REQUIRE(c2.c3 == Approx(4.0));
  auto c3 = scalar_coeffs(3);
  REQUIRE(c3.c1 == Approx(2.0));
  REQUIRE(c3.c2 == Approx(2.5));
  REQUIRE(c3.c3 == Approx(2.5));
  REQUIRE_THROWS_AS(scalar_coeffs(0), std::invalid_argument);
}

TEST_CASE("interval coefficients") {
  REQUIRE(interval_T(1) == 2);
  REQUIRE(interval_gamma(1) == 3);
  REQUIRE(interval_T(0) == 1);
  REQUIRE(interval_gamma(0) == 1);
  REQUIRE(interval_T(4) == 5);
  REQUIRE(interval_gamma(4) == 15);
  REQUIRE(interval_gamma(-1) == 0);
  REQUIRE_THROWS_AS(interval_T(-1), std::invalid_argument);
  REQUIRE_THROWS_AS(interval_gamma(-2), std::invalid_argument);
}

TEST_CASE("selector algebra: e_i e_j' = delta_ij I, stack is identity") {
  for (Index n : {1, 2, 3}) {
    SelectorSet<double> sel(n);
    for (int i = 1; i <= 10; ++i)
      for (int j = 1; j <= 10; ++j) {
        Mat prod = sel.e(i) * sel.e(j).transpose();
        Mat expect = (i == j) ? Mat(Mat::Identity(n, n)) : Mat(Mat::Zero(n, n));
        REQUIRE((prod - expect).cwiseAbs().maxCoeff() == 0.0);
      }
    Mat stacked(10 * n, 10 * n);
    for (int i = 1; i <= 10; ++i)
      stacked.middleRows((i - 1) * n, n) = sel.e(i);
    REQUIRE((stacked - Mat::Identity(10 * n, 10 * n)).cwiseAbs().maxCoeff() ==
            0.0);
  }
}

TEST_CASE("gamma maps annihilate equal-block vectors") {
  const Index n = 3;
  SelectorSet<double> sel(n);
  auto g = build_gammas(sel);
  std::mt19937 rng(5150);
  Vec v = oracle::random_vec(rng, n);
  Vec zeta = Vec::Zero(10 * n);
  for (int b = 0; b < 10; ++b) zeta.segment(b * n, n) = v;
  REQUIRE((g.g1 * zeta).cwiseAbs().maxCoeff() <= 1e-14);

  // blocks 3/6 and 4/7 equal => g5 vanishes
  Vec w = Vec::Zero(10 * n);
  Vec p = oracle::random_vec(rng, n), q = oracle::random_vec(rng, n);
  w.segment(2 * n, n) = p;
  w.segment(5 * n, n) = p;
  w.segment(3 * n, n) = q;
  w.segment(6 * n, n) = q;
  REQUIRE((g.g5 * w).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("gamma_4 at n = 1 written out by hand") {
  SelectorSet<double> sel(1);
  auto g = build_gammas(sel);
  Mat expect(2, 10);
  expect << 0, 1, 0, 0, -1, 0, 0, 0, 0, 0,  //
      0, 1, 0, 0, -4, 0, 0, 3, 0, 0;
  REQUIRE((g.g4 - expect).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("omega maps: endpoint substitution and affinity in h") {
  auto sys = example_system();
  SelectorSet<double> sel(sys.n());
  auto w1 = build_omegas(sys, sys.h1, sel);
  // third block row at h = h1: e6 + (h2-h1+1) e7
  Mat row3 = w1.omega_h.middleRows(2 * sys.n(), sys.n());
  Mat expect = sel.e(6) + static_cast<double>(sys.h2 - sys.h1 + 1) * sel.e(7);
  REQUIRE((row3 - expect).cwiseAbs().maxCoeff() == 0.0);

  auto w2 = build_omegas(sys, sys.h2, sel);
  auto wm = build_omegas(sys, (sys.h1 + sys.h2) / 2, sel);
  REQUIRE(((w1.omega_h + w2.omega_h) / 2 - wm.omega_h).cwiseAbs().maxCoeff() <=
          1e-14);
  REQUIRE_THROWS_AS(build_omegas(sys, sys.h2 + 1, sel), std::invalid_argument);

  // A = I, Ad = 0 -> increment map vanishes, so omega1's first row is zero
  DelaySystem<double> still{Mat::Identity(2, 2), Mat::Zero(2, 2), 1, 2};
  auto ws = build_omegas(still, 1, SelectorSet<double>(2));
  REQUIRE(ws.omega1.topRows(2).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("assemble_pi: zero variables give the zero matrix") {
  auto sys = example_system();
  LkfVariables<double> zero;
  zero.p = Mat::Zero(8, 8);
  zero.q1 = zero.q2 = zero.r1 = zero.r2 = zero.s1 = zero.s2 = Mat::Zero(2, 2);
  zero.x = Mat::Zero(6, 6);
  REQUIRE(assemble_pi(sys, zero, sys.h1).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("assemble_pi: homogeneous of degree one in the variables") {
  auto sys = example_system();
  std::mt19937 rng(13);
  auto vars = random_vars(rng, 2);
  Mat pi = assemble_pi(sys, vars, sys.h1);
  Mat pi_scaled = assemble_pi(sys, vars.scaled(2.5), sys.h1);
  REQUIRE((pi_scaled - 2.5 * pi).cwiseAbs().maxCoeff() <=
          1e-12 * pi.cwiseAbs().maxCoeff());
}

TEST_CASE("assemble_pi: n=1 unit variables against the literal oracle") {
  DelaySystem<double> sys{Mat::Constant(1, 1, 0.5), Mat::Constant(1, 1, 0.1),
                          1, 2};
  LkfVariables<double> vars = LkfVariables<double>::identity(1);
  vars.x = Mat::Identity(3, 3);
  Mat pi = assemble_pi(sys, vars, sys.h1);
  Mat expect = oracle::pi_oracle(to_oracle(sys, vars), sys.h1);
  REQUIRE(pi.rows() == 10);
  REQUIRE((pi - symmetrize(expect)).cwiseAbs().maxCoeff() <= 1e-13);
}

TEST_CASE("assemble_pi: random instances match the literal transcription") {
  std::mt19937 rng(2718);
  for (int rep = 0; rep < 100; ++rep) {
    const Index n = 1 + static_cast<Index>(rng() % 3);
    const long h1 = 1 + static_cast<long>(rng() % 4);
    const long h2 = h1 + static_cast<long>(rng() % 5);
    DelaySystem<double> sys{oracle::random_mat(rng, n, n),
                            oracle::random_mat(rng, n, n), h1, h2};
    auto vars = random_vars(rng, n);
    for (long h : {h1, h2, (h1 + h2) / 2}) {
      Mat pi = assemble_pi(sys, vars, h);
      Mat expect = symmetrize(oracle::pi_oracle(to_oracle(sys, vars), h));
      const double scale = std::max(1.0, expect.cwiseAbs().maxCoeff());
      REQUIRE((pi - expect).cwiseAbs().maxCoeff() <= 1e-10 * scale);
      REQUIRE(symmetry_defect(pi) <= 1e-10);
    }
  }
}

TEST_CASE("assemble_pi: affine interpolation in h between the endpoints") {
  std::mt19937 rng(31415);
  for (int rep = 0; rep < 100; ++rep) {
    const Index n = 1 + static_cast<Index>(rng() % 2);
    const long h1 = 1 + static_cast<long>(rng() % 5);
    const long h2 = h1 + 1 + static_cast<long>(rng() % 6);
    DelaySystem<double> sys{oracle::random_mat(rng, n, n),
                            oracle::random_mat(rng, n, n), h1, h2};
    auto vars = random_vars(rng, n);
    Mat pi_lo = assemble_pi(sys, vars, h1);
    Mat pi_hi = assemble_pi(sys, vars, h2);
    const double denom = static_cast<double>(h2 - h1);
    const double scale = std::max(pi_lo.cwiseAbs().maxCoeff(),
                                  pi_hi.cwiseAbs().maxCoeff());
    for (long h = h1; h <= h2; ++h) {
      Mat interp = (static_cast<double>(h2 - h) * pi_lo +
                    static_cast<double>(h - h1) * pi_hi) /
                   denom;
      Mat direct = assemble_pi(sys, vars, h);
      REQUIRE((interp - direct).cwiseAbs().maxCoeff() <= 1e-9 * scale);
    }
  }
}

TEST_CASE("assemble_pi: h1 = h2 collapses to a single point") {
  DelaySystem<double> sys{Mat::Identity(2, 2) * 0.5, Mat::Zero(2, 2), 3, 3};
  std::mt19937 rng(8);
  auto vars = random_vars(rng, 2);
  Mat pi = assemble_pi(sys, vars, 3);
  Mat expect = symmetrize(oracle::pi_oracle(to_oracle(sys, vars), 3));
  REQUIRE((pi - expect).cwiseAbs().maxCoeff() <=
          1e-11 * std::max(1.0, expect.cwiseAbs().maxCoeff()));
}

TEST_CASE("block-diagonal X equals full assembly at the same X") {
  auto sys = example_system();
  std::mt19937 rng(99);
  auto vars = random_vars(rng, 2, XStructure::block_diagonal);
  auto as_full = vars;
  as_full.x_structure = XStructure::full;
  for (long h : {sys.h1, sys.h2}) {
    Mat a = assemble_pi(sys, vars, h);
    Mat b = assemble_pi(sys, as_full, h);
    REQUIRE((a - b).cwiseAbs().maxCoeff() == 0.0);
  }
  REQUIRE((assemble_rcc(vars) - assemble_rcc(as_full)).cwiseAbs().maxCoeff() ==
          0.0);
}

TEST_CASE("assemble_rcc: decoupled, rank-structured, and random cases") {
  const Index n = 2;
  LkfVariables<double> vars = LkfVariables<double>::identity(n);

  SECTION("X = 0, R2 = I: block diagonal with eigenvalues {1,3,5}") {
    Mat rcc = assemble_rcc(vars);
    Eigen::SelfAdjointEigenSolver<Mat> es(rcc);
    REQUIRE(es.eigenvalues().minCoeff() == Approx(1.0));
    REQUIRE(es.eigenvalues().maxCoeff() == Approx(5.0));
    for (double lam : es.eigenvalues())
      REQUIRE((Approx(lam) == 1.0 || Approx(lam) == 3.0 || Approx(lam) == 5.0));
  }

  SECTION("X = R2tilde: [M M; M M] has half its eigenvalues zero") {
    vars.x = r2_tilde(vars);
    Mat rcc = assemble_rcc(vars);
    Eigen::SelfAdjointEigenSolver<Mat> es(rcc);
    int zeros = 0;
    for (double lam : es.eigenvalues()) {
      REQUIRE(lam >= -1e-12);
      if (std::abs(lam) < 1e-12) ++zeros;
    }
    REQUIRE(zeros == 3 * n);
  }

  SECTION("random R2, small X: smallest eigenvalue matches direct eigensolve") {
    std::mt19937 rng(123);
    auto spd = oracle::random_spd(rng, n);
    vars.r2 = spd.mat();
    vars.x = 0.05 * oracle::random_mat(rng, 3 * n, 3 * n);
    Mat rcc = assemble_rcc(vars);
    Mat explicit_block(6 * n, 6 * n);
    Mat r2t = r2_tilde(vars);
    explicit_block << r2t, vars.x, vars.x.transpose(), r2t;
    Eigen::SelfAdjointEigenSolver<Mat> es1(rcc);
    Eigen::SelfAdjointEigenSolver<Mat> es2(symmetrize(explicit_block));
    REQUIRE(es1.eigenvalues().minCoeff() ==
            Approx(es2.eigenvalues().minCoeff()).margin(1e-12));
  }
}

TEST_CASE("reciprocally convex bound holds on the alpha grid") {
  std::mt19937 rng(60601);
  int accepted = 0;
  while (accepted < 40) {
    const Index n = 1 + static_cast<Index>(rng() % 3);
    auto r1 = oracle::random_spd(rng, n);
    auto r2 = oracle::random_spd(rng, n);
    Mat x = 0.3 * oracle::random_mat(rng, n, n);
    Mat coupled(2 * n, 2 * n);
    coupled << r1.mat(), x, x.transpose(), r2.mat();
    coupled = symmetrize(coupled);
    Eigen::SelfAdjointEigenSolver<Mat> es(coupled);
    if (es.eigenvalues().minCoeff() < 0) continue;  // need the coupled block PSD
    ++accepted;
    for (int step = 1; step <= 9; ++step) {
      const double alpha = 0.1 * step;
      Mat scaled = Mat::Zero(2 * n, 2 * n);
      scaled.topLeftCorner(n, n) = r1.mat() / alpha;
      scaled.bottomRightCorner(n, n) = r2.mat() / (1.0 - alpha);
      Eigen::SelfAdjointEigenSolver<Mat> diff(symmetrize(scaled - coupled));
      REQUIRE(diff.eigenvalues().minCoeff() >= -1e-8);
    }
  }
}

TEST_CASE("validation rejects malformed inputs") {
  auto sys = example_system();
  std::mt19937 rng(4);
  auto vars = random_vars(rng, 2);
  SECTION("non-symmetric decision matrix") {
    vars.q1(0, 1) += 1e-3;
    REQUIRE_THROWS_AS(assemble_pi(sys, vars, sys.h1), std::invalid_argument);
  }
  SECTION("dimension mismatch") {
    vars.q1 = Mat::Identity(3, 3);
    REQUIRE_THROWS_AS(assemble_pi(sys, vars, sys.h1), std::invalid_argument);
  }
  SECTION("X off-blocks must vanish when declared block-diagonal") {
    vars.x_structure = XStructure::block_diagonal;
    vars.x = Mat::Constant(6, 6, 0.1);
    REQUIRE_THROWS_AS(assemble_rcc(vars), std::invalid_argument);
  }
  SECTION("bad delay bounds") {
    DelaySystem<double> bad{Mat::Identity(2, 2), Mat::Zero(2, 2), 0, 3};
    REQUIRE_THROWS_AS(bad.validate(), std::invalid_argument);
  }
}
