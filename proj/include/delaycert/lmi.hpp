#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "delaycert/types.hpp"

namespace delaycert {

/// Linear discrete-time system x(k+1) = A x(k) + Ad x(k-h(k)) with an
/// interval time-varying delay h(k) in [h1, h2].
template <class Scalar>
struct DelaySystem {
  Matrix<Scalar> a;
  Matrix<Scalar> ad;
  long h1 = 1;
  long h2 = 1;

  Index n() const { return a.rows(); }
  long width() const { return h2 - h1; }

  void validate() const {
    require(a.rows() == a.cols(), "DelaySystem: A must be square");
    require(ad.rows() == a.rows() && ad.cols() == a.cols(),
            "DelaySystem: Ad must match A's dimensions");
    require(h1 >= 1, "DelaySystem: h1 must be >= 1");
    require(h2 >= h1, "DelaySystem: h2 must be >= h1");
  }
};

enum class XStructure : std::uint8_t { full, block_diagonal };

inline const char* to_string(XStructure x) {
  return x == XStructure::full ? "full" : "blockdiag";
}

/// Decision matrices of the delay-dependent stability condition:
/// P (4n x 4n), Q1, Q2, R1, R2, S1, S2 (n x n), all symmetric, and a
/// coupling matrix X (3n x 3n), either full or block-diagonal
/// diag{X1, X2, X3}.
template <class Scalar>
struct LkfVariables {
  Matrix<Scalar> p;
  Matrix<Scalar> q1, q2, r1, r2, s1, s2;
  Matrix<Scalar> x;
  XStructure x_structure = XStructure::full;

  static LkfVariables identity(Index n) {
    LkfVariables v;
    v.p = Matrix<Scalar>::Identity(4 * n, 4 * n);
    v.q1 = v.q2 = v.r1 = v.r2 = v.s1 = v.s2 =
        Matrix<Scalar>::Identity(n, n);
    v.x = Matrix<Scalar>::Zero(3 * n, 3 * n);
    return v;
  }

  LkfVariables scaled(Scalar t) const {
    LkfVariables v = *this;
    v.p *= t;
    v.q1 *= t;
    v.q2 *= t;
    v.r1 *= t;
    v.r2 *= t;
    v.s1 *= t;
    v.s2 *= t;
    v.x *= t;
    return v;
  }

  void validate(Index n) const {
    require(p.rows() == 4 * n && p.cols() == 4 * n,
            "LkfVariables: P must be 4n x 4n");
    for (const auto* m : {&q1, &q2, &r1, &r2, &s1, &s2})
      require(m->rows() == n && m->cols() == n,
              "LkfVariables: Q/R/S blocks must be n x n");
    require(x.rows() == 3 * n && x.cols() == 3 * n,
            "LkfVariables: X must be 3n x 3n");
    const Scalar tol(1e-10);
    require(symmetry_defect(p) <= tol, "LkfVariables: P must be symmetric");
    for (const auto* m : {&q1, &q2, &r1, &r2, &s1, &s2})
      require(symmetry_defect(*m) <= tol,
              "LkfVariables: Q/R/S blocks must be symmetric");
    if (x_structure == XStructure::block_diagonal) {
      for (Index bi = 0; bi < 3; ++bi)
        for (Index bj = 0; bj < 3; ++bj)
          if (bi != bj)
            require(x.block(bi * n, bj * n, n, n).cwiseAbs().maxCoeff() ==
                        Scalar(0),
                    "LkfVariables: off-diagonal X blocks must be zero for the "
                    "block-diagonal structure");
    }
  }
};

/// Row selectors over the 10n-dimensional augmented vector: e(i) is the
/// n x 10n matrix picking block i (1-based), so that stacking e(1)..e(10)
/// gives the identity.
template <class Scalar>
class SelectorSet {
 public:
  explicit SelectorSet(Index n) : n_(n) {
    require(n >= 1, "SelectorSet: dimension must be >= 1");
    for (Index i = 0; i < 10; ++i) {
      Matrix<Scalar> ei = Matrix<Scalar>::Zero(n, 10 * n);
      ei.block(0, i * n, n, n) = Matrix<Scalar>::Identity(n, n);
      e_[static_cast<std::size_t>(i)] = std::move(ei);
    }
  }

  Index n() const { return n_; }

  const Matrix<Scalar>& e(int i) const {
    require(i >= 1 && i <= 10, "SelectorSet: selector index must be in 1..10");
    return e_[static_cast<std::size_t>(i - 1)];
  }

 private:
  Index n_;
  std::array<Matrix<Scalar>, 10> e_;
};

/// T(h) = h + 1, the number of integers in a window of width h.
inline long interval_T(long h) {
  require(h >= 0, "interval_T: h must be >= 0");
  return h + 1;
}

/// gamma(h) = T(h) T(h+1) / 2, the number of index pairs in the triangular
/// double sum of width h. gamma(-1) = 0 by the same formula (empty sum).
inline long interval_gamma(long h) {
  require(h >= -1, "interval_gamma: h must be >= -1");
  return (h + 1) * (h + 2) / 2;
}

/// Length-dependent tightening factors of the refined bounds, as functions
/// of the lower delay bound: all equal 1 at h1 = 1.
template <class Scalar>
struct ScalarCoeffs {
  Scalar c1, c2, c3;
};

template <class Scalar = double>
ScalarCoeffs<Scalar> scalar_coeffs(long h1) {
  require(h1 >= 1, "scalar_coeffs: h1 must be >= 1");
  if (h1 == 1) return {Scalar(1), Scalar(1), Scalar(1)};
  const Scalar h(static_cast<double>(h1));
  return {(h + 1) / (h - 1),
          (h + 1) * (h + 2) * (h + 2) / ((h - 1) * (h * h + 11)),
          (h + 2) / (h - 1)};
}

template <class Scalar>
struct GammaSet {
  Matrix<Scalar> g1, g2, g3;  // 3n x 10n
  Matrix<Scalar> g4, g5, g6;  // 2n x 10n
};

namespace detail {

template <class Scalar>
Matrix<Scalar> vstack(const std::vector<Matrix<Scalar>>& rows) {
  Index total = 0;
  for (const auto& r : rows) total += r.rows();
  Matrix<Scalar> out(total, rows.front().cols());
  Index at = 0;
  for (const auto& r : rows) {
    out.middleRows(at, r.rows()) = r;
    at += r.rows();
  }
  return out;
}

}  // namespace detail

/// The six fixed difference maps acting on the augmented vector; rows are
/// first/second/third order combinations of states and window averages.
template <class Scalar>
GammaSet<Scalar> build_gammas(const SelectorSet<Scalar>& sel) {
  const auto& e = [&sel](int i) -> const Matrix<Scalar>& { return sel.e(i); };
  GammaSet<Scalar> g;
  g.g1 = detail::vstack<Scalar>({e(1) - e(2), e(1) + e(2) - 2 * e(5),
                                 e(1) - e(2) + 6 * e(5) - 6 * e(8)});
  g.g2 = detail::vstack<Scalar>({e(2) - e(3), e(2) + e(3) - 2 * e(6),
                                 e(2) - e(3) + 6 * e(6) - 6 * e(9)});
  g.g3 = detail::vstack<Scalar>({e(3) - e(4), e(3) + e(4) - 2 * e(7),
                                 e(3) - e(4) + 6 * e(7) - 6 * e(10)});
  g.g4 = detail::vstack<Scalar>({e(2) - e(5), e(2) - 4 * e(5) + 3 * e(8)});
  g.g5 = detail::vstack<Scalar>({e(3) - e(6), e(4) - e(7)});
  g.g6 = detail::vstack<Scalar>(
      {e(3) - 4 * e(6) + 3 * e(9), e(4) - 4 * e(7) + 3 * e(10)});
  return g;
}

/// One-step increment map: Delta x(k) expressed on the augmented vector,
/// (A - I) selecting x(k) plus Ad selecting x(k - h).
template <class Scalar>
Matrix<Scalar> increment_map(const DelaySystem<Scalar>& sys,
                             const SelectorSet<Scalar>& sel) {
  const Index n = sys.n();
  return (sys.a - Matrix<Scalar>::Identity(n, n)) * sel.e(1) +
         sys.ad * sel.e(3);
}

template <class Scalar>
struct OmegaSet {
  Matrix<Scalar> omega_h;  // 4n x 10n, affine in h
  Matrix<Scalar> omega1;   // 4n x 10n
  Matrix<Scalar> omega2;   // 4n x 10n
};

/// The three 4n x 10n reconstruction maps of the extended state and its
/// one-step shifts.
template <class Scalar>
OmegaSet<Scalar> build_omegas(const DelaySystem<Scalar>& sys, long h,
                              const SelectorSet<Scalar>& sel) {
  sys.validate();
  require(h >= sys.h1 && h <= sys.h2,
          "build_omegas: h must lie in [h1, h2]");
  const auto& e = [&sel](int i) -> const Matrix<Scalar>& { return sel.e(i); };
  const Index n = sys.n();
  const Scalar t1(static_cast<double>(interval_T(sys.h1)));
  const Scalar g1(static_cast<double>(interval_gamma(sys.h1)));
  OmegaSet<Scalar> w;
  w.omega_h = detail::vstack<Scalar>(
      {e(1), t1 * e(5),
       Scalar(static_cast<double>(interval_T(h - sys.h1))) * e(6) +
           Scalar(static_cast<double>(interval_T(sys.h2 - h))) * e(7),
       g1 * e(8)});
  w.omega1 = detail::vstack<Scalar>(
      {-increment_map(sys, sel), e(2), e(3) + e(4), t1 * e(5)});
  w.omega2 = detail::vstack<Scalar>(
      {Matrix<Scalar>::Zero(n, 10 * n), e(1), e(2) + e(3), t1 * e(1)});
  return w;
}

template <class Scalar>
Matrix<Scalar> r2_tilde(const LkfVariables<Scalar>& vars) {
  const Index n = vars.q1.rows();
  Matrix<Scalar> out = Matrix<Scalar>::Zero(3 * n, 3 * n);
  out.block(0, 0, n, n) = vars.r2;
  out.block(n, n, n, n) = Scalar(3) * vars.r2;
  out.block(2 * n, 2 * n, n, n) = Scalar(5) * vars.r2;
  return out;
}

/// The 6n x 6n coupled block [ R2tilde X ; X' R2tilde ] whose positive
/// semidefiniteness licenses the reciprocally convex combination step.
template <class Scalar>
Matrix<Scalar> assemble_rcc(const LkfVariables<Scalar>& vars) {
  const Index n = vars.q1.rows();
  vars.validate(n);
  const Matrix<Scalar> r2t = r2_tilde(vars);
  Matrix<Scalar> out(6 * n, 6 * n);
  out.block(0, 0, 3 * n, 3 * n) = r2t;
  out.block(0, 3 * n, 3 * n, 3 * n) = vars.x;
  out.block(3 * n, 0, 3 * n, 3 * n) = vars.x.transpose();
  out.block(3 * n, 3 * n, 3 * n, 3 * n) = r2t;
  return symmetrize(out);
}

/// Assembles the 10n x 10n delay-dependent stability matrix at delay value
/// h in [h1, h2]; the result is affine in h and symmetrized before return.
template <class Scalar>
Matrix<Scalar> assemble_pi(const DelaySystem<Scalar>& sys,
                           const LkfVariables<Scalar>& vars, long h) {
  sys.validate();
  const Index n = sys.n();
  vars.validate(n);
  require(h >= sys.h1 && h <= sys.h2, "assemble_pi: h must lie in [h1, h2]");

  const SelectorSet<Scalar> sel(n);
  const auto& e = [&sel](int i) -> const Matrix<Scalar>& { return sel.e(i); };
  const long h12 = sys.h2 - sys.h1;
  const auto w = build_omegas(sys, h, sel);
  const auto g = build_gammas(sel);
  const auto c = scalar_coeffs<Scalar>(sys.h1);
  const Matrix<Scalar> acal = increment_map(sys, sel);

  const Matrix<Scalar> d21 = w.omega2 - w.omega1;
  Matrix<Scalar> pi0 = w.omega_h.transpose() * vars.p * d21;
  pi0 += pi0.transpose().eval();
  pi0 += w.omega1.transpose() * vars.p * w.omega1 -
         w.omega2.transpose() * vars.p * w.omega2;

  Matrix<Scalar> pi1 = e(1).transpose() * vars.q1 * e(1) -
                       e(2).transpose() * vars.q1 * e(2) +
                       e(2).transpose() * vars.q2 * e(2) -
                       e(4).transpose() * vars.q2 * e(4);

  const Scalar h1s(static_cast<double>(sys.h1 * sys.h1));
  const Scalar h12s(static_cast<double>(h12 * h12));
  const Matrix<Scalar> mid =
      h1s * vars.r1 + h12s * vars.r2 +
      Scalar(static_cast<double>(interval_gamma(sys.h1 - 1))) * vars.s1 +
      Scalar(static_cast<double>(interval_gamma(h12 - 1))) * vars.s2;
  const Matrix<Scalar> pi2 = acal.transpose() * mid * acal;

  Matrix<Scalar> r1t = Matrix<Scalar>::Zero(3 * n, 3 * n);
  r1t.block(0, 0, n, n) = vars.r1;
  r1t.block(n, n, n, n) = Scalar(3) * c.c1 * vars.r1;
  r1t.block(2 * n, 2 * n, n, n) = Scalar(5) * c.c2 * vars.r1;
  const Matrix<Scalar> pi3 = g.g1.transpose() * r1t * g.g1;

  const Matrix<Scalar> rcc = assemble_rcc(vars);
  Matrix<Scalar> g23(6 * n, 10 * n);
  g23.topRows(3 * n) = g.g2;
  g23.bottomRows(3 * n) = g.g3;
  const Matrix<Scalar> pi4 = g23.transpose() * rcc * g23;

  Matrix<Scalar> s1h = Matrix<Scalar>::Zero(2 * n, 2 * n);
  s1h.block(0, 0, n, n) = vars.s1;
  s1h.block(n, n, n, n) = Scalar(2) * c.c3 * vars.s1;
  const Scalar h1d(static_cast<double>(sys.h1));
  const Matrix<Scalar> pi5 =
      (Scalar(2) * (h1d + 1) / h1d) * (g.g4.transpose() * s1h * g.g4);

  Matrix<Scalar> s2h = Matrix<Scalar>::Zero(2 * n, 2 * n);
  s2h.block(0, 0, n, n) = vars.s2;
  s2h.block(n, n, n, n) = vars.s2;
  const Matrix<Scalar> pi6 = Scalar(2) * (g.g5.transpose() * s2h * g.g5) +
                             Scalar(4) * (g.g6.transpose() * s2h * g.g6);

  Matrix<Scalar> pi = pi0 + pi1 + pi2 - pi3 - pi4 - pi5 - pi6;
  return symmetrize(pi);
}

}  // namespace delaycert
