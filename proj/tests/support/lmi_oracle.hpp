#pragma once

// Literal term-by-term transcription of the stability-matrix definitions,
// independent of the production assembly. Written directly from the block
// definitions, entry by entry, with its own selector construction. Do not
// refactor to share code with delaycert/lmi.hpp; this duplication is the
// point (it catches transcription errors in either side).

#include <vector>

#include "delaycert/types.hpp"

namespace oracle {

using delaycert::Index;
using delaycert::Mat;

struct LmiInputs {
  Mat a, ad;
  long h1, h2;
  Mat p, q1, q2, r1, r2, s1, s2, x;
};

inline std::vector<Mat> selectors_oracle(Index n) {
  std::vector<Mat> e(11);  // 1-based
  for (int i = 1; i <= 10; ++i) {
    Mat m = Mat::Zero(n, 10 * n);
    for (Index r = 0; r < n; ++r) m(r, (i - 1) * n + r) = 1.0;
    e[static_cast<std::size_t>(i)] = m;
  }
  return e;
}

inline double t_of(long h) { return static_cast<double>(h + 1); }
inline double gamma_of(long h) {
  return t_of(h) * t_of(h + 1) / 2.0;
}

inline Mat stack4(const Mat& a, const Mat& b, const Mat& c, const Mat& d) {
  Mat out(a.rows() + b.rows() + c.rows() + d.rows(), a.cols());
  out << a, b, c, d;
  return out;
}

inline Mat stack3(const Mat& a, const Mat& b, const Mat& c) {
  Mat out(a.rows() + b.rows() + c.rows(), a.cols());
  out << a, b, c;
  return out;
}

inline Mat stack2(const Mat& a, const Mat& b) {
  Mat out(a.rows() + b.rows(), a.cols());
  out << a, b;
  return out;
}

inline Mat he(const Mat& m) { return m + m.transpose(); }

inline Mat diag3(const Mat& a, const Mat& b, const Mat& c) {
  const Index n = a.rows();
  Mat out = Mat::Zero(3 * n, 3 * n);
  out.topLeftCorner(n, n) = a;
  out.block(n, n, n, n) = b;
  out.bottomRightCorner(n, n) = c;
  return out;
}

inline Mat diag2(const Mat& a, const Mat& b) {
  const Index n = a.rows();
  Mat out = Mat::Zero(2 * n, 2 * n);
  out.topLeftCorner(n, n) = a;
  out.bottomRightCorner(n, n) = b;
  return out;
}

inline Mat rcc_oracle(const LmiInputs& in) {
  const Index n = in.q1.rows();
  const Mat r2t = diag3(in.r2, 3.0 * in.r2, 5.0 * in.r2);
  Mat out(6 * n, 6 * n);
  out << r2t, in.x, in.x.transpose(), r2t;
  return out;
}

inline Mat pi_oracle(const LmiInputs& in, long h) {
  const Index n = in.a.rows();
  const auto e = selectors_oracle(n);
  const long h12 = in.h2 - in.h1;

  const Mat acal = (in.a - Mat::Identity(n, n)) * e[1] + in.ad * e[3];

  const Mat omega_h =
      stack4(e[1], t_of(in.h1) * e[5],
             t_of(h - in.h1) * e[6] + t_of(in.h2 - h) * e[7],
             gamma_of(in.h1) * e[8]);
  const Mat omega_1 = stack4(-acal, e[2], e[3] + e[4], t_of(in.h1) * e[5]);
  const Mat omega_2 =
      stack4(Mat::Zero(n, 10 * n), e[1], e[2] + e[3], t_of(in.h1) * e[1]);

  const Mat gamma_1 = stack3(e[1] - e[2], e[1] + e[2] - 2.0 * e[5],
                             e[1] - e[2] + 6.0 * e[5] - 6.0 * e[8]);
  const Mat gamma_2 = stack3(e[2] - e[3], e[2] + e[3] - 2.0 * e[6],
                             e[2] - e[3] + 6.0 * e[6] - 6.0 * e[9]);
  const Mat gamma_3 = stack3(e[3] - e[4], e[3] + e[4] - 2.0 * e[7],
                             e[3] - e[4] + 6.0 * e[7] - 6.0 * e[10]);
  const Mat gamma_4 = stack2(e[2] - e[5], e[2] - 4.0 * e[5] + 3.0 * e[8]);
  const Mat gamma_5 = stack2(e[3] - e[6], e[4] - e[7]);
  const Mat gamma_6 = stack2(e[3] - 4.0 * e[6] + 3.0 * e[9],
                             e[4] - 4.0 * e[7] + 3.0 * e[10]);

  double c1 = 1.0, c2 = 1.0, c3 = 1.0;
  if (in.h1 > 1) {
    const double h1d = static_cast<double>(in.h1);
    c1 = (h1d + 1.0) / (h1d - 1.0);
    c2 = (h1d + 1.0) * (h1d + 2.0) * (h1d + 2.0) /
         ((h1d - 1.0) * (h1d * h1d + 11.0));
    c3 = (h1d + 2.0) / (h1d - 1.0);
  }

  const Mat r1_tilde = diag3(in.r1, 3.0 * c1 * in.r1, 5.0 * c2 * in.r1);
  const Mat s1_hat = diag2(in.s1, 2.0 * c3 * in.s1);
  const Mat s2_hat = diag2(in.s2, in.s2);

  const Mat pi_0 = he(omega_h.transpose() * in.p * (omega_2 - omega_1)) +
                   omega_1.transpose() * in.p * omega_1 -
                   omega_2.transpose() * in.p * omega_2;
  const Mat pi_1 = e[1].transpose() * in.q1 * e[1] -
                   e[2].transpose() * in.q1 * e[2] +
                   e[2].transpose() * in.q2 * e[2] -
                   e[4].transpose() * in.q2 * e[4];
  const Mat pi_2 =
      acal.transpose() *
      (static_cast<double>(in.h1 * in.h1) * in.r1 +
       static_cast<double>(h12 * h12) * in.r2 +
       gamma_of(in.h1 - 1) * in.s1 + gamma_of(h12 - 1) * in.s2) *
      acal;
  const Mat pi_3 = gamma_1.transpose() * r1_tilde * gamma_1;
  const Mat gamma_23 = stack2(gamma_2, gamma_3);
  const Mat pi_4 = gamma_23.transpose() * rcc_oracle(in) * gamma_23;
  const double h1d = static_cast<double>(in.h1);
  const Mat pi_5 =
      (2.0 * (h1d + 1.0) / h1d) * gamma_4.transpose() * s1_hat * gamma_4;
  const Mat pi_6 = 2.0 * gamma_5.transpose() * s2_hat * gamma_5 +
                   4.0 * gamma_6.transpose() * s2_hat * gamma_6;

  return pi_0 + pi_1 + pi_2 - (pi_3 + pi_4 + pi_5 + pi_6);
}

}  // namespace oracle
