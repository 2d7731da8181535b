#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "delaycert/lmi.hpp"
#include "delaycert/sdp.hpp"
#include "delaycert/types.hpp"

namespace delaycert {

enum class SolverStatus { feasible, infeasible, numerical_failure };

inline const char* to_string(SolverStatus s) {
  switch (s) {
    case SolverStatus::feasible:
      return "feasible";
    case SolverStatus::infeasible:
      return "infeasible";
    default:
      return "numerical-failure";
  }
}

struct CertificateMargins {
  double min_eig_p = 0, min_eig_q1 = 0, min_eig_q2 = 0;
  double min_eig_r1 = 0, min_eig_r2 = 0, min_eig_s1 = 0, min_eig_s2 = 0;
  double min_eig_rcc = 0;
  double max_eig_pi_h1 = 0, max_eig_pi_h2 = 0;
};

struct StabilityCertificate {
  DelaySystem<double> system;
  LkfVariables<double> vars;
  CertificateMargins margins;
  bool verified = false;
  SolverStatus solver_status = SolverStatus::numerical_failure;
  double solver_margin = 0;  // maximized feasibility margin (solver scale)
  double solver_gap = 0;     // certified optimality gap of the margin
};

struct FeasibilityOptions {
  // feasibility decision: maximized margin must exceed this (in the
  // solver's normalization trace(Phat) + sum trace(hatted blocks) = 10n).
  // Slightly negative: delay bounds published for this problem family sit
  // exactly on the feasibility boundary (margin 0 to within 1e-11), so an
  // exact-zero optimum must count as feasible while decisively negative
  // margins (one delay step past the frontier measures <= -1e-5) must not.
  double margin_threshold = -1e-9;
  // certificates are centered at this fraction of the achieved margin
  double center_fraction = 0.5;
  // verification thresholds, relative to each matrix's own trace scale
  double rel_positivity = 1e-11;
  double rel_negativity = 1e-11;
  double rcc_slack = 1e-8;
  sdp::BarrierOptions barrier;
};

/// Theorem-style feasibility problem over the decision matrices, posed in
/// internally rescaled coordinates so that every constraint coefficient is
/// O(1) regardless of the delay magnitudes.
class FeasibilityProblem {
 public:
  using S = long double;

  FeasibilityProblem(DelaySystem<double> sys, XStructure xs,
                     FeasibilityOptions opt = {})
      : sys_(std::move(sys)), xs_(xs), opt_(opt) {
    sys_.validate();
    const Index n = sys_.n();
    // When h1 = h2 the width-indexed multipliers vanish, leaving R2, S2
    // and X only inside subtracted positive-semidefinite terms; free they
    // would fake a zero margin for any system. They act on state
    // combinations that are identically zero at a single delay point, so
    // they are pinned (R2 = S2 = I, X = 0) instead of decided.
    width_vars_ = sys_.width() > 0;
    np_ = 4 * n * (4 * n + 1) / 2;
    nsym_ = n * (n + 1) / 2;
    nx_ = (xs_ == XStructure::full) ? 9 * n * n : 3 * n * n;
    if (!width_vars_) nx_ = 0;
    count_ = np_ + (width_vars_ ? 6 : 4) * nsym_ + nx_;
  }

  const DelaySystem<double>& system() const { return sys_; }
  XStructure x_structure() const { return xs_; }
  const FeasibilityOptions& options() const { return opt_; }

  /// Number of scalar decision variables (distinct symmetric entries plus
  /// the X parametrization).
  Index decision_count() const { return count_; }

  /// Scatters a flat decision vector into the rescaled ("hatted") variable
  /// matrices.
  LkfVariables<S> to_hatted(const Vector<S>& y) const {
    const Index n = sys_.n();
    LkfVariables<S> v;
    v.p = Matrix<S>::Zero(4 * n, 4 * n);
    v.q1 = v.q2 = v.r1 = v.r2 = v.s1 = v.s2 = Matrix<S>::Zero(n, n);
    v.x = Matrix<S>::Zero(3 * n, 3 * n);
    v.x_structure = xs_;
    Index at = 0;
    auto fill_sym = [&](Matrix<S>& m) {
      for (Index p = 0; p < m.rows(); ++p)
        for (Index q = p; q < m.cols(); ++q) {
          m(p, q) = y[at];
          m(q, p) = y[at];
          ++at;
        }
    };
    fill_sym(v.p);
    fill_sym(v.q1);
    fill_sym(v.q2);
    fill_sym(v.r1);
    if (width_vars_) fill_sym(v.r2);
    fill_sym(v.s1);
    if (width_vars_) fill_sym(v.s2);
    if (!width_vars_) {
      v.r2 = Matrix<S>::Identity(n, n);
      v.s2 = Matrix<S>::Identity(n, n);
    } else if (xs_ == XStructure::full) {
      for (Index p = 0; p < 3 * n; ++p)
        for (Index q = 0; q < 3 * n; ++q) v.x(p, q) = y[at++];
    } else {
      for (Index b = 0; b < 3; ++b)
        for (Index p = 0; p < n; ++p)
          for (Index q = 0; q < n; ++q) v.x(b * n + p, b * n + q) = y[at++];
    }
    return v;
  }

  /// Undoes the internal rescaling, mapping hatted variables to the
  /// decision matrices of the original condition.
  LkfVariables<S> unhat(const LkfVariables<S>& hat) const {
    const Index n = sys_.n();
    const long h12 = sys_.width();
    const S s1(static_cast<double>(sys_.h1 * sys_.h1));
    const S s2(static_cast<double>(std::max(h12 * h12, 1L)));
    const S g1(static_cast<double>(std::max(interval_gamma(sys_.h1 - 1), 1L)));
    const S g2(static_cast<double>(std::max(interval_gamma(h12 - 1), 1L)));
    Vector<S> nfac(4 * n);
    const double scales[4] = {
        1.0, static_cast<double>(interval_T(sys_.h1)),
        static_cast<double>(interval_T(h12)),
        static_cast<double>(interval_gamma(sys_.h1))};
    for (Index b = 0; b < 4; ++b)
      nfac.segment(b * n, n).setConstant(S(scales[b]));
    LkfVariables<S> v = hat;
    v.p = (nfac.cwiseInverse().asDiagonal() * hat.p *
           nfac.cwiseInverse().asDiagonal())
              .eval();
    v.r1 = hat.r1 / s1;
    v.r2 = hat.r2 / s2;
    v.s1 = hat.s1 / g1;
    v.s2 = hat.s2 / g2;
    v.x = hat.x / s2;
    return v;
  }

  /// Builds the margin-maximization blocks: positivity of every hatted
  /// decision matrix, the coupled RCC block, and the two margined
  /// endpoint blocks (negated stability matrices). The variable map is
  /// affine when blocks are pinned, so constants are assembled at y = 0
  /// and per-variable terms as differences.
  std::vector<sdp::LmiBlock<S>> build_blocks() const {
    const Index n = sys_.n();
    DelaySystem<S> sys_l;
    sys_l.a = sys_.a.cast<S>();
    sys_l.ad = sys_.ad.cast<S>();
    sys_l.h1 = sys_.h1;
    sys_l.h2 = sys_.h2;

    const LkfVariables<S> hat0 = to_hatted(Vector<S>::Zero(count_));
    const LkfVariables<S> orig0 = unhat(hat0);
    const Matrix<S> rcc0 = assemble_rcc(hat0);
    const Matrix<S> pi0_h1 = assemble_pi(sys_l, orig0, sys_.h1);
    const Matrix<S> pi0_h2 = assemble_pi(sys_l, orig0, sys_.h2);

    std::vector<sdp::LmiBlock<S>> blocks(10);
    blocks[0].constant = hat0.p;
    blocks[1].constant = hat0.q1;
    blocks[2].constant = hat0.q2;
    blocks[3].constant = hat0.r1;
    blocks[4].constant = hat0.r2;
    blocks[5].constant = hat0.s1;
    blocks[6].constant = hat0.s2;
    blocks[7].constant = rcc0;
    blocks[8].constant = -pi0_h1;
    blocks[8].margined = true;
    blocks[9].constant = -pi0_h2;
    blocks[9].margined = true;

    Vector<S> basis = Vector<S>::Zero(count_);
    for (Index i = 0; i < count_; ++i) {
      basis[i] = S(1);
      const LkfVariables<S> hat = to_hatted(basis);
      basis[i] = S(0);
      const LkfVariables<S> orig = unhat(hat);

      auto push = [&](int blk, const Matrix<S>& m) {
        if (m.cwiseAbs().maxCoeff() > S(0))
          blocks[static_cast<std::size_t>(blk)].terms.push_back(
              {static_cast<int>(i), m});
      };
      push(0, hat.p - hat0.p);
      push(1, hat.q1 - hat0.q1);
      push(2, hat.q2 - hat0.q2);
      push(3, hat.r1 - hat0.r1);
      push(4, hat.r2 - hat0.r2);
      push(5, hat.s1 - hat0.s1);
      push(6, hat.s2 - hat0.s2);
      push(7, (assemble_rcc(hat) - rcc0).eval());
      push(8, (pi0_h1 - assemble_pi(sys_l, orig, sys_.h1)).eval());
      push(9, (pi0_h2 - assemble_pi(sys_l, orig, sys_.h2)).eval());
    }
    return blocks;
  }

  /// Trace of the hatted positive blocks at the canonical identity start.
  S trace_target() const {
    return S(static_cast<double>(4 * sys_.n() +
                                 (width_vars_ ? 6 : 4) * sys_.n()));
  }

  /// Trace-normalization functional over the hatted positive blocks.
  Vector<S> trace_functional() const {
    const Index n = sys_.n();
    Vector<S> c = Vector<S>::Zero(count_);
    Index at = 0;
    auto mark_diag = [&](Index dim) {
      for (Index p = 0; p < dim; ++p)
        for (Index q = p; q < dim; ++q) {
          if (p == q) c[at] = S(1);
          ++at;
        }
    };
    mark_diag(4 * n);
    for (int j = 0; j < (width_vars_ ? 6 : 4); ++j) mark_diag(n);
    return c;
  }

  /// Strictly feasible start: every hatted matrix the identity, X = 0.
  Vector<S> initial_point() const {
    const Index n = sys_.n();
    Vector<S> y = Vector<S>::Zero(count_);
    Index at = 0;
    auto ident = [&](Index dim) {
      for (Index p = 0; p < dim; ++p)
        for (Index q = p; q < dim; ++q) {
          if (p == q) y[at] = S(1);
          ++at;
        }
    };
    ident(4 * n);
    for (int j = 0; j < (width_vars_ ? 6 : 4); ++j) ident(n);
    return y;
  }

 private:
  DelaySystem<double> sys_;
  XStructure xs_;
  FeasibilityOptions opt_;
  bool width_vars_ = true;
  Index np_, nsym_, nx_, count_;
};

inline FeasibilityProblem pose(const DelaySystem<double>& sys, XStructure xs,
                               const FeasibilityOptions& opt = {}) {
  return FeasibilityProblem(sys, xs, opt);
}

/// Recomputes every constraint matrix of the condition from scratch via the
/// production assembly and measures eigenvalue margins. Shares nothing with
/// the solver's internal block representation.
inline std::pair<CertificateMargins, bool> verify_certificate(
    const DelaySystem<double>& sys, const LkfVariables<double>& vars,
    const FeasibilityOptions& opt = {}) {
  sys.validate();
  vars.validate(sys.n());

  auto min_eig = [](const Mat& m) {
    Eigen::SelfAdjointEigenSolver<Mat> es(symmetrize(m),
                                          Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
  };
  auto max_eig = [](const Mat& m) {
    Eigen::SelfAdjointEigenSolver<Mat> es(symmetrize(m),
                                          Eigen::EigenvaluesOnly);
    return es.eigenvalues().maxCoeff();
  };

  CertificateMargins mg;
  mg.min_eig_p = min_eig(vars.p);
  mg.min_eig_q1 = min_eig(vars.q1);
  mg.min_eig_q2 = min_eig(vars.q2);
  mg.min_eig_r1 = min_eig(vars.r1);
  mg.min_eig_r2 = min_eig(vars.r2);
  mg.min_eig_s1 = min_eig(vars.s1);
  mg.min_eig_s2 = min_eig(vars.s2);
  const Mat rcc = assemble_rcc(vars);
  mg.min_eig_rcc = min_eig(rcc);
  const Mat pi1 = assemble_pi(sys, vars, sys.h1);
  const Mat pi2 = assemble_pi(sys, vars, sys.h2);
  mg.max_eig_pi_h1 = max_eig(pi1);
  mg.max_eig_pi_h2 = max_eig(pi2);

  auto pos_ok = [&](double lam, const Mat& m) {
    return lam > opt.rel_positivity * std::max(m.trace(), 0.0);
  };
  bool ok = pos_ok(mg.min_eig_p, vars.p) && pos_ok(mg.min_eig_q1, vars.q1) &&
            pos_ok(mg.min_eig_q2, vars.q2) && pos_ok(mg.min_eig_r1, vars.r1) &&
            pos_ok(mg.min_eig_r2, vars.r2) && pos_ok(mg.min_eig_s1, vars.s1) &&
            pos_ok(mg.min_eig_s2, vars.s2);
  ok = ok && mg.min_eig_rcc >= -opt.rcc_slack * std::max(1.0, rcc.trace());
  ok = ok && mg.max_eig_pi_h1 < -opt.rel_negativity * std::abs(pi1.trace());
  ok = ok && mg.max_eig_pi_h2 < -opt.rel_negativity * std::abs(pi2.trace());
  return {mg, ok};
}

/// Poses, solves and independently re-verifies the stability condition at
/// fixed (h1, h2). The returned certificate is self-contained: its
/// variables re-verify from scratch whenever `verified` is set.
inline StabilityCertificate solve(const FeasibilityProblem& problem) {
  using S = FeasibilityProblem::S;
  const auto& opt = problem.options();
  const Index n = problem.system().n();

  StabilityCertificate cert;
  cert.system = problem.system();
  cert.vars.x_structure = problem.x_structure();

  const auto blocks = problem.build_blocks();
  const Vector<S> c = problem.trace_functional();
  const Vector<S> y0 = problem.initial_point();
  const S c0 = problem.trace_target();

  auto to_double_vars = [&](const Vector<S>& y) {
    const LkfVariables<S> orig = problem.unhat(problem.to_hatted(y));
    LkfVariables<double> v;
    v.p = orig.p.cast<double>();
    v.q1 = orig.q1.cast<double>();
    v.q2 = orig.q2.cast<double>();
    v.r1 = orig.r1.cast<double>();
    v.r2 = orig.r2.cast<double>();
    v.s1 = orig.s1.cast<double>();
    v.s2 = orig.s2.cast<double>();
    v.x = orig.x.cast<double>();
    v.x_structure = problem.x_structure();
    return v;
  };

  const auto res = sdp::maximize_margin<S>(blocks, problem.decision_count(),
                                           c, c0, y0, opt.barrier);
  cert.solver_margin = static_cast<double>(res.t);
  cert.solver_gap = static_cast<double>(res.gap);

  if (!res.converged) {
    cert.solver_status = SolverStatus::numerical_failure;
    cert.vars = to_double_vars(res.y);
    auto [mg, ok] = verify_certificate(cert.system, cert.vars, opt);
    cert.margins = mg;
    cert.verified = false;
    return cert;
  }

  if (!(static_cast<double>(res.t) > opt.margin_threshold)) {
    cert.solver_status = SolverStatus::infeasible;
    cert.vars = to_double_vars(res.y);
    auto [mg, ok] = verify_certificate(cert.system, cert.vars, opt);
    cert.margins = mg;
    cert.verified = false;
    return cert;
  }

  cert.solver_status = SolverStatus::feasible;
  // well-interior certificate point at a backed-off margin
  const S t_center = res.t * S(opt.center_fraction);
  const auto centered =
      sdp::analytic_center<S>(blocks, problem.decision_count(), c, c0, res.y,
                              t_center, opt.barrier);
  const Vector<S>& y_cert = centered.converged ? centered.y : res.y;
  cert.vars = to_double_vars(y_cert);
  auto [mg, ok] = verify_certificate(cert.system, cert.vars, opt);
  cert.margins = mg;
  cert.verified = ok;
  return cert;
}

}  // namespace delaycert
