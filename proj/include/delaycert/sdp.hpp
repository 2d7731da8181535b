#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <utility>
#include <vector>

#include "delaycert/types.hpp"

namespace delaycert::sdp {

/// One affine matrix constraint S(y) = constant + sum terms[k].second * y_i
/// (i = terms[k].first), kept positive definite by the barrier. Margined
/// blocks are additionally lowered by the margin variable: S(y) - t I.
template <class Scalar>
struct LmiBlock {
  Matrix<Scalar> constant;
  std::vector<std::pair<int, Matrix<Scalar>>> terms;
  bool margined = false;
  Scalar margin_scale = Scalar(1);  // S(y) - margin_scale * t * I when margined

  Index dim() const { return constant.rows(); }

  Matrix<Scalar> eval(const Vector<Scalar>& y, Scalar t) const {
    Matrix<Scalar> s = constant;
    for (const auto& [i, a] : terms) s += y[i] * a;
    if (margined)
      s -= margin_scale * t * Matrix<Scalar>::Identity(dim(), dim());
    return s;
  }
};

struct BarrierOptions {
  double gap_tol = 1e-11;      // stop once nu/eta certifies t* this tightly
  double gap_tol_rel = 1e-5;   // or this tightly relative to |t|
  double eta0 = 1.0;
  double eta_factor = 10.0;
  double decrement_tol = 0.09;  // inner Newton exit (squared decrement)
  int max_newton = 2000;
  // early decision exits: the achieved margin is always a lower bound on
  // t*, and margin + gap an upper bound, so either side can settle a
  // threshold comparison long before full convergence
  double stop_when_above = std::numeric_limits<double>::infinity();
  double stop_when_below = -std::numeric_limits<double>::infinity();
  bool verbose = false;
};

template <class Scalar>
struct MarginResult {
  Vector<Scalar> y;          // maximizer iterate
  Scalar t = Scalar(0);      // achieved margin (lower bound on t*)
  Scalar gap = Scalar(0);    // t* <= t + gap
  bool converged = false;
  int newton_steps = 0;
};

namespace detail {

template <class Scalar>
struct BarrierEval {
  Scalar phi = Scalar(0);
  bool pd = false;
};

/// Workspace-carrying Newton engine for  min  eta * f(z) + phi(z)
/// s.t. c'z = c0,  where z = [y; t], f = -t and phi is the log-det barrier
/// over all blocks.
template <class Scalar>
class BarrierEngine {
 public:
  BarrierEngine(const std::vector<LmiBlock<Scalar>>& blocks, Index nvars,
                Vector<Scalar> eq, Scalar eq_rhs)
      : blocks_(blocks), m_(nvars), eq_(std::move(eq)), eq_rhs_(eq_rhs) {
    nu_ = 0;
    for (const auto& b : blocks_) nu_ += b.dim();
    // active variable lists per block, with the margin variable (index m_)
    // appended for margined blocks
    active_.resize(blocks_.size());
    for (std::size_t j = 0; j < blocks_.size(); ++j) {
      for (const auto& [i, a] : blocks_[j].terms)
        active_[j].push_back(i);
      if (blocks_[j].margined) active_[j].push_back(static_cast<int>(m_));
    }
  }

  Index nu() const { return nu_; }

  BarrierEval<Scalar> barrier(const Vector<Scalar>& z) const {
    BarrierEval<Scalar> out;
    Scalar phi(0);
    for (const auto& b : blocks_) {
      Matrix<Scalar> s = b.eval(z.head(m_), z[m_]);
      Eigen::LLT<Matrix<Scalar>> llt(s);
      if (llt.info() != Eigen::Success) return out;
      phi -= Scalar(2) * llt.matrixLLT().diagonal().array().log().sum();
    }
    out.phi = phi;
    out.pd = true;
    return out;
  }

  /// One damped, equality-constrained Newton step on eta*f + phi.
  /// Returns the squared Newton decrement, or a negative value when the
  /// factorization or line search failed.
  Scalar newton_step(Vector<Scalar>& z, Scalar eta) {
    const Index dim = m_ + 1;
    Matrix<Scalar> hess = Matrix<Scalar>::Zero(dim, dim);
    Vector<Scalar> grad = Vector<Scalar>::Zero(dim);
    grad[m_] = -eta;  // objective -t

    for (std::size_t j = 0; j < blocks_.size(); ++j) {
      const auto& b = blocks_[j];
      const Index d = b.dim();
      Matrix<Scalar> s = b.eval(z.head(m_), z[m_]);
      Eigen::LLT<Matrix<Scalar>> llt(s);
      if (llt.info() != Eigen::Success) return Scalar(-1);
      const auto& lower = llt.matrixL();

      auto whiten = [&](const Matrix<Scalar>& a) -> Matrix<Scalar> {
        Matrix<Scalar> x = lower.solve(a);
        return lower.solve(x.transpose()).transpose();
      };

      const auto& act = active_[j];
      std::vector<Matrix<Scalar>>& v = scratch_;
      v.clear();
      v.reserve(act.size());
      for (std::size_t k = 0; k < b.terms.size(); ++k)
        v.push_back(whiten(b.terms[k].second));
      if (b.margined)
        v.push_back(whiten(
            Matrix<Scalar>(-b.margin_scale * Matrix<Scalar>::Identity(d, d))));

      for (std::size_t k = 0; k < act.size(); ++k) {
        grad[act[k]] -= v[k].trace();
        for (std::size_t l = 0; l <= k; ++l) {
          const Scalar hkl = v[k].cwiseProduct(v[l]).sum();
          hess(act[k], act[l]) += hkl;
          if (act[l] != act[k]) hess(act[l], act[k]) += hkl;
        }
      }
    }

    // Newton direction via the bordered KKT system; H alone can be
    // singular along margin translations, the equality row pins them.
    // The KKT condition number grows like eta^2, so the solve is followed
    // by iterative refinement to keep directions usable at large eta.
    Vector<Scalar> dz(dim);
    const bool has_eq = eq_.cwiseAbs().maxCoeff() > Scalar(0);
    const Scalar ridge0 =
        hess.trace() / Scalar(dim) * std::numeric_limits<Scalar>::epsilon() *
        Scalar(16);
    bool solved = false;
    Scalar ridge = ridge0;
    for (int tries = 0; tries < 30 && !solved; ++tries, ridge *= Scalar(1e3)) {
      Matrix<Scalar> hr = hess;
      hr.diagonal().array() += (tries == 0 ? Scalar(0) : ridge);
      const Index kdim = has_eq ? dim + 1 : dim;
      Matrix<Scalar> kkt = Matrix<Scalar>::Zero(kdim, kdim);
      kkt.topLeftCorner(dim, dim) = hr;
      if (has_eq) {
        kkt.block(0, dim, m_, 1) = eq_;
        kkt.block(dim, 0, 1, m_) = eq_.transpose();
      }
      Eigen::PartialPivLU<Matrix<Scalar>> lu(kkt);
      Vector<Scalar> rhs = Vector<Scalar>::Zero(kdim);
      rhs.head(dim) = -grad;
      Vector<Scalar> sol = lu.solve(rhs);
      for (int refine = 0; refine < 3; ++refine) {
        Vector<Scalar> resid = rhs - kkt * sol;
        sol += lu.solve(resid);
      }
      const Scalar resid_norm = (rhs - kkt * sol).norm();
      const Scalar rhs_norm = rhs.norm();
      if (!sol.allFinite() ||
          resid_norm > Scalar(1e-8) * std::max(rhs_norm, Scalar(1)))
        continue;
      dz = sol.head(dim);
      solved = true;
    }
    if (!solved) return Scalar(-1);

    const Scalar dec2 = -grad.dot(dz);
    if (!(dec2 > Scalar(0))) return Scalar(0);

    // line search: largest PD-feasible step that decreases the merit
    const Scalar merit0 = eta * (-z[m_]) + barrier(z).phi;
    Scalar alpha(1);
    for (int ls = 0; ls < 120; ++ls, alpha /= Scalar(2)) {
      Vector<Scalar> zn = z + alpha * dz;
      auto ev = barrier(zn);
      if (!ev.pd) continue;
      const Scalar merit = eta * (-zn[m_]) + ev.phi;
      if (merit <= merit0 - Scalar(0.01) * alpha * dec2 ||
          (alpha < Scalar(1e-18) && merit <= merit0)) {
        z = zn;
        return dec2;
      }
    }
    // a small decrement whose predicted improvement sits below the merit's
    // floating-point resolution counts as centered, not as a failure
    if (dec2 <= Scalar(0.01)) return dec2;
    return Scalar(-2);  // stalled
  }

 private:
  const std::vector<LmiBlock<Scalar>>& blocks_;
  Index m_;
  Vector<Scalar> eq_;
  Scalar eq_rhs_;
  Index nu_ = 0;
  std::vector<std::vector<int>> active_;
  std::vector<Matrix<Scalar>> scratch_;
};

}  // namespace detail

/// Maximizes the common margin t with S_j(y) - t I > 0 on margined blocks,
/// S_j(y) > 0 on the rest and c'y = c0, by long-step path-following on the
/// log-det barrier. On return, t* lies in [result.t, result.t + result.gap].
template <class Scalar>
MarginResult<Scalar> maximize_margin(const std::vector<LmiBlock<Scalar>>& blocks,
                                     Index nvars, const Vector<Scalar>& eq_c,
                                     Scalar eq_rhs, const Vector<Scalar>& y0,
                                     const BarrierOptions& opt = {}) {
  require(!blocks.empty(), "maximize_margin: needs at least one block");
  require(eq_c.size() == nvars, "maximize_margin: equality size mismatch");
  require(y0.size() == nvars, "maximize_margin: start point size mismatch");

  detail::BarrierEngine<Scalar> engine(blocks, nvars, eq_c, eq_rhs);

  // start strictly inside: t0 below the smallest margined eigenvalue at y0
  Scalar t0 = std::numeric_limits<Scalar>::max();
  bool any_margined = false;
  for (const auto& b : blocks) {
    Matrix<Scalar> s = b.eval(y0, Scalar(0));
    Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> es(s,
                                                     Eigen::EigenvaluesOnly);
    const Scalar lam = es.eigenvalues().minCoeff();
    if (b.margined) {
      any_margined = true;
      t0 = std::min(t0, lam);
    } else {
      require(lam > Scalar(0),
              "maximize_margin: start point is not strictly feasible");
    }
  }
  require(any_margined, "maximize_margin: no margined block");
  t0 -= std::max(Scalar(1), Scalar(0.1) * std::abs(t0));

  Vector<Scalar> z(nvars + 1);
  z.head(nvars) = y0;
  z[nvars] = t0;

  require(std::abs(double(eq_c.dot(y0) - eq_rhs)) <=
              1e-9 * std::max(1.0, std::abs(double(eq_rhs))),
          "maximize_margin: start point must satisfy the equality");

  MarginResult<Scalar> res;
  Scalar eta(opt.eta0);
  const Scalar nu(static_cast<double>(engine.nu()));
  int steps = 0, stage_steps = 0;
  bool stalled = false;
  bool polished = false;
  Scalar last_dec2(1);
  while (steps < opt.max_newton) {
    const Scalar dec2 = engine.newton_step(z, eta);
    ++steps;
    ++stage_steps;
    last_dec2 = dec2;
    if (dec2 < Scalar(0) || stage_steps > 80) {
      stalled = true;
      break;
    }
    if (z[nvars] >= Scalar(opt.stop_when_above) ||
        (dec2 <= Scalar(opt.decrement_tol) &&
         z[nvars] + nu / eta <= Scalar(opt.stop_when_below))) {
      polished = true;
      break;
    }
    if (dec2 > Scalar(opt.decrement_tol)) continue;
    if (opt.verbose)
      std::fprintf(stderr, "[sdp] eta=%.3Le t=%.12Le gap<=%.3Le steps=%d\n",
                   static_cast<long double>(eta),
                   static_cast<long double>(z[nvars]),
                   static_cast<long double>(nu / eta), steps);
    if (nu / eta <= Scalar(opt.gap_tol) ||
        nu / eta <= Scalar(opt.gap_tol_rel) * std::abs(z[nvars])) {
      // final stage: re-center until the decrement is small enough that
      // the path-following gap bound below is valid
      if (dec2 <= Scalar(2.5e-3)) {
        polished = true;
        break;
      }
    } else {
      eta *= Scalar(opt.eta_factor);
      stage_steps = 0;
    }
  }

  res.y = z.head(nvars);
  res.t = z[nvars];
  const Scalar lam = std::sqrt(std::max(last_dec2, Scalar(0)));
  res.gap = (nu + Scalar(2) * lam * std::sqrt(nu)) / eta;
  res.newton_steps = steps;
  res.converged = polished && !stalled;
  return res;
}

/// Analytic centering at a fixed margin shift: minimizes the barrier of
/// { S_j(y) - t_fixed I > 0 (margined), S_j(y) > 0, c'y = c0 } starting
/// from a strictly feasible point. Used to extract well-interior
/// certificate points once feasibility is decided.
template <class Scalar>
MarginResult<Scalar> analytic_center(const std::vector<LmiBlock<Scalar>>& blocks,
                                     Index nvars, const Vector<Scalar>& eq_c,
                                     Scalar eq_rhs, const Vector<Scalar>& y_start,
                                     Scalar t_fixed,
                                     const BarrierOptions& opt = {}) {
  std::vector<LmiBlock<Scalar>> shifted = blocks;
  for (auto& b : shifted) {
    if (b.margined) {
      b.constant -=
          t_fixed * Matrix<Scalar>::Identity(b.dim(), b.dim());
      b.margined = false;
    }
  }
  // 1x1 slacks 1-t > 0 and 1+t > 0 pin the otherwise-unused margin
  // variable at 0 (their joint barrier -log(1-t^2) is minimized there)
  for (const Scalar sign : {Scalar(1), Scalar(-1)}) {
    LmiBlock<Scalar> slack;
    slack.constant = Matrix<Scalar>::Identity(1, 1);
    slack.margined = true;
    slack.margin_scale = sign;
    shifted.push_back(slack);
  }

  detail::BarrierEngine<Scalar> engine(shifted, nvars, eq_c, eq_rhs);
  Vector<Scalar> z(nvars + 1);
  z.head(nvars) = y_start;
  z[nvars] = Scalar(0);

  MarginResult<Scalar> res;
  int steps = 0, flat = 0;
  Scalar dec2(1), prev(1e300);
  while (steps < opt.max_newton && flat < 4) {
    dec2 = engine.newton_step(z, Scalar(0));
    ++steps;
    if (dec2 < Scalar(0)) break;
    if (dec2 <= Scalar(1e-10)) break;
    flat = (dec2 > Scalar(0.9) * prev) ? flat + 1 : 0;
    prev = dec2;
  }
  res.y = z.head(nvars);
  res.t = t_fixed;
  res.newton_steps = steps;
  res.converged = dec2 >= Scalar(0) && dec2 <= Scalar(1e-4);
  return res;
}

}  // namespace delaycert::sdp
