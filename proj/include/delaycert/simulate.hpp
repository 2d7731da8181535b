#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "delaycert/lmi.hpp"
#include "delaycert/types.hpp"

namespace delaycert {

enum class DelayKind : std::uint8_t {
  constant,
  uniform_random,
  sinusoidal,
  explicit_list
};

/// Generates an admissible integer delay sequence h(k) in [h1, h2].
class DelaySequence {
 public:
  static DelaySequence constant(long h, long h1, long h2) {
    DelaySequence d(DelayKind::constant, h1, h2);
    require(h >= h1 && h <= h2, "DelaySequence: constant value out of range");
    d.value_ = h;
    return d;
  }

  static DelaySequence uniform_random(std::uint64_t seed, long h1, long h2) {
    DelaySequence d(DelayKind::uniform_random, h1, h2);
    d.seed_ = seed;
    return d;
  }

  /// h(k) = h1 + (h2-h1)|sin(k pi/2)| rounded to the nearest integer;
  /// at integer k the sine magnitude is exactly 0 or 1, so the sequence
  /// alternates between h1 (even k) and h2 (odd k).
  static DelaySequence sinusoidal(long h1, long h2) {
    return DelaySequence(DelayKind::sinusoidal, h1, h2);
  }

  static DelaySequence explicit_list(std::vector<long> values, long h1,
                                     long h2) {
    DelaySequence d(DelayKind::explicit_list, h1, h2);
    for (long v : values)
      require(v >= h1 && v <= h2, "DelaySequence: explicit value out of range");
    d.list_ = std::move(values);
    return d;
  }

  long h1() const { return h1_; }
  long h2() const { return h2_; }
  DelayKind kind() const { return kind_; }

  std::vector<long> generate(long steps) const {
    std::vector<long> out(static_cast<std::size_t>(steps));
    std::mt19937_64 rng(seed_);
    std::uniform_int_distribution<long> dist(h1_, h2_);
    for (long k = 0; k < steps; ++k) {
      long h = h1_;
      switch (kind_) {
        case DelayKind::constant:
          h = value_;
          break;
        case DelayKind::uniform_random:
          h = dist(rng);
          break;
        case DelayKind::sinusoidal: {
          const double mag =
              std::abs(std::sin(static_cast<double>(k) * M_PI / 2.0));
          h = h1_ + std::lround(static_cast<double>(h2_ - h1_) * mag);
          break;
        }
        case DelayKind::explicit_list:
          require(static_cast<std::size_t>(k) < list_.size(),
                  "DelaySequence: explicit list shorter than requested steps");
          h = list_[static_cast<std::size_t>(k)];
          break;
      }
      require(h >= h1_ && h <= h2_, "DelaySequence: generated delay escaped "
                                    "[h1, h2]");
      out[static_cast<std::size_t>(k)] = h;
    }
    return out;
  }

 private:
  DelaySequence(DelayKind kind, long h1, long h2)
      : kind_(kind), h1_(h1), h2_(h2) {
    require(h1 >= 1 && h2 >= h1, "DelaySequence: needs 1 <= h1 <= h2");
  }

  DelayKind kind_;
  long h1_, h2_;
  long value_ = 0;
  std::uint64_t seed_ = 0;
  std::vector<long> list_;
};

/// Simulated state history x(k) for k in [-h2, K] with the realized delay
/// sequence, plus prefix sums used for O(1) window averages.
template <class Scalar>
class Trajectory {
 public:
  Trajectory(DelaySystem<Scalar> sys, std::vector<Vector<Scalar>> states,
             std::vector<long> delays)
      : sys_(std::move(sys)),
        states_(std::move(states)),
        delays_(std::move(delays)) {
    const Index n = sys_.n();
    prefix1_.resize(states_.size());
    prefix2_.resize(states_.size());
    Vector<Scalar> p1 = Vector<Scalar>::Zero(n);
    Vector<Scalar> p2 = Vector<Scalar>::Zero(n);
    for (std::size_t i = 0; i < states_.size(); ++i) {
      p1 += states_[i];
      p2 += p1;
      prefix1_[i] = p1;
      prefix2_[i] = p2;
    }
  }

  const DelaySystem<Scalar>& system() const { return sys_; }
  long steps() const { return static_cast<long>(delays_.size()); }

  const Vector<Scalar>& state(long k) const {
    require(k >= -sys_.h2 && k <= steps(),
            "Trajectory: state index out of range");
    return states_[static_cast<std::size_t>(k + sys_.h2)];
  }

  long delay(long k) const {
    require(k >= 0 && k < steps(), "Trajectory: delay index out of range");
    return delays_[static_cast<std::size_t>(k)];
  }

  /// Sum of x(i) over i in [lo, hi]; empty when hi < lo.
  Vector<Scalar> window_sum(long lo, long hi) const {
    return psum(prefix1_, hi) - psum(prefix1_, lo - 1);
  }

  /// Sum of the first prefix over indices [lo, hi].
  Vector<Scalar> window_sum2(long lo, long hi) const {
    return psum(prefix2_, hi) - psum(prefix2_, lo - 1);
  }

 private:
  Vector<Scalar> psum(const std::vector<Vector<Scalar>>& p, long k) const {
    if (k < -sys_.h2) return Vector<Scalar>::Zero(sys_.n());
    require(k <= steps(), "Trajectory: prefix index out of range");
    return p[static_cast<std::size_t>(k + sys_.h2)];
  }

  DelaySystem<Scalar> sys_;
  std::vector<Vector<Scalar>> states_;
  std::vector<long> delays_;
  std::vector<Vector<Scalar>> prefix1_, prefix2_;
};

/// Rolls out x(k+1) = A x(k) + Ad x(k - h(k)) from the initial segment
/// phi = {x(-h2), ..., x(0)} for `steps` steps.
template <class Scalar>
Trajectory<Scalar> simulate(const DelaySystem<Scalar>& sys,
                            const DelaySequence& delays,
                            const std::vector<Vector<Scalar>>& phi,
                            long steps) {
  sys.validate();
  require(steps >= 1, "simulate: steps must be >= 1");
  if (static_cast<long>(phi.size()) != sys.h2 + 1) {
    std::ostringstream os;
    os << "simulate: initial segment must supply h2+1 = " << (sys.h2 + 1)
       << " states, got " << phi.size();
    throw std::invalid_argument(os.str());
  }
  for (const auto& v : phi)
    require(v.size() == sys.n(), "simulate: initial state dimension mismatch");
  require(delays.h1() == sys.h1 && delays.h2() == sys.h2,
          "simulate: delay sequence bounds must match the system");

  std::vector<Vector<Scalar>> states = phi;
  states.reserve(phi.size() + static_cast<std::size_t>(steps));
  const std::vector<long> hs = delays.generate(steps);
  for (long k = 0; k < steps; ++k) {
    const auto& xk = states[static_cast<std::size_t>(k + sys.h2)];
    const auto& xd =
        states[static_cast<std::size_t>(k - hs[static_cast<std::size_t>(k)] +
                                        sys.h2)];
    states.push_back(sys.a * xk + sys.ad * xd);
  }
  return Trajectory<Scalar>(sys, std::move(states), hs);
}

/// The 10n-dimensional augmented vector at step k: current and delayed
/// states followed by the six normalized window sums, using the step's
/// realized delay.
template <class Scalar>
Vector<Scalar> augmented_state(const Trajectory<Scalar>& traj, long k) {
  const auto& sys = traj.system();
  require(k >= 0 && k < traj.steps(),
          "augmented_state: step must have a realized delay and full history");
  const Index n = sys.n();
  const long h1 = sys.h1, h2 = sys.h2, h = traj.delay(k);

  auto t_of = [](long w) { return static_cast<double>(interval_T(w)); };
  auto g_of = [](long w) { return static_cast<double>(interval_gamma(w)); };

  Vector<Scalar> zeta = Vector<Scalar>::Zero(10 * n);
  zeta.segment(0, n) = traj.state(k);
  zeta.segment(n, n) = traj.state(k - h1);
  zeta.segment(2 * n, n) = traj.state(k - h);
  zeta.segment(3 * n, n) = traj.state(k - h2);
  zeta.segment(4 * n, n) = traj.window_sum(k - h1, k) / Scalar(t_of(h1));
  zeta.segment(5 * n, n) = traj.window_sum(k - h, k - h1) / Scalar(t_of(h - h1));
  zeta.segment(6 * n, n) = traj.window_sum(k - h2, k - h) / Scalar(t_of(h2 - h));
  // double sums via first and second prefix sums:
  //   sum_{s=-w}^{0} sum_{i=k+s}^{m} x(i)
  //     = (w+1) P1(m) - [P2(m-1) - P2(m-w-2)]  with m the window head
  auto nu_double = [&](long w, long m) {
    return ((Scalar(static_cast<double>(w + 1)) * traj.window_sum(-h2 - 1, m) -
             (traj.window_sum2(-h2 - 1, m - 1) -
              traj.window_sum2(-h2 - 1, m - w - 2))) /
            Scalar(g_of(w)))
        .eval();
  };
  zeta.segment(7 * n, n) = nu_double(h1, k);
  zeta.segment(8 * n, n) = nu_double(h - h1, k - h1);
  zeta.segment(9 * n, n) = nu_double(h2 - h, k - h);
  return zeta;
}

/// Energy functional value at step k: the quadratic form of the extended
/// state plus the delayed quadratic sums. Window sums are evaluated with
/// weighted prefix accumulations rather than literal nested loops.
template <class Scalar>
Scalar lkf_value(const Trajectory<Scalar>& traj,
                 const LkfVariables<Scalar>& vars, long k) {
  const auto& sys = traj.system();
  sys.validate();
  vars.validate(sys.n());
  require(k >= 0 && k <= traj.steps(), "lkf_value: index out of range");
  const Index n = sys.n();
  const long h1 = sys.h1, h2 = sys.h2, h12 = h2 - h1;

  Vector<Scalar> xt(4 * n);
  xt.segment(0, n) = traj.state(k);
  xt.segment(n, n) = traj.window_sum(k - h1, k - 1);
  xt.segment(2 * n, n) = traj.window_sum(k - h2, k - h1 - 1);
  // sum_{s=-h1}^{-1} sum_{i=k+s}^{k-1} x(i) = h1 P1(k-1) - [P2(k-2) - P2(k-h1-2)]
  xt.segment(3 * n, n) =
      Scalar(static_cast<double>(h1)) * traj.window_sum(-h2 - 1, k - 1) -
      (traj.window_sum2(-h2 - 1, k - 2) -
       traj.window_sum2(-h2 - 1, k - h1 - 2));
  Scalar v = xt.dot(vars.p * xt);

  for (long s = k - h1; s <= k - 1; ++s)
    v += traj.state(s).dot(vars.q1 * traj.state(s));
  for (long s = k - h2; s <= k - h1 - 1; ++s)
    v += traj.state(s).dot(vars.q2 * traj.state(s));

  // scalar prefix sums of the increment quadratic forms over the window
  // j in [k-h2-1, k-1]; w*(j) = sum_{i=k-h2}^{j} dx(i)' M dx(i)
  const long base = k - h2 - 1;
  auto quad_prefix = [&](const Matrix<Scalar>& m) {
    std::vector<Scalar> w(static_cast<std::size_t>(h2 + 1), Scalar(0));
    Scalar acc(0);
    for (long j = k - h2; j <= k - 1; ++j) {
      const Vector<Scalar> dx = traj.state(j + 1) - traj.state(j);
      acc += dx.dot(m * dx);
      w[static_cast<std::size_t>(j - base)] = acc;
    }
    return w;
  };
  auto at = [&](const std::vector<Scalar>& w, long j) {
    return j <= base ? Scalar(0) : w[static_cast<std::size_t>(j - base)];
  };

  const auto w_r1 = quad_prefix(vars.r1);
  const auto w_r2 = quad_prefix(vars.r2);
  const auto w_s1 = quad_prefix(vars.s1);
  const auto w_s2 = quad_prefix(vars.s2);

  // h1 * sum_{s=-h1}^{-1} [W(k-1) - W(k+s-1)]
  Scalar r1_term(0);
  for (long s = -h1; s <= -1; ++s)
    r1_term += at(w_r1, k - 1) - at(w_r1, k + s - 1);
  v += Scalar(static_cast<double>(h1)) * r1_term;

  Scalar r2_term(0);
  for (long s = -h2; s <= -h1 - 1; ++s)
    r2_term += at(w_r2, k - 1) - at(w_r2, k + s - 1);
  v += Scalar(static_cast<double>(h12)) * r2_term;

  // triple sums, reordered: sum over i of (multiplicity of i) * window
  Scalar s1_term(0);
  for (long i = -h1; i <= -1; ++i)
    s1_term += Scalar(static_cast<double>(-i)) *
               (at(w_s1, k - 1) - at(w_s1, k + i - 1));
  v += s1_term;

  Scalar s2_term(0);
  for (long i = -h2; i <= -h1 - 1; ++i)
    s2_term += Scalar(static_cast<double>(-h1 - i)) *
               (at(w_s2, k - 1) - at(w_s2, k + i - 1));
  v += s2_term;

  return v;
}

template <class Scalar>
struct DeltaVCheck {
  Scalar dv_exact;
  Scalar quad_bound;
};

/// Exact one-step decrease of the functional next to its quadratic upper
/// bound through the assembled stability matrix at the step's delay.
template <class Scalar>
DeltaVCheck<Scalar> delta_v_chain_check(const Trajectory<Scalar>& traj,
                                        const LkfVariables<Scalar>& vars,
                                        long k) {
  require(k >= 0 && k + 1 <= traj.steps(),
          "delta_v_chain_check: needs V at k and k+1");
  DeltaVCheck<Scalar> out;
  out.dv_exact = lkf_value(traj, vars, k + 1) - lkf_value(traj, vars, k);
  const Vector<Scalar> zeta = augmented_state(traj, k);
  const Matrix<Scalar> pi = assemble_pi(traj.system(), vars, traj.delay(k));
  out.quad_bound = zeta.dot(pi * zeta);
  return out;
}

}  // namespace delaycert
