#pragma once

#include <utility>
#include <vector>

#include "delaycert/types.hpp"

namespace delaycert {

/// A finite vector-valued sequence u : Z[a,b] -> R^n stored densely.
/// Length l = b - a + 1 >= 1; all entries share dimension n >= 1.
template <class Scalar>
class FiniteSequence {
 public:
  FiniteSequence(std::vector<Vector<Scalar>> values, long start)
      : values_(std::move(values)), a_(start) {
    require(!values_.empty(), "FiniteSequence: needs at least one value");
    const Index n = values_.front().size();
    require(n >= 1, "FiniteSequence: vector dimension must be >= 1");
    for (const auto& v : values_)
      require(v.size() == n, "FiniteSequence: all vectors must share dimension");
  }

  long a() const { return a_; }
  long b() const { return a_ + length() - 1; }
  long length() const { return static_cast<long>(values_.size()); }
  Index dim() const { return values_.front().size(); }

  /// Entry u_k addressed by the absolute index k in [a, b].
  const Vector<Scalar>& at(long k) const {
    require(k >= a() && k <= b(), "FiniteSequence: index out of range");
    return values_[static_cast<std::size_t>(k - a_)];
  }

  const std::vector<Vector<Scalar>>& values() const { return values_; }

 private:
  std::vector<Vector<Scalar>> values_;
  long a_;
};

/// First, second and third order partial-sum aggregates of a sequence,
/// together with the combinations
///   zeta1 = v1 - 2/(l+1) v2
///   zeta2 = v1 - 6/(l+1) v2 + 12/((l+1)(l+2)) v3
///   zeta4 = v2 - 3/(l+2) v3
/// which all vanish for l = 1.
template <class Scalar>
struct AggregateVectors {
  Vector<Scalar> v1, v2, v3;
  Vector<Scalar> zeta1, zeta2, zeta4;
};

/// Computes the aggregates with running prefix sums (single pass).
template <class Scalar>
AggregateVectors<Scalar> aggregate(const FiniteSequence<Scalar>& u) {
  const Index n = u.dim();
  Vector<Scalar> p1 = Vector<Scalar>::Zero(n);
  Vector<Scalar> p2 = Vector<Scalar>::Zero(n);
  Vector<Scalar> p3 = Vector<Scalar>::Zero(n);
  for (const auto& uk : u.values()) {
    p1 += uk;
    p2 += p1;
    p3 += p2;
  }
  AggregateVectors<Scalar> out;
  out.v1 = p1;
  out.v2 = p2;
  out.v3 = p3;
  const Scalar l(static_cast<double>(u.length()));
  out.zeta1 = out.v1 - (Scalar(2) / (l + 1)) * out.v2;
  out.zeta2 = out.v1 - (Scalar(6) / (l + 1)) * out.v2 +
              (Scalar(12) / ((l + 1) * (l + 2))) * out.v3;
  out.zeta4 = out.v2 - (Scalar(3) / (l + 2)) * out.v3;
  return out;
}

namespace detail {

// Pairwise (cascade) summation; kicks in above 64 terms so that gap
// comparisons at 1e-9 tolerance are not eroded by long plain accumulations.
template <class Scalar, class F>
Scalar pairwise_sum(long lo, long hi, const F& term) {
  const long count = hi - lo;
  if (count <= 64) {
    Scalar s(0);
    for (long i = lo; i < hi; ++i) s += term(i);
    return s;
  }
  const long mid = lo + count / 2;
  return pairwise_sum<Scalar>(lo, mid, term) +
         pairwise_sum<Scalar>(mid, hi, term);
}

template <class Scalar>
void check_dims(const FiniteSequence<Scalar>& u,
                const SymmetricPositive<Scalar>& r, const char* where) {
  if (u.dim() != r.dim()) {
    std::ostringstream os;
    os << where << ": sequence dimension " << u.dim()
       << " does not match matrix dimension " << r.dim();
    throw dimension_error(os.str());
  }
}

template <class Scalar>
Scalar quad(const Vector<Scalar>& x, const Matrix<Scalar>& r) {
  return x.dot(r * x);
}

}  // namespace detail

/// Gap of the single Jensen inequality:
///   J1(u) = sum u_k' R u_k - (1/l) (sum u_k)' R (sum u_k)  >= 0.
template <class Scalar>
Scalar jensen_single_gap(const FiniteSequence<Scalar>& u,
                         const SymmetricPositive<Scalar>& r) {
  detail::check_dims(u, r, "jensen_single_gap");
  const auto& vals = u.values();
  const Scalar lhs = detail::pairwise_sum<Scalar>(
      0, u.length(), [&](long i) { return detail::quad(vals[i], r.mat()); });
  const auto agg = aggregate(u);
  const Scalar l(static_cast<double>(u.length()));
  return lhs - detail::quad(agg.v1, r.mat()) / l;
}

/// Gap of the double Jensen inequality:
///   J2(u) = sum_k sum_{s<=k} u_s' R u_s - 2/(l(l+1)) v2' R v2  >= 0.
/// The double sum collapses to the weighted single sum with weights b-k+1.
template <class Scalar>
Scalar jensen_double_gap(const FiniteSequence<Scalar>& u,
                         const SymmetricPositive<Scalar>& r) {
  detail::check_dims(u, r, "jensen_double_gap");
  const auto& vals = u.values();
  const long l = u.length();
  const Scalar lhs = detail::pairwise_sum<Scalar>(0, l, [&](long i) {
    return Scalar(static_cast<double>(l - i)) * detail::quad(vals[i], r.mat());
  });
  const auto agg = aggregate(u);
  const Scalar ld(static_cast<double>(l));
  return lhs - Scalar(2) / (ld * (ld + 1)) * detail::quad(agg.v2, r.mat());
}

/// Refined lower bound on J1(u):
///   J1 >= 3(l+1)/(l(l-1)) zeta1' R zeta1
///         + 5(l+1)(l+2)^2/(l(l-1)(l^2+11)) zeta2' R zeta2,
/// defined as 0 for l = 1 where both zeta vectors vanish.
template <class Scalar>
Scalar refined_single_bound(const FiniteSequence<Scalar>& u,
                            const SymmetricPositive<Scalar>& r) {
  detail::check_dims(u, r, "refined_single_bound");
  if (u.length() == 1) return Scalar(0);
  const auto agg = aggregate(u);
  const Scalar l(static_cast<double>(u.length()));
  const Scalar c1 = Scalar(3) * (l + 1) / (l * (l - 1));
  const Scalar c2 = Scalar(5) * (l + 1) * (l + 2) * (l + 2) /
                    (l * (l - 1) * (l * l + 11));
  return c1 * detail::quad(agg.zeta1, r.mat()) +
         c2 * detail::quad(agg.zeta2, r.mat());
}

/// Refined lower bound on J2(u):
///   J2 >= 16(l+2)/(l(l^2-1)) zeta4' R zeta4,
/// defined as 0 for l = 1 where zeta4 vanishes.
template <class Scalar>
Scalar refined_double_bound(const FiniteSequence<Scalar>& u,
                            const SymmetricPositive<Scalar>& r) {
  detail::check_dims(u, r, "refined_double_bound");
  if (u.length() == 1) return Scalar(0);
  const auto agg = aggregate(u);
  const Scalar l(static_cast<double>(u.length()));
  const Scalar c = Scalar(16) * (l + 2) / (l * (l * l - 1));
  return c * detail::quad(agg.zeta4, r.mat());
}

/// Lower bound of the reduced single-form inequality:
///   sum u_k' R u_k >= (1/l)(v1' R v1 + 3 zeta1' R zeta1 + 5 zeta2' R zeta2).
template <class Scalar>
Scalar corollary_single_bound(const FiniteSequence<Scalar>& u,
                              const SymmetricPositive<Scalar>& r) {
  detail::check_dims(u, r, "corollary_single_bound");
  const auto agg = aggregate(u);
  const Scalar l(static_cast<double>(u.length()));
  return (detail::quad(agg.v1, r.mat()) +
          Scalar(3) * detail::quad(agg.zeta1, r.mat()) +
          Scalar(5) * detail::quad(agg.zeta2, r.mat())) /
         l;
}

/// Lower bound of the reduced double-form inequality:
///   sum_k sum_{s<=k} u_s' R u_s >= 2/(l(l+1)) (v2' R v2 + 8 zeta4' R zeta4).
template <class Scalar>
Scalar corollary_double_bound(const FiniteSequence<Scalar>& u,
                              const SymmetricPositive<Scalar>& r) {
  detail::check_dims(u, r, "corollary_double_bound");
  const auto agg = aggregate(u);
  const Scalar l(static_cast<double>(u.length()));
  return Scalar(2) / (l * (l + 1)) *
         (detail::quad(agg.v2, r.mat()) +
          Scalar(8) * detail::quad(agg.zeta4, r.mat()));
}

/// Both sides of the summation reordering identity
///   sum_{s=a}^{b} sum_{i=a}^{s} v(i)
///     = (b-a+2) sum_{s=a}^{b} v(s) - sum_{s=a}^{b} sum_{i=s}^{b} v(i).
/// Returns {lhs, rhs}; they agree exactly for every sequence.
template <class Scalar>
std::pair<Vector<Scalar>, Vector<Scalar>> reorder_identity_sides(
    const FiniteSequence<Scalar>& v) {
  const Index n = v.dim();
  Vector<Scalar> lhs = Vector<Scalar>::Zero(n);
  Vector<Scalar> prefix = Vector<Scalar>::Zero(n);
  for (const auto& vk : v.values()) {
    prefix += vk;
    lhs += prefix;
  }
  Vector<Scalar> tail_sum = Vector<Scalar>::Zero(n);
  Vector<Scalar> suffix = Vector<Scalar>::Zero(n);
  for (long i = v.length() - 1; i >= 0; --i) {
    suffix += v.values()[static_cast<std::size_t>(i)];
    tail_sum += suffix;
  }
  const Scalar span(static_cast<double>(v.b() - v.a() + 2));
  Vector<Scalar> rhs = span * prefix - tail_sum;
  return {lhs, rhs};
}

}  // namespace delaycert
