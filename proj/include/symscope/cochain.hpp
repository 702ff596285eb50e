#pragma once

#include <cstdint>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "symscope/common.hpp"
#include "symscope/group.hpp"
#include "symscope/phase.hpp"
#include "symscope/smith.hpp"

namespace symscope {

/// U(1)-valued group cochain with exact rational phases: a function
/// G^degree -> Q/Z stored flat with argument 0 fastest
/// (index = sum_i g_i * order^i). Degree 0 is the single constant.
class Cochain {
 public:
  Cochain(GroupTable group, int degree)
      : group_(std::move(group)), degree_(degree) {
    require(degree >= 0, "Cochain: negative degree");
    std::size_t size = 1;
    for (int i = 0; i < degree; ++i) {
      size *= static_cast<std::size_t>(group_.order());
      require(size <= (std::size_t(1) << 28), "Cochain: degree too large");
    }
    values_.assign(size, Phase());
  }

  static Cochain from_values(GroupTable group, int degree,
                             std::vector<Phase> values) {
    Cochain c(std::move(group), degree);
    require(values.size() == c.values_.size(),
            "Cochain: value count does not match order^degree");
    c.values_ = std::move(values);
    return c;
  }

  const GroupTable& group() const { return group_; }
  int degree() const { return degree_; }
  std::size_t size() const { return values_.size(); }
  const std::vector<Phase>& values() const { return values_; }

  std::size_t index(const std::vector<int>& args) const {
    require(static_cast<int>(args.size()) == degree_,
            "Cochain: argument count does not match degree");
    std::size_t idx = 0, stride = 1;
    for (int a : args) {
      require(a >= 0 && a < group_.order(), "Cochain: element out of range");
      idx += static_cast<std::size_t>(a) * stride;
      stride *= static_cast<std::size_t>(group_.order());
    }
    return idx;
  }

  Phase at(const std::vector<int>& args) const { return values_[index(args)]; }
  void set(const std::vector<int>& args, Phase p) { values_[index(args)] = p; }

  bool is_zero() const {
    for (const Phase& p : values_)
      if (!p.is_zero()) return false;
    return true;
  }

  /// Vanishes whenever any argument is the identity.
  bool is_normalized() const {
    std::vector<int> args(degree_);
    for (std::size_t idx = 0; idx < values_.size(); ++idx) {
      decode(idx, args);
      bool touches_identity = false;
      for (int a : args) touches_identity |= (a == group_.identity());
      if (touches_identity && !values_[idx].is_zero()) return false;
    }
    return true;
  }

  Cochain operator+(const Cochain& o) const {
    require_compatible(o);
    Cochain out = *this;
    for (std::size_t i = 0; i < values_.size(); ++i)
      out.values_[i] = values_[i] + o.values_[i];
    return out;
  }

  Cochain operator-(const Cochain& o) const {
    require_compatible(o);
    Cochain out = *this;
    for (std::size_t i = 0; i < values_.size(); ++i)
      out.values_[i] = values_[i] - o.values_[i];
    return out;
  }

  Cochain operator-() const {
    Cochain out = *this;
    for (Phase& p : out.values_) p = -p;
    return out;
  }

  Cochain times(long long k) const {
    Cochain out = *this;
    for (Phase& p : out.values_) p = p.times(k);
    return out;
  }

  bool operator==(const Cochain& o) const {
    return degree_ == o.degree_ && group_ == o.group_ && values_ == o.values_;
  }
  bool operator!=(const Cochain& o) const { return !(*this == o); }

  void decode(std::size_t idx, std::vector<int>& args) const {
    for (int i = 0; i < degree_; ++i) {
      args[i] = static_cast<int>(idx % static_cast<std::size_t>(group_.order()));
      idx /= static_cast<std::size_t>(group_.order());
    }
  }

 private:
  void require_compatible(const Cochain& o) const {
    require(degree_ == o.degree_ && group_ == o.group_,
            "Cochain: mismatched group or degree");
  }

  GroupTable group_;
  int degree_;
  std::vector<Phase> values_;
};

namespace detail {

/// Visit the faces of the (n+1)-tuple `t`: calls fn(face_args, sign) for the
/// drop-first face (+1), each adjacent merge ((-1)^k), and drop-last
/// ((-1)^{n+1}).
template <typename Fn>
void for_each_face(const GroupTable& group, const std::vector<int>& t, Fn fn) {
  int n = static_cast<int>(t.size()) - 1;  // faces live in degree n
  std::vector<int> face(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) face[i] = t[i + 1];
  fn(face, +1);
  for (int k = 1; k <= n; ++k) {
    for (int i = 0; i < n; ++i) face[i] = t[i < k - 1 ? i : i + 1];
    face[k - 1] = group.mult(t[k - 1], t[k]);
    fn(face, k % 2 == 0 ? +1 : -1);
  }
  for (int i = 0; i < n; ++i) face[i] = t[i];
  fn(face, n % 2 == 0 ? -1 : +1);
}

inline long long checked_lcm(long long a, long long b) {
  return checked_mul(a / std::gcd(a, b), b);
}

}  // namespace detail

/// delta w, evaluated exactly in Q/Z.
inline Cochain coboundary(const Cochain& w) {
  const GroupTable& group = w.group();
  Cochain out(group, w.degree() + 1);
  std::vector<int> t(static_cast<std::size_t>(w.degree()) + 1);
  for (std::size_t idx = 0; idx < out.size(); ++idx) {
    out.decode(idx, t);
    Phase acc;
    detail::for_each_face(group, t, [&](const std::vector<int>& face, int sgn) {
      acc = sgn > 0 ? acc + w.at(face) : acc - w.at(face);
    });
    out.set(t, acc);
  }
  return out;
}

inline bool is_cocycle(const Cochain& w) { return coboundary(w).is_zero(); }

/// Integer matrix of delta: C^{degree-1} -> C^{degree} acting on value
/// vectors (so the degree-1 matrix is zero: constants have zero coboundary).
inline IntMatrix coboundary_matrix(const GroupTable& group, int degree) {
  require(degree >= 1, "coboundary_matrix: degree must be >= 1");
  Cochain rows(group, degree), cols(group, degree - 1);
  IntMatrix d = IntMatrix::Zero(static_cast<Eigen::Index>(rows.size()),
                                static_cast<Eigen::Index>(cols.size()));
  std::vector<int> t(static_cast<std::size_t>(degree));
  for (std::size_t idx = 0; idx < rows.size(); ++idx) {
    rows.decode(idx, t);
    detail::for_each_face(group, t, [&](const std::vector<int>& face, int sgn) {
      d(static_cast<Eigen::Index>(idx),
        static_cast<Eigen::Index>(cols.index(face))) += sgn;
    });
  }
  return d;
}

struct TrivializationResult {
  bool trivial = false;
  /// Verified witness with coboundary(witness) == w; present iff trivial.
  std::optional<Cochain> witness;
};

/// Decides delta eta = w over rational cochains by Smith-reducing the integer
/// coboundary matrix once; reusable across many right-hand sides.
class CoboundarySolver {
 public:
  CoboundarySolver(GroupTable group, int degree)
      : group_(std::move(group)), degree_(degree) {
    require(degree_ >= 1, "CoboundarySolver: degree must be >= 1");
    smith_ = smith_normal_form(coboundary_matrix(group_, degree_));
  }

  TrivializationResult trivialize(const Cochain& w) const {
    require(w.degree() == degree_ && w.group() == group_,
            "CoboundarySolver: cochain does not match solver");
    const IntMatrix& u = smith_.u;
    const IntMatrix& v = smith_.v;
    const Eigen::Index rows = u.rows(), cols = v.rows();
    const int r = smith_.rank;

    // Common denominator form of the target values.
    long long q = 1;
    for (const Phase& p : w.values()) q = detail::checked_lcm(q, p.den());
    std::vector<long long> num(w.size());
    for (std::size_t i = 0; i < w.size(); ++i)
      num[i] = detail::checked_mul(w.values()[i].num(),
                                   q / w.values()[i].den());

    // t = u * c. Solvable over rational cochains mod 1 iff every entry
    // beyond the rank is an integer.
    std::vector<long long> t(static_cast<std::size_t>(rows));
    for (Eigen::Index i = 0; i < rows; ++i) {
      __int128 acc = 0;
      for (Eigen::Index k = 0; k < rows; ++k)
        acc += static_cast<__int128>(u(i, k)) *
               num[static_cast<std::size_t>(k)];
      if (acc > INT64_MAX || acc < INT64_MIN)
        throw std::overflow_error("CoboundarySolver: integer overflow");
      t[static_cast<std::size_t>(i)] = static_cast<long long>(acc);
    }
    for (Eigen::Index i = r; i < rows; ++i)
      if (t[static_cast<std::size_t>(i)] % q != 0) return {false, std::nullopt};

    // Witness x = v * z with z_i = t_i / (q s_i); the elementary divisors
    // chain, so everything lives over the single denominator q * s_{r-1}.
    long long big = r > 0 ? detail::checked_mul(q, smith_.s(r - 1, r - 1)) : q;
    std::vector<long long> zn(static_cast<std::size_t>(cols), 0);
    for (int i = 0; i < r; ++i)
      zn[static_cast<std::size_t>(i)] = detail::checked_mul(
          t[static_cast<std::size_t>(i)], big / (q * smith_.s(i, i)));
    std::vector<Phase> eta(static_cast<std::size_t>(cols));
    for (Eigen::Index j = 0; j < cols; ++j) {
      __int128 acc = 0;
      for (int i = 0; i < r; ++i)
        acc += static_cast<__int128>(v(j, i)) * zn[static_cast<std::size_t>(i)];
      __int128 b = big;
      acc = ((acc % b) + b) % b;
      eta[static_cast<std::size_t>(j)] =
          Phase::of(static_cast<long long>(acc), big);
    }
    Cochain witness = Cochain::from_values(group_, degree_ - 1, std::move(eta));
    if (coboundary(witness) != w)
      throw std::logic_error("CoboundarySolver: witness verification failed");
    return {true, std::move(witness)};
  }

  bool is_coboundary(const Cochain& w) const { return trivialize(w).trivial; }

  const GroupTable& group() const { return group_; }
  int degree() const { return degree_; }

 private:
  GroupTable group_;
  int degree_;
  SmithDecomposition smith_;
};

inline TrivializationResult trivialize(const Cochain& w) {
  return CoboundarySolver(w.group(), w.degree()).trivialize(w);
}

inline bool is_coboundary(const Cochain& w) { return trivialize(w).trivial; }

/// Same cohomology class: the difference is a coboundary.
inline bool same_class(const Cochain& a, const Cochain& b) {
  return is_coboundary(a - b);
}

/// Extract the 2-cocycle of a projective unitary representation
/// rep(g) rep(h) = omega(g, h) rep(gh). The identity matrix may carry a unit
/// scalar, which is divided out first; phases must snap to rationals with
/// denominator <= max_den (default 4|G|^2 when 0).
inline Cochain projective_2cocycle(const GroupTable& group,
                                   std::vector<Matrix> rep,
                                   double tol = kPhaseSnapTol,
                                   long long max_den = 0) {
  const int m = group.order();
  require(static_cast<int>(rep.size()) == m,
          "projective_2cocycle: one matrix per group element");
  const Eigen::Index d = rep[0].rows();
  require(d > 0, "projective_2cocycle: empty matrices");
  for (const Matrix& r : rep) {
    require(r.rows() == d && r.cols() == d,
            "projective_2cocycle: inconsistent dimensions");
    require((r.adjoint() * r - Matrix::Identity(d, d)).cwiseAbs().maxCoeff() <=
                kUnitarityTol,
            "projective_2cocycle: matrices must be unitary");
  }
  const double dim = static_cast<double>(d);
  Complex lam = rep[group.identity()].trace() / dim;
  require(std::abs(std::abs(lam) - 1.0) <= kInnerRecoveryTol &&
              (rep[group.identity()] - lam * Matrix::Identity(d, d)).norm() <=
                  kInnerRecoveryTol * std::sqrt(dim),
          "projective_2cocycle: identity must map to a unit scalar");
  rep[group.identity()] /= lam;

  if (max_den <= 0) max_den = 4LL * m * m;
  Cochain out(group, 2);
  for (int g = 0; g < m; ++g)
    for (int h = 0; h < m; ++h) {
      Matrix prod = rep[g] * rep[h];
      const Matrix& target = rep[group.mult(g, h)];
      Complex c = (target.adjoint() * prod).trace() / dim;
      require(std::abs(std::abs(c) - 1.0) <= kInnerRecoveryTol &&
                  (prod - c * target).norm() <=
                      kInnerRecoveryTol * std::sqrt(dim),
              "projective_2cocycle: matrices do not close projectively");
      out.set({g, h}, Phase::from_unit(c, max_den, tol));
    }
  require(is_cocycle(out),
          "projective_2cocycle: snapped phases violate the cocycle identity");
  return out;
}

}  // namespace symscope
