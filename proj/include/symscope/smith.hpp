#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "symscope/common.hpp"

namespace symscope {

using IntMatrix = Eigen::Matrix<long long, Eigen::Dynamic, Eigen::Dynamic>;
using IntVector = Eigen::Matrix<long long, Eigen::Dynamic, 1>;

namespace detail {

inline long long checked_mul(long long a, long long b) {
  long long r;
  if (__builtin_mul_overflow(a, b, &r))
    throw std::overflow_error("smith_normal_form: integer overflow");
  return r;
}

inline long long checked_sub(long long a, long long b) {
  long long r;
  if (__builtin_sub_overflow(a, b, &r))
    throw std::overflow_error("smith_normal_form: integer overflow");
  return r;
}

inline long long checked_add(long long a, long long b) {
  long long r;
  if (__builtin_add_overflow(a, b, &r))
    throw std::overflow_error("smith_normal_form: integer overflow");
  return r;
}

}  // namespace detail

/// u * a * v == s with u, v unimodular and s diagonal, each diagonal entry
/// nonnegative and dividing the next; rank is the number of nonzero entries.
struct SmithDecomposition {
  IntMatrix u;
  IntMatrix s;
  IntMatrix v;
  int rank = 0;
};

inline SmithDecomposition smith_normal_form(const IntMatrix& a) {
  using detail::checked_add;
  using detail::checked_mul;
  using detail::checked_sub;
  const Eigen::Index m = a.rows(), n = a.cols();
  SmithDecomposition out;
  out.s = a;
  out.u = IntMatrix::Identity(m, m);
  out.v = IntMatrix::Identity(n, n);
  IntMatrix& s = out.s;
  IntMatrix& u = out.u;
  IntMatrix& v = out.v;

  auto row_sub = [&](Eigen::Index i, long long q, Eigen::Index t) {
    for (Eigen::Index j = 0; j < n; ++j)
      s(i, j) = checked_sub(s(i, j), checked_mul(q, s(t, j)));
    for (Eigen::Index j = 0; j < m; ++j)
      u(i, j) = checked_sub(u(i, j), checked_mul(q, u(t, j)));
  };
  auto col_sub = [&](Eigen::Index j, long long q, Eigen::Index t) {
    for (Eigen::Index i = 0; i < m; ++i)
      s(i, j) = checked_sub(s(i, j), checked_mul(q, s(i, t)));
    for (Eigen::Index i = 0; i < n; ++i)
      v(i, j) = checked_sub(v(i, j), checked_mul(q, v(i, t)));
  };
  auto row_add = [&](Eigen::Index i, Eigen::Index t) {
    for (Eigen::Index j = 0; j < n; ++j) s(t, j) = checked_add(s(t, j), s(i, j));
    for (Eigen::Index j = 0; j < m; ++j) u(t, j) = checked_add(u(t, j), u(i, j));
  };

  for (Eigen::Index t = 0; t < std::min(m, n); ++t) {
    for (;;) {
      // Smallest-magnitude nonzero entry of the trailing block -> pivot.
      Eigen::Index pi = -1, pj = -1;
      long long best = 0;
      for (Eigen::Index i = t; i < m; ++i)
        for (Eigen::Index j = t; j < n; ++j) {
          long long x = std::llabs(s(i, j));
          if (x != 0 && (pi < 0 || x < best)) { best = x; pi = i; pj = j; }
        }
      if (pi < 0) break;  // trailing block is zero
      if (pi != t) { s.row(pi).swap(s.row(t)); u.row(pi).swap(u.row(t)); }
      if (pj != t) { s.col(pj).swap(s.col(t)); v.col(pj).swap(v.col(t)); }

      bool clean = true;
      for (Eigen::Index i = t + 1; i < m; ++i) {
        if (s(i, t) == 0) continue;
        row_sub(i, s(i, t) / s(t, t), t);
        if (s(i, t) != 0) clean = false;  // remainder smaller than pivot
      }
      for (Eigen::Index j = t + 1; j < n; ++j) {
        if (s(t, j) == 0) continue;
        col_sub(j, s(t, j) / s(t, t), t);
        if (s(t, j) != 0) clean = false;
      }
      if (!clean) continue;  // re-pivot on the shrunken entry

      // Pivot must divide the trailing block for the divisibility chain.
      bool divides = true;
      for (Eigen::Index i = t + 1; i < m && divides; ++i)
        for (Eigen::Index j = t + 1; j < n && divides; ++j)
          if (s(i, j) % s(t, t) != 0) { row_add(i, t); divides = false; }
      if (divides) break;
    }
    if (t < std::min(m, n) && s(t, t) < 0) {
      s.row(t) = -s.row(t);
      u.row(t) = -u.row(t);
    }
  }

  for (Eigen::Index t = 0; t < std::min(m, n); ++t)
    if (s(t, t) != 0) ++out.rank;

  // Exact self-check in wide arithmetic; the factorization is cheap to verify.
  std::vector<__int128> av(static_cast<std::size_t>(m * n), 0);
  for (Eigen::Index k = 0; k < m; ++k)
    for (Eigen::Index j = 0; j < n; ++j) {
      __int128 acc = 0;
      for (Eigen::Index l = 0; l < n; ++l)
        acc += static_cast<__int128>(a(k, l)) * v(l, j);
      av[static_cast<std::size_t>(k * n + j)] = acc;
    }
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      __int128 acc = 0;
      for (Eigen::Index k = 0; k < m; ++k)
        acc += static_cast<__int128>(u(i, k)) *
               av[static_cast<std::size_t>(k * n + j)];
      if (acc != static_cast<__int128>(s(i, j)))
        throw std::logic_error("smith_normal_form: verification failed");
    }
  return out;
}

}  // namespace symscope
