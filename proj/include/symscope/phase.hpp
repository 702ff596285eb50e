#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>

#include <boost/rational.hpp>

#include "symscope/common.hpp"

namespace symscope {

/// Element of Q/Z written as a reduced fraction p/q in [0, 1); represents the
/// unit complex number e^{2*pi*i*p/q}. The group operation is addition mod 1.
class Phase {
 public:
  Phase() : r_(0, 1) {}

  static Phase of(long long num, long long den) {
    require(den != 0, "Phase: zero denominator");
    return Phase(boost::rational<long long>(num, den));
  }

  /// Snap a value given in turns (full revolutions) to a rational with
  /// denominator <= max_den. Returns nullopt if no rational within tol exists.
  static std::optional<Phase> try_from_turns(double turns, long long max_den,
                                             double tol = kPhaseSnapTol) {
    double frac = turns - std::floor(turns);
    // Continued-fraction best rational approximation with bounded denominator.
    long long p0 = 0, q0 = 1, p1 = 1, q1 = 0;
    double x = frac;
    for (int iter = 0; iter < 64; ++iter) {
      double fl = std::floor(x);
      long long a = static_cast<long long>(fl);
      long long p2 = a * p1 + p0;
      long long q2 = a * q1 + q0;
      if (q2 > max_den) break;
      p0 = p1; q0 = q1; p1 = p2; q1 = q2;
      double rem = x - fl;
      if (rem < 1e-15) break;
      x = 1.0 / rem;
    }
    if (q1 == 0) return std::nullopt;
    double approx = static_cast<double>(p1) / static_cast<double>(q1);
    double diff = std::abs(approx - frac);
    diff = std::min(diff, 1.0 - diff);  // wrap-around distance in Q/Z
    if (diff > tol) return std::nullopt;
    return Phase(boost::rational<long long>(p1, q1));
  }

  static Phase from_turns(double turns, long long max_den,
                          double tol = kPhaseSnapTol) {
    auto p = try_from_turns(turns, max_den, tol);
    if (!p) {
      throw std::runtime_error(
          "Phase: value " + std::to_string(turns) +
          " turns does not snap to a rational with denominator <= " +
          std::to_string(max_den));
    }
    return *p;
  }

  /// Snap arg(z)/2pi of a unit complex number.
  static Phase from_unit(Complex z, long long max_den,
                         double tol = kPhaseSnapTol) {
    return from_turns(std::arg(z) / (2.0 * std::numbers::pi), max_den, tol);
  }

  static Phase parse(const std::string& s) {
    auto slash = s.find('/');
    if (slash == std::string::npos) return of(std::stoll(s), 1);
    return of(std::stoll(s.substr(0, slash)), std::stoll(s.substr(slash + 1)));
  }

  long long num() const { return r_.numerator(); }
  long long den() const { return r_.denominator(); }
  bool is_zero() const { return r_.numerator() == 0; }

  Complex unit() const {
    double t = 2.0 * std::numbers::pi * static_cast<double>(r_.numerator()) /
               static_cast<double>(r_.denominator());
    return Complex(std::cos(t), std::sin(t));
  }

  double turns() const {
    return static_cast<double>(r_.numerator()) /
           static_cast<double>(r_.denominator());
  }

  Phase operator+(const Phase& o) const { return Phase(r_ + o.r_); }
  Phase operator-(const Phase& o) const { return Phase(r_ - o.r_); }
  Phase operator-() const { return Phase(-r_); }
  Phase times(long long k) const {
    return Phase(r_ * boost::rational<long long>(k, 1));
  }
  bool operator==(const Phase& o) const { return r_ == o.r_; }
  bool operator!=(const Phase& o) const { return r_ != o.r_; }
  bool operator<(const Phase& o) const { return r_ < o.r_; }

  std::string str() const {
    return std::to_string(num()) + "/" + std::to_string(den());
  }

 private:
  explicit Phase(boost::rational<long long> r) : r_(normalize(r)) {}

  static boost::rational<long long> normalize(boost::rational<long long> r) {
    long long n = r.numerator(), d = r.denominator();
    long long m = ((n % d) + d) % d;
    return boost::rational<long long>(m, d);
  }

  boost::rational<long long> r_;
};

}  // namespace symscope
