#pragma once

#include <atomic>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace symscope {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

// Numerical tolerances used across the toolkit. Values are part of the
// documented conventions and appear verbatim in emitted reports.
inline constexpr double kHermiticityTol = 1e-10;
inline constexpr double kPsdClipTol = 1e-10;
inline constexpr double kFidelityClipTol = 1e-12;
inline constexpr double kUnitarityTol = 1e-10;
inline constexpr double kHomomorphismTol = 1e-9;
inline constexpr double kChargeTol = 1e-10;
inline constexpr double kPhaseSnapTol = 1e-6;
inline constexpr double kInnerRecoveryTol = 1e-8;

namespace detail {
inline std::atomic<std::int64_t>& psd_clip_counter() {
  static std::atomic<std::int64_t> count{0};
  return count;
}
inline std::int64_t& dim_cap_storage() {
  static std::int64_t cap = std::int64_t{1} << 13;
  return cap;
}
}  // namespace detail

/// Global dimension budget. Constructors of chain-sized objects reject
/// total dimensions above the cap. Overridable (e.g. from SYMSCOPE_DIM_CAP).
inline std::int64_t dimension_cap() { return detail::dim_cap_storage(); }

inline void set_dimension_cap(std::int64_t cap) {
  if (cap < 2) throw std::invalid_argument("dimension cap must be >= 2");
  detail::dim_cap_storage() = cap;
}

/// Number of eigenvalues clipped to zero by DensityOperator validation so
/// far in this process; negative dust in (-1e-10, 0) is clipped and counted.
inline std::int64_t psd_clip_count() { return detail::psd_clip_counter().load(); }
inline void reset_psd_clip_count() { detail::psd_clip_counter().store(0); }

inline void require(bool condition, const std::string& message) {
  if (!condition) throw std::invalid_argument(message);
}

}  // namespace symscope
