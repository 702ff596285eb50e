#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "symscope/common.hpp"

namespace symscope {

/// Finite chain of qudits. Site ordering is little-endian throughout the
/// toolkit: site 0 is the fastest-running index of the computational basis,
/// i.e. basis index b = sum_i digit_i * stride(i) with stride(0) == 1.
class ChainGeometry {
 public:
  explicit ChainGeometry(std::vector<int> local_dims)
      : dims_(std::move(local_dims)) {
    require(!dims_.empty(), "ChainGeometry: empty chain");
    strides_.resize(dims_.size());
    std::int64_t acc = 1;
    for (std::size_t i = 0; i < dims_.size(); ++i) {
      // Dimension-1 sites are allowed only as scalar placeholders (the result
      // of restricting to an empty region); scenario inputs require >= 2.
      require(dims_[i] >= 1, "ChainGeometry: local dimension must be >= 1");
      strides_[i] = acc;
      require(acc <= dimension_cap() / dims_[i],
              "ChainGeometry: total dimension exceeds the configured cap");
      acc *= dims_[i];
    }
    total_ = acc;
  }

  static ChainGeometry uniform(int num_sites, int local_dim = 2) {
    require(num_sites >= 1, "ChainGeometry: need at least one site");
    return ChainGeometry(std::vector<int>(num_sites, local_dim));
  }

  int num_sites() const { return static_cast<int>(dims_.size()); }
  int local_dim(int site) const { return dims_.at(site); }
  const std::vector<int>& local_dims() const { return dims_; }
  std::int64_t total_dim() const { return total_; }
  std::int64_t stride(int site) const { return strides_.at(site); }

  bool operator==(const ChainGeometry& o) const { return dims_ == o.dims_; }
  bool operator!=(const ChainGeometry& o) const { return dims_ != o.dims_; }

 private:
  std::vector<int> dims_;
  std::vector<std::int64_t> strides_;
  std::int64_t total_ = 1;
};

/// Sorted set of site indices within a chain.
class Region {
 public:
  Region() = default;
  explicit Region(std::vector<int> sites) : sites_(std::move(sites)) {
    std::sort(sites_.begin(), sites_.end());
    sites_.erase(std::unique(sites_.begin(), sites_.end()), sites_.end());
    require(sites_.empty() || sites_.front() >= 0,
            "Region: negative site index");
  }

  /// Half-open interval [first, last).
  static Region range(int first, int last) {
    require(first <= last, "Region::range: first > last");
    std::vector<int> s;
    for (int i = first; i < last; ++i) s.push_back(i);
    return Region(std::move(s));
  }

  static Region single(int site) { return Region({site}); }

  const std::vector<int>& sites() const { return sites_; }
  int size() const { return static_cast<int>(sites_.size()); }
  bool empty() const { return sites_.empty(); }

  bool contains(int site) const {
    return std::binary_search(sites_.begin(), sites_.end(), site);
  }

  bool contains(const Region& other) const {
    return std::includes(sites_.begin(), sites_.end(), other.sites_.begin(),
                         other.sites_.end());
  }

  Region complement(int num_sites) const {
    std::vector<int> s;
    for (int i = 0; i < num_sites; ++i)
      if (!contains(i)) s.push_back(i);
    return Region(std::move(s));
  }

  Region united(const Region& other) const {
    std::vector<int> s(sites_);
    s.insert(s.end(), other.sites_.begin(), other.sites_.end());
    return Region(std::move(s));
  }

  bool intersects(const Region& other) const {
    for (int s : other.sites_)
      if (contains(s)) return true;
    return false;
  }

  /// Position of `site` within this region's sorted site list.
  int position_of(int site) const {
    auto it = std::lower_bound(sites_.begin(), sites_.end(), site);
    require(it != sites_.end() && *it == site, "Region: site not contained");
    return static_cast<int>(it - sites_.begin());
  }

  bool operator==(const Region& o) const { return sites_ == o.sites_; }
  bool operator!=(const Region& o) const { return sites_ != o.sites_; }

 private:
  std::vector<int> sites_;
};

namespace detail {

/// Dimension of the subspace spanned by the given sites.
inline std::int64_t region_dim(const ChainGeometry& g, const Region& r) {
  std::int64_t d = 1;
  for (int s : r.sites()) d *= g.local_dim(s);
  return d;
}

/// Basis offsets of a region: offsets[k] for k running over all digit
/// combinations of the region's sites (first listed site fastest), such that
/// a full-chain basis index decomposes uniquely as region offset + complement
/// offset.
inline std::vector<std::int64_t> region_offsets(const ChainGeometry& g,
                                                const Region& r) {
  std::int64_t d = region_dim(g, r);
  std::vector<std::int64_t> offs(static_cast<std::size_t>(d), 0);
  std::int64_t block = 1;
  for (int s : r.sites()) {
    int ld = g.local_dim(s);
    std::int64_t stride = g.stride(s);
    std::int64_t filled = block;
    block *= ld;
    for (std::int64_t k = filled; k < block; ++k)
      offs[k] = offs[k % filled] + (k / filled) * stride;
  }
  return offs;
}

}  // namespace detail

inline void check_region_in_chain(const ChainGeometry& g, const Region& r,
                                  const char* what) {
  require(r.empty() || r.sites().back() < g.num_sites(),
          std::string(what) + ": region exceeds chain");
}

}  // namespace symscope
