#pragma once

#include <algorithm>
#include <numeric>
#include <vector>

#include "symscope/common.hpp"
#include "symscope/phase.hpp"

namespace symscope {

/// Finite group given by its multiplication table. Element 0-based indices;
/// mult(g, h) composes so that realizations satisfy U_g U_h = U_{mult(g,h)}.
class GroupTable {
 public:
  explicit GroupTable(std::vector<std::vector<int>> table)
      : table_(std::move(table)) {
    int n = static_cast<int>(table_.size());
    require(n >= 1, "GroupTable: empty table");
    for (const auto& row : table_) {
      require(static_cast<int>(row.size()) == n, "GroupTable: not square");
      for (int v : row) require(v >= 0 && v < n, "GroupTable: index range");
    }
    // Latin square: every row and column is a permutation.
    for (int g = 0; g < n; ++g) {
      std::vector<char> seen_row(n, 0), seen_col(n, 0);
      for (int h = 0; h < n; ++h) {
        require(!seen_row[table_[g][h]], "GroupTable: row not a permutation");
        seen_row[table_[g][h]] = 1;
        require(!seen_col[table_[h][g]], "GroupTable: column not a permutation");
        seen_col[table_[h][g]] = 1;
      }
    }
    identity_ = -1;
    for (int e = 0; e < n; ++e) {
      bool ok = true;
      for (int g = 0; g < n && ok; ++g)
        ok = table_[e][g] == g && table_[g][e] == g;
      if (ok) {
        identity_ = e;
        break;
      }
    }
    require(identity_ >= 0, "GroupTable: no identity element");
    for (int g = 0; g < n; ++g)
      for (int h = 0; h < n; ++h)
        for (int k = 0; k < n; ++k)
          require(table_[table_[g][h]][k] == table_[g][table_[h][k]],
                  "GroupTable: not associative");
    inverse_.assign(n, -1);
    for (int g = 0; g < n; ++g)
      for (int h = 0; h < n; ++h)
        if (table_[g][h] == identity_ && table_[h][g] == identity_)
          inverse_[g] = h;
    for (int g = 0; g < n; ++g)
      require(inverse_[g] >= 0, "GroupTable: missing inverse");
  }

  int order() const { return static_cast<int>(table_.size()); }
  int mult(int g, int h) const { return table_.at(g).at(h); }
  int inverse(int g) const { return inverse_.at(g); }
  int identity() const { return identity_; }

  bool is_abelian() const {
    int n = order();
    for (int g = 0; g < n; ++g)
      for (int h = 0; h < n; ++h)
        if (table_[g][h] != table_[h][g]) return false;
    return true;
  }

  int element_order(int g) const {
    int acc = g, ord = 1;
    while (acc != identity_) {
      acc = mult(acc, g);
      ++ord;
    }
    return ord;
  }

  int exponent() const {
    long long e = 1;
    for (int g = 0; g < order(); ++g)
      e = std::lcm(e, static_cast<long long>(element_order(g)));
    return static_cast<int>(e);
  }

  static GroupTable cyclic(int n) {
    require(n >= 1, "cyclic: n >= 1");
    std::vector<std::vector<int>> t(n, std::vector<int>(n));
    for (int g = 0; g < n; ++g)
      for (int h = 0; h < n; ++h) t[g][h] = (g + h) % n;
    return GroupTable(std::move(t));
  }

  /// Z2 x Z2 with element (a, b) at index a + 2b.
  static GroupTable klein_four() {
    return direct_product(cyclic(2), cyclic(2));
  }

  /// Index of (g, h) is g + |A|*h.
  static GroupTable direct_product(const GroupTable& a, const GroupTable& b) {
    int na = a.order(), nb = b.order(), n = na * nb;
    std::vector<std::vector<int>> t(n, std::vector<int>(n));
    for (int g = 0; g < n; ++g)
      for (int h = 0; h < n; ++h)
        t[g][h] = a.mult(g % na, h % na) + na * b.mult(g / na, h / na);
    return GroupTable(std::move(t));
  }

  /// All characters of an abelian group as exact rational phases, sorted
  /// lexicographically (the trivial character comes first). chi(g) is the
  /// phase whose unit() is the character value.
  std::vector<std::vector<Phase>> characters() const {
    require(is_abelian(), "characters: group is not abelian");
    int n = order();
    // Greedy generating set.
    std::vector<char> sub(n, 0);
    sub[identity_] = 1;
    auto close = [&](std::vector<char>& s) {
      bool changed = true;
      while (changed) {
        changed = false;
        for (int g = 0; g < n; ++g)
          for (int h = 0; h < n; ++h)
            if (s[g] && s[h] && !s[table_[g][h]]) {
              s[table_[g][h]] = 1;
              changed = true;
            }
      }
    };
    std::vector<int> gens;
    while (true) {
      int best = -1, best_ord = 0;
      for (int g = 0; g < n; ++g)
        if (!sub[g] && element_order(g) > best_ord) {
          best = g;
          best_ord = element_order(g);
        }
      if (best < 0) break;
      gens.push_back(best);
      sub[best] = 1;
      close(sub);
    }
    std::vector<int> gen_ord;
    for (int g : gens) gen_ord.push_back(element_order(g));

    std::vector<std::vector<Phase>> found;
    std::vector<int> assign(gens.size(), 0);
    auto try_assignment = [&]() {
      std::vector<Phase> chi(n);
      std::vector<char> known(n, 0);
      known[identity_] = 1;
      for (std::size_t i = 0; i < gens.size(); ++i) {
        if (gens[i] == identity_) continue;
        chi[gens[i]] = Phase::of(assign[i], gen_ord[i]);
        known[gens[i]] = 1;
      }
      bool progress = true;
      while (progress) {
        progress = false;
        for (int g = 0; g < n; ++g) {
          if (!known[g]) continue;
          for (int x : gens) {
            int gh = table_[g][x];
            Phase v = chi[g] + chi[x];
            if (!known[gh]) {
              chi[gh] = v;
              known[gh] = 1;
              progress = true;
            } else if (chi[gh] != v) {
              return;  // inconsistent assignment
            }
          }
        }
      }
      for (int g = 0; g < n; ++g)
        if (!known[g]) return;
      for (int g = 0; g < n; ++g)
        for (int h = 0; h < n; ++h)
          if (chi[table_[g][h]] != chi[g] + chi[h]) return;
      if (std::find(found.begin(), found.end(), chi) == found.end())
        found.push_back(std::move(chi));
    };
    // Enumerate all assignments over the generators.
    while (true) {
      try_assignment();
      std::size_t i = 0;
      for (; i < gens.size(); ++i) {
        if (++assign[i] < gen_ord[i]) break;
        assign[i] = 0;
      }
      if (i == gens.size()) break;
    }
    require(static_cast<int>(found.size()) == n,
            "characters: enumeration did not find |G| characters");
    std::sort(found.begin(), found.end(),
              [](const std::vector<Phase>& a, const std::vector<Phase>& b) {
                for (std::size_t i = 0; i < a.size(); ++i) {
                  if (a[i] != b[i]) return a[i] < b[i];
                }
                return false;
              });
    return found;
  }

  bool operator==(const GroupTable& o) const {
    return table_ == o.table_;
  }

 private:
  std::vector<std::vector<int>> table_;
  std::vector<int> inverse_;
  int identity_ = 0;
};

}  // namespace symscope
