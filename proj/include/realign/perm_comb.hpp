#pragma once

// Symmetric-group combinatorics and exact moment oracles for realigned
// Wishart matrices.
//
// Permutations act on {0, ..., n-1} and compose right to left:
// (a * b)(x) = a(b(x)). Cycle notation usually numbers points from 1; element k here is
// point k + 1 there.
//
// The moment oracles are exhaustive sums over S_{2p} (or its fixed-point-free
// part) of monomials s^{#a} d2^{#(a g^-1)} d1^{#(a d^-1)}. Enumeration records
// how many permutations produce each exponent triple; evaluation at concrete
// (d1, d2, s) is then exact big-integer / rational arithmetic.

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstddef>
#include <map>
#include <numeric>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "realign/errors.hpp"
#include "realign/parallel.hpp"

namespace realign {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

/// Decimal "num/den" (or just "num" when integral).
inline std::string to_decimal_string(const Rational& q) {
  const BigInt num = boost::multiprecision::numerator(q);
  const BigInt den = boost::multiprecision::denominator(q);
  return den == 1 ? num.str() : num.str() + "/" + den.str();
}

inline std::string to_decimal_string(const BigInt& z) { return z.str(); }

class Permutation {
 public:
  using value_type = std::uint32_t;

  Permutation() = default;

  explicit Permutation(std::vector<value_type> images) : images_(std::move(images)) {
    std::vector<bool> seen(images_.size(), false);
    for (value_type v : images_) {
      if (v >= images_.size() || seen[v]) throw domain_error("Permutation: images are not a bijection");
      seen[v] = true;
    }
  }

  static Permutation identity(std::size_t n) {
    std::vector<value_type> img(n);
    std::iota(img.begin(), img.end(), value_type{0});
    return Permutation(std::move(img));
  }

  /// Builds a permutation from disjoint cycles (zero-based points).
  static Permutation from_cycles(std::size_t n, const std::vector<std::vector<value_type>>& cycles) {
    std::vector<value_type> img(n);
    std::iota(img.begin(), img.end(), value_type{0});
    std::vector<bool> used(n, false);
    for (const auto& cyc : cycles) {
      for (std::size_t k = 0; k < cyc.size(); ++k) {
        const value_type from = cyc[k];
        if (from >= n || used[from]) throw domain_error("Permutation::from_cycles: cycles overlap or exceed n");
        used[from] = true;
        img[from] = cyc[(k + 1) % cyc.size()];
      }
    }
    return Permutation(std::move(img));
  }

  /// The full cycle (0 1 ... n-1).
  static Permutation full_cycle(std::size_t n) {
    std::vector<value_type> img(n);
    for (std::size_t i = 0; i < n; ++i) img[i] = static_cast<value_type>((i + 1) % n);
    return Permutation(std::move(img));
  }

  std::size_t size() const { return images_.size(); }
  value_type operator[](std::size_t i) const { return images_[i]; }
  const std::vector<value_type>& images() const { return images_; }

  Permutation inverse() const {
    std::vector<value_type> inv(images_.size());
    for (std::size_t i = 0; i < images_.size(); ++i) inv[images_[i]] = static_cast<value_type>(i);
    return Permutation(std::move(inv));
  }

  friend Permutation operator*(const Permutation& a, const Permutation& b) {
    if (a.size() != b.size()) throw domain_error("Permutation: composing different degrees");
    std::vector<value_type> img(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) img[i] = a[b[i]];
    return Permutation(std::move(img));
  }

  /// a (+) b acting on [0, n_a) and n_a + [0, n_b).
  static Permutation direct_sum(const Permutation& a, const Permutation& b) {
    std::vector<value_type> img(a.images_);
    const auto offset = static_cast<value_type>(a.size());
    for (value_type v : b.images_) img.push_back(v + offset);
    return Permutation(std::move(img));
  }

  std::vector<std::vector<value_type>> cycles() const {
    std::vector<std::vector<value_type>> out;
    std::vector<bool> seen(images_.size(), false);
    for (std::size_t start = 0; start < images_.size(); ++start) {
      if (seen[start]) continue;
      std::vector<value_type> cyc;
      for (auto x = static_cast<value_type>(start); !seen[x]; x = images_[x]) {
        seen[x] = true;
        cyc.push_back(x);
      }
      out.push_back(std::move(cyc));
    }
    return out;
  }

  std::size_t fixed_points() const {
    std::size_t k = 0;
    for (std::size_t i = 0; i < images_.size(); ++i) k += images_[i] == i ? 1 : 0;
    return k;
  }

  bool is_involution() const {
    for (std::size_t i = 0; i < images_.size(); ++i) {
      if (images_[images_[i]] != i) return false;
    }
    return true;
  }

  friend bool operator==(const Permutation&, const Permutation&) = default;
  friend auto operator<=>(const Permutation&, const Permutation&) = default;

 private:
  std::vector<value_type> images_;
};

/// Cycle notation with one-based points, e.g. "(1 4)(2 3)"; fixed points are
/// omitted and the identity prints as "()".
inline std::ostream& operator<<(std::ostream& os, const Permutation& sigma) {
  bool any = false;
  for (const auto& cyc : sigma.cycles()) {
    if (cyc.size() < 2) continue;
    any = true;
    os << '(';
    for (std::size_t k = 0; k < cyc.size(); ++k) os << (k ? " " : "") << cyc[k] + 1;
    os << ')';
  }
  if (!any) os << "()";
  return os;
}

namespace detail {

template <class Images>
inline unsigned count_cycles(const Images& img, std::size_t n) {
  std::uint64_t seen = 0;
  unsigned cycles = 0;
  for (std::size_t start = 0; start < n; ++start) {
    if (seen >> start & 1U) continue;
    ++cycles;
    for (std::size_t x = start; !(seen >> x & 1U); x = img[x]) seen |= std::uint64_t{1} << x;
  }
  return cycles;
}

}  // namespace detail

/// #sigma, fixed points included.
inline std::size_t cycle_count(const Permutation& sigma) {
  if (sigma.size() <= 64) return detail::count_cycles(sigma.images(), sigma.size());
  return sigma.cycles().size();
}

/// |sigma|: minimal number of transpositions, n - #sigma.
inline std::size_t length(const Permutation& sigma) { return sigma.size() - cycle_count(sigma); }

/// True iff |sigma| + |sigma^{-1} xi| = n - 1 for the full cycle xi.
inline bool is_geodesic(const Permutation& sigma) {
  const std::size_t n = sigma.size();
  if (n == 0) return true;
  return length(sigma) + length(sigma.inverse() * Permutation::full_cycle(n)) == n - 1;
}

inline BigInt binomial(unsigned n, unsigned k) {
  if (k > n) return 0;
  BigInt r = 1;
  for (unsigned j = 1; j <= k; ++j) {
    r *= n - k + j;
    r /= j;
  }
  return r;
}

/// Cat_p = binom(2p, p) / (p + 1), exact.
inline BigInt catalan(unsigned p) { return binomial(2 * p, p) / (p + 1); }

/// Partition of {0, ..., p-1}; blocks are sorted and ordered by smallest element.
class SetPartition {
 public:
  using Block = std::vector<std::size_t>;

  SetPartition() = default;

  explicit SetPartition(std::vector<Block> blocks) : blocks_(std::move(blocks)) {
    std::size_t total = 0;
    for (auto& b : blocks_) {
      if (b.empty()) throw domain_error("SetPartition: empty block");
      std::sort(b.begin(), b.end());
      total += b.size();
    }
    std::sort(blocks_.begin(), blocks_.end());
    std::vector<bool> seen(total, false);
    for (const auto& b : blocks_) {
      for (std::size_t x : b) {
        if (x >= total || seen[x]) throw domain_error("SetPartition: blocks do not partition [p]");
        seen[x] = true;
      }
    }
    size_ = total;
  }

  /// From a block label per element (labels arbitrary).
  static SetPartition from_labels(std::span<const std::size_t> labels) {
    std::map<std::size_t, Block> by_label;
    for (std::size_t i = 0; i < labels.size(); ++i) by_label[labels[i]].push_back(i);
    std::vector<Block> blocks;
    for (auto& [_, b] : by_label) blocks.push_back(std::move(b));
    return SetPartition(std::move(blocks));
  }

  std::size_t size() const { return size_; }
  const std::vector<Block>& blocks() const { return blocks_; }

  std::vector<std::size_t> labels() const {
    std::vector<std::size_t> lab(size_);
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
      for (std::size_t x : blocks_[b]) lab[x] = b;
    }
    return lab;
  }

  /// No a < b < c < d with a, c in one block and b, d in another.
  bool is_noncrossing() const {
    const auto lab = labels();
    const std::size_t n = size_;
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = a + 1; b < n; ++b) {
        if (lab[b] == lab[a]) continue;
        for (std::size_t c = b + 1; c < n; ++c) {
          if (lab[c] != lab[a]) continue;
          for (std::size_t d = c + 1; d < n; ++d) {
            if (lab[d] == lab[b]) return false;
          }
        }
      }
    }
    return true;
  }

  /// The geodesic permutation: each block i1 < ... < ik becomes the cycle
  /// (i1 i2 ... ik).
  Permutation to_permutation() const {
    std::vector<std::vector<Permutation::value_type>> cycles;
    for (const auto& b : blocks_) cycles.emplace_back(b.begin(), b.end());
    return Permutation::from_cycles(size_, cycles);
  }

  friend bool operator==(const SetPartition&, const SetPartition&) = default;
  friend auto operator<=>(const SetPartition& a, const SetPartition& b) { return a.blocks_ <=> b.blocks_; }

 private:
  std::vector<Block> blocks_;
  std::size_t size_ = 0;
};

inline constexpr unsigned noncrossing_max = 12;

namespace detail {

// Non-crossing partitions of the interval [lo, hi). The block of lo has some
// largest element m; elements after m are partitioned independently, and the
// partitions of [lo, m] with lo ~ m correspond to partitions of (lo, m] with
// lo appended to m's block.
inline std::vector<std::vector<SetPartition::Block>> noncrossing_interval(std::size_t lo, std::size_t hi) {
  if (lo == hi) return {{}};
  std::vector<std::vector<SetPartition::Block>> out;
  for (std::size_t m = lo; m < hi; ++m) {
    std::vector<std::vector<SetPartition::Block>> heads;
    if (m == lo) {
      heads.push_back({{lo}});
    } else {
      for (auto inner : noncrossing_interval(lo + 1, m + 1)) {
        for (auto& b : inner) {
          if (b.back() == m) b.insert(b.begin(), lo);
        }
        heads.push_back(std::move(inner));
      }
    }
    const auto tails = noncrossing_interval(m + 1, hi);
    for (const auto& head : heads) {
      for (const auto& tail : tails) {
        auto blocks = head;
        blocks.insert(blocks.end(), tail.begin(), tail.end());
        out.push_back(std::move(blocks));
      }
    }
  }
  return out;
}

}  // namespace detail

/// All non-crossing partitions of {0, ..., p-1}, sorted.
inline std::vector<SetPartition> enumerate_noncrossing(unsigned p) {
  if (p == 0) throw domain_error("enumerate_noncrossing: p must be positive");
  if (p > noncrossing_max) throw capacity_error("enumerate_noncrossing: p > " + std::to_string(noncrossing_max));
  std::vector<SetPartition> out;
  for (auto& blocks : detail::noncrossing_interval(0, p)) out.emplace_back(std::move(blocks));
  std::sort(out.begin(), out.end());
  return out;
}

/// The fat pairing of a non-crossing partition of [p], as an involution on
/// [2p]. Point i of [p] splits into 2i and 2i+1; a block i1 < ... < ik
/// contributes pairs {2 i1, 2 ik + 1} and {2 ij + 1, 2 i(j+1)}.
inline Permutation fat(const SetPartition& pi) {
  if (!pi.is_noncrossing()) throw domain_error("fat: partition is crossing");
  const std::size_t n = 2 * pi.size();
  std::vector<Permutation::value_type> img(n);
  auto pair = [&](std::size_t a, std::size_t b) {
    img[a] = static_cast<Permutation::value_type>(b);
    img[b] = static_cast<Permutation::value_type>(a);
  };
  for (const auto& b : pi.blocks()) {
    pair(2 * b.front(), 2 * b.back() + 1);
    for (std::size_t j = 0; j + 1 < b.size(); ++j) pair(2 * b[j] + 1, 2 * b[j + 1]);
  }
  return Permutation(std::move(img));
}

/// Inverse of fat: merges 2i and 2i+1 into i and takes connected components.
inline SetPartition collapse(const Permutation& pairing) {
  if (pairing.size() % 2 != 0) throw domain_error("collapse: pairing must act on an even set");
  const std::size_t p = pairing.size() / 2;
  std::vector<std::size_t> parent(p);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (std::size_t a = 0; a < pairing.size(); ++a) {
    const std::size_t u = find(a / 2);
    const std::size_t v = find(pairing[a] / 2);
    if (u != v) parent[std::max(u, v)] = std::min(u, v);
  }
  std::vector<std::size_t> labels(p);
  for (std::size_t i = 0; i < p; ++i) labels[i] = find(i);
  return SetPartition::from_labels(labels);
}

/// gamma = (1 2)(3 4)...(2p-1 2p) in one-based notation.
inline Permutation gamma_perm(unsigned p) {
  if (p == 0) throw domain_error("gamma_perm: p must be positive");
  std::vector<std::vector<Permutation::value_type>> cycles;
  for (Permutation::value_type i = 0; i < p; ++i) cycles.push_back({2 * i, 2 * i + 1});
  return Permutation::from_cycles(2 * p, cycles);
}

/// delta = (1 2p)(2 3)(4 5)...(2p-2 2p-1) in one-based notation.
inline Permutation delta_perm(unsigned p) {
  if (p == 0) throw domain_error("delta_perm: p must be positive");
  std::vector<std::vector<Permutation::value_type>> cycles;
  cycles.push_back({0, 2 * p - 1});
  for (Permutation::value_type i = 1; i + 1 < 2 * p; i += 2) cycles.push_back({i, i + 1});
  return Permutation::from_cycles(2 * p, cycles);
}

/// Two independent copies for the second moment, on [4p].
inline Permutation gamma12_perm(unsigned p) { return Permutation::direct_sum(gamma_perm(p), gamma_perm(p)); }
inline Permutation delta12_perm(unsigned p) { return Permutation::direct_sum(delta_perm(p), delta_perm(p)); }

/// Calls fn(images) for every permutation of [n] in lexicographic order of
/// one-line notation, restricted to alpha(0) == first when first < n. With
/// fixed_point_free, branches that would fix a point are pruned.
template <class Fn>
void for_each_permutation(std::size_t n, bool fixed_point_free, Fn&& fn, std::size_t first = SIZE_MAX) {
  if (n > 20) throw capacity_error("for_each_permutation: n > 20");
  std::array<std::uint8_t, 20> img{};
  std::uint32_t used = 0;
  auto rec = [&](auto&& self, std::size_t pos) -> void {
    if (pos == n) {
      fn(std::span<const std::uint8_t>(img.data(), n));
      return;
    }
    for (std::size_t v = 0; v < n; ++v) {
      if (used >> v & 1U) continue;
      if (fixed_point_free && v == pos) continue;
      if (pos == 0 && first < n && v != first) continue;
      img[pos] = static_cast<std::uint8_t>(v);
      used |= 1U << v;
      self(self, pos + 1);
      used &= ~(1U << v);
    }
  };
  if (n == 0) {
    if (first >= n) fn(std::span<const std::uint8_t>(img.data(), 0));
    return;
  }
  rec(rec, 0);
}

/// Exponent triple of one term: (#alpha, #(alpha gamma^-1), #(alpha delta^-1)).
struct LoopCounts {
  unsigned ancilla = 0;
  unsigned gamma_loops = 0;
  unsigned delta_loops = 0;

  friend auto operator<=>(const LoopCounts&, const LoopCounts&) = default;
};

/// Multiplicities of each exponent triple over an exhaustive permutation sum.
struct PermutationSum {
  std::size_t degree = 0;
  bool fixed_point_free = false;
  std::map<LoopCounts, std::uint64_t> counts;

  std::uint64_t total() const {
    std::uint64_t t = 0;
    for (const auto& [_, c] : counts) t += c;
    return t;
  }

  /// sum count * s^ancilla * d_gamma^gamma_loops * d_delta^delta_loops
  BigInt evaluate(const BigInt& s, const BigInt& d_gamma, const BigInt& d_delta) const {
    BigInt acc = 0;
    for (const auto& [e, c] : counts) {
      acc += BigInt(c) * boost::multiprecision::pow(s, e.ancilla) * boost::multiprecision::pow(d_gamma, e.gamma_loops) *
             boost::multiprecision::pow(d_delta, e.delta_loops);
    }
    return acc;
  }
};

/// Enumerates S_n (n = gamma.size()) and tallies loop counts. Work is split
/// across workers by the image of 0; tallies are merged exactly.
inline PermutationSum permutation_sum(const Permutation& gamma, const Permutation& delta, bool fixed_point_free,
                                      std::size_t workers = worker_count()) {
  const std::size_t n = gamma.size();
  if (delta.size() != n) throw domain_error("permutation_sum: gamma and delta differ in degree");
  if (n == 0 || n > 16) throw capacity_error("permutation_sum: degree must be in [1, 16]");
  const auto gamma_inv = gamma.inverse();
  const auto delta_inv = delta.inverse();
  const std::size_t stride = n + 1;
  std::vector<std::vector<std::uint64_t>> partial(n, std::vector<std::uint64_t>(stride * stride * stride, 0));
  parallel_for(
      n,
      [&](std::size_t first) {
        if (fixed_point_free && first == 0) return;
        auto& tally = partial[first];
        std::array<std::uint8_t, 20> ag{};
        std::array<std::uint8_t, 20> ad{};
        for_each_permutation(
            n, fixed_point_free,
            [&](std::span<const std::uint8_t> a) {
              for (std::size_t x = 0; x < n; ++x) {
                ag[x] = a[gamma_inv[x]];
                ad[x] = a[delta_inv[x]];
              }
              const unsigned c0 = detail::count_cycles(a, n);
              const unsigned c1 = detail::count_cycles(ag, n);
              const unsigned c2 = detail::count_cycles(ad, n);
              ++tally[(c0 * stride + c1) * stride + c2];
            },
            first);
      },
      workers);
  PermutationSum out{n, fixed_point_free, {}};
  for (std::size_t c0 = 0; c0 <= n; ++c0) {
    for (std::size_t c1 = 0; c1 <= n; ++c1) {
      for (std::size_t c2 = 0; c2 <= n; ++c2) {
        std::uint64_t c = 0;
        for (const auto& t : partial) c += t[(c0 * stride + c1) * stride + c2];
        if (c != 0) {
          out.counts[{static_cast<unsigned>(c0), static_cast<unsigned>(c1), static_cast<unsigned>(c2)}] = c;
        }
      }
    }
  }
  return out;
}

inline constexpr unsigned moment_p_max = 5;         // (2p)! = 3,628,800 at p = 5
inline constexpr unsigned second_moment_p_max = 2;  // (4p)! = 40,320 at p = 2
inline constexpr unsigned second_moment_p_extended = 3;

namespace detail {

inline void require_moment_p(unsigned p, unsigned max, const char* who) {
  if (p == 0) throw domain_error(std::string(who) + ": p must be positive");
  if (p > max) throw capacity_error(std::string(who) + ": p > " + std::to_string(max));
}

inline void require_positive(std::uint64_t v, const char* who) {
  if (v == 0) throw domain_error(std::string(who) + ": dimensions must be positive");
}

}  // namespace detail

/// Tally behind E Tr[(R R^*)^p] (all of S_{2p}).
inline PermutationSum rr_moment_terms(unsigned p) {
  detail::require_moment_p(p, moment_p_max, "rr_moment_terms");
  return permutation_sum(gamma_perm(p), delta_perm(p), false);
}

/// Tally behind E Tr[(Q Q^*)^p] (fixed-point-free part of S_{2p}).
inline PermutationSum qq_moment_terms(unsigned p) {
  detail::require_moment_p(p, moment_p_max, "qq_moment_terms");
  return permutation_sum(gamma_perm(p), delta_perm(p), true);
}

/// Tally behind E Tr^2[(Q Q^*)^p] (fixed-point-free part of S_{4p}).
/// p = 3 walks 12! permutations and must be requested explicitly.
inline PermutationSum qq_second_moment_terms(unsigned p, bool allow_extended = false) {
  detail::require_moment_p(p, allow_extended ? second_moment_p_extended : second_moment_p_max,
                           "qq_second_moment_terms");
  return permutation_sum(gamma12_perm(p), delta12_perm(p), true);
}

/// E Tr[(R R^*)^p] = sum over S_{2p} of s^{#a} d2^{#(a g^-1)} d1^{#(a d^-1)}.
inline BigInt exact_moment_rr(const PermutationSum& terms, std::uint64_t d1, std::uint64_t d2, std::uint64_t s) {
  detail::require_positive(d1, "exact_moment_rr");
  detail::require_positive(d2, "exact_moment_rr");
  detail::require_positive(s, "exact_moment_rr");
  return terms.evaluate(BigInt(s), BigInt(d2), BigInt(d1));
}

inline BigInt exact_moment_rr(unsigned p, std::uint64_t d1, std::uint64_t d2, std::uint64_t s) {
  return exact_moment_rr(rr_moment_terms(p), d1, d2, s);
}

namespace detail {

// Balanced evaluation with normalization d^{-2k} s^{-k}, k = degree / 2.
inline Rational evaluate_balanced(const PermutationSum& terms, std::uint64_t d, std::uint64_t s) {
  require_positive(d, "exact moment");
  require_positive(s, "exact moment");
  const auto half = static_cast<unsigned>(terms.degree / 2);
  const BigInt num = terms.evaluate(BigInt(s), BigInt(d), BigInt(d));
  const BigInt den = boost::multiprecision::pow(BigInt(d), 2 * half) * boost::multiprecision::pow(BigInt(s), half);
  return Rational(num, den);
}

}  // namespace detail

/// E Tr[(Q Q^*)^p], Q = (W^R - d s E) / (d sqrt(s)).
inline Rational exact_moment_qq(const PermutationSum& terms, std::uint64_t d, std::uint64_t s) {
  return detail::evaluate_balanced(terms, d, s);
}

inline Rational exact_moment_qq(unsigned p, std::uint64_t d, std::uint64_t s) {
  return exact_moment_qq(qq_moment_terms(p), d, s);
}

/// E Tr^2[(Q Q^*)^p].
inline Rational exact_second_moment_qq(const PermutationSum& terms, std::uint64_t d, std::uint64_t s) {
  return detail::evaluate_balanced(terms, d, s);
}

inline Rational exact_second_moment_qq(unsigned p, std::uint64_t d, std::uint64_t s, bool allow_extended = false) {
  return exact_second_moment_qq(qq_second_moment_terms(p, allow_extended), d, s);
}

/// Var Tr[(Q Q^*)^p] = E Tr^2 - (E Tr)^2.
inline Rational exact_variance_qq(unsigned p, std::uint64_t d, std::uint64_t s, bool allow_extended = false) {
  const Rational first = exact_moment_qq(p, d, s);
  return exact_second_moment_qq(p, d, s, allow_extended) - first * first;
}

/// Leading d2 -> infinity behaviour of E Tr[(R R^*)^p]: the alpha = gamma
/// term contributes s^p d1^2 d2^{2p}. Returns s^p d1^2.
inline BigInt dominant_term_unbalanced(unsigned p, std::uint64_t d1, std::uint64_t s) {
  if (p == 0) throw domain_error("dominant_term_unbalanced: p must be positive");
  detail::require_positive(d1, "dominant_term_unbalanced");
  detail::require_positive(s, "dominant_term_unbalanced");
  return boost::multiprecision::pow(BigInt(s), p) * BigInt(d1) * BigInt(d1);
}

/// Coefficient of d2^power in E Tr[(R R^*)^p] viewed as a polynomial in d2.
inline BigInt rr_coefficient_in_d2(const PermutationSum& terms, unsigned power, std::uint64_t d1, std::uint64_t s) {
  BigInt acc = 0;
  for (const auto& [e, c] : terms.counts) {
    if (e.gamma_loops != power) continue;
    acc += BigInt(c) * boost::multiprecision::pow(BigInt(s), e.ancilla) * boost::multiprecision::pow(BigInt(d1), e.delta_loops);
  }
  return acc;
}

inline constexpr unsigned signed_sum_p_max = 3;

/// The un-cancelled expansion of E Tr[(Q Q^*)^p]: sum over (f1, f2) in
/// {0,1}^p x {0,1}^p of (-1)^{|f1|+|f2|} times the sum over alpha in S_{2p}
/// fixing 2i wherever f1(i) = 1 and 2i+1 wherever f2(i) = 1 (zero-based),
/// normalized by d^{-2p} s^{-p}. Cost (2p)! 4^p.
inline Rational signed_sum_value(unsigned p, std::uint64_t d, std::uint64_t s) {
  detail::require_moment_p(p, signed_sum_p_max, "signed_sum_value");
  detail::require_positive(d, "signed_sum_value");
  detail::require_positive(s, "signed_sum_value");
  const std::size_t n = 2 * p;
  const auto gamma_inv = gamma_perm(p).inverse();
  const auto delta_inv = delta_perm(p).inverse();
  const BigInt bd(d);
  const BigInt bs(s);
  BigInt acc = 0;
  for (std::uint32_t f1 = 0; f1 < (1U << p); ++f1) {
    for (std::uint32_t f2 = 0; f2 < (1U << p); ++f2) {
      const int sign = (std::popcount(f1) + std::popcount(f2)) % 2 == 0 ? 1 : -1;
      BigInt inner = 0;
      for_each_permutation(n, false, [&](std::span<const std::uint8_t> a) {
        for (unsigned i = 0; i < p; ++i) {
          if ((f1 >> i & 1U) && a[2 * i] != 2 * i) return;
          if ((f2 >> i & 1U) && a[2 * i + 1] != 2 * i + 1) return;
        }
        std::array<std::uint8_t, 20> ag{};
        std::array<std::uint8_t, 20> ad{};
        for (std::size_t x = 0; x < n; ++x) {
          ag[x] = a[gamma_inv[x]];
          ad[x] = a[delta_inv[x]];
        }
        inner += boost::multiprecision::pow(bs, detail::count_cycles(a, n)) *
                 boost::multiprecision::pow(bd, detail::count_cycles(ag, n) + detail::count_cycles(ad, n));
      });
      acc += sign > 0 ? inner : BigInt(-inner);
    }
  }
  const BigInt den = boost::multiprecision::pow(bd, 2 * p) * boost::multiprecision::pow(bs, p);
  return Rational(acc, den);
}

/// True iff the signed expansion equals the fixed-point-free sum exactly.
inline bool signed_sum_check(unsigned p, std::uint64_t d, std::uint64_t s) {
  return signed_sum_value(p, d, s) == exact_moment_qq(p, d, s);
}

/// Fixed-point-free alpha in S_{2p} with #alpha = p and
/// #(alpha gamma^-1) + #(alpha delta^-1) = 2p + 2, i.e. the terms of order
/// d^2 s^0 in E Tr[(Q Q^*)^p]. Sorted.
inline std::vector<Permutation> saturating_permutations(unsigned p) {
  detail::require_moment_p(p, moment_p_max, "saturating_permutations");
  const std::size_t n = 2 * p;
  const auto gamma_inv = gamma_perm(p).inverse();
  const auto delta_inv = delta_perm(p).inverse();
  std::vector<Permutation> out;
  for_each_permutation(n, true, [&](std::span<const std::uint8_t> a) {
    if (detail::count_cycles(a, n) != p) return;
    std::array<std::uint8_t, 20> ag{};
    std::array<std::uint8_t, 20> ad{};
    for (std::size_t x = 0; x < n; ++x) {
      ag[x] = a[gamma_inv[x]];
      ad[x] = a[delta_inv[x]];
    }
    if (detail::count_cycles(ag, n) + detail::count_cycles(ad, n) != 2 * p + 2) return;
    out.emplace_back(std::vector<Permutation::value_type>(a.begin(), a.end()));
  });
  return out;
}

}  // namespace realign
