#pragma once

#include <bit>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace eftci {

/// Bipartition of an L-site chain. Bit i set means site i belongs to region A.
/// Site 0 corresponds to the first (slowest-varying, big-endian) index.
struct Partition {
  int L = 0;
  std::uint64_t bits = 0;

  static constexpr int kMaxSites = 64;

  Partition() = default;
  Partition(int sites, std::uint64_t mask) : L(sites), bits(mask & mask_all(sites)) {
    if (sites < 0 || sites > kMaxSites) throw std::invalid_argument("Partition: bad site count");
  }

  static std::uint64_t mask_all(int sites) {
    return sites >= 64 ? ~0ull : ((1ull << sites) - 1ull);
  }

  bool test(int i) const { return (bits >> i) & 1ull; }
  void set(int i, bool v) {
    if (v) bits |= (1ull << i);
    else bits &= ~(1ull << i);
  }
  int count() const { return std::popcount(bits); }
  bool empty() const { return bits == 0; }
  bool full() const { return bits == mask_all(L); }
  Partition complement() const { return Partition(L, ~bits & mask_all(L)); }

  bool operator==(const Partition& o) const { return L == o.L && bits == o.bits; }

  /// Parse "0110"-style mask strings; first character is site 0.
  static Partition from_string(const std::string& s) {
    if (s.size() > kMaxSites) throw std::invalid_argument("Partition: mask string too long");
    Partition p(static_cast<int>(s.size()), 0);
    for (size_t i = 0; i < s.size(); ++i) {
      if (s[i] == '1') p.set(static_cast<int>(i), true);
      else if (s[i] != '0') throw std::invalid_argument("Partition: mask must be 0/1 characters");
    }
    return p;
  }

  std::string to_string() const {
    std::string s(static_cast<size_t>(L), '0');
    for (int i = 0; i < L; ++i)
      if (test(i)) s[static_cast<size_t>(i)] = '1';
    return s;
  }
};

/// Domain-wall encoding of a partition: L-1 bits, bit i marks a wall between
/// sites i and i+1 after fixing the first site to region A.
struct DualIndex {
  int n = 0;  // L - 1
  std::uint64_t bits = 0;

  DualIndex() = default;
  DualIndex(int len, std::uint64_t b) : n(len), bits(b & Partition::mask_all(len)) {
    if (len < 0 || len >= Partition::kMaxSites) throw std::invalid_argument("DualIndex: bad length");
  }
  bool test(int i) const { return (bits >> i) & 1ull; }
  bool operator==(const DualIndex& o) const { return n == o.n && bits == o.bits; }
};

/// b_1 = 1, b_{i+1} = b_i XOR dual_i.
inline Partition dual_to_natural(const DualIndex& d) {
  Partition p(d.n + 1, 0);
  bool cur = true;
  p.set(0, cur);
  for (int i = 0; i < d.n; ++i) {
    cur = cur != d.test(i);
    p.set(i + 1, cur);
  }
  return p;
}

/// Canonicalizes so that the first site is in region A (complements if not),
/// then records adjacent XORs. Round trip on DualIndex is the identity.
inline DualIndex natural_to_dual(const Partition& p) {
  if (p.L < 1) throw std::invalid_argument("natural_to_dual: empty partition");
  Partition q = p.test(0) ? p : p.complement();
  DualIndex d(p.L - 1, 0);
  for (int i = 0; i + 1 < p.L; ++i)
    if (q.test(i) != q.test(i + 1)) d.bits |= (1ull << i);
  return d;
}

/// Sequential-selection decoding of a size-k subset: component j (1-based,
/// in [1, |pool|-j+1]) picks that element of the remaining pool and removes it.
/// Returns the selected labels in selection order.
inline std::vector<int> fixed_size_decode_sites(const std::vector<int>& idx,
                                                const std::vector<int>& pool) {
  std::vector<int> remaining = pool;
  std::vector<int> chosen;
  chosen.reserve(idx.size());
  for (size_t j = 0; j < idx.size(); ++j) {
    int c = idx[j];
    if (c < 1 || c > static_cast<int>(remaining.size()))
      throw std::invalid_argument("fixed_size_decode: component " + std::to_string(j + 1) +
                                  " out of range [1," + std::to_string(remaining.size()) + "]");
    chosen.push_back(remaining[static_cast<size_t>(c - 1)]);
    remaining.erase(remaining.begin() + (c - 1));
  }
  return chosen;
}

/// Same decoding, returned as a mask over an L-site system. Pool entries are
/// 0-based site labels here.
inline Partition fixed_size_decode(const std::vector<int>& idx, const std::vector<int>& pool,
                                   int L) {
  Partition p(L, 0);
  for (int site : fixed_size_decode_sites(idx, pool)) {
    if (site < 0 || site >= L) throw std::invalid_argument("fixed_size_decode: site label out of range");
    p.set(site, true);
  }
  return p;
}

}  // namespace eftci
