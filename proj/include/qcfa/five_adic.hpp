#pragma once

// Exact amplitude vectors whose entries are integers over 5^scale (optionally
// also over sqrt(2)^root2, which is what a Hadamard coin introduces).

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "qcfa/numerics.hpp"

namespace qcfa {

/// Dense square integer matrix, row major.
struct IntegerMatrix {
  std::size_t n = 0;
  std::vector<BigInt> a;

  IntegerMatrix() = default;
  IntegerMatrix(std::initializer_list<std::initializer_list<long>> rows) : n(rows.size()) {
    for (const auto& row : rows) {
      if (row.size() != n) throw Error("IntegerMatrix must be square");
      for (long x : row) a.emplace_back(x);
    }
  }
  IntegerMatrix(std::size_t dim, std::vector<BigInt> entries) : n(dim), a(std::move(entries)) {
    if (a.size() != n * n) throw Error("IntegerMatrix entry count does not match dimension");
  }

  const BigInt& operator()(std::size_t i, std::size_t j) const { return a[i * n + j]; }
  BigInt& operator()(std::size_t i, std::size_t j) { return a[i * n + j]; }

  IntegerMatrix transposed() const {
    IntegerMatrix t = *this;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) t(i, j) = (*this)(j, i);
    return t;
  }
  friend IntegerMatrix operator*(const IntegerMatrix& x, const IntegerMatrix& y) {
    if (x.n != y.n) throw Error("IntegerMatrix dimension mismatch");
    IntegerMatrix out(x.n, std::vector<BigInt>(x.n * x.n, 0));
    for (std::size_t i = 0; i < x.n; ++i)
      for (std::size_t k = 0; k < x.n; ++k)
        for (std::size_t j = 0; j < x.n; ++j) out(i, j) += x(i, k) * y(k, j);
    return out;
  }
  bool operator==(const IntegerMatrix& o) const { return n == o.n && a == o.a; }
};

enum class Generator { A, B, A_inverse, B_inverse };

inline const char* to_string(Generator g) {
  switch (g) {
    case Generator::A: return "A";
    case Generator::B: return "B";
    case Generator::A_inverse: return "A^-1";
    case Generator::B_inverse: return "B^-1";
  }
  return "?";
}

/// The integer generators: A and B, and 25*A^-1 = A^T, 25*B^-1 = B^T.
/// Each acts with an implicit factor 1/5, which makes it orthogonal.
inline const IntegerMatrix& generator_matrix(Generator g) {
  static const IntegerMatrix A{{4, 3, 0}, {-3, 4, 0}, {0, 0, 5}};
  static const IntegerMatrix B{{4, 0, 3}, {0, 5, 0}, {-3, 0, 4}};
  static const IntegerMatrix At = A.transposed();
  static const IntegerMatrix Bt = B.transposed();
  switch (g) {
    case Generator::A: return A;
    case Generator::B: return B;
    case Generator::A_inverse: return At;
    case Generator::B_inverse: return Bt;
  }
  return A;
}

inline std::optional<Generator> identify_generator(const IntegerMatrix& m) {
  for (Generator g : {Generator::A, Generator::B, Generator::A_inverse, Generator::B_inverse})
    if (generator_matrix(g) == m) return g;
  return std::nullopt;
}

/// Value = entries / (5^scale * sqrt(2)^root2).
///
/// Canonical: all-zero vectors have scale = root2 = 0; otherwise the entries
/// share no factor 5 when scale > 0 and no factor 2 when root2 >= 2.
class FiveAdicVector {
 public:
  FiveAdicVector() = default;
  explicit FiveAdicVector(std::vector<BigInt> entries, unsigned scale = 0, unsigned root2 = 0)
      : entries_(std::move(entries)), scale_(scale), root2_(root2) {
    canonicalize();
  }

  static FiveAdicVector unit(std::size_t dim, std::size_t index) {
    std::vector<BigInt> e(dim, 0);
    e.at(index) = 1;
    return FiveAdicVector(std::move(e));
  }

  const std::vector<BigInt>& entries() const noexcept { return entries_; }
  unsigned scale() const noexcept { return scale_; }
  unsigned root2() const noexcept { return root2_; }
  std::size_t dim() const noexcept { return entries_.size(); }

  /// 5^(2*scale) * 2^root2, the common denominator of every squared entry.
  BigInt squared_denominator() const { return pow_ui(25, scale_) * pow_ui(2, root2_); }

  Rational component_square(std::size_t i) const {
    return make_rational(entries_.at(i) * entries_.at(i), squared_denominator());
  }
  Rational squared_norm() const {
    BigInt s = 0;
    for (const auto& x : entries_) s += x * x;
    return make_rational(s, squared_denominator());
  }

  bool is_zero() const {
    for (const auto& x : entries_)
      if (x != 0) return false;
    return true;
  }
  /// Index of the single non-zero entry, if there is exactly one.
  std::optional<std::size_t> basis_index() const {
    std::optional<std::size_t> found;
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      if (entries_[i] == 0) continue;
      if (found) return std::nullopt;
      found = i;
    }
    return found;
  }

  /// (1/denominator) * m * this, where denominator must be a power of 5.
  FiveAdicVector apply(const IntegerMatrix& m, const BigInt& denominator) const {
    if (m.n != dim()) throw Error("matrix dimension does not match amplitude vector");
    unsigned extra = 0;
    BigInt d = denominator;
    while (d % 5 == 0) {
      d /= 5;
      ++extra;
    }
    if (d != 1) throw Error("5-adic amplitudes only admit power-of-5 denominators");
    std::vector<BigInt> out(dim(), 0);
    for (std::size_t i = 0; i < dim(); ++i)
      for (std::size_t j = 0; j < dim(); ++j) out[i] += m(i, j) * entries_[j];
    return FiveAdicVector(std::move(out), scale_ + extra, root2_);
  }

  /// Hadamard on coordinates (i, j). Exact only when every other coordinate is zero.
  std::optional<FiveAdicVector> hadamard(std::size_t i, std::size_t j) const {
    for (std::size_t k = 0; k < dim(); ++k)
      if (k != i && k != j && entries_[k] != 0) return std::nullopt;
    std::vector<BigInt> out = entries_;
    out[i] = entries_[i] + entries_[j];
    out[j] = entries_[i] - entries_[j];
    return FiveAdicVector(std::move(out), scale_, root2_ + 1);
  }

  FiveAdicVector swapped(std::size_t i, std::size_t j) const {
    std::vector<BigInt> out = entries_;
    std::swap(out.at(i), out.at(j));
    return FiveAdicVector(std::move(out), scale_, root2_);
  }

  /// Keeps only `keep` coordinates and renormalises, when the result is still 5-adic.
  std::optional<FiveAdicVector> collapsed(const std::vector<bool>& keep) const {
    std::vector<BigInt> out = entries_;
    bool dropped_any = false;
    for (std::size_t k = 0; k < dim(); ++k) {
      if (!keep[k] && out[k] != 0) {
        out[k] = 0;
        dropped_any = true;
      }
    }
    if (!dropped_any) return *this;
    FiveAdicVector projected(std::move(out));
    if (auto b = projected.basis_index()) return unit(dim(), *b);
    return std::nullopt;
  }

  /// Equality of the represented real vectors.
  bool operator==(const FiveAdicVector& o) const {
    return scale_ == o.scale_ && root2_ == o.root2_ && entries_ == o.entries_;
  }
  /// Equality up to a global sign (same physical state).
  bool same_ray(const FiveAdicVector& o) const {
    if (*this == o) return true;
    if (scale_ != o.scale_ || root2_ != o.root2_ || dim() != o.dim()) return false;
    for (std::size_t k = 0; k < dim(); ++k)
      if (entries_[k] != -o.entries_[k]) return false;
    return true;
  }
  /// Representative with a positive first non-zero entry.
  FiveAdicVector sign_normalized() const {
    for (const auto& x : entries_) {
      if (x == 0) continue;
      if (x > 0) return *this;
      FiveAdicVector neg = *this;
      for (auto& y : neg.entries_) y = -y;
      return neg;
    }
    return *this;
  }

  std::string to_string() const {
    std::string s = "(";
    for (std::size_t k = 0; k < dim(); ++k) s += (k ? "," : "") + entries_[k].get_str();
    s += ")/5^" + std::to_string(scale_);
    if (root2_) s += "/sqrt2^" + std::to_string(root2_);
    return s;
  }

 private:
  void canonicalize() {
    if (is_zero()) {
      scale_ = 0;
      root2_ = 0;
      return;
    }
    auto all_divisible = [&](unsigned long p) {
      for (const auto& x : entries_)
        if (mpz_divisible_ui_p(x.get_mpz_t(), p) == 0) return false;
      return true;
    };
    while (scale_ > 0 && all_divisible(5)) {
      for (auto& x : entries_) mpz_divexact_ui(x.get_mpz_t(), x.get_mpz_t(), 5);
      --scale_;
    }
    while (root2_ >= 2 && all_divisible(2)) {
      for (auto& x : entries_) mpz_divexact_ui(x.get_mpz_t(), x.get_mpz_t(), 2);
      root2_ -= 2;
    }
  }

  std::vector<BigInt> entries_;
  unsigned scale_ = 0;
  unsigned root2_ = 0;
};

/// Applies one of the four generators with its implicit 1/5 factor.
inline FiveAdicVector five_adic_apply(Generator g, const FiveAdicVector& v) {
  return v.apply(generator_matrix(g), 5);
}

/// Matrix form; anything other than A, B, 25*A^-1, 25*B^-1 is rejected.
inline FiveAdicVector five_adic_apply(const IntegerMatrix& m, const FiveAdicVector& v) {
  auto g = identify_generator(m);
  if (!g) throw Error("matrix is not one of the generators A, B, 25*A^-1, 25*B^-1");
  return five_adic_apply(*g, v);
}

}  // namespace qcfa
