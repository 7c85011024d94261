#pragma once

// Pure quantum states of a 2QCFA register, in one of three exact or certified forms.

#include <atomic>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "qcfa/five_adic.hpp"
#include "qcfa/numerics.hpp"
#include "qcfa/rotation.hpp"

namespace qcfa {

/// Real amplitudes known through enclosures. Never merged with other states,
/// so each instance carries a unique id.
struct IntervalVector {
  std::vector<Enclosure> amplitudes;
  std::uint64_t id = 0;

  static std::uint64_t fresh_id() {
    static std::atomic<std::uint64_t> counter{1};
    return counter.fetch_add(1, std::memory_order_relaxed);
  }
  static IntervalVector make(std::vector<Enclosure> amplitudes) {
    return IntervalVector{std::move(amplitudes), fresh_id()};
  }
  static IntervalVector unit(std::size_t dim, std::size_t index) {
    std::vector<Enclosure> a(dim, Enclosure(0L));
    a.at(index) = Enclosure(1L);
    return make(std::move(a));
  }
};

/// Which representation a block of the register uses.
enum class BlockKind { rotation, five_adic, dense };

inline const char* to_string(BlockKind k) {
  switch (k) {
    case BlockKind::rotation: return "rotation";
    case BlockKind::five_adic: return "five_adic";
    case BlockKind::dense: return "dense";
  }
  return "?";
}

inline BlockKind parse_block_kind(const std::string& s) {
  if (s == "rotation") return BlockKind::rotation;
  if (s == "five_adic") return BlockKind::five_adic;
  if (s == "dense") return BlockKind::dense;
  throw UsageError("unknown quantum block kind '" + s + "'");
}

/// The register Q is the concatenation of blocks. A state always lives inside one block;
/// operators addressed to another block leave it unchanged.
struct QuantumBlock {
  BlockKind kind = BlockKind::rotation;
  std::size_t dim = 2;
};

struct Amplitude {
  std::size_t block = 0;
  std::variant<RotationIndex, FiveAdicVector, IntervalVector> value;

  static Amplitude basis(const QuantumBlock& b, std::size_t block_index, std::size_t local) {
    switch (b.kind) {
      case BlockKind::rotation: return {block_index, RotationIndex::basis(static_cast<int>(local))};
      case BlockKind::five_adic: return {block_index, FiveAdicVector::unit(b.dim, local)};
      case BlockKind::dense: return {block_index, IntervalVector::unit(b.dim, local)};
    }
    throw Error("unknown block kind");
  }

  /// Local index when the state is (up to sign) a computational basis vector.
  std::optional<std::size_t> basis_index() const {
    if (auto* r = std::get_if<RotationIndex>(&value)) {
      if (!r->is_basis()) return std::nullopt;
      return static_cast<std::size_t>(r->basis_index());
    }
    if (auto* f = std::get_if<FiveAdicVector>(&value)) return f->basis_index();
    const auto& iv = std::get<IntervalVector>(value);
    std::optional<std::size_t> found;
    for (std::size_t i = 0; i < iv.amplitudes.size(); ++i) {
      if (iv.amplitudes[i].is_zero()) continue;
      if (found || !iv.amplitudes[i].is_exact()) return std::nullopt;
      found = i;
    }
    return found;
  }

  /// Same merge identity as key(), without building the string.
  bool same_identity(const Amplitude& o) const {
    if (block != o.block || value.index() != o.value.index()) return false;
    if (auto* r = std::get_if<RotationIndex>(&value)) return *r == std::get<RotationIndex>(o.value);
    if (auto* f = std::get_if<FiveAdicVector>(&value)) return *f == std::get<FiveAdicVector>(o.value);
    return std::get<IntervalVector>(value).id == std::get<IntervalVector>(o.value).id;
  }

  std::size_t identity_hash() const {
    std::size_t h = std::hash<std::size_t>{}(block) * 31 + value.index();
    auto mix = [&h](std::size_t x) { h ^= x + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2); };
    if (auto* r = std::get_if<RotationIndex>(&value)) {
      mix(std::hash<long long>{}(static_cast<long long>(r->turns)));
      mix(static_cast<std::size_t>(r->eighths));
    } else if (auto* f = std::get_if<FiveAdicVector>(&value)) {
      for (const auto& x : f->entries()) mix(static_cast<std::size_t>(mpz_get_si(x.get_mpz_t())) ^ mpz_size(x.get_mpz_t()));
      mix(f->scale());
      mix(f->root2());
    } else {
      mix(std::get<IntervalVector>(value).id);
    }
    return h;
  }

  /// Identity key used to merge configurations. Interval states are unique by id.
  std::string key() const {
    std::string k = std::to_string(block);
    if (auto* r = std::get_if<RotationIndex>(&value)) {
      k += 'R' + std::to_string(r->turns) + ':' + std::to_string(r->eighths);
    } else if (auto* f = std::get_if<FiveAdicVector>(&value)) {
      k += 'F';
      for (const auto& x : f->entries()) k += x.get_str() + ',';
      k += std::to_string(f->scale()) + ':' + std::to_string(f->root2());
    } else {
      k += 'I' + std::to_string(std::get<IntervalVector>(value).id);
    }
    return k;
  }

  std::string to_string() const {
    std::string s = "block " + std::to_string(block) + ": ";
    if (auto* r = std::get_if<RotationIndex>(&value))
      return s + "rotation(" + std::to_string(r->turns) + " alpha + " + std::to_string(r->eighths) + " pi/4)";
    if (auto* f = std::get_if<FiveAdicVector>(&value)) return s + f->to_string();
    s += "[";
    const auto& iv = std::get<IntervalVector>(value);
    for (std::size_t i = 0; i < iv.amplitudes.size(); ++i)
      s += (i ? ", " : "") + std::to_string(iv.amplitudes[i].approx());
    return s + "]";
  }
};

namespace detail {

/// Enclosure of 1/sqrt(x) for a positive enclosure x.
inline Enclosure inverse_sqrt(const Enclosure& x) {
  if (!x.certainly_positive()) throw AnalysisError("renormalising a state by a probability that may be zero");
  if (x.is_exact()) {
    const Rational& q = x.exact();
    if (mpz_perfect_square_p(q.get_num().get_mpz_t()) && mpz_perfect_square_p(q.get_den().get_mpz_t())) {
      BigInt n, d;
      mpz_sqrt(n.get_mpz_t(), q.get_num().get_mpz_t());
      mpz_sqrt(d.get_mpz_t(), q.get_den().get_mpz_t());
      return Enclosure(make_rational(d, n));
    }
  }
  const mpfr_prec_t p = working_precision() + 32;
  Real lo(p), hi(p);
  Real a = Real::from_rational(x.hi(), p, MPFR_RNDU);
  Real b = Real::from_rational(x.lo(), p, MPFR_RNDD);
  mpfr_rec_sqrt(lo.get(), a.get(), MPFR_RNDD);
  mpfr_rec_sqrt(hi.get(), b.get(), MPFR_RNDU);
  Enclosure e = Enclosure::between(lo.to_rational(), hi.to_rational());
  return e.compact();
}

/// 1 / sqrt(2)^h as an enclosure (exact when h is even).
inline Enclosure inverse_sqrt2_power(unsigned h) {
  Enclosure e(make_rational(1, pow_ui(2, h / 2)));
  if (h % 2 == 1) e = e * inverse_sqrt(Enclosure(2L));
  return e;
}

inline IntervalVector to_interval(const FiveAdicVector& v) {
  Enclosure scale = Enclosure(make_rational(1, pow_ui(5, v.scale()))) * inverse_sqrt2_power(v.root2());
  std::vector<Enclosure> out;
  out.reserve(v.dim());
  for (const auto& x : v.entries()) out.push_back(Enclosure(Rational(x)) * scale);
  return IntervalVector::make(std::move(out));
}

}  // namespace detail

}  // namespace qcfa
