#pragma once

// RVSS binary store, all integers little-endian:
//
//   magic "RVSS" | version u32 | d u32 | m u32 | global_seed u64 |
//   weighting u8 | n_terms u32 | n_cliques u32
//   term table:   per term  { len u32, UTF-8 bytes, salt u32, degenerate u8, idf f64 }
//   clique table: per clique { count u32, count x term id u32 }
//   coordinates:  n_terms x d float32, row-major

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <streambuf>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "rvsem/errors.hpp"
#include "rvsem/space.hpp"

namespace rvsem {

inline constexpr std::array<char, 4> kStoreMagic{'R', 'V', 'S', 'S'};
inline constexpr std::uint32_t kStoreVersion = 1;
inline constexpr double kLoadNormTolerance = 1e-4;

namespace store_detail {

inline void put_u8(std::ostream& os, std::uint8_t v) { os.put(static_cast<char>(v)); }

template <class U>
void put_le(std::ostream& os, U v) {
  char buf[sizeof(U)];
  for (std::size_t i = 0; i < sizeof(U); ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  os.write(buf, sizeof(U));
}

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  void bytes(char* dst, std::size_t n) {
    in_.read(dst, static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) throw CorruptionError("truncated store");
  }

  template <class U>
  U le() {
    unsigned char buf[sizeof(U)];
    bytes(reinterpret_cast<char*>(buf), sizeof(U));
    U v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(buf[i]) << (8 * i);
    return v;
  }

  std::uint8_t u8() { return le<std::uint8_t>(); }

  void expect_end() {
    if (in_.peek() != std::char_traits<char>::eof()) throw CorruptionError("trailing bytes after coordinate block");
  }

 private:
  std::istream& in_;
};

// Output streambuf folding every byte into FNV-1a 64 and counting them.
class HashingBuf : public std::streambuf {
 public:
  std::uint64_t hash() const noexcept { return hash_; }
  std::uint64_t size() const noexcept { return size_; }

 protected:
  int_type overflow(int_type ch) override {
    if (ch != traits_type::eof()) feed(static_cast<unsigned char>(ch));
    return traits_type::not_eof(ch);
  }
  std::streamsize xsputn(const char* s, std::streamsize n) override {
    for (std::streamsize i = 0; i < n; ++i) feed(static_cast<unsigned char>(s[i]));
    return n;
  }

 private:
  void feed(unsigned char c) {
    hash_ ^= c;
    hash_ *= 0x100000001B3ull;
    ++size_;
  }
  std::uint64_t hash_ = 0xCBF29CE484222325ull;
  std::uint64_t size_ = 0;
};

}  // namespace store_detail

inline void save_space(const SemanticSpace& space, std::ostream& os) {
  using namespace store_detail;
  const auto& cfg = space.config();
  const auto& lex = space.lexicon();
  os.write(kStoreMagic.data(), kStoreMagic.size());
  put_le<std::uint32_t>(os, kStoreVersion);
  put_le<std::uint32_t>(os, cfg.dim);
  put_le<std::uint32_t>(os, cfg.m);
  put_le<std::uint64_t>(os, cfg.global_seed);
  put_u8(os, static_cast<std::uint8_t>(cfg.weighting));
  put_le<std::uint32_t>(os, static_cast<std::uint32_t>(lex.n_terms()));
  put_le<std::uint32_t>(os, static_cast<std::uint32_t>(lex.n_cliques()));
  for (TermId t = 0; t < lex.n_terms(); ++t) {
    const auto& s = lex.term(t);
    put_le<std::uint32_t>(os, static_cast<std::uint32_t>(s.size()));
    os.write(s.data(), static_cast<std::streamsize>(s.size()));
    put_le<std::uint32_t>(os, space.salt(t));
    put_u8(os, space.is_degenerate(t) ? 1 : 0);
    put_le<std::uint64_t>(os, std::bit_cast<std::uint64_t>(space.idf(t)));
  }
  for (CliqueId k = 0; k < lex.n_cliques(); ++k) {
    const auto c = lex.clique(k);
    put_le<std::uint32_t>(os, static_cast<std::uint32_t>(c.size()));
    for (TermId t : c) put_le<std::uint32_t>(os, t);
  }
  if constexpr (std::endian::native == std::endian::little) {
    const auto coords = space.coordinates();
    os.write(reinterpret_cast<const char*>(coords.data()),
             static_cast<std::streamsize>(coords.size() * sizeof(float)));
  } else {
    for (float x : space.coordinates()) put_le<std::uint32_t>(os, std::bit_cast<std::uint32_t>(x));
  }
  if (!os) throw IoError("write failed");
}

inline void save_space(const SemanticSpace& space, const std::string& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open for writing: " + path);
  save_space(space, os);
  os.flush();
  if (!os) throw IoError("write failed: " + path);
}

/// Reads a store written by save_space. Bad magic, unknown version,
/// truncation, inconsistent tables or a non-unit vector are corruption.
inline SemanticSpace load_space(std::istream& in) {
  using namespace store_detail;
  Reader r(in);
  std::array<char, 4> magic{};
  r.bytes(magic.data(), magic.size());
  if (magic != kStoreMagic) throw CorruptionError("bad magic: not an RVSS store");
  const auto version = r.le<std::uint32_t>();
  if (version != kStoreVersion) {
    throw VersionError("unsupported store version " + std::to_string(version) + " (expected " +
                       std::to_string(kStoreVersion) + ")");
  }
  SpaceConfig cfg;
  cfg.dim = r.le<std::uint32_t>();
  cfg.m = r.le<std::uint32_t>();
  cfg.global_seed = r.le<std::uint64_t>();
  const auto w = r.u8();
  if (w > 1) throw CorruptionError("unknown weighting code " + std::to_string(w));
  cfg.weighting = static_cast<Weighting>(w);
  try {
    cfg.validate();
  } catch (const DomainError& e) {
    throw CorruptionError(std::string("invalid header: ") + e.what());
  }
  const auto n_terms = r.le<std::uint32_t>();
  const auto n_cliques = r.le<std::uint32_t>();

  std::vector<std::string> terms;
  std::vector<std::uint32_t> salts;
  std::vector<std::uint8_t> degenerate;
  std::vector<double> idf;
  for (std::uint32_t t = 0; t < n_terms; ++t) {
    const auto len = r.le<std::uint32_t>();
    if (len > (1u << 20)) throw CorruptionError("implausible term length");
    std::string s(len, '\0');
    r.bytes(s.data(), len);
    if (!detail::valid_utf8(s)) throw CorruptionError("term is not valid UTF-8");
    terms.push_back(std::move(s));
    salts.push_back(r.le<std::uint32_t>());
    const auto flag = r.u8();
    if (flag > 1) throw CorruptionError("bad degenerate flag");
    degenerate.push_back(flag);
    idf.push_back(std::bit_cast<double>(r.le<std::uint64_t>()));
  }
  std::vector<std::vector<TermId>> cliques;
  cliques.reserve(n_cliques);
  for (std::uint32_t k = 0; k < n_cliques; ++k) {
    const auto count = r.le<std::uint32_t>();
    if (count > n_terms) throw CorruptionError("clique larger than the term table");
    std::vector<TermId> c(count);
    for (auto& t : c) t = r.le<std::uint32_t>();
    cliques.push_back(std::move(c));
  }

  SemanticSpace s;
  try {
    s.lexicon_ = Lexicon::from_tables(std::move(terms), std::move(cliques));
  } catch (const DomainError& e) {
    throw CorruptionError(std::string("inconsistent tables: ") + e.what());
  }
  s.config_ = cfg;
  s.salts_ = std::move(salts);
  s.idf_ = std::move(idf);
  s.degenerate_ = std::move(degenerate);
  s.coords_.resize(std::size_t{n_terms} * cfg.dim);
  if constexpr (std::endian::native == std::endian::little) {
    r.bytes(reinterpret_cast<char*>(s.coords_.data()), s.coords_.size() * sizeof(float));
  } else {
    for (auto& x : s.coords_) x = std::bit_cast<float>(r.le<std::uint32_t>());
  }
  r.expect_end();

  for (TermId t = 0; t < n_terms; ++t) {
    const auto row = s.vector(t);
    double sq = 0.0;
    for (float x : row) sq += double{x} * double{x};
    if (s.degenerate_[t]) {
      if (sq != 0.0) throw CorruptionError("degenerate term with non-zero vector: " + s.lexicon_.term(t));
    } else if (std::abs(std::sqrt(sq) - 1.0) > kLoadNormTolerance) {
      throw CorruptionError("norm check failed for term: " + s.lexicon_.term(t));
    }
  }
  s.seeds_.resize(n_terms);
  for (TermId t = 0; t < n_terms; ++t) {
    s.seeds_[t] = make_seed(s.lexicon_.term(t), cfg, s.salts_[t]);
    s.by_signature_.emplace(s.seeds_[t].signature(), t);
  }
  return s;
}

inline SemanticSpace load_space(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open store: " + path);
  return load_space(in);
}

/// Exact byte size of a store with the given term strings.
inline std::uint64_t predicted_store_size(const SemanticSpace& space) {
  std::uint64_t n = 4 + 4 + 4 + 4 + 8 + 1 + 4 + 4;
  for (const auto& t : space.lexicon().terms()) n += 4 + t.size() + 4 + 1 + 8;
  for (CliqueId k = 0; k < space.lexicon().n_cliques(); ++k) n += 4 + 4 * space.lexicon().clique(k).size();
  return n + std::uint64_t{space.n_terms()} * space.dim() * 4;
}

/// FNV-1a 64 of the serialized store, as 16 hex digits.
inline std::string store_checksum(const SemanticSpace& space) {
  store_detail::HashingBuf buf;
  std::ostream os(&buf);
  save_space(space, os);
  return fmt::format("{:016x}", buf.hash());
}

}  // namespace rvsem
