#pragma once

// Binary model checkpoint. Little-endian layout, see
// docs/checkpoint_format.md.

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "hole/error.hpp"
#include "hole/kgdata.hpp"
#include "hole/models.hpp"

namespace hole {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes little-endian");

inline constexpr char kCheckpointMagic[8] = {'H', 'O', 'L', 'E', 'C', 'K', 'P', 'T'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  ModelSpec spec;
  std::vector<std::string> entity_names;
  std::vector<std::string> relation_names;
  EmbeddingSet params;

  std::uint64_t entity_hash() const { return Vocabulary::hash_names(entity_names); }
  std::uint64_t relation_hash() const { return Vocabulary::hash_names(relation_names); }
};

namespace detail {

class ChecksumWriter {
 public:
  explicit ChecksumWriter(std::ostream& out) : out_(out) {}

  void bytes(const void* p, std::size_t n) {
    const auto* c = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      hash_ ^= c[i];
      hash_ *= 0x100000001b3ULL;
    }
    out_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
  }
  template <typename T>
  void pod(T v) {
    bytes(&v, sizeof v);
  }
  void str(const std::string& s) {
    pod(static_cast<std::uint32_t>(s.size()));
    bytes(s.data(), s.size());
  }
  void block(std::span<const double> v) { bytes(v.data(), v.size() * sizeof(double)); }
  std::uint64_t hash() const noexcept { return hash_; }

 private:
  std::ostream& out_;
  std::uint64_t hash_ = 0xcbf29ce484222325ULL;
};

class ChecksumReader {
 public:
  explicit ChecksumReader(std::istream& in) : in_(in) {}

  void bytes(void* p, std::size_t n) {
    in_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) {
      throw Error(ErrorCode::Checkpoint, "checkpoint truncated");
    }
    const auto* c = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      hash_ ^= c[i];
      hash_ *= 0x100000001b3ULL;
    }
  }
  template <typename T>
  T pod() {
    T v;
    bytes(&v, sizeof v);
    return v;
  }
  std::string str() {
    const auto n = pod<std::uint32_t>();
    if (n > (1u << 20)) throw Error(ErrorCode::Checkpoint, "checkpoint name length implausible");
    std::string s(n, '\0');
    bytes(s.data(), n);
    return s;
  }
  void block(std::span<double> v) { bytes(v.data(), v.size() * sizeof(double)); }
  std::uint64_t hash() const noexcept { return hash_; }

 private:
  std::istream& in_;
  std::uint64_t hash_ = 0xcbf29ce484222325ULL;
};

}  // namespace detail

inline void write_checkpoint(std::ostream& out, const Checkpoint& ck) {
  validate_shapes(ck.spec, ck.params);
  if (ck.entity_names.size() != ck.params.num_entities() ||
      ck.relation_names.size() != ck.params.num_relations()) {
    throw Error(ErrorCode::ShapeMismatch, "vocabulary sizes do not match parameter rows");
  }
  detail::ChecksumWriter w(out);
  w.bytes(kCheckpointMagic, sizeof kCheckpointMagic);
  w.pod(kCheckpointVersion);
  w.pod(static_cast<std::uint32_t>(ck.spec.family));
  w.pod(static_cast<std::uint32_t>(ck.spec.transe_norm));
  w.pod(std::uint32_t{0});
  w.pod(static_cast<std::uint64_t>(ck.spec.entity_dim));
  w.pod(static_cast<std::uint64_t>(ck.spec.relation_dim));
  w.pod(static_cast<std::uint64_t>(ck.spec.hidden));
  w.pod(static_cast<std::uint64_t>(ck.params.num_entities()));
  w.pod(static_cast<std::uint64_t>(ck.params.num_relations()));
  w.pod(ck.entity_hash());
  w.pod(ck.relation_hash());
  for (const auto& n : ck.entity_names) w.str(n);
  for (const auto& n : ck.relation_names) w.str(n);
  w.block(ck.params.entities.values());
  w.block(ck.params.relations.values());
  w.block(ck.params.projection.values());
  w.block(ck.params.output);
  const std::uint64_t sum = w.hash();
  out.write(reinterpret_cast<const char*>(&sum), sizeof sum);
  if (!out) throw Error(ErrorCode::Io, "checkpoint write failed");
}

inline Checkpoint read_checkpoint(std::istream& in) {
  detail::ChecksumReader r(in);
  char magic[8];
  r.bytes(magic, sizeof magic);
  if (std::memcmp(magic, kCheckpointMagic, sizeof magic) != 0) {
    throw Error(ErrorCode::Checkpoint, "not a checkpoint file (bad magic)");
  }
  const auto version = r.pod<std::uint32_t>();
  if (version != kCheckpointVersion) {
    throw Error(ErrorCode::Checkpoint, "unsupported checkpoint version " + std::to_string(version));
  }
  Checkpoint ck;
  const auto family = r.pod<std::uint32_t>();
  const auto norm = r.pod<std::uint32_t>();
  r.pod<std::uint32_t>();
  if (family > static_cast<std::uint32_t>(Family::ErMlp) ||
      norm > static_cast<std::uint32_t>(DistanceNorm::SquaredL2)) {
    throw Error(ErrorCode::Checkpoint, "checkpoint header has an unknown model family");
  }
  ck.spec.family = static_cast<Family>(family);
  ck.spec.transe_norm = static_cast<DistanceNorm>(norm);
  ck.spec.entity_dim = r.pod<std::uint64_t>();
  ck.spec.relation_dim = r.pod<std::uint64_t>();
  ck.spec.hidden = r.pod<std::uint64_t>();
  const auto n_e = r.pod<std::uint64_t>();
  const auto n_r = r.pod<std::uint64_t>();
  const auto ent_hash = r.pod<std::uint64_t>();
  const auto rel_hash = r.pod<std::uint64_t>();
  try {
    ck.spec.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::Checkpoint, std::string("checkpoint header invalid: ") + e.what());
  }
  constexpr std::uint64_t kMaxRows = std::uint64_t{1} << 32;
  if (n_e == 0 || n_r == 0 || n_e > kMaxRows || n_r > kMaxRows) {
    throw Error(ErrorCode::Checkpoint, "checkpoint header has implausible vocabulary sizes");
  }
  ck.entity_names.reserve(n_e);
  for (std::uint64_t i = 0; i < n_e; ++i) ck.entity_names.push_back(r.str());
  for (std::uint64_t i = 0; i < n_r; ++i) ck.relation_names.push_back(r.str());
  if (ck.entity_hash() != ent_hash || ck.relation_hash() != rel_hash) {
    throw Error(ErrorCode::Checkpoint, "checkpoint vocabulary does not match its stored hash");
  }
  ck.params.entities = Matrix(n_e, ck.spec.entity_dim);
  ck.params.relations = Matrix(n_r, ck.spec.relation_dim);
  if (ck.spec.family == Family::ErMlp) {
    ck.params.projection = Matrix(ck.spec.hidden, ck.spec.ermlp_input());
    ck.params.output.assign(ck.spec.hidden, 0.0);
  }
  r.block(ck.params.entities.values());
  r.block(ck.params.relations.values());
  r.block(ck.params.projection.values());
  r.block(ck.params.output);
  const std::uint64_t expected = r.hash();
  std::uint64_t stored = 0;
  in.read(reinterpret_cast<char*>(&stored), sizeof stored);
  if (in.gcount() != sizeof stored) throw Error(ErrorCode::Checkpoint, "checkpoint truncated");
  if (stored != expected) throw Error(ErrorCode::Checkpoint, "checkpoint checksum mismatch");
  if (!ck.params.all_finite()) throw Error(ErrorCode::Checkpoint, "checkpoint holds non-finite values");
  return ck;
}

inline void save_checkpoint(const std::string& path, const Checkpoint& ck) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path);
  write_checkpoint(out, ck);
}

inline Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open checkpoint " + path);
  return read_checkpoint(in);
}

// Throws VocabularyMismatch (with both hashes) unless the store's
// vocabularies are the ones the checkpoint was trained on.
inline void require_same_vocabulary(const Checkpoint& ck, const TripleStore& store) {
  auto hex = [](std::uint64_t h) {
    std::ostringstream s;
    s << std::hex << h;
    return s.str();
  };
  const auto ce = ck.entity_hash(), de = store.entities.hash();
  const auto cr = ck.relation_hash(), dr = store.relations.hash();
  if (ce != de || cr != dr) {
    throw Error(ErrorCode::VocabularyMismatch,
                "checkpoint entities " + hex(ce) + " relations " + hex(cr) + " vs data entities " +
                    hex(de) + " relations " + hex(dr));
  }
}

}  // namespace hole
