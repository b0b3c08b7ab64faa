#include <gtest/gtest.h>

#include <sstream>

#include "hole/checkpoint.hpp"

using namespace hole;

namespace {

Checkpoint sample(Family f) {
  Checkpoint ck;
  ck.spec = ModelSpec::make(f, 4, 3, DistanceNorm::L1);
  ck.entity_names = {"alpha", "beta", "gamma"};
  ck.relation_names = {"r"};
  Rng rng = make_rng(1, Stream::Init);
  ck.params = initialize_parameters(ck.spec, 3, 1, rng);
  return ck;
}

std::string bytes_of(const Checkpoint& ck) {
  std::ostringstream out(std::ios::binary);
  write_checkpoint(out, ck);
  return out.str();
}

ErrorCode read_error(const std::string& bytes) {
  std::istringstream in(bytes, std::ios::binary);
  try {
    (void)read_checkpoint(in);
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::Io;
}

}  // namespace

TEST(Checkpoint, RoundTripIsBitExact) {
  for (Family f : {Family::HolE, Family::TransE, Family::Rescal, Family::DistMult, Family::ErMlp}) {
    const auto ck = sample(f);
    std::istringstream in(bytes_of(ck), std::ios::binary);
    const auto back = read_checkpoint(in);
    EXPECT_EQ(back.spec, ck.spec);
    EXPECT_EQ(back.params, ck.params);
    EXPECT_EQ(back.entity_names, ck.entity_names);
    EXPECT_EQ(back.relation_names, ck.relation_names);
  }
}

TEST(Checkpoint, BadMagic) {
  auto bytes = bytes_of(sample(Family::HolE));
  bytes[0] = 'X';
  EXPECT_EQ(read_error(bytes), ErrorCode::Checkpoint);
  EXPECT_EQ(read_error("hello"), ErrorCode::Checkpoint);
}

TEST(Checkpoint, TruncationAndCorruptionDetected) {
  const auto bytes = bytes_of(sample(Family::ErMlp));
  for (std::size_t cut : {std::size_t{12}, bytes.size() / 2, bytes.size() - 1}) {
    EXPECT_EQ(read_error(bytes.substr(0, cut)), ErrorCode::Checkpoint) << cut;
  }
  auto flipped = bytes;
  flipped[bytes.size() - 20] ^= 0x01;
  EXPECT_EQ(read_error(flipped), ErrorCode::Checkpoint);
}

TEST(Checkpoint, VocabularyCheck) {
  const auto ck = sample(Family::HolE);
  const auto same = build_store({{"alpha", "r", "beta"}, {"gamma", "r", "alpha"}}, {}, {});
  EXPECT_NO_THROW(require_same_vocabulary(ck, same));
  const auto other = build_store({{"beta", "r", "alpha"}, {"gamma", "r", "alpha"}}, {}, {});
  try {
    require_same_vocabulary(ck, other);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::VocabularyMismatch);
  }
}

TEST(Checkpoint, MissingFileIsIo) {
  try {
    (void)load_checkpoint("/nonexistent/model.bin");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Io);
  }
}
