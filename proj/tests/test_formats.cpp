// Copyright 2026 The pvqflow Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <doctest.h>

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>

#include "pvqflow/error.hpp"
#include "pvqflow/formats.hpp"
#include "pvqflow/io.hpp"
#include "support.hpp"

using namespace pvq;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& f) const { return (path / f).string(); }
};

void write_text(const std::string& path, const std::string& text) {
  std::ofstream(path, std::ios::binary) << text;
}

std::string le32(std::uint32_t v) {
  std::string s(4, '\0');
  for (int i = 0; i < 4; ++i) s[i] = char((v >> (8 * i)) & 0xff);
  return s;
}

std::string le64(double d) {
  const auto v = std::bit_cast<std::uint64_t>(d);
  std::string s(8, '\0');
  for (int i = 0; i < 8; ++i) s[i] = char((v >> (8 * i)) & 0xff);
  return s;
}

}  // namespace

TEST_CASE("number formatting round-trips") {
  for (double v : {0.1, -2.5, 1e-300, 123456789.125, 1.0 / 3.0}) {
    CHECK(io::parse_double(io::format_double(v)) == v);
  }
  CHECK(io::format_double(0.25) == "0.25");
  CHECK(io::format_double(-1.0) == "-1");
  CHECK_THROWS_AS(io::parse_double(" 2.5"), IoError);
  CHECK_THROWS_AS(io::parse_double("2.5x"), IoError);
  CHECK_THROWS_AS(io::parse_double(""), IoError);
  CHECK(io::parse_u64("42") == 42);
  CHECK_THROWS_AS(io::parse_u64("-1"), IoError);
}

TEST_CASE("byte codec") {
  io::ByteWriter w;
  w.magic("ABCD");
  w.u32(7);
  w.u64(1ULL << 40);
  w.f64(-0.5);
  CHECK(w.bytes().substr(0, 8) == "ABCD" + le32(7));
  io::ByteReader r(w.bytes(), "mem");
  r.expect_magic("ABCD");
  CHECK(r.u32() == 7);
  CHECK(r.u64() == (1ULL << 40));
  CHECK(r.f64() == -0.5);
  CHECK_NOTHROW(r.expect_end());
  io::ByteReader short_reader(w.bytes().substr(0, 6), "mem");
  short_reader.expect_magic("ABCD");
  CHECK_THROWS_AS(short_reader.u32(), IoError);
  io::ByteReader wrong(w.bytes(), "mem");
  CHECK_THROWS_AS(wrong.expect_magic("WXYZ"), IoError);
}

TEST_CASE("atomic writes and DSV reading") {
  TempDir dir("pvqflow_io_test");
  const auto path = dir / "nested/deeper/table.csv";
  io::write_file_atomic(path, "a,b\n1, 2\n\n3,4\n");
  CHECK(io::read_file(path) == "a,b\n1, 2\n\n3,4\n");
  const auto rows = io::read_dsv(path, {"a", "b"});
  REQUIRE(rows.size() == 2);
  CHECK(rows[0] == std::vector<std::string>{"1", "2"});
  CHECK_THROWS_AS(io::read_dsv(path, {"a", "c"}), IoError);
  write_text(dir / "ragged.csv", "a,b\n1\n");
  CHECK_THROWS_AS(io::read_dsv(dir / "ragged.csv", {"a", "b"}), IoError);
  CHECK_THROWS_AS(io::read_file(dir / "missing"), IoError);
  for (const auto& entry : fs::directory_iterator(dir.path / "nested/deeper")) {
    CHECK(entry.path().filename() == "table.csv");
  }
}

TEST_CASE("checkpoint layout") {
  nn::Matrix w(1, 3, {0.5, -1.0, 2.0});
  const auto net = nn::Mlp::from_layers({w}, {{0.25}});
  const std::string expected = "CNFP" + le32(1) + le32(1) + le32(0) + le32(1) + le64(0.5) + le64(-1.0) +
                               le64(2.0) + le64(0.25);
  CHECK(formats::encode_checkpoint(net) == expected);
  CHECK(formats::decode_checkpoint(expected) == net);
}

TEST_CASE("checkpoint round trip and corruption") {
  TempDir dir("pvqflow_ckpt_test");
  const auto net = testing::random_net(5, 12, 3);
  formats::write_checkpoint(dir / "m.cnfp", net);
  CHECK(formats::read_checkpoint(dir / "m.cnfp") == net);
  const auto bytes = formats::encode_checkpoint(net);
  CHECK(bytes.size() == 20 + 8 * net.num_params());
  CHECK_THROWS_AS(formats::decode_checkpoint(bytes.substr(0, bytes.size() - 1)), IoError);
  CHECK_THROWS_AS(formats::decode_checkpoint(bytes + "x"), IoError);
  auto bad_version = bytes;
  bad_version[4] = 9;
  CHECK_THROWS_AS(formats::decode_checkpoint(bad_version), IoError);
  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  CHECK_THROWS_AS(formats::decode_checkpoint(bad_magic), IoError);
}

TEST_CASE("optimizer state round trip") {
  TempDir dir("pvqflow_opt_test");
  train::AdamState st{{0.1, -0.2, 0.3}, {1e-4, 2e-4, 3e-4}, 17};
  formats::write_optimizer_state(dir / "o.cnfo", st);
  CHECK(formats::read_optimizer_state(dir / "o.cnfo") == st);
  CHECK(io::read_file(dir / "o.cnfo").substr(0, 4) == "CNFO");
}

TEST_CASE("embedding datasets") {
  TempDir dir("pvqflow_emb_test");
  train::Dataset d{3, {1, 2, 3, 4, 5, 6}, {0.25, 0.75}};
  formats::write_dataset(dir / "d.cnfe", dir / "d.csv", d);
  const std::string expected = "CNFE" + le32(1) + le32(2) + le32(3) + le64(1) + le64(2) + le64(3) + le64(4) +
                               le64(5) + le64(6);
  CHECK(io::read_file(dir / "d.cnfe") == expected);
  CHECK(io::read_file(dir / "d.csv") == "index,a\n0,0.25\n1,0.75\n");
  const auto back = formats::read_dataset(dir / "d.cnfe", dir / "d.csv");
  CHECK(back.embeddings == d.embeddings);
  CHECK(back.attributes == d.attributes);
  CHECK(back.dim == 3);
  CHECK(formats::read_embeddings(dir / "d.cnfe").attributes.empty());

  formats::write_attributes(dir / "one.csv", {0.5});
  CHECK_THROWS_AS(formats::read_dataset(dir / "d.cnfe", dir / "one.csv"), IoError);
  write_text(dir / "skip.csv", "index,a\n0,0.1\n2,0.2\n");
  CHECK_THROWS_AS(formats::read_attributes(dir / "skip.csv"), IoError);
  // Manipulated targets may leave [0, 1].
  formats::write_attributes(dir / "wide.csv", {-0.5, 2.0});
  CHECK(formats::read_attributes(dir / "wide.csv") == std::vector<double>{-0.5, 2.0});
}

TEST_CASE("sequences, segments and loss curves") {
  TempDir dir("pvqflow_seq_test");
  synth::FrameEmbeddingSequence seq{2, 3, {1, 2, 3, 4, 5, 6}, {}};
  formats::write_sequence(dir / "z.cnfz", seq);
  const auto back = formats::read_sequence(dir / "z.cnfz");
  CHECK(back.dim == 2);
  CHECK(back.frames == 3);
  CHECK(back.data == seq.data);

  const std::vector<synth::PhonemeSegment> segs{{synth::PhonemeClass::kSilence, 0, 2},
                                                {synth::PhonemeClass::kVoiced, 2, 3}};
  formats::write_segments(dir / "s.csv", segs);
  CHECK(io::read_file(dir / "s.csv") == "class,start_frame,end_frame\nsilence,0,2\nvoiced,2,3\n");
  CHECK(formats::read_segments(dir / "s.csv") == segs);
  write_text(dir / "bad.csv", "class,start_frame,end_frame\nnasal,0,2\n");
  CHECK_THROWS(formats::read_segments(dir / "bad.csv"));

  formats::write_loss_curve(dir / "l.csv", {3.5, -1.25}, 10);
  CHECK(io::read_file(dir / "l.csv") == "iteration,nll\n10,3.5\n11,-1.25\n");
  formats::write_loss_curve(dir / "l0.csv", {3.5, -1.25});
  CHECK(formats::read_loss_curve(dir / "l0.csv") == std::vector<double>{3.5, -1.25});
}
