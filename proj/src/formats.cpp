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

#include "pvqflow/formats.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "pvqflow/error.hpp"
#include "pvqflow/io.hpp"

namespace pvq::formats {
namespace {

std::uint32_t checked_u32(std::size_t v, const char* what) {
  if (v > std::numeric_limits<std::uint32_t>::max()) {
    throw IoError(std::string(what) + " does not fit the file format");
  }
  return static_cast<std::uint32_t>(v);
}

void expect_version(io::ByteReader& in, const std::string& source) {
  const std::uint32_t v = in.u32();
  if (v != kFormatVersion) {
    throw IoError(source + ": unsupported format version " + std::to_string(v));
  }
}

}  // namespace

std::string encode_checkpoint(const nn::Mlp& net) {
  io::ByteWriter out;
  out.magic("CNFP");
  out.u32(kFormatVersion);
  out.u32(checked_u32(net.dim(), "dimension"));
  out.u32(checked_u32(net.hidden(), "hidden width"));
  out.u32(checked_u32(net.num_layers(), "layer count"));
  for (std::size_t l = 0; l < net.num_layers(); ++l) {
    for (double w : net.weight(l).data) out.f64(w);
    for (double b : net.bias(l)) out.f64(b);
  }
  return out.bytes();
}

nn::Mlp decode_checkpoint(const std::string& bytes, const std::string& source) {
  io::ByteReader in(bytes, source);
  in.expect_magic("CNFP");
  expect_version(in, source);
  const std::uint32_t dim = in.u32();
  const std::uint32_t hidden = in.u32();
  const std::uint32_t layers = in.u32();
  if (dim == 0 || layers == 0 || (layers > 1 && hidden == 0)) {
    throw IoError(source + ": invalid network shape");
  }
  if (layers > 64 || hidden > (1u << 16) || dim > (1u << 16)) throw IoError(source + ": implausible network shape");
  std::vector<nn::Matrix> weights;
  std::vector<nn::Vector> biases;
  std::size_t in_dim = dim + 2;
  for (std::uint32_t l = 0; l < layers; ++l) {
    const std::size_t out_dim = (l + 1 == layers) ? dim : hidden;
    nn::Matrix w(out_dim, in_dim);
    for (double& v : w.data) v = in.f64();
    nn::Vector b(out_dim);
    for (double& v : b) v = in.f64();
    weights.push_back(std::move(w));
    biases.push_back(std::move(b));
    in_dim = out_dim;
  }
  in.expect_end();
  try {
    return nn::Mlp::from_layers(weights, biases);
  } catch (const ConfigError& e) {
    throw IoError(source + ": " + e.what());
  }
}

void write_checkpoint(const std::string& path, const nn::Mlp& net) {
  io::write_file_atomic(path, encode_checkpoint(net));
}

nn::Mlp read_checkpoint(const std::string& path) { return decode_checkpoint(io::read_file(path), path); }

void write_optimizer_state(const std::string& path, const train::AdamState& state) {
  if (state.m.size() != state.v.size()) throw ConfigError("optimizer moments differ in size");
  io::ByteWriter out;
  out.magic("CNFO");
  out.u32(kFormatVersion);
  out.u64(state.step);
  out.u64(state.m.size());
  for (double v : state.m) out.f64(v);
  for (double v : state.v) out.f64(v);
  io::write_file_atomic(path, out.bytes());
}

train::AdamState read_optimizer_state(const std::string& path) {
  io::ByteReader in(io::read_file(path), path);
  in.expect_magic("CNFO");
  expect_version(in, path);
  train::AdamState s;
  s.step = in.u64();
  const std::uint64_t n = in.u64();
  if (n > (1ULL << 32)) throw IoError(path + ": implausible parameter count");
  s.m.resize(n);
  s.v.resize(n);
  for (double& v : s.m) v = in.f64();
  for (double& v : s.v) v = in.f64();
  in.expect_end();
  return s;
}

void write_embeddings(const std::string& path, const train::Dataset& data) {
  if (data.embeddings.size() != data.size() * data.dim) {
    throw ConfigError("embedding rows do not match attribute count");
  }
  io::ByteWriter out;
  out.magic("CNFE");
  out.u32(kFormatVersion);
  out.u32(checked_u32(data.size(), "row count"));
  out.u32(checked_u32(data.dim, "dimension"));
  for (double v : data.embeddings) out.f64(v);
  io::write_file_atomic(path, out.bytes());
}

train::Dataset read_embeddings(const std::string& path) {
  io::ByteReader in(io::read_file(path), path);
  in.expect_magic("CNFE");
  expect_version(in, path);
  const std::uint32_t n = in.u32();
  const std::uint32_t dim = in.u32();
  if (dim == 0) throw IoError(path + ": dimension must be positive");
  train::Dataset data;
  data.dim = dim;
  data.embeddings.resize(static_cast<std::size_t>(n) * dim);
  for (double& v : data.embeddings) {
    v = in.f64();
    if (!std::isfinite(v)) throw IoError(path + ": non-finite embedding entry");
  }
  in.expect_end();
  return data;
}

void write_attributes(const std::string& path, const std::vector<double>& attributes) {
  std::ostringstream out;
  out << "index,a\n";
  for (std::size_t i = 0; i < attributes.size(); ++i) {
    out << i << ',' << io::format_double(attributes[i]) << '\n';
  }
  io::write_file_atomic(path, out.str());
}

std::vector<double> read_attributes(const std::string& path) {
  const auto rows = io::read_dsv(path, {"index", "a"});
  std::vector<double> out;
  out.reserve(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (io::parse_u64(rows[r][0]) != r) throw IoError(path + ": indices must be 0, 1, 2, ...");
    const double a = io::parse_double(rows[r][1]);
    if (!std::isfinite(a)) throw IoError(path + ": non-finite attribute");
    out.push_back(a);
  }
  return out;
}

train::Dataset read_dataset(const std::string& embeddings_path, const std::string& attributes_path) {
  train::Dataset data = read_embeddings(embeddings_path);
  data.attributes = read_attributes(attributes_path);
  if (data.embeddings.size() != data.attributes.size() * data.dim) {
    throw IoError(attributes_path + ": row count does not match " + embeddings_path);
  }
  return data;
}

void write_dataset(const std::string& embeddings_path, const std::string& attributes_path,
                   const train::Dataset& data) {
  write_embeddings(embeddings_path, data);
  write_attributes(attributes_path, data.attributes);
}

void write_sequence(const std::string& path, const synth::FrameEmbeddingSequence& seq) {
  if (seq.data.size() != seq.dim * seq.frames) throw ConfigError("sequence data does not match its shape");
  io::ByteWriter out;
  out.magic("CNFZ");
  out.u32(kFormatVersion);
  out.u32(checked_u32(seq.dim, "dimension"));
  out.u32(checked_u32(seq.frames, "frame count"));
  for (double v : seq.data) out.f64(v);
  io::write_file_atomic(path, out.bytes());
}

synth::FrameEmbeddingSequence read_sequence(const std::string& path) {
  io::ByteReader in(io::read_file(path), path);
  in.expect_magic("CNFZ");
  expect_version(in, path);
  synth::FrameEmbeddingSequence seq;
  seq.dim = in.u32();
  seq.frames = in.u32();
  seq.data.resize(seq.dim * seq.frames);
  for (double& v : seq.data) {
    v = in.f64();
    if (!std::isfinite(v)) throw IoError(path + ": non-finite frame entry");
  }
  in.expect_end();
  return seq;
}

void write_segments(const std::string& path, const std::vector<synth::PhonemeSegment>& segments) {
  std::ostringstream out;
  out << "class,start_frame,end_frame\n";
  for (const auto& s : segments) {
    out << synth::class_name(s.cls) << ',' << s.start << ',' << s.end << '\n';
  }
  io::write_file_atomic(path, out.str());
}

std::vector<synth::PhonemeSegment> read_segments(const std::string& path) {
  const auto rows = io::read_dsv(path, {"class", "start_frame", "end_frame"});
  std::vector<synth::PhonemeSegment> out;
  for (const auto& row : rows) {
    synth::PhonemeSegment s;
    try {
      s.cls = synth::parse_class(row[0]);
    } catch (const DomainError& e) {
      throw IoError(path + ": " + e.what());
    }
    s.start = io::parse_u64(row[1]);
    s.end = io::parse_u64(row[2]);
    out.push_back(s);
  }
  return out;
}

void write_loss_curve(const std::string& path, const std::vector<double>& curve,
                      std::uint64_t first_iteration) {
  std::ostringstream out;
  out << "iteration,nll\n";
  for (std::size_t i = 0; i < curve.size(); ++i) {
    out << first_iteration + i << ',' << io::format_double(curve[i]) << '\n';
  }
  io::write_file_atomic(path, out.str());
}

std::vector<double> read_loss_curve(const std::string& path) {
  const auto rows = io::read_dsv(path, {"iteration", "nll"});
  std::vector<double> out;
  for (const auto& row : rows) out.push_back(io::parse_double(row[1]));
  return out;
}

}  // namespace pvq::formats
