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

#pragma once

#include <string>
#include <vector>

#include "pvqflow/nn.hpp"
#include "pvqflow/synthdata.hpp"
#include "pvqflow/training.hpp"

namespace pvq::formats {

inline constexpr std::uint32_t kFormatVersion = 1;

/// "CNFP", version, D, hidden_dim, layer count (u32 each), then for every
/// layer its row-major weights followed by its bias as little-endian f64.
std::string encode_checkpoint(const nn::Mlp& net);
nn::Mlp decode_checkpoint(const std::string& bytes, const std::string& source = "checkpoint");
void write_checkpoint(const std::string& path, const nn::Mlp& net);
nn::Mlp read_checkpoint(const std::string& path);

/// "CNFO", version (u32), completed steps (u64), parameter count (u64), then
/// first and second moments as f64. Written next to checkpoints for resuming.
void write_optimizer_state(const std::string& path, const train::AdamState& state);
train::AdamState read_optimizer_state(const std::string& path);

/// "CNFE", version, N, D (u32 each), then N rows of D little-endian f64.
void write_embeddings(const std::string& path, const train::Dataset& data);
/// Returns a dataset whose attributes are left empty.
train::Dataset read_embeddings(const std::string& path);

/// `index,a` sidecar.
void write_attributes(const std::string& path, const std::vector<double>& attributes);
std::vector<double> read_attributes(const std::string& path);

/// Embeddings plus sidecar; row counts must agree.
train::Dataset read_dataset(const std::string& embeddings_path, const std::string& attributes_path);
void write_dataset(const std::string& embeddings_path, const std::string& attributes_path,
                   const train::Dataset& data);

/// "CNFZ", version, D, T (u32 each), then T frames of D little-endian f64.
/// Segments are stored separately.
void write_sequence(const std::string& path, const synth::FrameEmbeddingSequence& seq);
synth::FrameEmbeddingSequence read_sequence(const std::string& path);

/// `class,start_frame,end_frame`.
void write_segments(const std::string& path, const std::vector<synth::PhonemeSegment>& segments);
std::vector<synth::PhonemeSegment> read_segments(const std::string& path);

/// `iteration,nll`, numbering from first_iteration.
void write_loss_curve(const std::string& path, const std::vector<double>& curve,
                      std::uint64_t first_iteration = 0);
std::vector<double> read_loss_curve(const std::string& path);

}  // namespace pvq::formats
