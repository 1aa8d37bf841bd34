// Copyright 2026 The FeatProp Authors
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

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "featprop/eval.hpp"
#include "featprop/features.hpp"
#include "featprop/graph.hpp"

namespace featprop {

// ---------------------------------------------------------------------------
// Interactions: UTF-8 text, one `user_token<TAB>item_token` per line.
// Tokens map to dense indices in first-appearance order; duplicate pairs
// collapse to one entry. Row i of any feature file paired with an
// interactions file refers to the i-th distinct item token.
// ---------------------------------------------------------------------------

struct InteractionData {
  InteractionMatrix matrix;
  std::vector<std::string> user_tokens;  // index -> token
  std::vector<std::string> item_tokens;
};

/// Throws Error(Io) when the file cannot be read, Error(Parse) on a
/// malformed line (the message carries the line number) or an empty file.
InteractionData load_interactions(const std::filesystem::path& path);

/// Writes one line per stored entry, in row order. Token vectors default to
/// "u<index>" / "i<index>" when empty.
void save_interactions(const std::filesystem::path& path, const InteractionMatrix& r,
                       const std::vector<std::string>& user_tokens = {},
                       const std::vector<std::string>& item_tokens = {});

// ---------------------------------------------------------------------------
// Features: fixed-width little-endian binary, magic "FPMM", version 1.
//
//   bytes 0..3   magic "FPMM"
//   u32 LE       version (= 1)
//   u64 LE       num_items
//   u64 LE       dim
//   u32 LE       label length, followed by that many UTF-8 bytes
//   payload      num_items * dim IEEE-754 binary32 LE, row-major
//
// Values are stored in 32-bit precision on disk and widened to 64-bit in
// memory, so save -> load round-trips float-valued matrices bit-exactly.
// ---------------------------------------------------------------------------

ModalityFeatureSet load_features(const std::filesystem::path& path);
void save_features(const std::filesystem::path& path, const ModalityFeatureSet& f);

// ---------------------------------------------------------------------------
// Item-item graph: little-endian binary, magic "FPGR", version 1. Stores
// stage, CSR structure, weights, and the degree vector when present.
// ---------------------------------------------------------------------------

ItemItemGraph load_graph(const std::filesystem::path& path);
void save_graph(const std::filesystem::path& path, const ItemItemGraph& g);

// ---------------------------------------------------------------------------
// Missing mask: JSON {"num_items": N, "missing": [sorted item indices]}.
// ---------------------------------------------------------------------------

MissingMask load_mask(const std::filesystem::path& path);
void save_mask(const std::filesystem::path& path, const MissingMask& mask);

// ---------------------------------------------------------------------------
// Sweep reports.
// CSV columns: method, rate, seed, k, recall_at_k, cosine_<modality>...,
// runtime_ms. Doubles print as their shortest round-trip decimal form, so
// reruns of a deterministic sweep differ only in the runtime column.
// ---------------------------------------------------------------------------

std::string sweep_report_to_csv(const SweepReport& report);
std::string sweep_report_to_json(const SweepReport& report);
void save_sweep_report_csv(const std::filesystem::path& path, const SweepReport& report);
void save_sweep_report_json(const std::filesystem::path& path, const SweepReport& report);

/// Shortest decimal representation that round-trips to the same double.
std::string format_double(double v);

// ---------------------------------------------------------------------------
// Synthetic datasets.
// ---------------------------------------------------------------------------

struct SyntheticSpec {
  Index num_users = 0;
  Index num_items = 0;
  Index num_clusters = 1;
  Index interactions_per_user = 0;
  std::vector<Index> modality_dims;  // one modality per entry
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;
};

struct SyntheticDataset {
  InteractionMatrix interactions;
  FeatureBundle truth;               // modality ids "mod0", "mod1", ...
  std::vector<Index> item_cluster;   // item -> cluster
  std::vector<Index> user_cluster;
};

/// Clustered dataset generator: items and users belong to clusters, users
/// draw 90% of their interactions from their own cluster's items, and item
/// features are the cluster centroid plus Gaussian noise of the given sigma.
/// Every item is guaranteed at least one interaction. Deterministic per
/// seed.
SyntheticDataset generate_synthetic(const SyntheticSpec& spec);

}  // namespace featprop
