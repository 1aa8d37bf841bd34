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
#include <string>
#include <vector>

#include "featprop/dense.hpp"
#include "featprop/graph.hpp"

namespace featprop {

/// Dense per-item feature matrix for one modality (e.g. "visual",
/// "textual"): one row per item, dim columns.
struct ModalityFeatureSet {
  std::string modality_id;
  DenseMatrix data;

  Index num_items() const { return static_cast<Index>(data.rows); }
  std::size_t dim() const { return data.cols; }

  /// Checks dim >= 1 and that every value is finite.
  void validate() const;
};

/// The modalities of one catalogue, all over the same item universe.
/// Modality ids are unique within a bundle; a single MissingMask applies to
/// every modality in the bundle.
struct FeatureBundle {
  std::vector<ModalityFeatureSet> modalities;

  Index num_items() const {
    return modalities.empty() ? 0 : modalities.front().num_items();
  }

  void validate() const;
};

/// Item-level availability mask: an item either has its whole feature
/// vector, across all modalities, or none of it.
struct MissingMask {
  Index num_items = 0;
  std::vector<std::uint8_t> known;  // 1 = features available

  static MissingMask all_known(Index num_items) {
    return MissingMask{num_items, std::vector<std::uint8_t>(num_items, 1)};
  }

  bool is_known(Index item) const { return known[item] != 0; }

  Index count_known() const;
  Index count_missing() const { return num_items - count_known(); }
  std::vector<Index> missing_indices() const;
};

/// Samples exactly round(rate * num_items) missing items (ties round up),
/// uniformly without replacement, from a deterministic seeded stream. The
/// same (num_items, rate, seed) triple always yields the same mask.
///
/// Throws Error(Parameter) unless 0 < rate < 1 and num_items >= 1.
MissingMask sample_missing(Index num_items, double rate, std::uint64_t seed);

/// Zeroes the rows of missing items; known rows are copied byte-for-byte.
ModalityFeatureSet blank_missing(const ModalityFeatureSet& f, const MissingMask& mask);
FeatureBundle blank_missing(const FeatureBundle& bundle, const MissingMask& mask);

/// Column mean over known rows only, accumulated in 64-bit.
/// Throws Error(State) when the mask has no known item.
std::vector<double> known_mean(const ModalityFeatureSet& f, const MissingMask& mask);

}  // namespace featprop
