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

#include "featprop/features.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>
#include <unordered_set>

#include "featprop/rng.hpp"

namespace featprop {

void ModalityFeatureSet::validate() const {
  if (data.cols < 1) {
    throw Error(ErrorCategory::Parameter,
                "modality '" + modality_id + "': dim must be >= 1");
  }
  for (double v : data.values) {
    if (!std::isfinite(v)) {
      throw Error(ErrorCategory::State,
                  "modality '" + modality_id + "': non-finite feature value");
    }
  }
}

void FeatureBundle::validate() const {
  std::unordered_set<std::string> ids;
  for (const auto& m : modalities) {
    m.validate();
    if (!ids.insert(m.modality_id).second) {
      throw Error(ErrorCategory::State,
                  "bundle: duplicate modality id '" + m.modality_id + "'");
    }
    if (m.num_items() != num_items()) {
      throw Error(ErrorCategory::Shape,
                  "bundle: modality '" + m.modality_id + "' has " +
                      std::to_string(m.num_items()) + " items, expected " +
                      std::to_string(num_items()));
    }
  }
}

Index MissingMask::count_known() const {
  return static_cast<Index>(std::count(known.begin(), known.end(), std::uint8_t{1}));
}

std::vector<Index> MissingMask::missing_indices() const {
  std::vector<Index> out;
  for (Index i = 0; i < num_items; ++i) {
    if (!is_known(i)) out.push_back(i);
  }
  return out;
}

MissingMask sample_missing(Index num_items, double rate, std::uint64_t seed) {
  if (num_items < 1) {
    throw Error(ErrorCategory::Parameter, "sample_missing: num_items must be >= 1");
  }
  if (!(rate > 0.0 && rate < 1.0)) {
    throw Error(ErrorCategory::Parameter,
                "sample_missing: rate must lie strictly inside (0, 1)");
  }
  // round(rate * num_items) to nearest, ties up
  const auto missing_count = static_cast<Index>(
      std::floor(rate * static_cast<double>(num_items) + 0.5));

  std::vector<Index> order(num_items);
  std::iota(order.begin(), order.end(), Index{0});
  rng::Stream stream(seed);
  // Partial Fisher-Yates: after i swaps the prefix holds an unbiased
  // uniform sample without replacement.
  MissingMask mask{num_items, std::vector<std::uint8_t>(num_items, 1)};
  for (Index i = 0; i < missing_count; ++i) {
    const auto j = i + static_cast<Index>(stream.next_below(num_items - i));
    std::swap(order[i], order[j]);
    mask.known[order[i]] = 0;
  }
  return mask;
}

ModalityFeatureSet blank_missing(const ModalityFeatureSet& f, const MissingMask& mask) {
  if (f.num_items() != mask.num_items) {
    throw Error(ErrorCategory::Shape,
                "blank_missing: features have " + std::to_string(f.num_items()) +
                    " items, mask has " + std::to_string(mask.num_items));
  }
  ModalityFeatureSet out = f;
  for (Index i = 0; i < mask.num_items; ++i) {
    if (!mask.is_known(i)) {
      auto row = out.data.row(i);
      std::fill(row.begin(), row.end(), 0.0);
    }
  }
  return out;
}

FeatureBundle blank_missing(const FeatureBundle& bundle, const MissingMask& mask) {
  FeatureBundle out;
  out.modalities.reserve(bundle.modalities.size());
  for (const auto& m : bundle.modalities) out.modalities.push_back(blank_missing(m, mask));
  return out;
}

std::vector<double> known_mean(const ModalityFeatureSet& f, const MissingMask& mask) {
  if (f.num_items() != mask.num_items) {
    throw Error(ErrorCategory::Shape, "known_mean: features/mask size mismatch");
  }
  const Index known = mask.count_known();
  if (known == 0) {
    throw Error(ErrorCategory::State, "known_mean: mask has no known items");
  }
  std::vector<double> mean(f.dim(), 0.0);
  for (Index i = 0; i < mask.num_items; ++i) {
    if (!mask.is_known(i)) continue;
    const auto row = f.data.row(i);
    for (std::size_t c = 0; c < mean.size(); ++c) mean[c] += row[c];
  }
  for (double& v : mean) v /= static_cast<double>(known);
  return mean;
}

}  // namespace featprop
