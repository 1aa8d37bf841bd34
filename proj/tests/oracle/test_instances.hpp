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

// Seeded random instance generators shared by the property tests and the
// acceptance suite.

#pragma once

#include <utility>
#include <vector>

#include "featprop/features.hpp"
#include "featprop/graph.hpp"
#include "featprop/rng.hpp"

namespace testgen {

using featprop::Index;

/// Random implicit-feedback matrix with the given bounds; every user gets at
/// least one interaction.
inline featprop::InteractionMatrix random_interactions(featprop::rng::Stream& s,
                                                       Index max_users, Index max_items) {
  const Index users = 1 + static_cast<Index>(s.next_below(max_users));
  const Index items = 1 + static_cast<Index>(s.next_below(max_items));
  std::vector<std::pair<Index, Index>> pairs;
  for (Index u = 0; u < users; ++u) {
    const Index degree = 1 + static_cast<Index>(s.next_below(std::min<Index>(items, 6)));
    for (Index k = 0; k < degree; ++k) {
      pairs.emplace_back(u, static_cast<Index>(s.next_below(items)));
    }
  }
  return featprop::InteractionMatrix::from_pairs(users, items, std::move(pairs));
}

inline featprop::DenseMatrix random_matrix(featprop::rng::Stream& s, std::size_t rows,
                                           std::size_t cols, double low, double high) {
  featprop::DenseMatrix m(rows, cols);
  for (double& v : m.values) v = s.next_uniform(low, high);
  return m;
}

inline featprop::FeatureBundle random_bundle(featprop::rng::Stream& s, Index items,
                                             std::size_t num_modalities, std::size_t max_dim,
                                             double low = 0.0, double high = 1.0) {
  featprop::FeatureBundle bundle;
  for (std::size_t m = 0; m < num_modalities; ++m) {
    featprop::ModalityFeatureSet f;
    f.modality_id = "mod" + std::to_string(m);
    f.data = random_matrix(s, items, 1 + s.next_below(max_dim), low, high);
    bundle.modalities.push_back(std::move(f));
  }
  return bundle;
}

/// Random mask with roughly the given missing rate but at least one known
/// item overall.
inline featprop::MissingMask random_mask(featprop::rng::Stream& s, Index items, double rate) {
  featprop::MissingMask mask = featprop::MissingMask::all_known(items);
  for (Index i = 0; i < items; ++i) {
    if (s.next_unit() < rate) mask.known[i] = 0;
  }
  if (mask.count_known() == 0) mask.known[s.next_below(items)] = 1;
  return mask;
}

/// Marks the lowest-index item of every component that lacks a known item as
/// known, so every missing item can be reached by propagation.
inline featprop::MissingMask connect_mask_to_known(const featprop::ItemItemGraph& g,
                                                   featprop::MissingMask mask) {
  std::vector<Index> component(g.num_items, g.num_items);
  std::vector<Index> queue;
  Index num_components = 0;
  for (Index start = 0; start < g.num_items; ++start) {
    if (component[start] != g.num_items) continue;
    const Index c = num_components++;
    component[start] = c;
    queue.assign(1, start);
    for (std::size_t head = 0; head < queue.size(); ++head) {
      for (Index j : g.neighbors_of(queue[head])) {
        if (component[j] == g.num_items) {
          component[j] = c;
          queue.push_back(j);
        }
      }
    }
  }
  std::vector<std::uint8_t> has_known(num_components, 0);
  for (Index i = 0; i < g.num_items; ++i) {
    if (mask.is_known(i)) has_known[component[i]] = 1;
  }
  for (Index i = 0; i < g.num_items; ++i) {
    if (!has_known[component[i]]) {
      mask.known[i] = 1;
      has_known[component[i]] = 1;
    }
  }
  return mask;
}

}  // namespace testgen
