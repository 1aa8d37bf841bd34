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
#include <span>
#include <string>
#include <vector>

#include "featprop/features.hpp"
#include "featprop/graph.hpp"
#include "featprop/impute.hpp"

namespace featprop {

struct SplitRatios {
  double train = 0.8;
  double valid = 0.1;
  double test = 0.1;
};

/// Per-user disjoint partition of the interactions over the same user/item
/// universe. Every user keeps at least one train interaction.
struct InteractionSplit {
  InteractionMatrix train;
  InteractionMatrix valid;
  InteractionMatrix test;
};

/// Randomly partitions each user's items according to the ratios, from a
/// seeded stream. Users with fewer than 3 interactions go entirely to
/// train; otherwise valid and test receive floor(n * ratio) items each and
/// train keeps the rest.
InteractionSplit split_interactions(const InteractionMatrix& r, SplitRatios ratios,
                                    std::uint64_t seed);

/// Top-k recommendation lists, one per user. Users with an empty train
/// profile get an empty list.
struct RankedLists {
  Index top_k = 0;
  std::vector<std::vector<Index>> items;  // per user, best first
};

/// Content-only item-kNN scorer used as the downstream probe of imputation
/// quality. score(u, i) averages, over modalities, the mean cosine between
/// candidate i and the user's train items, where each candidate only sees
/// the train items among its k_items nearest feature neighbors (per
/// modality); a modality with no such neighbor contributes 0. Items already
/// in the user's train profile are never returned. Ties break toward the
/// smaller item index.
RankedLists knn_recommend(const InteractionMatrix& train, const FeatureBundle& features,
                          Index k_items, Index top_k);

/// Mean over users with a non-empty test set of
/// |top-k of ranked(u), intersected with test(u)| / |test(u)|.
/// Throws Error(State) when no user has test items.
double recall_at_k(const RankedLists& ranked, const InteractionMatrix& test, Index k);

/// Mean cosine similarity between imputed and ground-truth rows over the
/// missing items. A zero vector on either side contributes cosine 0.
/// Throws Error(State) when the mask has no missing item.
double reconstruction_cosine(const ModalityFeatureSet& imputed,
                             const ModalityFeatureSet& truth, const MissingMask& mask);

/// Deterministic top-k selection by (score descending, index ascending),
/// skipping excluded indices. Exposed so ranking invariances can be tested
/// directly.
std::vector<Index> rank_top_k(std::span<const double> scores, Index top_k,
                              const std::vector<std::uint8_t>& excluded);

enum class ImputeMethod { Zeros, Mean, Random, FeatProp };

constexpr const char* to_string(ImputeMethod m) noexcept {
  switch (m) {
    case ImputeMethod::Zeros: return "zeros";
    case ImputeMethod::Mean: return "mean";
    case ImputeMethod::Random: return "random";
    case ImputeMethod::FeatProp: return "featprop";
  }
  return "?";
}

/// Parses "zeros" / "mean" / "random" / "featprop".
ImputeMethod parse_method(const std::string& name);

/// One (method, missing rate, seed) cell of the sweep.
struct MetricReport {
  ImputeMethod method = ImputeMethod::Zeros;
  double missing_rate = 0.0;
  std::uint64_t seed = 0;
  Index k = 0;
  double recall_at_k = 0.0;
  std::vector<double> cosine_per_modality;  // aligned with SweepReport::modality_ids
  double runtime_ms = 0.0;
};

struct SweepReport {
  std::vector<std::string> modality_ids;
  Index k = 0;
  std::vector<MetricReport> rows;
};

/// Ground truth a sweep runs against: a train/valid/test split plus the
/// complete (pre-blanking) feature bundle.
struct SweepDataset {
  InteractionSplit split;
  FeatureBundle truth;
};

struct SweepConfig {
  std::vector<ImputeMethod> methods;
  std::vector<double> rates;
  std::vector<std::uint64_t> seeds;
  PropagationConfig prop;
  FallbackPolicy fallback = FallbackPolicy::None;
  Index k = 20;               // recall cutoff
  Index knn_candidates = 100; // neighbor-list width of the kNN probe
  double random_low = 0.0;
  double random_high = 1.0;
  unsigned jobs = 1;          // concurrent cells; result independent of it
};

/// Runs the Cartesian product of methods x rates x seeds. Each cell samples
/// its mask from (num_items, rate, seed), imputes, and evaluates recall and
/// per-modality reconstruction cosine. Rows come back in list order and are
/// identical across reruns and job counts, except for runtime_ms. A failing
/// cell aborts the sweep with the cell identity in the error message.
SweepReport run_sweep(const SweepDataset& data, const SweepConfig& cfg);

}  // namespace featprop
