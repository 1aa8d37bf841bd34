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

#include "featprop/impute.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <future>
#include <string>

#include "featprop/rng.hpp"

namespace featprop {

namespace {

void check_bundle_mask(const FeatureBundle& bundle, const MissingMask& mask) {
  bundle.validate();
  if (bundle.num_items() != mask.num_items) {
    throw Error(ErrorCategory::Shape,
                "impute: bundle has " + std::to_string(bundle.num_items()) +
                    " items, mask has " + std::to_string(mask.num_items));
  }
}

void copy_row(DenseMatrix& dst, const DenseMatrix& src, Index row) {
  std::memcpy(dst.values.data() + static_cast<std::size_t>(row) * dst.cols,
              src.values.data() + static_cast<std::size_t>(row) * src.cols,
              dst.cols * sizeof(double));
}

ImputationResult make_baseline_result(FeatureBundle features) {
  ImputationResult result;
  result.features = std::move(features);
  for (const auto& m : result.features.modalities) {
    result.diagnostics.push_back({m.modality_id, 0, 0.0});
  }
  return result;
}

}  // namespace

ImputationResult impute_zeros(const FeatureBundle& bundle, const MissingMask& mask) {
  check_bundle_mask(bundle, mask);
  return make_baseline_result(blank_missing(bundle, mask));
}

ImputationResult impute_mean(const FeatureBundle& bundle, const MissingMask& mask) {
  check_bundle_mask(bundle, mask);
  FeatureBundle out = bundle;
  for (auto& m : out.modalities) {
    const std::vector<double> mean = known_mean(m, mask);
    for (Index i = 0; i < mask.num_items; ++i) {
      if (mask.is_known(i)) continue;
      auto row = m.data.row(i);
      std::copy(mean.begin(), mean.end(), row.begin());
    }
  }
  return make_baseline_result(std::move(out));
}

ImputationResult impute_random(const FeatureBundle& bundle, const MissingMask& mask,
                               std::uint64_t seed, double low, double high) {
  check_bundle_mask(bundle, mask);
  if (!(low < high)) {
    throw Error(ErrorCategory::Parameter, "impute_random: low must be < high");
  }
  FeatureBundle out = bundle;
  rng::Stream stream(seed);
  for (auto& m : out.modalities) {
    for (Index i = 0; i < mask.num_items; ++i) {
      if (mask.is_known(i)) continue;
      auto row = m.data.row(i);
      for (double& v : row) v = stream.next_uniform(low, high);
    }
  }
  return make_baseline_result(std::move(out));
}

std::vector<Index> unreachable_missing_items(const ItemItemGraph& g,
                                             const MissingMask& mask) {
  if (g.num_items != mask.num_items) {
    throw Error(ErrorCategory::Shape, "unreachable_missing_items: size mismatch");
  }
  // BFS from all known items at once.
  std::vector<std::uint8_t> reached(g.num_items, 0);
  std::vector<Index> queue;
  queue.reserve(g.num_items);
  for (Index i = 0; i < g.num_items; ++i) {
    if (mask.is_known(i)) {
      reached[i] = 1;
      queue.push_back(i);
    }
  }
  for (std::size_t head = 0; head < queue.size(); ++head) {
    for (Index j : g.neighbors_of(queue[head])) {
      if (!reached[j]) {
        reached[j] = 1;
        queue.push_back(j);
      }
    }
  }
  std::vector<Index> unreachable;
  for (Index i = 0; i < g.num_items; ++i) {
    if (!reached[i]) unreachable.push_back(i);
  }
  return unreachable;
}

namespace detail {

DenseMatrix propagate_to_fixed_point(const ItemItemGraph& g, const DenseMatrix& original,
                                     const MissingMask& mask, const PropagationConfig& cfg,
                                     const DenseMatrix* missing_init,
                                     std::uint32_t& layers_run, double& final_residual) {
  if (cfg.max_layers < 1) {
    throw Error(ErrorCategory::Parameter, "propagation: max_layers must be >= 1");
  }
  if (cfg.tolerance < 0.0) {
    throw Error(ErrorCategory::Parameter, "propagation: tolerance must be >= 0");
  }

  DenseMatrix f = original;
  for (Index i = 0; i < mask.num_items; ++i) {
    if (mask.is_known(i)) continue;
    auto row = f.row(i);
    if (missing_init != nullptr) {
      const auto init = missing_init->row(i);
      std::copy(init.begin(), init.end(), row.begin());
    } else {
      std::fill(row.begin(), row.end(), 0.0);
    }
  }

  layers_run = 0;
  final_residual = 0.0;
  for (std::uint32_t layer = 1; layer <= cfg.max_layers; ++layer) {
    DenseMatrix next = propagate_step(g, f);
    for (Index i = 0; i < mask.num_items; ++i) {
      if (mask.is_known(i)) copy_row(next, original, i);
    }
    const double delta = max_abs_diff(next, f);
    f = std::move(next);
    layers_run = layer;
    final_residual = delta;
    if (delta < cfg.tolerance * (1.0 + f.max_abs())) break;
  }
  return f;
}

}  // namespace detail

ImputationResult featprop_impute(const FeatureBundle& bundle, const MissingMask& mask,
                                 const ItemItemGraph& normalized,
                                 const PropagationConfig& cfg, FallbackPolicy fallback) {
  check_bundle_mask(bundle, mask);
  if (normalized.stage != GraphStage::Normalized) {
    throw Error(ErrorCategory::State,
                "featprop_impute: graph must be at the normalized stage");
  }
  if (normalized.num_items != bundle.num_items()) {
    throw Error(ErrorCategory::Shape,
                "featprop_impute: graph has " + std::to_string(normalized.num_items) +
                    " items, bundle has " + std::to_string(bundle.num_items()));
  }
  if (mask.count_known() == 0) {
    throw Error(ErrorCategory::State, "featprop_impute: mask has no known items");
  }

  ImputationResult result;
  result.unreachable_items = unreachable_missing_items(normalized, mask);
  result.features.modalities.resize(bundle.modalities.size());
  result.diagnostics.resize(bundle.modalities.size());

  const auto run_modality = [&](std::size_t m) {
    const ModalityFeatureSet& src = bundle.modalities[m];
    ModalityFeatureSet out;
    out.modality_id = src.modality_id;
    std::uint32_t layers = 0;
    double residual = 0.0;
    out.data = detail::propagate_to_fixed_point(normalized, src.data, mask, cfg,
                                                nullptr, layers, residual);
    if (fallback == FallbackPolicy::Mean && !result.unreachable_items.empty()) {
      const std::vector<double> mean = known_mean(src, mask);
      for (Index i : result.unreachable_items) {
        auto row = out.data.row(i);
        std::copy(mean.begin(), mean.end(), row.begin());
      }
    }
    result.features.modalities[m] = std::move(out);
    result.diagnostics[m] = {src.modality_id, layers, residual};
  };

  // Modalities are independent; run them as concurrent tasks when there is
  // more than one.
  if (bundle.modalities.size() > 1) {
    std::vector<std::future<void>> tasks;
    tasks.reserve(bundle.modalities.size());
    for (std::size_t m = 0; m < bundle.modalities.size(); ++m) {
      tasks.push_back(std::async(std::launch::async, run_modality, m));
    }
    for (auto& t : tasks) t.get();
  } else if (!bundle.modalities.empty()) {
    run_modality(0);
  }
  return result;
}

ImputationResult featprop_impute(const FeatureBundle& bundle, const MissingMask& mask,
                                 const InteractionMatrix& interactions,
                                 const PropagationConfig& cfg, FallbackPolicy fallback) {
  if (interactions.num_items != bundle.num_items()) {
    throw Error(ErrorCategory::Shape,
                "featprop_impute: interactions have " +
                    std::to_string(interactions.num_items) + " items, bundle has " +
                    std::to_string(bundle.num_items()));
  }
  const ItemItemGraph normalized = normalize_symmetric(
      sparsify_topn(project_item_item(interactions), cfg.sparsification_n,
                    cfg.exclude_diagonal));
  return featprop_impute(bundle, mask, normalized, cfg, fallback);
}

double dirichlet_energy(const ItemItemGraph& g, const DenseMatrix& f) {
  if (g.stage != GraphStage::Normalized) {
    throw Error(ErrorCategory::State,
                "dirichlet_energy: graph must be at the normalized stage");
  }
  if (f.rows != g.num_items) {
    throw Error(ErrorCategory::Shape, "dirichlet_energy: feature/graph size mismatch");
  }
  // Each undirected edge of the sparsified structure contributes once, with
  // unit weight and the raw degrees stored by the normalization.
  double total = 0.0;
  for (Index i = 0; i < g.num_items; ++i) {
    const double inv_i = g.degree[i] > 0.0 ? 1.0 / std::sqrt(g.degree[i]) : 0.0;
    for (Index j : g.neighbors_of(i)) {
      if (j <= i) continue;
      const double inv_j = g.degree[j] > 0.0 ? 1.0 / std::sqrt(g.degree[j]) : 0.0;
      const auto fi = f.row(i);
      const auto fj = f.row(j);
      for (std::size_t c = 0; c < f.cols; ++c) {
        const double diff = fi[c] * inv_i - fj[c] * inv_j;
        total += diff * diff;
      }
    }
  }
  return 0.5 * total;
}

double harmonic_residual(const ItemItemGraph& g, const DenseMatrix& f,
                         const MissingMask& mask) {
  if (f.rows != mask.num_items) {
    throw Error(ErrorCategory::Shape, "harmonic_residual: feature/mask size mismatch");
  }
  const DenseMatrix propagated = propagate_step(g, f);
  double residual = 0.0;
  for (Index i = 0; i < mask.num_items; ++i) {
    if (mask.is_known(i)) continue;
    const auto a = f.row(i);
    const auto b = propagated.row(i);
    for (std::size_t c = 0; c < f.cols; ++c) {
      residual = std::max(residual, std::abs(a[c] - b[c]));
    }
  }
  return residual;
}

}  // namespace featprop
