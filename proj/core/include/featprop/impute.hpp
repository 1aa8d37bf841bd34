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
#include <vector>

#include "featprop/features.hpp"
#include "featprop/graph.hpp"

namespace featprop {

/// Knobs of the propagation-based imputer.
struct PropagationConfig {
  std::uint32_t max_layers = 20;   // L
  double tolerance = 1e-6;         // 0 disables early stopping
  Index sparsification_n = 20;     // top-n kept per row
  bool exclude_diagonal = true;    // self co-counts do not compete in top-n
};

/// What to do with missing items whose graph component contains no known
/// item. None leaves them at their zero initialization (and reports them);
/// Mean fills them with the per-modality known mean afterwards.
enum class FallbackPolicy { None, Mean };

struct ModalityDiagnostics {
  std::string modality_id;
  std::uint32_t layers_run = 0;
  double final_residual = 0.0;  // L-infinity change at the last step
};

struct ImputationResult {
  FeatureBundle features;
  std::vector<ModalityDiagnostics> diagnostics;  // aligned with features
  std::vector<Index> unreachable_items;          // sorted, FeatProp only
};

/// Baseline: missing rows become all-zero vectors.
ImputationResult impute_zeros(const FeatureBundle& bundle, const MissingMask& mask);

/// Baseline: missing rows become the column mean of the known rows of the
/// same modality. Throws Error(State) when every item is missing.
ImputationResult impute_mean(const FeatureBundle& bundle, const MissingMask& mask);

/// Baseline: missing rows are filled i.i.d. uniform on [low, high) from a
/// seeded stream. Throws Error(Parameter) unless low < high.
ImputationResult impute_random(const FeatureBundle& bundle, const MissingMask& mask,
                               std::uint64_t seed, double low, double high);

/// Feature propagation over a prebuilt normalized item-item graph. Per
/// modality, missing rows start at zero and the iteration alternates one
/// diffusion step with resetting known rows to their original values, until
/// the L-infinity change drops below tolerance * (1 + max|F|) or max_layers
/// steps have run. Known rows of the output are byte-identical to the
/// input. Missing items unreachable from every known item are reported and
/// left at their initialization (or mean-filled under FallbackPolicy::Mean).
ImputationResult featprop_impute(const FeatureBundle& bundle, const MissingMask& mask,
                                 const ItemItemGraph& normalized,
                                 const PropagationConfig& cfg,
                                 FallbackPolicy fallback = FallbackPolicy::None);

/// Convenience overload that first builds the graph from the interactions:
/// project -> top-n sparsify (cfg.sparsification_n, cfg.exclude_diagonal)
/// -> symmetric normalization.
ImputationResult featprop_impute(const FeatureBundle& bundle, const MissingMask& mask,
                                 const InteractionMatrix& interactions,
                                 const PropagationConfig& cfg,
                                 FallbackPolicy fallback = FallbackPolicy::None);

/// Smoothness of f over the sparsified structure underlying a normalized
/// graph, with raw degrees:
///
///   E(f) = 1/2 * sum over undirected edges (i, j) of
///          || f_i / sqrt(d_i) - f_j / sqrt(d_j) ||^2
///
/// where d is the degree vector the normalization divided by. Each
/// undirected edge contributes exactly one term to the sum.
double dirichlet_energy(const ItemItemGraph& g, const DenseMatrix& f);

/// Fixed-point diagnostic: max over missing items i of the L-infinity
/// difference between f_i and the propagated row (g * f)_i. Zero exactly at
/// the propagation fixed point restricted to missing rows; zero by
/// convention when nothing is missing.
double harmonic_residual(const ItemItemGraph& g, const DenseMatrix& f,
                         const MissingMask& mask);

/// Missing items whose component in the graph contains no known item,
/// sorted ascending.
std::vector<Index> unreachable_missing_items(const ItemItemGraph& g,
                                             const MissingMask& mask);

namespace detail {
/// Core masked propagation loop with an explicit initialization of the
/// missing rows (used by tests to probe initialization independence; the
/// public API always starts missing rows at zero). Returns the imputed
/// matrix; layers_run/final_residual are written to the out-parameters.
DenseMatrix propagate_to_fixed_point(const ItemItemGraph& g, const DenseMatrix& original,
                                     const MissingMask& mask, const PropagationConfig& cfg,
                                     const DenseMatrix* missing_init,
                                     std::uint32_t& layers_run, double& final_residual);
}  // namespace detail

}  // namespace featprop
