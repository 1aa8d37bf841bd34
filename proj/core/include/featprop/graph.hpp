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
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "featprop/dense.hpp"
#include "featprop/error.hpp"

namespace featprop {

using Index = std::uint32_t;

/// Sparse binary user x item interaction matrix R in compressed-row form.
/// Every stored entry has value 1 (implicit feedback); column indices are
/// sorted and unique within each row.
struct InteractionMatrix {
  Index num_users = 0;
  Index num_items = 0;
  std::vector<std::uint64_t> row_offsets;  // size num_users + 1
  std::vector<Index> col_indices;          // item ids, sorted per row

  /// Builds a matrix from (user, item) pairs. Duplicate pairs collapse to a
  /// single entry; out-of-range indices throw.
  static InteractionMatrix from_pairs(Index num_users, Index num_items,
                                      std::vector<std::pair<Index, Index>> pairs);

  std::span<const Index> items_of(Index user) const {
    return {col_indices.data() + row_offsets[user],
            col_indices.data() + row_offsets[user + 1]};
  }

  std::uint64_t nnz() const { return col_indices.size(); }

  /// Throws Error(Internal) if the CSR invariants do not hold.
  void validate() const;

  bool operator==(const InteractionMatrix&) const = default;
};

/// The three lives of the item-item graph: raw co-interaction counts
/// (R transposed times R), the binary top-n sparsified graph, and the
/// symmetrically normalized graph used by the propagation kernel.
enum class GraphStage : std::uint32_t {
  RawCoCounts = 0,
  Sparsified = 1,
  Normalized = 2,
};

constexpr const char* to_string(GraphStage s) noexcept {
  switch (s) {
    case GraphStage::RawCoCounts: return "raw-co-counts";
    case GraphStage::Sparsified: return "sparsified";
    case GraphStage::Normalized: return "normalized";
  }
  return "?";
}

/// Sparse symmetric item x item graph in compressed-row form with sorted
/// column indices. `degree` holds the row sums of the *sparsified* stage and
/// is populated once the graph is normalized; it is the degree vector the
/// normalization divided by, kept around for energy diagnostics.
struct ItemItemGraph {
  Index num_items = 0;
  GraphStage stage = GraphStage::RawCoCounts;
  std::vector<std::uint64_t> row_offsets;  // size num_items + 1
  std::vector<Index> col_indices;
  std::vector<double> weights;
  std::vector<double> degree;  // empty until Normalized

  std::uint64_t nnz() const { return col_indices.size(); }

  std::span<const Index> neighbors_of(Index item) const {
    return {col_indices.data() + row_offsets[item],
            col_indices.data() + row_offsets[item + 1]};
  }
  std::span<const double> weights_of(Index item) const {
    return {weights.data() + row_offsets[item],
            weights.data() + row_offsets[item + 1]};
  }

  void validate() const;

  bool operator==(const ItemItemGraph&) const = default;
};

/// Projects the user-item interactions onto the item-item co-interaction
/// graph: entry (i, j) counts the users who interacted with both i and j,
/// and the diagonal holds item popularity counts.
///
/// Throws Error(Parameter) when the interaction matrix has zero items.
ItemItemGraph project_item_item(const InteractionMatrix& r);

/// Keeps, per row, the n largest entries of the raw co-count graph
/// (excluding the diagonal unless told otherwise), binarizes them, and then
/// symmetrizes the result by logical OR with its transpose. Ties at the
/// cutoff value break toward the smaller item index so the selection is
/// reproducible.
ItemItemGraph sparsify_topn(const ItemItemGraph& g, Index n,
                            bool exclude_diagonal = true);

/// Rescales the binary sparsified graph by inverse square-root degrees on
/// both sides: weight(i, j) = d_i^{-1/2} * d_j^{-1/2}. Isolated rows keep
/// degree 0 and stay all-zero (d^{-1/2} is taken as 0).
ItemItemGraph normalize_symmetric(const ItemItemGraph& g);

/// One diffusion step: returns the normalized adjacency times f. The input
/// is not modified. Rows of the output may be computed concurrently;
/// within-row accumulation follows the sorted column order, so the result
/// does not depend on the degree of parallelism.
///
/// `threads` = 0 picks a thread count automatically.
DenseMatrix propagate_step(const ItemItemGraph& g, const DenseMatrix& f,
                           unsigned threads = 0);

/// Weighted row sums at any stage.
std::vector<double> degree_vector(const ItemItemGraph& g);

namespace detail {
/// Splits [0, count) into contiguous chunks and runs fn(begin, end) on each,
/// possibly from several threads. fn must not touch overlapping state.
void parallel_chunks(std::size_t count, unsigned threads,
                     const std::function<void(std::size_t, std::size_t)>& fn);
}  // namespace detail

}  // namespace featprop
