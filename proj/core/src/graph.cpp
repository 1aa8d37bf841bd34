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

#include "featprop/graph.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <thread>

namespace featprop {

namespace detail {

void parallel_chunks(std::size_t count, unsigned threads,
                     const std::function<void(std::size_t, std::size_t)>& fn) {
  if (count == 0) return;
  if (threads <= 1 || count == 1) {
    fn(0, count);
    return;
  }
  const std::size_t workers = std::min<std::size_t>(threads, count);
  const std::size_t chunk = (count + workers - 1) / workers;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(count, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&fn, begin, end] { fn(begin, end); });
  }
  for (auto& t : pool) t.join();
}

}  // namespace detail

InteractionMatrix InteractionMatrix::from_pairs(
    Index num_users, Index num_items, std::vector<std::pair<Index, Index>> pairs) {
  for (const auto& [u, i] : pairs) {
    if (u >= num_users) {
      throw Error(ErrorCategory::Shape,
                  "interaction user index " + std::to_string(u) + " out of range");
    }
    if (i >= num_items) {
      throw Error(ErrorCategory::Shape,
                  "interaction item index " + std::to_string(i) + " out of range");
    }
  }
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());

  InteractionMatrix r;
  r.num_users = num_users;
  r.num_items = num_items;
  r.row_offsets.assign(static_cast<std::size_t>(num_users) + 1, 0);
  r.col_indices.reserve(pairs.size());
  for (const auto& [u, i] : pairs) {
    r.row_offsets[u + 1]++;
    r.col_indices.push_back(i);
  }
  for (std::size_t u = 0; u < num_users; ++u) {
    r.row_offsets[u + 1] += r.row_offsets[u];
  }
  return r;
}

void InteractionMatrix::validate() const {
  if (row_offsets.size() != static_cast<std::size_t>(num_users) + 1 ||
      row_offsets.front() != 0 || row_offsets.back() != col_indices.size()) {
    throw Error(ErrorCategory::Internal, "interaction matrix: bad row offsets");
  }
  for (Index u = 0; u < num_users; ++u) {
    if (row_offsets[u] > row_offsets[u + 1]) {
      throw Error(ErrorCategory::Internal, "interaction matrix: decreasing offsets");
    }
    for (std::uint64_t k = row_offsets[u]; k < row_offsets[u + 1]; ++k) {
      if (col_indices[k] >= num_items) {
        throw Error(ErrorCategory::Internal, "interaction matrix: item out of range");
      }
      if (k > row_offsets[u] && col_indices[k - 1] >= col_indices[k]) {
        throw Error(ErrorCategory::Internal,
                    "interaction matrix: unsorted or duplicate items in a row");
      }
    }
  }
}

void ItemItemGraph::validate() const {
  if (row_offsets.size() != static_cast<std::size_t>(num_items) + 1 ||
      row_offsets.front() != 0 || row_offsets.back() != col_indices.size() ||
      weights.size() != col_indices.size()) {
    throw Error(ErrorCategory::Internal, "item-item graph: bad CSR layout");
  }
  for (Index i = 0; i < num_items; ++i) {
    for (std::uint64_t k = row_offsets[i]; k < row_offsets[i + 1]; ++k) {
      if (col_indices[k] >= num_items) {
        throw Error(ErrorCategory::Internal, "item-item graph: column out of range");
      }
      if (k > row_offsets[i] && col_indices[k - 1] >= col_indices[k]) {
        throw Error(ErrorCategory::Internal, "item-item graph: unsorted row");
      }
      if (weights[k] < 0.0) {
        throw Error(ErrorCategory::Internal, "item-item graph: negative weight");
      }
    }
  }
  if (stage == GraphStage::Normalized && degree.size() != num_items) {
    throw Error(ErrorCategory::Internal, "item-item graph: missing degree vector");
  }
}

ItemItemGraph project_item_item(const InteractionMatrix& r) {
  if (r.num_items == 0) {
    throw Error(ErrorCategory::Parameter,
                "project_item_item: interaction matrix has zero items (empty graph)");
  }

  // Transpose R so each item knows its users.
  std::vector<std::uint64_t> t_offsets(static_cast<std::size_t>(r.num_items) + 1, 0);
  for (Index item : r.col_indices) t_offsets[item + 1]++;
  for (Index i = 0; i < r.num_items; ++i) t_offsets[i + 1] += t_offsets[i];
  std::vector<Index> t_users(r.col_indices.size());
  {
    std::vector<std::uint64_t> cursor(t_offsets.begin(), t_offsets.end() - 1);
    for (Index u = 0; u < r.num_users; ++u) {
      for (Index item : r.items_of(u)) t_users[cursor[item]++] = u;
    }
  }

  // Row-by-row accumulation of (R^T R)_i with a dense scatter buffer.
  ItemItemGraph g;
  g.num_items = r.num_items;
  g.stage = GraphStage::RawCoCounts;
  g.row_offsets.assign(static_cast<std::size_t>(r.num_items) + 1, 0);

  std::vector<std::uint32_t> counts(r.num_items, 0);
  std::vector<Index> touched;
  for (Index i = 0; i < r.num_items; ++i) {
    for (std::uint64_t k = t_offsets[i]; k < t_offsets[i + 1]; ++k) {
      const Index u = t_users[k];
      for (Index j : r.items_of(u)) {
        if (counts[j]++ == 0) touched.push_back(j);
      }
    }
    std::sort(touched.begin(), touched.end());
    for (Index j : touched) {
      g.col_indices.push_back(j);
      g.weights.push_back(static_cast<double>(counts[j]));
      counts[j] = 0;
    }
    g.row_offsets[i + 1] = g.col_indices.size();
    touched.clear();
  }
  return g;
}

ItemItemGraph sparsify_topn(const ItemItemGraph& g, Index n, bool exclude_diagonal) {
  if (g.stage != GraphStage::RawCoCounts) {
    throw Error(ErrorCategory::State,
                std::string("sparsify_topn: expected raw co-count stage, got ") +
                    to_string(g.stage));
  }
  if (n == 0) {
    throw Error(ErrorCategory::Parameter, "sparsify_topn: n must be >= 1");
  }

  std::vector<std::pair<Index, Index>> edges;
  std::vector<std::pair<double, Index>> candidates;
  for (Index i = 0; i < g.num_items; ++i) {
    candidates.clear();
    const auto cols = g.neighbors_of(i);
    const auto vals = g.weights_of(i);
    for (std::size_t k = 0; k < cols.size(); ++k) {
      if (exclude_diagonal && cols[k] == i) continue;
      candidates.emplace_back(vals[k], cols[k]);
    }
    const auto by_value_then_index = [](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first > b.first;
      return a.second < b.second;
    };
    if (candidates.size() > n) {
      std::partial_sort(candidates.begin(), candidates.begin() + n, candidates.end(),
                        by_value_then_index);
      candidates.resize(n);
    }
    for (const auto& [value, j] : candidates) edges.emplace_back(i, j);
  }

  // Symmetrize by logical OR with the transpose.
  const std::size_t selected = edges.size();
  edges.reserve(selected * 2);
  for (std::size_t k = 0; k < selected; ++k) {
    edges.emplace_back(edges[k].second, edges[k].first);
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

  ItemItemGraph out;
  out.num_items = g.num_items;
  out.stage = GraphStage::Sparsified;
  out.row_offsets.assign(static_cast<std::size_t>(g.num_items) + 1, 0);
  out.col_indices.reserve(edges.size());
  out.weights.assign(edges.size(), 1.0);
  for (const auto& [i, j] : edges) {
    out.row_offsets[i + 1]++;
    out.col_indices.push_back(j);
  }
  for (Index i = 0; i < g.num_items; ++i) out.row_offsets[i + 1] += out.row_offsets[i];
  return out;
}

namespace {

void require_symmetric_binary(const ItemItemGraph& g) {
  std::vector<std::pair<Index, Index>> forward;
  forward.reserve(g.nnz());
  for (Index i = 0; i < g.num_items; ++i) {
    const auto cols = g.neighbors_of(i);
    const auto vals = g.weights_of(i);
    for (std::size_t k = 0; k < cols.size(); ++k) {
      if (vals[k] != 1.0) {
        throw Error(ErrorCategory::State,
                    "normalize_symmetric: graph is not binary");
      }
      forward.emplace_back(cols[k], i);
    }
  }
  std::sort(forward.begin(), forward.end());
  std::size_t cursor = 0;
  for (Index i = 0; i < g.num_items; ++i) {
    for (Index j : g.neighbors_of(i)) {
      if (cursor >= forward.size() || forward[cursor] != std::make_pair(i, j)) {
        throw Error(ErrorCategory::State,
                    "normalize_symmetric: graph is not symmetric");
      }
      ++cursor;
    }
  }
}

}  // namespace

ItemItemGraph normalize_symmetric(const ItemItemGraph& g) {
  if (g.stage != GraphStage::Sparsified) {
    throw Error(ErrorCategory::State,
                std::string("normalize_symmetric: expected sparsified stage, got ") +
                    to_string(g.stage));
  }
  require_symmetric_binary(g);

  ItemItemGraph out = g;
  out.stage = GraphStage::Normalized;
  out.degree.assign(g.num_items, 0.0);
  std::vector<double> inv_sqrt(g.num_items, 0.0);
  for (Index i = 0; i < g.num_items; ++i) {
    const double d =
        static_cast<double>(g.row_offsets[i + 1] - g.row_offsets[i]);
    out.degree[i] = d;
    inv_sqrt[i] = d > 0.0 ? 1.0 / std::sqrt(d) : 0.0;
  }
  for (Index i = 0; i < g.num_items; ++i) {
    for (std::uint64_t k = g.row_offsets[i]; k < g.row_offsets[i + 1]; ++k) {
      out.weights[k] = inv_sqrt[i] * inv_sqrt[g.col_indices[k]];
    }
  }
  return out;
}

DenseMatrix propagate_step(const ItemItemGraph& g, const DenseMatrix& f,
                           unsigned threads) {
  if (g.stage != GraphStage::Normalized) {
    throw Error(ErrorCategory::State,
                std::string("propagate_step: expected normalized stage, got ") +
                    to_string(g.stage));
  }
  if (f.rows != g.num_items) {
    throw Error(ErrorCategory::Shape,
                "propagate_step: feature matrix has " + std::to_string(f.rows) +
                    " rows, graph has " + std::to_string(g.num_items) + " items");
  }

  if (threads == 0) {
    const std::size_t work = f.rows * f.cols;
    threads = work >= (1u << 16) ? std::max(1u, std::thread::hardware_concurrency()) : 1;
  }

  DenseMatrix out(f.rows, f.cols, 0.0);
  detail::parallel_chunks(f.rows, threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const auto acc = out.row(i);
      for (std::uint64_t k = g.row_offsets[i]; k < g.row_offsets[i + 1]; ++k) {
        const double w = g.weights[k];
        const auto src = f.row(g.col_indices[k]);
        for (std::size_t c = 0; c < f.cols; ++c) acc[c] += w * src[c];
      }
    }
  });
  return out;
}

std::vector<double> degree_vector(const ItemItemGraph& g) {
  std::vector<double> sums(g.num_items, 0.0);
  for (Index i = 0; i < g.num_items; ++i) {
    double s = 0.0;
    for (double w : g.weights_of(i)) s += w;
    sums[i] = s;
  }
  return sums;
}

}  // namespace featprop
