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

#include "featprop/eval.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <mutex>
#include <numeric>
#include <thread>

#include "featprop/log.hpp"
#include "featprop/rng.hpp"

namespace featprop {

InteractionSplit split_interactions(const InteractionMatrix& r, SplitRatios ratios,
                                    std::uint64_t seed) {
  if (!(ratios.train > 0.0 && ratios.valid > 0.0 && ratios.test > 0.0) ||
      std::abs(ratios.train + ratios.valid + ratios.test - 1.0) > 1e-9) {
    throw Error(ErrorCategory::Parameter,
                "split_interactions: ratios must be positive and sum to 1");
  }

  std::vector<std::pair<Index, Index>> train_pairs;
  std::vector<std::pair<Index, Index>> valid_pairs;
  std::vector<std::pair<Index, Index>> test_pairs;
  std::vector<Index> items;
  for (Index u = 0; u < r.num_users; ++u) {
    const auto row = r.items_of(u);
    items.assign(row.begin(), row.end());
    const std::size_t n = items.size();
    if (n < 3) {
      for (Index it : items) train_pairs.emplace_back(u, it);
      continue;
    }
    rng::Stream stream(rng::mix(seed, u));
    stream.shuffle(items.data(), items.size());
    const auto n_valid = static_cast<std::size_t>(
        std::floor(static_cast<double>(n) * ratios.valid));
    const auto n_test = static_cast<std::size_t>(
        std::floor(static_cast<double>(n) * ratios.test));
    const std::size_t n_train = n - n_valid - n_test;
    for (std::size_t k = 0; k < n; ++k) {
      if (k < n_train) {
        train_pairs.emplace_back(u, items[k]);
      } else if (k < n_train + n_valid) {
        valid_pairs.emplace_back(u, items[k]);
      } else {
        test_pairs.emplace_back(u, items[k]);
      }
    }
  }

  InteractionSplit split;
  split.train = InteractionMatrix::from_pairs(r.num_users, r.num_items, std::move(train_pairs));
  split.valid = InteractionMatrix::from_pairs(r.num_users, r.num_items, std::move(valid_pairs));
  split.test = InteractionMatrix::from_pairs(r.num_users, r.num_items, std::move(test_pairs));
  return split;
}

std::vector<Index> rank_top_k(std::span<const double> scores, Index top_k,
                              const std::vector<std::uint8_t>& excluded) {
  std::vector<Index> candidates;
  candidates.reserve(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (i < excluded.size() && excluded[i]) continue;
    candidates.push_back(static_cast<Index>(i));
  }
  const auto better = [&scores](Index a, Index b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return a < b;
  };
  const std::size_t keep = std::min<std::size_t>(top_k, candidates.size());
  std::partial_sort(candidates.begin(), candidates.begin() + keep, candidates.end(), better);
  candidates.resize(keep);
  return candidates;
}

namespace {

// L2-normalized copy of the feature rows; zero rows stay zero so they are
// cosine-0 against everything.
DenseMatrix unit_rows(const DenseMatrix& f) {
  DenseMatrix out = f;
  for (std::size_t i = 0; i < f.rows; ++i) {
    auto row = out.row(i);
    double norm2 = 0.0;
    for (double v : row) norm2 += v * v;
    if (norm2 > 0.0) {
      const double inv = 1.0 / std::sqrt(norm2);
      for (double& v : row) v *= inv;
    }
  }
  return out;
}

struct NeighborLists {
  // CSR over items: for item j, the (i, cos(i, j)) pairs of all items i
  // that keep j in their k_items nearest-neighbor list.
  std::vector<std::uint64_t> offsets;
  std::vector<Index> sources;
  std::vector<double> cosines;
};

NeighborLists reverse_neighbor_lists(const DenseMatrix& unit, Index k_items) {
  const Index n = static_cast<Index>(unit.rows);
  std::vector<std::pair<Index, double>> forward;  // (neighbor j, cos) per item
  forward.reserve(static_cast<std::size_t>(n) * std::min<Index>(k_items, n));
  std::vector<std::uint64_t> forward_offsets(static_cast<std::size_t>(n) + 1, 0);

  std::vector<std::pair<double, Index>> sims(n);
  for (Index i = 0; i < n; ++i) {
    const auto fi = unit.row(i);
    for (Index j = 0; j < n; ++j) {
      double dot = 0.0;
      const auto fj = unit.row(j);
      for (std::size_t c = 0; c < unit.cols; ++c) dot += fi[c] * fj[c];
      sims[j] = {dot, j};
    }
    // Drop self, keep the k_items most similar (ties toward small index).
    sims[i].first = -std::numeric_limits<double>::infinity();
    const auto by_cos_then_index = [](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first > b.first;
      return a.second < b.second;
    };
    const Index keep = std::min<Index>(k_items, n > 0 ? n - 1 : 0);
    std::partial_sort(sims.begin(), sims.begin() + keep, sims.end(), by_cos_then_index);
    for (Index k = 0; k < keep; ++k) forward.emplace_back(sims[k].second, sims[k].first);
    forward_offsets[i + 1] = forward.size();
  }

  NeighborLists rev;
  rev.offsets.assign(static_cast<std::size_t>(n) + 1, 0);
  for (const auto& [j, cos] : forward) rev.offsets[j + 1]++;
  for (Index j = 0; j < n; ++j) rev.offsets[j + 1] += rev.offsets[j];
  rev.sources.resize(forward.size());
  rev.cosines.resize(forward.size());
  std::vector<std::uint64_t> cursor(rev.offsets.begin(), rev.offsets.end() - 1);
  for (Index i = 0; i < n; ++i) {
    for (std::uint64_t k = forward_offsets[i]; k < forward_offsets[i + 1]; ++k) {
      const auto& [j, cos] = forward[k];
      rev.sources[cursor[j]] = i;
      rev.cosines[cursor[j]] = cos;
      ++cursor[j];
    }
  }
  return rev;
}

}  // namespace

RankedLists knn_recommend(const InteractionMatrix& train, const FeatureBundle& features,
                          Index k_items, Index top_k) {
  features.validate();
  if (features.num_items() != train.num_items) {
    throw Error(ErrorCategory::Shape,
                "knn_recommend: features must cover all items (" +
                    std::to_string(features.num_items()) + " vs " +
                    std::to_string(train.num_items) + ")");
  }
  if (k_items < 1 || top_k < 1) {
    throw Error(ErrorCategory::Parameter, "knn_recommend: k_items and top_k must be >= 1");
  }

  const std::size_t num_modalities = features.modalities.size();
  std::vector<NeighborLists> rev(num_modalities);
  for (std::size_t m = 0; m < num_modalities; ++m) {
    rev[m] = reverse_neighbor_lists(unit_rows(features.modalities[m].data), k_items);
  }

  const Index n = train.num_items;
  RankedLists out;
  out.top_k = top_k;
  out.items.resize(train.num_users);

  std::vector<double> score(n, 0.0);
  std::vector<double> sum(n, 0.0);
  std::vector<std::uint32_t> cnt(n, 0);
  std::vector<Index> touched;
  std::vector<Index> score_touched;
  std::vector<std::uint8_t> in_train(n, 0);

  for (Index u = 0; u < train.num_users; ++u) {
    const auto profile = train.items_of(u);
    if (profile.empty()) continue;
    for (Index j : profile) in_train[j] = 1;

    for (std::size_t m = 0; m < num_modalities; ++m) {
      for (Index j : profile) {
        for (std::uint64_t k = rev[m].offsets[j]; k < rev[m].offsets[j + 1]; ++k) {
          const Index i = rev[m].sources[k];
          if (cnt[i]++ == 0) touched.push_back(i);
          sum[i] += rev[m].cosines[k];
        }
      }
      for (Index i : touched) {
        if (score[i] == 0.0) score_touched.push_back(i);
        score[i] += sum[i] / static_cast<double>(cnt[i]);
        sum[i] = 0.0;
        cnt[i] = 0;
      }
      touched.clear();
    }
    // The per-user ranking only depends on score order, so the constant
    // 1/|modalities| factor of the mean is dropped.
    out.items[u] = rank_top_k(score, top_k, in_train);

    for (Index i : score_touched) score[i] = 0.0;
    score_touched.clear();
    for (Index j : profile) in_train[j] = 0;
  }
  return out;
}

double recall_at_k(const RankedLists& ranked, const InteractionMatrix& test, Index k) {
  if (k < 1) {
    throw Error(ErrorCategory::Parameter, "recall_at_k: k must be >= 1");
  }
  if (ranked.items.size() != test.num_users) {
    throw Error(ErrorCategory::Shape, "recall_at_k: ranked lists/test user mismatch");
  }
  double total = 0.0;
  std::uint64_t users = 0;
  for (Index u = 0; u < test.num_users; ++u) {
    const auto relevant = test.items_of(u);
    if (relevant.empty()) continue;
    const auto& list = ranked.items[u];
    const std::size_t cutoff = std::min<std::size_t>(k, list.size());
    std::uint64_t hits = 0;
    for (std::size_t p = 0; p < cutoff; ++p) {
      if (std::binary_search(relevant.begin(), relevant.end(), list[p])) ++hits;
    }
    total += static_cast<double>(hits) / static_cast<double>(relevant.size());
    ++users;
  }
  if (users == 0) {
    throw Error(ErrorCategory::State, "recall_at_k: no user has test items");
  }
  return total / static_cast<double>(users);
}

double reconstruction_cosine(const ModalityFeatureSet& imputed,
                             const ModalityFeatureSet& truth, const MissingMask& mask) {
  if (!imputed.data.same_shape(truth.data) || imputed.num_items() != mask.num_items) {
    throw Error(ErrorCategory::Shape, "reconstruction_cosine: shape mismatch");
  }
  const Index missing = mask.count_missing();
  if (missing == 0) {
    throw Error(ErrorCategory::State, "reconstruction_cosine: mask has no missing items");
  }
  double total = 0.0;
  for (Index i = 0; i < mask.num_items; ++i) {
    if (mask.is_known(i)) continue;
    const auto a = imputed.data.row(i);
    const auto b = truth.data.row(i);
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t c = 0; c < a.size(); ++c) {
      dot += a[c] * b[c];
      na += a[c] * a[c];
      nb += b[c] * b[c];
    }
    if (na > 0.0 && nb > 0.0) total += dot / (std::sqrt(na) * std::sqrt(nb));
    // zero vectors contribute cosine 0
  }
  return total / static_cast<double>(missing);
}

ImputeMethod parse_method(const std::string& name) {
  if (name == "zeros") return ImputeMethod::Zeros;
  if (name == "mean") return ImputeMethod::Mean;
  if (name == "random") return ImputeMethod::Random;
  if (name == "featprop") return ImputeMethod::FeatProp;
  throw Error(ErrorCategory::Parameter, "unknown imputation method '" + name + "'");
}

namespace {

// Stream tag separating the Random baseline's fill values from the mask
// sampling stream of the same cell seed.
constexpr std::uint64_t kRandomFillTag = 0x52414E44ULL;  // "RAND"

struct SweepCell {
  ImputeMethod method;
  double rate;
  std::uint64_t seed;
};

std::string cell_identity(const SweepCell& cell) {
  return std::string("method=") + to_string(cell.method) +
         " rate=" + std::to_string(cell.rate) + " seed=" + std::to_string(cell.seed);
}

}  // namespace

SweepReport run_sweep(const SweepDataset& data, const SweepConfig& cfg) {
  if (cfg.methods.empty() || cfg.rates.empty() || cfg.seeds.empty()) {
    throw Error(ErrorCategory::Parameter,
                "run_sweep: methods, rates, and seeds must all be non-empty");
  }
  data.truth.validate();
  if (data.truth.num_items() != data.split.train.num_items) {
    throw Error(ErrorCategory::Shape, "run_sweep: features/split item mismatch");
  }

  // The graph depends only on the train interactions and the sparsification
  // knobs, so it is shared across all cells.
  const ItemItemGraph graph = normalize_symmetric(
      sparsify_topn(project_item_item(data.split.train), cfg.prop.sparsification_n,
                    cfg.prop.exclude_diagonal));

  std::vector<SweepCell> cells;
  cells.reserve(cfg.methods.size() * cfg.rates.size() * cfg.seeds.size());
  for (ImputeMethod method : cfg.methods) {
    for (double rate : cfg.rates) {
      for (std::uint64_t seed : cfg.seeds) cells.push_back({method, rate, seed});
    }
  }

  SweepReport report;
  for (const auto& m : data.truth.modalities) report.modality_ids.push_back(m.modality_id);
  report.k = cfg.k;
  report.rows.resize(cells.size());

  const auto run_cell = [&](std::size_t ci) {
    const SweepCell& cell = cells[ci];
    const auto start = std::chrono::steady_clock::now();

    const MissingMask mask =
        sample_missing(data.truth.num_items(), cell.rate, cell.seed);
    ImputationResult imputed;
    switch (cell.method) {
      case ImputeMethod::Zeros:
        imputed = impute_zeros(data.truth, mask);
        break;
      case ImputeMethod::Mean:
        imputed = impute_mean(data.truth, mask);
        break;
      case ImputeMethod::Random:
        imputed = impute_random(data.truth, mask, rng::mix(cell.seed, kRandomFillTag),
                                cfg.random_low, cfg.random_high);
        break;
      case ImputeMethod::FeatProp:
        imputed = featprop_impute(data.truth, mask, graph, cfg.prop, cfg.fallback);
        break;
    }

    const RankedLists ranked =
        knn_recommend(data.split.train, imputed.features, cfg.knn_candidates, cfg.k);

    MetricReport row;
    row.method = cell.method;
    row.missing_rate = cell.rate;
    row.seed = cell.seed;
    row.k = cfg.k;
    row.recall_at_k = recall_at_k(ranked, data.split.test, cfg.k);
    for (std::size_t m = 0; m < data.truth.modalities.size(); ++m) {
      row.cosine_per_modality.push_back(reconstruction_cosine(
          imputed.features.modalities[m], data.truth.modalities[m], mask));
    }
    row.runtime_ms = std::chrono::duration<double, std::milli>(
                         std::chrono::steady_clock::now() - start)
                         .count();
    report.rows[ci] = std::move(row);
  };

  const unsigned jobs = std::max(1u, std::min<unsigned>(cfg.jobs, cells.size()));
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::mutex error_mutex;
  std::vector<std::pair<std::size_t, std::exception_ptr>> errors;

  const auto worker = [&] {
    for (;;) {
      const std::size_t ci = next.fetch_add(1);
      if (ci >= cells.size() || failed.load()) return;
      try {
        run_cell(ci);
      } catch (...) {
        failed.store(true);
        const std::lock_guard<std::mutex> lock(error_mutex);
        errors.emplace_back(ci, std::current_exception());
      }
    }
  };

  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(jobs);
    for (unsigned w = 0; w < jobs; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  if (!errors.empty()) {
    // Report the earliest failing cell so the error is deterministic.
    std::sort(errors.begin(), errors.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    const auto& [ci, eptr] = errors.front();
    try {
      std::rethrow_exception(eptr);
    } catch (const Error& e) {
      throw Error(e.category(),
                  "sweep cell (" + cell_identity(cells[ci]) + "): " + e.what());
    } catch (const std::exception& e) {
      throw Error(ErrorCategory::Internal,
                  "sweep cell (" + cell_identity(cells[ci]) + "): " + e.what());
    }
  }
  log::info("sweep finished: " + std::to_string(report.rows.size()) + " cells");
  return report;
}

}  // namespace featprop
