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

#include "featprop/io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "featprop/rng.hpp"

namespace featprop {

namespace {

// --- little-endian byte plumbing -------------------------------------------

void put_u32(std::string& out, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<char>((v >> (8 * b)) & 0xFF));
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int b = 0; b < 8; ++b) out.push_back(static_cast<char>((v >> (8 * b)) & 0xFF));
}

void put_f32(std::string& out, float v) { put_u32(out, std::bit_cast<std::uint32_t>(v)); }
void put_f64(std::string& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

class ByteReader {
 public:
  ByteReader(const std::string& bytes, std::string file_label)
      : bytes_(bytes), label_(std::move(file_label)) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int b = 0; b < 4; ++b) {
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes_[pos_ + b])) << (8 * b);
    }
    pos_ += 4;
    return v;
  }

  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int b = 0; b < 8; ++b) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + b])) << (8 * b);
    }
    pos_ += 8;
    return v;
  }

  float f32() { return std::bit_cast<float>(u32()); }
  double f64() { return std::bit_cast<double>(u64()); }

  std::string chunk(std::size_t len) {
    need(len);
    std::string s = bytes_.substr(pos_, len);
    pos_ += len;
    return s;
  }

  std::size_t remaining() const { return bytes_.size() - pos_; }
  std::size_t position() const { return pos_; }

  void expect_exhausted() const {
    if (remaining() != 0) {
      throw Error(ErrorCategory::Parse,
                  label_ + ": " + std::to_string(remaining()) + " trailing bytes");
    }
  }

 private:
  void need(std::size_t len) const {
    if (pos_ + len > bytes_.size()) {
      throw Error(ErrorCategory::Parse,
                  label_ + ": truncated, expected at least " +
                      std::to_string(pos_ + len) + " bytes, got " +
                      std::to_string(bytes_.size()));
    }
  }

  const std::string& bytes_;
  std::string label_;
  std::size_t pos_ = 0;
};

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCategory::Io, "cannot open '" + path.string() + "' for reading");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) {
    throw Error(ErrorCategory::Io, "read failure on '" + path.string() + "'");
  }
  return std::move(buf).str();
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error(ErrorCategory::Io, "cannot open '" + path.string() + "' for writing");
  }
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  out.flush();
  if (!out) {
    throw Error(ErrorCategory::Io, "write failure on '" + path.string() + "'");
  }
}

constexpr char kFeatureMagic[4] = {'F', 'P', 'M', 'M'};
constexpr char kGraphMagic[4] = {'F', 'P', 'G', 'R'};
constexpr std::uint32_t kFormatVersion = 1;

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

// --- interactions -----------------------------------------------------------

InteractionData load_interactions(const std::filesystem::path& path) {
  const std::string text = read_file(path);

  InteractionData data;
  std::unordered_map<std::string, Index> user_ids;
  std::unordered_map<std::string, Index> item_ids;
  std::vector<std::pair<Index, Index>> pairs;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string::npos) eol = text.size();
    ++line_no;
    std::string_view line(text.data() + pos, eol - pos);
    pos = eol + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;

    const std::size_t tab = line.find('\t');
    if (tab == std::string_view::npos || tab == 0 || tab + 1 >= line.size() ||
        line.find('\t', tab + 1) != std::string_view::npos) {
      throw Error(ErrorCategory::Parse,
                  path.string() + ":" + std::to_string(line_no) +
                      ": expected exactly `user<TAB>item`");
    }
    const std::string user(line.substr(0, tab));
    const std::string item(line.substr(tab + 1));

    auto [uit, u_new] = user_ids.try_emplace(user, static_cast<Index>(data.user_tokens.size()));
    if (u_new) data.user_tokens.push_back(user);
    auto [iit, i_new] = item_ids.try_emplace(item, static_cast<Index>(data.item_tokens.size()));
    if (i_new) data.item_tokens.push_back(item);
    pairs.emplace_back(uit->second, iit->second);
  }

  if (pairs.empty()) {
    throw Error(ErrorCategory::Parse, path.string() + ": no interactions found");
  }
  data.matrix = InteractionMatrix::from_pairs(static_cast<Index>(data.user_tokens.size()),
                                              static_cast<Index>(data.item_tokens.size()),
                                              std::move(pairs));
  return data;
}

void save_interactions(const std::filesystem::path& path, const InteractionMatrix& r,
                       const std::vector<std::string>& user_tokens,
                       const std::vector<std::string>& item_tokens) {
  std::string out;
  for (Index u = 0; u < r.num_users; ++u) {
    const std::string user =
        u < user_tokens.size() ? user_tokens[u] : "u" + std::to_string(u);
    for (Index i : r.items_of(u)) {
      const std::string item =
          i < item_tokens.size() ? item_tokens[i] : "i" + std::to_string(i);
      out += user;
      out += '\t';
      out += item;
      out += '\n';
    }
  }
  write_file(path, out);
}

// --- features ---------------------------------------------------------------

ModalityFeatureSet load_features(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  ByteReader reader(bytes, path.string());

  const std::string magic = reader.chunk(4);
  if (std::memcmp(magic.data(), kFeatureMagic, 4) != 0) {
    throw Error(ErrorCategory::Parse, path.string() + ": bad magic, not a feature file");
  }
  const std::uint32_t version = reader.u32();
  if (version != kFormatVersion) {
    throw Error(ErrorCategory::Parse,
                path.string() + ": unsupported feature file version " +
                    std::to_string(version));
  }
  const std::uint64_t num_items = reader.u64();
  const std::uint64_t dim = reader.u64();
  const std::uint32_t label_len = reader.u32();
  const std::string label = reader.chunk(label_len);

  const std::uint64_t payload = num_items * dim * 4;
  if (reader.remaining() != payload) {
    throw Error(ErrorCategory::Parse,
                path.string() + ": truncated payload, expected " +
                    std::to_string(reader.position() + payload) + " bytes, got " +
                    std::to_string(bytes.size()));
  }

  ModalityFeatureSet f;
  f.modality_id = label;
  f.data = DenseMatrix(num_items, dim);
  for (double& v : f.data.values) v = static_cast<double>(reader.f32());
  f.validate();
  return f;
}

void save_features(const std::filesystem::path& path, const ModalityFeatureSet& f) {
  f.validate();
  std::string out;
  out.reserve(32 + f.modality_id.size() + f.data.values.size() * 4);
  out.append(kFeatureMagic, 4);
  put_u32(out, kFormatVersion);
  put_u64(out, f.num_items());
  put_u64(out, f.dim());
  put_u32(out, static_cast<std::uint32_t>(f.modality_id.size()));
  out += f.modality_id;
  for (double v : f.data.values) put_f32(out, static_cast<float>(v));
  write_file(path, out);
}

// --- item-item graph ---------------------------------------------------------

ItemItemGraph load_graph(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  ByteReader reader(bytes, path.string());

  const std::string magic = reader.chunk(4);
  if (std::memcmp(magic.data(), kGraphMagic, 4) != 0) {
    throw Error(ErrorCategory::Parse, path.string() + ": bad magic, not a graph file");
  }
  if (reader.u32() != kFormatVersion) {
    throw Error(ErrorCategory::Parse, path.string() + ": unsupported graph file version");
  }
  const std::uint32_t stage = reader.u32();
  if (stage > static_cast<std::uint32_t>(GraphStage::Normalized)) {
    throw Error(ErrorCategory::Parse, path.string() + ": unknown graph stage");
  }

  ItemItemGraph g;
  g.stage = static_cast<GraphStage>(stage);
  g.num_items = static_cast<Index>(reader.u64());
  const std::uint64_t nnz = reader.u64();
  g.row_offsets.resize(static_cast<std::size_t>(g.num_items) + 1);
  for (auto& v : g.row_offsets) v = reader.u64();
  g.col_indices.resize(nnz);
  for (auto& v : g.col_indices) v = static_cast<Index>(reader.u32());
  g.weights.resize(nnz);
  for (auto& v : g.weights) v = reader.f64();
  const std::uint32_t has_degree = reader.u32();
  if (has_degree != 0) {
    g.degree.resize(g.num_items);
    for (auto& v : g.degree) v = reader.f64();
  }
  reader.expect_exhausted();
  g.validate();
  return g;
}

void save_graph(const std::filesystem::path& path, const ItemItemGraph& g) {
  g.validate();
  std::string out;
  out.append(kGraphMagic, 4);
  put_u32(out, kFormatVersion);
  put_u32(out, static_cast<std::uint32_t>(g.stage));
  put_u64(out, g.num_items);
  put_u64(out, g.nnz());
  for (std::uint64_t v : g.row_offsets) put_u64(out, v);
  for (Index v : g.col_indices) put_u32(out, v);
  for (double v : g.weights) put_f64(out, v);
  put_u32(out, g.degree.empty() ? 0 : 1);
  for (double v : g.degree) put_f64(out, v);
  write_file(path, out);
}

// --- missing mask -------------------------------------------------------------

MissingMask load_mask(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCategory::Parse, path.string() + ": " + e.what());
  }
  if (!j.is_object() || !j.contains("num_items") || !j.contains("missing")) {
    throw Error(ErrorCategory::Parse,
                path.string() + ": expected {\"num_items\": N, \"missing\": [...]}");
  }
  MissingMask mask = MissingMask::all_known(j["num_items"].get<Index>());
  for (const auto& idx : j["missing"]) {
    const auto i = idx.get<std::uint64_t>();
    if (i >= mask.num_items) {
      throw Error(ErrorCategory::Parse,
                  path.string() + ": missing index " + std::to_string(i) + " out of range");
    }
    mask.known[i] = 0;
  }
  return mask;
}

void save_mask(const std::filesystem::path& path, const MissingMask& mask) {
  nlohmann::json j;
  j["num_items"] = mask.num_items;
  j["missing"] = mask.missing_indices();
  write_file(path, j.dump(2) + "\n");
}

// --- sweep reports --------------------------------------------------------------

std::string sweep_report_to_csv(const SweepReport& report) {
  std::string out = "method,rate,seed,k,recall_at_k";
  for (const auto& id : report.modality_ids) out += ",cosine_" + id;
  out += ",runtime_ms\n";
  for (const auto& row : report.rows) {
    out += to_string(row.method);
    out += ',';
    out += format_double(row.missing_rate);
    out += ',';
    out += std::to_string(row.seed);
    out += ',';
    out += std::to_string(row.k);
    out += ',';
    out += format_double(row.recall_at_k);
    for (double c : row.cosine_per_modality) {
      out += ',';
      out += format_double(c);
    }
    out += ',';
    out += format_double(row.runtime_ms);
    out += '\n';
  }
  return out;
}

std::string sweep_report_to_json(const SweepReport& report) {
  nlohmann::ordered_json j;
  j["k"] = report.k;
  j["modalities"] = report.modality_ids;
  j["rows"] = nlohmann::ordered_json::array();
  for (const auto& row : report.rows) {
    nlohmann::ordered_json r;
    r["method"] = to_string(row.method);
    r["rate"] = row.missing_rate;
    r["seed"] = row.seed;
    r["k"] = row.k;
    r["recall_at_k"] = row.recall_at_k;
    for (std::size_t m = 0; m < report.modality_ids.size(); ++m) {
      r["cosine_" + report.modality_ids[m]] = row.cosine_per_modality[m];
    }
    r["runtime_ms"] = row.runtime_ms;
    j["rows"].push_back(std::move(r));
  }
  return j.dump(2) + "\n";
}

void save_sweep_report_csv(const std::filesystem::path& path, const SweepReport& report) {
  write_file(path, sweep_report_to_csv(report));
}

void save_sweep_report_json(const std::filesystem::path& path, const SweepReport& report) {
  write_file(path, sweep_report_to_json(report));
}

// --- synthetic datasets -----------------------------------------------------------

SyntheticDataset generate_synthetic(const SyntheticSpec& spec) {
  if (spec.num_users < 1 || spec.num_items < 1) {
    throw Error(ErrorCategory::Parameter, "generate_synthetic: need users and items");
  }
  if (spec.num_clusters < 1 || spec.num_clusters > spec.num_items) {
    throw Error(ErrorCategory::Parameter,
                "generate_synthetic: num_clusters must lie in [1, num_items]");
  }
  if (spec.interactions_per_user < 1 || spec.interactions_per_user > spec.num_items) {
    throw Error(ErrorCategory::Parameter,
                "generate_synthetic: interactions_per_user must lie in [1, num_items]");
  }
  if (spec.modality_dims.empty()) {
    throw Error(ErrorCategory::Parameter, "generate_synthetic: need at least one modality");
  }
  for (Index dim : spec.modality_dims) {
    if (dim < 1) {
      throw Error(ErrorCategory::Parameter, "generate_synthetic: modality dims must be >= 1");
    }
  }
  if (spec.noise_sigma < 0.0) {
    throw Error(ErrorCategory::Parameter, "generate_synthetic: noise_sigma must be >= 0");
  }

  SyntheticDataset data;

  // Items take clusters round-robin so every cluster is populated; users
  // draw theirs uniformly.
  data.item_cluster.resize(spec.num_items);
  for (Index i = 0; i < spec.num_items; ++i) data.item_cluster[i] = i % spec.num_clusters;
  std::vector<std::vector<Index>> cluster_items(spec.num_clusters);
  for (Index i = 0; i < spec.num_items; ++i) cluster_items[data.item_cluster[i]].push_back(i);

  rng::Stream user_stream(rng::mix(spec.seed, 1));
  data.user_cluster.resize(spec.num_users);
  for (Index u = 0; u < spec.num_users; ++u) {
    data.user_cluster[u] = static_cast<Index>(user_stream.next_below(spec.num_clusters));
  }

  // Features: cluster centroid coordinates are standard normal, items add
  // sigma-scaled Gaussian noise.
  rng::Stream centroid_stream(rng::mix(spec.seed, 2));
  rng::Stream noise_stream(rng::mix(spec.seed, 3));
  for (std::size_t m = 0; m < spec.modality_dims.size(); ++m) {
    const Index dim = spec.modality_dims[m];
    DenseMatrix centroids(spec.num_clusters, dim);
    for (double& v : centroids.values) v = centroid_stream.next_gaussian();

    ModalityFeatureSet f;
    f.modality_id = "mod" + std::to_string(m);
    f.data = DenseMatrix(spec.num_items, dim);
    for (Index i = 0; i < spec.num_items; ++i) {
      const auto centroid = centroids.row(data.item_cluster[i]);
      auto row = f.data.row(i);
      for (Index c = 0; c < dim; ++c) {
        row[c] = centroid[c] + spec.noise_sigma * noise_stream.next_gaussian();
      }
    }
    data.truth.modalities.push_back(std::move(f));
  }

  // Interactions: 90% of a user's picks come from the own-cluster pool.
  std::vector<std::pair<Index, Index>> pairs;
  pairs.reserve(static_cast<std::size_t>(spec.num_users) * spec.interactions_per_user);
  std::vector<std::uint8_t> seen_item(spec.num_items, 0);
  std::unordered_set<Index> chosen;
  for (Index u = 0; u < spec.num_users; ++u) {
    rng::Stream stream(rng::mix(spec.seed, 0x100000000ULL + u));
    const auto& own = cluster_items[data.user_cluster[u]];
    chosen.clear();
    std::size_t attempts = 0;
    const std::size_t max_attempts = 100 * static_cast<std::size_t>(spec.interactions_per_user);
    while (chosen.size() < spec.interactions_per_user && attempts < max_attempts) {
      ++attempts;
      Index item;
      if (stream.next_unit() < 0.9) {
        item = own[stream.next_below(own.size())];
      } else {
        item = static_cast<Index>(stream.next_below(spec.num_items));
      }
      chosen.insert(item);
    }
    // Deterministic fill if rejection sampling ran out (tiny catalogues).
    for (Index i = 0; chosen.size() < spec.interactions_per_user && i < spec.num_items; ++i) {
      chosen.insert(i);
    }
    for (Index item : chosen) {
      pairs.emplace_back(u, item);
      seen_item[item] = 1;
    }
  }
  // Guarantee full item coverage so feature rows and interaction indices
  // stay aligned through a save/load round trip.
  for (Index i = 0; i < spec.num_items; ++i) {
    if (!seen_item[i]) pairs.emplace_back(i % spec.num_users, i);
  }

  data.interactions =
      InteractionMatrix::from_pairs(spec.num_users, spec.num_items, std::move(pairs));
  return data;
}

}  // namespace featprop
