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

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <string>

#include <doctest.h>

#include "featprop/impute.hpp"
#include "test_instances.hpp"

using namespace featprop;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("featprop_io_test_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  static int& counter() {
    static int c = 0;
    return c;
  }
  fs::path file(const std::string& name) const { return path / name; }
};

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

std::string read_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

TEST_CASE("load_interactions maps tokens in first-appearance order") {
  TempDir tmp;
  write_text(tmp.file("r.tsv"), "alice\tshoes\nbob\tshoes\nalice\that\n");
  const auto data = load_interactions(tmp.file("r.tsv"));
  CHECK(data.matrix.num_users == 2);
  CHECK(data.matrix.num_items == 2);
  CHECK(data.matrix.nnz() == 3);
  CHECK(data.user_tokens == std::vector<std::string>{"alice", "bob"});
  CHECK(data.item_tokens == std::vector<std::string>{"shoes", "hat"});
}

TEST_CASE("load_interactions collapses duplicate pairs") {
  TempDir tmp;
  write_text(tmp.file("r.tsv"), "u1\ti1\nu1\ti1\nu1\ti2\n");
  const auto data = load_interactions(tmp.file("r.tsv"));
  CHECK(data.matrix.nnz() == 2);
}

TEST_CASE("load_interactions reports malformed lines with their number") {
  TempDir tmp;
  write_text(tmp.file("r.tsv"), "u1\ti1\nbroken-line\nu2\ti2\n");
  try {
    load_interactions(tmp.file("r.tsv"));
    FAIL("expected a parse error");
  } catch (const Error& e) {
    CHECK(e.category() == ErrorCategory::Parse);
    CHECK(std::string(e.what()).find(":2") != std::string::npos);
  }
}

TEST_CASE("load_interactions rejects empty files and missing files") {
  TempDir tmp;
  write_text(tmp.file("empty.tsv"), "");
  CHECK_THROWS_AS(load_interactions(tmp.file("empty.tsv")), Error);
  CHECK_THROWS_AS(load_interactions(tmp.file("nonexistent.tsv")), Error);
}

TEST_CASE("token maps are stable across reloads") {
  TempDir tmp;
  rng::Stream s(3);
  const auto r = testgen::random_interactions(s, 20, 20);
  save_interactions(tmp.file("r.tsv"), r);
  const auto a = load_interactions(tmp.file("r.tsv"));
  const auto b = load_interactions(tmp.file("r.tsv"));
  CHECK(a.user_tokens == b.user_tokens);
  CHECK(a.item_tokens == b.item_tokens);
  CHECK(a.matrix == b.matrix);
}

TEST_CASE("feature files round-trip bitwise") {
  TempDir tmp;
  rng::Stream s(5);
  ModalityFeatureSet f;
  f.modality_id = "visual";
  f.data = DenseMatrix(17, 9);
  // float-representable values survive the 32-bit payload bit-exactly
  for (double& v : f.data.values) {
    v = static_cast<double>(static_cast<float>(s.next_uniform(-4.0, 4.0)));
  }
  save_features(tmp.file("f.fpmm"), f);
  const auto loaded = load_features(tmp.file("f.fpmm"));
  CHECK(loaded.modality_id == "visual");
  CHECK(loaded.data.rows == 17);
  CHECK(loaded.data.cols == 9);
  CHECK(loaded.data.values == f.data.values);

  // saving the loaded set reproduces the file byte-for-byte
  save_features(tmp.file("f2.fpmm"), loaded);
  CHECK(read_bytes(tmp.file("f.fpmm")) == read_bytes(tmp.file("f2.fpmm")));
}

TEST_CASE("feature headers accept the 4096- and 1024-dim layouts") {
  TempDir tmp;
  for (const auto& [label, dim] : {std::pair<std::string, Index>{"visual", 4096},
                                   std::pair<std::string, Index>{"textual", 1024}}) {
    ModalityFeatureSet f;
    f.modality_id = label;
    f.data = DenseMatrix(3, dim, 0.25);
    save_features(tmp.file(label + ".fpmm"), f);
    const auto loaded = load_features(tmp.file(label + ".fpmm"));
    CHECK(loaded.dim() == dim);
    CHECK(loaded.modality_id == label);
  }
}

TEST_CASE("feature loader rejects corrupted files") {
  TempDir tmp;
  ModalityFeatureSet f;
  f.modality_id = "m";
  f.data = DenseMatrix(4, 2, 1.0);
  save_features(tmp.file("f.fpmm"), f);
  const std::string bytes = read_bytes(tmp.file("f.fpmm"));

  SUBCASE("truncated payload carries expected and actual byte counts") {
    write_text(tmp.file("cut.fpmm"), bytes.substr(0, bytes.size() - 5));
    try {
      load_features(tmp.file("cut.fpmm"));
      FAIL("expected a parse error");
    } catch (const Error& e) {
      CHECK(e.category() == ErrorCategory::Parse);
      const std::string msg = e.what();
      CHECK(msg.find(std::to_string(bytes.size())) != std::string::npos);
      CHECK(msg.find(std::to_string(bytes.size() - 5)) != std::string::npos);
    }
  }
  SUBCASE("bad magic") {
    std::string evil = bytes;
    evil[0] = 'X';
    write_text(tmp.file("magic.fpmm"), evil);
    CHECK_THROWS_AS(load_features(tmp.file("magic.fpmm")), Error);
  }
  SUBCASE("bad version") {
    std::string evil = bytes;
    evil[4] = 9;
    write_text(tmp.file("version.fpmm"), evil);
    CHECK_THROWS_AS(load_features(tmp.file("version.fpmm")), Error);
  }
}

TEST_CASE("graph files round-trip bitwise") {
  TempDir tmp;
  rng::Stream s(7);
  const auto r = testgen::random_interactions(s, 25, 25);
  const auto g = normalize_symmetric(sparsify_topn(project_item_item(r), 4));
  save_graph(tmp.file("g.fpgr"), g);
  const auto loaded = load_graph(tmp.file("g.fpgr"));
  CHECK(loaded == g);
}

TEST_CASE("mask files round-trip") {
  TempDir tmp;
  const auto mask = sample_missing(50, 0.3, 11);
  save_mask(tmp.file("mask.json"), mask);
  const auto loaded = load_mask(tmp.file("mask.json"));
  CHECK(loaded.num_items == mask.num_items);
  CHECK(loaded.known == mask.known);
  write_text(tmp.file("bad.json"), "{\"num_items\": 3}");
  CHECK_THROWS_AS(load_mask(tmp.file("bad.json")), Error);
}

TEST_CASE("sweep report serialization lists every field") {
  SweepReport report;
  report.modality_ids = {"visual", "textual"};
  report.k = 20;
  MetricReport row;
  row.method = ImputeMethod::FeatProp;
  row.missing_rate = 0.5;
  row.seed = 3;
  row.k = 20;
  row.recall_at_k = 0.125;
  row.cosine_per_modality = {0.75, -0.25};
  row.runtime_ms = 12.5;
  report.rows.push_back(row);

  const std::string csv = sweep_report_to_csv(report);
  CHECK(csv == "method,rate,seed,k,recall_at_k,cosine_visual,cosine_textual,runtime_ms\n"
               "featprop,0.5,3,20,0.125,0.75,-0.25,12.5\n");
  const std::string json = sweep_report_to_json(report);
  CHECK(json.find("\"cosine_textual\": -0.25") != std::string::npos);
  CHECK(json.find("\"method\": \"featprop\"") != std::string::npos);
}

TEST_CASE("generate_synthetic honors its contract") {
  SUBCASE("zero noise makes cluster features identical") {
    const auto data = generate_synthetic({40, 20, 4, 5, {6}, 0.0, 9});
    const auto& f = data.truth.modalities[0].data;
    for (Index i = 0; i < 20; ++i) {
      for (Index j = 0; j < 20; ++j) {
        if (data.item_cluster[i] == data.item_cluster[j]) {
          CHECK(f.row(i)[0] == f.row(j)[0]);
        }
      }
    }
  }
  SUBCASE("same seed reproduces the dataset") {
    const auto a = generate_synthetic({30, 15, 3, 4, {4, 2}, 0.2, 31});
    const auto b = generate_synthetic({30, 15, 3, 4, {4, 2}, 0.2, 31});
    CHECK(a.interactions == b.interactions);
    CHECK(a.truth.modalities[0].data.values == b.truth.modalities[0].data.values);
    CHECK(a.truth.modalities[1].data.values == b.truth.modalities[1].data.values);
  }
  SUBCASE("every item interacts at least once") {
    const auto data = generate_synthetic({10, 50, 5, 3, {4}, 0.1, 13});
    std::vector<bool> seen(50, false);
    for (Index u = 0; u < data.interactions.num_users; ++u) {
      for (Index i : data.interactions.items_of(u)) seen[i] = true;
    }
    CHECK(std::count(seen.begin(), seen.end(), false) == 0);
  }
  SUBCASE("invalid sizes are rejected") {
    CHECK_THROWS_AS(generate_synthetic({10, 5, 8, 3, {4}, 0.1, 1}), Error);   // clusters > items
    CHECK_THROWS_AS(generate_synthetic({10, 5, 2, 9, {4}, 0.1, 1}), Error);   // per-user > items
    CHECK_THROWS_AS(generate_synthetic({10, 5, 2, 3, {}, 0.1, 1}), Error);    // no modalities
    CHECK_THROWS_AS(generate_synthetic({10, 5, 2, 3, {4}, -0.5, 1}), Error);  // bad sigma
  }
}

TEST_CASE("single-cluster synthetic makes Mean and FeatProp agree") {
  const auto data = generate_synthetic({150, 40, 1, 8, {8}, 0.1, 17});
  const auto mask = sample_missing(40, 0.4, 2);
  const auto graph = normalize_symmetric(
      sparsify_topn(project_item_item(data.interactions), 10));
  const auto mean = impute_mean(data.truth, mask);
  const auto prop = featprop_impute(data.truth, mask, graph, PropagationConfig{});
  const double cos_mean = reconstruction_cosine(mean.features.modalities[0],
                                                data.truth.modalities[0], mask);
  const double cos_prop = reconstruction_cosine(prop.features.modalities[0],
                                                data.truth.modalities[0], mask);
  CHECK(std::abs(cos_mean - cos_prop) < 0.05);
}
