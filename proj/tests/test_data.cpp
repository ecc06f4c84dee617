#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "fineco/data.hpp"
#include "fineco/errors.hpp"

using namespace fineco;

namespace {

SyntheticSpec small_spec() {
  SyntheticSpec spec;
  spec.num_pairs = 12;
  spec.num_topics = 3;
  spec.frames_per_video = 10;
  spec.feature_dim = 8;
  spec.tokens_per_text = 6;
  spec.vocab_size = 30;
  spec.relevant_fraction = 0.3;  // ceil(0.3 * 10) = 3 planted frames
  spec.noise_std = 0.0;
  spec.seed = 77;
  return spec;
}

std::filesystem::path temp_dir() {
  const auto dir = std::filesystem::temp_directory_path() / "fineco_data_tests";
  std::filesystem::create_directories(dir);
  return dir;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(bool(in));
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  REQUIRE(bool(out));
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

std::vector<double> frame_row(const PairExample& pair, int k) {
  const int d = pair.features.dim;
  const auto begin = pair.features.values.begin() + static_cast<std::ptrdiff_t>(k) * d;
  return std::vector<double>(begin, begin + d);
}

}  // namespace

TEST_CASE("planted sets follow the ceil rule and stay sorted and in range") {
  SyntheticSpec spec = small_spec();
  spec.noise_std = 0.5;
  const Dataset data = generate_synthetic(spec);
  REQUIRE(data.size() == 12);
  for (const PairExample& pair : data) {
    CHECK(pair.planted.size() == 3);  // ceil(0.3 * 10)
    CHECK(std::is_sorted(pair.planted.begin(), pair.planted.end()));
    CHECK(std::set<int>(pair.planted.begin(), pair.planted.end()).size() == pair.planted.size());
    for (int p : pair.planted) {
      CHECK(p >= 0);
      CHECK(p < spec.frames_per_video);
    }
    CHECK(pair.answer >= 0);
    CHECK(pair.answer < spec.num_topics);
  }

  // The fraction rounds up: 0.2 of 32 frames plants ceil(6.4) = 7.
  SyntheticSpec wide = small_spec();
  wide.frames_per_video = 32;
  wide.relevant_fraction = 0.2;
  for (const PairExample& pair : generate_synthetic(wide)) CHECK(pair.planted.size() == 7);
}

TEST_CASE("at zero noise planted frames repeat the topic prototype exactly") {
  const SyntheticSpec spec = small_spec();
  const Dataset data = generate_synthetic(spec);

  // Recover each topic's (quantized) prototype from its planted rows and
  // check every pair of the same topic carries the identical vector.
  std::map<int, std::vector<double>> topic_vector;
  for (const PairExample& pair : data) {
    for (int p : pair.planted) {
      const std::vector<double> row = frame_row(pair, p);
      const auto [it, inserted] = topic_vector.emplace(pair.answer, row);
      if (!inserted) CHECK(it->second == row);  // bitwise: zero noise, same quantization
    }
  }
  REQUIRE(topic_vector.size() == 3);  // every topic shows up with seed 77

  // Prototypes are pairwise distinct, so distractors are distinguishable.
  for (auto a = topic_vector.begin(); a != topic_vector.end(); ++a)
    for (auto b = std::next(a); b != topic_vector.end(); ++b) CHECK(a->second != b->second);

  // Every non-planted frame is some *other* topic's prototype.
  for (const PairExample& pair : data) {
    std::set<int> planted(pair.planted.begin(), pair.planted.end());
    for (int k = 0; k < spec.frames_per_video; ++k) {
      if (planted.count(k)) continue;
      const std::vector<double> row = frame_row(pair, k);
      CHECK(row != topic_vector.at(pair.answer));
      bool matches_other = false;
      for (const auto& [topic, proto] : topic_vector)
        if (topic != pair.answer && row == proto) matches_other = true;
      CHECK(matches_other);
    }
  }
}

TEST_CASE("text tokens stay inside the topic's private vocabulary block") {
  SyntheticSpec spec = small_spec();
  spec.noise_std = 1.0;
  const Dataset data = generate_synthetic(spec);
  const int block = spec.vocab_size / spec.num_topics;  // 10 ids per topic
  for (const PairExample& pair : data) {
    REQUIRE(pair.tokens.size() == 6);
    for (int token : pair.tokens) {
      CHECK(token >= pair.answer * block);
      CHECK(token < (pair.answer + 1) * block);
    }
  }
}

TEST_CASE("generation is deterministic in the seed") {
  const SyntheticSpec spec = small_spec();
  const Dataset a = generate_synthetic(spec);
  const Dataset b = generate_synthetic(spec);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].features.values == b[i].features.values);
    CHECK(a[i].tokens == b[i].tokens);
    CHECK(a[i].planted == b[i].planted);
    CHECK(a[i].answer == b[i].answer);
  }

  SyntheticSpec other = spec;
  other.seed = 78;
  other.noise_std = 1.0;
  SyntheticSpec noisy = spec;
  noisy.noise_std = 1.0;
  const Dataset c = generate_synthetic(noisy);
  const Dataset d = generate_synthetic(other);
  bool any_difference = false;
  for (std::size_t i = 0; i < c.size() && !any_difference; ++i)
    any_difference = c[i].features.values != d[i].features.values || c[i].tokens != d[i].tokens;
  CHECK(any_difference);
}

TEST_CASE("features are quantized to float32 at generation time") {
  SyntheticSpec spec = small_spec();
  spec.noise_std = 0.7;
  for (const PairExample& pair : generate_synthetic(spec))
    for (double v : pair.features.values)
      CHECK(v == static_cast<double>(static_cast<float>(v)));
}

TEST_CASE("spec validation rejects each out-of-range field") {
  auto reject = [](auto mutate) {
    SyntheticSpec spec = small_spec();
    mutate(spec);
    CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
  };
  reject([](SyntheticSpec& s) { s.num_pairs = 0; });
  reject([](SyntheticSpec& s) { s.num_topics = 1; });
  reject([](SyntheticSpec& s) { s.frames_per_video = 0; });
  reject([](SyntheticSpec& s) { s.frames_per_video = 70000; });
  reject([](SyntheticSpec& s) { s.feature_dim = 0; });
  reject([](SyntheticSpec& s) { s.tokens_per_text = 0; });
  reject([](SyntheticSpec& s) { s.vocab_size = 2; });  // fewer ids than topics
  reject([](SyntheticSpec& s) { s.relevant_fraction = 0.0; });
  reject([](SyntheticSpec& s) { s.relevant_fraction = 1.5; });
  reject([](SyntheticSpec& s) { s.noise_std = -0.1; });
  CHECK_NOTHROW(small_spec().validate());
}

TEST_CASE("feature files round-trip bit for bit") {
  SyntheticSpec spec = small_spec();
  spec.noise_std = 0.9;
  const Dataset data = generate_synthetic(spec);
  const auto path = temp_dir() / "roundtrip.features.bin";
  write_features(data, path.string());
  const Dataset back = read_features(path.string());
  REQUIRE(back.size() == data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    CHECK(back[i].features.id == data[i].features.id);
    CHECK(back[i].features.frame_count == data[i].features.frame_count);
    CHECK(back[i].features.dim == data[i].features.dim);
    CHECK(back[i].features.values == data[i].features.values);
    CHECK(back[i].tokens.empty());  // the feature file carries features only
    CHECK(back[i].answer == -1);
  }

  // Writing the same dataset twice produces identical bytes.
  const auto path2 = temp_dir() / "roundtrip2.features.bin";
  write_features(data, path2.string());
  CHECK(read_file(path) == read_file(path2));
}

TEST_CASE("an empty dataset still round-trips") {
  const auto path = temp_dir() / "empty.features.bin";
  write_features(Dataset{}, path.string());
  CHECK(read_features(path.string()).empty());
}

TEST_CASE("corrupt feature files are reported as I/O errors") {
  const Dataset data = generate_synthetic(small_spec());
  const auto path = temp_dir() / "corrupt.features.bin";
  write_features(data, path.string());
  const std::string good = read_file(path);

  write_file(path, good.substr(0, good.size() - 1));  // truncated
  CHECK_THROWS_AS(read_features(path.string()), IoError);

  std::string bad_magic = good;
  bad_magic[0] = 'X';
  write_file(path, bad_magic);
  CHECK_THROWS_AS(read_features(path.string()), IoError);

  std::string bad_version = good;
  bad_version[4] = 9;  // version halfword follows the magic
  write_file(path, bad_version);
  CHECK_THROWS_AS(read_features(path.string()), IoError);

  write_file(path, good + "extra");  // trailing bytes
  CHECK_THROWS_AS(read_features(path.string()), IoError);

  CHECK_THROWS_AS(read_features((temp_dir() / "missing.features.bin").string()), IoError);
}

TEST_CASE("the manifest round-trips tokens, planted sets and answers") {
  const Dataset data = generate_synthetic(small_spec());
  const auto path = temp_dir() / "roundtrip.manifest.jsonl";
  write_manifest(data, path.string());
  const std::vector<ManifestEntry> entries = read_manifest(path.string());
  REQUIRE(entries.size() == data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    CHECK(entries[i].id == data[i].features.id);
    CHECK(entries[i].tokens == data[i].tokens);
    CHECK(entries[i].planted == data[i].planted);
    CHECK(entries[i].answer == data[i].answer);
  }

  write_file(path, "{\"id\": 0, \"tokens\": [1]\n");  // unterminated JSON
  CHECK_THROWS_AS(read_manifest(path.string()), IoError);
}

TEST_CASE("save and load join features with the manifest by id") {
  SyntheticSpec spec = small_spec();
  spec.noise_std = 0.4;
  const Dataset data = generate_synthetic(spec);
  const std::string base = (temp_dir() / "joined").string();
  save_dataset(data, base);
  const Dataset back = load_dataset(base);
  REQUIRE(back.size() == data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    CHECK(back[i].features.values == data[i].features.values);
    CHECK(back[i].tokens == data[i].tokens);
    CHECK(back[i].planted == data[i].planted);
    CHECK(back[i].answer == data[i].answer);
  }

  // Dropping a manifest line breaks the join.
  Dataset shorter(data.begin(), data.end() - 1);
  write_manifest(shorter, base + ".manifest.jsonl");
  CHECK_THROWS_AS(load_dataset(base), IoError);
}

TEST_CASE("batch items pad, mask and truncate correctly") {
  const Dataset data = generate_synthetic(small_spec());
  const PairExample& pair = data[0];  // 10 frames x 8 dims, 6 tokens

  SUBCASE("padding beyond the real frames") {
    const BatchItem item = make_batch_item(pair, 0, 16, 8);
    CHECK(item.valid_frames == 10);
    REQUIRE(item.frame_mask.size() == 16);
    for (int k = 0; k < 16; ++k) CHECK(item.frame_mask[static_cast<std::size_t>(k)] == (k < 10 ? 1 : 0));
    REQUIRE(item.padded_features.size() == 16u * 8u);
    for (std::size_t i = 0; i < pair.features.values.size(); ++i)
      CHECK(item.padded_features[i] == pair.features.values[i]);
    for (std::size_t i = pair.features.values.size(); i < item.padded_features.size(); ++i)
      CHECK(item.padded_features[i] == 0.0);
    CHECK(item.tokens == pair.tokens);
    CHECK(item.planted == pair.planted);

    const FrameFeatures sliced = item.valid_features();
    CHECK(sliced.frame_count == 10);
    CHECK(sliced.dim == 8);
    CHECK(sliced.values == pair.features.values);
  }

  SUBCASE("head truncation of frames drops out-of-range planted indices") {
    const BatchItem item = make_batch_item(pair, 3, 4, 8);
    CHECK(item.valid_frames == 4);
    CHECK(item.dataset_index == 3);
    const FrameFeatures sliced = item.valid_features();
    REQUIRE(sliced.values.size() == 4u * 8u);
    CHECK(std::equal(sliced.values.begin(), sliced.values.end(), pair.features.values.begin()));
    for (int p : item.planted) CHECK(p < 4);
    std::vector<int> expected;
    for (int p : pair.planted)
      if (p < 4) expected.push_back(p);
    CHECK(item.planted == expected);
  }

  SUBCASE("token truncation keeps the head") {
    const BatchItem item = make_batch_item(pair, 0, 16, 2);
    REQUIRE(item.tokens.size() == 2);
    CHECK(item.tokens[0] == pair.tokens[0]);
    CHECK(item.tokens[1] == pair.tokens[1]);
  }

  CHECK_THROWS_AS(make_batch_item(pair, 0, 0, 8), std::invalid_argument);
  CHECK_THROWS_AS(make_batch_item(pair, 0, 16, 0), std::invalid_argument);
}

TEST_CASE("batching covers the dataset once with a seeded shuffle") {
  SyntheticSpec spec = small_spec();
  spec.num_pairs = 10;
  const Dataset data = generate_synthetic(spec);

  const std::vector<Batch> batches = make_batches(data, 4, 10, 8, 123);
  REQUIRE(batches.size() == 3);
  CHECK(batches[0].items.size() == 4);
  CHECK(batches[1].items.size() == 4);
  CHECK(batches[2].items.size() == 2);  // remainder batch

  std::set<int> seen;
  for (const Batch& batch : batches)
    for (const BatchItem& item : batch.items) {
      seen.insert(item.dataset_index);
      CHECK(item.id == data[static_cast<std::size_t>(item.dataset_index)].features.id);
    }
  CHECK(seen.size() == 10);  // every pair exactly once

  // Same seed, same order; a different seed rearranges something.
  const std::vector<Batch> again = make_batches(data, 4, 10, 8, 123);
  const std::vector<Batch> other = make_batches(data, 4, 10, 8, 124);
  std::vector<int> order_a, order_b, order_c;
  for (const Batch& b : batches)
    for (const BatchItem& item : b.items) order_a.push_back(item.dataset_index);
  for (const Batch& b : again)
    for (const BatchItem& item : b.items) order_b.push_back(item.dataset_index);
  for (const Batch& b : other)
    for (const BatchItem& item : b.items) order_c.push_back(item.dataset_index);
  CHECK(order_a == order_b);
  CHECK(order_a != order_c);

  CHECK_THROWS_AS(make_batches(Dataset{}, 4, 10, 8, 1), std::invalid_argument);
  CHECK_THROWS_AS(make_batches(data, 0, 10, 8, 1), std::invalid_argument);
}
