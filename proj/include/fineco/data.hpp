#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fineco/encoders.hpp"

// Synthetic planted-relevance corpus and its on-disk formats. Each pair is a
// video of K frames and a short token sequence about one topic: a planted
// subset of frames carries the topic's prototype vector plus noise, the rest
// carry other topics' prototypes, and the text tokens come from the topic's
// private vocabulary block. The planted indices are the ground truth the
// selector is evaluated against; the topic id doubles as the QA answer.
//
// Features travel in a little-endian binary file (magic "FVLF", version,
// record count, then per record: u32 id, u16 frame count, u16 dim, float32
// values). Tokens, planted sets and answers travel in a JSONL manifest
// joined back to the features by id.

namespace fineco {

struct PairExample {
  FrameFeatures features;
  TokenSequence tokens;
  std::vector<int> planted;  // ascending frame indices
  int answer = -1;           // topic id
};

using Dataset = std::vector<PairExample>;

struct SyntheticSpec {
  int num_pairs = 0;
  int num_topics = 0;
  int frames_per_video = 0;
  int feature_dim = 32;
  int tokens_per_text = 8;
  int vocab_size = 256;
  double relevant_fraction = 0.2;  // planted count = ceil(fraction * K)
  double noise_std = 1.0;
  std::uint64_t seed = 0;

  void validate() const;
};

// Deterministic: the same spec always yields the same dataset, and values
// are quantized to float32 at generation time so in-memory data matches the
// file format bit for bit.
Dataset generate_synthetic(const SyntheticSpec& spec);

void write_features(const Dataset& dataset, const std::string& path);
Dataset read_features(const std::string& path);  // features only

struct ManifestEntry {
  std::uint32_t id = 0;
  TokenSequence tokens;
  std::vector<int> planted;
  int answer = -1;
};

void write_manifest(const Dataset& dataset, const std::string& path);
std::vector<ManifestEntry> read_manifest(const std::string& path);

// Convenience wrappers: <base>.features.bin + <base>.manifest.jsonl.
void save_dataset(const Dataset& dataset, const std::string& base_path);
Dataset load_dataset(const std::string& base_path);

struct BatchItem {
  std::uint32_t id = 0;
  int dataset_index = 0;
  int valid_frames = 0;  // frames before padding (after truncation)
  int feature_dim = 0;
  std::vector<double> padded_features;   // [max_video_len x dim], zero-padded
  std::vector<std::uint8_t> frame_mask;  // 1 for real frames, 0 for padding
  TokenSequence tokens;                  // truncated to max_text_len
  std::vector<int> planted;              // restricted to valid frames
  int answer = -1;

  // The unpadded view actually fed to the encoders; padded positions can
  // never leak into losses or metrics because they are sliced away here.
  FrameFeatures valid_features() const;
};

struct Batch {
  std::vector<BatchItem> items;
};

// Pads/truncates one pair into batch form (also used for in-order evaluation).
BatchItem make_batch_item(const PairExample& pair, int dataset_index, int max_video_len,
                          int max_text_len);

// Shuffles the dataset with the given seed and cuts it into batches; the
// final batch keeps the remainder. Frame/token sequences longer than the
// maxima are truncated from the back.
std::vector<Batch> make_batches(const Dataset& dataset, int batch_size, int max_video_len,
                                int max_text_len, std::uint64_t shuffle_seed);

}  // namespace fineco
