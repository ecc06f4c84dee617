#include "fineco/data.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "fineco/errors.hpp"
#include "fineco/rng.hpp"

namespace fineco {
namespace {

constexpr char kMagic[4] = {'F', 'V', 'L', 'F'};
constexpr std::uint16_t kVersion = 1;

void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int s = 0; s < 32; s += 8) out.push_back(static_cast<char>((v >> s) & 0xff));
}

void put_f32(std::string& out, float v) { put_u32(out, std::bit_cast<std::uint32_t>(v)); }

// Cursor over a fully loaded file; truncation errors report how many bytes
// were needed versus available.
struct Reader {
  const std::string& buf;
  const std::string& path;
  std::size_t pos = 0;

  void need(std::size_t n) const {
    if (pos + n > buf.size())
      throw IoError(path + ": truncated feature file, needed " + std::to_string(pos + n) +
                    " bytes but file has " + std::to_string(buf.size()));
  }
  std::uint16_t u16() {
    need(2);
    const auto* p = reinterpret_cast<const unsigned char*>(buf.data() + pos);
    pos += 2;
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
  }
  std::uint32_t u32() {
    need(4);
    const auto* p = reinterpret_cast<const unsigned char*>(buf.data() + pos);
    pos += 4;
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
  }
  float f32() { return std::bit_cast<float>(u32()); }
};

double quantize(double v) { return static_cast<double>(static_cast<float>(v)); }

}  // namespace

void SyntheticSpec::validate() const {
  if (num_pairs < 1) throw std::invalid_argument("SyntheticSpec: num_pairs must be >= 1");
  if (num_topics < 2)
    throw std::invalid_argument("SyntheticSpec: num_topics must be >= 2 so irrelevant frames have a source");
  if (frames_per_video < 1)
    throw std::invalid_argument("SyntheticSpec: frames_per_video must be >= 1");
  if (frames_per_video > 65535 || feature_dim > 65535)
    throw std::invalid_argument("SyntheticSpec: frame count and dim must fit in 16 bits");
  if (feature_dim < 1) throw std::invalid_argument("SyntheticSpec: feature_dim must be >= 1");
  if (tokens_per_text < 1) throw std::invalid_argument("SyntheticSpec: tokens_per_text must be >= 1");
  if (vocab_size < num_topics)
    throw std::invalid_argument("SyntheticSpec: vocab_size must be >= num_topics (one token block per topic)");
  if (!(relevant_fraction > 0.0) || relevant_fraction > 1.0)
    throw std::invalid_argument("SyntheticSpec: relevant_fraction must be in (0, 1]");
  if (noise_std < 0.0) throw std::invalid_argument("SyntheticSpec: noise_std must be >= 0");
}

Dataset generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  const int K = spec.frames_per_video;
  const int d = spec.feature_dim;
  const int planted_count = static_cast<int>(std::ceil(spec.relevant_fraction * K));

  Rng proto_rng(Rng::mix(spec.seed, 1));
  std::vector<std::vector<double>> prototypes(static_cast<std::size_t>(spec.num_topics));
  for (auto& proto : prototypes) {
    proto.resize(static_cast<std::size_t>(d));
    for (double& x : proto) x = proto_rng.normal();
  }

  const int block = spec.vocab_size / spec.num_topics;  // private token ids per topic
  Rng pair_rng(Rng::mix(spec.seed, 2));
  Dataset dataset(static_cast<std::size_t>(spec.num_pairs));
  for (int i = 0; i < spec.num_pairs; ++i) {
    PairExample& pair = dataset[static_cast<std::size_t>(i)];
    const int topic = static_cast<int>(pair_rng.below(static_cast<std::uint64_t>(spec.num_topics)));
    pair.answer = topic;
    pair.planted = pair_rng.sample_without_replacement(K, planted_count);

    pair.features.id = static_cast<std::uint32_t>(i);
    pair.features.frame_count = K;
    pair.features.dim = d;
    pair.features.values.resize(static_cast<std::size_t>(K) * static_cast<std::size_t>(d));
    std::vector<char> is_planted(static_cast<std::size_t>(K), 0);
    for (int p : pair.planted) is_planted[static_cast<std::size_t>(p)] = 1;
    for (int k = 0; k < K; ++k) {
      int source = topic;
      if (!is_planted[static_cast<std::size_t>(k)]) {
        // Uniform over the other topics.
        int u = static_cast<int>(pair_rng.below(static_cast<std::uint64_t>(spec.num_topics - 1)));
        source = u >= topic ? u + 1 : u;
      }
      const std::vector<double>& proto = prototypes[static_cast<std::size_t>(source)];
      for (int j = 0; j < d; ++j)
        pair.features.values[static_cast<std::size_t>(k) * d + j] =
            quantize(proto[static_cast<std::size_t>(j)] + spec.noise_std * pair_rng.normal());
    }

    pair.tokens.resize(static_cast<std::size_t>(spec.tokens_per_text));
    for (int& token : pair.tokens)
      token = topic * block + static_cast<int>(pair_rng.below(static_cast<std::uint64_t>(block)));
  }
  return dataset;
}

void write_features(const Dataset& dataset, const std::string& path) {
  std::string out;
  out.append(kMagic, 4);
  put_u16(out, kVersion);
  put_u32(out, static_cast<std::uint32_t>(dataset.size()));
  for (const PairExample& pair : dataset) {
    const FrameFeatures& f = pair.features;
    if (f.frame_count < 1 || f.dim < 1 || f.frame_count > 65535 || f.dim > 65535)
      throw IoError(path + ": record " + std::to_string(f.id) + " has out-of-range dimensions " +
                    std::to_string(f.frame_count) + "x" + std::to_string(f.dim));
    put_u32(out, f.id);
    put_u16(out, static_cast<std::uint16_t>(f.frame_count));
    put_u16(out, static_cast<std::uint16_t>(f.dim));
    for (double v : f.values) put_f32(out, static_cast<float>(v));
  }
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw IoError(path + ": cannot open for writing");
  file.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!file) throw IoError(path + ": write failed");
}

Dataset read_features(const std::string& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw IoError(path + ": cannot open");
  std::ostringstream ss;
  ss << file.rdbuf();
  const std::string buf = ss.str();
  Reader r{buf, path};

  r.need(4);
  if (std::memcmp(buf.data(), kMagic, 4) != 0)
    throw IoError(path + ": bad magic, not a feature file");
  r.pos = 4;
  const std::uint16_t version = r.u16();
  if (version != kVersion)
    throw IoError(path + ": unsupported feature file version " + std::to_string(version));
  const std::uint32_t count = r.u32();

  Dataset dataset(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    FrameFeatures& f = dataset[i].features;
    f.id = r.u32();
    f.frame_count = r.u16();
    f.dim = r.u16();
    if (f.frame_count < 1 || f.dim < 1)
      throw IoError(path + ": record " + std::to_string(f.id) + " has empty dimensions");
    f.values.resize(static_cast<std::size_t>(f.frame_count) * static_cast<std::size_t>(f.dim));
    for (double& v : f.values) v = static_cast<double>(r.f32());
  }
  if (r.pos != buf.size())
    throw IoError(path + ": " + std::to_string(buf.size() - r.pos) +
                  " trailing bytes after the last record");
  return dataset;
}

void write_manifest(const Dataset& dataset, const std::string& path) {
  std::ofstream file(path, std::ios::trunc);
  if (!file) throw IoError(path + ": cannot open for writing");
  for (const PairExample& pair : dataset) {
    nlohmann::json line{{"id", pair.features.id},
                        {"tokens", pair.tokens},
                        {"planted", pair.planted},
                        {"answer", pair.answer}};
    file << line.dump() << '\n';
  }
  if (!file) throw IoError(path + ": write failed");
}

std::vector<ManifestEntry> read_manifest(const std::string& path) {
  std::ifstream file(path);
  if (!file) throw IoError(path + ": cannot open");
  std::vector<ManifestEntry> entries;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(file, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const nlohmann::json j = nlohmann::json::parse(line);
      ManifestEntry e;
      e.id = j.at("id").get<std::uint32_t>();
      e.tokens = j.at("tokens").get<TokenSequence>();
      e.planted = j.at("planted").get<std::vector<int>>();
      e.answer = j.at("answer").get<int>();
      entries.push_back(std::move(e));
    } catch (const nlohmann::json::exception& ex) {
      throw IoError(path + ":" + std::to_string(line_no) + ": manifest parse error: " + ex.what());
    }
  }
  return entries;
}

void save_dataset(const Dataset& dataset, const std::string& base_path) {
  write_features(dataset, base_path + ".features.bin");
  write_manifest(dataset, base_path + ".manifest.jsonl");
}

Dataset load_dataset(const std::string& base_path) {
  Dataset dataset = read_features(base_path + ".features.bin");
  std::vector<ManifestEntry> entries = read_manifest(base_path + ".manifest.jsonl");
  std::unordered_map<std::uint32_t, const ManifestEntry*> by_id;
  by_id.reserve(entries.size());
  for (const ManifestEntry& e : entries) by_id[e.id] = &e;
  for (PairExample& pair : dataset) {
    const auto it = by_id.find(pair.features.id);
    if (it == by_id.end())
      throw IoError(base_path + ": record id " + std::to_string(pair.features.id) +
                    " missing from manifest");
    pair.tokens = it->second->tokens;
    pair.planted = it->second->planted;
    pair.answer = it->second->answer;
  }
  return dataset;
}

FrameFeatures BatchItem::valid_features() const {
  FrameFeatures f;
  f.id = id;
  f.frame_count = valid_frames;
  f.dim = feature_dim;
  f.values.assign(padded_features.begin(),
                  padded_features.begin() +
                      static_cast<std::ptrdiff_t>(static_cast<std::size_t>(valid_frames) *
                                                  static_cast<std::size_t>(feature_dim)));
  return f;
}

BatchItem make_batch_item(const PairExample& pair, int dataset_index, int max_video_len,
                          int max_text_len) {
  if (max_video_len < 1 || max_text_len < 1)
    throw std::invalid_argument("make_batch_item: sequence length caps must be >= 1");
  const FrameFeatures& f = pair.features;
  BatchItem item;
  item.id = f.id;
  item.dataset_index = dataset_index;
  item.feature_dim = f.dim;
  item.valid_frames = std::min(f.frame_count, max_video_len);
  item.padded_features.assign(
      static_cast<std::size_t>(max_video_len) * static_cast<std::size_t>(f.dim), 0.0);
  std::copy(f.values.begin(),
            f.values.begin() + static_cast<std::ptrdiff_t>(
                                   static_cast<std::size_t>(item.valid_frames) *
                                   static_cast<std::size_t>(f.dim)),
            item.padded_features.begin());
  item.frame_mask.assign(static_cast<std::size_t>(max_video_len), 0);
  std::fill(item.frame_mask.begin(), item.frame_mask.begin() + item.valid_frames, 1);
  item.tokens.assign(pair.tokens.begin(),
                     pair.tokens.begin() +
                         std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(pair.tokens.size()),
                                                  max_text_len));
  for (int p : pair.planted)
    if (p < item.valid_frames) item.planted.push_back(p);
  item.answer = pair.answer;
  return item;
}

std::vector<Batch> make_batches(const Dataset& dataset, int batch_size, int max_video_len,
                                int max_text_len, std::uint64_t shuffle_seed) {
  if (dataset.empty()) throw std::invalid_argument("make_batches: empty dataset");
  if (batch_size < 1) throw std::invalid_argument("make_batches: batch_size must be >= 1");

  std::vector<int> order(dataset.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(shuffle_seed);
  rng.shuffle(order);

  std::vector<Batch> batches;
  batches.reserve((dataset.size() + static_cast<std::size_t>(batch_size) - 1) /
                  static_cast<std::size_t>(batch_size));
  for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(batch_size)) {
    Batch batch;
    const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(batch_size));
    for (std::size_t i = start; i < end; ++i)
      batch.items.push_back(make_batch_item(dataset[static_cast<std::size_t>(order[i])], order[i],
                                            max_video_len, max_text_len));
    batches.push_back(std::move(batch));
  }
  return batches;
}

}  // namespace fineco
