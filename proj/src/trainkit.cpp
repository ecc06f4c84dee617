#include "fineco/trainkit.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "fineco/errors.hpp"
#include "fineco/ops.hpp"
#include "fineco/rng.hpp"

namespace fineco {
namespace {

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string format_bool(bool v) { return v ? "true" : "false"; }

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw UsageError("config: boolean expected for '" + key + "', got '" + v + "'");
}

}  // namespace

std::string task_name(Task task) { return task == Task::qa ? "qa" : "retrieval"; }

Task parse_task(const std::string& name) {
  if (name == "retrieval") return Task::retrieval;
  if (name == "qa") return Task::qa;
  throw UsageError("task '" + name + "' not understood; expected retrieval or qa");
}

void TrainConfig::validate() const {
  if (!(lr > 0.0)) throw UsageError("config: lr must be positive");
  if (warmup_steps < 0) throw UsageError("config: warmup_steps must be >= 0");
  if (total_steps < 1) throw UsageError("config: total_steps must be >= 1");
  if (warmup_steps >= total_steps)
    throw UsageError("config: warmup_steps (" + std::to_string(warmup_steps) +
                     ") must be below total_steps (" + std::to_string(total_steps) + ")");
  if (batch_size < 1) throw UsageError("config: batch_size must be >= 1");
  if (l1_weight < 0.0) throw UsageError("config: l1_weight must be >= 0");
  if (l1_start_step < 0) throw UsageError("config: l1_start_step must be >= 0");
  if (!(tau > 0.0)) throw UsageError("config: tau must be positive");
  if (!(tau_ds > 0.0)) throw UsageError("config: tau_ds must be positive");
  if (!(adam_beta2 > 0.0) || adam_beta2 >= 1.0)
    throw UsageError("config: adam_beta2 must be in (0, 1)");
  if (embed_dim < 1 || proj_dim < 1 || fs_hidden < 1)
    throw UsageError("config: model widths must be >= 1");
  if (max_video_len < 1 || max_text_len < 1)
    throw UsageError("config: sequence length caps must be >= 1");
  if (val_interval < 1) throw UsageError("config: val_interval must be >= 1");
  strategy.validate();
}

std::string serialize_train_config(const TrainConfig& c) {
  // std::map keeps the keys sorted, which keeps the file canonical.
  std::map<std::string, std::string> kv;
  kv["adam_beta2"] = format_double(c.adam_beta2);
  kv["batch_size"] = std::to_string(c.batch_size);
  kv["embed_dim"] = std::to_string(c.embed_dim);
  kv["fs_hidden"] = std::to_string(c.fs_hidden);
  kv["l1_detach_encoder"] = format_bool(c.l1_detach_encoder);
  kv["l1_start_step"] = std::to_string(c.l1_start_step);
  kv["l1_weight"] = format_double(c.l1_weight);
  kv["lr"] = format_double(c.lr);
  kv["max_text_len"] = std::to_string(c.max_text_len);
  kv["max_video_len"] = std::to_string(c.max_video_len);
  kv["proj_dim"] = std::to_string(c.proj_dim);
  kv["seed"] = std::to_string(c.seed);
  kv["select_by_val_loss"] = format_bool(c.select_by_val_loss);
  kv["strategy"] = c.strategy.to_string();
  kv["task"] = task_name(c.task);
  kv["tau"] = format_double(c.tau);
  kv["tau_ds"] = format_double(c.tau_ds);
  kv["text_attention"] = format_bool(c.text_attention);
  kv["total_steps"] = std::to_string(c.total_steps);
  kv["val_interval"] = std::to_string(c.val_interval);
  kv["video_attention"] = format_bool(c.video_attention);
  kv["warmup_steps"] = std::to_string(c.warmup_steps);
  std::string out;
  for (const auto& [k, v] : kv) out += k + "=" + v + "\n";
  return out;
}

TrainConfig parse_train_config(const std::string& text) {
  TrainConfig c;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    while (!line.empty() && (line.back() == ' ' || line.back() == '\t' || line.back() == '\r'))
      line.pop_back();
    std::size_t begin = line.find_first_not_of(" \t");
    if (begin == std::string::npos) continue;
    const std::size_t eq = line.find('=', begin);
    if (eq == std::string::npos)
      throw UsageError("config line " + std::to_string(line_no) + ": expected key=value, got '" +
                       line + "'");
    const std::string key = line.substr(begin, eq - begin);
    const std::string value = line.substr(eq + 1);
    try {
      if (key == "adam_beta2") c.adam_beta2 = std::stod(value);
      else if (key == "batch_size") c.batch_size = std::stoi(value);
      else if (key == "embed_dim") c.embed_dim = std::stoi(value);
      else if (key == "fs_hidden") c.fs_hidden = std::stoi(value);
      else if (key == "l1_detach_encoder") c.l1_detach_encoder = parse_bool(key, value);
      else if (key == "l1_start_step") c.l1_start_step = std::stoll(value);
      else if (key == "l1_weight") c.l1_weight = std::stod(value);
      else if (key == "lr") c.lr = std::stod(value);
      else if (key == "max_text_len") c.max_text_len = std::stoi(value);
      else if (key == "max_video_len") c.max_video_len = std::stoi(value);
      else if (key == "proj_dim") c.proj_dim = std::stoi(value);
      else if (key == "seed") c.seed = std::stoull(value);
      else if (key == "select_by_val_loss") c.select_by_val_loss = parse_bool(key, value);
      else if (key == "strategy") c.strategy = SamplingStrategy::parse(value);
      else if (key == "task") c.task = parse_task(value);
      else if (key == "tau") c.tau = std::stod(value);
      else if (key == "tau_ds") c.tau_ds = std::stod(value);
      else if (key == "text_attention") c.text_attention = parse_bool(key, value);
      else if (key == "total_steps") c.total_steps = std::stoll(value);
      else if (key == "val_interval") c.val_interval = std::stoll(value);
      else if (key == "video_attention") c.video_attention = parse_bool(key, value);
      else if (key == "warmup_steps") c.warmup_steps = std::stoll(value);
      else
        throw UsageError("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    } catch (const UsageError&) {
      throw;
    } catch (const std::exception&) {
      throw UsageError("config line " + std::to_string(line_no) + ": cannot parse value '" +
                       value + "' for key '" + key + "'");
    }
  }
  return c;
}

TrainConfig load_train_config(const std::string& path) {
  std::ifstream file(path);
  if (!file) throw IoError(path + ": cannot open");
  std::ostringstream ss;
  ss << file.rdbuf();
  return parse_train_config(ss.str());
}

void save_train_config(const TrainConfig& config, const std::string& path) {
  std::ofstream file(path, std::ios::trunc);
  if (!file) throw IoError(path + ": cannot open for writing");
  file << serialize_train_config(config);
  if (!file) throw IoError(path + ": write failed");
}

double lr_at_step(std::int64_t step, const TrainConfig& config) {
  if (step <= 0) return 0.0;
  if (config.warmup_steps > 0 && step <= config.warmup_steps)
    return config.lr * static_cast<double>(step) / static_cast<double>(config.warmup_steps);
  if (step >= config.total_steps) return 0.0;
  return config.lr * static_cast<double>(config.total_steps - step) /
         static_cast<double>(config.total_steps - config.warmup_steps);
}

FineCoModel FineCoModel::init(const EncoderDims& dims, int fs_hidden, int answer_vocab,
                              std::uint64_t seed) {
  FineCoModel m;
  m.dims = dims;
  m.fs_hidden = fs_hidden;
  m.answer_vocab = answer_vocab;
  Rng rng(seed);
  m.text = init_text_encoder(dims, rng);
  m.video = init_video_encoder(dims, rng);
  m.projection = init_projection(dims, rng);
  // The selector scores frames in the projected joint space (see
  // forward_pair), so its input width is proj_dim on both halves.
  m.selector = init_selector(dims.proj_dim, fs_hidden, rng);
  if (answer_vocab > 0) {
    auto init = [&rng](std::vector<int> shape) {
      Tensor t = Tensor::zeros(std::move(shape), /*requires_grad=*/true);
      for (double& x : *t.data) x = rng.uniform(-0.1, 0.1);
      return t;
    };
    QaHeadParams qa;
    qa.w1 = init({2 * dims.proj_dim, fs_hidden});
    qa.b1 = init({fs_hidden});
    qa.w2 = init({fs_hidden, answer_vocab});
    qa.b2 = init({answer_vocab});
    m.qa = std::move(qa);
  }
  return m;
}

FineCoModel FineCoModel::clone() const {
  FineCoModel copy = *this;  // shares buffers until the rebind below
  for (auto& [name, tensor] : copy.named_params())
    *tensor = Tensor::from_values(tensor->shape, *tensor->data, /*requires_grad=*/true);
  return copy;
}

std::vector<std::pair<std::string, Tensor*>> FineCoModel::named_params() {
  std::vector<std::pair<std::string, Tensor*>> out;
  auto push = [&out](const char* name, Tensor& t) { out.emplace_back(name, &t); };
  push("text.embedding", text.embedding);
  push("text.w", text.w);
  push("text.b", text.b);
  if (text.attention) {
    push("text.attn.pos", text.attention->pos);
    push("text.attn.wq", text.attention->wq);
    push("text.attn.wk", text.attention->wk);
    push("text.attn.wv", text.attention->wv);
  }
  push("video.w", video.w);
  push("video.b", video.b);
  if (video.attention) {
    push("video.attn.pos", video.attention->pos);
    push("video.attn.wq", video.attention->wq);
    push("video.attn.wk", video.attention->wk);
    push("video.attn.wv", video.attention->wv);
  }
  push("proj.video_w", projection.video_w);
  push("proj.video_b", projection.video_b);
  push("proj.text_w", projection.text_w);
  push("proj.text_b", projection.text_b);
  push("fs.w1", selector.w1);
  push("fs.b1", selector.b1);
  push("fs.w2", selector.w2);
  push("fs.b2", selector.b2);
  if (qa) {
    push("qa.w1", qa->w1);
    push("qa.b1", qa->b1);
    push("qa.w2", qa->w2);
    push("qa.b2", qa->b2);
  }
  return out;
}

std::vector<Tensor*> FineCoModel::params() {
  std::vector<Tensor*> out;
  for (auto& [name, t] : named_params()) out.push_back(t);
  return out;
}

Tensor qa_logits(const FineCoModel& model, const Tensor& video_vec, const Tensor& text_vec) {
  if (!model.qa) throw std::invalid_argument("qa_logits: model has no answer head");
  const int p = model.dims.proj_dim;
  Tensor joint = concat_cols(reshape(video_vec, {1, p}), reshape(text_vec, {1, p}));
  Tensor hidden = tanh(add_rowvec(matmul(joint, model.qa->w1), model.qa->b1));
  return reshape(add_rowvec(matmul(hidden, model.qa->w2), model.qa->b2), {model.answer_vocab});
}

std::string loss_log_csv(const std::vector<StepLog>& log) {
  std::string out = "step,l1,l2,total,lr\n";
  for (const StepLog& entry : log) {
    out += std::to_string(entry.step) + "," + format_double(entry.l1) + "," +
           format_double(entry.l2) + "," + format_double(entry.total) + "," +
           format_double(entry.lr) + "\n";
  }
  return out;
}

namespace {

struct Geometry {
  int feature_dim = 0;
  int vocab_size = 0;
  int answer_vocab = 0;
};

Geometry derive_geometry(const Dataset& data, Task task) {
  if (data.empty()) throw std::invalid_argument("train: empty dataset");
  Geometry g;
  g.feature_dim = data[0].features.dim;
  int max_token = -1;
  int max_answer = -1;
  for (const PairExample& pair : data) {
    if (pair.features.dim != g.feature_dim)
      throw std::invalid_argument("train: mixed feature widths (" + std::to_string(g.feature_dim) +
                                  " vs " + std::to_string(pair.features.dim) + ")");
    if (pair.tokens.empty())
      throw std::invalid_argument("train: pair " + std::to_string(pair.features.id) +
                                  " has no tokens");
    for (int t : pair.tokens) {
      if (t < 0)
        throw std::invalid_argument("train: negative token id in pair " +
                                    std::to_string(pair.features.id));
      max_token = std::max(max_token, t);
    }
    if (task == Task::qa) {
      if (pair.answer < 0)
        throw std::invalid_argument("train: qa task needs non-negative answers, pair " +
                                    std::to_string(pair.features.id) + " has " +
                                    std::to_string(pair.answer));
      max_answer = std::max(max_answer, pair.answer);
    }
  }
  g.vocab_size = max_token + 1;
  g.answer_vocab = task == Task::qa ? max_answer + 1 : 0;
  return g;
}

struct PairForward {
  Tensor score_tensor;  // [K] selector distribution
  FrameScores scores;
  Tensor video_vec, text_vec;  // projected pair representation
};

PairForward forward_pair(const FineCoModel& model, const BatchItem& item, double l1_weight,
                         bool l1_detach) {
  PairForward out;
  Tensor frames = to_tensor(item.valid_features());
  Tensor frame_emb = encode_video(frames, model.video, model.dims);
  Tensor text_emb = encode_text(item.tokens, model.text, model.dims);
  // The selector reads the joint-space view of each frame and of the text:
  // per-frame projected embeddings against the projected text. The pair-level
  // loss aligns exactly this space, so frame-text agreement is measurable
  // where the selector looks; the raw encoder outputs carry the alignment
  // only faintly and leave the selector without a usable signal.
  //
  // Both inputs are L2-normalized. Frame vectors run several times longer
  // than the text vector in this space, and with that imbalance the
  // selector's gradient treats two inputs with the same frame but different
  // texts as near-duplicates: each frame's push up (as a positive for its own
  // text) and pushes down (as a negative elsewhere) land on the same spot and
  // cancel, so what remains trains a text-blind frame hash and the selection
  // degrades to chance. Unit-norm inputs let those votes land apart, and they
  // also remove frame length itself as a learnable shortcut.
  auto project_frames = [&model](const Tensor& fe, const Tensor& te) {
    const int p = model.dims.proj_dim;
    Tensor pf = add_rowvec(matmul(fe, model.projection.video_w), model.projection.video_b);
    Tensor pt = reshape(
        add_rowvec(matmul(reshape(te, {1, model.dims.embed_dim}), model.projection.text_w),
                   model.projection.text_b),
        {p});
    return std::pair<Tensor, Tensor>(normalize_rows(pf), normalize_rows(pt));
  };
  if (l1_weight == 0.0) {
    // The frame-level term is off: keep the selector entirely off the tape.
    NoGradGuard no_grad;
    auto [pf, pt] = project_frames(frame_emb, text_emb);
    out.score_tensor = score_frames(pf, pt, model.selector);
  } else if (l1_detach) {
    auto [pf, pt] = project_frames(detach(frame_emb), detach(text_emb));
    out.score_tensor = score_frames(detach(pf), detach(pt), model.selector);
  } else {
    auto [pf, pt] = project_frames(frame_emb, text_emb);
    out.score_tensor = score_frames(pf, pt, model.selector);
  }
  out.scores.values = *out.score_tensor.data;
  auto [video_vec, text_vec] = pool_and_project(frame_emb, text_emb, model.projection);
  out.video_vec = video_vec;
  out.text_vec = text_vec;
  return out;
}

struct BatchObjective {
  CombinedLoss loss;
  std::vector<PositiveAssignment> assignments;
};

BatchObjective batch_objective(const FineCoModel& model, const TrainConfig& config,
                               const std::vector<BatchItem>& items, double l1_weight) {
  const std::size_t n = items.size();
  std::vector<Tensor> score_tensors;
  std::vector<FrameScores> batch_scores;
  BatchPairs pairs;
  score_tensors.reserve(n);
  batch_scores.reserve(n);
  for (const BatchItem& item : items) {
    PairForward f = forward_pair(model, item, l1_weight, config.l1_detach_encoder);
    score_tensors.push_back(f.score_tensor);
    batch_scores.push_back(std::move(f.scores));
    pairs.videos.push_back(f.video_vec);
    pairs.texts.push_back(f.text_vec);
  }

  BatchObjective out;
  out.assignments.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    out.assignments.push_back(assign_positives(batch_scores[i], config.strategy, batch_scores));

  FinegrainedResult frame_loss = finegrained_loss(score_tensors, out.assignments);
  Tensor pair_loss;
  if (config.task == Task::retrieval) {
    pair_loss = pairwise_nce_loss(pairs, config.tau);
  } else {
    Tensor total = Tensor::scalar(0.0);
    for (std::size_t i = 0; i < n; ++i)
      total = add(total, qa_cross_entropy_loss(qa_logits(model, pairs.videos[i], pairs.texts[i]),
                                               items[i].answer));
    pair_loss = scale(total, 1.0 / static_cast<double>(n));
  }
  out.loss = combined_loss(frame_loss, pair_loss, l1_weight);
  return out;
}

double validation_loss(const FineCoModel& model, const TrainConfig& config, const Dataset& data,
                       double l1_weight) {
  NoGradGuard no_grad;
  double total = 0.0;
  std::size_t counted = 0;
  std::vector<BatchItem> items;
  for (std::size_t start = 0; start < data.size(); start += static_cast<std::size_t>(config.batch_size)) {
    items.clear();
    const std::size_t end =
        std::min(data.size(), start + static_cast<std::size_t>(config.batch_size));
    for (std::size_t i = start; i < end; ++i)
      items.push_back(make_batch_item(data[i], static_cast<int>(i), config.max_video_len,
                                      config.max_text_len));
    const BatchObjective obj = batch_objective(model, config, items, l1_weight);
    total += obj.loss.breakdown.total * static_cast<double>(items.size());
    counted += items.size();
  }
  return total / static_cast<double>(counted);
}

}  // namespace

TrainResult train(const TrainConfig& config, const Dataset& data, const Dataset* val_data,
                  const Checkpoint* resume_from, std::int64_t stop_after_step) {
  config.validate();
  if (stop_after_step < 0)
    throw UsageError("train: stop_after_step must be >= 0 (0 runs to total_steps)");
  const Geometry geometry = derive_geometry(data, config.task);

  EncoderDims dims;
  dims.feature_dim = geometry.feature_dim;
  dims.embed_dim = config.embed_dim;
  dims.proj_dim = config.proj_dim;
  dims.vocab_size = geometry.vocab_size;
  dims.max_video_len = config.max_video_len;
  dims.max_text_len = config.max_text_len;
  dims.video_attention = config.video_attention;
  dims.text_attention = config.text_attention;

  TrainResult result;
  FineCoModel model;
  AdamState optimizer;
  std::int64_t start_step = 0;
  if (resume_from != nullptr) {
    if (serialize_train_config(resume_from->config) != serialize_train_config(config))
      throw std::invalid_argument("train: resume checkpoint was written with a different config");
    if (resume_from->model.dims.feature_dim != dims.feature_dim ||
        resume_from->model.dims.vocab_size < dims.vocab_size ||
        resume_from->model.answer_vocab < geometry.answer_vocab)
      throw std::invalid_argument("train: resume checkpoint does not fit this dataset's geometry");
    model = resume_from->model.clone();
    optimizer = resume_from->optimizer;
    start_step = resume_from->step;
  } else {
    model = FineCoModel::init(dims, config.fs_hidden, geometry.answer_vocab,
                              Rng::mix(config.seed, 3));
    optimizer.lr = config.lr;
    optimizer.beta2 = config.adam_beta2;
    const std::vector<Tensor*> params = model.params();
    optimizer.init(params);
  }

  const std::int64_t steps_per_epoch =
      (static_cast<std::int64_t>(data.size()) + config.batch_size - 1) / config.batch_size;
  std::vector<Batch> epoch_batches;
  std::int64_t cached_epoch = -1;

  double best_val = 0.0;
  std::int64_t best_step = -1;
  std::optional<FineCoModel> best_model;

  const std::int64_t last_step =
      stop_after_step > 0 ? std::max(start_step, std::min(stop_after_step, config.total_steps))
                          : config.total_steps;

  const std::vector<Tensor*> params = model.params();
  for (std::int64_t step = start_step + 1; step <= last_step; ++step) {
    const std::int64_t epoch = (step - 1) / steps_per_epoch;
    if (epoch != cached_epoch) {
      epoch_batches = make_batches(data, config.batch_size, config.max_video_len,
                                   config.max_text_len, Rng::mix(config.seed, 1000 + static_cast<std::uint64_t>(epoch)));
      cached_epoch = epoch;
    }
    const Batch& batch = epoch_batches[static_cast<std::size_t>((step - 1) % steps_per_epoch)];

    StepLog entry;
    entry.step = step;
    entry.lr = lr_at_step(step, config);
    const double l1_weight = step > config.l1_start_step ? config.l1_weight : 0.0;
    {
      GradientTape tape;
      const BatchObjective obj = batch_objective(model, config, batch.items, l1_weight);
      entry.l1 = obj.loss.breakdown.l1;
      entry.l2 = obj.loss.breakdown.l2;
      entry.total = obj.loss.breakdown.total;
      if (!std::isfinite(entry.total))
        throw NumericError("train: non-finite loss at step " + std::to_string(step) + " (total=" +
                           format_double(entry.total) + ")");
      tape.backward(obj.loss.total);
    }
    optimizer.lr = entry.lr;
    adam_step(optimizer, params);
    result.log.push_back(entry);

    if (config.select_by_val_loss && val_data != nullptr &&
        (step % config.val_interval == 0 || step == last_step)) {
      const double vl = validation_loss(model, config, *val_data, l1_weight);
      if (best_step < 0 || vl < best_val) {
        best_val = vl;
        best_step = step;
        best_model = model.clone();
      }
    }
  }

  result.checkpoint.config = config;
  result.checkpoint.step = last_step;
  result.checkpoint.model = best_model ? std::move(*best_model) : std::move(model);
  result.checkpoint.optimizer = std::move(optimizer);
  return result;
}

void save_checkpoint(const Checkpoint& checkpoint, const std::string& path) {
  std::string out;
  out.append("FVCP", 4);
  auto put_u16 = [&out](std::uint16_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
  };
  auto put_u32 = [&out](std::uint32_t v) {
    for (int s = 0; s < 32; s += 8) out.push_back(static_cast<char>((v >> s) & 0xff));
  };
  auto put_u64 = [&out](std::uint64_t v) {
    for (int s = 0; s < 64; s += 8) out.push_back(static_cast<char>((v >> s) & 0xff));
  };
  auto put_f64 = [&put_u64](double v) { put_u64(std::bit_cast<std::uint64_t>(v)); };

  put_u16(1);  // version
  const std::string config_text = serialize_train_config(checkpoint.config);
  put_u32(static_cast<std::uint32_t>(config_text.size()));
  out += config_text;

  const FineCoModel& model = checkpoint.model;
  put_u32(static_cast<std::uint32_t>(model.dims.feature_dim));
  put_u32(static_cast<std::uint32_t>(model.dims.vocab_size));
  put_u32(static_cast<std::uint32_t>(model.answer_vocab));
  put_u64(static_cast<std::uint64_t>(checkpoint.step));

  auto named = const_cast<FineCoModel&>(model).named_params();
  put_u32(static_cast<std::uint32_t>(named.size()));
  for (const auto& [name, tensor] : named) {
    put_u16(static_cast<std::uint16_t>(name.size()));
    out += name;
    put_u16(static_cast<std::uint16_t>(tensor->shape.size()));
    for (int d : tensor->shape) put_u32(static_cast<std::uint32_t>(d));
    for (double v : *tensor->data) put_f64(v);
  }

  const AdamState& opt = checkpoint.optimizer;
  if (opt.m.size() != named.size())
    throw IoError(path + ": optimizer holds " + std::to_string(opt.m.size()) +
                  " moment blocks for " + std::to_string(named.size()) + " parameters");
  put_u64(static_cast<std::uint64_t>(opt.step));
  put_f64(opt.lr);
  put_f64(opt.beta1);
  put_f64(opt.beta2);
  put_f64(opt.epsilon);
  for (std::size_t i = 0; i < named.size(); ++i) {
    for (double v : opt.m[i]) put_f64(v);
    for (double v : opt.v[i]) put_f64(v);
  }

  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw IoError(path + ": cannot open for writing");
  file.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!file) throw IoError(path + ": write failed");
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw IoError(path + ": cannot open");
  std::ostringstream ss;
  ss << file.rdbuf();
  const std::string buf = ss.str();

  std::size_t pos = 0;
  auto need = [&](std::size_t n) {
    if (pos + n > buf.size())
      throw IoError(path + ": truncated checkpoint, needed " + std::to_string(pos + n) +
                    " bytes but file has " + std::to_string(buf.size()));
  };
  auto u16 = [&]() {
    need(2);
    const auto* p = reinterpret_cast<const unsigned char*>(buf.data() + pos);
    pos += 2;
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
  };
  auto u32 = [&]() {
    need(4);
    const auto* p = reinterpret_cast<const unsigned char*>(buf.data() + pos);
    pos += 4;
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
  };
  auto u64 = [&]() {
    std::uint64_t v = u32();
    return v | (static_cast<std::uint64_t>(u32()) << 32);
  };
  auto f64 = [&]() { return std::bit_cast<double>(u64()); };

  need(4);
  if (std::memcmp(buf.data(), "FVCP", 4) != 0)
    throw IoError(path + ": bad magic, not a checkpoint");
  pos = 4;
  const std::uint16_t version = u16();
  if (version != 1)
    throw IoError(path + ": unsupported checkpoint version " + std::to_string(version));

  Checkpoint ckpt;
  const std::uint32_t config_len = u32();
  need(config_len);
  ckpt.config = parse_train_config(buf.substr(pos, config_len));
  pos += config_len;

  EncoderDims dims;
  dims.feature_dim = static_cast<int>(u32());
  dims.vocab_size = static_cast<int>(u32());
  const int answer_vocab = static_cast<int>(u32());
  dims.embed_dim = ckpt.config.embed_dim;
  dims.proj_dim = ckpt.config.proj_dim;
  dims.max_video_len = ckpt.config.max_video_len;
  dims.max_text_len = ckpt.config.max_text_len;
  dims.video_attention = ckpt.config.video_attention;
  dims.text_attention = ckpt.config.text_attention;
  ckpt.step = static_cast<std::int64_t>(u64());

  ckpt.model = FineCoModel::init(dims, ckpt.config.fs_hidden, answer_vocab, 0);
  auto named = ckpt.model.named_params();
  const std::uint32_t param_count = u32();
  if (param_count != named.size())
    throw IoError(path + ": checkpoint lists " + std::to_string(param_count) +
                  " parameters, model has " + std::to_string(named.size()));
  for (auto& [name, tensor] : named) {
    const std::uint16_t name_len = u16();
    need(name_len);
    const std::string file_name = buf.substr(pos, name_len);
    pos += name_len;
    if (file_name != name)
      throw IoError(path + ": shape table mismatch, expected parameter '" + name + "', file has '" +
                    file_name + "'");
    const std::uint16_t ndim = u16();
    std::vector<int> shape(ndim);
    for (auto& d : shape) d = static_cast<int>(u32());
    if (shape != tensor->shape)
      throw IoError(path + ": shape table mismatch at '" + name + "': expected " +
                    shape_string(tensor->shape) + ", file has " + shape_string(shape));
    for (double& v : *tensor->data) v = f64();
  }

  AdamState& opt = ckpt.optimizer;
  opt.step = static_cast<std::int64_t>(u64());
  opt.lr = f64();
  opt.beta1 = f64();
  opt.beta2 = f64();
  opt.epsilon = f64();
  opt.m.resize(named.size());
  opt.v.resize(named.size());
  for (std::size_t i = 0; i < named.size(); ++i) {
    opt.m[i].resize(named[i].second->numel());
    opt.v[i].resize(named[i].second->numel());
    for (double& v : opt.m[i]) v = f64();
    for (double& v : opt.v[i]) v = f64();
  }
  if (pos != buf.size())
    throw IoError(path + ": " + std::to_string(buf.size() - pos) +
                  " trailing bytes after checkpoint payload");
  return ckpt;
}

EvalReport evaluate(const Checkpoint& checkpoint, const Dataset& data, Task task,
                    bool use_dual_softmax) {
  if (data.empty()) throw std::invalid_argument("evaluate: empty dataset");
  const FineCoModel& model = checkpoint.model;
  if (task == Task::qa && !model.qa)
    throw std::invalid_argument("evaluate: checkpoint has no answer head for the qa task");

  NoGradGuard no_grad;
  const TrainConfig& config = checkpoint.config;
  std::vector<BatchItem> items;
  items.reserve(data.size());
  for (std::size_t i = 0; i < data.size(); ++i)
    items.push_back(
        make_batch_item(data[i], static_cast<int>(i), config.max_video_len, config.max_text_len));

  std::vector<std::vector<double>> video_vecs, text_vecs;
  std::vector<FrameScores> all_scores;
  std::vector<Tensor> video_tensors, text_tensors;
  video_vecs.reserve(items.size());
  text_vecs.reserve(items.size());
  all_scores.reserve(items.size());
  for (const BatchItem& item : items) {
    PairForward f = forward_pair(model, item, /*l1_weight=*/1.0, /*l1_detach=*/false);
    video_vecs.push_back(*f.video_vec.data);
    text_vecs.push_back(*f.text_vec.data);
    all_scores.push_back(std::move(f.scores));
    video_tensors.push_back(f.video_vec);
    text_tensors.push_back(f.text_vec);
  }

  EvalReport report;
  double precision_sum = 0.0, recall_sum = 0.0;
  std::size_t counted = 0;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (items[i].planted.empty()) continue;
    const PositiveAssignment assignment =
        assign_positives(all_scores[i], config.strategy, all_scores);
    const auto [precision, recall] = selector_metrics(assignment, items[i].planted);
    precision_sum += precision;
    recall_sum += recall;
    ++counted;
  }
  if (counted > 0) {
    report.selector_precision = precision_sum / static_cast<double>(counted);
    report.selector_recall = recall_sum / static_cast<double>(counted);
  }

  if (task == Task::retrieval) {
    SimilarityMatrix sims = similarity_matrix(text_vecs, video_vecs);
    if (use_dual_softmax) sims = dual_softmax(sims, config.tau_ds);
    const std::size_t n = sims.cols;
    report.metrics.r1 = recall_at_k(sims, std::min<std::size_t>(1, n));
    report.metrics.r5 = recall_at_k(sims, std::min<std::size_t>(5, n));
    report.metrics.r10 = recall_at_k(sims, std::min<std::size_t>(10, n));
    report.metrics.medr = median_rank(sims);
  } else {
    std::size_t correct = 0;
    for (std::size_t i = 0; i < items.size(); ++i) {
      const Tensor logits = qa_logits(model, video_tensors[i], text_tensors[i]);
      int best = 0;
      for (int j = 1; j < logits.shape[0]; ++j)
        if (logits.at(j) > logits.at(best)) best = j;
      if (best == items[i].answer) ++correct;
    }
    report.metrics.accuracy = static_cast<double>(correct) / static_cast<double>(items.size());
  }
  return report;
}

}  // namespace fineco
