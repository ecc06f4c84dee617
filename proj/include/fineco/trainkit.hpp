#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fineco/adam.hpp"
#include "fineco/data.hpp"
#include "fineco/encoders.hpp"
#include "fineco/objectives.hpp"
#include "fineco/retrieval.hpp"
#include "fineco/selector.hpp"

// Training orchestration: configuration, the model aggregate, the learning
// rate schedule, the batch loop over the combined objective, checkpoint
// persistence and evaluation. Everything here is deterministic given the
// config and seed — batch order, initialization and the loss log reproduce
// bit for bit, and a resumed run matches an uninterrupted one step for step.

namespace fineco {

enum class Task { retrieval, qa };

std::string task_name(Task task);
Task parse_task(const std::string& name);

struct TrainConfig {
  double lr = 5e-5;
  std::int64_t warmup_steps = 1000;
  std::int64_t total_steps = 0;  // required
  int batch_size = 16;
  std::uint64_t seed = 0;

  SamplingStrategy strategy;     // defaults to median
  double l1_weight = 1.0;        // weight of the frame-level term
  // The frame-level term joins the objective after this many steps (0 = from
  // the start). The selector scores frames by their agreement with the text
  // in the joint space, which is meaningless until the pair-level term has
  // begun aligning that space; training the selector on the unaligned space
  // just locks in its initial ranking. Models whose encoders arrive
  // pretrained get that alignment for free — this delay stands in for it.
  std::int64_t l1_start_step = 0;
  double tau = 0.07;             // contrastive temperature
  double tau_ds = 1.0;           // Dual Softmax temperature (evaluation only)
  Task task = Task::retrieval;
  bool l1_detach_encoder = false;  // train the selector on frozen embeddings
  // Adam's second-moment horizon. When the frame-level term joins mid-run,
  // the selector's moment estimates were accumulated over steps where its
  // gradient was identically zero, so v-hat calibrates to the new gradient
  // scale only after roughly 1/(1-beta2) steps; until then updates are
  // near-full-lr sign steps. A shorter horizon than the usual 0.999 keeps
  // that transient from scrambling the selector it inherited.
  double adam_beta2 = 0.999;

  int embed_dim = 32;
  int proj_dim = 32;
  int fs_hidden = 64;
  int max_video_len = 32;
  int max_text_len = 64;
  bool video_attention = false;
  bool text_attention = false;

  bool select_by_val_loss = false;  // keep the best-validation parameters
  std::int64_t val_interval = 100;

  void validate() const;
};

// key=value text, one entry per line, keys sorted; '#' starts a comment.
std::string serialize_train_config(const TrainConfig& config);
TrainConfig parse_train_config(const std::string& text);
TrainConfig load_train_config(const std::string& path);
void save_train_config(const TrainConfig& config, const std::string& path);

// Linear warmup from 0 to lr over warmup_steps, then linear (power-1
// polynomial) decay hitting exactly 0 at total_steps. Steps are 1-based.
double lr_at_step(std::int64_t step, const TrainConfig& config);

struct QaHeadParams {
  Tensor w1, b1, w2, b2;
};

// All trainable parameters plus the geometry needed to rebuild them. The
// vocabulary, feature width and answer space are derived from the training
// data rather than the config, so they live here and in checkpoints.
struct FineCoModel {
  EncoderDims dims;
  int fs_hidden = 64;
  int answer_vocab = 0;  // 0 = no QA head
  TextEncoderParams text;
  VideoEncoderParams video;
  ProjectionParams projection;
  SelectorParams selector;
  std::optional<QaHeadParams> qa;

  static FineCoModel init(const EncoderDims& dims, int fs_hidden, int answer_vocab,
                          std::uint64_t seed);
  FineCoModel clone() const;  // deep copy (fresh buffers)

  // Stable registration order shared by the optimizer and checkpoints.
  std::vector<std::pair<std::string, Tensor*>> named_params();
  std::vector<Tensor*> params();
};

// Answer logits from the concatenated projected pair representation.
Tensor qa_logits(const FineCoModel& model, const Tensor& video_vec, const Tensor& text_vec);

struct StepLog {
  std::int64_t step = 0;
  double l1 = 0.0;
  double l2 = 0.0;
  double total = 0.0;
  double lr = 0.0;
};

// "step,l1,l2,total,lr" with full round-trip precision.
std::string loss_log_csv(const std::vector<StepLog>& log);

struct Checkpoint {
  TrainConfig config;
  std::int64_t step = 0;
  FineCoModel model;
  AdamState optimizer;
};

struct TrainResult {
  Checkpoint checkpoint;
  std::vector<StepLog> log;
};

// Runs total_steps optimizer steps (or the remainder when resuming from a
// checkpoint of the same config). val_data is only consulted when
// select_by_val_loss is set. A positive stop_after_step halts the loop after
// that step and stamps the checkpoint with it, so a run can be interrupted
// and continued later via resume_from; the schedule is still laid out over
// the full total_steps either way.
TrainResult train(const TrainConfig& config, const Dataset& data,
                  const Dataset* val_data = nullptr, const Checkpoint* resume_from = nullptr,
                  std::int64_t stop_after_step = 0);

void save_checkpoint(const Checkpoint& checkpoint, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

struct EvalReport {
  RetrievalMetrics metrics;
  double selector_precision = 0.0;
  double selector_recall = 0.0;
};

// Deterministic full-dataset evaluation. Retrieval reports text-to-video
// R@1/5/10 (report points clamped to the candidate count) and median rank;
// QA reports answer accuracy. Selector precision/recall are measured against
// the planted sets using the checkpoint's sampling strategy with the whole
// evaluation set as the context.
EvalReport evaluate(const Checkpoint& checkpoint, const Dataset& data, Task task,
                    bool use_dual_softmax);

}  // namespace fineco
