#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fineco/rng.hpp"
#include "fineco/tensor.hpp"

// Cross-modal frame selector: a one-hidden-layer perceptron scores each
// frame against the text and a softmax over the video's valid frames turns
// the logits into a relevance distribution. The sampling strategies then
// split the frames of each pair into positives P and negatives N; that
// split is a discrete decision and carries no gradient.

namespace fineco {

// Relevance distribution over one video's valid frames (sums to 1).
struct FrameScores {
  std::vector<double> values;

  int frame_count() const noexcept { return static_cast<int>(values.size()); }
  // View padded out to `padded_len`; positions past the valid frames are 0.
  std::vector<double> padded(int padded_len) const;
};

struct SelectorParams {
  Tensor w1;  // [2*embed_dim x hidden]
  Tensor b1;  // [hidden]
  Tensor w2;  // [hidden x 1]
  Tensor b2;  // [1]
};

SelectorParams init_selector(int embed_dim, int hidden, Rng& rng);

// [K x d] frame embeddings + [d] text embedding -> [K] softmax scores.
Tensor score_frames(const Tensor& frame_embeddings, const Tensor& text_embedding,
                    const SelectorParams& params);

// How positives are chosen from the score distribution:
//   fixed_k  — top-k by score (ties resolved toward the lower index)
//   median   — frames strictly above the mean of per-video medians in the
//              current batch; falls back to the top-1 frame if none qualify
//   ratio    — top ceil(rho * K) frames
//   random   — k frames drawn without replacement; the draw is derived from
//              the strategy seed plus the score bits, so identical inputs
//              reproduce identical picks while distinct pairs differ
struct SamplingStrategy {
  enum class Kind { fixed_k, median, ratio, random };

  Kind kind = Kind::median;
  int k = 0;            // fixed_k / random
  double rho = 0.0;     // ratio, in (0, 1]
  std::uint64_t seed = 0;  // random

  // Textual form used by configs and CSVs: "fixed_k:K", "median",
  // "ratio:RHO", "random:K:SEED".
  static SamplingStrategy parse(const std::string& text);
  std::string to_string() const;
  // The "k or rho" column for sweep outputs; empty for median.
  std::string k_or_rho() const;
  void validate() const;
};

struct PositiveAssignment {
  std::vector<int> positives;  // ascending, never empty
  std::vector<int> negatives;  // ascending, may be empty

  int count() const noexcept { return static_cast<int>(positives.size()); }
};

// Splits one pair's valid frames into P and N. `batch_context` must hold the
// FrameScores of every pair in the current batch for the median strategy
// (it is ignored by the other strategies).
PositiveAssignment assign_positives(const FrameScores& scores, const SamplingStrategy& strategy,
                                    std::span<const FrameScores> batch_context = {});

// Precision/recall of the assignment's positives against the planted frame
// set. Returns {precision, recall}.
std::pair<double, double> selector_metrics(const PositiveAssignment& assignment,
                                           std::span<const int> planted);

}  // namespace fineco
