#pragma once

#include <span>
#include <vector>

#include "fineco/selector.hpp"
#include "fineco/tensor.hpp"

// Training objectives. The frame-level loss contrasts each pair's positive
// frames against its negative frames through the exponentiated score masses
// A = sum_{k in P} e^{s_k} and B = sum_{k in N} e^{s_k}, charging
// -log(A / (A + B)) per pair. The pair-level loss is the symmetric in-batch
// softmax contrastive objective over pooled projections, and the QA loss is
// plain cross-entropy over answer logits. All three run on the tape.

namespace fineco {

// Pooled, projected per-pair vectors; index i of videos matches index i of
// texts (the in-batch ground truth).
struct BatchPairs {
  std::vector<Tensor> videos;
  std::vector<Tensor> texts;
};

struct FinegrainedResult {
  Tensor loss;                        // scalar, mean over pairs
  std::vector<double> positive_mass;  // A_i per pair
  std::vector<double> negative_mass;  // B_i per pair
};

// Mean over pairs of -log(A_i / (A_i + B_i)). A pair with an empty negative
// set contributes exactly zero. Positive sets must be non-empty.
FinegrainedResult finegrained_loss(std::span<const Tensor> frame_scores,
                                   std::span<const PositiveAssignment> assignments);

// Symmetric InfoNCE over the batch's similarity matrix at temperature tau:
// the mean of the text-to-video and video-to-text cross-entropies.
Tensor pairwise_nce_loss(const BatchPairs& batch, double temperature);

// Cross-entropy of one answer distribution: logsumexp(logits) - logits[answer].
Tensor qa_cross_entropy_loss(const Tensor& logits, int answer_index);

struct LossBreakdown {
  double l1 = 0.0;     // frame-level term
  double l2 = 0.0;     // pair-level (or QA) term
  double total = 0.0;  // weight * l1 + l2
  std::vector<double> positive_mass;
  std::vector<double> negative_mass;
};

struct CombinedLoss {
  Tensor total;  // scalar on the tape
  LossBreakdown breakdown;
};

// total = weight * l1 + l2, with the per-pair masses carried through for
// logging. With weight = 0 the total equals l2 exactly.
CombinedLoss combined_loss(const FinegrainedResult& l1, const Tensor& l2, double weight);

}  // namespace fineco
