#include "fineco/objectives.hpp"

#include <string>

#include "fineco/errors.hpp"
#include "fineco/ops.hpp"

namespace fineco {

FinegrainedResult finegrained_loss(std::span<const Tensor> frame_scores,
                                   std::span<const PositiveAssignment> assignments) {
  if (frame_scores.empty())
    throw std::invalid_argument("finegrained_loss: no pairs");
  if (frame_scores.size() != assignments.size())
    throw std::invalid_argument("finegrained_loss: " + std::to_string(frame_scores.size()) +
                                " score vectors vs " + std::to_string(assignments.size()) +
                                " assignments");
  FinegrainedResult result;
  Tensor total = Tensor::scalar(0.0);
  for (std::size_t i = 0; i < frame_scores.size(); ++i) {
    const Tensor& s = frame_scores[i];
    const PositiveAssignment& asg = assignments[i];
    if (s.rank() != 1)
      throw std::invalid_argument("finegrained_loss: rank-1 scores expected, got " +
                                  shape_string(s.shape));
    if (asg.positives.empty())
      throw std::invalid_argument("finegrained_loss: empty positive set for pair " +
                                  std::to_string(i));
    Tensor e = exp(s);
    Tensor a = sum(gather(e, asg.positives));
    result.positive_mass.push_back(a.value());
    if (asg.negatives.empty()) {
      // No negatives to contrast against: -log(A / A) contributes nothing.
      result.negative_mass.push_back(0.0);
      continue;
    }
    Tensor b = sum(gather(e, asg.negatives));
    result.negative_mass.push_back(b.value());
    total = add(total, sub(log(add(a, b)), log(a)));
  }
  result.loss = scale(total, 1.0 / static_cast<double>(frame_scores.size()));
  return result;
}

Tensor pairwise_nce_loss(const BatchPairs& batch, double temperature) {
  const std::size_t n = batch.videos.size();
  if (n == 0) throw std::invalid_argument("pairwise_nce_loss: empty batch");
  if (batch.texts.size() != n)
    throw std::invalid_argument("pairwise_nce_loss: " + std::to_string(n) + " videos vs " +
                                std::to_string(batch.texts.size()) + " texts");
  if (!(temperature > 0.0))
    throw std::invalid_argument("pairwise_nce_loss: temperature must be positive, got " +
                                std::to_string(temperature));
  Tensor videos = stack_rows(batch.videos);
  Tensor texts = stack_rows(batch.texts);
  Tensor sims = scale(matmul(texts, transpose(videos)), 1.0 / temperature);
  Tensor matched = diag(sims);
  Tensor text_to_video = sub(logsumexp_rows(sims), matched);
  Tensor video_to_text = sub(logsumexp_rows(transpose(sims)), matched);
  return scale(add(sum(text_to_video), sum(video_to_text)), 1.0 / (2.0 * static_cast<double>(n)));
}

Tensor qa_cross_entropy_loss(const Tensor& logits, int answer_index) {
  if (logits.rank() != 1)
    throw std::invalid_argument("qa_cross_entropy_loss: rank-1 logits expected, got " +
                                shape_string(logits.shape));
  const int n = logits.shape[0];
  if (answer_index < 0 || answer_index >= n)
    throw std::out_of_range("qa_cross_entropy_loss: answer index " +
                            std::to_string(answer_index) + " outside " + std::to_string(n) +
                            " candidates");
  const int idx[1] = {answer_index};
  return sub(reshape(logsumexp_rows(reshape(logits, {1, n})), {1}), gather(logits, idx));
}

CombinedLoss combined_loss(const FinegrainedResult& l1, const Tensor& l2, double weight) {
  if (l2.numel() != 1)
    throw std::invalid_argument("combined_loss: scalar pair-level loss expected, got " +
                                shape_string(l2.shape));
  CombinedLoss out;
  out.total = add(scale(l1.loss, weight), l2);
  out.breakdown.l1 = l1.loss.value();
  out.breakdown.l2 = l2.value();
  out.breakdown.total = out.total.value();
  out.breakdown.positive_mass = l1.positive_mass;
  out.breakdown.negative_mass = l1.negative_mass;
  return out;
}

}  // namespace fineco
