#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "fineco/rng.hpp"
#include "fineco/tensor.hpp"

// Lightweight two-tower encoders. The text tower embeds token ids, applies a
// tanh affine transform and mean-pools; the video tower applies the same
// transform shape to per-frame feature vectors. Both towers can enable a
// single-head self-attention block (with a learned positional table) for
// order-sensitive variants; the default configuration is attention-free, so
// text encoding is a pure bag of tokens.

namespace fineco {

using TokenSequence = std::vector<int>;

// One video's frame features: valid frames only, row-major [frame_count x dim].
struct FrameFeatures {
  std::uint32_t id = 0;
  int frame_count = 0;
  int dim = 0;
  std::vector<double> values;

  double at(int frame, int j) const {
    return values[static_cast<std::size_t>(frame) * static_cast<std::size_t>(dim) +
                  static_cast<std::size_t>(j)];
  }
};

Tensor to_tensor(const FrameFeatures& frames);

struct EncoderDims {
  int feature_dim = 32;   // raw per-frame feature width
  int embed_dim = 32;     // shared tower output width
  int proj_dim = 32;      // contrastive space width
  int vocab_size = 256;
  int max_video_len = 32;
  int max_text_len = 64;
  bool video_attention = false;
  bool text_attention = false;
};

struct AttentionParams {
  Tensor pos;  // [max_len x embed_dim] learned positions
  Tensor wq, wk, wv;  // [embed_dim x embed_dim]
};

struct TextEncoderParams {
  Tensor embedding;  // [vocab_size x embed_dim]
  Tensor w;          // [embed_dim x embed_dim]
  Tensor b;          // [embed_dim]
  std::optional<AttentionParams> attention;
};

struct VideoEncoderParams {
  Tensor w;  // [feature_dim x embed_dim]
  Tensor b;  // [embed_dim]
  std::optional<AttentionParams> attention;
};

struct ProjectionParams {
  Tensor video_w, video_b;  // [embed_dim x proj_dim], [proj_dim]
  Tensor text_w, text_b;
};

TextEncoderParams init_text_encoder(const EncoderDims& dims, Rng& rng);
VideoEncoderParams init_video_encoder(const EncoderDims& dims, Rng& rng);
ProjectionParams init_projection(const EncoderDims& dims, Rng& rng);

// y = tanh(x W + b) applied row-wise; shared by both towers.
Tensor affine_tanh(const Tensor& x, const Tensor& w, const Tensor& b);

// [T] token ids -> [embed_dim]. Rejects empty sequences, out-of-vocabulary
// ids, and sequences longer than max_text_len (callers truncate first).
Tensor encode_text(std::span<const int> tokens, const TextEncoderParams& params,
                   const EncoderDims& dims);

// [K x feature_dim] -> [K x embed_dim], frame count preserved. Rejects zero
// frames and K beyond max_video_len (callers truncate first).
Tensor encode_video(const Tensor& frames, const VideoEncoderParams& params,
                    const EncoderDims& dims);

// Mean-pools frame embeddings and projects both modalities into the shared
// contrastive space. Returns {video_vec, text_vec}, each [proj_dim].
std::pair<Tensor, Tensor> pool_and_project(const Tensor& frame_embeddings,
                                           const Tensor& text_embedding,
                                           const ProjectionParams& params);

}  // namespace fineco
