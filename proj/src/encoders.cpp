#include "fineco/encoders.hpp"

#include <cmath>
#include <string>

#include "fineco/errors.hpp"
#include "fineco/ops.hpp"

namespace fineco {
namespace {

constexpr double kInitRange = 0.1;  // uniform [-0.1, 0.1] everywhere

Tensor init_param(std::vector<int> shape, Rng& rng) {
  Tensor t = Tensor::zeros(std::move(shape), /*requires_grad=*/true);
  for (double& x : *t.data) x = rng.uniform(-kInitRange, kInitRange);
  return t;
}

AttentionParams init_attention(int max_len, int embed_dim, Rng& rng) {
  AttentionParams a;
  a.pos = init_param({max_len, embed_dim}, rng);
  a.wq = init_param({embed_dim, embed_dim}, rng);
  a.wk = init_param({embed_dim, embed_dim}, rng);
  a.wv = init_param({embed_dim, embed_dim}, rng);
  return a;
}

// Single-head self-attention with residual: softmax(QK^T / sqrt(d)) V added
// onto the position-augmented input.
Tensor attention_block(const Tensor& x, const AttentionParams& params) {
  const int len = x.shape[0];
  std::vector<int> rows(static_cast<std::size_t>(len));
  for (int i = 0; i < len; ++i) rows[static_cast<std::size_t>(i)] = i;
  Tensor xp = add(x, gather_rows(params.pos, rows));
  Tensor q = matmul(xp, params.wq);
  Tensor k = matmul(xp, params.wk);
  Tensor v = matmul(xp, params.wv);
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(x.shape[1]));
  Tensor weights = softmax(scale(matmul(q, transpose(k)), inv_sqrt_d), /*axis=*/-1);
  return add(xp, matmul(weights, v));
}

}  // namespace

Tensor to_tensor(const FrameFeatures& frames) {
  return Tensor::from_values({frames.frame_count, frames.dim}, frames.values);
}

TextEncoderParams init_text_encoder(const EncoderDims& dims, Rng& rng) {
  TextEncoderParams p;
  p.embedding = init_param({dims.vocab_size, dims.embed_dim}, rng);
  p.w = init_param({dims.embed_dim, dims.embed_dim}, rng);
  p.b = init_param({dims.embed_dim}, rng);
  if (dims.text_attention) p.attention = init_attention(dims.max_text_len, dims.embed_dim, rng);
  return p;
}

VideoEncoderParams init_video_encoder(const EncoderDims& dims, Rng& rng) {
  VideoEncoderParams p;
  p.w = init_param({dims.feature_dim, dims.embed_dim}, rng);
  p.b = init_param({dims.embed_dim}, rng);
  if (dims.video_attention) p.attention = init_attention(dims.max_video_len, dims.embed_dim, rng);
  return p;
}

ProjectionParams init_projection(const EncoderDims& dims, Rng& rng) {
  ProjectionParams p;
  p.video_w = init_param({dims.embed_dim, dims.proj_dim}, rng);
  p.video_b = init_param({dims.proj_dim}, rng);
  p.text_w = init_param({dims.embed_dim, dims.proj_dim}, rng);
  p.text_b = init_param({dims.proj_dim}, rng);
  return p;
}

Tensor affine_tanh(const Tensor& x, const Tensor& w, const Tensor& b) {
  return tanh(add_rowvec(matmul(x, w), b));
}

Tensor encode_text(std::span<const int> tokens, const TextEncoderParams& params,
                   const EncoderDims& dims) {
  if (tokens.empty()) throw std::invalid_argument("encode_text: empty token sequence");
  if (static_cast<int>(tokens.size()) > dims.max_text_len)
    throw std::invalid_argument("encode_text: " + std::to_string(tokens.size()) +
                                " tokens exceed max_text_len " + std::to_string(dims.max_text_len));
  for (int id : tokens)
    if (id < 0 || id >= dims.vocab_size)
      throw std::out_of_range("encode_text: token id " + std::to_string(id) +
                              " outside vocabulary of " + std::to_string(dims.vocab_size));
  Tensor h = affine_tanh(gather_rows(params.embedding, tokens), params.w, params.b);
  if (params.attention) h = attention_block(h, *params.attention);
  return mean_rows(h);
}

Tensor encode_video(const Tensor& frames, const VideoEncoderParams& params,
                    const EncoderDims& dims) {
  if (frames.rank() != 2 || frames.shape[1] != dims.feature_dim)
    throw std::invalid_argument("encode_video: expected [K x " +
                                std::to_string(dims.feature_dim) + "] features, got " +
                                shape_string(frames.shape));
  if (frames.shape[0] < 1) throw std::invalid_argument("encode_video: zero frames");
  if (frames.shape[0] > dims.max_video_len)
    throw std::invalid_argument("encode_video: " + std::to_string(frames.shape[0]) +
                                " frames exceed max_video_len " +
                                std::to_string(dims.max_video_len));
  Tensor h = affine_tanh(frames, params.w, params.b);
  if (params.attention) h = attention_block(h, *params.attention);
  return h;
}

std::pair<Tensor, Tensor> pool_and_project(const Tensor& frame_embeddings,
                                           const Tensor& text_embedding,
                                           const ProjectionParams& params) {
  if (frame_embeddings.rank() != 2 || frame_embeddings.shape[0] < 1)
    throw std::invalid_argument("pool_and_project: non-empty [K x d] frame embeddings expected, got " +
                                shape_string(frame_embeddings.shape));
  const int d = frame_embeddings.shape[1];
  if (text_embedding.rank() != 1 || text_embedding.shape[0] != d)
    throw std::invalid_argument("pool_and_project: text embedding " +
                                shape_string(text_embedding.shape) + " does not match frame width " +
                                std::to_string(d));
  Tensor pooled = mean_rows(frame_embeddings);
  Tensor video_vec = reshape(
      add_rowvec(matmul(reshape(pooled, {1, d}), params.video_w), params.video_b),
      {params.video_w.shape[1]});
  Tensor text_vec = reshape(
      add_rowvec(matmul(reshape(text_embedding, {1, d}), params.text_w), params.text_b),
      {params.text_w.shape[1]});
  return {video_vec, text_vec};
}

}  // namespace fineco
