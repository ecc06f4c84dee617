#include <doctest.h>

#include <cmath>
#include <utility>
#include <vector>

#include "fineco/encoders.hpp"
#include "fineco/gradcheck.hpp"
#include "fineco/ops.hpp"
#include "fineco/rng.hpp"
#include "fineco/tensor.hpp"

using namespace fineco;

namespace {

EncoderDims small_dims(bool video_attention = false, bool text_attention = false) {
  EncoderDims d;
  d.feature_dim = 5;
  d.embed_dim = 4;
  d.proj_dim = 3;
  d.vocab_size = 11;
  d.max_video_len = 6;
  d.max_text_len = 7;
  d.video_attention = video_attention;
  d.text_attention = text_attention;
  return d;
}

Tensor random_frames(Rng& rng, int k, int dim) {
  std::vector<double> values(static_cast<std::size_t>(k) * static_cast<std::size_t>(dim));
  for (double& v : values) v = rng.uniform(-1.0, 1.0);
  return Tensor::from_values({k, dim}, std::move(values));
}

}  // namespace

TEST_CASE("initialization is deterministic under the seed") {
  const EncoderDims dims = small_dims(true, true);
  Rng a(42), b(42);
  const TextEncoderParams ta = init_text_encoder(dims, a);
  const TextEncoderParams tb = init_text_encoder(dims, b);
  CHECK(*ta.embedding.data == *tb.embedding.data);
  CHECK(*ta.w.data == *tb.w.data);
  CHECK(*ta.b.data == *tb.b.data);
  REQUIRE(ta.attention.has_value());
  CHECK(*ta.attention->pos.data == *tb.attention->pos.data);
  CHECK(*ta.attention->wq.data == *tb.attention->wq.data);

  const VideoEncoderParams va = init_video_encoder(dims, a);
  CHECK(va.w.shape == std::vector<int>{5, 4});
  REQUIRE(va.attention.has_value());
  const ProjectionParams pa = init_projection(dims, a);
  CHECK(pa.video_w.shape == std::vector<int>{4, 3});
  CHECK(pa.text_w.shape == std::vector<int>{4, 3});
}

TEST_CASE("attention-free text encoding is a bag of tokens") {
  const EncoderDims dims = small_dims();
  Rng rng(1);
  const TextEncoderParams params = init_text_encoder(dims, rng);

  const std::vector<int> order_a{3, 7, 1, 9};
  const std::vector<int> order_b{9, 1, 7, 3};
  const Tensor ea = encode_text(order_a, params, dims);
  const Tensor eb = encode_text(order_b, params, dims);
  REQUIRE(ea.shape == std::vector<int>{4});
  for (int i = 0; i < 4; ++i) CHECK(ea.at(i) == doctest::Approx(eb.at(i)).epsilon(1e-12));

  // Repeating one token changes nothing: the mean of two equal rows is the row.
  const std::vector<int> once{5};
  const std::vector<int> twice{5, 5};
  const Tensor e1 = encode_text(once, params, dims);
  const Tensor e2 = encode_text(twice, params, dims);
  for (int i = 0; i < 4; ++i) CHECK(e1.at(i) == doctest::Approx(e2.at(i)).epsilon(1e-14));
}

TEST_CASE("text encoding with attention is order sensitive") {
  const EncoderDims dims = small_dims(false, true);
  Rng rng(2);
  const TextEncoderParams params = init_text_encoder(dims, rng);
  const std::vector<int> order_a{3, 7, 1};
  const std::vector<int> order_b{1, 7, 3};
  const Tensor ea = encode_text(order_a, params, dims);
  const Tensor eb = encode_text(order_b, params, dims);
  double gap = 0.0;
  for (int i = 0; i < 4; ++i) gap += std::abs(ea.at(i) - eb.at(i));
  CHECK(gap > 0.0);
}

TEST_CASE("encode_text rejects empty, overlong and out-of-vocabulary input") {
  const EncoderDims dims = small_dims();
  Rng rng(3);
  const TextEncoderParams params = init_text_encoder(dims, rng);
  const std::vector<int> empty;
  CHECK_THROWS_AS(encode_text(empty, params, dims), std::invalid_argument);
  const std::vector<int> overlong(static_cast<std::size_t>(dims.max_text_len) + 1, 1);
  CHECK_THROWS_AS(encode_text(overlong, params, dims), std::invalid_argument);
  const std::vector<int> oov{0, dims.vocab_size};
  CHECK_THROWS_AS(encode_text(oov, params, dims), std::out_of_range);
  const std::vector<int> negative{-1};
  CHECK_THROWS_AS(encode_text(negative, params, dims), std::out_of_range);
}

TEST_CASE("attention-free video encoding is frame-local") {
  const EncoderDims dims = small_dims();
  Rng rng(4);
  const VideoEncoderParams params = init_video_encoder(dims, rng);
  Tensor frames = random_frames(rng, 4, dims.feature_dim);
  const Tensor before = encode_video(frames, params, dims);
  REQUIRE(before.shape == std::vector<int>{4, dims.embed_dim});

  Tensor nudged = Tensor::from_values(frames.shape, *frames.data);
  (*nudged.data)[2 * static_cast<std::size_t>(dims.feature_dim) + 1] += 0.5;  // frame 2 only
  const Tensor after = encode_video(nudged, params, dims);
  for (int k = 0; k < 4; ++k) {
    for (int j = 0; j < dims.embed_dim; ++j) {
      if (k == 2) continue;
      CHECK(after.at(k, j) == before.at(k, j));  // untouched frames bit-identical
    }
  }
  double gap = 0.0;
  for (int j = 0; j < dims.embed_dim; ++j) gap += std::abs(after.at(2, j) - before.at(2, j));
  CHECK(gap > 0.0);
}

TEST_CASE("encode_video validates shape and frame count") {
  const EncoderDims dims = small_dims();
  Rng rng(5);
  const VideoEncoderParams params = init_video_encoder(dims, rng);
  CHECK_THROWS_AS(encode_video(Tensor::zeros({0, dims.feature_dim}), params, dims),
                  std::invalid_argument);
  CHECK_THROWS_AS(encode_video(Tensor::zeros({2, dims.feature_dim + 1}), params, dims),
                  std::invalid_argument);
  CHECK_THROWS_AS(encode_video(Tensor::zeros({dims.max_video_len + 1, dims.feature_dim}), params,
                               dims),
                  std::invalid_argument);
}

TEST_CASE("pooling averages frame embeddings before projecting") {
  const EncoderDims dims = small_dims();
  Rng rng(6);
  const VideoEncoderParams vparams = init_video_encoder(dims, rng);
  const TextEncoderParams tparams = init_text_encoder(dims, rng);
  const ProjectionParams proj = init_projection(dims, rng);

  const Tensor frames = random_frames(rng, 5, dims.feature_dim);
  const Tensor emb = encode_video(frames, vparams, dims);
  const std::vector<int> tokens{1, 4};
  const Tensor text = encode_text(tokens, tparams, dims);
  const auto [video_vec, text_vec] = pool_and_project(emb, text, proj);
  REQUIRE(video_vec.shape == std::vector<int>{dims.proj_dim});
  REQUIRE(text_vec.shape == std::vector<int>{dims.proj_dim});

  // Manual oracle: column means, then the affine projection.
  for (int j = 0; j < dims.proj_dim; ++j) {
    double acc = proj.video_b.at(j);
    for (int d = 0; d < dims.embed_dim; ++d) {
      double mean = 0.0;
      for (int k = 0; k < 5; ++k) mean += emb.at(k, d);
      mean /= 5.0;
      acc += mean * proj.video_w.at(d, j);
    }
    CHECK(video_vec.at(j) == doctest::Approx(acc).epsilon(1e-12));
  }

  // A single-frame video pools to that frame's embedding exactly.
  const Tensor one = random_frames(rng, 1, dims.feature_dim);
  const Tensor one_emb = encode_video(one, vparams, dims);
  const auto [one_vec, unused] = pool_and_project(one_emb, text, proj);
  for (int j = 0; j < dims.proj_dim; ++j) {
    double acc = proj.video_b.at(j);
    for (int d = 0; d < dims.embed_dim; ++d) acc += one_emb.at(0, d) * proj.video_w.at(d, j);
    CHECK(one_vec.at(j) == doctest::Approx(acc).epsilon(1e-12));
  }

  CHECK_THROWS_AS(pool_and_project(emb, Tensor::zeros({dims.embed_dim + 1}), proj),
                  std::invalid_argument);
}

TEST_CASE("encoder gradients match finite differences and reach every parameter") {
  for (const bool attention : {false, true}) {
    CAPTURE(attention);
    const EncoderDims dims = small_dims(attention, attention);
    Rng rng(7);
    TextEncoderParams tparams = init_text_encoder(dims, rng);
    VideoEncoderParams vparams = init_video_encoder(dims, rng);
    ProjectionParams proj = init_projection(dims, rng);
    const Tensor frames = random_frames(rng, 3, dims.feature_dim);
    const std::vector<int> tokens{2, 8, 5};

    auto forward = [&]() {
      const Tensor emb = encode_video(frames, vparams, dims);
      const Tensor text = encode_text(tokens, tparams, dims);
      auto [video_vec, text_vec] = pool_and_project(emb, text, proj);
      return sum(add(mul(video_vec, video_vec), mul(text_vec, add(text_vec, video_vec))));
    };

    std::vector<std::pair<std::string, Tensor*>> params{
        {"text.embedding", &tparams.embedding}, {"text.w", &tparams.w},
        {"text.b", &tparams.b},                 {"video.w", &vparams.w},
        {"video.b", &vparams.b},                {"proj.video_w", &proj.video_w},
        {"proj.video_b", &proj.video_b},        {"proj.text_w", &proj.text_w},
        {"proj.text_b", &proj.text_b}};
    if (attention) {
      params.insert(params.end(), {{"text.att.pos", &tparams.attention->pos},
                                   {"text.att.wq", &tparams.attention->wq},
                                   {"text.att.wk", &tparams.attention->wk},
                                   {"text.att.wv", &tparams.attention->wv},
                                   {"video.att.pos", &vparams.attention->pos},
                                   {"video.att.wq", &vparams.attention->wq},
                                   {"video.att.wk", &vparams.attention->wk},
                                   {"video.att.wv", &vparams.attention->wv}});
    }
    const GradCheckReport report = finite_diff_check(forward, params, 1e-5);
    CHECK_MESSAGE(report.passed, "max relative error ", report.max_rel_err);

    // No dead subgraphs: every parameter actually used must see a nonzero
    // gradient somewhere (embedding rows of unused tokens and positional rows
    // past the sequence length legitimately stay zero).
    GradientTape tape;
    const Tensor loss = forward();
    tape.backward(loss);
    for (const auto& [name, tensor] : params) {
      double total = 0.0;
      if (name == "text.embedding") {
        for (int t : tokens)
          for (int j = 0; j < dims.embed_dim; ++j)
            total += std::abs((*tensor->grad)[static_cast<std::size_t>(t) * dims.embed_dim + j]);
      } else {
        for (double g : *tensor->grad) total += std::abs(g);
      }
      CHECK_MESSAGE(total > 0.0, "no gradient reached ", name);
    }
  }
}
