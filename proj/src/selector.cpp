#include "fineco/selector.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "fineco/errors.hpp"
#include "fineco/ops.hpp"

namespace fineco {
namespace {

// Top-c frame indices by score, ties toward the lower index; returned ascending.
std::vector<int> top_indices(const std::vector<double>& scores, int c) {
  std::vector<int> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return scores[static_cast<std::size_t>(a)] > scores[static_cast<std::size_t>(b)];
  });
  order.resize(static_cast<std::size_t>(c));
  std::sort(order.begin(), order.end());
  return order;
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

PositiveAssignment from_positive_set(const std::vector<int>& positives, int frame_count) {
  PositiveAssignment out;
  out.positives = positives;
  std::vector<char> is_pos(static_cast<std::size_t>(frame_count), 0);
  for (int i : positives) is_pos[static_cast<std::size_t>(i)] = 1;
  for (int i = 0; i < frame_count; ++i)
    if (!is_pos[static_cast<std::size_t>(i)]) out.negatives.push_back(i);
  return out;
}

// Stable fingerprint of the score bits; salts the random strategy's stream
// so each pair (and each training step, as scores move) draws differently
// while identical inputs reproduce identical picks.
std::uint64_t score_fingerprint(const std::vector<double>& values) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (double v : values) {
    h ^= std::bit_cast<std::uint64_t>(v);
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

std::vector<double> FrameScores::padded(int padded_len) const {
  if (padded_len < frame_count())
    throw std::invalid_argument("FrameScores::padded: padded length " +
                                std::to_string(padded_len) + " below frame count " +
                                std::to_string(frame_count()));
  std::vector<double> out(static_cast<std::size_t>(padded_len), 0.0);
  std::copy(values.begin(), values.end(), out.begin());
  return out;
}

SelectorParams init_selector(int embed_dim, int hidden, Rng& rng) {
  SelectorParams p;
  p.w1 = Tensor::zeros({2 * embed_dim, hidden}, /*requires_grad=*/true);
  p.b1 = Tensor::zeros({hidden}, /*requires_grad=*/true);
  p.w2 = Tensor::zeros({hidden, 1}, /*requires_grad=*/true);
  p.b2 = Tensor::zeros({1}, /*requires_grad=*/true);

  // Quartet initialization: a random-feature approximation of the dot
  // product f.t, built from hidden units that share one random direction r.
  // With u+ = r.(f + t) and u- = r.(f - t), each quartet contributes
  //
  //   z += beta * [ (tanh(u+ - c) - tanh(u+ + c)) - (tanh(u- - c) - tanh(u- + c)) ]
  //
  // whose quadratic Taylor term is proportional to u+^2 - u-^2 = 4 (r.f)(r.t);
  // the |f|^2 and |t|^2 contributions cancel between the two bump pairs, and
  // summing over random directions leaves z approximately monotone in f.t.
  // A plain i.i.d. start leaves the initial ranking uncorrelated with
  // relevance, and because the frame-level loss reinforces whatever
  // currently ranks highest, that random ranking locks in. Seeding the
  // agreement rule instead gives the loss a signal that points at genuinely
  // text-aligned frames as soon as the contrastive term aligns the joint
  // space, while leaving every weight free to train away from it.
  // Calibrated for unit-norm inputs (the training path feeds L2-normalized
  // embeddings). The direction range is deliberately wide: r.(f +/- t) then
  // spreads with standard deviation around sqrt(3) per unit input norm, and
  // each quartet's tanh pair saturates except where r nearly matches f +/- t,
  // so a unit acts as a localized bump rather than a broad near-linear
  // feature. Broad features share mass across unrelated (frame, text) inputs,
  // and the frame-level loss's demotion of one frame then bleeds into the
  // promoted ones until the ranking flattens; localized bumps keep each
  // training vote near the input that cast it, which is what keeps selector
  // self-training stable once the loss starts feeding on its own ranking.
  const double direction_range = 3.0;
  const double bias_offset = 0.66;  // near the curvature peak of the bump pair
  const double output_scale = 1.0;
  std::vector<double>& w1 = *p.w1.data;
  std::vector<double>& b1 = *p.b1.data;
  std::vector<double>& w2 = *p.w2.data;
  auto set_unit = [&](int j, const std::vector<double>& r, double text_sign, double bias,
                      double out_w) {
    for (int i = 0; i < embed_dim; ++i) {
      w1[static_cast<std::size_t>(i) * hidden + j] = r[i];                         // frame half
      w1[static_cast<std::size_t>(i + embed_dim) * hidden + j] = text_sign * r[i];  // text half
    }
    b1[j] = bias;
    w2[j] = out_w;
  };
  std::vector<double> r(embed_dim);
  int j = 0;
  for (; j + 3 < hidden; j += 4) {
    for (double& x : r) x = rng.uniform(-direction_range, direction_range);
    set_unit(j + 0, r, +1.0, +bias_offset, -output_scale);
    set_unit(j + 1, r, +1.0, -bias_offset, +output_scale);
    set_unit(j + 2, r, -1.0, +bias_offset, +output_scale);
    set_unit(j + 3, r, -1.0, -bias_offset, -output_scale);
  }
  for (; j < hidden; ++j) {
    // Widths not divisible by four: leftovers start as small plain neurons.
    for (int i = 0; i < 2 * embed_dim; ++i)
      w1[static_cast<std::size_t>(i) * hidden + j] = rng.uniform(-0.1, 0.1);
    b1[j] = rng.uniform(-0.1, 0.1);
    w2[j] = rng.uniform(-0.1, 0.1);
  }
  return p;
}

Tensor score_frames(const Tensor& frame_embeddings, const Tensor& text_embedding,
                    const SelectorParams& params) {
  if (frame_embeddings.rank() != 2 || frame_embeddings.shape[0] < 1)
    throw std::invalid_argument("score_frames: non-empty [K x d] frame embeddings expected, got " +
                                shape_string(frame_embeddings.shape));
  const int K = frame_embeddings.shape[0];
  const int d = frame_embeddings.shape[1];
  if (text_embedding.rank() != 1 || text_embedding.shape[0] != d)
    throw std::invalid_argument("score_frames: text embedding " +
                                shape_string(text_embedding.shape) +
                                " does not match frame width " + std::to_string(d));
  Tensor joint = concat_cols(frame_embeddings, tile_rows(text_embedding, K));
  Tensor hidden = tanh(add_rowvec(matmul(joint, params.w1), params.b1));
  Tensor logits = add_rowvec(matmul(hidden, params.w2), params.b2);  // [K x 1]
  return softmax(reshape(logits, {K}));
}

void SamplingStrategy::validate() const {
  switch (kind) {
    case Kind::fixed_k:
    case Kind::random:
      if (k < 1) throw std::invalid_argument("sampling strategy: k must be >= 1, got " + std::to_string(k));
      break;
    case Kind::ratio:
      if (!(rho > 0.0) || rho > 1.0)
        throw std::invalid_argument("sampling strategy: rho must be in (0, 1], got " +
                                    std::to_string(rho));
      break;
    case Kind::median:
      break;
  }
}

SamplingStrategy SamplingStrategy::parse(const std::string& text) {
  SamplingStrategy s;
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t colon = text.find(':', start);
    parts.push_back(text.substr(start, colon - start));
    if (colon == std::string::npos) break;
    start = colon + 1;
  }
  try {
    if (parts[0] == "median" && parts.size() == 1) {
      s.kind = Kind::median;
    } else if (parts[0] == "fixed_k" && parts.size() == 2) {
      s.kind = Kind::fixed_k;
      s.k = std::stoi(parts[1]);
    } else if (parts[0] == "ratio" && parts.size() == 2) {
      s.kind = Kind::ratio;
      s.rho = std::stod(parts[1]);
    } else if (parts[0] == "random" && (parts.size() == 2 || parts.size() == 3)) {
      s.kind = Kind::random;
      s.k = std::stoi(parts[1]);
      s.seed = parts.size() == 3 ? std::stoull(parts[2]) : 0;
    } else {
      throw std::invalid_argument("unrecognized");
    }
  } catch (const std::exception&) {
    throw UsageError("sampling strategy '" + text +
                     "' not understood; expected fixed_k:K, median, ratio:RHO or random:K[:SEED]");
  }
  s.validate();
  return s;
}

std::string SamplingStrategy::to_string() const {
  switch (kind) {
    case Kind::fixed_k:
      return "fixed_k:" + std::to_string(k);
    case Kind::median:
      return "median";
    case Kind::ratio: {
      char buf[32];
      std::snprintf(buf, sizeof buf, "ratio:%g", rho);
      return buf;
    }
    case Kind::random:
      return "random:" + std::to_string(k) + ":" + std::to_string(seed);
  }
  return "";
}

std::string SamplingStrategy::k_or_rho() const {
  switch (kind) {
    case Kind::fixed_k:
    case Kind::random:
      return std::to_string(k);
    case Kind::ratio: {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%g", rho);
      return buf;
    }
    case Kind::median:
      return "";
  }
  return "";
}

PositiveAssignment assign_positives(const FrameScores& scores, const SamplingStrategy& strategy,
                                    std::span<const FrameScores> batch_context) {
  strategy.validate();
  const int K = scores.frame_count();
  if (K < 1) throw std::invalid_argument("assign_positives: no valid frames");

  switch (strategy.kind) {
    case SamplingStrategy::Kind::fixed_k:
      return from_positive_set(top_indices(scores.values, std::min(strategy.k, K)), K);

    case SamplingStrategy::Kind::ratio: {
      const int c = std::clamp(static_cast<int>(std::ceil(strategy.rho * K)), 1, K);
      return from_positive_set(top_indices(scores.values, c), K);
    }

    case SamplingStrategy::Kind::median: {
      if (batch_context.empty())
        throw std::invalid_argument("assign_positives: median strategy needs a non-empty batch context");
      double threshold = 0.0;
      for (const FrameScores& fs : batch_context) threshold += median_of(fs.values);
      threshold /= static_cast<double>(batch_context.size());
      std::vector<int> pos;
      for (int i = 0; i < K; ++i)
        if (scores.values[static_cast<std::size_t>(i)] > threshold) pos.push_back(i);
      if (pos.empty()) pos = top_indices(scores.values, 1);
      return from_positive_set(pos, K);
    }

    case SamplingStrategy::Kind::random: {
      const int c = std::min(strategy.k, K);
      Rng rng(Rng::mix(strategy.seed, score_fingerprint(scores.values)));
      return from_positive_set(rng.sample_without_replacement(K, c), K);
    }
  }
  throw std::logic_error("assign_positives: unhandled strategy");
}

std::pair<double, double> selector_metrics(const PositiveAssignment& assignment,
                                           std::span<const int> planted) {
  if (planted.empty()) throw std::invalid_argument("selector_metrics: empty planted set");
  if (assignment.positives.empty())
    throw std::invalid_argument("selector_metrics: empty positive set");
  std::vector<int> sorted_planted(planted.begin(), planted.end());
  std::sort(sorted_planted.begin(), sorted_planted.end());
  int hits = 0;
  for (int p : assignment.positives)
    if (std::binary_search(sorted_planted.begin(), sorted_planted.end(), p)) ++hits;
  const double precision = static_cast<double>(hits) / assignment.positives.size();
  const double recall = static_cast<double>(hits) / sorted_planted.size();
  return {precision, recall};
}

}  // namespace fineco
