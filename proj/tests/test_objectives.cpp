#include <doctest.h>

#include <cmath>
#include <utility>
#include <vector>

#include "fineco/gradcheck.hpp"
#include "fineco/objectives.hpp"
#include "fineco/ops.hpp"
#include "fineco/rng.hpp"
#include "fineco/selector.hpp"
#include "fineco/tensor.hpp"

using namespace fineco;

namespace {

PositiveAssignment assignment(std::vector<int> positives, std::vector<int> negatives) {
  PositiveAssignment a;
  a.positives = std::move(positives);
  a.negatives = std::move(negatives);
  return a;
}

Tensor random_vec(Rng& rng, int n, bool requires_grad = false) {
  std::vector<double> values(static_cast<std::size_t>(n));
  for (double& v : values) v = rng.uniform(-1.0, 1.0);
  return Tensor::from_values({n}, std::move(values), requires_grad);
}

}  // namespace

TEST_CASE("frame-level loss is zero when nothing contrasts the positives") {
  const std::vector<Tensor> scores{Tensor::from_values({3}, {0.6, 0.3, 0.1})};
  const std::vector<PositiveAssignment> assignments{assignment({0, 1, 2}, {})};
  const FinegrainedResult r = finegrained_loss(scores, assignments);
  CHECK(r.loss.value() == 0.0);
  REQUIRE(r.positive_mass.size() == 1);
  CHECK(r.positive_mass[0] ==
        doctest::Approx(std::exp(0.6) + std::exp(0.3) + std::exp(0.1)).epsilon(1e-12));
  CHECK(r.negative_mass[0] == 0.0);
}

TEST_CASE("one positive against one equal negative costs ln 2") {
  const std::vector<Tensor> scores{Tensor::from_values({2}, {0.5, 0.5})};
  const std::vector<PositiveAssignment> assignments{assignment({0}, {1})};
  const FinegrainedResult r = finegrained_loss(scores, assignments);
  CHECK(r.loss.value() == doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("three-frame case matches the closed form") {
  const std::vector<Tensor> scores{Tensor::from_values({3}, {0.5, 0.3, 0.2})};
  const std::vector<PositiveAssignment> assignments{assignment({0}, {1, 2})};
  const FinegrainedResult r = finegrained_loss(scores, assignments);
  const double expected = std::log(1.0 + std::exp(-0.2) + std::exp(-0.3));
  CHECK(r.loss.value() == doctest::Approx(expected).epsilon(1e-12));
  CHECK(expected == doctest::Approx(0.939941).epsilon(1e-6));
  CHECK(r.positive_mass[0] == doctest::Approx(std::exp(0.5)).epsilon(1e-12));
  CHECK(r.negative_mass[0] == doctest::Approx(std::exp(0.3) + std::exp(0.2)).epsilon(1e-12));
}

TEST_CASE("frame-level loss averages over the batch") {
  const std::vector<Tensor> scores{Tensor::from_values({2}, {0.5, 0.5}),
                                   Tensor::from_values({2}, {0.9, 0.1})};
  const std::vector<PositiveAssignment> assignments{assignment({0}, {1}), assignment({0, 1}, {})};
  const FinegrainedResult r = finegrained_loss(scores, assignments);
  CHECK(r.loss.value() == doctest::Approx(0.5 * std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("shifting mass onto a positive frame lowers the loss") {
  const std::vector<PositiveAssignment> assignments{assignment({0}, {1, 2})};
  double previous = 1e9;
  for (double boost : {0.0, 0.2, 0.4, 0.8}) {
    const std::vector<Tensor> scores{Tensor::from_values({3}, {0.5 + boost, 0.3, 0.2})};
    const double loss = finegrained_loss(scores, assignments).loss.value();
    CHECK(loss < previous);
    previous = loss;
  }
}

TEST_CASE("frame-level loss rejects malformed batches") {
  const std::vector<Tensor> scores{Tensor::from_values({2}, {0.5, 0.5})};
  const std::vector<PositiveAssignment> none;
  CHECK_THROWS_AS(finegrained_loss(scores, none), std::invalid_argument);
  const std::vector<PositiveAssignment> empty_pos{assignment({}, {0, 1})};
  CHECK_THROWS_AS(finegrained_loss(scores, empty_pos), std::invalid_argument);
}

TEST_CASE("frame-level gradients match finite differences") {
  Rng rng(8);
  Tensor s0 = random_vec(rng, 5, true);
  Tensor s1 = random_vec(rng, 4, true);
  const std::vector<PositiveAssignment> assignments{assignment({0, 2}, {1, 3, 4}),
                                                    assignment({1}, {0, 2, 3})};
  auto forward = [&]() {
    const std::vector<Tensor> scores{s0, s1};
    return finegrained_loss(scores, assignments).loss;
  };
  const GradCheckReport report =
      finite_diff_check(forward, std::vector<std::pair<std::string, Tensor*>>{{"s0", &s0},
                                                                              {"s1", &s1}},
                        1e-6);
  CHECK_MESSAGE(report.passed, "max relative error ", report.max_rel_err);
}

TEST_CASE("pair-level loss vanishes for a single pair") {
  BatchPairs batch;
  batch.videos.push_back(Tensor::from_values({3}, {0.3, -0.2, 0.9}));
  batch.texts.push_back(Tensor::from_values({3}, {0.1, 0.4, -0.5}));
  CHECK(pairwise_nce_loss(batch, 0.07).value() == 0.0);
}

TEST_CASE("pair-level loss is ln n under uniform similarities") {
  for (int n : {2, 5, 9}) {
    BatchPairs batch;
    const Tensor shared = Tensor::from_values({2}, {0.6, -0.8});
    for (int i = 0; i < n; ++i) {
      batch.videos.push_back(shared);
      batch.texts.push_back(shared);
    }
    CHECK(pairwise_nce_loss(batch, 0.5).value() ==
          doctest::Approx(std::log(static_cast<double>(n))).epsilon(1e-12));
  }
}

TEST_CASE("identity similarities at unit temperature match the closed form") {
  BatchPairs batch;
  batch.videos.push_back(Tensor::from_values({2}, {1.0, 0.0}));
  batch.videos.push_back(Tensor::from_values({2}, {0.0, 1.0}));
  batch.texts = batch.videos;
  const double expected = std::log(1.0 + std::exp(-1.0));
  CHECK(pairwise_nce_loss(batch, 1.0).value() == doctest::Approx(expected).epsilon(1e-12));
  CHECK(expected == doctest::Approx(0.313262).epsilon(1e-6));
}

TEST_CASE("pair-level loss only sees dot products, so rotations change nothing") {
  Rng rng(9);
  BatchPairs batch, rotated;
  const double theta = 0.77;
  const double c = std::cos(theta), s = std::sin(theta);
  for (int i = 0; i < 4; ++i) {
    const Tensor v = random_vec(rng, 2);
    const Tensor t = random_vec(rng, 2);
    batch.videos.push_back(v);
    batch.texts.push_back(t);
    rotated.videos.push_back(
        Tensor::from_values({2}, {c * v.at(0) - s * v.at(1), s * v.at(0) + c * v.at(1)}));
    rotated.texts.push_back(
        Tensor::from_values({2}, {c * t.at(0) - s * t.at(1), s * t.at(0) + c * t.at(1)}));
  }
  CHECK(pairwise_nce_loss(batch, 0.07).value() ==
        doctest::Approx(pairwise_nce_loss(rotated, 0.07).value()).epsilon(1e-9));
}

TEST_CASE("pair-level loss validates its batch and temperature") {
  BatchPairs empty;
  CHECK_THROWS_AS(pairwise_nce_loss(empty, 0.07), std::invalid_argument);
  BatchPairs lopsided;
  lopsided.videos.push_back(Tensor::from_values({2}, {1.0, 0.0}));
  CHECK_THROWS_AS(pairwise_nce_loss(lopsided, 0.07), std::invalid_argument);
  BatchPairs one;
  one.videos.push_back(Tensor::from_values({2}, {1.0, 0.0}));
  one.texts.push_back(Tensor::from_values({2}, {1.0, 0.0}));
  CHECK_THROWS_AS(pairwise_nce_loss(one, 0.0), std::invalid_argument);
}

TEST_CASE("pair-level gradients match finite differences") {
  Rng rng(10);
  Tensor v0 = random_vec(rng, 3, true), v1 = random_vec(rng, 3, true);
  Tensor t0 = random_vec(rng, 3, true), t1 = random_vec(rng, 3, true);
  auto forward = [&]() {
    BatchPairs batch;
    batch.videos = {v0, v1};
    batch.texts = {t0, t1};
    return pairwise_nce_loss(batch, 0.2);
  };
  const GradCheckReport report = finite_diff_check(
      forward,
      std::vector<std::pair<std::string, Tensor*>>{
          {"v0", &v0}, {"v1", &v1}, {"t0", &t0}, {"t1", &t1}},
      1e-6);
  CHECK_MESSAGE(report.passed, "max relative error ", report.max_rel_err);
}

TEST_CASE("answer cross-entropy matches the closed forms") {
  for (int vocab : {2, 7, 31}) {
    const Tensor logits = Tensor::full({vocab}, 0.3);
    CHECK(qa_cross_entropy_loss(logits, vocab / 2).value() ==
          doctest::Approx(std::log(static_cast<double>(vocab))).epsilon(1e-12));
  }
  const Tensor logits = Tensor::from_values({3}, {1.0, 2.0, 3.0});
  const double expected = std::log(std::exp(1.0) + std::exp(2.0) + std::exp(3.0)) - 3.0;
  CHECK(qa_cross_entropy_loss(logits, 2).value() == doctest::Approx(expected).epsilon(1e-12));
  CHECK(expected == doctest::Approx(0.407606).epsilon(1e-6));
  CHECK_THROWS_AS(qa_cross_entropy_loss(logits, 3), std::out_of_range);
  CHECK_THROWS_AS(qa_cross_entropy_loss(logits, -1), std::out_of_range);
}

TEST_CASE("answer cross-entropy gradients match finite differences") {
  Rng rng(11);
  Tensor logits = random_vec(rng, 6, true);
  auto forward = [&]() { return qa_cross_entropy_loss(logits, 4); };
  const GradCheckReport report = finite_diff_check(
      forward, std::vector<std::pair<std::string, Tensor*>>{{"logits", &logits}}, 1e-6);
  CHECK_MESSAGE(report.passed, "max relative error ", report.max_rel_err);
}

TEST_CASE("combined loss at weight zero is exactly the pair-level term") {
  const std::vector<Tensor> scores{Tensor::from_values({2}, {0.7, 0.3})};
  const std::vector<PositiveAssignment> assignments{assignment({0}, {1})};
  const FinegrainedResult l1 = finegrained_loss(scores, assignments);
  const Tensor l2 = Tensor::scalar(0.437291055);
  const CombinedLoss c = combined_loss(l1, l2, 0.0);
  CHECK(c.total.value() == l2.value());  // bit-exact switch semantics
  CHECK(c.breakdown.l2 == l2.value());
  CHECK(c.breakdown.total == l2.value());
  CHECK(c.breakdown.l1 == l1.loss.value());
}

TEST_CASE("combined loss scales the frame-level term by the weight") {
  const std::vector<Tensor> scores{Tensor::from_values({2}, {0.7, 0.3})};
  const std::vector<PositiveAssignment> assignments{assignment({0}, {1})};
  const FinegrainedResult l1 = finegrained_loss(scores, assignments);
  const Tensor l2 = Tensor::scalar(1.25);
  const CombinedLoss c = combined_loss(l1, l2, 2.5);
  CHECK(c.breakdown.total == doctest::Approx(2.5 * l1.loss.value() + 1.25).epsilon(1e-12));
  CHECK(c.total.value() == c.breakdown.total);
  CHECK(c.breakdown.positive_mass == l1.positive_mass);
  CHECK(c.breakdown.negative_mass == l1.negative_mass);
}

TEST_CASE("the combined objective backpropagates into both terms") {
  Rng rng(12);
  Tensor s = Tensor::from_values({3}, {0.2, 0.5, 0.3}, true);
  Tensor v0 = random_vec(rng, 3, true), t0 = random_vec(rng, 3, true);
  Tensor v1 = random_vec(rng, 3), t1 = random_vec(rng, 3);
  const std::vector<PositiveAssignment> assignments{assignment({1}, {0, 2})};

  GradientTape tape;
  const std::vector<Tensor> scores{softmax(s)};
  const FinegrainedResult l1 = finegrained_loss(scores, assignments);
  BatchPairs batch;
  batch.videos = {v0, v1};
  batch.texts = {t0, t1};
  const Tensor l2 = pairwise_nce_loss(batch, 0.1);
  const CombinedLoss c = combined_loss(l1, l2, 1.5);
  tape.backward(c.total);

  double s_grad = 0.0, v_grad = 0.0, t_grad = 0.0;
  for (double g : *s.grad) s_grad += std::abs(g);
  for (double g : *v0.grad) v_grad += std::abs(g);
  for (double g : *t0.grad) t_grad += std::abs(g);
  CHECK(s_grad > 0.0);
  CHECK(v_grad > 0.0);
  CHECK(t_grad > 0.0);
}
