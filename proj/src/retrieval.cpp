#include "fineco/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fineco/errors.hpp"
#include "fineco/kernels.hpp"

namespace fineco {

SimilarityMatrix similarity_matrix(std::span<const std::vector<double>> queries,
                                   std::span<const std::vector<double>> candidates,
                                   std::vector<std::size_t> truth) {
  if (queries.empty() || candidates.empty())
    throw std::invalid_argument("similarity_matrix: empty query or candidate set");
  const std::size_t dim = queries[0].size();
  for (const auto& q : queries)
    if (q.size() != dim)
      throw std::invalid_argument("similarity_matrix: query width mismatch");
  for (const auto& c : candidates)
    if (c.size() != dim)
      throw std::invalid_argument("similarity_matrix: candidate width " +
                                  std::to_string(c.size()) + " vs query width " +
                                  std::to_string(dim));
  SimilarityMatrix m;
  m.rows = queries.size();
  m.cols = candidates.size();
  m.scores.resize(m.rows * m.cols);
  for (std::size_t i = 0; i < m.rows; ++i)
    for (std::size_t j = 0; j < m.cols; ++j)
      m.at(i, j) = kern::dot(queries[i].data(), candidates[j].data(), dim);
  if (truth.empty()) {
    if (m.rows != m.cols)
      throw std::invalid_argument("similarity_matrix: diagonal ground truth needs a square matrix, got " +
                                  std::to_string(m.rows) + "x" + std::to_string(m.cols));
    m.truth.resize(m.rows);
    for (std::size_t i = 0; i < m.rows; ++i) m.truth[i] = i;
  } else {
    if (truth.size() != m.rows)
      throw std::invalid_argument("similarity_matrix: " + std::to_string(truth.size()) +
                                  " truth entries for " + std::to_string(m.rows) + " rows");
    for (std::size_t t : truth)
      if (t >= m.cols)
        throw std::invalid_argument("similarity_matrix: truth column " + std::to_string(t) +
                                    " outside " + std::to_string(m.cols) + " candidates");
    m.truth = std::move(truth);
  }
  return m;
}

SimilarityMatrix dual_softmax(const SimilarityMatrix& sims, double temperature) {
  if (!(temperature > 0.0))
    throw std::invalid_argument("dual_softmax: temperature must be positive, got " +
                                std::to_string(temperature));
  SimilarityMatrix out = sims;
  if (sims.rows == 1) return out;  // single query: the column prior is 1
  std::vector<double> column(sims.rows);
  for (std::size_t j = 0; j < sims.cols; ++j) {
    for (std::size_t i = 0; i < sims.rows; ++i) column[i] = sims.at(i, j) / temperature;
    const double mx = kern::max_value(column.data(), column.size());
    double total = 0.0;
    for (double& c : column) {
      c = std::exp(c - mx);
      total += c;
    }
    for (std::size_t i = 0; i < sims.rows; ++i) out.at(i, j) = sims.at(i, j) * (column[i] / total);
  }
  return out;
}

std::size_t rank_of_truth(const SimilarityMatrix& sims, std::size_t row) {
  const std::size_t t = sims.truth[row];
  const double target = sims.at(row, t);
  std::size_t rank = 1;
  for (std::size_t j = 0; j < sims.cols; ++j) {
    if (j == t) continue;
    const double s = sims.at(row, j);
    if (s > target || (s == target && j < t)) ++rank;
  }
  return rank;
}

double recall_at_k(const SimilarityMatrix& sims, std::size_t k) {
  if (k < 1 || k > sims.cols)
    throw std::invalid_argument("recall_at_k: k=" + std::to_string(k) + " outside [1, " +
                                std::to_string(sims.cols) + "]");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < sims.rows; ++i)
    if (rank_of_truth(sims, i) <= k) ++hits;
  return 100.0 * static_cast<double>(hits) / static_cast<double>(sims.rows);
}

double median_rank(const SimilarityMatrix& sims) {
  std::vector<std::size_t> ranks(sims.rows);
  for (std::size_t i = 0; i < sims.rows; ++i) ranks[i] = rank_of_truth(sims, i);
  std::sort(ranks.begin(), ranks.end());
  const std::size_t n = ranks.size();
  if (n % 2 == 1) return static_cast<double>(ranks[n / 2]);
  return 0.5 * (static_cast<double>(ranks[n / 2 - 1]) + static_cast<double>(ranks[n / 2]));
}

double multiple_choice_accuracy(std::span<const std::vector<double>> questions,
                                std::span<const std::vector<std::vector<double>>> candidates,
                                std::span<const int> gold) {
  if (questions.empty())
    throw std::invalid_argument("multiple_choice_accuracy: no questions");
  if (questions.size() != candidates.size() || questions.size() != gold.size())
    throw std::invalid_argument("multiple_choice_accuracy: question/candidate/gold counts differ");
  std::size_t correct = 0;
  for (std::size_t q = 0; q < questions.size(); ++q) {
    const auto& options = candidates[q];
    if (options.size() < 2)
      throw std::invalid_argument("multiple_choice_accuracy: question " + std::to_string(q) +
                                  " has fewer than 2 candidates");
    if (gold[q] < 0 || static_cast<std::size_t>(gold[q]) >= options.size())
      throw std::out_of_range("multiple_choice_accuracy: gold index " + std::to_string(gold[q]) +
                              " outside " + std::to_string(options.size()) + " candidates");
    std::size_t best = 0;
    double best_score = 0.0;
    for (std::size_t j = 0; j < options.size(); ++j) {
      if (options[j].size() != questions[q].size())
        throw std::invalid_argument("multiple_choice_accuracy: candidate width mismatch at question " +
                                    std::to_string(q));
      const double s = kern::dot(questions[q].data(), options[j].data(), questions[q].size());
      if (j == 0 || s > best_score) {
        best = j;
        best_score = s;
      }
    }
    if (best == static_cast<std::size_t>(gold[q])) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(questions.size());
}

}  // namespace fineco
