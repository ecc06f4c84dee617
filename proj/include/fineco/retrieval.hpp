#pragma once

#include <cstddef>
#include <span>
#include <vector>

// Retrieval-time evaluation: similarity matrices, recall@K, median rank,
// multiple-choice accuracy and the Dual Softmax re-scoring. Pure value math,
// no tape involvement. Ranks are 1-based; ties rank by the lower column
// index, so results are deterministic.

namespace fineco {

struct SimilarityMatrix {
  std::size_t rows = 0;  // queries (texts)
  std::size_t cols = 0;  // candidates (videos)
  std::vector<double> scores;      // row-major [rows x cols]
  std::vector<std::size_t> truth;  // ground-truth column per row

  double at(std::size_t i, std::size_t j) const { return scores[i * cols + j]; }
  double& at(std::size_t i, std::size_t j) { return scores[i * cols + j]; }
};

// Dot-product similarities between per-row query vectors and per-column
// candidate vectors. With no explicit truth the matrix must be square and
// the diagonal is the ground truth.
SimilarityMatrix similarity_matrix(std::span<const std::vector<double>> queries,
                                   std::span<const std::vector<double>> candidates,
                                   std::vector<std::size_t> truth = {});

// Dual Softmax re-scoring: each entry is multiplied by the column's softmax
// weight at temperature tau (the prior of the candidate given all queries).
// A single-row matrix is returned unchanged.
SimilarityMatrix dual_softmax(const SimilarityMatrix& sims, double temperature);

// 1-based rank of the ground-truth candidate in row `row`.
std::size_t rank_of_truth(const SimilarityMatrix& sims, std::size_t row);

// Percentage (0..100) of rows whose truth ranks within the top k; k must be
// in [1, cols].
double recall_at_k(const SimilarityMatrix& sims, std::size_t k);

// Median of the per-row truth ranks (mean of the middle two when even).
double median_rank(const SimilarityMatrix& sims);

// Fraction (0..1) of questions whose gold candidate has the highest score;
// every question needs at least two candidates. Ties pick the lower index.
double multiple_choice_accuracy(std::span<const std::vector<double>> questions,
                                std::span<const std::vector<std::vector<double>>> candidates,
                                std::span<const int> gold);

struct RetrievalMetrics {
  double r1 = 0.0;
  double r5 = 0.0;
  double r10 = 0.0;
  double medr = 0.0;
  double accuracy = 0.0;  // QA / multiple-choice runs only
};

}  // namespace fineco
