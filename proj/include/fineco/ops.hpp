#pragma once

#include <span>
#include <vector>

#include "fineco/tensor.hpp"

// Differentiable tensor ops. Every op computes its forward value through the
// kernel layer, and, when a tape is recording and an operand is tracked,
// registers a closure that adds its contribution into the operands' gradient
// buffers. Shape errors name the op and both shapes.

namespace fineco {

Tensor add(const Tensor& a, const Tensor& b);            // same shape
Tensor add_rowvec(const Tensor& a, const Tensor& v);     // [m x n] + [n], row broadcast
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);            // elementwise
Tensor scale(const Tensor& a, double c);
Tensor exp(const Tensor& a);
Tensor log(const Tensor& a);                             // rejects non-positive input
Tensor tanh(const Tensor& a);

Tensor matmul(const Tensor& a, const Tensor& b);         // [m x k] * [k x n]
Tensor transpose(const Tensor& a);
Tensor reshape(const Tensor& a, std::vector<int> shape); // copy, same element count

// Softmax along `axis` (-1 = last). Rank-1 tensors and both axes of rank-2
// tensors are supported; rows are shifted by their max before exponentiation.
Tensor softmax(const Tensor& a, int axis = -1);
Tensor logsumexp_rows(const Tensor& a);                  // [m x n] -> [m]

Tensor sum(const Tensor& a);                             // -> scalar
Tensor mean_rows(const Tensor& a);                       // [m x n] -> [n], column means

Tensor gather_rows(const Tensor& table, std::span<const int> ids);  // [V x d] -> [|ids| x d]
Tensor gather(const Tensor& v, std::span<const int> idx);           // rank-1 gather
Tensor diag(const Tensor& a);                            // [n x n] -> [n]
Tensor concat_cols(const Tensor& a, const Tensor& b);    // [m x p] ++ [m x q] -> [m x (p+q)]
Tensor tile_rows(const Tensor& v, int m);                // [n] -> [m x n]
Tensor stack_rows(std::span<const Tensor> rows);         // m tensors [n] -> [m x n]

Tensor normalize_rows(const Tensor& a);                  // rank-1: whole vector; rank-2: per row

Tensor detach(const Tensor& a);                          // value copy, never tracked

}  // namespace fineco
