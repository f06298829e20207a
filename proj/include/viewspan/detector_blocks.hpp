// Copyright 2026 The Viewspan Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <Eigen/Core>

// Differentiable building blocks of the temporal detector. Each forward
// fills a cache; each backward consumes it, accumulates parameter gradients
// and returns the gradient with respect to the block input.

namespace viewspan::blocks {

using Eigen::MatrixXd;

/// Row-wise softmax.
MatrixXd softmax_rows(const MatrixXd& logits);

/// Backward of row-wise softmax given its output.
MatrixXd softmax_rows_backward(const MatrixXd& probs, const MatrixXd& d_probs);

struct LinearCache {
  MatrixXd input;
};
MatrixXd linear_forward(const MatrixXd& x, const MatrixXd& w, const MatrixXd& b,
                        LinearCache* cache);
/// Returns d_x, or an empty matrix when `need_input_grad` is false.
MatrixXd linear_backward(const LinearCache& cache, const MatrixXd& w,
                         const MatrixXd& d_out, MatrixXd& d_w, MatrixXd& d_b,
                         bool need_input_grad = true);

/// y = x + softmax(x wq (x wk)^T / sqrt(D)) x wv
struct SelfAttentionCache {
  MatrixXd input, q, k, v, attn;
};
MatrixXd self_attention_forward(const MatrixXd& x, const MatrixXd& wq,
                                const MatrixXd& wk, const MatrixXd& wv,
                                SelfAttentionCache* cache);
MatrixXd self_attention_backward(const SelfAttentionCache& cache,
                                 const MatrixXd& wq, const MatrixXd& wk,
                                 const MatrixXd& wv, const MatrixXd& d_out,
                                 MatrixXd& d_wq, MatrixXd& d_wk, MatrixXd& d_wv);

/// y = x + tanh(x w1 + b1) w2 + b2
struct FeedForwardCache {
  MatrixXd input, hidden;
};
MatrixXd feed_forward_forward(const MatrixXd& x, const MatrixXd& w1,
                              const MatrixXd& b1, const MatrixXd& w2,
                              const MatrixXd& b2, FeedForwardCache* cache);
MatrixXd feed_forward_backward(const FeedForwardCache& cache, const MatrixXd& w1,
                               const MatrixXd& w2, const MatrixXd& d_out,
                               MatrixXd& d_w1, MatrixXd& d_b1, MatrixXd& d_w2,
                               MatrixXd& d_b2);

/// y = softmax(x wq keys^T / sqrt(D)) values over the given memory rows.
/// An empty memory (zero rows) yields zeros.
struct MemoryAttentionCache {
  MatrixXd input, query, keys, values, attn;
};
MatrixXd memory_attention_forward(const MatrixXd& x, const MatrixXd& wq,
                                  const MatrixXd& keys, const MatrixXd& values,
                                  MemoryAttentionCache* cache);
/// Returns d_x; gradients for the memory rows go to d_keys / d_values
/// (resized to match).
MatrixXd memory_attention_backward(const MemoryAttentionCache& cache,
                                   const MatrixXd& wq, const MatrixXd& d_out,
                                   MatrixXd& d_wq, MatrixXd& d_keys,
                                   MatrixXd& d_values);

/// s = logistic(clip(tanh(mean_rows(x) w1 + b1) w2 + b2, +-30))
struct ScorerCache {
  MatrixXd pooled, hidden;
  double logit = 0.0;
  double score = 0.0;
  bool clipped = false;
  long rows = 0;
};
double scorer_forward(const MatrixXd& x, const MatrixXd& w1, const MatrixXd& b1,
                      const MatrixXd& w2, const MatrixXd& b2, ScorerCache* cache);
MatrixXd scorer_backward(const ScorerCache& cache, const MatrixXd& w1,
                         const MatrixXd& w2, double d_score, MatrixXd& d_w1,
                         MatrixXd& d_b1, MatrixXd& d_w2, MatrixXd& d_b2);

}  // namespace viewspan::blocks
