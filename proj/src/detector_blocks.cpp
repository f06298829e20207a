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

#include "viewspan/detector_blocks.hpp"

#include <algorithm>
#include <cmath>

#include "viewspan/detector.hpp"

namespace viewspan::blocks {

MatrixXd softmax_rows(const MatrixXd& logits) {
  MatrixXd out(logits.rows(), logits.cols());
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const double peak = logits.row(r).maxCoeff();
    out.row(r) = (logits.row(r).array() - peak).exp();
    out.row(r) /= out.row(r).sum();
  }
  return out;
}

MatrixXd softmax_rows_backward(const MatrixXd& probs, const MatrixXd& d_probs) {
  const Eigen::VectorXd inner = (probs.array() * d_probs.array()).rowwise().sum();
  return probs.array() * (d_probs.colwise() - inner).array();
}

MatrixXd linear_forward(const MatrixXd& x, const MatrixXd& w, const MatrixXd& b,
                        LinearCache* cache) {
  if (cache) cache->input = x;
  MatrixXd y = x * w;
  y.rowwise() += b.row(0);
  return y;
}

MatrixXd linear_backward(const LinearCache& cache, const MatrixXd& w,
                         const MatrixXd& d_out, MatrixXd& d_w, MatrixXd& d_b,
                         bool need_input_grad) {
  d_w.noalias() += cache.input.transpose() * d_out;
  d_b += d_out.colwise().sum();
  if (!need_input_grad) return {};
  return d_out * w.transpose();
}

MatrixXd self_attention_forward(const MatrixXd& x, const MatrixXd& wq,
                                const MatrixXd& wk, const MatrixXd& wv,
                                SelfAttentionCache* cache) {
  const double scale = 1.0 / std::sqrt(static_cast<double>(wq.cols()));
  MatrixXd q = x * wq;
  MatrixXd k = x * wk;
  MatrixXd v = x * wv;
  MatrixXd attn = softmax_rows(scale * q * k.transpose());
  MatrixXd y = x + attn * v;
  if (cache) {
    cache->input = x;
    cache->q = std::move(q);
    cache->k = std::move(k);
    cache->v = std::move(v);
    cache->attn = std::move(attn);
  }
  return y;
}

MatrixXd self_attention_backward(const SelfAttentionCache& c, const MatrixXd& wq,
                                 const MatrixXd& wk, const MatrixXd& wv,
                                 const MatrixXd& d_out, MatrixXd& d_wq,
                                 MatrixXd& d_wk, MatrixXd& d_wv) {
  const double scale = 1.0 / std::sqrt(static_cast<double>(wq.cols()));
  const MatrixXd d_attn = d_out * c.v.transpose();
  const MatrixXd d_v = c.attn.transpose() * d_out;
  const MatrixXd d_logits = scale * softmax_rows_backward(c.attn, d_attn);
  const MatrixXd d_q = d_logits * c.k;
  const MatrixXd d_k = d_logits.transpose() * c.q;
  d_wq.noalias() += c.input.transpose() * d_q;
  d_wk.noalias() += c.input.transpose() * d_k;
  d_wv.noalias() += c.input.transpose() * d_v;
  MatrixXd d_x = d_out;
  d_x.noalias() += d_q * wq.transpose();
  d_x.noalias() += d_k * wk.transpose();
  d_x.noalias() += d_v * wv.transpose();
  return d_x;
}

MatrixXd feed_forward_forward(const MatrixXd& x, const MatrixXd& w1,
                              const MatrixXd& b1, const MatrixXd& w2,
                              const MatrixXd& b2, FeedForwardCache* cache) {
  MatrixXd pre = x * w1;
  pre.rowwise() += b1.row(0);
  MatrixXd hidden = pre.array().tanh().matrix();
  MatrixXd y = x + hidden * w2;
  y.rowwise() += b2.row(0);
  if (cache) {
    cache->input = x;
    cache->hidden = std::move(hidden);
  }
  return y;
}

MatrixXd feed_forward_backward(const FeedForwardCache& c, const MatrixXd& w1,
                               const MatrixXd& w2, const MatrixXd& d_out,
                               MatrixXd& d_w1, MatrixXd& d_b1, MatrixXd& d_w2,
                               MatrixXd& d_b2) {
  d_w2.noalias() += c.hidden.transpose() * d_out;
  d_b2 += d_out.colwise().sum();
  const MatrixXd d_pre =
      ((d_out * w2.transpose()).array() * (1.0 - c.hidden.array().square())).matrix();
  d_w1.noalias() += c.input.transpose() * d_pre;
  d_b1 += d_pre.colwise().sum();
  MatrixXd d_x = d_out;
  d_x.noalias() += d_pre * w1.transpose();
  return d_x;
}

MatrixXd memory_attention_forward(const MatrixXd& x, const MatrixXd& wq,
                                  const MatrixXd& keys, const MatrixXd& values,
                                  MemoryAttentionCache* cache) {
  MatrixXd query = x * wq;
  if (keys.rows() == 0) {
    if (cache) {
      cache->input = x;
      cache->query = std::move(query);
      cache->keys = keys;
      cache->values = values;
      cache->attn.resize(x.rows(), 0);
    }
    return MatrixXd::Zero(x.rows(), values.cols() > 0 ? values.cols() : wq.cols());
  }
  const double scale = 1.0 / std::sqrt(static_cast<double>(wq.cols()));
  MatrixXd attn = softmax_rows(scale * query * keys.transpose());
  MatrixXd y = attn * values;
  if (cache) {
    cache->input = x;
    cache->query = std::move(query);
    cache->keys = keys;
    cache->values = values;
    cache->attn = std::move(attn);
  }
  return y;
}

MatrixXd memory_attention_backward(const MemoryAttentionCache& c,
                                   const MatrixXd& wq, const MatrixXd& d_out,
                                   MatrixXd& d_wq, MatrixXd& d_keys,
                                   MatrixXd& d_values) {
  d_keys = MatrixXd::Zero(c.keys.rows(), c.keys.cols());
  d_values = MatrixXd::Zero(c.values.rows(), c.values.cols());
  if (c.keys.rows() == 0) return MatrixXd::Zero(c.input.rows(), c.input.cols());
  const double scale = 1.0 / std::sqrt(static_cast<double>(wq.cols()));
  const MatrixXd d_attn = d_out * c.values.transpose();
  d_values = c.attn.transpose() * d_out;
  const MatrixXd d_logits = scale * softmax_rows_backward(c.attn, d_attn);
  const MatrixXd d_query = d_logits * c.keys;
  d_keys = d_logits.transpose() * c.query;
  d_wq.noalias() += c.input.transpose() * d_query;
  return d_query * wq.transpose();
}

double scorer_forward(const MatrixXd& x, const MatrixXd& w1, const MatrixXd& b1,
                      const MatrixXd& w2, const MatrixXd& b2, ScorerCache* cache) {
  const MatrixXd pooled = x.colwise().mean();
  MatrixXd pre = pooled * w1 + b1;
  MatrixXd hidden = pre.array().tanh().matrix();
  const double raw = (hidden * w2)(0, 0) + b2(0, 0);
  const double logit = std::clamp(raw, -kLogitClip, kLogitClip);
  const double s = 1.0 / (1.0 + std::exp(-logit));
  if (cache) {
    cache->pooled = pooled;
    cache->hidden = std::move(hidden);
    cache->logit = logit;
    cache->score = s;
    cache->clipped = std::abs(raw) > kLogitClip;
    cache->rows = x.rows();
  }
  return s;
}

MatrixXd scorer_backward(const ScorerCache& c, const MatrixXd& w1,
                         const MatrixXd& w2, double d_score, MatrixXd& d_w1,
                         MatrixXd& d_b1, MatrixXd& d_w2, MatrixXd& d_b2) {
  const double d_logit = c.clipped ? 0.0 : d_score * c.score * (1.0 - c.score);
  d_w2.noalias() += c.hidden.transpose() * d_logit;
  d_b2(0, 0) += d_logit;
  const MatrixXd d_pre =
      ((d_logit * w2.transpose()).array() * (1.0 - c.hidden.array().square()))
          .matrix();
  d_w1.noalias() += c.pooled.transpose() * d_pre;
  d_b1 += d_pre;
  const MatrixXd d_pooled = d_pre * w1.transpose();
  return MatrixXd::Ones(c.rows, 1) * (d_pooled / static_cast<double>(c.rows));
}

}  // namespace viewspan::blocks
