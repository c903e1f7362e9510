#pragma once

#include <span>
#include <vector>

#include "svwa/numerics/tensor.hpp"

namespace svwa {

/// Row-wise softmax with the mean Shannon entropy (natural log).
struct EntropyResult {
  double mean_entropy = 0.0;
  Tensor probs;
  Tensor log_probs;
  std::vector<double> row_entropy;
};

EntropyResult softmax_entropy(const Tensor& logits);

/// d(mean_entropy)/d(logits) = -(1/B) p_k (log p_k + H_b).
Tensor softmax_entropy_backward(const EntropyResult& result);

struct CrossEntropyResult {
  double mean_loss = 0.0;
  Tensor probs;
  std::vector<int> labels;
};

CrossEntropyResult cross_entropy(const Tensor& logits, std::span<const int> labels);

/// (probs - onehot) / B.
Tensor cross_entropy_backward(const CrossEntropyResult& result);

/// Row-wise argmax, smallest index on ties.
std::vector<int> argmax_rows(const Tensor& logits);

}  // namespace svwa
