#include "svwa/numerics/losses.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "svwa/error.hpp"

namespace svwa {

namespace {

void require_logits(const Tensor& logits) {
  if (logits.rank() != 2) throw DimensionError("logits must be B x C, got " + shape_to_string(logits.shape()));
  if (logits.dim(1) < 2) throw DimensionError("logits need at least 2 classes");
  require_finite(logits, "logits");
}

// Stable log-softmax of every row: z - max - log(sum(exp(z - max))).
Tensor log_softmax(const Tensor& logits) {
  const std::size_t rows = logits.dim(0);
  const std::size_t cols = logits.dim(1);
  Tensor out(logits.shape());
  for (std::size_t b = 0; b < rows; ++b) {
    const double* z = logits.data() + b * cols;
    const double mx = *std::max_element(z, z + cols);
    double sum = 0.0;
    for (std::size_t k = 0; k < cols; ++k) sum += std::exp(z[k] - mx);
    const double lse = std::log(sum);
    double* o = out.data() + b * cols;
    for (std::size_t k = 0; k < cols; ++k) o[k] = z[k] - mx - lse;
  }
  return out;
}

Tensor exp_of(const Tensor& log_probs) {
  Tensor p(log_probs.shape());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = std::exp(log_probs[i]);
  return p;
}

}  // namespace

EntropyResult softmax_entropy(const Tensor& logits) {
  require_logits(logits);
  EntropyResult r;
  r.log_probs = log_softmax(logits);
  r.probs = exp_of(r.log_probs);
  const std::size_t rows = logits.dim(0);
  const std::size_t cols = logits.dim(1);
  r.row_entropy.assign(rows, 0.0);
  double total = 0.0;
  for (std::size_t b = 0; b < rows; ++b) {
    double h = 0.0;
    for (std::size_t k = 0; k < cols; ++k) h -= r.probs.at(b, k) * r.log_probs.at(b, k);
    r.row_entropy[b] = h;
    total += h;
  }
  r.mean_entropy = total / static_cast<double>(rows);
  return r;
}

Tensor softmax_entropy_backward(const EntropyResult& r) {
  const std::size_t rows = r.probs.dim(0);
  const std::size_t cols = r.probs.dim(1);
  const double inv_rows = 1.0 / static_cast<double>(rows);
  Tensor grad(r.probs.shape());
  for (std::size_t b = 0; b < rows; ++b) {
    const double h = r.row_entropy[b];
    for (std::size_t k = 0; k < cols; ++k) {
      grad.at(b, k) = -inv_rows * r.probs.at(b, k) * (r.log_probs.at(b, k) + h);
    }
  }
  return grad;
}

CrossEntropyResult cross_entropy(const Tensor& logits, std::span<const int> labels) {
  require_logits(logits);
  const std::size_t rows = logits.dim(0);
  const std::size_t cols = logits.dim(1);
  if (labels.size() != rows) {
    throw DimensionError("cross_entropy: " + std::to_string(labels.size()) + " labels for " +
                         std::to_string(rows) + " rows");
  }
  for (int label : labels) {
    if (label < 0 || static_cast<std::size_t>(label) >= cols) {
      throw LabelError("label " + std::to_string(label) + " outside [0, " + std::to_string(cols) + ")");
    }
  }
  CrossEntropyResult r;
  const Tensor log_probs = log_softmax(logits);
  r.probs = exp_of(log_probs);
  r.labels.assign(labels.begin(), labels.end());
  double total = 0.0;
  for (std::size_t b = 0; b < rows; ++b) total -= log_probs.at(b, static_cast<std::size_t>(labels[b]));
  r.mean_loss = total / static_cast<double>(rows);
  return r;
}

Tensor cross_entropy_backward(const CrossEntropyResult& r) {
  const std::size_t rows = r.probs.dim(0);
  const double inv_rows = 1.0 / static_cast<double>(rows);
  Tensor grad = r.probs;
  for (std::size_t b = 0; b < rows; ++b) grad.at(b, static_cast<std::size_t>(r.labels[b])) -= 1.0;
  for (double& g : grad.values()) g *= inv_rows;
  return grad;
}

std::vector<int> argmax_rows(const Tensor& logits) {
  if (logits.rank() != 2) throw DimensionError("argmax_rows expects B x C");
  std::vector<int> out(logits.dim(0));
  const std::size_t cols = logits.dim(1);
  for (std::size_t b = 0; b < logits.dim(0); ++b) {
    const double* z = logits.data() + b * cols;
    out[b] = static_cast<int>(std::max_element(z, z + cols) - z);
  }
  return out;
}

}  // namespace svwa
