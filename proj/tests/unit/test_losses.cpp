#include <gtest/gtest.h>

#include <cmath>

#include "svwa/error.hpp"
#include "svwa/numerics/losses.hpp"
#include "test_util.hpp"

namespace svwa {
namespace {

using test::max_rel_error;
using test::numeric_grad;
using test::random_tensor;

// Direct definition, no max subtraction: fine for moderate logits.
double naive_mean_entropy(const Tensor& logits) {
  const std::size_t b = logits.dim(0), c = logits.dim(1);
  double total = 0.0;
  for (std::size_t i = 0; i < b; ++i) {
    double z = 0.0;
    for (std::size_t k = 0; k < c; ++k) z += std::exp(logits.at(i, k));
    for (std::size_t k = 0; k < c; ++k) {
      const double p = std::exp(logits.at(i, k)) / z;
      total -= p * std::log(p);
    }
  }
  return total / static_cast<double>(b);
}

TEST(SoftmaxEntropy, UniformLogitsGiveLogC) {
  const EntropyResult r = softmax_entropy(Tensor({2, 4}, 0.3));
  EXPECT_NEAR(r.mean_entropy, std::log(4.0), 1e-15);
  EXPECT_NEAR(r.mean_entropy, 1.386294, 1e-6);
}

TEST(SoftmaxEntropy, HugeLogitIsStable) {
  const EntropyResult r = softmax_entropy(Tensor({1, 3}, {1000.0, 0.0, 0.0}));
  EXPECT_TRUE(std::isfinite(r.mean_entropy));
  EXPECT_NEAR(r.mean_entropy, 0.0, 1e-12);
  EXPECT_TRUE(r.probs.all_finite());
}

TEST(SoftmaxEntropy, MatchesDefinitionAndStaysInRange) {
  Rng rng(20);
  for (int draw = 0; draw < 20; ++draw) {
    const Tensor logits = random_tensor(rng, {5, 6}, -4.0, 4.0);
    const EntropyResult r = softmax_entropy(logits);
    EXPECT_NEAR(r.mean_entropy, naive_mean_entropy(logits), 1e-12);
    for (std::size_t i = 0; i < 5; ++i) {
      double s = 0.0;
      for (std::size_t k = 0; k < 6; ++k) s += r.probs.at(i, k);
      EXPECT_NEAR(s, 1.0, 1e-12);
      EXPECT_GE(r.row_entropy[i], 0.0);
      EXPECT_LE(r.row_entropy[i], std::log(6.0) + 1e-12);
    }
  }
}

TEST(SoftmaxEntropy, BackwardMatchesFiniteDifferences) {
  Rng rng(21);
  for (int draw = 0; draw < 20; ++draw) {
    const Tensor logits = random_tensor(rng, {3, 5}, -3.0, 3.0);
    const Tensor g = softmax_entropy_backward(softmax_entropy(logits));
    const Tensor n = numeric_grad([](const Tensor& t) { return softmax_entropy(t).mean_entropy; }, logits);
    EXPECT_LT(max_rel_error(g, n), 1e-5);
  }
}

TEST(CrossEntropy, UniformLogitsGiveLogC) {
  const std::vector<int> labels{0, 3};
  EXPECT_NEAR(cross_entropy(Tensor({2, 4}, 1.0), labels).mean_loss, std::log(4.0), 1e-15);
}

TEST(CrossEntropy, ConfidentCorrectIsNearZero) {
  const std::vector<int> labels{1};
  EXPECT_LT(cross_entropy(Tensor({1, 3}, {0.0, 20.0, 0.0}), labels).mean_loss, 0.01);
}

TEST(CrossEntropy, OutOfRangeLabelThrows) {
  const std::vector<int> bad{4};
  const std::vector<int> negative{-1};
  EXPECT_THROW(cross_entropy(Tensor({1, 4}), bad), LabelError);
  EXPECT_THROW(cross_entropy(Tensor({1, 4}), negative), LabelError);
}

TEST(CrossEntropy, BackwardMatchesFiniteDifferences) {
  Rng rng(22);
  for (int draw = 0; draw < 20; ++draw) {
    const Tensor logits = random_tensor(rng, {4, 5}, -3.0, 3.0);
    std::vector<int> labels;
    for (int i = 0; i < 4; ++i) labels.push_back(static_cast<int>(rng.index(5)));
    const Tensor g = cross_entropy_backward(cross_entropy(logits, labels));
    const Tensor n = numeric_grad([&](const Tensor& t) { return cross_entropy(t, labels).mean_loss; }, logits);
    EXPECT_LT(max_rel_error(g, n), 1e-5);
  }
}

TEST(ArgmaxRows, SmallestIndexOnTies) {
  EXPECT_EQ(argmax_rows(Tensor({2, 3}, {1.0, 5.0, 5.0, 2.0, 0.0, 1.0})), (std::vector<int>{1, 0}));
}

}  // namespace
}  // namespace svwa
