#include "mra/masking/attention_masking.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "mra/mae/random_mask.hpp"
#include "mra/nn/functional.hpp"

namespace mra::masking {

std::string_view to_string(MaskStrategy strategy) {
  switch (strategy) {
    case MaskStrategy::mask_low: return "mask_low";
    case MaskStrategy::mask_high: return "mask_high";
    case MaskStrategy::random: return "random";
  }
  return "unknown";
}

MaskStrategy parse_mask_strategy(std::string_view name) {
  if (name == "mask_low") return MaskStrategy::mask_low;
  if (name == "mask_high") return MaskStrategy::mask_high;
  if (name == "random") return MaskStrategy::random;
  fail(ErrorKind::config,
       "unknown strategy '" + std::string(name) + "' (expected mask_low|mask_high|random)");
}

std::string_view to_string(HeadAggregation aggregation) {
  switch (aggregation) {
    case HeadAggregation::mean: return "mean";
    case HeadAggregation::max: return "max";
    case HeadAggregation::first_head: return "head0";
  }
  return "unknown";
}

HeadAggregation parse_head_aggregation(std::string_view name) {
  if (name == "mean") return HeadAggregation::mean;
  if (name == "max") return HeadAggregation::max;
  if (name == "head0") return HeadAggregation::first_head;
  fail(ErrorKind::config, "unknown head aggregation '" + std::string(name) + "'");
}

std::string_view to_string(ScoreScaling scaling) {
  switch (scaling) {
    case ScoreScaling::raw: return "raw";
    case ScoreScaling::scaled: return "scaled";
    case ScoreScaling::softmax: return "softmax";
  }
  return "unknown";
}

ScoreScaling parse_score_scaling(std::string_view name) {
  if (name == "raw") return ScoreScaling::raw;
  if (name == "scaled") return ScoreScaling::scaled;
  if (name == "softmax") return ScoreScaling::softmax;
  fail(ErrorKind::config, "unknown score scaling '" + std::string(name) + "'");
}

void MaskingPolicy::validate(int num_patches) const {
  if (keep_count < 1 || keep_count > num_patches) {
    fail(ErrorKind::validation, "keep count " + std::to_string(keep_count) +
                                    " outside [1, " + std::to_string(num_patches) + "]");
  }
}

int keep_count_for_ratio(int num_patches, double mask_ratio) {
  return mae::visible_patch_count(num_patches, mask_ratio);
}

template <typename Scalar>
AttentionScores class_token_scores(const nn::AttentionRecord<Scalar>& record,
                                   const ScoreOptions& options, int sample) {
  if (record.empty()) {
    fail(ErrorKind::state,
         "no attention record; run the encoder with every patch visible to obtain scores");
  }
  if (!record.full_visibility) {
    fail(ErrorKind::state,
         "attention record covers a partial patch set; rerun the encoder with full visibility");
  }
  if (sample < 0 || sample >= record.batch) {
    fail(ErrorKind::validation, "attention record has no sample " + std::to_string(sample));
  }
  const int hd = record.head_dim;
  const int n = record.seq_len - 1;
  const Index r0 = Index(sample) * record.seq_len;
  const int heads = options.aggregation == HeadAggregation::first_head ? 1 : record.num_heads;
  const double scale =
      options.scaling == ScoreScaling::raw ? 1.0 : 1.0 / std::sqrt(static_cast<double>(hd));

  Eigen::MatrixXd per_head(heads, n);
  for (int h = 0; h < heads; ++h) {
    const Eigen::VectorXd q = record.queries.row(r0).segment(h * hd, hd).transpose().template cast<double>();
    const Eigen::MatrixXd k = record.keys.block(r0 + 1, h * hd, n, hd).template cast<double>();
    per_head.row(h) = (k * q).transpose() * scale;
  }
  AttentionScores out;
  if (options.aggregation == HeadAggregation::max) {
    out.scores = per_head.colwise().maxCoeff().transpose();
  } else {
    out.scores = per_head.colwise().mean().transpose();
  }
  if (options.scaling == ScoreScaling::softmax) out.scores = nn::softmax(out.scores);
  out.source = "last-block/" + std::string(to_string(options.aggregation)) + "/" +
               std::string(to_string(options.scaling));
  return out;
}

template AttentionScores class_token_scores<float>(const nn::AttentionRecord<float>&,
                                                   const ScoreOptions&, int);
template AttentionScores class_token_scores<double>(const nn::AttentionRecord<double>&,
                                                    const ScoreOptions&, int);

namespace {

template <typename Before>
TopKIndexSet rank_select(const AttentionScores& scores, int k, Before before) {
  const int n = scores.size();
  if (k < 0 || k > n) {
    fail(ErrorKind::validation,
         "rank budget " + std::to_string(k) + " outside [0, " + std::to_string(n) + "]");
  }
  if (!scores.scores.allFinite()) fail(ErrorKind::validation, "attention scores must be finite");
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::partial_sort(order.begin(), order.begin() + k, order.end(), [&](int a, int b) {
    const double sa = scores.scores(a);
    const double sb = scores.scores(b);
    if (sa != sb) return before(sa, sb);
    return a < b;
  });
  order.resize(static_cast<std::size_t>(k));
  return {std::move(order), k, n};
}

}  // namespace

TopKIndexSet top_rank(const AttentionScores& scores, int k) {
  return rank_select(scores, k, std::greater<double>());
}

TopKIndexSet bottom_rank(const AttentionScores& scores, int k) {
  return rank_select(scores, k, std::less<double>());
}

TopKIndexSet select_visible(const AttentionScores& scores, const MaskingPolicy& policy) {
  const int n = scores.size();
  policy.validate(n);
  switch (policy.strategy) {
    case MaskStrategy::mask_low: return top_rank(scores, policy.keep_count);
    case MaskStrategy::mask_high: return bottom_rank(scores, policy.keep_count);
    case MaskStrategy::random: {
      Rng rng = make_rng(policy.seed);
      std::vector<int> order(static_cast<std::size_t>(n));
      std::iota(order.begin(), order.end(), 0);
      std::shuffle(order.begin(), order.end(), rng);
      order.resize(static_cast<std::size_t>(policy.keep_count));
      return {std::move(order), policy.keep_count, n};
    }
  }
  fail(ErrorKind::validation, "unknown masking strategy");
}

}  // namespace mra::masking
