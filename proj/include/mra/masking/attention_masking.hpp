#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include <Eigen/Core>

#include "mra/nn/attention.hpp"
#include "mra/patches.hpp"

namespace mra::masking {

enum class MaskStrategy { mask_low, mask_high, random };
enum class HeadAggregation { mean, max, first_head };
enum class ScoreScaling { raw, scaled, softmax };

std::string_view to_string(MaskStrategy strategy);
MaskStrategy parse_mask_strategy(std::string_view name);
std::string_view to_string(HeadAggregation aggregation);
HeadAggregation parse_head_aggregation(std::string_view name);
std::string_view to_string(ScoreScaling scaling);
ScoreScaling parse_score_scaling(std::string_view name);

struct ScoreOptions {
  ScoreScaling scaling = ScoreScaling::raw;
  HeadAggregation aggregation = HeadAggregation::mean;
};

/// Class-token attention score of each patch, one entry per patch index.
struct AttentionScores {
  Eigen::VectorXd scores;
  std::string source;  // e.g. "last-block/mean/raw"

  int size() const { return static_cast<int>(scores.size()); }
};

struct MaskingPolicy {
  MaskStrategy strategy = MaskStrategy::mask_low;
  int keep_count = 1;
  std::uint64_t seed = 0;  // only used by the random strategy

  // Throws ErrorKind::validation unless 1 <= keep_count <= num_patches.
  void validate(int num_patches) const;
};

/// K = N - round(r * N), the visible budget for an augmentation mask ratio.
int keep_count_for_ratio(int num_patches, double mask_ratio);

/// Per-head q_cls . k_i for every patch token i of sample `sample`,
/// aggregated across heads. The class token is token 0 and is excluded.
template <typename Scalar>
AttentionScores class_token_scores(const nn::AttentionRecord<Scalar>& record,
                                   const ScoreOptions& options = {}, int sample = 0);

/// Indices of the K largest scores, ties to the smaller index, ascending.
TopKIndexSet top_rank(const AttentionScores& scores, int k);
/// Indices of the K smallest scores, ties to the smaller index, ascending.
TopKIndexSet bottom_rank(const AttentionScores& scores, int k);

/// mask_low keeps the top-K (erases low attention), mask_high keeps the
/// bottom-K (erases high attention), random keeps a seeded uniform K-subset.
TopKIndexSet select_visible(const AttentionScores& scores, const MaskingPolicy& policy);

}  // namespace mra::masking
