#pragma once

#include <algorithm>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "simflood/composition.hpp"
#include "simflood/flood.hpp"
#include "simflood/knowledge_graph.hpp"
#include "simflood/parallel.hpp"

namespace simflood {

/// Candidates ranked for each test source: the test targets, or every column.
enum class CandidatePool { test, all };

CandidatePool parse_candidate_pool(std::string_view name);
std::string_view to_string(CandidatePool pool);

struct RankedEntity {
  Index source = 0;
  Index truth = 0;
  /// 1-based rank of the true counterpart.
  Index rank = 0;
  /// Best candidates, by descending score then ascending column.
  std::vector<std::pair<Index, double>> top;
};

struct RankingReport {
  std::vector<RankedEntity> entries;
  double hits_at_1 = 0.0;
  double hits_at_10 = 0.0;
  double mrr = 0.0;

  std::vector<Index> ranks() const;
};

double hits_at_k(std::span<const Index> ranks, Index k);
double mrr(std::span<const Index> ranks);

/// Ranks every test pair's source row. A candidate c outranks the truth t
/// when its score is higher, or equal with c < t. Indices are matrix rows
/// and columns.
template <typename Derived>
RankingReport rank_targets(const Eigen::MatrixBase<Derived>& omega, std::span<const EntityPair> test,
                           CandidatePool pool = CandidatePool::test, Index top_k = 10, int workers = 1) {
  std::vector<Index> candidates;
  if (pool == CandidatePool::all) {
    candidates.resize(static_cast<std::size_t>(omega.cols()));
    for (Index j = 0; j < omega.cols(); ++j) candidates[static_cast<std::size_t>(j)] = j;
  } else {
    for (const auto& p : test) candidates.push_back(p.second);
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
  }
  for (const auto& [i, j] : test)
    if (i < 0 || i >= omega.rows() || j < 0 || j >= omega.cols())
      throw DimensionError("rank_targets: test pair outside the similarity matrix");

  RankingReport report;
  report.entries.resize(test.size());
  const auto count = static_cast<Index>(test.size());
  parallel_blocks(count, 256, workers, [&](Index begin, Index end) {
    std::vector<Index> order;
    for (Index k = begin; k < end; ++k) {
      const auto [i, truth] = test[static_cast<std::size_t>(k)];
      const double truth_score = static_cast<double>(omega(i, truth));
      auto& entry = report.entries[static_cast<std::size_t>(k)];
      entry.source = i;
      entry.truth = truth;
      entry.rank = 1;
      for (const Index c : candidates) {
        const double s = static_cast<double>(omega(i, c));
        if (s > truth_score || (s == truth_score && c < truth)) ++entry.rank;
      }
      order = candidates;
      const auto keep = std::min<std::size_t>(static_cast<std::size_t>(std::max<Index>(top_k, 0)), order.size());
      auto better = [&](Index a, Index b) {
        const double sa = static_cast<double>(omega(i, a));
        const double sb = static_cast<double>(omega(i, b));
        return sa > sb || (sa == sb && a < b);
      };
      std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep), order.end(), better);
      entry.top.clear();
      for (std::size_t r = 0; r < keep; ++r) entry.top.emplace_back(order[r], static_cast<double>(omega(i, order[r])));
    }
  });
  if (!report.entries.empty()) {
    const auto ranks = report.ranks();
    report.hits_at_1 = hits_at_k(ranks, 1);
    report.hits_at_10 = hits_at_k(ranks, 10);
    report.mrr = mrr(ranks);
  }
  return report;
}

/// Partial injective function from source rows to target columns.
struct AlignmentMapping {
  static constexpr Index kUnmatched = -1;
  std::vector<Index> target;

  std::size_t matched() const;
  bool injective() const;
};

/// Greedy extraction: cells are taken by descending score (ties by row,
/// then column) while both their row and column are free. Only positive
/// scores are accepted.
AlignmentMapping extract_mapping(const Similarity& omega);

struct StructuralResidual {
  double mean = 0.0;
  double max = 0.0;
  /// Number of (i, j) pairs compared, both matched.
  std::size_t pairs = 0;
};

/// |lambda_{i,j} - lambda'_{f(i),f(j)}| over all matched i, j.
StructuralResidual verify_structural_isomorphism(const CompositionMatrix& source, const CompositionMatrix& target,
                                                 const AlignmentMapping& mapping);

/// One `source<TAB>truth<TAB>rank<TAB>top_1<TAB>...<TAB>top_k` line per
/// entry, after a `#`-prefixed header line. Labels are indexed by matrix row
/// and column.
void write_report(std::ostream& out, const RankingReport& report, std::span<const std::string> row_labels,
                  std::span<const std::string> column_labels);

/// `key = value` lines: count, hits@1, hits@10, mrr.
void write_metrics(std::ostream& out, const RankingReport& report);

}  // namespace simflood
