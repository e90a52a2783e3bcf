#include "simflood/evaluation.hpp"

#include <cstdio>
#include <ostream>
#include <queue>
#include <tuple>

namespace simflood {

CandidatePool parse_candidate_pool(std::string_view name) {
  if (name == "test") return CandidatePool::test;
  if (name == "all") return CandidatePool::all;
  throw ConfigError("unknown candidate pool: " + std::string(name));
}

std::string_view to_string(CandidatePool pool) { return pool == CandidatePool::test ? "test" : "all"; }

std::vector<Index> RankingReport::ranks() const {
  std::vector<Index> out;
  out.reserve(entries.size());
  for (const auto& e : entries) out.push_back(e.rank);
  return out;
}

double hits_at_k(std::span<const Index> ranks, Index k) {
  if (ranks.empty()) throw Error("hits_at_k: empty rank list");
  const auto hits = std::count_if(ranks.begin(), ranks.end(), [k](Index r) { return r <= k; });
  return static_cast<double>(hits) / static_cast<double>(ranks.size());
}

double mrr(std::span<const Index> ranks) {
  if (ranks.empty()) throw Error("mrr: empty rank list");
  double sum = 0.0;
  for (const Index r : ranks) sum += 1.0 / static_cast<double>(r);
  return sum / static_cast<double>(ranks.size());
}

std::size_t AlignmentMapping::matched() const {
  return static_cast<std::size_t>(std::count_if(target.begin(), target.end(), [](Index t) { return t != kUnmatched; }));
}

bool AlignmentMapping::injective() const {
  std::vector<Index> used;
  for (const Index t : target)
    if (t != kUnmatched) used.push_back(t);
  std::sort(used.begin(), used.end());
  return std::adjacent_find(used.begin(), used.end()) == used.end();
}

AlignmentMapping extract_mapping(const Similarity& omega) {
  const Index n = omega.rows();
  const Index m = omega.cols();
  AlignmentMapping mapping;
  mapping.target.assign(static_cast<std::size_t>(n), AlignmentMapping::kUnmatched);
  std::vector<bool> taken(static_cast<std::size_t>(m), false);

  // Each row keeps its best free positive cell in the heap; popping the
  // heap therefore visits cells in the same order as a global sort.
  struct Cell {
    float score;
    Index row;
    Index col;
  };
  auto after = [](const Cell& a, const Cell& b) {
    return std::make_tuple(-a.score, a.row, a.col) > std::make_tuple(-b.score, b.row, b.col);
  };
  std::priority_queue<Cell, std::vector<Cell>, decltype(after)> heap(after);
  auto best_free = [&](Index i) -> std::optional<Cell> {
    std::optional<Cell> best;
    for (Index j = 0; j < m; ++j) {
      const float s = omega(i, j);
      if (taken[static_cast<std::size_t>(j)] || !(s > 0.0f)) continue;
      if (!best || s > best->score) best = Cell{s, i, j};
    }
    return best;
  };
  for (Index i = 0; i < n; ++i)
    if (auto c = best_free(i)) heap.push(*c);
  while (!heap.empty()) {
    const Cell c = heap.top();
    heap.pop();
    if (taken[static_cast<std::size_t>(c.col)]) {
      if (auto next = best_free(c.row)) heap.push(*next);
      continue;
    }
    taken[static_cast<std::size_t>(c.col)] = true;
    mapping.target[static_cast<std::size_t>(c.row)] = c.col;
  }
  return mapping;
}

StructuralResidual verify_structural_isomorphism(const CompositionMatrix& source, const CompositionMatrix& target,
                                                 const AlignmentMapping& mapping) {
  if (source.variant() != target.variant()) throw ConsistencyError("composition variants differ");
  if (static_cast<Index>(mapping.target.size()) != source.size())
    throw DimensionError("mapping size does not match the source composition");
  if (!mapping.injective()) throw ConsistencyError("alignment mapping is not injective");

  std::vector<Index> matched;
  for (Index i = 0; i < source.size(); ++i) {
    const Index t = mapping.target[static_cast<std::size_t>(i)];
    if (t == AlignmentMapping::kUnmatched) continue;
    if (t < 0 || t >= target.size()) throw DimensionError("mapping target out of range");
    matched.push_back(i);
  }

  StructuralResidual residual;
  double sum = 0.0;
  for (const Index i : matched) {
    const Eigen::VectorXd row = source.row(i);
    const Eigen::VectorXd counterpart = target.row(mapping.target[static_cast<std::size_t>(i)]);
    for (const Index j : matched) {
      const double d = std::abs(row(j) - counterpart(mapping.target[static_cast<std::size_t>(j)]));
      sum += d;
      residual.max = std::max(residual.max, d);
    }
  }
  residual.pairs = matched.size() * matched.size();
  if (residual.pairs > 0) residual.mean = sum / static_cast<double>(residual.pairs);
  return residual;
}

void write_report(std::ostream& out, const RankingReport& report, std::span<const std::string> row_labels,
                  std::span<const std::string> column_labels) {
  out << "#source\ttrue_target\trank\ttop_targets\n";
  for (const auto& e : report.entries) {
    out << row_labels[static_cast<std::size_t>(e.source)] << '\t' << column_labels[static_cast<std::size_t>(e.truth)]
        << '\t' << e.rank;
    for (const auto& [c, score] : e.top) out << '\t' << column_labels[static_cast<std::size_t>(c)];
    out << '\n';
  }
}

void write_metrics(std::ostream& out, const RankingReport& report) {
  char buffer[64];
  out << "count = " << report.entries.size() << '\n';
  std::snprintf(buffer, sizeof buffer, "%.6f", report.hits_at_1);
  out << "hits@1 = " << buffer << '\n';
  std::snprintf(buffer, sizeof buffer, "%.6f", report.hits_at_10);
  out << "hits@10 = " << buffer << '\n';
  std::snprintf(buffer, sizeof buffer, "%.6f", report.mrr);
  out << "mrr = " << buffer << '\n';
}

}  // namespace simflood
