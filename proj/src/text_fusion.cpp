#include "simflood/text_fusion.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <string>
#include <vector>

namespace simflood {

std::size_t NameVectorTable::coverage() const {
  return static_cast<std::size_t>(std::count(covered.begin(), covered.end(), true));
}

namespace {

double parse_real(std::string_view text, const std::filesystem::path& file, std::size_t line_no) {
  double value = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || !std::isfinite(value))
    throw ParseError(file.string(), line_no, "bad vector component '" + std::string(text) + "'");
  return value;
}

}  // namespace

NameVectorTable load_name_vectors(const std::filesystem::path& file, const KnowledgeGraph& kg) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ParseError(file.string(), 0, "cannot open file");

  NameVectorTable table;
  table.covered.assign(kg.num_entities(), false);
  std::vector<std::pair<EntityId, std::vector<double>>> rows;
  Index dimension = -1;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto fields = split_fields(line);
    const auto d = static_cast<Index>(fields.size()) - 1;
    if (d < 1) throw ParseError(file.string(), line_no, "no vector components");
    if (dimension < 0) dimension = d;
    if (d != dimension)
      throw ParseError(file.string(), line_no,
                       "dimension " + std::to_string(d) + " differs from " + std::to_string(dimension));
    const auto id = kg.entities().find(fields[0]);
    if (!id) {
      ++table.skipped;
      continue;
    }
    if (table.covered[static_cast<std::size_t>(*id)])
      throw ConsistencyError(file.string() + ":" + std::to_string(line_no) + ": duplicate vector for " +
                             std::string(fields[0]));
    table.covered[static_cast<std::size_t>(*id)] = true;
    std::vector<double> values;
    values.reserve(static_cast<std::size_t>(d));
    for (std::size_t k = 1; k < fields.size(); ++k) values.push_back(parse_real(fields[k], file, line_no));
    rows.emplace_back(*id, std::move(values));
  }

  table.vectors = Eigen::MatrixXd::Zero(static_cast<Index>(kg.num_entities()), std::max<Index>(dimension, 0));
  for (const auto& [id, values] : rows)
    table.vectors.row(id) = Eigen::Map<const Eigen::RowVectorXd>(values.data(), static_cast<Index>(values.size()));
  return table;
}

Similarity name_similarity(const NameVectorTable& source, const NameVectorTable& target) {
  const Index n = source.vectors.rows();
  const Index m = target.vectors.rows();
  if (source.coverage() == 0 || target.coverage() == 0) return Similarity::Zero(n, m);
  if (source.dimension() != target.dimension()) throw DimensionError("name vectors of different dimension");

  auto unit_rows = [](const NameVectorTable& t) {
    Eigen::MatrixXd u = t.vectors;
    for (Index i = 0; i < u.rows(); ++i) {
      const double norm = u.row(i).norm();
      if (norm > 0.0) u.row(i) /= norm;
    }
    return u;
  };
  const Eigen::MatrixXd a = unit_rows(source);
  const Eigen::MatrixXd b = unit_rows(target);
  return (a * b.transpose()).cast<float>();
}

}  // namespace simflood
