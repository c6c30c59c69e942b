#include "spacl/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace spacl::io {

namespace {

bool is_comment_or_blank(const std::string& line) {
  for (char ch : line) {
    if (std::isspace(static_cast<unsigned char>(ch))) continue;
    return ch == '#' || ch == '%';
  }
  return true;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

LoadedGraph load_graph(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("load_graph: cannot open " + path);

  std::vector<std::pair<std::int64_t, std::int64_t>> raw;
  std::string line;
  std::int64_t line_no = 0;
  std::int64_t min_id = std::numeric_limits<std::int64_t>::max();
  std::int64_t max_id = std::numeric_limits<std::int64_t>::min();
  while (std::getline(in, line)) {
    ++line_no;
    if (is_comment_or_blank(line)) continue;
    std::istringstream ss(line);
    std::int64_t u, v;
    if (!(ss >> u >> v))
      throw IoError("load_graph: malformed line " + std::to_string(line_no) + " in " + path);
    std::string rest;
    ss >> rest;  // trailing tokens (e.g. weights) are rejected
    if (!rest.empty())
      throw IoError("load_graph: malformed line " + std::to_string(line_no) + " in " + path);
    if (u < 0 || v < 0)
      throw IoError("load_graph: negative id on line " + std::to_string(line_no));
    raw.emplace_back(u, v);
    min_id = std::min({min_id, u, v});
    max_id = std::max({max_id, u, v});
  }
  if (raw.empty()) throw IoError("load_graph: no edges in " + path);

  LoadedGraph out;
  out.id_base = min_id == 0 ? 0 : 1;
  const std::int64_t n = max_id - out.id_base + 1;
  if (n > std::numeric_limits<std::int32_t>::max())
    throw IoError("load_graph: node ids exceed the supported range");
  std::vector<std::pair<std::int32_t, std::int32_t>> edges;
  edges.reserve(raw.size());
  for (const auto& [u, v] : raw)
    edges.emplace_back(static_cast<std::int32_t>(u - out.id_base),
                       static_cast<std::int32_t>(v - out.id_base));
  out.graph = SparseSymmetricGraph::from_edges(n, std::move(edges));
  out.self_loops_dropped = out.graph.self_loops_dropped();
  out.duplicates_merged = out.graph.duplicates_merged();
  return out;
}

void save_graph(const std::string& path, const SparseSymmetricGraph& graph,
                const std::vector<std::string>& header_comments) {
  std::ofstream outf(path);
  if (!outf) throw IoError("save_graph: cannot open " + path);
  for (const auto& c : header_comments) outf << "# " << c << "\n";
  for (const auto& [u, v] : graph.edge_list()) outf << u << " " << v << "\n";
  if (!outf) throw IoError("save_graph: write failed for " + path);
}

MembershipMatrix load_membership(const std::string& path, int expected_K) {
  std::ifstream in(path);
  if (!in) throw IoError("load_membership: cannot open " + path);

  std::string line;
  std::int64_t line_no = 0;
  // Header (after optional comments): node,c0,...,c{K-1}
  int K = -1;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_comment_or_blank(line)) continue;
    std::istringstream ss(line);
    std::string tok;
    std::vector<std::string> cols;
    while (std::getline(ss, tok, ',')) cols.push_back(tok);
    if (cols.empty() || cols[0] != "node")
      throw IoError("load_membership: bad header in " + path);
    K = static_cast<int>(cols.size()) - 1;
    for (int j = 0; j < K; ++j)
      if (cols[static_cast<size_t>(j) + 1] != "c" + std::to_string(j))
        throw IoError("load_membership: bad header column in " + path);
    break;
  }
  if (K < 1) throw IoError("load_membership: missing header in " + path);
  if (expected_K > 0 && K != expected_K)
    throw IoError("load_membership: expected " + std::to_string(expected_K) +
                  " communities, file has " + std::to_string(K));

  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_comment_or_blank(line)) continue;
    std::istringstream ss(line);
    std::string tok;
    std::vector<double> vals;
    while (std::getline(ss, tok, ',')) {
      double v = 0.0;
      const auto* begin = tok.data();
      const auto* end = tok.data() + tok.size();
      while (begin < end && std::isspace(static_cast<unsigned char>(*begin))) ++begin;
      const auto res = std::from_chars(begin, end, v);
      if (res.ec != std::errc{})
        throw IoError("load_membership: bad value on line " + std::to_string(line_no));
      vals.push_back(v);
    }
    if (static_cast<int>(vals.size()) != K + 1)
      throw IoError("load_membership: wrong column count on line " + std::to_string(line_no));
    const auto node = static_cast<std::int64_t>(vals[0]);
    if (node != static_cast<std::int64_t>(rows.size()))
      throw IoError("load_membership: node ids must be dense and ordered, line " +
                    std::to_string(line_no));
    for (int j = 0; j < K; ++j) {
      const double v = vals[static_cast<size_t>(j) + 1];
      if (!std::isfinite(v)) throw IoError("load_membership: non-finite value, line " +
                                           std::to_string(line_no));
      if (v < 0.0) throw IoError("load_membership: negative value, line " +
                                 std::to_string(line_no));
    }
    rows.emplace_back(vals.begin() + 1, vals.end());
  }
  if (rows.empty()) throw IoError("load_membership: no rows in " + path);

  Matrix theta(static_cast<Index>(rows.size()), K);
  std::vector<std::uint8_t> zeroed(rows.size(), 0);
  bool any_zeroed = false;
  for (size_t i = 0; i < rows.size(); ++i) {
    double sum = 0.0;
    for (int j = 0; j < K; ++j) {
      theta(static_cast<Index>(i), j) = rows[i][static_cast<size_t>(j)];
      sum += rows[i][static_cast<size_t>(j)];
    }
    if (sum == 0.0) {
      zeroed[i] = 1;
      any_zeroed = true;
    }
  }
  return MembershipMatrix(std::move(theta), {},
                          any_zeroed ? std::move(zeroed) : std::vector<std::uint8_t>{},
                          MembershipMatrix::Validation::kRelaxed);
}

void save_membership(const std::string& path, const MembershipMatrix& theta,
                     const std::vector<std::string>& header_comments) {
  std::ofstream outf(path);
  if (!outf) throw IoError("save_membership: cannot open " + path);
  for (const auto& c : header_comments) outf << "# " << c << "\n";
  outf << "node";
  for (int j = 0; j < theta.K(); ++j) outf << ",c" << j;
  outf << "\n";
  for (Index i = 0; i < theta.n(); ++i) {
    outf << i;
    for (int j = 0; j < theta.K(); ++j) outf << "," << format_double(theta.theta()(i, j));
    outf << "\n";
  }
  if (!outf) throw IoError("save_membership: write failed for " + path);
}

void save_fit(const std::string& path, const FitResult& fit,
              const std::vector<std::string>& header_comments) {
  save_membership(path, fit.theta_hat, header_comments);
}

PreprocessResult preprocess_real_graph(const SparseSymmetricGraph& graph,
                                       const Matrix& memberships, bool single_pass) {
  const std::int64_t n = graph.n();
  if (memberships.rows() != n)
    throw DimensionError("preprocess_real_graph: memberships must cover all nodes");

  std::vector<bool> alive(static_cast<size_t>(n), true);
  std::vector<std::int64_t> degree(static_cast<size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) degree[static_cast<size_t>(i)] = graph.degree(i);

  PreprocessReport report;
  bool changed = true;
  while (changed) {
    changed = false;
    ++report.passes;
    // Rule 1: no community membership.
    for (std::int64_t i = 0; i < n; ++i) {
      if (!alive[static_cast<size_t>(i)]) continue;
      if (memberships.row(i).sum() == 0.0) {
        alive[static_cast<size_t>(i)] = false;
        ++report.removed_no_community;
        for (auto j : graph.neighbors(i))
          if (alive[static_cast<size_t>(j)]) --degree[static_cast<size_t>(j)];
        changed = true;
      }
    }
    // Rule 2: zero degree (w.r.t. surviving nodes).
    for (std::int64_t i = 0; i < n; ++i) {
      if (!alive[static_cast<size_t>(i)]) continue;
      if (degree[static_cast<size_t>(i)] == 0) {
        alive[static_cast<size_t>(i)] = false;
        ++report.removed_zero_degree;
        for (auto j : graph.neighbors(i))
          if (alive[static_cast<size_t>(j)]) --degree[static_cast<size_t>(j)];
        changed = true;
      }
    }
    if (single_pass) break;
  }

  std::vector<std::int64_t> remap(static_cast<size_t>(n), -1);
  for (std::int64_t i = 0; i < n; ++i) {
    if (alive[static_cast<size_t>(i)]) {
      remap[static_cast<size_t>(i)] = static_cast<std::int64_t>(report.kept.size());
      report.kept.push_back(i);
    }
  }

  std::vector<std::pair<std::int32_t, std::int32_t>> edges;
  for (std::int64_t i = 0; i < n; ++i) {
    if (!alive[static_cast<size_t>(i)]) continue;
    for (auto j : graph.neighbors(i)) {
      if (i < j && alive[static_cast<size_t>(j)])
        edges.emplace_back(static_cast<std::int32_t>(remap[static_cast<size_t>(i)]),
                           static_cast<std::int32_t>(remap[static_cast<size_t>(j)]));
    }
  }

  PreprocessResult out;
  out.graph = SparseSymmetricGraph::from_edges(static_cast<std::int64_t>(report.kept.size()),
                                               std::move(edges));
  out.memberships.resize(static_cast<Index>(report.kept.size()), memberships.cols());
  for (size_t i = 0; i < report.kept.size(); ++i)
    out.memberships.row(static_cast<Index>(i)) = memberships.row(report.kept[i]);
  out.report = std::move(report);
  return out;
}

}  // namespace spacl::io
