#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "spacl/estimator.hpp"
#include "spacl/model.hpp"

namespace spacl::io {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Whitespace-separated "u v" lines; '#' and '%' lines are comments.
/// 0- vs 1-based ids are auto-detected from the minimum id. Duplicates and
/// reversed pairs collapse to one edge; self-loops are dropped and counted.
struct LoadedGraph {
  SparseSymmetricGraph graph;
  std::int64_t id_base = 0;  // original id = internal index + id_base
  std::int64_t self_loops_dropped = 0;
  std::int64_t duplicates_merged = 0;

  std::int64_t to_internal(std::int64_t original) const { return original - id_base; }
  std::int64_t to_original(std::int64_t internal) const { return internal + id_base; }
};

LoadedGraph load_graph(const std::string& path);

/// Canonical form: 0-based sorted pairs "u v" with u < v, one per line.
/// Extra header lines (each starting with '#') may carry provenance.
void save_graph(const std::string& path, const SparseSymmetricGraph& graph,
                const std::vector<std::string>& header_comments = {});

/// CSV "node,c0,...,c{K-1}"; leading '#' comment lines allowed. Values must
/// be nonnegative and finite. All-zero rows load as zeroed memberships.
MembershipMatrix load_membership(const std::string& path, int expected_K = -1);

void save_membership(const std::string& path, const MembershipMatrix& theta,
                     const std::vector<std::string>& header_comments = {});

/// Membership CSV of a fit; zeroed rows serialize as zeros.
void save_fit(const std::string& path, const FitResult& fit,
              const std::vector<std::string>& header_comments = {});

struct PreprocessReport {
  std::int64_t removed_no_community = 0;
  std::int64_t removed_zero_degree = 0;
  int passes = 0;
  std::vector<Index> kept;  // surviving node ids in the input indexing
};

struct PreprocessResult {
  SparseSymmetricGraph graph;
  Matrix memberships;  // rows follow report.kept
  PreprocessReport report;
};

/// The data-cleaning rules: drop nodes with no community mass, drop nodes
/// with zero degree. Applied once when single_pass is set, otherwise
/// iterated to fixpoint (removals can expose new zero-degree nodes).
PreprocessResult preprocess_real_graph(const SparseSymmetricGraph& graph,
                                       const Matrix& memberships,
                                       bool single_pass = false);

}  // namespace spacl::io
