#pragma once

#include "contyp/similarity.hpp"

#include <nlohmann/json_fwd.hpp>

#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace contyp::clustering {

using similarity::Matrix;

enum class Linkage { Single, Average, Weighted };

const char* to_string(Linkage l);
Linkage linkage_from_string(std::string_view s);

/// Leaves are 0..n-1; the k-th merge creates node n+k.
struct Merge {
  std::size_t a;  // smaller child id
  std::size_t b;
  double height;
  std::size_t size;

  friend bool operator==(const Merge&, const Merge&) = default;
};

struct Dendrogram {
  std::vector<std::string> ids;
  std::vector<Merge> merges;

  std::size_t leaves() const { return ids.size(); }
  std::size_t root() const { return 2 * ids.size() - 2; }
};

/// Agglomerative clustering over a symmetric dissimilarity matrix with zero
/// diagonal. Equal distances are broken by the lexicographically smallest
/// (smaller id, larger id) pair.
Dendrogram linkage(const Matrix& distances, std::vector<std::string> ids, Linkage method);
Dendrogram linkage(const similarity::SimilarityMatrix& sm, Linkage method);

/// Throws unless `d` has n-1 merges, consistent sizes and each node used once.
void check_dendrogram(const Dendrogram& d);

/// Z(i, j) = height of the merge at which leaves i and j first join.
Matrix cophenetic_matrix(const Dendrogram& dend);

/// Pearson correlation between the upper triangles of `distances` and the
/// cophenetic matrix. Requires n >= 3.
double cophenetic_coefficient(const Matrix& distances, const Dendrogram& dend);

struct SingleCut {
  double height;
};

/// Subtree roots (leaf or internal node ids) that become one cluster each.
struct MultiCut {
  std::vector<std::size_t> nodes;
};

using CutSpec = std::variant<SingleCut, MultiCut>;

/// Labels are contiguous from 0, numbered by the first leaf (in id order) of each cluster.
struct Labeling {
  std::vector<std::string> ids;
  std::vector<int> labels;

  int clusters() const;
  friend bool operator==(const Labeling&, const Labeling&) = default;
};

Labeling cut(const Dendrogram& dend, const CutSpec& spec);

/// Height strictly between the merges that leave exactly k clusters; throws
/// when equal merge heights make k unreachable with one global threshold.
double height_for_clusters(const Dendrogram& dend, std::size_t k);

/// Per-branch thresholds: each node takes the threshold of its nearest listed
/// ancestor-or-self (the root falls back to `default_height`). Descending from
/// the root, the first node whose height is within its threshold becomes a cluster.
MultiCut multi_cut_from_thresholds(const Dendrogram& dend, double default_height,
                                   const std::map<std::size_t, double>& thresholds);

/// Leaves under `node`, ascending.
std::vector<std::size_t> leaves_under(const Dendrogram& dend, std::size_t node);

struct Agreement {
  double percent = 0.0;
  std::size_t correct = 0;
  std::size_t total = 0;
  double rand_index = 0.0;

  /// "92.68% [38]"
  std::string display() const;
};

/// Best one-to-one matching between computed and reference clusters.
Agreement agreement(const Labeling& labels, const Labeling& reference);

/// Maximum-weight assignment on a rectangular non-negative weight table;
/// returns the total weight.
double max_weight_assignment(const std::vector<std::vector<double>>& weights);

nlohmann::json to_json(const Dendrogram& d);
Dendrogram dendrogram_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Labeling& l);
std::string labels_to_csv(const Labeling& l);
Labeling labels_from_csv(std::string_view csv);
CutSpec cut_spec_from_json(const nlohmann::json& j);

}  // namespace contyp::clustering
