#include "contyp/clustering.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>
#include <unordered_map>

namespace contyp::clustering {

using nlohmann::json;

const char* to_string(Linkage l) {
  switch (l) {
    case Linkage::Single: return "single";
    case Linkage::Average: return "average";
    case Linkage::Weighted: return "weighted";
  }
  return "?";
}

Linkage linkage_from_string(std::string_view s) {
  if (s == "single") return Linkage::Single;
  if (s == "average") return Linkage::Average;
  if (s == "weighted") return Linkage::Weighted;
  throw Error("unknown linkage '" + std::string(s) + "' (expected single, average or weighted)");
}

namespace {

void check_distances(const Matrix& d, std::size_t nids) {
  const auto n = d.rows();
  if (d.cols() != n) throw Error("linkage: matrix is not square");
  if (static_cast<std::size_t>(n) != nids) throw Error("linkage: id count does not match matrix size");
  if (n < 2) throw Error("linkage: need at least 2 observations");
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (std::isnan(d(i, j))) throw Error("linkage: NaN entry");
      if (d(i, j) != d(j, i)) throw Error("linkage: matrix is not symmetric");
    }
  }
}

}  // namespace

Dendrogram linkage(const Matrix& distances, std::vector<std::string> ids, Linkage method) {
  check_distances(distances, ids.size());
  const std::size_t n = ids.size();

  // Slot s holds an active cluster; `work` holds the Lance-Williams state for
  // single/weighted and the sum of leaf-pair distances for average.
  Matrix work = distances;
  std::vector<std::size_t> node(n), size(n, 1);
  std::iota(node.begin(), node.end(), std::size_t{0});
  std::vector<std::size_t> active(n);
  std::iota(active.begin(), active.end(), std::size_t{0});

  auto distance = [&](std::size_t s, std::size_t t) {
    const double w = work(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(t));
    return method == Linkage::Average ? w / static_cast<double>(size[s] * size[t]) : w;
  };

  Dendrogram dend{std::move(ids), {}};
  dend.merges.reserve(n - 1);
  for (std::size_t step = 0; step + 1 < n; ++step) {
    std::size_t best_s = 0, best_t = 0;
    double best = std::numeric_limits<double>::infinity();
    std::pair<std::size_t, std::size_t> best_key{std::numeric_limits<std::size_t>::max(), 0};
    bool found = false;
    for (std::size_t x = 0; x < active.size(); ++x) {
      for (std::size_t y = x + 1; y < active.size(); ++y) {
        const std::size_t s = active[x], t = active[y];
        const double dist = distance(s, t);
        const std::pair key{std::min(node[s], node[t]), std::max(node[s], node[t])};
        if (!found || dist < best || (dist == best && key < best_key)) {
          found = true;
          best = dist;
          best_key = key;
          best_s = s;
          best_t = t;
        }
      }
    }

    dend.merges.push_back({best_key.first, best_key.second, best, size[best_s] + size[best_t]});

    const auto bs = static_cast<Eigen::Index>(best_s), bt = static_cast<Eigen::Index>(best_t);
    for (std::size_t u : active) {
      if (u == best_s || u == best_t) continue;
      const auto iu = static_cast<Eigen::Index>(u);
      double updated = 0.0;
      switch (method) {
        case Linkage::Single: updated = std::min(work(bs, iu), work(bt, iu)); break;
        case Linkage::Average: updated = work(bs, iu) + work(bt, iu); break;
        case Linkage::Weighted: updated = (work(bs, iu) + work(bt, iu)) / 2.0; break;
      }
      work(bs, iu) = work(iu, bs) = updated;
    }
    node[best_s] = n + step;
    size[best_s] += size[best_t];
    active.erase(std::find(active.begin(), active.end(), best_t));
  }
  return dend;
}

Dendrogram linkage(const similarity::SimilarityMatrix& sm, Linkage method) {
  return linkage(sm.values, sm.ids, method);
}

void check_dendrogram(const Dendrogram& d) {
  const std::size_t n = d.leaves();
  if (n < 2) throw Error("dendrogram needs at least 2 leaves");
  if (d.merges.size() != n - 1) throw Error("dendrogram must have n-1 merges");
  std::vector<std::size_t> size(2 * n - 1, 0);
  std::vector<bool> used(2 * n - 1, false);
  for (std::size_t i = 0; i < n; ++i) size[i] = 1;
  for (std::size_t k = 0; k < d.merges.size(); ++k) {
    const auto& m = d.merges[k];
    const std::size_t created = n + k;
    for (std::size_t child : {m.a, m.b}) {
      if (child >= created) throw Error("merge " + std::to_string(k) + " references a node not yet created");
      if (used[child]) throw Error("node " + std::to_string(child) + " merged twice");
      used[child] = true;
    }
    if (m.a == m.b) throw Error("merge " + std::to_string(k) + " joins a node with itself");
    if (!std::isfinite(m.height)) throw Error("merge " + std::to_string(k) + " has a non-finite height");
    size[created] = size[m.a] + size[m.b];
    if (m.size != size[created]) throw Error("merge " + std::to_string(k) + " has an inconsistent size");
  }
}

std::vector<std::size_t> leaves_under(const Dendrogram& dend, std::size_t node) {
  const std::size_t n = dend.leaves();
  if (node > dend.root()) throw Error("node id " + std::to_string(node) + " out of range");
  std::vector<std::size_t> out, stack{node};
  while (!stack.empty()) {
    const std::size_t v = stack.back();
    stack.pop_back();
    if (v < n) {
      out.push_back(v);
    } else {
      const auto& m = dend.merges[v - n];
      stack.push_back(m.a);
      stack.push_back(m.b);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

Matrix cophenetic_matrix(const Dendrogram& dend) {
  const std::size_t n = dend.leaves();
  Matrix z = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  std::vector<std::vector<std::size_t>> members(2 * n - 1);
  for (std::size_t i = 0; i < n; ++i) members[i] = {i};
  for (std::size_t k = 0; k < dend.merges.size(); ++k) {
    const auto& m = dend.merges[k];
    for (std::size_t i : members[m.a]) {
      for (std::size_t j : members[m.b]) {
        z(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = m.height;
        z(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = m.height;
      }
    }
    auto& merged = members[n + k];
    merged = std::move(members[m.a]);
    merged.insert(merged.end(), members[m.b].begin(), members[m.b].end());
    members[m.b].clear();
  }
  return z;
}

double cophenetic_coefficient(const Matrix& distances, const Dendrogram& dend) {
  const auto n = static_cast<Eigen::Index>(dend.leaves());
  if (n < 3) throw Error("cophenetic coefficient needs n >= 3");
  if (distances.rows() != n || distances.cols() != n) throw Error("matrix size does not match dendrogram");
  const Matrix z = cophenetic_matrix(dend);

  double mean_y = 0.0, mean_z = 0.0;
  const double pairs = static_cast<double>(n * (n - 1) / 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      mean_y += distances(i, j);
      mean_z += z(i, j);
    }
  }
  mean_y /= pairs;
  mean_z /= pairs;

  double num = 0.0, var_y = 0.0, var_z = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double dy = distances(i, j) - mean_y, dz = z(i, j) - mean_z;
      num += dy * dz;
      var_y += dy * dy;
      var_z += dz * dz;
    }
  }
  if (!(var_y > 0.0) || !(var_z > 0.0)) throw Error("degenerate correlation: zero variance");
  return std::clamp(num / std::sqrt(var_y * var_z), -1.0, 1.0);
}

int Labeling::clusters() const {
  return labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
}

namespace {

Labeling label_by_first_leaf(const Dendrogram& dend, const std::vector<std::size_t>& group_of_leaf) {
  Labeling out{dend.ids, std::vector<int>(dend.leaves(), -1)};
  std::unordered_map<std::size_t, int> relabel;
  for (std::size_t i = 0; i < dend.leaves(); ++i) {
    auto [it, inserted] = relabel.try_emplace(group_of_leaf[i], static_cast<int>(relabel.size()));
    out.labels[i] = it->second;
  }
  return out;
}

std::size_t find_root(std::vector<std::size_t>& parent, std::size_t v) {
  while (parent[v] != v) {
    parent[v] = parent[parent[v]];
    v = parent[v];
  }
  return v;
}

}  // namespace

Labeling cut(const Dendrogram& dend, const CutSpec& spec) {
  check_dendrogram(dend);
  const std::size_t n = dend.leaves();
  std::vector<std::size_t> group(n);

  if (const auto* single = std::get_if<SingleCut>(&spec)) {
    if (std::isnan(single->height) || single->height < 0.0) throw Error("cut height must be >= 0");
    std::vector<std::size_t> parent(2 * n - 1);
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    for (std::size_t k = 0; k < dend.merges.size(); ++k) {
      const auto& m = dend.merges[k];
      if (m.height > single->height) continue;
      parent[find_root(parent, m.a)] = n + k;
      parent[find_root(parent, m.b)] = n + k;
    }
    for (std::size_t i = 0; i < n; ++i) group[i] = find_root(parent, i);
    return label_by_first_leaf(dend, group);
  }

  const auto& multi = std::get<MultiCut>(spec);
  std::vector<bool> covered(n, false);
  for (std::size_t node : multi.nodes) {
    if (node > dend.root()) throw Error("invalid antichain: node " + std::to_string(node) + " does not exist");
    for (std::size_t leaf : leaves_under(dend, node)) {
      if (covered[leaf]) {
        throw Error("invalid antichain: leaf '" + dend.ids[leaf] + "' is covered by more than one selected node");
      }
      covered[leaf] = true;
      group[leaf] = node;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!covered[i]) throw Error("invalid antichain: leaf '" + dend.ids[i] + "' is not covered");
  }
  return label_by_first_leaf(dend, group);
}

double height_for_clusters(const Dendrogram& dend, std::size_t k) {
  const std::size_t n = dend.leaves();
  if (k < 1 || k > n) throw Error("cluster count must be in [1, n]");
  if (k == n) {
    if (dend.merges.front().height <= 0.0) throw Error("zero-height merges prevent " + std::to_string(k) + " clusters");
    return dend.merges.front().height / 2.0;
  }
  const double below = dend.merges[n - k - 1].height;
  if (k == 1) return below + 1.0;
  const double above = dend.merges[n - k].height;
  if (!(above > below)) throw Error("tied merge heights prevent exactly " + std::to_string(k) + " clusters");
  return below + (above - below) / 2.0;
}

MultiCut multi_cut_from_thresholds(const Dendrogram& dend, double default_height,
                                   const std::map<std::size_t, double>& thresholds) {
  check_dendrogram(dend);
  const std::size_t n = dend.leaves();
  MultiCut out;
  std::vector<std::pair<std::size_t, double>> stack{{dend.root(), default_height}};
  while (!stack.empty()) {
    auto [v, inherited] = stack.back();
    stack.pop_back();
    const auto it = thresholds.find(v);
    const double limit = it != thresholds.end() ? it->second : inherited;
    if (v < n || dend.merges[v - n].height <= limit) {
      out.nodes.push_back(v);
      continue;
    }
    const auto& m = dend.merges[v - n];
    stack.push_back({m.b, limit});
    stack.push_back({m.a, limit});
  }
  return out;
}

double max_weight_assignment(const std::vector<std::vector<double>>& weights) {
  const std::size_t rows = weights.size();
  std::size_t cols = 0;
  for (const auto& r : weights) cols = std::max(cols, r.size());
  const std::size_t dim = std::max(rows, cols);
  if (dim == 0) return 0.0;

  double top = 0.0;
  for (const auto& r : weights)
    for (double w : r) top = std::max(top, w);
  auto cost = [&](std::size_t i, std::size_t j) {
    const double w = (i < rows && j < weights[i].size()) ? weights[i][j] : 0.0;
    return top - w;
  };

  // Hungarian method with potentials, 1-based internally.
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> u(dim + 1, 0.0), v(dim + 1, 0.0);
  std::vector<std::size_t> match(dim + 1, 0), way(dim + 1, 0);
  for (std::size_t i = 1; i <= dim; ++i) {
    match[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(dim + 1, kInf);
    std::vector<bool> used(dim + 1, false);
    do {
      used[j0] = true;
      const std::size_t i0 = match[j0];
      double delta = kInf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= dim; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= dim; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  double total = 0.0;
  for (std::size_t j = 1; j <= dim; ++j) {
    const std::size_t i = match[j] - 1, c = j - 1;
    if (i < rows && c < weights[i].size()) total += weights[i][c];
  }
  return total;
}

std::string Agreement::display() const {
  std::ostringstream os;
  os << std::fixed << std::setprecision(2) << percent << "% [" << correct << "]";
  return os.str();
}

Agreement agreement(const Labeling& labels, const Labeling& reference) {
  if (labels.ids.size() != labels.labels.size() || reference.ids.size() != reference.labels.size()) {
    throw Error("labeling has mismatched id and label counts");
  }
  if (labels.ids.size() != reference.ids.size()) throw Error("id mismatch: labelings cover different id sets");
  std::unordered_map<std::string, int> ref_of;
  for (std::size_t i = 0; i < reference.ids.size(); ++i) {
    if (!ref_of.emplace(reference.ids[i], reference.labels[i]).second) {
      throw Error("id mismatch: duplicate id '" + reference.ids[i] + "' in reference");
    }
  }

  const std::size_t total = labels.ids.size();
  std::vector<int> ref(total);
  for (std::size_t i = 0; i < total; ++i) {
    const auto it = ref_of.find(labels.ids[i]);
    if (it == ref_of.end()) throw Error("id mismatch: '" + labels.ids[i] + "' missing from reference");
    ref[i] = it->second;
  }

  // Dense relabelling of both sides for the contingency table.
  auto densify = [](const std::vector<int>& in) {
    std::unordered_map<int, std::size_t> map;
    std::vector<std::size_t> out(in.size());
    for (std::size_t i = 0; i < in.size(); ++i) out[i] = map.try_emplace(in[i], map.size()).first->second;
    return std::pair{out, map.size()};
  };
  const auto [comp, ncomp] = densify(labels.labels);
  const auto [refd, nref] = densify(ref);

  std::vector<std::vector<double>> table(ncomp, std::vector<double>(nref, 0.0));
  for (std::size_t i = 0; i < total; ++i) table[comp[i]][refd[i]] += 1.0;

  Agreement out;
  out.total = total;
  out.correct = static_cast<std::size_t>(std::llround(max_weight_assignment(table)));
  out.percent = total ? 100.0 * static_cast<double>(out.correct) / static_cast<double>(total) : 0.0;

  std::size_t agree = 0, pairs = 0;
  for (std::size_t i = 0; i < total; ++i) {
    for (std::size_t j = i + 1; j < total; ++j) {
      ++pairs;
      if ((comp[i] == comp[j]) == (refd[i] == refd[j])) ++agree;
    }
  }
  out.rand_index = pairs ? static_cast<double>(agree) / static_cast<double>(pairs) : 1.0;
  return out;
}

json to_json(const Dendrogram& d) {
  json merges = json::array();
  for (const auto& m : d.merges) merges.push_back(json::array({m.a, m.b, m.height, m.size}));
  return json{{"ids", d.ids}, {"merges", std::move(merges)}};
}

Dendrogram dendrogram_from_json(const json& j) {
  Dendrogram d;
  d.ids = j.at("ids").get<std::vector<std::string>>();
  for (const auto& row : j.at("merges")) {
    if (!row.is_array() || row.size() != 4) throw Error("merge records must be [a, b, height, size]");
    d.merges.push_back({row[0].get<std::size_t>(), row[1].get<std::size_t>(), row[2].get<double>(),
                        row[3].get<std::size_t>()});
  }
  check_dendrogram(d);
  return d;
}

json to_json(const Labeling& l) {
  json rows = json::array();
  for (std::size_t i = 0; i < l.ids.size(); ++i) rows.push_back(json{{"id", l.ids[i]}, {"label", l.labels[i]}});
  return json{{"labels", std::move(rows)}, {"clusters", l.clusters()}};
}

std::string labels_to_csv(const Labeling& l) {
  std::string out = "id,label\n";
  for (std::size_t i = 0; i < l.ids.size(); ++i) {
    out += l.ids[i];
    out += ',';
    out += std::to_string(l.labels[i]);
    out += '\n';
  }
  return out;
}

Labeling labels_from_csv(std::string_view csv) {
  Labeling out;
  std::unordered_map<std::string, int> label_ids;
  std::size_t pos = 0, lineno = 0;
  bool header = false;
  while (pos < csv.size()) {
    auto end = csv.find('\n', pos);
    if (end == std::string_view::npos) end = csv.size();
    std::string line(csv.substr(pos, end - pos));
    pos = end + 1;
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!header) {
      if (line != "id,label") throw Error("labels CSV must start with header 'id,label'");
      header = true;
      continue;
    }
    const auto comma = line.rfind(',');
    if (comma == std::string::npos) throw Error("labels CSV line " + std::to_string(lineno) + " lacks a comma");
    out.ids.push_back(line.substr(0, comma));
    const std::string token = line.substr(comma + 1);
    out.labels.push_back(label_ids.try_emplace(token, static_cast<int>(label_ids.size())).first->second);
  }
  if (!header) throw Error("empty labels CSV");
  return out;
}

CutSpec cut_spec_from_json(const json& j) {
  if (j.contains("height")) {
    const auto& h = j["height"];
    if (h.is_string() && h.get<std::string>() == "inf") return SingleCut{std::numeric_limits<double>::infinity()};
    return SingleCut{h.get<double>()};
  }
  if (j.contains("nodes")) return MultiCut{j["nodes"].get<std::vector<std::size_t>>()};
  throw Error("cut spec needs either 'height' or 'nodes'");
}

}  // namespace contyp::clustering
