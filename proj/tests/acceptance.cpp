// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

#include "contyp/augmentation.hpp"
#include "contyp/clustering.hpp"
#include "contyp/metrics.hpp"
#include "contyp/pipeline.hpp"
#include "contyp/similarity.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

#include <chrono>
#include <functional>
#include <iostream>
#include <sstream>

namespace {

using namespace contyp;
using clustering::Linkage;
using similarity::Matrix;

struct Outcome {
  bool pass;
  std::string detail;
};

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(double v) {
  std::ostringstream ss;
  ss << v;
  return ss.str();
}

std::vector<std::string> make_ids(std::size_t n) {
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < n; ++i) ids.push_back("o" + std::to_string(i));
  return ids;
}

Matrix random_symmetric(synthetic::Rng& rng, std::size_t n, bool integer) {
  Matrix d = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  std::uniform_int_distribution<int> small(1, 6);
  std::uniform_real_distribution<double> real(0.0, 10.0);
  for (Eigen::Index i = 0; i < d.rows(); ++i)
    for (Eigen::Index j = i + 1; j < d.cols(); ++j) d(i, j) = d(j, i) = integer ? small(rng) : real(rng);
  return d;
}

ContourSet preprocessed_benchmark(std::uint64_t seed, int per_group, std::vector<int>* group = nullptr,
                                  std::vector<int>* size_group = nullptr) {
  auto b = synthetic::typology_benchmark(seed, per_group);
  for (auto& c : b.set.contours) c = preprocess(c, {}).first;
  if (group) *group = b.group;
  if (size_group) *size_group = b.size_group;
  return b.set;
}

Outcome dtw_brute_force() {
  Stopwatch sw;
  synthetic::Rng rng(101);
  int mismatches = 0, inadmissible = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto x = synthetic::random_points(rng, 1 + rng() % 6);
    const auto y = synthetic::random_points(rng, 1 + rng() % 6);
    const auto fast = metrics::dtw(x, y);
    if (fast.cost != oracle::brute_force_dtw(x, y).best.cost) ++mismatches;
    if (!metrics::is_admissible(fast.path, x.size(), y.size())) ++inadmissible;
  }
  const double s = sw.seconds();
  return {mismatches == 0 && inadmissible == 0 && s < 5.0,
          "200 pairs, " + std::to_string(mismatches) + " cost mismatches, " + std::to_string(inadmissible) +
              " inadmissible paths, " + fmt(s) + " s"};
}

Outcome procrustes_invariance() {
  synthetic::Rng rng(102);
  double worst_d = 0.0, worst_dc = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto a = synthetic::random_contour(rng, 20 + rng() % 180).points;
    const auto b = synthetic::apply(synthetic::random_similarity(rng), a);
    worst_d = std::max(worst_d, metrics::procrustes(a, b).d);
    worst_dc = std::max(worst_dc, metrics::direct_composition(a, b));
  }
  return {worst_d < 1e-9 && worst_dc < 1e-6, "100 contours, max d " + fmt(worst_d) + ", max DC " + fmt(worst_dc)};
}

Outcome scale_recovery() {
  synthetic::Rng rng(103);
  std::uniform_real_distribution<double> scale(0.1, 10.0);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto a = synthetic::random_contour(rng, 30 + rng() % 100).points;
    const double s = trial == 0 ? 0.1 : trial == 1 ? 10.0 : scale(rng);
    std::vector<Point> scaled;
    for (const auto& p : a) scaled.push_back({s * p.x, s * p.y});
    worst = std::max(worst, std::abs(metrics::procrustes(a, scaled).gamma_star - 1.0 / s));
  }
  auto alpha = synthetic::random_contour(rng, 60, "alpha");
  auto doubled = alpha;
  doubled.id = "two-alpha";
  for (auto& p : doubled.points) p = {2 * p.x, 2 * p.y};
  const double gamma = similarity::pairwise_components(ContourSet{"pair", {alpha, doubled}}).gamma(0, 1);
  const double err = std::abs(gamma - 0.5);
  return {worst < 1e-9 && err < 1e-9,
          "max |gamma* - 1/s| " + fmt(worst) + ", gamma(alpha, 2 alpha) = 0.5 + " + fmt(gamma - 0.5)};
}

Outcome component_invariants() {
  std::vector<ContourSet> sets;
  synthetic::Rng rng(104);
  for (int k = 0; k < 4; ++k) {
    ContourSet s{"random" + std::to_string(k), {}};
    for (int i = 0; i < 10; ++i) s.contours.push_back(synthetic::random_contour(rng, 15 + rng() % 80, "c" + std::to_string(i)));
    sets.push_back(std::move(s));
  }
  sets.push_back(preprocessed_benchmark(1, 6));
  sets.push_back(augmentation::augment_set(preprocessed_benchmark(2, 1)));
  std::size_t bad = 0;
  for (const auto& s : sets) {
    const auto c = similarity::pairwise_components(s);
    for (const Matrix* m : {&c.pa, &c.dc, &c.gamma}) {
      if (*m != m->transpose() || !m->diagonal().isZero(0.0) || m->minCoeff() < 0.0 || !m->allFinite()) ++bad;
    }
    if (c.gamma.minCoeff() < 0.0 || c.gamma.maxCoeff() > 1.0) ++bad;
  }
  return {bad == 0, std::to_string(sets.size()) + " datasets, " + std::to_string(bad) + " violations"};
}

Outcome linkage_oracle() {
  synthetic::Rng rng(105);
  int merge_diffs = 0, exact_height_diffs = 0, inversions = 0;
  double worst_real = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    // First 100: integer-valued entries (exact arithmetic, many ties); next 100: continuous entries.
    const bool integer = trial < 100;
    const std::size_t n = 2 + rng() % 11;
    const auto d = random_symmetric(rng, n, integer);
    for (auto method : {Linkage::Single, Linkage::Average, Linkage::Weighted}) {
      const auto fast = clustering::linkage(d, make_ids(n), method);
      const auto slow = oracle::naive_linkage_oracle(d, make_ids(n), method);
      for (std::size_t k = 0; k < fast.merges.size(); ++k) {
        const auto &f = fast.merges[k], &s = slow.merges[k];
        if (f.a != s.a || f.b != s.b || f.size != s.size) ++merge_diffs;
        if (integer && f.height != s.height) ++exact_height_diffs;
        if (!integer) worst_real = std::max(worst_real, std::abs(f.height - s.height));
        if (k > 0 && f.height < fast.merges[k - 1].height) ++inversions;
      }
    }
  }
  return {merge_diffs == 0 && exact_height_diffs == 0 && inversions == 0 && worst_real <= 1e-12,
          "100 integer + 100 continuous matrices x 3 methods, " + std::to_string(merge_diffs) + " merge diffs, " +
              std::to_string(exact_height_diffs) + " exact height diffs, max continuous height diff " +
              fmt(worst_real) + ", " + std::to_string(inversions) + " inversions"};
}

Outcome cophenetic() {
  Matrix d(3, 3);
  d << 0, 1, 4, 1, 0, 5, 4, 5, 0;
  const double hand = clustering::cophenetic_coefficient(d, clustering::linkage(d, make_ids(3), Linkage::Single));
  const double hand_err = std::abs(hand - 7.0 / std::sqrt(52.0));

  // Ultrametric: two tight pairs joined at a common height.
  Matrix u(4, 4);
  u << 0, 1, 3, 3, 1, 0, 3, 3, 3, 3, 0, 2, 3, 3, 2, 0;
  double ultra_err = 0.0;
  for (auto method : {Linkage::Single, Linkage::Average, Linkage::Weighted}) {
    ultra_err = std::max(ultra_err, std::abs(clustering::cophenetic_coefficient(
                                                 u, clustering::linkage(u, make_ids(4), method)) - 1.0));
  }

  synthetic::Rng rng(106);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 3 + rng() % 20;
    const auto m = random_symmetric(rng, n, false);
    for (auto method : {Linkage::Single, Linkage::Average, Linkage::Weighted}) {
      const auto dend = clustering::linkage(m, make_ids(n), method);
      const double c = clustering::cophenetic_coefficient(m, dend);
      const double direct = oracle::raw_moment_correlation(oracle::upper_triangle(m),
                                                           oracle::upper_triangle(clustering::cophenetic_matrix(dend)));
      worst = std::max(worst, std::abs(c - direct));
    }
  }
  return {hand_err < 1e-4 && ultra_err < 1e-12 && worst <= 1e-12,
          "hand case c = " + fmt(hand) + ", ultrametric |c - 1| " + fmt(ultra_err) + ", max diff vs direct " +
              fmt(worst)};
}

Outcome assembly() {
  similarity::ComponentMatrices c;
  c.ids = {"a", "b", "c"};
  c.pa = Matrix(3, 3);
  c.pa << 0, 2, 4, 2, 0, 6, 4, 6, 0;
  c.dc = c.pa;
  c.gamma = Matrix(3, 3);
  c.gamma << 0, 0.5, 0.2, 0.5, 0, 0.1, 0.2, 0.1, 0;
  const auto half = similarity::assemble_sm(c, {0.5, 0.0, 0.5, false, false});
  const bool worked = half.values(0, 1) == 1.25 && half.values(0, 2) == 2.1 && half.values(1, 2) == 3.05;
  const double ndc = similarity::assemble_sm(c, {0.0, 1.0, 0.0, true, false}).values(0, 1);
  const bool averaged = std::abs(ndc - 5.0 / 12.0) <= 1e-15;

  synthetic::Rng rng(107);
  ContourSet s{"random", {}};
  for (int i = 0; i < 8; ++i) s.contours.push_back(synthetic::random_contour(rng, 40, "c" + std::to_string(i)));
  const auto comps = similarity::pairwise_components(s);
  const bool psm = similarity::assemble_sm(comps, similarity::preset("PSM")).values == comps.pa;
  const bool scm = similarity::assemble_sm(comps, similarity::preset("SCM")).values == comps.gamma;
  return {worked && averaged && psm && scm,
          "SM12/13/23 = " + fmt(half.values(0, 1)) + "/" + fmt(half.values(0, 2)) + "/" + fmt(half.values(1, 2)) +
              ", ndc-averaged SM12 = " + fmt(ndc) + ", PSM == pa " + (psm ? "yes" : "no") + ", SCM == gamma " +
              (scm ? "yes" : "no")};
}

Outcome typology_benchmark() {
  Stopwatch sw;
  std::vector<int> group, size_group;
  const auto set = preprocessed_benchmark(2024, 6, &group, &size_group);
  const auto comps = similarity::pairwise_components(set);

  const auto sm = similarity::assemble_sm(comps, similarity::preset("WNDCNSM", 0.75, 0.25));
  const auto dend = clustering::linkage(sm, Linkage::Average);
  const auto six = clustering::cut(dend, clustering::SingleCut{clustering::height_for_clusters(dend, 6)});
  const auto shape = clustering::agreement(six, {six.ids, group});

  const auto scm = similarity::assemble_sm(comps, similarity::preset("SCM"));
  const auto dend2 = clustering::linkage(scm, Linkage::Average);
  const auto two = clustering::cut(dend2, clustering::SingleCut{clustering::height_for_clusters(dend2, 2)});
  const auto size = clustering::agreement(two, {two.ids, size_group});

  const double s = sw.seconds();
  return {set.size() == 36 && shape.percent >= 90.0 && size.percent == 100.0 && s < 60.0,
          "n = " + std::to_string(set.size()) + ", WNDCNSM(3/4,1/4) 6 clusters " + shape.display() +
              ", SCM size split " + size.display() + ", " + fmt(s) + " s"};
}

Outcome augmentation_counts() {
  const auto base = preprocessed_benchmark(3, 6);
  auto big = preprocessed_benchmark(4, 9);
  big.contours.resize(51);
  const auto a36 = augmentation::augment_set(base);
  const auto a51 = augmentation::augment_set(big);
  std::size_t invalid = 0;
  for (const auto* set : {&a36, &a51}) {
    for (const auto& c : set->contours) {
      if (!validate(c, default_position_tolerance(c.points)).ok()) ++invalid;
    }
  }
  bool identity = true;
  for (const auto& c : base.contours) {
    for (const auto& spec : augmentation::all_warps(0.0)) identity = identity && augmentation::warp(c, spec).points == c.points;
  }
  return {a36.size() == 252 && a51.size() == 357 && invalid == 0 && identity,
          "36 -> " + std::to_string(a36.size()) + ", 51 -> " + std::to_string(a51.size()) + ", " +
              std::to_string(invalid) + " invalid, magnitude 0 identity " + (identity ? "yes" : "no")};
}

Outcome determinism() {
  namespace fs = std::filesystem;
  auto run = [](const fs::path& root) {
    auto b = synthetic::typology_benchmark(5, 2);
    const auto manifest = fixtures::write_raw(b.set, root / "in");
    pipeline::run_preprocess(manifest, root / "data", {});
    pipeline::run_components(root / "data", {});
    pipeline::run_cluster(root / "data" / pipeline::kComponents, similarity::preset("WNDCNSM", 0.75, 0.25),
                          Linkage::Average, similarity::Symmetrization::Average, root / "out");
    return std::vector<std::string>{fixtures::slurp(root / "data" / pipeline::kComponents),
                                    fixtures::slurp(root / "out" / pipeline::kSimilarity),
                                    fixtures::slurp(root / "out" / pipeline::kDendrogram)};
  };
  fixtures::TempDir a("accept_a"), b("accept_b");
  const auto first = run(a.path), second = run(b.path);
  std::size_t differing = 0;
  for (std::size_t i = 0; i < first.size(); ++i) differing += first[i].empty() || first[i] != second[i];
  return {differing == 0, "components, sm, dendrogram: " + std::to_string(differing) + " of 3 files differ"};
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"dtw equals brute-force enumeration", dtw_brute_force},
      {"procrustes similarity invariance", procrustes_invariance},
      {"scale recovery", scale_recovery},
      {"component matrix invariants", component_invariants},
      {"linkage equals naive oracle", linkage_oracle},
      {"cophenetic coefficient", cophenetic},
      {"similarity assembly and presets", assembly},
      {"synthetic typology benchmark", typology_benchmark},
      {"augmentation counts and validity", augmentation_counts},
      {"byte-identical reruns", determinism},
  };
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failures += !o.pass;
    std::cout << (o.pass ? "[PASS] " : "[FAIL] ") << name << ": " << o.detail << std::endl;
  }
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << "\n";
  return failures == 0 ? 0 : 1;
}
