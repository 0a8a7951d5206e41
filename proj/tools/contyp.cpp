// contyp: contour typology pipeline driver.
//
//   contyp preprocess --manifest raw/manifest.json --out data/
//   contyp components --dataset data/
//   contyp cluster    --components data/components.json --preset WNDCNSM --w1 0.75 --w2 0.25
//   contyp cut        --dendrogram out/dendrogram.json --height 0.4
//   contyp agreement  --labels labels.csv --reference expert.csv
//   contyp augment    --dataset data/ --magnitude 0.1 --out data-aug/
//   contyp serve      --dataset data/ --port 8080

#include "contyp/io.hpp"
#include "contyp/pipeline.hpp"
#include "contyp/service.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <sstream>

namespace {

namespace fs = std::filesystem;
using namespace contyp;

std::vector<std::size_t> parse_node_list(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t pos = 0;
    const unsigned long long v = std::stoull(item, &pos);
    if (pos != item.size()) throw Error("bad node id '" + item + "'");
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Shape and size clustering of cross-section contours"};
  app.require_subcommand(1);

  // preprocess
  auto* pre = app.add_subcommand("preprocess", "Smooth and normalize the contours of a manifest");
  std::string pre_manifest;
  std::optional<std::string> pre_out;
  PreprocessParams pre_params;
  double pre_eps = -1.0;
  pre->add_option("--manifest", pre_manifest, "Input manifest JSON")->required();
  pre->add_option("--out", pre_out, "Output dataset directory");
  pre->add_option("--window", pre_params.window, "Savitzky-Golay window (odd)")->capture_default_str();
  pre->add_option("--order", pre_params.order, "Savitzky-Golay polynomial order")->capture_default_str();
  pre->add_option("--eps", pre_eps, "Position tolerance (default: 1e-6 of the bounding-box diagonal)");
  pre->add_flag("--flip-y", pre_params.flip_y, "Mirror y before normalization");

  // components
  auto* comp = app.add_subcommand("components", "Compute pa/dc/gamma component matrices");
  std::string comp_dataset;
  similarity::ComponentParams comp_params;
  std::size_t comp_band = 0;
  bool comp_serial = false;
  comp->add_option("--dataset", comp_dataset, "Preprocessed dataset directory")->required();
  comp->add_option("--m", comp_params.resample_m, "Common resample count")->capture_default_str();
  comp->add_option("--band", comp_band, "Sakoe-Chiba half width (0 = unconstrained)");
  comp->add_flag("--serial", comp_serial, "Use the single-threaded reference kernel");

  // cluster
  auto* clu = app.add_subcommand("cluster", "Assemble SM, build the dendrogram and report the CCF");
  std::string clu_components, clu_preset, clu_linkage = "average", clu_sym = "average";
  std::optional<std::string> clu_out;
  double w1 = 0.5, w2 = 0.5;
  std::optional<double> mu, lambda, omega;
  bool ndc = false, ngamma = false;
  clu->add_option("--components", clu_components, "components.json")->required();
  clu->add_option("--preset", clu_preset, "PSM | DCM | SCM | WPSM | WNDCSM | WNDCNSM");
  clu->add_option("--w1", w1, "First preset weight (mu for WPSM, lambda otherwise)")->capture_default_str();
  clu->add_option("--w2", w2, "Second preset weight (omega)")->capture_default_str();
  clu->add_option("--mu", mu, "Procrustes weight");
  clu->add_option("--lambda", lambda, "Direct composition weight");
  clu->add_option("--omega", omega, "Scale component weight");
  clu->add_flag("--ndc", ndc, "Normalize the dc component per column");
  clu->add_flag("--ngamma", ngamma, "Normalize the gamma component per column");
  clu->add_option("--linkage", clu_linkage, "single | average | weighted")->capture_default_str();
  clu->add_option("--symmetrize", clu_sym, "average | max")->capture_default_str();
  clu->add_option("--out", clu_out, "Output directory");

  // augment
  auto* aug = app.add_subcommand("augment", "Generate six warps per contour");
  std::string aug_dataset;
  std::optional<std::string> aug_out;
  double aug_magnitude = augmentation::kDefaultMagnitude;
  aug->add_option("--dataset", aug_dataset, "Dataset directory")->required();
  aug->add_option("--magnitude", aug_magnitude, "Warp magnitude (fraction of width)")->capture_default_str();
  aug->add_option("--out", aug_out, "Output dataset directory");

  // cut
  auto* cutc = app.add_subcommand("cut", "Cut a dendrogram into a labeling (CSV id,label)");
  std::string cut_dendrogram, cut_nodes;
  std::optional<double> cut_height;
  std::optional<std::size_t> cut_k;
  std::optional<std::string> cut_out;
  cutc->add_option("--dendrogram", cut_dendrogram, "dendrogram.json")->required();
  auto* h_opt = cutc->add_option("--height", cut_height, "Single-level cut height");
  auto* n_opt = cutc->add_option("--nodes", cut_nodes, "Multi-level cut: comma-separated subtree roots");
  auto* k_opt = cutc->add_option("--clusters", cut_k, "Single-level cut yielding exactly k clusters");
  h_opt->excludes(n_opt)->excludes(k_opt);
  n_opt->excludes(k_opt);
  cutc->add_option("--out", cut_out, "Write CSV here instead of stdout");

  // agreement
  auto* agr = app.add_subcommand("agreement", "Score a labeling against reference labels");
  std::string agr_labels, agr_reference;
  agr->add_option("--labels", agr_labels, "Computed labels CSV")->required();
  agr->add_option("--reference", agr_reference, "Reference labels CSV")->required();

  // serve
  auto* srv = app.add_subcommand("serve", "Local HTTP service for the typology explorer");
  std::string srv_dataset;
  int srv_port = 8080;
  srv->add_option("--dataset", srv_dataset, "Dataset directory with cached components")->required();
  srv->add_option("--port", srv_port, "Port on 127.0.0.1")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (pre->parsed()) {
      if (pre_eps >= 0.0) pre_params.eps_pos = pre_eps;
      const fs::path out = pipeline::resolve_output_dir(pre_out ? std::optional<fs::path>(*pre_out) : std::nullopt,
                                                        "preprocessed");
      const auto result = pipeline::run_preprocess(pre_manifest, out, pre_params);
      std::size_t flagged = 0;
      for (const auto& r : result.reports) {
        if (r.ok()) continue;
        ++flagged;
        for (const auto& v : r.violations) {
          std::cerr << "warning: " << r.contour_id << ": assumption " << to_string(v.assumption)
                    << " violated (measured " << v.measured << ", tolerance " << v.tolerance << ")\n";
        }
      }
      std::cout << "preprocessed " << result.set.size() << " contours into " << out.string() << " (" << flagged
                << " with violations)\n";
    } else if (comp->parsed()) {
      if (comp_band > 0) comp_params.dtw_band = comp_band;
      const auto result = pipeline::run_components(comp_dataset, comp_params, !comp_serial);
      std::cout << (result.reused_cache ? "reused cached" : "computed") << " components for "
                << result.components.size() << " contours (" << result.config_hash.substr(0, 12) << ")\n";
    } else if (clu->parsed()) {
      similarity::WeightConfig weights;
      if (!clu_preset.empty()) {
        weights = similarity::preset(clu_preset, w1, w2);
      } else if (mu || lambda || omega) {
        weights = {mu.value_or(0.0), lambda.value_or(0.0), omega.value_or(0.0), ndc, ngamma};
      } else {
        throw Error("give --preset or at least one of --mu/--lambda/--omega");
      }
      const fs::path out = pipeline::resolve_output_dir(
          clu_out ? std::optional<fs::path>(*clu_out) : std::nullopt, fs::path(clu_components).parent_path());
      const auto result = pipeline::run_cluster(clu_components, weights, clustering::linkage_from_string(clu_linkage),
                                                similarity::symmetrization_from_string(clu_sym), out);
      std::cout << "dendrogram written to " << (out / pipeline::kDendrogram).string() << "\n";
      if (result.ccf) {
        std::cout << "CCF " << io::format_double(*result.ccf) << "\n";
      } else {
        std::cout << "CCF undefined\n";
      }
    } else if (aug->parsed()) {
      const fs::path out = pipeline::resolve_output_dir(
          aug_out ? std::optional<fs::path>(*aug_out) : std::nullopt, fs::path(aug_dataset) / "augmented");
      const auto set = pipeline::run_augment(aug_dataset, aug_magnitude, out);
      std::cout << "wrote " << set.size() << " contours to " << out.string() << "\n";
    } else if (cutc->parsed()) {
      clustering::CutSpec spec;
      if (cut_height) {
        spec = clustering::SingleCut{*cut_height};
      } else if (!cut_nodes.empty()) {
        spec = clustering::MultiCut{parse_node_list(cut_nodes)};
      } else if (cut_k) {
        const auto doc = nlohmann::json::parse(io::read_file(cut_dendrogram));
        spec = clustering::SingleCut{clustering::height_for_clusters(clustering::dendrogram_from_json(doc), *cut_k)};
      } else {
        throw Error("give --height, --nodes or --clusters");
      }
      const std::string csv = clustering::labels_to_csv(pipeline::run_cut(cut_dendrogram, spec));
      if (cut_out) {
        io::write_file_atomic(*cut_out, csv);
      } else {
        std::cout << csv;
      }
    } else if (agr->parsed()) {
      const auto score = pipeline::run_agreement(agr_labels, agr_reference);
      std::cout << score.display() << " of " << score.total << " (optimal one-to-one matching), Rand index "
                << io::format_double(score.rand_index) << "\n";
    } else if (srv->parsed()) {
      service::serve(srv_dataset, srv_port);
    }
  } catch (const std::exception& e) {
    std::cerr << "contyp: error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
