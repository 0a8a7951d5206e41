#include "contyp/service.hpp"

#include "contyp/io.hpp"
#include "contyp/metrics.hpp"
#include "contyp/pipeline.hpp"

#include <httplib.h>
#include <nlohmann/json.hpp>

#include <iostream>

namespace contyp::service {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

Response json_response(const json& j, int status = 200) { return {status, j.dump(), "application/json"}; }

Response error_response(int status, const std::string& message) {
  return json_response(json{{"error", message}}, status);
}

json parse_body(const std::string& body) {
  if (body.empty()) return json::object();
  json j = json::parse(body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw Error("request body must be a JSON object");
  return j;
}

similarity::WeightConfig config_of(const json& body) {
  return similarity::weight_config_from_json(body.contains("config") ? body["config"] : body);
}

similarity::Symmetrization symmetrization_of(const json& body) {
  return similarity::symmetrization_from_string(body.value("symmetrization", "average"));
}

clustering::Labeling labeling_of(const json& j) {
  if (j.is_string()) return clustering::labels_from_csv(j.get<std::string>());
  if (!j.is_array()) throw Error("labels must be a CSV string or an array of {id, label}");
  clustering::Labeling out;
  std::map<std::string, int> dense;
  for (const auto& row : j) {
    out.ids.push_back(row.at("id").get<std::string>());
    const auto& label = row.at("label");
    const std::string key = label.is_string() ? label.get<std::string>() : label.dump();
    out.labels.push_back(dense.try_emplace(key, static_cast<int>(dense.size())).first->second);
  }
  return out;
}

}  // namespace

Service::Service(const fs::path& dataset_dir) {
  const fs::path manifest = dataset_dir / pipeline::kManifest;
  if (!fs::exists(manifest)) {
    throw Error("no dataset at " + dataset_dir.string() + "; run `contyp preprocess` first");
  }
  if (!fs::exists(dataset_dir / pipeline::kComponents)) {
    throw Error("no cached components in " + dataset_dir.string() + "; run `contyp components --dataset " +
                dataset_dir.string() + "` first");
  }
  contours_ = io::load_contour_set(manifest);
  components_ = pipeline::load_components(dataset_dir / pipeline::kComponents, &components_hash_);
}

Response Service::get_contours() const {
  std::lock_guard lock(mutex_);
  json list = json::array();
  for (const auto& c : contours_.contours) {
    json pts = json::array();
    for (const auto& p : c.points) pts.push_back(json::array({p.x, p.y}));
    json entry{{"id", c.id}, {"points", std::move(pts)}};
    entry["radius"] = c.radius ? json(*c.radius) : json(nullptr);
    if (!c.source.is_original()) {
      entry["source"] = {{"transform_id", c.source.transform_id}, {"parent_id", c.source.parent_id}};
    }
    list.push_back(std::move(entry));
  }
  return json_response(json{{"dataset_id", contours_.dataset_id}, {"contours", std::move(list)}});
}

Response Service::get_components() const {
  std::lock_guard lock(mutex_);
  json j = similarity::to_json(components_);
  j["config_hash"] = components_hash_;
  return json_response(j);
}

Response Service::get_stats() const {
  return json_response(json{{"kernel_calls", metrics::kernel_call_count()}});
}

Response Service::post_similarity(const std::string& body) {
  std::lock_guard lock(mutex_);
  try {
    const json req = parse_body(body);
    const auto sm = similarity::assemble_sm(components_, config_of(req), symmetrization_of(req));
    return json_response(similarity::to_json(sm));
  } catch (const std::exception& e) {
    return error_response(400, e.what());
  }
}

Response Service::post_cluster(const std::string& body) {
  std::lock_guard lock(mutex_);
  try {
    const json req = parse_body(body);
    const auto linkage = clustering::linkage_from_string(req.value("linkage", "average"));
    const auto result = pipeline::cluster_components(components_, config_of(req), linkage, symmetrization_of(req));
    last_dendrogram_ = result.dendrogram;
    json dend = clustering::to_json(result.dendrogram);
    dend["linkage"] = clustering::to_string(linkage);
    return json_response(json{{"dendrogram", std::move(dend)},
                              {"ccf", result.ccf ? json(*result.ccf) : json(nullptr)},
                              {"config", similarity::to_json(result.sm.config)}});
  } catch (const std::exception& e) {
    return error_response(400, e.what());
  }
}

Response Service::post_cut(const std::string& body) {
  std::lock_guard lock(mutex_);
  json req;
  clustering::CutSpec spec;
  try {
    req = parse_body(body);
    spec = clustering::cut_spec_from_json(req.contains("cut") ? req["cut"] : req);
    if (req.contains("config") || req.contains("linkage")) {
      const auto linkage = clustering::linkage_from_string(req.value("linkage", "average"));
      last_dendrogram_ =
          pipeline::cluster_components(components_, config_of(req), linkage, symmetrization_of(req)).dendrogram;
    }
  } catch (const std::exception& e) {
    return error_response(400, e.what());
  }
  if (!last_dendrogram_) return error_response(409, "no dendrogram yet; POST /cluster first");
  try {
    auto labels = clustering::cut(*last_dendrogram_, spec);
    last_labels_ = labels;
    json out = clustering::to_json(labels);
    out["csv"] = clustering::labels_to_csv(labels);
    return json_response(out);
  } catch (const std::exception& e) {
    return error_response(422, e.what());
  }
}

Response Service::post_agreement(const std::string& body) {
  std::lock_guard lock(mutex_);
  try {
    const json req = parse_body(body);
    const auto score = clustering::agreement(labeling_of(req.at("labels")), labeling_of(req.at("reference")));
    return json_response(json{{"percent", score.percent},
                              {"correct", score.correct},
                              {"total", score.total},
                              {"rand_index", score.rand_index},
                              {"display", score.display()},
                              {"method", "optimal one-to-one cluster matching"}});
  } catch (const std::exception& e) {
    return error_response(400, e.what());
  }
}

Response Service::export_labels() const {
  std::lock_guard lock(mutex_);
  if (!last_labels_) return error_response(409, "no cut yet; POST /cut first");
  return {200, clustering::labels_to_csv(*last_labels_), "text/csv"};
}

void Service::mount(httplib::Server& server) {
  auto send = [](httplib::Response& res, const Response& r) {
    res.status = r.status;
    res.set_content(r.body, r.content_type);
  };
  server.Get("/contours", [this, send](const httplib::Request&, httplib::Response& res) { send(res, get_contours()); });
  server.Get("/components",
             [this, send](const httplib::Request&, httplib::Response& res) { send(res, get_components()); });
  server.Get("/stats", [this, send](const httplib::Request&, httplib::Response& res) { send(res, get_stats()); });
  server.Get("/export/labels.csv",
             [this, send](const httplib::Request&, httplib::Response& res) { send(res, export_labels()); });
  server.Post("/similarity",
              [this, send](const httplib::Request& req, httplib::Response& res) { send(res, post_similarity(req.body)); });
  server.Post("/cluster",
              [this, send](const httplib::Request& req, httplib::Response& res) { send(res, post_cluster(req.body)); });
  server.Post("/cut", [this, send](const httplib::Request& req, httplib::Response& res) { send(res, post_cut(req.body)); });
  server.Post("/agreement",
              [this, send](const httplib::Request& req, httplib::Response& res) { send(res, post_agreement(req.body)); });
}

void serve(const fs::path& dataset_dir, int port) {
  Service service(dataset_dir);
  httplib::Server server;
  // One worker: requests for the dataset are processed strictly in order.
  server.new_task_queue = [] { return new httplib::ThreadPool(1); };
  service.mount(server);
  if (!server.bind_to_port("127.0.0.1", port)) {
    throw Error("cannot bind 127.0.0.1:" + std::to_string(port) + " (port busy?)");
  }
  std::cerr << "contyp: serving " << dataset_dir.string() << " on http://127.0.0.1:" << port << "\n";
  server.listen_after_bind();
}

}  // namespace contyp::service
