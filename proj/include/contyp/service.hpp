#pragma once

#include "contyp/clustering.hpp"
#include "contyp/contour.hpp"
#include "contyp/similarity.hpp"

#include <filesystem>
#include <mutex>
#include <optional>
#include <string>

namespace httplib {
class Server;
}

namespace contyp::service {

struct Response {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

/// Expert workbench over one preprocessed dataset with cached components.
/// Requests are handled one at a time; no handler invokes a metric kernel.
class Service {
 public:
  /// Throws with an instructive message when the components cache is missing.
  explicit Service(const std::filesystem::path& dataset_dir);

  Response get_contours() const;
  Response get_components() const;
  Response get_stats() const;
  Response post_similarity(const std::string& body);
  Response post_cluster(const std::string& body);
  Response post_cut(const std::string& body);
  Response post_agreement(const std::string& body);
  Response export_labels() const;

  /// Registers every endpoint on `server`.
  void mount(httplib::Server& server);

 private:
  ContourSet contours_;
  similarity::ComponentMatrices components_;
  std::string components_hash_;
  std::optional<clustering::Dendrogram> last_dendrogram_;
  std::optional<clustering::Labeling> last_labels_;
  mutable std::mutex mutex_;
};

/// Blocks serving `dataset_dir` on 127.0.0.1:port.
void serve(const std::filesystem::path& dataset_dir, int port);

}  // namespace contyp::service
