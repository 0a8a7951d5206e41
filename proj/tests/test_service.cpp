#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "contyp/pipeline.hpp"
#include "contyp/service.hpp"
#include "fixtures.hpp"

#include <httplib.h>

#include <thread>

using namespace contyp;
using nlohmann::json;
using fixtures::TempDir;
namespace fs = std::filesystem;

namespace {

struct Dataset {
  TempDir tmp{"service"};
  fs::path data;
  synthetic::Benchmark bench = synthetic::typology_benchmark(41, 2);

  Dataset() {
    const auto manifest = fixtures::write_raw(bench.set, tmp.path / "in");
    data = tmp.path / "data";
    pipeline::run_preprocess(manifest, data, {});
    pipeline::run_components(data, {});
  }
};

json body_of(const service::Response& r) { return json::parse(r.body); }

}  // namespace

TEST_CASE("service refuses to start without cached components") {
  TempDir tmp("service_empty");
  CHECK_THROWS_WITH_AS(service::Service{tmp.path}, doctest::Contains("contyp preprocess"), Error);

  const auto manifest = fixtures::write_raw(synthetic::typology_benchmark(1, 1).set, tmp.path / "in");
  pipeline::run_preprocess(manifest, tmp.path / "data", {});
  CHECK_THROWS_WITH_AS(service::Service{tmp.path / "data"}, doctest::Contains("contyp components"), Error);
}

TEST_CASE("handlers") {
  Dataset ds;
  service::Service svc(ds.data);

  SUBCASE("contours and components") {
    const auto contours = body_of(svc.get_contours());
    CHECK(contours["contours"].size() == ds.bench.set.size());
    CHECK(contours["contours"][0]["id"] == ds.bench.set.contours[0].id);
    const auto comps = body_of(svc.get_components());
    CHECK(comps["ids"].size() == ds.bench.set.size());
    CHECK(comps["config_hash"].get<std::string>().size() == 64);
  }

  SUBCASE("reweighting never calls a metric kernel") {
    const auto before = body_of(svc.get_stats())["kernel_calls"].get<std::uint64_t>();
    for (double w : {0.1, 0.5, 0.75, 0.9}) {
      const json cfg{{"preset", "WNDCNSM"}, {"first", w}, {"second", 1.0 - w}};
      CHECK(svc.post_similarity(json{{"config", cfg}}.dump()).status == 200);
      CHECK(svc.post_cluster(json{{"config", cfg}, {"linkage", "weighted"}}.dump()).status == 200);
    }
    CHECK(body_of(svc.get_stats())["kernel_calls"].get<std::uint64_t>() == before);
  }

  SUBCASE("similarity matches the library") {
    const auto r = body_of(svc.post_similarity(R"({"mu": 1, "omega": 0.5, "symmetrization": "max"})"));
    const auto comps = pipeline::load_components(ds.data / pipeline::kComponents);
    const auto sm = similarity::assemble_sm(comps, {1.0, 0.0, 0.5, false, false}, similarity::Symmetrization::Max);
    CHECK(similarity::matrix_from_json(r["values"]) == sm.values);
  }

  SUBCASE("PSM returns the cached pa matrix") {
    const auto r = body_of(svc.post_similarity(R"({"preset": "PSM"})"));
    CHECK(similarity::matrix_from_json(r["values"]) == pipeline::load_components(ds.data / pipeline::kComponents).pa);
  }

  SUBCASE("repeated cluster requests give identical responses") {
    const std::string req = R"({"preset": "WNDCSM", "first": 0.6, "second": 0.4, "linkage": "single"})";
    CHECK(svc.post_cluster(req).body == svc.post_cluster(req).body);
  }

  SUBCASE("cut before cluster is a conflict") {
    CHECK(svc.post_cut(R"({"height": 1})").status == 409);
    CHECK(svc.export_labels().status == 409);
  }

  SUBCASE("cluster, multi-level cut and export") {
    const auto cl = svc.post_cluster(R"({"config": {"preset": "WNDCNSM", "first": 0.75, "second": 0.25}})");
    REQUIRE(cl.status == 200);
    const auto doc = body_of(cl);
    CHECK(doc["ccf"].is_number());
    const auto dend = clustering::dendrogram_from_json(doc["dendrogram"]);

    // Select the subtrees that hold exactly the ground-truth groups.
    const auto k6 = clustering::cut(dend, clustering::SingleCut{clustering::height_for_clusters(dend, 6)});
    std::vector<std::size_t> roots;
    for (std::size_t v = 0; v <= dend.root(); ++v) {
      const auto leaves = clustering::leaves_under(dend, v);
      const int g = ds.bench.group[leaves.front()];
      const bool pure = std::all_of(leaves.begin(), leaves.end(), [&](auto l) { return ds.bench.group[l] == g; });
      const bool full = static_cast<int>(leaves.size()) ==
                        std::count(ds.bench.group.begin(), ds.bench.group.end(), g);
      if (pure && full) roots.push_back(v);
    }
    REQUIRE(roots.size() == 6);
    const auto cut = svc.post_cut(json{{"nodes", roots}}.dump());
    REQUIRE(cut.status == 200);
    const auto cut_doc = body_of(cut);
    CHECK(cut_doc["labels"] == clustering::to_json(k6)["labels"]);
    const auto exported = svc.export_labels();
    CHECK(exported.content_type == "text/csv");
    CHECK(exported.body == cut_doc["csv"].get<std::string>());
    CHECK(exported.body == clustering::labels_to_csv(clustering::cut(dend, clustering::MultiCut{roots})));

    CHECK(svc.post_cut(json{{"nodes", {roots[0], roots[0]}}}.dump()).status == 422);
    CHECK(svc.post_cut(R"({"nodes": [0]})").status == 422);
    CHECK(svc.post_cut("not json").status == 400);
  }

  SUBCASE("cut with an inline configuration") {
    const auto r = svc.post_cut(R"({"config": {"preset": "SCM"}, "linkage": "average", "height": "inf"})");
    REQUIRE(r.status == 200);
    CHECK(body_of(r)["labels"].size() == ds.bench.set.size());
  }

  SUBCASE("agreement") {
    json labels = json::array(), reference = json::array();
    for (std::size_t i = 0; i < ds.bench.set.size(); ++i) {
      labels.push_back({{"id", ds.bench.set.contours[i].id}, {"label", ds.bench.group[i]}});
      reference.push_back({{"id", ds.bench.set.contours[i].id}, {"label", "g" + std::to_string(ds.bench.group[i])}});
    }
    const auto r = body_of(svc.post_agreement(json{{"labels", labels}, {"reference", reference}}.dump()));
    CHECK(r["percent"] == 100.0);
    CHECK(r["display"] == "100.00% [12]");
    CHECK(svc.post_agreement(R"({"labels": []})").status == 400);
  }

  SUBCASE("bad requests") {
    CHECK(svc.post_similarity(R"({"preset": "nope"})").status == 400);
    CHECK(svc.post_cluster(R"({"linkage": "complete"})").status == 400);
    CHECK(svc.post_similarity("[1,2]").status == 400);
  }
}

TEST_CASE("http round trip on 127.0.0.1") {
  Dataset ds;
  service::Service svc(ds.data);
  httplib::Server server;
  server.new_task_queue = [] { return new httplib::ThreadPool(1); };
  svc.mount(server);
  const int port = server.bind_to_any_port("127.0.0.1");
  REQUIRE(port > 0);
  std::thread worker([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  httplib::Client client("127.0.0.1", port);
  auto contours = client.Get("/contours");
  REQUIRE(contours);
  CHECK(contours->status == 200);
  CHECK(json::parse(contours->body)["contours"].size() == ds.bench.set.size());

  auto cl = client.Post("/cluster", R"({"preset": "WNDCNSM", "first": 0.75, "second": 0.25})", "application/json");
  REQUIRE(cl);
  CHECK(cl->status == 200);
  auto cut = client.Post("/cut", R"({"height": "inf"})", "application/json");
  REQUIRE(cut);
  CHECK(cut->status == 200);
  auto csv = client.Get("/export/labels.csv");
  REQUIRE(csv);
  CHECK(csv->get_header_value("Content-Type") == "text/csv");
  CHECK(csv->body == json::parse(cut->body)["csv"].get<std::string>());
  auto stats = client.Get("/stats");
  REQUIRE(stats);
  CHECK(json::parse(stats->body).contains("kernel_calls"));
  auto bad = client.Post("/cut", R"({"nodes": [1]})", "application/json");
  REQUIRE(bad);
  CHECK(bad->status == 422);

  server.stop();
  worker.join();
}
