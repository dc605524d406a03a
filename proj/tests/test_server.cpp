#include "doctest.h"

#include <thread>

#include "httplib.h"
#include "overlap_lab/error.hpp"
#include "overlap_lab/io.hpp"
#include "overlap_lab/overlap.hpp"
#include "overlap_lab/server.hpp"
#include "support.hpp"

using namespace overlap_lab;
using testing::TempDir;

namespace {

// Four hard images (both members always wrong) plus two easy ones.
struct ServerFixture {
    TempDir dir;
    TriageConfig config;

    ServerFixture() {
        std::mt19937_64 rng(17);
        std::vector<ImageRecord> records;
        const std::vector<ClassIndex> truth{0, 1, 2, 0, 1, 2};
        for (std::size_t i = 0; i < truth.size(); ++i) {
            records.push_back({testing::image_name(i), truth[i], Split::Test, "birds/" + testing::image_name(i) + ".jpg"});
        }
        config.manifest = DatasetManifest("toy", ClassVocabulary({"tern", "gull", "auk"}), records);
        const std::vector<ClassIndex> wrong_a{1, 2, 0, 1, 1, 2};
        const std::vector<ClassIndex> wrong_b{2, 0, 1, 2, 1, 2};
        config.runs.push_back(testing::run_with_predictions(rng, config.manifest, wrong_a, "a0", "A"));
        config.runs.push_back(testing::run_with_predictions(rng, config.manifest, wrong_b, "b0", "B"));
        config.partition = overlap_labels(config.manifest, config.runs, testing::all_ids(config.manifest));
        fs::create_directories(dir / "images" / "birds");
        write_file(dir / "images" / "birds" / "img00000.jpg", "\xff\xd8jpegbytes");
        config.images_root = dir / "images";
        config.annotations_path = dir / "annotations.jsonl";
    }
};

class Running {
  public:
    explicit Running(TriageConfig config) : server_(std::move(config)) {
        port_ = server_.bind("127.0.0.1", 0);
        thread_ = std::thread([this] { server_.listen(); });
        server_.running();
        for (int i = 0; i < 200 && !server_.running(); ++i) std::this_thread::sleep_for(std::chrono::milliseconds(5));
    }
    ~Running() {
        server_.stop();
        thread_.join();
    }
    httplib::Client client() const { return httplib::Client("127.0.0.1", port_); }
    int port() const { return port_; }
    TriageServer& server() { return server_; }

  private:
    TriageServer server_;
    int port_ = 0;
    std::thread thread_;
};

std::string body(const std::string& id, const std::string& cls) {
    return json{{"image_id", id}, {"error_class", cls}, {"annotator", "tester"}}.dump();
}

}  // namespace

TEST_CASE("queue lists hard images with truth and member top-3") {
    ServerFixture f;
    Running srv(f.config);
    auto cli = srv.client();

    auto res = cli.Get("/api/queue");
    REQUIRE(res);
    CHECK(res->status == 200);
    const auto q = json::parse(res->body);
    REQUIRE(q.size() == 4);
    CHECK(q[0]["image_id"] == "img00000");
    CHECK(q[0]["truth"]["name"] == "tern");
    CHECK(q[0]["overlap"] == 0);
    REQUIRE(q[0]["members"].size() == 2);
    const auto& top3 = q[0]["members"][0]["top3"];
    REQUIRE(top3.size() == 3);
    CHECK(top3[0]["index"] == 1);  // member A predicted gull
    CHECK(top3[0]["prob"].get<double>() >= top3[1]["prob"].get<double>());
    CHECK(q[0]["members"][0]["method_id"] == "A");

    res = cli.Get("/api/queue?group=overlap-0");
    CHECK(json::parse(res->body).size() == 4);
    res = cli.Get("/api/queue?group=overlap-2");
    CHECK(json::parse(res->body).size() == 2);
    res = cli.Get("/api/queue?group=sideways");
    CHECK(res->status == 400);
    CHECK(json::parse(res->body)["error"] == "invalid_group");

    res = cli.Get("/api/manifest");
    const auto m = json::parse(res->body);
    CHECK(m["dataset_id"] == "toy");
    CHECK(m["num_classes"] == 3);
    CHECK(m["splits"]["test"] == 6);
    CHECK(m["hard_count"] == 4);
}

TEST_CASE("annotation POST appends, updates prevalence and reorders the queue") {
    ServerFixture f;
    Running srv(f.config);
    auto cli = srv.client();

    auto res = cli.Post("/api/annotation", body("img00000", "NonTargetSubject"), "application/json");
    REQUIRE(res);
    CHECK(res->status == 200);
    const auto stored = json::parse(res->body);
    CHECK(stored["error_class"] == "NonTargetSubject");
    CHECK(stored.contains("timestamp"));
    CHECK(read_annotations(f.config.annotations_path).size() == 1);

    const auto prev = json::parse(cli.Get("/api/prevalence")->body);
    CHECK(prev["annotated"] == 1);
    CHECK(prev["unannotated"] == 3);
    CHECK(prev["classes"][1]["percent_text"] == "100.00");

    const auto q = json::parse(cli.Get("/api/queue")->body);
    CHECK(q[0]["image_id"] == "img00001");  // unannotated first
    CHECK(q[3]["image_id"] == "img00000");
    CHECK(q[3]["annotation"]["error_class"] == "NonTargetSubject");

    const auto all = json::parse(cli.Get("/api/annotations")->body);
    CHECK(all.size() == 1);
    CHECK(all["img00000"]["annotator"] == "tester");
}

TEST_CASE("invalid annotations are rejected without touching the journal") {
    ServerFixture f;
    Running srv(f.config);
    auto cli = srv.client();

    auto res = cli.Post("/api/annotation", body("img00000", "Blurry"), "application/json");
    CHECK(res->status == 400);
    CHECK(json::parse(res->body)["error"] == "invalid_error_class");

    res = cli.Post("/api/annotation", body("ghost", "Other"), "application/json");
    CHECK(res->status == 400);
    CHECK(json::parse(res->body)["error"] == "unknown_image_id");

    res = cli.Post("/api/annotation", "{not json", "application/json");
    CHECK(res->status == 400);
    CHECK(json::parse(res->body)["error"] == "invalid_json");

    CHECK_FALSE(fs::exists(f.config.annotations_path));
}

TEST_CASE("four-image triage loop with a revision") {
    ServerFixture f;
    Running srv(f.config);
    auto cli = srv.client();
    const char* classes[] = {"SimilarClassConfusion", "NonTargetSubject", "InadequateRepresentation", "PoorQuality"};
    const auto queue = json::parse(cli.Get("/api/queue")->body);
    for (int i = 0; i < 4; ++i) {
        CHECK(cli.Post("/api/annotation", body(queue[i]["image_id"], classes[i]), "application/json")->status == 200);
    }
    auto prev = json::parse(cli.Get("/api/prevalence")->body);
    for (int i = 0; i < 4; ++i) CHECK(prev["classes"][i]["percent_text"] == "25.00");
    CHECK(read_annotations(f.config.annotations_path).size() == 4);

    std::this_thread::sleep_for(std::chrono::milliseconds(2));
    CHECK(cli.Post("/api/annotation", body(queue[0]["image_id"], "Other"), "application/json")->status == 200);
    prev = json::parse(cli.Get("/api/prevalence")->body);
    CHECK(prev["classes"][0]["percent_text"] == "0.00");
    CHECK(prev["classes"][4]["percent_text"] == "25.00");
    CHECK(read_annotations(f.config.annotations_path).size() == 5);
}

TEST_CASE("concurrent POSTs are serialized into whole journal lines") {
    ServerFixture f;
    Running srv(f.config);
    std::vector<std::thread> posters;
    for (int t = 0; t < 4; ++t) {
        posters.emplace_back([&, t] {
            auto cli = srv.client();
            for (int i = 0; i < 10; ++i) cli.Post("/api/annotation", body(testing::image_name(static_cast<std::size_t>(t)), "Other"), "application/json");
        });
    }
    for (auto& p : posters) p.join();
    CHECK(read_annotations(f.config.annotations_path).size() == 40);
    // prevalence equals a fresh computation over the journal
    const auto prev = json::parse(srv.client().Get("/api/prevalence")->body);
    const auto fresh = to_json(prevalence(resolve_annotations(read_annotations(f.config.annotations_path)),
                                          export_subset(f.config.partition, 0)));
    CHECK(prev["classes"] == fresh["classes"]);
}

TEST_CASE("server picks up an existing journal at startup") {
    ServerFixture f;
    append_annotation(f.config.annotations_path, {"img00001", ErrorClass::PoorQuality, "old", UtcMillis{1}, std::nullopt});
    Running srv(f.config);
    const auto prev = json::parse(srv.client().Get("/api/prevalence")->body);
    CHECK(prev["annotated"] == 1);
}

TEST_CASE("image route serves bytes by extension and 404s otherwise") {
    ServerFixture f;
    Running srv(f.config);
    auto cli = srv.client();
    auto res = cli.Get("/api/image/img00000");
    REQUIRE(res);
    CHECK(res->status == 200);
    CHECK(res->get_header_value("Content-Type") == "image/jpeg");
    CHECK(res->body == "\xff\xd8jpegbytes");
    CHECK(cli.Get("/api/image/img00001")->status == 404);  // file missing
    CHECK(cli.Get("/api/image/ghost")->status == 404);
}

TEST_CASE("static root is served") {
    ServerFixture f;
    fs::create_directories(f.dir / "assets");
    write_file(f.dir / "assets" / "index.html", "<html>ui</html>");
    write_file(f.dir / "assets" / "app.js", "console.log(1)");
    f.config.assets_dir = f.dir / "assets";
    Running srv(f.config);
    auto cli = srv.client();
    CHECK(cli.Get("/")->body == "<html>ui</html>");
    CHECK(cli.Get("/assets/app.js")->body == "console.log(1)");
}

TEST_CASE("startup errors: missing images root and port in use") {
    ServerFixture f;
    auto bad = f.config;
    bad.images_root = f.dir / "nowhere";
    try {
        TriageServer s(bad);
        FAIL("expected MissingImagesRoot");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::MissingImagesRoot);
    }

    Running first(f.config);
    TriageServer second(f.config);
    try {
        second.bind("127.0.0.1", first.port());
        FAIL("expected PortInUse");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::PortInUse);
    }
}
