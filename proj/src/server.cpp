#include "overlap_lab/server.hpp"

#include <algorithm>
#include <numeric>

#include <sys/socket.h>

#include "httplib.h"
#include "overlap_lab/ensemble.hpp"
#include "overlap_lab/error.hpp"
#include "overlap_lab/log.hpp"
#include "overlap_lab/overlap.hpp"

namespace overlap_lab {

using nlohmann::json;

namespace {

constexpr const char* kPlaceholderPage = R"(<!doctype html>
<html><head><meta charset="utf-8"><title>overlap-lab triage</title></head>
<body>
<h1>overlap-lab triage server</h1>
<p>No UI bundle is installed. Start the server with <code>--assets-dir</code> pointing at a built bundle,
or use the JSON API directly:</p>
<ul>
<li><a href="/api/manifest">/api/manifest</a></li>
<li><a href="/api/queue?group=hard">/api/queue?group=hard</a></li>
<li><a href="/api/annotations">/api/annotations</a></li>
<li><a href="/api/prevalence">/api/prevalence</a></li>
</ul>
</body></html>
)";

void send_json(httplib::Response& res, const json& body, int status = 200) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, std::string_view code, const std::string& message) {
    send_json(res, {{"error", code}, {"message", message}}, status);
}

std::string content_type_for(const std::filesystem::path& path) {
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (ext == ".jpg" || ext == ".jpeg") return "image/jpeg";
    if (ext == ".png") return "image/png";
    return "application/octet-stream";
}

// Parses "hard" or "overlap-k".
std::int32_t parse_group(const std::string& group, std::size_t num_runs) {
    if (group.empty() || group == "hard") return 0;
    constexpr std::string_view prefix = "overlap-";
    if (group.rfind(prefix, 0) == 0 && group.size() > prefix.size()) {
        const std::string digits = group.substr(prefix.size());
        if (std::all_of(digits.begin(), digits.end(), [](unsigned char c) { return std::isdigit(c); }) &&
            digits.size() < 6) {
            const int k = std::stoi(digits);
            if (static_cast<std::size_t>(k) <= num_runs) return k;
        }
    }
    throw Error(ErrorCode::InvalidArgument, "unknown queue group '" + group + "'");
}

}  // namespace

std::vector<TopPrediction> top_k(std::span<const double> probs, std::size_t k) {
    std::vector<std::size_t> order(probs.size());
    std::iota(order.begin(), order.end(), 0);
    k = std::min(k, order.size());
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                      [&](std::size_t a, std::size_t b) { return probs[a] > probs[b] || (probs[a] == probs[b] && a < b); });
    std::vector<TopPrediction> out;
    for (std::size_t i = 0; i < k; ++i) out.push_back({static_cast<ClassIndex>(order[i]), probs[order[i]]});
    return out;
}

TriageServer::TriageServer(TriageConfig config)
    : config_(std::move(config)), journal_(config_.annotations_path) {
    std::error_code ec;
    if (!std::filesystem::is_directory(config_.images_root, ec)) {
        throw Error(ErrorCode::MissingImagesRoot, config_.images_root.string());
    }
    const auto& p = config_.partition;
    std::vector<std::size_t> order(p.image_ids.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p.image_ids[a] < p.image_ids[b]; });

    std::vector<double> probs;
    for (std::size_t i : order) {
        TriageItem item;
        item.image_id = p.image_ids[i];
        item.truth = config_.manifest.label_of(item.image_id);
        item.overlap = p.overlap[i];
        for (const auto& run : config_.runs) {
            const auto row = run.find_row(item.image_id);
            if (!row) {
                throw Error(ErrorCode::MissingImageCoverage,
                            "run '" + run.model_id() + "' has no row for image " + item.image_id);
            }
            probs = softmax_rows(run.row(*row), run.num_classes());
            item.members.push_back({run.method_id(), run.model_id(), top_k(probs, 3)});
        }
        if (item.overlap == 0) hard_.push_back(item.image_id);
        items_.push_back(std::move(item));
    }
    entries_ = journal_.read();
    resolved_ = resolve_annotations(entries_);
    install_routes();
}

TriageServer::~TriageServer() {
    stop();
}

json TriageServer::manifest_summary() const {
    const auto& m = config_.manifest;
    return {{"dataset_id", m.dataset_id()},
            {"num_classes", m.num_classes()},
            {"num_images", m.records().size()},
            {"splits",
             {{"train", m.count_in_split(Split::Train)},
              {"test", m.count_in_split(Split::Test)},
              {"extra", m.count_in_split(Split::Extra)}}},
            {"num_runs", config_.partition.num_runs},
            {"analyzed_images", config_.partition.image_ids.size()},
            {"hard_count", hard_.size()}};
}

json TriageServer::item_json(const TriageItem& item, const std::map<std::string, ErrorAnnotation>& resolved) const {
    const auto& vocab = config_.manifest.vocabulary();
    json members = json::array();
    for (const auto& m : item.members) {
        json top3 = json::array();
        for (const auto& t : m.top3) top3.push_back({{"index", t.index}, {"name", vocab.name(t.index)}, {"prob", t.prob}});
        members.push_back({{"method_id", m.method_id}, {"model_id", m.model_id}, {"top3", std::move(top3)}});
    }
    json out = {{"image_id", item.image_id},
                {"truth", {{"index", item.truth}, {"name", vocab.name(item.truth)}}},
                {"overlap", item.overlap},
                {"members", std::move(members)}};
    if (auto it = resolved.find(item.image_id); it != resolved.end()) out["annotation"] = annotation_to_json(it->second);
    return out;
}

json TriageServer::queue(const std::string& group) const {
    const std::int32_t o = parse_group(group, config_.partition.num_runs);
    std::map<std::string, ErrorAnnotation> resolved;
    {
        std::lock_guard lock(state_mutex_);
        resolved = resolved_;
    }
    json pending = json::array();
    json done = json::array();
    for (const auto& item : items_) {
        if (item.overlap != o) continue;
        (resolved.contains(item.image_id) ? done : pending).push_back(item_json(item, resolved));
    }
    for (auto& d : done) pending.push_back(std::move(d));
    return pending;
}

json TriageServer::annotations() const {
    std::lock_guard lock(state_mutex_);
    json out = json::object();
    for (const auto& [image, a] : resolved_) out[image] = annotation_to_json(a);
    return out;
}

json TriageServer::prevalence_report() const {
    std::lock_guard lock(state_mutex_);
    json out = to_json(prevalence(resolved_, hard_));
    out["hard_count"] = hard_.size();
    return out;
}

ErrorAnnotation TriageServer::submit(const json& body) {
    if (!body.is_object()) throw Error(ErrorCode::MalformedJson, "annotation body must be an object");
    json stamped = body;
    stamped["timestamp"] = format_rfc3339(UtcMillis::now());
    ErrorAnnotation a = annotation_from_json(stamped);
    if (config_.manifest.find(a.image_id) == nullptr) throw Error(ErrorCode::UnknownImageId, a.image_id);

    std::lock_guard lock(state_mutex_);
    // stamp under the lock so journal order and timestamps agree
    a.timestamp = UtcMillis::now();
    journal_.append(a);
    entries_.push_back(a);
    auto it = resolved_.find(a.image_id);
    if (it == resolved_.end()) {
        resolved_.emplace(a.image_id, a);
    } else if (a.timestamp >= it->second.timestamp) {
        it->second = a;
    }
    log::info("annotation {} -> {} by {}", a.image_id, to_string(a.error_class), a.annotator);
    return a;
}

void TriageServer::install_routes() {
    http_ = std::make_unique<httplib::Server>();
    auto& srv = *http_;
    // httplib's default sets SO_REUSEPORT, which lets a second server share a
    // live port instead of failing.
    srv.set_socket_options([](socket_t sock) {
        int yes = 1;
        ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof yes);
    });

    srv.Get("/api/manifest", [this](const httplib::Request&, httplib::Response& res) { send_json(res, manifest_summary()); });

    srv.Get("/api/queue", [this](const httplib::Request& req, httplib::Response& res) {
        try {
            send_json(res, queue(req.has_param("group") ? req.get_param_value("group") : "hard"));
        } catch (const Error& e) {
            send_error(res, 400, "invalid_group", e.what());
        }
    });

    srv.Get(R"(/api/image/(.+))", [this](const httplib::Request& req, httplib::Response& res) {
        const std::string id = req.matches[1];
        const ImageRecord* record = config_.manifest.find(id);
        if (record == nullptr || !record->image_path) {
            send_error(res, 404, "unknown_image", id);
            return;
        }
        std::error_code ec;
        const auto root = std::filesystem::weakly_canonical(config_.images_root, ec);
        const auto file = std::filesystem::weakly_canonical(config_.images_root / *record->image_path, ec);
        const auto rel = file.lexically_relative(root);
        if (ec || rel.empty() || *rel.begin() == ".." || !std::filesystem::is_regular_file(file, ec)) {
            send_error(res, 404, "missing_image_file", id);
            return;
        }
        try {
            res.set_content(read_file(file), content_type_for(file));
        } catch (const Error& e) {
            send_error(res, 404, "missing_image_file", e.what());
        }
    });

    srv.Get("/api/annotations", [this](const httplib::Request&, httplib::Response& res) { send_json(res, annotations()); });
    srv.Get("/api/prevalence", [this](const httplib::Request&, httplib::Response& res) { send_json(res, prevalence_report()); });

    srv.Post("/api/annotation", [this](const httplib::Request& req, httplib::Response& res) {
        json body;
        try {
            body = json::parse(req.body);
        } catch (const json::parse_error& e) {
            send_error(res, 400, "invalid_json", e.what());
            return;
        }
        try {
            send_json(res, annotation_to_json(submit(body)));
        } catch (const Error& e) {
            switch (e.code()) {
                case ErrorCode::InvalidErrorClass: send_error(res, 400, "invalid_error_class", e.what()); break;
                case ErrorCode::UnknownImageId: send_error(res, 400, "unknown_image_id", e.what()); break;
                case ErrorCode::IoFailure: send_error(res, 500, "io_failure", e.what()); break;
                default: send_error(res, 400, "invalid_annotation", e.what()); break;
            }
        }
    });

    if (config_.assets_dir && std::filesystem::is_directory(*config_.assets_dir)) {
        srv.set_mount_point("/assets", config_.assets_dir->string());
        const auto index = *config_.assets_dir / "index.html";
        srv.Get("/", [index](const httplib::Request&, httplib::Response& res) {
            try {
                res.set_content(read_file(index), "text/html");
            } catch (const Error&) {
                res.set_content(kPlaceholderPage, "text/html");
            }
        });
    } else {
        srv.Get("/", [](const httplib::Request&, httplib::Response& res) { res.set_content(kPlaceholderPage, "text/html"); });
    }
}

int TriageServer::bind(const std::string& host, int port) {
    if (port == 0) {
        const int bound = http_->bind_to_any_port(host);
        if (bound <= 0) throw Error(ErrorCode::PortInUse, host + ":0");
        return bound;
    }
    if (!http_->bind_to_port(host, port)) throw Error(ErrorCode::PortInUse, host + ":" + std::to_string(port));
    return port;
}

void TriageServer::listen() {
    http_->listen_after_bind();
}

void TriageServer::stop() {
    if (http_) http_->stop();
}

bool TriageServer::running() const {
    return http_ && http_->is_running();
}

}  // namespace overlap_lab
