#include "overlap_lab/io.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <bit>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <sstream>

#include "overlap_lab/error.hpp"

namespace overlap_lab {

namespace {

[[noreturn]] void malformed(const fs::path& where, const std::string& what) {
    throw Error(ErrorCode::MalformedJson, where.string() + ": " + what);
}

template <typename T>
T field(const json& j, const char* key, const fs::path& where) {
    auto it = j.find(key);
    if (it == j.end()) malformed(where, std::string("missing field '") + key + "'");
    try {
        return it->get<T>();
    } catch (const json::exception&) {
        malformed(where, std::string("field '") + key + "' has the wrong type");
    }
}

void check_version(const json& j, const fs::path& where) {
    const auto v = field<int>(j, "format_version", where);
    if (v != kFormatVersion) malformed(where, "unsupported format_version " + std::to_string(v));
}

json parse_json_text(const std::string& text, const fs::path& where) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        malformed(where, e.what());
    }
}

std::string io_message(const fs::path& path, const char* action) {
    return std::string(action) + " '" + path.string() + "': " + std::strerror(errno);
}

}  // namespace

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoFailure, io_message(path, "cannot open"));
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw Error(ErrorCode::IoFailure, io_message(path, "cannot read"));
    return buf.str();
}

void write_file(const fs::path& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoFailure, io_message(path, "cannot open for writing"));
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw Error(ErrorCode::IoFailure, io_message(path, "cannot write"));
}

json parse_json_file(const fs::path& path) {
    return parse_json_text(read_file(path), path);
}

DatasetManifest manifest_from_json(const json& j) {
    const fs::path where = "manifest";
    if (!j.is_object()) malformed(where, "top level must be an object");
    check_version(j, where);
    auto dataset_id = field<std::string>(j, "dataset_id", where);
    auto classes = field<std::vector<std::string>>(j, "classes", where);
    const auto& images = j.find("images");
    if (images == j.end() || !images->is_array()) malformed(where, "'images' must be an array");

    std::vector<ImageRecord> records;
    records.reserve(images->size());
    for (std::size_t i = 0; i < images->size(); ++i) {
        const auto& item = (*images)[i];
        const fs::path at = "manifest images[" + std::to_string(i) + "]";
        if (!item.is_object()) malformed(at, "must be an object");
        ImageRecord r;
        r.image_id = field<std::string>(item, "image_id", at);
        r.label_index = field<ClassIndex>(item, "label_index", at);
        r.split = parse_split(field<std::string>(item, "split", at));
        if (auto p = item.find("image_path"); p != item.end() && !p->is_null()) {
            if (!p->is_string()) malformed(at, "'image_path' must be a string");
            r.image_path = p->get<std::string>();
        }
        records.push_back(std::move(r));
    }
    return DatasetManifest(std::move(dataset_id), ClassVocabulary(std::move(classes)), std::move(records));
}

DatasetManifest load_manifest(const fs::path& path) {
    return manifest_from_json(parse_json_file(path));
}

json manifest_to_json(const DatasetManifest& manifest) {
    json images = json::array();
    for (const auto& r : manifest.records()) {
        json item = {{"image_id", r.image_id}, {"label_index", r.label_index}, {"split", to_string(r.split)}};
        if (r.image_path) item["image_path"] = *r.image_path;
        images.push_back(std::move(item));
    }
    return {{"format_version", kFormatVersion},
            {"dataset_id", manifest.dataset_id()},
            {"classes", manifest.vocabulary().names()},
            {"images", std::move(images)}};
}

void write_manifest(const DatasetManifest& manifest, const fs::path& path) {
    write_file(path, manifest_to_json(manifest).dump(2) + "\n");
}

PredictionSet load_prediction_set(const fs::path& dir) {
    const fs::path meta_path = dir / "meta.json";
    const json meta = parse_json_file(meta_path);
    if (!meta.is_object()) malformed(meta_path, "top level must be an object");
    check_version(meta, meta_path);
    RunIdentity identity{field<std::string>(meta, "model_id", meta_path), field<std::string>(meta, "method_id", meta_path),
                         field<std::uint32_t>(meta, "replicate_index", meta_path),
                         field<std::string>(meta, "dataset_id", meta_path)};
    const auto num_images = field<std::size_t>(meta, "num_images", meta_path);
    const auto num_classes = field<std::size_t>(meta, "num_classes", meta_path);
    if (field<std::string>(meta, "dtype", meta_path) != "f32le") malformed(meta_path, "dtype must be \"f32le\"");
    if (field<std::string>(meta, "layout", meta_path) != "row-major") malformed(meta_path, "layout must be \"row-major\"");

    const std::string ids_text = read_file(dir / "ids.txt");
    ImageIds ids;
    std::size_t start = 0;
    while (start < ids_text.size()) {
        auto end = ids_text.find('\n', start);
        if (end == std::string::npos) end = ids_text.size();
        ids.push_back(ids_text.substr(start, end - start));
        start = end + 1;
    }
    if (ids.size() != num_images) {
        throw Error(ErrorCode::SizeMismatch, (dir / "ids.txt").string() + " has " + std::to_string(ids.size()) +
                                                 " lines, meta.json says " + std::to_string(num_images));
    }
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (ids[i].empty()) {
            throw Error(ErrorCode::SizeMismatch, (dir / "ids.txt").string() + " line " + std::to_string(i + 1) + " is empty");
        }
    }

    const std::string bytes = read_file(dir / "scores.bin");
    const std::size_t expected = num_images * num_classes * sizeof(float);
    if (bytes.size() != expected) {
        throw Error(ErrorCode::SizeMismatch, (dir / "scores.bin").string() + " is " + std::to_string(bytes.size()) +
                                                 " bytes, expected " + std::to_string(expected));
    }
    std::vector<float> scores(num_images * num_classes);
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
    for (std::size_t i = 0; i < scores.size(); ++i, p += 4) {
        const std::uint32_t word = std::uint32_t(p[0]) | std::uint32_t(p[1]) << 8 | std::uint32_t(p[2]) << 16 |
                                   std::uint32_t(p[3]) << 24;
        scores[i] = std::bit_cast<float>(word);
    }
    return PredictionSet(std::move(identity), std::move(ids), std::move(scores), num_classes);
}

PredictionSet load_prediction_set(const fs::path& dir, const DatasetManifest& manifest) {
    PredictionSet ps = load_prediction_set(dir);
    if (ps.dataset_id() != manifest.dataset_id()) {
        throw Error(ErrorCode::DatasetIdMismatch, dir.string() + ": run dataset '" + ps.dataset_id() +
                                                      "' vs manifest '" + manifest.dataset_id() + "'");
    }
    if (ps.num_classes() != manifest.num_classes()) {
        throw Error(ErrorCode::SizeMismatch, dir.string() + ": num_classes " + std::to_string(ps.num_classes()) +
                                                 " vs manifest C=" + std::to_string(manifest.num_classes()));
    }
    for (const auto& id : ps.image_ids()) {
        if (manifest.find(id) == nullptr) throw Error(ErrorCode::UnknownImageId, id + " in " + dir.string());
    }
    return ps;
}

void write_prediction_set(const PredictionSet& ps, const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error(ErrorCode::IoFailure, "cannot create '" + dir.string() + "': " + ec.message());

    const json meta = {{"format_version", kFormatVersion},
                       {"model_id", ps.model_id()},
                       {"method_id", ps.method_id()},
                       {"replicate_index", ps.replicate_index()},
                       {"dataset_id", ps.dataset_id()},
                       {"num_images", ps.num_images()},
                       {"num_classes", ps.num_classes()},
                       {"dtype", "f32le"},
                       {"layout", "row-major"}};
    write_file(dir / "meta.json", meta.dump(2) + "\n");

    std::string ids;
    for (const auto& id : ps.image_ids()) {
        ids += id;
        ids += '\n';
    }
    write_file(dir / "ids.txt", ids);

    std::string bytes(ps.scores().size() * 4, '\0');
    auto* p = reinterpret_cast<unsigned char*>(bytes.data());
    for (float v : ps.scores()) {
        const auto word = std::bit_cast<std::uint32_t>(v);
        *p++ = static_cast<unsigned char>(word);
        *p++ = static_cast<unsigned char>(word >> 8);
        *p++ = static_cast<unsigned char>(word >> 16);
        *p++ = static_cast<unsigned char>(word >> 24);
    }
    write_file(dir / "scores.bin", bytes);
}

LabelCorrectionTable corrections_from_json(const json& j) {
    const fs::path where = "corrections";
    if (!j.is_object()) malformed(where, "top level must be an object");
    LabelCorrectionTable table;
    table.source = field<std::string>(j, "source", where);
    table.corrections = field<std::map<std::string, std::string>>(j, "corrections", where);
    return table;
}

LabelCorrectionTable load_corrections(const fs::path& path) {
    return corrections_from_json(parse_json_file(path));
}

json annotation_to_json(const ErrorAnnotation& a) {
    json j = {{"image_id", a.image_id},
              {"error_class", to_string(a.error_class)},
              {"annotator", a.annotator},
              {"timestamp", format_rfc3339(a.timestamp)}};
    if (a.note) j["note"] = *a.note;
    return j;
}

namespace {

ErrorAnnotation annotation_at(const json& j, const fs::path& where) {
    if (!j.is_object()) malformed(where, "must be an object");
    ErrorAnnotation a;
    a.image_id = field<std::string>(j, "image_id", where);
    a.error_class = parse_error_class(field<std::string>(j, "error_class", where));
    a.annotator = field<std::string>(j, "annotator", where);
    const auto stamp = field<std::string>(j, "timestamp", where);
    try {
        a.timestamp = parse_rfc3339(stamp);
    } catch (const Error&) {
        malformed(where, "bad timestamp '" + stamp + "'");
    }
    if (auto n = j.find("note"); n != j.end() && !n->is_null()) {
        if (!n->is_string()) malformed(where, "'note' must be a string");
        a.note = n->get<std::string>();
    }
    return a;
}

}  // namespace

ErrorAnnotation annotation_from_json(const json& j) {
    return annotation_at(j, "annotation");
}

void append_annotation(const fs::path& log, const ErrorAnnotation& a) {
    const std::string line = annotation_to_json(a).dump() + "\n";
    const int fd = ::open(log.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
    if (fd < 0) throw Error(ErrorCode::IoFailure, io_message(log, "cannot open journal"));
    std::size_t written = 0;
    while (written < line.size()) {
        const ssize_t n = ::write(fd, line.data() + written, line.size() - written);
        if (n < 0) {
            if (errno == EINTR) continue;
            const auto msg = io_message(log, "cannot append to");
            ::close(fd);
            throw Error(ErrorCode::IoFailure, msg);
        }
        written += static_cast<std::size_t>(n);
    }
    if (::fsync(fd) != 0) {
        const auto msg = io_message(log, "cannot fsync");
        ::close(fd);
        throw Error(ErrorCode::IoFailure, msg);
    }
    if (::close(fd) != 0) throw Error(ErrorCode::IoFailure, io_message(log, "cannot close"));
}

std::vector<ErrorAnnotation> read_annotations(const fs::path& log) {
    std::vector<ErrorAnnotation> out;
    std::error_code ec;
    if (!fs::exists(log, ec)) return out;
    const std::string text = read_file(log);
    std::size_t start = 0;
    std::size_t line_no = 0;
    while (start < text.size()) {
        const auto end = text.find('\n', start);
        if (end == std::string::npos) break;  // partially written tail
        ++line_no;
        const std::string line = text.substr(start, end - start);
        start = end + 1;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const fs::path where = log.string() + " line " + std::to_string(line_no);
        out.push_back(annotation_at(parse_json_text(line, where), where));
    }
    return out;
}

void AnnotationJournal::append(const ErrorAnnotation& a) {
    std::lock_guard lock(mutex_);
    append_annotation(path_, a);
}

std::vector<ErrorAnnotation> AnnotationJournal::read() const {
    std::lock_guard lock(mutex_);
    return read_annotations(path_);
}

json to_json(const Rational& r) {
    return {{"num", r.num()}, {"den", r.den()}, {"percent", r.percent(3)}};
}

Rational rational_from_json(const json& j) {
    return Rational(j.at("num").get<std::int64_t>(), j.at("den").get<std::int64_t>());
}

json to_json(const OverlapPartition& p) {
    json images = json::array();
    for (std::size_t i = 0; i < p.image_ids.size(); ++i) {
        images.push_back({{"image_id", p.image_ids[i]}, {"overlap", p.overlap[i]}});
    }
    return {{"format_version", kFormatVersion},
            {"N", p.num_runs},
            {"num_images", p.image_ids.size()},
            {"group_sizes", p.group_sizes},
            {"images", std::move(images)}};
}

OverlapPartition partition_from_json(const json& j) {
    const fs::path where = "partition";
    if (!j.is_object()) malformed(where, "must be an object");
    OverlapPartition p;
    p.num_runs = field<std::size_t>(j, "N", where);
    p.group_sizes.assign(p.num_runs + 1, 0);
    const auto images = j.find("images");
    if (images == j.end() || !images->is_array()) malformed(where, "'images' must be an array");
    std::vector<std::pair<std::string, std::int32_t>> rows;
    for (const auto& item : *images) {
        const auto o = field<std::int32_t>(item, "overlap", where);
        if (o < 0 || static_cast<std::size_t>(o) > p.num_runs) malformed(where, "overlap label out of range");
        rows.emplace_back(field<std::string>(item, "image_id", where), o);
    }
    std::sort(rows.begin(), rows.end());
    for (auto& [id, o] : rows) {
        if (!p.image_ids.empty() && p.image_ids.back() == id) throw Error(ErrorCode::DuplicateImageId, id);
        p.image_ids.push_back(std::move(id));
        p.overlap.push_back(o);
        ++p.group_sizes[static_cast<std::size_t>(o)];
    }
    return p;
}

json to_json(const SubsetCorrectnessTable& t) {
    json subsets = json::array();
    for (std::size_t mask = 0; mask < t.counts.size(); ++mask) {
        json names = json::array();
        for (std::size_t j = 0; j < t.methods.size(); ++j) {
            if (mask & (std::size_t{1} << j)) names.push_back(t.methods[j]);
        }
        subsets.push_back({{"mask", mask}, {"methods", std::move(names)}, {"count", t.counts[mask]}});
    }
    return {{"methods", t.methods}, {"num_images", t.total()}, {"subsets", std::move(subsets)}};
}

json to_json(const EnsembleResult& r) {
    json predictions = json::array();
    for (std::size_t i = 0; i < r.image_ids.size(); ++i) {
        predictions.push_back({{"image_id", r.image_ids[i]}, {"class_index", r.predictions[i]}});
    }
    return {{"rule", to_string(r.rule)},
            {"members", r.member_run_ids},
            {"num_images", r.image_ids.size()},
            {"accuracy", to_json(r.accuracy)},
            {"predictions", std::move(predictions)}};
}

}  // namespace overlap_lab
