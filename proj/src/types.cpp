#include "overlap_lab/types.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>

#include "overlap_lab/error.hpp"

namespace overlap_lab {

ClassVocabulary::ClassVocabulary(std::vector<std::string> names) : names_(std::move(names)) {
    if (names_.size() < 2) {
        throw Error(ErrorCode::InvalidManifest, "class vocabulary needs at least 2 classes, got " +
                                                    std::to_string(names_.size()));
    }
    for (std::size_t i = 0; i < names_.size(); ++i) {
        if (!index_.emplace(names_[i], static_cast<ClassIndex>(i)).second) {
            throw Error(ErrorCode::InvalidManifest, "duplicate class name '" + names_[i] + "'");
        }
    }
}

std::optional<ClassIndex> ClassVocabulary::index_of(std::string_view name) const {
    auto it = index_.find(std::string(name));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

std::string_view to_string(Split split) {
    switch (split) {
        case Split::Train: return "train";
        case Split::Test: return "test";
        case Split::Extra: return "extra";
    }
    return "extra";
}

Split parse_split(std::string_view text) {
    if (text == "train") return Split::Train;
    if (text == "test") return Split::Test;
    return Split::Extra;
}

DatasetManifest::DatasetManifest(std::string dataset_id, ClassVocabulary vocabulary, std::vector<ImageRecord> records)
    : dataset_id_(std::move(dataset_id)), vocabulary_(std::move(vocabulary)), records_(std::move(records)) {
    position_.reserve(records_.size());
    for (std::size_t i = 0; i < records_.size(); ++i) {
        const auto& r = records_[i];
        if (r.image_id.empty()) {
            throw Error(ErrorCode::InvalidManifest, "record " + std::to_string(i) + " has an empty image_id");
        }
        if (!position_.emplace(r.image_id, i).second) {
            throw Error(ErrorCode::DuplicateImageId, r.image_id);
        }
        if (r.label_index < 0 || static_cast<std::size_t>(r.label_index) >= vocabulary_.size()) {
            throw Error(ErrorCode::LabelOutOfRange, r.image_id + " has label_index " + std::to_string(r.label_index) +
                                                        " (C=" + std::to_string(vocabulary_.size()) + ")");
        }
    }
}

const ImageRecord* DatasetManifest::find(std::string_view image_id) const {
    auto it = position_.find(std::string(image_id));
    return it == position_.end() ? nullptr : &records_[it->second];
}

const ImageRecord& DatasetManifest::at(std::string_view image_id) const {
    const ImageRecord* r = find(image_id);
    if (r == nullptr) throw Error(ErrorCode::UnknownImageId, std::string(image_id));
    return *r;
}

ImageIds DatasetManifest::ids_in_split(Split split) const {
    ImageIds ids;
    for (const auto& r : records_) {
        if (r.split == split) ids.push_back(r.image_id);
    }
    std::sort(ids.begin(), ids.end());
    return ids;
}

std::size_t DatasetManifest::count_in_split(Split split) const {
    return static_cast<std::size_t>(
        std::count_if(records_.begin(), records_.end(), [split](const ImageRecord& r) { return r.split == split; }));
}

PredictionSet::PredictionSet(RunIdentity identity, ImageIds image_ids, std::vector<float> scores,
                             std::size_t num_classes)
    : identity_(std::move(identity)),
      image_ids_(std::move(image_ids)),
      scores_(std::move(scores)),
      num_classes_(num_classes) {
    if (num_classes_ == 0 || scores_.size() != image_ids_.size() * num_classes_) {
        throw Error(ErrorCode::SizeMismatch, "run '" + identity_.model_id + "': " + std::to_string(scores_.size()) +
                                                 " scores for " + std::to_string(image_ids_.size()) + " images x " +
                                                 std::to_string(num_classes_) + " classes");
    }
    for (std::size_t i = 0; i < scores_.size(); ++i) {
        if (!std::isfinite(scores_[i])) {
            throw Error(ErrorCode::NonFiniteScore, "run '" + identity_.model_id + "' row " +
                                                       std::to_string(i / num_classes_) + " column " +
                                                       std::to_string(i % num_classes_));
        }
    }
    row_of_.reserve(image_ids_.size());
    for (std::size_t r = 0; r < image_ids_.size(); ++r) {
        if (!row_of_.emplace(image_ids_[r], r).second) {
            throw Error(ErrorCode::DuplicateImageId, image_ids_[r] + " in run '" + identity_.model_id + "'");
        }
    }
}

std::optional<std::size_t> PredictionSet::find_row(std::string_view image_id) const {
    auto it = row_of_.find(std::string(image_id));
    if (it == row_of_.end()) return std::nullopt;
    return it->second;
}

bool operator==(const PredictionSet& a, const PredictionSet& b) {
    if (!(a.identity_ == b.identity_) || a.num_classes_ != b.num_classes_ || a.image_ids_ != b.image_ids_ ||
        a.scores_.size() != b.scores_.size()) {
        return false;
    }
    // bit patterns, so -0.0f and 0.0f differ
    return std::equal(a.scores_.begin(), a.scores_.end(), b.scores_.begin(), [](float x, float y) {
        return std::bit_cast<std::uint32_t>(x) == std::bit_cast<std::uint32_t>(y);
    });
}

std::optional<std::int32_t> OverlapPartition::label(std::string_view image_id) const {
    auto it = std::lower_bound(image_ids.begin(), image_ids.end(), image_id);
    if (it == image_ids.end() || *it != image_id) return std::nullopt;
    return overlap[static_cast<std::size_t>(it - image_ids.begin())];
}

std::uint64_t SubsetCorrectnessTable::total() const {
    std::uint64_t sum = 0;
    for (auto c : counts) sum += c;
    return sum;
}

std::string_view to_string(EnsembleRule rule) {
    return rule == EnsembleRule::Vote ? "vote" : "cp_avg";
}

EnsembleRule parse_rule(std::string_view text) {
    if (text == "vote") return EnsembleRule::Vote;
    if (text == "cp_avg" || text == "avg" || text == "cp-avg") return EnsembleRule::CpAvg;
    throw Error(ErrorCode::InvalidArgument, "unknown ensemble rule '" + std::string(text) + "'");
}

std::string_view to_string(ErrorClass c) {
    switch (c) {
        case ErrorClass::SimilarClassConfusion: return "SimilarClassConfusion";
        case ErrorClass::NonTargetSubject: return "NonTargetSubject";
        case ErrorClass::InadequateRepresentation: return "InadequateRepresentation";
        case ErrorClass::PoorQuality: return "PoorQuality";
        case ErrorClass::Other: return "Other";
    }
    return "Other";
}

ErrorClass parse_error_class(std::string_view text) {
    for (ErrorClass c : kAllErrorClasses) {
        if (to_string(c) == text) return c;
    }
    throw Error(ErrorCode::InvalidErrorClass, "'" + std::string(text) + "'");
}

UtcMillis UtcMillis::now() {
    using namespace std::chrono;
    return {duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count()};
}

std::string format_rfc3339(UtcMillis t) {
    std::int64_t secs = t.ms / 1000;
    std::int64_t millis = t.ms % 1000;
    if (millis < 0) {
        millis += 1000;
        secs -= 1;
    }
    const std::time_t tt = static_cast<std::time_t>(secs);
    std::tm tm{};
    gmtime_r(&tt, &tm);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", tm.tm_year + 1900, tm.tm_mon + 1,
                  tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec, static_cast<int>(millis));
    return buf;
}

UtcMillis parse_rfc3339(std::string_view text) {
    const auto fail = [&] { return Error(ErrorCode::InvalidArgument, "bad RFC3339 UTC timestamp '" + std::string(text) + "'"); };
    auto digits = [&](std::size_t pos, std::size_t n) {
        if (pos + n > text.size()) throw fail();
        int v = 0;
        for (std::size_t i = pos; i < pos + n; ++i) {
            if (text[i] < '0' || text[i] > '9') throw fail();
            v = v * 10 + (text[i] - '0');
        }
        return v;
    };
    auto expect = [&](std::size_t pos, char c) {
        if (pos >= text.size() || text[pos] != c) throw fail();
    };
    std::tm tm{};
    tm.tm_year = digits(0, 4) - 1900;
    expect(4, '-');
    tm.tm_mon = digits(5, 2) - 1;
    expect(7, '-');
    tm.tm_mday = digits(8, 2);
    if (text.size() < 11 || (text[10] != 'T' && text[10] != 't')) throw fail();
    tm.tm_hour = digits(11, 2);
    expect(13, ':');
    tm.tm_min = digits(14, 2);
    expect(16, ':');
    tm.tm_sec = digits(17, 2);
    if (tm.tm_mon > 11 || tm.tm_mday < 1 || tm.tm_mday > 31 || tm.tm_hour > 23 || tm.tm_min > 59 || tm.tm_sec > 60) {
        throw fail();
    }
    std::size_t pos = 19;
    int millis = 0;
    if (pos < text.size() && text[pos] == '.') {
        ++pos;
        int n = 0;
        while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') {
            if (n < 3) millis = millis * 10 + (text[pos] - '0');
            ++n;
            ++pos;
        }
        if (n == 0) throw fail();
        for (int i = n; i < 3; ++i) millis *= 10;
    }
    if (pos + 1 != text.size() || (text[pos] != 'Z' && text[pos] != 'z')) throw fail();
    const std::int64_t secs = timegm(&tm);
    return {secs * 1000 + millis};
}

}  // namespace overlap_lab
