#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "overlap_lab/types.hpp"

namespace overlap_lab {

// Per image, the entry with the latest timestamp; equal timestamps resolve to
// the later journal position.
std::map<std::string, ErrorAnnotation> resolve_annotations(const std::vector<ErrorAnnotation>& entries);

// Images whose annotators (latest entry per annotator) disagree on the class.
std::map<std::string, std::map<std::string, ErrorClass>> annotation_disagreements(
    const std::vector<ErrorAnnotation>& entries);

struct Prevalence {
    std::array<std::uint64_t, kNumErrorClasses> counts{};
    std::uint64_t annotated = 0;    // resolved annotations on hard images
    std::uint64_t unannotated = 0;  // hard images without an annotation
    ImageIds stray;                 // annotated images outside the hard set

    std::uint64_t count(ErrorClass c) const { return counts[static_cast<std::size_t>(c)]; }
    // Share of annotated hard images, in percent; 0 when nothing is annotated.
    double percent(ErrorClass c) const;
    std::optional<Rational> fraction(ErrorClass c) const;
};

Prevalence prevalence(const std::map<std::string, ErrorAnnotation>& resolved, const ImageIds& hard);

nlohmann::json to_json(const Prevalence& p);

struct OverlapSection {
    std::string name;
    OverlapPartition partition;
};

struct SubsetSection {
    std::string name;
    SubsetCorrectnessTable table;
};

// Row-major grid of accuracies, e.g. {Single, Vote, cp-Avg} x methods.
struct AccuracyGrid {
    std::string name;
    std::vector<std::string> rows;
    std::vector<std::string> columns;
    std::vector<std::optional<Rational>> cells;

    const std::optional<Rational>& at(std::size_t r, std::size_t c) const { return cells.at(r * columns.size() + c); }
};

struct EnsembleSection {
    std::string name;
    EnsembleResult result;
};

struct PrevalenceSection {
    std::string name;
    Prevalence prevalence;
    std::map<std::string, std::map<std::string, ErrorClass>> disagreements;
};

struct ReportInput {
    std::map<std::string, std::string> metadata;
    std::vector<OverlapSection> overlaps;
    std::vector<SubsetSection> subsets;
    std::vector<AccuracyGrid> grids;
    std::vector<EnsembleSection> ensembles;
    std::optional<PrevalenceSection> prevalence;

    bool empty() const {
        return overlaps.empty() && subsets.empty() && grids.empty() && ensembles.empty() && !prevalence;
    }
};

struct ChartOptions {
    double bar_width = 600.0;
    double bar_height = 24.0;
    double label_width = 180.0;
};

// Widths of the o = N..0 segments of one bar; they sum to `bar_width`.
std::vector<double> segment_widths(const std::vector<std::size_t>& group_sizes, double bar_width);

std::string overlap_chart_svg(const std::vector<OverlapSection>& sections, const ChartOptions& options = {});
std::string subset_chart_svg(const SubsetSection& section, const ChartOptions& options = {});

nlohmann::json report_json(const ReportInput& input);
std::string report_csv(const ReportInput& input);

// File name -> contents. Pure and byte-deterministic.
std::map<std::string, std::string> render_report(const ReportInput& input, const ChartOptions& options = {});

// Writes report.json, tables.csv and chart-*.svg into `out_dir`; returns the names written.
std::vector<std::string> emit_report(const ReportInput& input, const std::filesystem::path& out_dir,
                                     const ChartOptions& options = {});

}  // namespace overlap_lab
