#include "overlap_lab/report.hpp"

#include <algorithm>
#include <cstdio>
#include <set>

#include "overlap_lab/ensemble.hpp"
#include "overlap_lab/error.hpp"
#include "overlap_lab/io.hpp"

namespace overlap_lab {

using nlohmann::json;

std::map<std::string, ErrorAnnotation> resolve_annotations(const std::vector<ErrorAnnotation>& entries) {
    std::map<std::string, ErrorAnnotation> resolved;
    for (const auto& a : entries) {
        auto it = resolved.find(a.image_id);
        if (it == resolved.end()) {
            resolved.emplace(a.image_id, a);
        } else if (a.timestamp >= it->second.timestamp) {
            it->second = a;
        }
    }
    return resolved;
}

std::map<std::string, std::map<std::string, ErrorClass>> annotation_disagreements(
    const std::vector<ErrorAnnotation>& entries) {
    std::map<std::string, std::map<std::string, ErrorAnnotation>> latest;
    for (const auto& a : entries) {
        auto& per_annotator = latest[a.image_id];
        auto it = per_annotator.find(a.annotator);
        if (it == per_annotator.end()) {
            per_annotator.emplace(a.annotator, a);
        } else if (a.timestamp >= it->second.timestamp) {
            it->second = a;
        }
    }
    std::map<std::string, std::map<std::string, ErrorClass>> out;
    for (const auto& [image, per_annotator] : latest) {
        std::set<ErrorClass> classes;
        for (const auto& [annotator, a] : per_annotator) classes.insert(a.error_class);
        if (classes.size() < 2) continue;
        auto& row = out[image];
        for (const auto& [annotator, a] : per_annotator) row.emplace(annotator, a.error_class);
    }
    return out;
}

double Prevalence::percent(ErrorClass c) const {
    if (annotated == 0) return 0.0;
    return 100.0 * static_cast<double>(count(c)) / static_cast<double>(annotated);
}

std::optional<Rational> Prevalence::fraction(ErrorClass c) const {
    if (annotated == 0) return std::nullopt;
    return Rational(static_cast<std::int64_t>(count(c)), static_cast<std::int64_t>(annotated));
}

Prevalence prevalence(const std::map<std::string, ErrorAnnotation>& resolved, const ImageIds& hard) {
    const std::set<std::string> hard_set(hard.begin(), hard.end());
    Prevalence p;
    for (const auto& [image, a] : resolved) {
        if (!hard_set.contains(image)) {
            p.stray.push_back(image);
            continue;
        }
        ++p.counts[static_cast<std::size_t>(a.error_class)];
        ++p.annotated;
    }
    p.unannotated = hard_set.size() - p.annotated;
    return p;
}

json to_json(const Prevalence& p) {
    json classes = json::array();
    for (ErrorClass c : kAllErrorClasses) {
        const auto f = p.fraction(c);
        classes.push_back({{"error_class", to_string(c)},
                           {"count", p.count(c)},
                           {"percent", p.percent(c)},
                           {"percent_text", f ? f->percent(2) : std::string("0.00")}});
    }
    return {{"annotated", p.annotated}, {"unannotated", p.unannotated}, {"stray", p.stray}, {"classes", std::move(classes)}};
}

namespace {

std::string fixed3(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

std::string xml_escape(std::string_view text) {
    std::string out;
    for (char ch : text) {
        switch (ch) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\'': out += "&apos;"; break;
            default: out += ch;
        }
    }
    return out;
}

std::string csv_field(std::string_view text) {
    if (text.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(text);
    std::string out = "\"";
    for (char ch : text) {
        if (ch == '"') out += '"';
        out += ch;
    }
    return out + "\"";
}

// Easy (o = N) is green, hard (o = 0) is red.
std::string segment_color(std::size_t o, std::size_t n) {
    const int easy[3] = {0x2e, 0x7d, 0x32};
    const int hard[3] = {0xc6, 0x28, 0x28};
    char buf[8];
    int rgb[3];
    for (int k = 0; k < 3; ++k) {
        const auto num = static_cast<long>(easy[k]) * static_cast<long>(o) + static_cast<long>(hard[k]) * static_cast<long>(n - o);
        rgb[k] = n == 0 ? easy[k] : static_cast<int>((2 * num + static_cast<long>(n)) / (2 * static_cast<long>(n)));
    }
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", rgb[0], rgb[1], rgb[2]);
    return buf;
}

std::string subset_label(const std::vector<std::string>& methods, std::size_t mask) {
    if (mask == 0) return "{}";
    std::string out;
    for (std::size_t j = 0; j < methods.size(); ++j) {
        if (!(mask & (std::size_t{1} << j))) continue;
        if (!out.empty()) out += '+';
        out += methods[j];
    }
    return out;
}

std::string svg_open(double width, double height) {
    return "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
           "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" +
           fixed3(width) + "\" height=\"" + fixed3(height) + "\" viewBox=\"0 0 " + fixed3(width) + " " +
           fixed3(height) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
}

json grid_json(const AccuracyGrid& g) {
    json cells = json::array();
    for (std::size_t r = 0; r < g.rows.size(); ++r) {
        json row = json::array();
        for (std::size_t c = 0; c < g.columns.size(); ++c) {
            const auto& v = g.at(r, c);
            row.push_back(v ? to_json(*v) : json(nullptr));
        }
        cells.push_back(std::move(row));
    }
    return {{"name", g.name}, {"rows", g.rows}, {"columns", g.columns}, {"cells", std::move(cells)}};
}

}  // namespace

std::vector<double> segment_widths(const std::vector<std::size_t>& group_sizes, double bar_width) {
    std::size_t total = 0;
    for (auto g : group_sizes) total += g;
    std::vector<double> widths;
    widths.reserve(group_sizes.size());
    for (std::size_t k = group_sizes.size(); k-- > 0;) {
        widths.push_back(total == 0 ? 0.0
                                    : bar_width * static_cast<double>(group_sizes[k]) / static_cast<double>(total));
    }
    return widths;
}

std::string overlap_chart_svg(const std::vector<OverlapSection>& sections, const ChartOptions& opt) {
    std::size_t max_runs = 0;
    for (const auto& s : sections) max_runs = std::max(max_runs, s.partition.num_runs);
    const double row_h = opt.bar_height + 8.0;
    const double legend_h = 28.0;
    const double width = opt.label_width + opt.bar_width + 20.0;
    const double height = 10.0 + row_h * static_cast<double>(sections.size()) + legend_h;

    std::string svg = svg_open(width, height);
    svg += "<title>Prediction overlap</title>\n";
    for (std::size_t i = 0; i < sections.size(); ++i) {
        const auto& p = sections[i].partition;
        const double y = 10.0 + row_h * static_cast<double>(i);
        svg += "<g class=\"bar\" data-name=\"" + xml_escape(sections[i].name) + "\">\n";
        svg += "<text x=\"" + fixed3(opt.label_width - 8.0) + "\" y=\"" + fixed3(y + opt.bar_height * 0.7) +
               "\" text-anchor=\"end\">" + xml_escape(sections[i].name) + "</text>\n";
        const auto widths = segment_widths(p.group_sizes, opt.bar_width);
        double x = opt.label_width;
        for (std::size_t s = 0; s < widths.size(); ++s) {
            const std::size_t o = p.num_runs - s;
            svg += "<rect x=\"" + fixed3(x) + "\" y=\"" + fixed3(y) + "\" width=\"" + fixed3(widths[s]) +
                   "\" height=\"" + fixed3(opt.bar_height) + "\" fill=\"" + segment_color(o, p.num_runs) +
                   "\" data-overlap=\"" + std::to_string(o) + "\" data-count=\"" + std::to_string(p.group_sizes[o]) +
                   "\"><title>o=" + std::to_string(o) + ": " + std::to_string(p.group_sizes[o]) + "</title></rect>\n";
            x += widths[s];
        }
        svg += "</g>\n";
    }
    const double ly = 10.0 + row_h * static_cast<double>(sections.size()) + 4.0;
    for (std::size_t s = 0; s <= max_runs; ++s) {
        const std::size_t o = max_runs - s;
        const double lx = opt.label_width + 60.0 * static_cast<double>(s);
        svg += "<rect x=\"" + fixed3(lx) + "\" y=\"" + fixed3(ly) + "\" width=\"12.000\" height=\"12.000\" fill=\"" +
               segment_color(o, max_runs) + "\"/>\n";
        svg += "<text x=\"" + fixed3(lx + 16.0) + "\" y=\"" + fixed3(ly + 10.0) + "\">o=" + std::to_string(o) +
               "</text>\n";
    }
    svg += "</svg>\n";
    return svg;
}

std::string subset_chart_svg(const SubsetSection& section, const ChartOptions& opt) {
    const auto& t = section.table;
    std::uint64_t peak = 0;
    for (auto c : t.counts) peak = std::max(peak, c);
    const double row_h = 18.0;
    const double width = opt.label_width + opt.bar_width + 80.0;
    const double height = 30.0 + row_h * static_cast<double>(t.counts.size());

    std::string svg = svg_open(width, height);
    svg += "<title>" + xml_escape(section.name) + "</title>\n";
    svg += "<text x=\"10.000\" y=\"18.000\">" + xml_escape(section.name) + "</text>\n";
    for (std::size_t mask = 0; mask < t.counts.size(); ++mask) {
        const double y = 26.0 + row_h * static_cast<double>(mask);
        const double w = peak == 0 ? 0.0 : opt.bar_width * static_cast<double>(t.counts[mask]) / static_cast<double>(peak);
        const std::string label = subset_label(t.methods, mask);
        svg += "<text x=\"" + fixed3(opt.label_width - 8.0) + "\" y=\"" + fixed3(y + 12.0) + "\" text-anchor=\"end\">" +
               xml_escape(label) + "</text>\n";
        svg += "<rect x=\"" + fixed3(opt.label_width) + "\" y=\"" + fixed3(y) + "\" width=\"" + fixed3(w) +
               "\" height=\"14.000\" fill=\"" + (mask == 0 ? std::string("#c62828") : std::string("#1565c0")) +
               "\" data-mask=\"" + std::to_string(mask) + "\"/>\n";
        svg += "<text x=\"" + fixed3(opt.label_width + w + 4.0) + "\" y=\"" + fixed3(y + 12.0) + "\">" +
               std::to_string(t.counts[mask]) + "</text>\n";
    }
    svg += "</svg>\n";
    return svg;
}

json report_json(const ReportInput& input) {
    json out;
    out["format_version"] = kFormatVersion;
    out["metadata"] = input.metadata;

    json overlaps = json::array();
    for (const auto& s : input.overlaps) {
        json section = {{"name", s.name}, {"partition", to_json(s.partition)}};
        if (!s.partition.image_ids.empty()) {
            section["oracle_upper_bound"] = to_json(oracle_upper_bound(s.partition));
        }
        overlaps.push_back(std::move(section));
    }
    out["overlap"] = std::move(overlaps);

    json subsets = json::array();
    for (const auto& s : input.subsets) subsets.push_back({{"name", s.name}, {"table", to_json(s.table)}});
    out["subsets"] = std::move(subsets);

    json grids = json::array();
    for (const auto& g : input.grids) grids.push_back(grid_json(g));
    out["accuracy_grids"] = std::move(grids);

    json ensembles = json::array();
    for (const auto& e : input.ensembles) ensembles.push_back({{"name", e.name}, {"result", to_json(e.result)}});
    out["ensembles"] = std::move(ensembles);

    if (input.prevalence) {
        json disagreements = json::object();
        for (const auto& [image, by_annotator] : input.prevalence->disagreements) {
            json row = json::object();
            for (const auto& [annotator, c] : by_annotator) row[annotator] = to_string(c);
            disagreements[image] = std::move(row);
        }
        out["prevalence"] = {{"name", input.prevalence->name},
                             {"report", to_json(input.prevalence->prevalence)},
                             {"disagreements", std::move(disagreements)}};
    } else {
        out["prevalence"] = nullptr;
    }
    return out;
}

std::string report_csv(const ReportInput& input) {
    std::string csv = "section,table,row,column,value\r\n";
    auto row = [&csv](std::string_view section, std::string_view table, std::string_view r, std::string_view c,
                      std::string_view v) {
        csv += csv_field(section) + "," + csv_field(table) + "," + csv_field(r) + "," + csv_field(c) + "," +
               csv_field(v) + "\r\n";
    };
    for (const auto& s : input.overlaps) {
        for (std::size_t k = s.partition.group_sizes.size(); k-- > 0;) {
            row("overlap", s.name, "o=" + std::to_string(k), "count", std::to_string(s.partition.group_sizes[k]));
        }
    }
    for (const auto& s : input.subsets) {
        for (std::size_t mask = 0; mask < s.table.counts.size(); ++mask) {
            row("subsets", s.name, subset_label(s.table.methods, mask), "count", std::to_string(s.table.counts[mask]));
        }
    }
    for (const auto& g : input.grids) {
        for (std::size_t r = 0; r < g.rows.size(); ++r) {
            for (std::size_t c = 0; c < g.columns.size(); ++c) {
                const auto& v = g.at(r, c);
                row("accuracy", g.name, g.rows[r], g.columns[c], v ? v->percent(3) : "");
            }
        }
    }
    for (const auto& e : input.ensembles) {
        row("ensemble", e.name, to_string(e.result.rule), "accuracy", e.result.accuracy.percent(3));
    }
    if (input.prevalence) {
        const auto& p = input.prevalence->prevalence;
        for (ErrorClass c : kAllErrorClasses) {
            const auto f = p.fraction(c);
            row("prevalence", input.prevalence->name, to_string(c), "count", std::to_string(p.count(c)));
            row("prevalence", input.prevalence->name, to_string(c), "percent", f ? f->percent(2) : "0.00");
        }
        row("prevalence", input.prevalence->name, "unannotated", "count", std::to_string(p.unannotated));
    }
    return csv;
}

std::map<std::string, std::string> render_report(const ReportInput& input, const ChartOptions& options) {
    if (input.empty()) throw Error(ErrorCode::InvalidArgument, "report has no sections");
    std::map<std::string, std::string> files;
    files["report.json"] = report_json(input).dump(2) + "\n";
    files["tables.csv"] = report_csv(input);
    if (!input.overlaps.empty()) files["chart-overlap.svg"] = overlap_chart_svg(input.overlaps, options);
    for (std::size_t i = 0; i < input.subsets.size(); ++i) {
        files["chart-subsets-" + std::to_string(i + 1) + ".svg"] = subset_chart_svg(input.subsets[i], options);
    }
    return files;
}

std::vector<std::string> emit_report(const ReportInput& input, const std::filesystem::path& out_dir,
                                     const ChartOptions& options) {
    const auto files = render_report(input, options);
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw Error(ErrorCode::IoFailure, "cannot create '" + out_dir.string() + "': " + ec.message());
    std::vector<std::string> names;
    for (const auto& [name, content] : files) {
        write_file(out_dir / name, content);
        names.push_back(name);
    }
    return names;
}

}  // namespace overlap_lab
