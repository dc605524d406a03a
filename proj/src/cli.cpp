#include "overlap_lab/cli.hpp"

#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "overlap_lab/correction.hpp"
#include "overlap_lab/ensemble.hpp"
#include "overlap_lab/error.hpp"
#include "overlap_lab/io.hpp"
#include "overlap_lab/log.hpp"
#include "overlap_lab/overlap.hpp"
#include "overlap_lab/pipeline.hpp"
#include "overlap_lab/report.hpp"
#include "overlap_lab/server.hpp"

namespace overlap_lab::cli {

namespace {

struct Options {
    std::string manifest;
    std::vector<std::string> preds;
    std::string split = "test";
    std::string mode = "avg";
    std::size_t replicates = 0;
    std::string out;
    std::string out_dir;
    int port = kDefaultPort;
    std::string host = "127.0.0.1";
    std::string images_root;
    std::string annotations;
    std::string corrections;
    std::string out_manifest;
    std::string report;
    std::string assets_dir;
    std::int32_t overlap = 0;
};

void emit(const Options& opt, std::ostream& out, const std::string& text) {
    if (opt.out.empty() || opt.out == "-") {
        out << text;
    } else {
        write_file(opt.out, text);
    }
}

void emit_json(const Options& opt, std::ostream& out, const json& j) {
    emit(opt, out, j.dump(2) + "\n");
}

struct Loaded {
    DatasetManifest manifest;
    std::vector<PredictionSet> runs;
    ImageIds images;
};

Loaded load_inputs(const Options& opt, std::size_t min_runs) {
    Loaded in;
    in.manifest = load_manifest(opt.manifest);
    std::vector<std::filesystem::path> dirs(opt.preds.begin(), opt.preds.end());
    in.runs = load_runs(dirs, in.manifest);
    if (in.runs.size() < min_runs) {
        throw Error(ErrorCode::InvalidArgument, "need at least " + std::to_string(min_runs) + " --pred directories");
    }
    in.images = in.manifest.ids_in_split(parse_split(opt.split));
    if (in.images.empty()) throw Error(ErrorCode::EmptyImageSet, "split '" + opt.split + "' has no images");
    log::info("loaded {} runs over {} {} images", in.runs.size(), in.images.size(), opt.split);
    return in;
}

int cmd_validate(const Options& opt, std::ostream& out) {
    const auto manifest = load_manifest(opt.manifest);
    json summary = {{"dataset_id", manifest.dataset_id()},
                    {"num_classes", manifest.num_classes()},
                    {"num_images", manifest.records().size()},
                    {"splits",
                     {{"train", manifest.count_in_split(Split::Train)},
                      {"test", manifest.count_in_split(Split::Test)},
                      {"extra", manifest.count_in_split(Split::Extra)}}}};
    json runs = json::array();
    for (const auto& dir : opt.preds) {
        const auto ps = load_prediction_set(dir, manifest);
        runs.push_back({{"dir", dir}, {"model_id", ps.model_id()}, {"method_id", ps.method_id()},
                        {"replicate_index", ps.replicate_index()}, {"num_images", ps.num_images()}});
    }
    summary["runs"] = std::move(runs);
    if (!opt.corrections.empty()) {
        const auto outcome = apply_corrections(manifest, load_corrections(opt.corrections));
        summary["corrections"] = {{"relabeled", outcome.relabeled.size()}, {"dropped", outcome.dropped.size()}};
    }
    if (!opt.annotations.empty()) summary["annotations"] = read_annotations(opt.annotations).size();
    summary["valid"] = true;
    emit_json(opt, out, summary);
    return kOk;
}

int cmd_overlap(const Options& opt, std::ostream& out) {
    const auto in = load_inputs(opt, 1);
    json j = to_json(overlap_labels(in.manifest, in.runs, in.images));
    json ids = json::array();
    for (const auto& r : in.runs) ids.push_back(r.model_id());
    j["runs"] = std::move(ids);
    j["split"] = opt.split;
    emit_json(opt, out, j);
    return kOk;
}

int cmd_subsets(const Options& opt, std::ostream& out) {
    const auto in = load_inputs(opt, 1);
    emit_json(opt, out, to_json(method_subset_table(in.manifest, as_run_list(in.runs), in.images)));
    return kOk;
}

int cmd_ensemble(const Options& opt, std::ostream& out) {
    const auto in = load_inputs(opt, 1);
    emit_json(opt, out, to_json(run_ensemble(parse_rule(opt.mode), as_run_list(in.runs), in.manifest, in.images)));
    return kOk;
}

int cmd_sweep(const Options& opt, std::ostream& out) {
    const auto in = load_inputs(opt, 1);
    const auto groups = group_by_method(as_run_list(in.runs));
    if (opt.replicates > 0) {
        for (const auto& [method, list] : groups) {
            if (list.size() != opt.replicates) {
                throw Error(ErrorCode::ReplicateCountMismatch, "method '" + method + "' has " +
                                                                   std::to_string(list.size()) + " runs, --replicates " +
                                                                   std::to_string(opt.replicates));
            }
        }
    }
    const auto rule = parse_rule(opt.mode);
    emit_json(opt, out, to_json(sweep_subsets(groups, in.manifest, in.images, rule), rule));
    return kOk;
}

int cmd_remap(const Options& opt, std::ostream& out) {
    const auto manifest = load_manifest(opt.manifest);
    const auto table = load_corrections(opt.corrections);
    const auto outcome = apply_corrections(manifest, table);
    const json report = {{"source", table.source},
                         {"dataset_id", outcome.manifest.dataset_id()},
                         {"relabeled", outcome.relabeled},
                         {"dropped", outcome.dropped},
                         {"remaining", outcome.manifest.records().size()}};
    if (opt.out_manifest.empty()) {
        out << manifest_to_json(outcome.manifest).dump(2) << "\n";
    } else {
        write_manifest(outcome.manifest, opt.out_manifest);
    }
    if (!opt.report.empty()) write_file(opt.report, report.dump(2) + "\n");
    log::info("relabeled {}, dropped {}", outcome.relabeled.size(), outcome.dropped.size());
    return kOk;
}

int cmd_prevalence(const Options& opt, std::ostream& out) {
    const auto in = load_inputs(opt, 1);
    const auto partition = overlap_labels(in.manifest, in.runs, in.images);
    const auto entries = read_annotations(opt.annotations);
    json j = to_json(prevalence(resolve_annotations(entries), export_subset(partition, 0)));
    j["hard_count"] = partition.group_sizes[0];
    emit_json(opt, out, j);
    return kOk;
}

int cmd_report(const Options& opt, std::ostream& out) {
    const auto in = load_inputs(opt, 1);
    std::optional<std::vector<ErrorAnnotation>> entries;
    if (!opt.annotations.empty()) entries = read_annotations(opt.annotations);
    const auto report = build_standard_report(in.manifest, in.runs, in.images, opt.split, entries);
    for (const auto& name : emit_report(report, opt.out_dir)) out << (std::filesystem::path(opt.out_dir) / name).string() << "\n";
    return kOk;
}

int cmd_export_hard(const Options& opt, std::ostream& out) {
    const auto in = load_inputs(opt, 1);
    const auto partition = overlap_labels(in.manifest, in.runs, in.images);
    std::string text;
    for (const auto& id : export_subset(partition, opt.overlap)) text += id + "\n";
    emit(opt, out, text);
    return kOk;
}

int cmd_serve(const Options& opt, std::ostream& out) {
    auto in = load_inputs(opt, 1);
    TriageConfig config;
    config.partition = overlap_labels(in.manifest, in.runs, in.images);
    config.manifest = std::move(in.manifest);
    config.runs = std::move(in.runs);
    config.images_root = opt.images_root;
    config.annotations_path = opt.annotations;
    if (!opt.assets_dir.empty()) config.assets_dir = opt.assets_dir;
    TriageServer server(std::move(config));
    const int port = server.bind(opt.host, opt.port);
    out << "serving on http://" << opt.host << ":" << port << "/" << std::endl;
    server.listen();
    return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    log::init_from_env();
    Options opt;
    CLI::App app{"Prediction-overlap analysis, ensembling and hard-image triage", "overlap_lab"};
    app.require_subcommand(1);

    auto add_manifest = [&](CLI::App* sub) { sub->add_option("--manifest", opt.manifest, "manifest.json")->required(); };
    auto add_preds = [&](CLI::App* sub, bool required) {
        auto* o = sub->add_option("--pred", opt.preds, "prediction-set directories (order preserved)");
        if (required) o->required();
    };
    auto add_split = [&](CLI::App* sub) {
        sub->add_option("--split", opt.split, "image split")->check(CLI::IsMember({"train", "test", "extra"}))->capture_default_str();
    };
    auto add_out = [&](CLI::App* sub) { sub->add_option("--out", opt.out, "output file (default: stdout)"); };
    auto add_mode = [&](CLI::App* sub) {
        sub->add_option("--mode", opt.mode, "ensemble rule")->check(CLI::IsMember({"vote", "avg"}))->capture_default_str();
    };

    auto* validate = app.add_subcommand("validate", "validate inputs and print a summary");
    add_manifest(validate);
    add_preds(validate, false);
    validate->add_option("--corrections", opt.corrections, "corrections.json");
    validate->add_option("--annotations", opt.annotations, "annotations.jsonl");
    add_out(validate);

    auto* overlap = app.add_subcommand("overlap", "per-image overlap labels");
    add_manifest(overlap);
    add_preds(overlap, true);
    add_split(overlap);
    add_out(overlap);

    auto* subsets = app.add_subcommand("subsets", "subset-correctness counts, one run per method");
    add_manifest(subsets);
    add_preds(subsets, true);
    add_split(subsets);
    add_out(subsets);

    auto* ensemble = app.add_subcommand("ensemble", "vote or probability-average ensemble");
    add_manifest(ensemble);
    add_preds(ensemble, true);
    add_split(ensemble);
    add_mode(ensemble);
    add_out(ensemble);

    auto* sweep = app.add_subcommand("sweep", "mean accuracy of disjoint ensembles for every method subset");
    add_manifest(sweep);
    add_preds(sweep, true);
    add_split(sweep);
    add_mode(sweep);
    sweep->add_option("--replicates", opt.replicates, "expected replicates per method");
    add_out(sweep);

    auto* remap = app.add_subcommand("remap", "apply label corrections to a manifest");
    add_manifest(remap);
    remap->add_option("--corrections", opt.corrections, "corrections.json")->required();
    remap->add_option("--out-manifest", opt.out_manifest, "corrected manifest (default: stdout)");
    remap->add_option("--report", opt.report, "relabeled/dropped lists");

    auto* prev = app.add_subcommand("prevalence", "error-class prevalence over the hard subset");
    add_manifest(prev);
    add_preds(prev, true);
    add_split(prev);
    prev->add_option("--annotations", opt.annotations, "annotations.jsonl")->required();
    add_out(prev);

    auto* report = app.add_subcommand("report", "write report.json, tables.csv and SVG charts");
    add_manifest(report);
    add_preds(report, true);
    add_split(report);
    report->add_option("--annotations", opt.annotations, "annotations.jsonl");
    report->add_option("--out-dir", opt.out_dir, "output directory")->required();

    auto* export_hard = app.add_subcommand("export-hard", "list images with a given overlap label (default 0)");
    add_manifest(export_hard);
    add_preds(export_hard, true);
    add_split(export_hard);
    export_hard->add_option("--overlap", opt.overlap, "overlap value")->capture_default_str();
    add_out(export_hard);

    auto* serve = app.add_subcommand("serve", "hard-image triage server");
    add_manifest(serve);
    add_preds(serve, true);
    add_split(serve);
    serve->add_option("--images-root", opt.images_root, "directory holding manifest image paths")->required();
    serve->add_option("--annotations", opt.annotations, "annotations.jsonl")->required();
    serve->add_option("--port", opt.port, "listen port")->capture_default_str();
    serve->add_option("--host", opt.host, "listen address")->capture_default_str();
    serve->add_option("--assets-dir", opt.assets_dir, "static UI bundle");

    std::vector<std::string> argv_storage = args;
    if (argv_storage.empty()) argv_storage.emplace_back("overlap_lab");
    std::vector<char*> argv;
    for (auto& a : argv_storage) argv.push_back(a.data());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return kUsageError;
    }

    try {
        if (*validate) return cmd_validate(opt, out);
        if (*overlap) return cmd_overlap(opt, out);
        if (*subsets) return cmd_subsets(opt, out);
        if (*ensemble) return cmd_ensemble(opt, out);
        if (*sweep) return cmd_sweep(opt, out);
        if (*remap) return cmd_remap(opt, out);
        if (*prev) return cmd_prevalence(opt, out);
        if (*report) return cmd_report(opt, out);
        if (*export_hard) return cmd_export_hard(opt, out);
        if (*serve) return cmd_serve(opt, out);
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kValidationError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kValidationError;
    }
    err << app.help();
    return kUsageError;
}

int run(int argc, char** argv) {
    return run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}

}  // namespace overlap_lab::cli
