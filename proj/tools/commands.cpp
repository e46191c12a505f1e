#include "cli.hpp"

#include "histcad/analysis.hpp"
#include "histcad/constraints.hpp"
#include "histcad/flatten.hpp"
#include "histcad/format.hpp"
#include "histcad/geomexec.hpp"
#include "histcad/nlt.hpp"
#include "histcad/numfmt.hpp"

#include <json.hpp>

#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

namespace histcad::cli {

namespace fs = std::filesystem;

namespace {

Document load_document(const RunConfig& cfg, const std::string& path, std::vector<std::string>* warnings) {
    ParseOptions options;
    options.strict = cfg.strict;
    return parse_document(read_file(path), options, warnings);
}

void log_warnings(const std::string& verb, const std::string& file, const std::vector<std::string>& warnings) {
    for (const auto& w : warnings) log_line("warn", {{"verb", verb}, {"file", file}, {"message", w}});
}

std::string code_of(const Error& e) { return std::string(error_code_name(e.code())); }

void check_distinct_outputs(const RunConfig& cfg, const std::vector<std::string>& files, const std::string& suffix) {
    std::map<fs::path, std::string> seen;
    for (const auto& f : files) {
        const fs::path out = output_path(cfg, f, suffix);
        const auto [it, inserted] = seen.emplace(out, f);
        if (!inserted) throw UsageError(f + " and " + it->second + " would both write " + out.string());
    }
}

std::string summary(std::size_t files, std::size_t bad, const std::string& word) {
    return std::to_string(files) + " files, " + std::to_string(bad) + " " + word;
}

fs::path aggregate_dir(const RunConfig& cfg) { return cfg.out_dir ? fs::path(*cfg.out_dir) : fs::path("."); }

}  // namespace

// ---------------------------------------------------------------------------

int cmd_validate(const RunConfig& cfg) {
    const auto files = expand_inputs(cfg.inputs, ".hcad");
    struct Outcome {
        std::vector<std::string> issues;
        std::vector<std::string> warnings;
    };
    const auto results = parallel_map(files.size(), cfg.jobs, [&](std::size_t i) {
        Outcome o;
        try {
            const Document doc = load_document(cfg, files[i], &o.warnings);
            for (const auto& v : validate_document(doc).violations) {
                std::string line = std::string(violation_code_name(v.code)) + " part " + std::to_string(v.part + 1);
                if (!v.primitive.empty()) line += " " + v.primitive;
                o.issues.push_back(line + ": " + v.message);
            }
            if (cfg.tol && o.issues.empty()) {
                for (std::size_t p = 0; p < doc.parts.size(); ++p) {
                    const SatisfactionReport sat = check_satisfied(doc.parts[p].sketch, *cfg.tol);
                    if (!sat.all_pass()) {
                        o.issues.push_back("UNSATISFIED_CONSTRAINTS part " + std::to_string(p + 1) +
                                           ": max residual " + format_number(sat.max_residual()));
                    }
                }
            }
        } catch (const Error& e) {
            o.issues.push_back(e.what());
        }
        return o;
    });
    std::size_t invalid = 0;
    for (std::size_t i = 0; i < files.size(); ++i) {
        log_warnings("validate", files[i], results[i].warnings);
        if (results[i].issues.empty()) {
            std::cout << files[i] << ": ok\n";
            log_line("info", {{"verb", "validate"}, {"file", files[i]}, {"status", "ok"}});
            continue;
        }
        ++invalid;
        std::cout << files[i] << ": invalid\n";
        for (const auto& issue : results[i].issues) std::cout << "  " << issue << '\n';
        log_line("error", {{"verb", "validate"}, {"file", files[i]}, {"status", "invalid"},
                           {"issues", std::to_string(results[i].issues.size())}});
    }
    std::cout << summary(files.size(), invalid, "invalid") << '\n';
    return invalid ? kExitFailures : kExitClean;
}

// ---------------------------------------------------------------------------

int cmd_flatten(const RunConfig& cfg) {
    const auto files = expand_inputs(cfg.inputs, ".hier");
    check_distinct_outputs(cfg, files, ".hcad");
    struct Outcome {
        std::string error;
        std::string out;
        std::size_t primitives = 0;
        std::size_t constraints = 0;
        std::vector<PruneLogEntry> pruned;
    };
    const auto results = parallel_map(files.size(), cfg.jobs, [&](std::size_t i) {
        Outcome o;
        try {
            const HierarchicalImport data = import_hierarchical(read_file(files[i]));
            const Document doc = flatten_import(data, &o.pruned);
            for (const auto& part : doc.parts) {
                o.primitives += part.sketch.primitives.size();
                o.constraints += part.sketch.constraints.size();
            }
            const fs::path out = output_path(cfg, files[i], ".hcad");
            write_file(out, serialize_document(doc));
            o.out = out.string();
        } catch (const Error& e) {
            o.error = e.what();
        }
        return o;
    });
    std::size_t failed = 0;
    for (std::size_t i = 0; i < files.size(); ++i) {
        const Outcome& o = results[i];
        if (!o.error.empty()) {
            ++failed;
            std::cout << files[i] << ": error " << o.error << '\n';
            log_line("error", {{"verb", "flatten"}, {"file", files[i]}, {"message", o.error}});
            continue;
        }
        std::cout << files[i] << " -> " << o.out << ": " << o.primitives << " primitives, " << o.constraints
                  << " constraints, " << o.pruned.size() << " pruned\n";
        for (const auto& p : o.pruned) {
            std::string refs;
            for (const auto& r : p.constraint.refs) refs += (refs.empty() ? "" : ",") + r.str();
            log_line("info", {{"verb", "flatten"},
                              {"file", files[i]},
                              {"pruned", std::string(constraint_kind_name(p.constraint.kind)) + "(" + refs + ")"},
                              {"reason", p.reason}});
        }
        log_line("info", {{"verb", "flatten"}, {"file", files[i]}, {"status", "ok"}, {"out", o.out}});
    }
    std::cout << summary(files.size(), failed, "failed") << '\n';
    return failed ? kExitFailures : kExitClean;
}

// ---------------------------------------------------------------------------

int cmd_analyze(const RunConfig& cfg) {
    const auto files = expand_inputs(cfg.inputs, ".hcad");
    if (cfg.out_dir) check_distinct_outputs(cfg, files, ".analysis.json");
    struct Outcome {
        std::string error;
        std::string json;
        std::vector<std::string> warnings;
        std::size_t parts = 0, loops = 0, holes = 0, relations = 0;
    };
    const auto results = parallel_map(files.size(), cfg.jobs, [&](std::size_t i) {
        Outcome o;
        try {
            const Document doc = canonicalize(load_document(cfg, files[i], &o.warnings));
            const DocumentAnalysis a = analyze_document(doc);
            o.json = analysis_to_json(a);
            o.parts = a.parts.size();
            for (const auto& p : a.parts) {
                o.loops += p.dict.outers.size();
                o.holes += p.dict.hole_count();
                if (!p.error.empty() && o.error.empty()) o.error = "part " + std::to_string(p.index + 1) + ": " + p.error;
            }
            o.relations = a.relations.entries.size();
            if (cfg.out_dir) write_file(output_path(cfg, files[i], ".analysis.json"), o.json);
        } catch (const Error& e) {
            o.error = e.what();
        }
        return o;
    });
    std::size_t failed = 0;
    for (std::size_t i = 0; i < files.size(); ++i) {
        const Outcome& o = results[i];
        log_warnings("analyze", files[i], o.warnings);
        if (!o.error.empty()) {
            ++failed;
            log_line("error", {{"verb", "analyze"}, {"file", files[i]}, {"message", o.error}});
        } else {
            log_line("info", {{"verb", "analyze"}, {"file", files[i]}, {"status", "ok"}});
        }
        if (cfg.out_dir) {
            std::cout << files[i] << ": " << (o.error.empty() ? "ok" : "error " + o.error) << ", " << o.parts
                      << " parts, " << o.loops << " outer loops, " << o.holes << " holes, " << o.relations
                      << " relations\n";
        } else {
            std::cout << "# " << files[i] << '\n';
            if (!o.json.empty()) std::cout << o.json;
            if (!o.error.empty()) std::cout << "error " << o.error << '\n';
        }
    }
    std::cout << summary(files.size(), failed, "failed") << '\n';
    return failed ? kExitFailures : kExitClean;
}

// ---------------------------------------------------------------------------

int cmd_exec(const RunConfig& cfg) {
    const auto files = expand_inputs(cfg.inputs, ".hcad");
    check_distinct_outputs(cfg, files, ".stl");
    ExecOptions options;
    options.grid_resolution = cfg.grid;
    struct Outcome {
        ExecStatus status;
        double volume = 0.0;
        bool sampled = false;
        std::vector<std::string> warnings;
    };
    const auto results = parallel_map(files.size(), cfg.jobs, [&](std::size_t i) {
        Outcome o;
        try {
            const Document doc = load_document(cfg, files[i], &o.warnings);
            const ExecResult r = execute_document(doc, options);
            o.status = r.status;
            if (r.status.ok) {
                o.volume = r.volume;
                o.sampled = r.sampled;
                write_file(output_path(cfg, files[i], ".stl"), stl_bytes(r.mesh, fs::path(files[i]).filename().string()));
                std::ostringstream xyz;
                write_xyz(xyz, sample_surface(r.mesh));
                write_file(output_path(cfg, files[i], ".xyz"), xyz.str());
            }
        } catch (const Error& e) {
            o.status = {false, code_of(e), 0, e.what()};
        }
        return o;
    });

    std::vector<DocumentMetric> metrics;
    std::string status_log;
    std::size_t failed = 0;
    for (std::size_t i = 0; i < files.size(); ++i) {
        const Outcome& o = results[i];
        log_warnings("exec", files[i], o.warnings);
        std::string line = files[i];
        if (o.status.ok) {
            line += " ok volume=" + format_significant(o.volume, 9) + (o.sampled ? " sampled" : " exact");
            log_line("info", {{"verb", "exec"}, {"file", files[i]}, {"status", "ok"}, {"volume", format_significant(o.volume, 9)}});
        } else {
            ++failed;
            line += " FAILED " + o.status.code + " part=" + std::to_string(o.status.part) + " " + o.status.message;
            log_line("error", {{"verb", "exec"}, {"file", files[i]}, {"code", o.status.code},
                               {"part", std::to_string(o.status.part)}, {"message", o.status.message}});
        }
        status_log += line + '\n';
        metrics.push_back({files[i], o.status, std::nullopt});
    }
    const MetricReport report = summarize_metrics(std::move(metrics));
    const std::string tail = summary(files.size(), failed, "failed") + ", IR " + format_significant(report.invalidity, 6);
    status_log += tail + '\n';
    write_file(aggregate_dir(cfg) / "exec_status.log", status_log);
    std::cout << status_log;
    return failed ? kExitFailures : kExitClean;
}

// ---------------------------------------------------------------------------

namespace {

Pin parse_pin(const std::string& text) {
    const auto eq = text.find('=');
    if (eq == std::string::npos || eq == 0) throw UsageError("pin must look like ID.PARAM=VALUE: " + text);
    try {
        std::size_t used = 0;
        const double value = std::stod(text.substr(eq + 1), &used);
        if (used != text.size() - eq - 1) throw std::invalid_argument("trailing characters");
        return {text.substr(0, eq), value};
    } catch (const std::logic_error&) {
        throw UsageError("pin value is not a number: " + text);
    }
}

std::vector<Pin> read_pins_file(const std::string& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::SyntaxError, path + ": " + e.what());
    }
    if (!j.is_object()) throw Error(ErrorCode::SchemaError, path + ": pins file must be a JSON object");
    std::vector<Pin> pins;
    for (const auto& [k, v] : j.items()) {
        if (!v.is_number()) throw Error(ErrorCode::SchemaError, path + ": pin " + k + " is not a number");
        pins.push_back({k, v.get<double>()});
    }
    return pins;
}

}  // namespace

int cmd_edit(const RunConfig& cfg, std::size_t part, const std::vector<std::string>& pin_args,
             const std::optional<std::string>& pins_file) {
    const auto files = expand_inputs(cfg.inputs, ".hcad");
    if (files.size() != 1) throw UsageError("edit takes exactly one input document");
    std::vector<Pin> pins;
    if (pins_file) pins = read_pins_file(*pins_file);
    for (const auto& p : pin_args) pins.push_back(parse_pin(p));

    std::vector<std::string> warnings;
    Document doc = load_document(cfg, files[0], &warnings);
    log_warnings("edit", files[0], warnings);
    if (part < 1 || part > doc.parts.size()) {
        throw UsageError("--part must be between 1 and " + std::to_string(doc.parts.size()));
    }
    SolveOptions options;
    if (cfg.tol) options.tolerance = *cfg.tol;
    Sketch& sketch = doc.parts[part - 1].sketch;
    const SolveResult result = solve(sketch, pins, options);
    const SolveReport& r = result.report;

    std::cout << "status " << solve_status_name(r.status) << '\n';
    std::cout << "iterations " << r.iterations << '\n';
    std::cout << "variables " << r.variables << ", residuals " << r.residuals << '\n';
    std::cout << "initial max residual " << format_significant(r.initial_max_residual, 6) << '\n';
    std::cout << "final max residual " << format_significant(r.max_residual, 6) << '\n';
    for (const auto& n : r.notes) std::cout << "note " << n << '\n';

    if (r.status == SolveStatus::Infeasible) {
        log_line("error", {{"verb", "edit"}, {"file", files[0]}, {"status", std::string(solve_status_name(r.status))}});
        return kExitFailures;
    }
    sketch = result.sketch;
    const fs::path out = output_path(cfg, files[0], ".edited.hcad");
    write_file(out, serialize_document(doc));
    std::cout << "wrote " << out.string() << '\n';
    log_line(r.status == SolveStatus::Converged ? "info" : "error",
             {{"verb", "edit"}, {"file", files[0]}, {"status", std::string(solve_status_name(r.status))},
              {"out", out.string()}});
    return r.status == SolveStatus::Converged ? kExitClean : kExitFailures;
}

// ---------------------------------------------------------------------------

int cmd_nlt(const RunConfig& cfg) {
    const auto files = expand_inputs(cfg.inputs, ".hcad");
    if (cfg.out_dir) check_distinct_outputs(cfg, files, ".nlt.txt");
    struct Outcome {
        std::string error;
        std::string text;
        std::vector<std::string> warnings;
    };
    const auto results = parallel_map(files.size(), cfg.jobs, [&](std::size_t i) {
        Outcome o;
        try {
            o.text = build_nlt(load_document(cfg, files[i], &o.warnings)).text();
            if (cfg.out_dir) write_file(output_path(cfg, files[i], ".nlt.txt"), o.text);
        } catch (const Error& e) {
            o.error = e.what();
        }
        return o;
    });
    std::size_t failed = 0;
    for (std::size_t i = 0; i < files.size(); ++i) {
        const Outcome& o = results[i];
        log_warnings("nlt", files[i], o.warnings);
        if (!o.error.empty()) {
            ++failed;
            log_line("error", {{"verb", "nlt"}, {"file", files[i]}, {"message", o.error}});
        } else {
            log_line("info", {{"verb", "nlt"}, {"file", files[i]}, {"status", "ok"}});
        }
        if (cfg.out_dir) {
            std::cout << files[i] << ": " << (o.error.empty() ? "ok" : "error " + o.error) << '\n';
        } else {
            std::cout << "# " << files[i] << '\n' << (o.error.empty() ? o.text : "error " + o.error + "\n");
        }
    }
    if (cfg.out_dir) std::cout << summary(files.size(), failed, "failed") << '\n';
    return failed ? kExitFailures : kExitClean;
}

// ---------------------------------------------------------------------------

int cmd_annotate(const RunConfig& cfg, const std::optional<std::string>& log_path) {
    if (cfg.endpoint.empty()) throw UsageError("annotate needs --endpoint (or \"endpoint\" in the config file)");
    const auto task = task_from_name(cfg.task);
    if (!task) throw UsageError("unknown task " + cfg.task);
    const auto files = expand_inputs(cfg.inputs, ".hcad");

    std::vector<std::pair<std::string, Document>> docs;
    std::map<std::string, std::string> parse_errors;
    for (const auto& f : files) {
        try {
            std::vector<std::string> warnings;
            docs.emplace_back(f, load_document(cfg, f, &warnings));
            log_warnings("annotate", f, warnings);
        } catch (const Error& e) {
            parse_errors[f] = e.what();
        }
    }
    HttpChatTransport transport(cfg.endpoint, api_key_from_environment());
    AnnotateOptions options;
    options.model = cfg.model;
    const auto outcomes = annotate_batch(docs, *task, transport, options, cfg.concurrency);

    std::map<std::string, const AnnotationOutcome*> by_name;
    for (const auto& o : outcomes) by_name[o.document] = &o;
    std::vector<AnnotationRecord> records;
    std::size_t failed = 0;
    for (const auto& f : files) {
        std::string error;
        if (const auto pe = parse_errors.find(f); pe != parse_errors.end()) {
            error = pe->second;
        } else if (!by_name.at(f)->record) {
            error = by_name.at(f)->error;
        }
        if (!error.empty()) {
            ++failed;
            std::cout << f << ": error " << error << '\n';
            log_line("error", {{"verb", "annotate"}, {"file", f}, {"message", error}});
            continue;
        }
        const AnnotationRecord& rec = *by_name.at(f)->record;
        records.push_back(rec);
        std::cout << f << ": ok " << rec.request_hash.substr(0, 16) << '\n';
        log_line("info", {{"verb", "annotate"}, {"file", f}, {"task", cfg.task}, {"hash", rec.request_hash},
                          {"attempts", std::to_string(rec.attempts)}});
    }
    const std::string log = log_path ? *log_path : (aggregate_dir(cfg) / "annotations.jsonl").string();
    if (!records.empty()) {
        if (fs::path(log).has_parent_path()) fs::create_directories(fs::path(log).parent_path());
        append_annotation_log(log, records);
    }
    std::cout << summary(files.size(), failed, "failed") << '\n';
    return failed ? kExitFailures : kExitClean;
}

// ---------------------------------------------------------------------------

int cmd_eval(const RunConfig& cfg, const std::string& references) {
    const auto files = expand_inputs(cfg.inputs, ".hcad");
    ExecOptions options;
    options.grid_resolution = cfg.grid;

    std::vector<DocumentMetric> metrics(files.size());
    std::vector<BatchInput> batch;
    std::vector<std::size_t> slot;
    for (std::size_t i = 0; i < files.size(); ++i) {
        metrics[i].name = files[i];
        try {
            std::vector<std::string> warnings;
            BatchInput in{files[i], load_document(cfg, files[i], &warnings), std::nullopt};
            log_warnings("eval", files[i], warnings);
            const std::string stem = fs::path(files[i]).stem().string();
            const fs::path xyz = fs::path(references) / (stem + ".xyz");
            const fs::path stl = fs::path(references) / (stem + ".stl");
            if (fs::is_regular_file(xyz)) {
                std::ifstream stream(xyz);
                in.reference = read_xyz(stream);
            } else if (fs::is_regular_file(stl)) {
                in.reference = sample_surface(read_stl(read_file(stl.string())));
            } else {
                log_line("warn", {{"verb", "eval"}, {"file", files[i]}, {"message", "no reference found"}});
            }
            batch.push_back(std::move(in));
            slot.push_back(i);
        } catch (const Error& e) {
            metrics[i].status = {false, code_of(e), 0, e.what()};
        }
    }
    const MetricReport partial = batch_metrics(batch, options, cfg.jobs);
    for (std::size_t k = 0; k < slot.size(); ++k) metrics[slot[k]] = partial.documents[k];
    const MetricReport report = summarize_metrics(std::move(metrics));

    const double scale = MetricReport::kDisplayScale;
    std::size_t failed = 0;
    nlohmann::ordered_json per_doc = nlohmann::ordered_json::array();
    for (const auto& d : report.documents) {
        nlohmann::ordered_json j;
        j["name"] = d.name;
        j["ok"] = d.status.ok;
        if (d.status.ok) {
            std::cout << d.name << " ok";
            if (d.chamfer) std::cout << " cd=" << format_significant(*d.chamfer * scale, 6);
            std::cout << '\n';
        } else {
            ++failed;
            j["code"] = d.status.code;
            j["part"] = d.status.part;
            std::cout << d.name << " FAILED " << d.status.code << " part=" << d.status.part << '\n';
            log_line("error", {{"verb", "eval"}, {"file", d.name}, {"code", d.status.code}, {"message", d.status.message}});
        }
        j["chamfer"] = d.chamfer ? nlohmann::ordered_json(*d.chamfer) : nlohmann::ordered_json(nullptr);
        per_doc.push_back(j);
    }
    const auto opt = [&](const std::optional<double>& v) { return v ? format_significant(*v * scale, 6) : "n/a"; };
    std::cout << "documents " << report.documents.size() << ", failed " << failed << ", IR "
              << format_significant(report.invalidity, 6) << '\n';
    std::cout << "CD x" << format_number(scale) << ": avg " << opt(report.average_chamfer) << ", median "
              << opt(report.median_chamfer) << '\n';

    nlohmann::ordered_json summary_json;
    summary_json["documents"] = report.documents.size();
    summary_json["failed"] = failed;
    summary_json["invalidity_ratio"] = report.invalidity;
    summary_json["average_chamfer"] =
        report.average_chamfer ? nlohmann::ordered_json(*report.average_chamfer) : nlohmann::ordered_json(nullptr);
    summary_json["median_chamfer"] =
        report.median_chamfer ? nlohmann::ordered_json(*report.median_chamfer) : nlohmann::ordered_json(nullptr);
    summary_json["display_scale"] = scale;
    summary_json["per_document"] = per_doc;
    write_file(aggregate_dir(cfg) / "metrics.json", summary_json.dump(2) + "\n");
    return failed ? kExitFailures : kExitClean;
}

}  // namespace histcad::cli
