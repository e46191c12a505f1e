#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <iostream>

namespace {

using histcad::cli::RunConfig;

/// Keys of the optional JSON config file; command-line flags win.
void apply_config_file(const std::string& path, RunConfig& cfg) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(histcad::cli::read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw histcad::cli::UsageError("config " + path + ": " + e.what());
    }
    if (!j.is_object()) throw histcad::cli::UsageError("config " + path + " must be a JSON object");
    try {
        for (const auto& [key, value] : j.items()) {
            if (key == "out") cfg.out_dir = value.get<std::string>();
            else if (key == "jobs") cfg.jobs = value.get<std::size_t>();
            else if (key == "strict") cfg.strict = value.get<bool>();
            else if (key == "tol") cfg.tol = value.get<double>();
            else if (key == "grid") cfg.grid = value.get<int>();
            else if (key == "task") cfg.task = value.get<std::string>();
            else if (key == "endpoint") cfg.endpoint = value.get<std::string>();
            else if (key == "model") cfg.model = value.get<std::string>();
            else if (key == "concurrency") cfg.concurrency = value.get<std::size_t>();
            else throw histcad::cli::UsageError("config " + path + ": unknown key " + key);
        }
    } catch (const nlohmann::json::exception& e) {
        throw histcad::cli::UsageError("config " + path + ": " + e.what());
    }
}

struct Flags {
    std::vector<std::string> inputs;
    std::string out;
    std::size_t jobs = 1;
    bool strict = false;
    double tol = 0.0;
    int grid = 256;
    std::string task = "process";
    std::string endpoint;
    std::string model;
    std::string config;
};

struct Registered {
    CLI::App* app;
    Flags flags;
    std::map<std::string, CLI::Option*> options;
};

void add_common(Registered& r, bool exec_flags, bool nlt_flags) {
    CLI::App* app = r.app;
    Flags& f = r.flags;
    r.options["out"] = app->add_option("--out", f.out, "Output directory");
    r.options["jobs"] = app->add_option("--jobs", f.jobs, "Worker threads")->check(CLI::PositiveNumber);
    r.options["strict"] = app->add_flag("--strict", f.strict, "Reject unknown fields in input documents");
    r.options["tol"] = app->add_option("--tol", f.tol, "Constraint tolerance")->check(CLI::PositiveNumber);
    r.options["config"] = app->add_option("--config", f.config, "JSON config file")->check(CLI::ExistingFile);
    if (exec_flags) {
        r.options["grid"] = app->add_option("--grid", f.grid, "Boolean grid resolution")->check(CLI::Range(8, 2048));
    }
    if (nlt_flags) {
        r.options["task"] = app->add_option("--task", f.task, "Annotation task")
                                ->check(CLI::IsMember({"process", "structure", "function"}));
        r.options["endpoint"] = app->add_option("--endpoint", f.endpoint, "Chat completion URL");
        r.options["model"] = app->add_option("--model", f.model, "Model name sent to the endpoint");
    }
    app->add_option("inputs", f.inputs, "Input files, directories or globs")->required();
}

RunConfig resolve(const Registered& r) {
    RunConfig cfg;
    const Flags& f = r.flags;
    if (!f.config.empty()) apply_config_file(f.config, cfg);
    const auto given = [&](const char* name) {
        const auto it = r.options.find(name);
        return it != r.options.end() && it->second->count() > 0;
    };
    cfg.inputs = f.inputs;
    if (given("out")) cfg.out_dir = f.out;
    if (given("jobs")) cfg.jobs = f.jobs;
    if (given("jobs")) cfg.concurrency = f.jobs;
    if (given("strict")) cfg.strict = f.strict;
    if (given("tol")) cfg.tol = f.tol;
    if (given("grid")) cfg.grid = f.grid;
    if (given("task")) cfg.task = f.task;
    if (given("endpoint")) cfg.endpoint = f.endpoint;
    if (given("model")) cfg.model = f.model;
    if (cfg.jobs < 1 || cfg.concurrency < 1) throw histcad::cli::UsageError("parallelism must be at least 1");
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    namespace cli = histcad::cli;
    CLI::App app{"histcad: flatten, analyze, execute and describe parametric CAD histories"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "histcad 0.1.0");

    std::map<std::string, Registered> verbs;
    const auto reg = [&](const std::string& name, const std::string& help, bool exec_flags, bool nlt_flags) {
        Registered& r = verbs[name];
        r.app = app.add_subcommand(name, help);
        add_common(r, exec_flags, nlt_flags);
        return r.app;
    };
    reg("validate", "Check documents against the model invariants", false, false);
    reg("flatten", "Convert .hier face-loop sketches to flat .hcad documents", false, false);
    reg("analyze", "Dump loops, holes, bounding boxes and part relations", false, false);
    reg("exec", "Execute documents to STL meshes and XYZ surface samples", true, false);
    CLI::App* edit = reg("edit", "Propagate parameter pins through the constraint solver", false, false);
    reg("nlt", "Write natural-language transcriptions", false, false);
    CLI::App* annotate = reg("annotate", "Request annotations from a chat endpoint", false, true);
    CLI::App* eval = reg("eval", "Score generated documents against reference point clouds", true, false);

    std::size_t part = 1;
    std::vector<std::string> pins;
    std::string pins_file;
    edit->add_option("--part", part, "1-based part whose sketch is edited");
    edit->add_option("--pin", pins, "Pin as ID.PARAM=VALUE, e.g. C1.radius=2");
    CLI::Option* pins_file_opt = edit->add_option("--pins", pins_file, "JSON object of pins")->check(CLI::ExistingFile);
    std::string log_path;
    CLI::Option* log_opt = annotate->add_option("--log", log_path, "Annotation log (JSON lines, appended)");
    std::string references;
    eval->add_option("--ref", references, "Directory of reference .xyz or .stl files")->required()->check(CLI::ExistingDirectory);

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return cli::kExitUsage;
    }

    for (auto& [name, r] : verbs) {
        if (!r.app->parsed()) continue;
        try {
            const RunConfig cfg = resolve(r);
            if (name == "validate") return cli::cmd_validate(cfg);
            if (name == "flatten") return cli::cmd_flatten(cfg);
            if (name == "analyze") return cli::cmd_analyze(cfg);
            if (name == "exec") return cli::cmd_exec(cfg);
            if (name == "edit") {
                return cli::cmd_edit(cfg, part, pins,
                                     pins_file_opt->count() ? std::optional<std::string>(pins_file) : std::nullopt);
            }
            if (name == "nlt") return cli::cmd_nlt(cfg);
            if (name == "annotate") {
                return cli::cmd_annotate(cfg, log_opt->count() ? std::optional<std::string>(log_path) : std::nullopt);
            }
            if (name == "eval") return cli::cmd_eval(cfg, references);
        } catch (const cli::UsageError& e) {
            cli::log_line("error", {{"verb", name}, {"code", "USAGE"}, {"message", e.what()}});
            return cli::kExitUsage;
        } catch (const histcad::Error& e) {
            const bool usage = e.code() == histcad::ErrorCode::NoInputs || e.code() == histcad::ErrorCode::InvalidArgument;
            cli::log_line("error", {{"verb", name}, {"code", std::string(histcad::error_code_name(e.code()))},
                                    {"message", e.what()}});
            return usage ? cli::kExitUsage : cli::kExitFailures;
        } catch (const std::exception& e) {
            cli::log_line("error", {{"verb", name}, {"message", e.what()}});
            return cli::kExitFailures;
        }
    }
    return cli::kExitUsage;
}
