#pragma once

#include "histcad/error.hpp"

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace histcad::cli {

inline constexpr int kExitClean = 0;
inline constexpr int kExitFailures = 1;
inline constexpr int kExitUsage = 2;

/// Settings shared by every verb. Defaults, then the config file, then flags.
struct RunConfig {
    std::vector<std::string> inputs;
    std::optional<std::string> out_dir;
    std::size_t jobs = 1;
    bool strict = false;
    std::optional<double> tol;
    int grid = 256;
    std::string task = "process";
    std::string endpoint;
    std::string model = "default";
    std::size_t concurrency = 4;
};

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Expands globs and directories (files with `extension` inside), sorts and
/// removes duplicates. Throws Error(NoInputs) when nothing matches.
std::vector<std::string> expand_inputs(const std::vector<std::string>& patterns, const std::string& extension);

std::string read_file(const std::string& path);
void write_file(const std::filesystem::path& path, const std::string& bytes);

/// Output path for `input` with its extension replaced by `suffix`, inside
/// out_dir when set, otherwise next to the input.
std::filesystem::path output_path(const RunConfig& cfg, const std::string& input, const std::string& suffix);

/// Structured `key=value` line on stderr.
void log_line(const std::string& level, const std::vector<std::pair<std::string, std::string>>& fields);

/// Runs f(i) for i in [0, n) on `jobs` workers; results keep index order.
template <class F>
auto parallel_map(std::size_t n, std::size_t jobs, F f) -> std::vector<decltype(f(std::size_t{}))> {
    std::vector<decltype(f(std::size_t{}))> out(n);
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) out[i] = f(i);
    };
    const std::size_t workers = std::max<std::size_t>(1, std::min(jobs, n));
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < workers; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    return out;
}

int cmd_validate(const RunConfig& cfg);
int cmd_flatten(const RunConfig& cfg);
int cmd_analyze(const RunConfig& cfg);
int cmd_exec(const RunConfig& cfg);
int cmd_edit(const RunConfig& cfg, std::size_t part, const std::vector<std::string>& pins,
             const std::optional<std::string>& pins_file);
int cmd_nlt(const RunConfig& cfg);
int cmd_annotate(const RunConfig& cfg, const std::optional<std::string>& log_path);
int cmd_eval(const RunConfig& cfg, const std::string& references);

}  // namespace histcad::cli
