#include "cli.hpp"

#include <glob.h>

#include <fstream>
#include <iostream>
#include <mutex>
#include <set>
#include <sstream>

namespace histcad::cli {

namespace fs = std::filesystem;

namespace {

bool has_glob_chars(const std::string& s) { return s.find_first_of("*?[") != std::string::npos; }

}  // namespace

std::vector<std::string> expand_inputs(const std::vector<std::string>& patterns, const std::string& extension) {
    std::set<std::string> files;
    for (const auto& p : patterns) {
        if (has_glob_chars(p)) {
            glob_t g{};
            if (::glob(p.c_str(), 0, nullptr, &g) == 0) {
                for (std::size_t i = 0; i < g.gl_pathc; ++i) {
                    if (fs::is_regular_file(g.gl_pathv[i])) files.insert(g.gl_pathv[i]);
                }
            }
            ::globfree(&g);
        } else if (fs::is_directory(p)) {
            for (const auto& entry : fs::recursive_directory_iterator(p)) {
                if (entry.is_regular_file() && entry.path().extension() == extension) {
                    files.insert(entry.path().string());
                }
            }
        } else if (fs::is_regular_file(p)) {
            files.insert(p);
        } else {
            throw Error(ErrorCode::InvalidArgument, "no such file: " + p);
        }
    }
    if (files.empty()) throw Error(ErrorCode::NoInputs, "no input files matched");
    return {files.begin(), files.end()};
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::InvalidArgument, "cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& path, const std::string& bytes) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write " + path.string());
    out << bytes;
    if (!out) throw Error(ErrorCode::InvalidArgument, "write failed for " + path.string());
}

fs::path output_path(const RunConfig& cfg, const std::string& input, const std::string& suffix) {
    const fs::path in(input);
    const std::string name = in.stem().string() + suffix;
    if (cfg.out_dir) return fs::path(*cfg.out_dir) / name;
    return in.parent_path() / name;
}

void log_line(const std::string& level, const std::vector<std::pair<std::string, std::string>>& fields) {
    static std::mutex mutex;
    std::string line = "level=" + level;
    for (const auto& [k, v] : fields) {
        line += ' ';
        line += k;
        line += '=';
        if (v.empty() || v.find_first_of(" \"=\t") != std::string::npos) {
            line += '"';
            for (const char c : v) {
                if (c == '"' || c == '\\') line += '\\';
                line += c == '\n' ? ' ' : c;
            }
            line += '"';
        } else {
            line += v;
        }
    }
    const std::lock_guard<std::mutex> lock(mutex);
    std::cerr << line << '\n';
}

}  // namespace histcad::cli
