#pragma once

// Helpers for driving the command-line front end in-process.

#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "commands.hpp"
#include "fixtures.hpp"

namespace fixtures {

struct CliResult {
    int code = 0;
    std::string out, err;
};

inline CliResult run_cli(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = paleo::cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

/// Every regular file in `dir`, keyed by name, except the resolved config (which
/// records the output directory and so differs between runs).
inline std::map<std::string, std::string> outputs(const fs::path& dir) {
    std::map<std::string, std::string> files;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().filename() != "resolved.ini")
            files[entry.path().filename().string()] = read_text(entry.path());
    return files;
}

/// Re-runs `subcommand` from the resolved config in `first` into `second` and
/// reports whether every output file is byte-identical.
inline bool replays_identically(const std::string& subcommand, const fs::path& first, const fs::path& second) {
    const CliResult r = run_cli({"--config", (first / "resolved.ini").string(), subcommand, "-o", second.string()});
    return r.code == 0 && !outputs(first).empty() && outputs(first) == outputs(second);
}

}  // namespace fixtures
