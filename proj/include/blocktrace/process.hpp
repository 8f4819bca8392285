#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace blocktrace {

struct ProcessResult {
    int exit_code{-1};
    std::string out;
    std::string err;
};

struct ProcessOptions {
    std::filesystem::path cwd;
    // Extra environment entries layered over the current environment.
    std::map<std::string, std::string> env;
    // Bytes written to the child's stdin before it is closed.
    std::string input;
};

/// Runs argv[0] (looked up on PATH) to completion and captures both streams.
/// Throws blocktrace::Error only when the process cannot be spawned.
ProcessResult run_process(const std::vector<std::string>& argv,
                          const ProcessOptions& options = {});

}  // namespace blocktrace
