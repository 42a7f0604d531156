#pragma once

#include <cstdint>
#include <filesystem>

#include "oamqkd/io.hpp"

namespace oamqkd::cli {

enum ExitCode : int { kSuccess = 0, kUsageError = 1, kRuntimeError = 2 };

void cmd_simulate(const Config& cfg, std::uint64_t seed, const std::filesystem::path& out);
void cmd_keyrate(const Config& cfg, const std::filesystem::path& out);
void cmd_turbulence(const Config& cfg, std::uint64_t seed, const std::filesystem::path& out);
void cmd_sweep(const Config& cfg, const std::filesystem::path& out);

// Full command-line entry point; returns the process exit code.
int run(int argc, char** argv);

}  // namespace oamqkd::cli
