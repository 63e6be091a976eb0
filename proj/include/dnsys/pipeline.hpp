#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace dnsys {

inline constexpr const char* kConfigSchema = "dnsys-config/1";

const std::vector<std::string>& pipeline_commands();

struct RunOptions {
    std::string out_dir = "dnsys_out";
    std::optional<std::uint64_t> seed;  // overrides the config seed
    bool stamp = false;
};

struct RunOutcome {
    int exit_code = 0;  // 0 pass, 1 check failed, 2 input/resource, 3 numerical
    std::string status;
    std::string message;
    std::vector<std::string> files;
};

// built-in config for a command (JSON text)
std::string default_config(const std::string& command);

// parse, validate and execute; report.json is written even on failure
RunOutcome run_config_text(const std::string& json_text, const RunOptions& opts);
RunOutcome run_config_file(const std::string& path, const RunOptions& opts);

}  // namespace dnsys
