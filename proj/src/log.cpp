#include "overlap_lab/log.hpp"

#include <cstdlib>
#include <string_view>

#include <spdlog/sinks/stdout_color_sinks.h>

namespace overlap_lab::log {

void init_from_env() {
    auto logger = spdlog::get("overlap_lab");
    if (!logger) {
        logger = spdlog::stderr_color_mt("overlap_lab");
        logger->set_pattern("[%l] %v");
    }
    spdlog::set_default_logger(logger);

    spdlog::level::level_enum level = spdlog::level::warn;
    if (const char* env = std::getenv("OVERLAP_LAB_LOG")) {
        const std::string_view v = env;
        if (v == "error") level = spdlog::level::err;
        else if (v == "warn") level = spdlog::level::warn;
        else if (v == "info") level = spdlog::level::info;
        else if (v == "debug") level = spdlog::level::debug;
    }
    spdlog::set_level(level);
}

}  // namespace overlap_lab::log
