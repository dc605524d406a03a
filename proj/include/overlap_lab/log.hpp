#pragma once

#include <spdlog/spdlog.h>

namespace overlap_lab::log {

// Configures the stderr logger from OVERLAP_LAB_LOG (error|warn|info|debug; default warn).
void init_from_env();

using spdlog::debug;
using spdlog::error;
using spdlog::info;
using spdlog::warn;

}  // namespace overlap_lab::log
