#include "tsnr/log.hpp"

#include <cstdlib>
#include <string>

#include <spdlog/spdlog.h>

namespace tsnr {

void init_logging() {
  spdlog::set_level(spdlog::level::warn);
  if (const char* env = std::getenv("TSNR_LOG")) {
    auto level = spdlog::level::from_str(env);
    // from_str maps unknown names to off; keep the default for typos.
    if (level != spdlog::level::off || std::string(env) == "off") spdlog::set_level(level);
  }
  spdlog::set_pattern("[%l] %v");
}

}  // namespace tsnr
