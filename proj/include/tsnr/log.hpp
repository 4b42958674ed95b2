#pragma once

namespace tsnr {

// Sets the spdlog level from TSNR_LOG (trace, debug, info, warn, error, off). Default warn.
void init_logging();

}  // namespace tsnr
