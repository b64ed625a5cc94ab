#pragma once

#include <spdlog/spdlog.h>

#include <memory>

namespace attn {

// Shared stderr logger. Level comes from ATTN_LOG (quiet | info | debug),
// read once on first use; defaults to info.
std::shared_ptr<spdlog::logger> logger();

}  // namespace attn
