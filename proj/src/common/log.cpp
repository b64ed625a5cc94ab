#include "common/log.hpp"

#include <spdlog/sinks/stdout_sinks.h>

#include <cstdlib>
#include <string_view>

namespace attn {

namespace {

spdlog::level::level_enum level_from_env() {
  const char* env = std::getenv("ATTN_LOG");
  if (env == nullptr) return spdlog::level::info;
  std::string_view v(env);
  if (v == "quiet") return spdlog::level::off;
  if (v == "debug") return spdlog::level::debug;
  return spdlog::level::info;
}

}  // namespace

std::shared_ptr<spdlog::logger> logger() {
  static std::shared_ptr<spdlog::logger> instance = [] {
    auto sink = std::make_shared<spdlog::sinks::stderr_sink_mt>();
    auto lg = std::make_shared<spdlog::logger>("attn", sink);
    lg->set_pattern("[%l] %v");
    lg->set_level(level_from_env());
    return lg;
  }();
  return instance;
}

}  // namespace attn
