#include "mdecomp/log.hpp"

#include <iostream>
#include <mutex>
#include <utility>

namespace mdecomp {
namespace {
std::mutex g_mutex;
WarningSink g_sink;
}  // namespace

void log_warning(std::string_view message) {
  std::lock_guard lock(g_mutex);
  if (g_sink) {
    g_sink(message);
  } else {
    std::cerr << "warning: " << message << '\n';
  }
}

WarningSink set_warning_sink(WarningSink sink) {
  std::lock_guard lock(g_mutex);
  return std::exchange(g_sink, std::move(sink));
}

}  // namespace mdecomp
