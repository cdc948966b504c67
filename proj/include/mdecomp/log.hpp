#pragma once

#include <functional>
#include <string_view>

namespace mdecomp {

/// Warnings go to stderr unless a sink is installed (tests capture them).
void log_warning(std::string_view message);
using WarningSink = std::function<void(std::string_view)>;
/// Returns the previous sink; pass nullptr to restore stderr.
WarningSink set_warning_sink(WarningSink sink);

}  // namespace mdecomp
