#pragma once

#include <functional>
#include <string>

namespace vpfp {

/// Receives non-fatal diagnostics (under-resolution warnings, kernel augmentation notices).
/// The default sink prints to stderr.
using LogSink = std::function<void(const std::string&)>;

void set_log_sink(LogSink sink);
void log_message(const std::string& msg);

}  // namespace vpfp
