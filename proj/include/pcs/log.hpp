#pragma once

#include <functional>
#include <string_view>

namespace pcs {

using LogSink = std::function<void(std::string_view)>;

/// Replaces the diagnostic sink (default: stderr). Pass an empty function to
/// silence diagnostics.
void set_log_sink(LogSink sink);
void log_note(std::string_view message);

}  // namespace pcs
