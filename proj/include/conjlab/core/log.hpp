#pragma once

#include <functional>
#include <string>

namespace conjlab {

using LogSink = std::function<void(const std::string&)>;

/// Writes to std::clog unless a sink is installed. Thread-safe.
void log_warning(const std::string& message);

/// Installs a sink (empty function restores the default); returns the previous one.
LogSink set_log_sink(LogSink sink);

} // namespace conjlab
