#include "conjlab/core/log.hpp"

#include <iostream>
#include <mutex>

namespace conjlab {

namespace {
std::mutex g_mutex;
LogSink g_sink;
} // namespace

void log_warning(const std::string& message) {
    std::lock_guard lock(g_mutex);
    if (g_sink)
        g_sink(message);
    else
        std::clog << "warning: " << message << '\n';
}

LogSink set_log_sink(LogSink sink) {
    std::lock_guard lock(g_mutex);
    std::swap(g_sink, sink);
    return sink;
}

} // namespace conjlab
