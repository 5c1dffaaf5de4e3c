#include "radiant/log.hpp"

#include <atomic>
#include <iostream>
#include <mutex>

namespace radiant::log {

namespace {

std::atomic<bool> g_verbose{false};
std::mutex g_mutex;

void default_sink(std::string_view level, std::string_view message) {
    if (level == "info" && !g_verbose)
        return;
    std::clog << "[" << level << "] " << message << '\n';
}

Sink &sink() {
    static Sink s = default_sink;
    return s;
}

} // namespace

Sink set_sink(Sink s) {
    std::lock_guard lock(g_mutex);
    auto previous = sink();
    sink()        = s ? std::move(s) : Sink(default_sink);
    return previous;
}

void set_verbose(bool v) { g_verbose = v; }
bool verbose() { return g_verbose; }

void warn(std::string_view message) {
    std::lock_guard lock(g_mutex);
    sink()("warning", message);
}

void info(std::string_view message) {
    std::lock_guard lock(g_mutex);
    sink()("info", message);
}

} // namespace radiant::log
