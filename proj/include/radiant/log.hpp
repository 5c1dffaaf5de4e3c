#pragma once

#include <functional>
#include <string_view>

namespace radiant::log {

using Sink = std::function<void(std::string_view level, std::string_view message)>;

// Replaces the process-wide sink; returns the previous one. The default sink
// writes warnings to stderr and drops info messages unless verbose.
Sink set_sink(Sink sink);
void set_verbose(bool verbose);
bool verbose();

void warn(std::string_view message);
void info(std::string_view message);

} // namespace radiant::log
