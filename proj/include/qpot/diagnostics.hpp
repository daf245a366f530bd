#pragma once

#include <functional>
#include <string>

namespace qpot {

using WarningHandler = std::function<void(const std::string&)>;

/// Replaces the process-wide warning sink (stderr by default). Returns the previous one.
WarningHandler set_warning_handler(WarningHandler handler);

void warn(const std::string& message);

}  // namespace qpot
