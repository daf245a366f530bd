#pragma once

#include <string>
#include <vector>

#include "qpot/diagnostics.hpp"
#include "qpot/grid.hpp"
#include "qpot/units.hpp"

namespace testing {

inline constexpr double um = 1e-6;
inline constexpr double ms = 1e-3;

/// Rubidium constants with the default envelope.
inline qpot::PhysicalParams rb87() { return qpot::PhysicalParams{}; }

/// Default 10 um / 4096 point grid.
inline qpot::Grid1D default_grid() { return qpot::Grid1D(10 * um, 4096); }

/// Captures warnings for the lifetime of the object.
class WarningCapture {
 public:
  WarningCapture() {
    previous_ = qpot::set_warning_handler([this](const std::string& m) { messages.push_back(m); });
  }
  ~WarningCapture() { qpot::set_warning_handler(previous_); }
  WarningCapture(const WarningCapture&) = delete;
  WarningCapture& operator=(const WarningCapture&) = delete;

  std::vector<std::string> messages;

 private:
  qpot::WarningHandler previous_;
};

}  // namespace testing
