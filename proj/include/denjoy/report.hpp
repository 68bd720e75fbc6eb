#pragma once

#include <string>

#include "denjoy/denjoy_builder.hpp"
#include "denjoy/distortion_lab.hpp"
#include "denjoy/path_engine.hpp"

namespace denjoy {

// Fixed shortest-round-trip formatting so identical runs emit identical bytes.
std::string fmt_real(double v);

// Writes through a temporary file in the same directory, then renames.
void atomic_write(const std::string& path, const std::string& contents);

std::string schedule_csv(const RectangleSchedule& sch);
std::string distortion_csv(const DistortionReport& report);
std::string grid_csv(const WeightGrid& grid);

// Self-contained 800x400 plot: realized gaps as bars on top, the derivative
// profile of the first generator as a polyline below.
std::string svg_system_plot(const DenjoySystem& sys);

}  // namespace denjoy
