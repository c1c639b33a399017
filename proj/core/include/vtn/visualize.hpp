#pragma once

#include "vtn/grid.hpp"

namespace vtn {

// Flow rendered with the classic 55-hue color wheel: hue from the vector
// angle, saturation from magnitude over max_mag. Zero flow is white;
// magnitudes above max_mag darken. max_mag <= 0 picks the 99th percentile
// of the field's magnitudes.
Image flow_to_color(const FlowField& flow, double max_mag = 0.0);

// The normalization actually used by flow_to_color: max_mag when positive,
// otherwise the field's 99th-percentile magnitude (1.0 for an empty field).
double resolved_max_magnitude(const FlowField& flow, double max_mag);

}  // namespace vtn
