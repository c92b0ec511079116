#pragma once

#include <string>

#include "bevlift/errors.hpp"

namespace bevlift {

// Depth binning schemes. UD keeps a fixed bin size, SID grows bin sizes
// geometrically (log space), LID grows bin sizes linearly with the index.
enum class DiscretizationMode { UD, SID, LID };

DiscretizationMode parse_discretization_mode(const std::string& name);
const char* to_string(DiscretizationMode mode);

// Mapping between continuous depth and categorical depth bins over
// [d_min, d_max]. The formulas define bin EDGES: edge(0) = d_min and
// edge(num_bins) = d_max; bin i covers [edge(i), edge(i+1)) and its center
// is the edge midpoint. When overflow_bin is set, depths outside the range
// fall into an extra bin with index num_bins.
struct DiscretizationSpec {
  DiscretizationMode mode = DiscretizationMode::LID;
  double d_min = 2.0;
  double d_max = 46.8;
  int num_bins = 80;
  bool overflow_bin = true;

  // Bin count including the overflow bin when present.
  int total_bins() const { return num_bins + (overflow_bin ? 1 : 0); }

  void validate() const;
};

// Depth of edge i, i in [0, num_bins]. Endpoints return d_min / d_max
// exactly. Throws IndexOutOfRange.
double bin_edge(const DiscretizationSpec& spec, int i);

// Midpoint of bin i, i in [0, num_bins - 1].
double bin_center(const DiscretizationSpec& spec, int i);

// edge(i+1) - edge(i).
double bin_width(const DiscretizationSpec& spec, int i);

// Index i with edge(i) <= d < edge(i+1). Depths outside [d_min, d_max)
// return the overflow index num_bins when overflow_bin is set and throw
// OutOfRange otherwise.
int depth_to_bin(const DiscretizationSpec& spec, double d);

// Continuous bin coordinate r such that depth interpolated linearly between
// adjacent bin centers equals d; clamped to [0, num_bins - 1] outside the
// first/last center. Requires d in [d_min, d_max], else throws OutOfRange.
double depth_to_fractional_bin(const DiscretizationSpec& spec, double d);

}  // namespace bevlift
