#ifndef DCSIM_REPORT_HPP
#define DCSIM_REPORT_HPP

#include <string>

#include "dcsim/engine.hpp"

namespace dcsim {

// Human-readable table: metric rows, algorithm columns.
std::string render_text(const ComparisonTable& table);

// One row per (metric, algorithm): metric,algorithm,value,ci_low,ci_high.
// Interval columns are empty for single-repetition runs.
std::string render_csv(const ComparisonTable& table);

// Versioned JSON document ("schema_version") with cells and samples.
std::string render_json(const ComparisonTable& table);

std::string render(const ComparisonTable& table, const std::string& format);

}  // namespace dcsim

#endif
