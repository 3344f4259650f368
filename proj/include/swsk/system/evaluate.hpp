#pragma once

#include <iosfwd>
#include <map>
#include <string>

#include "swsk/engine/config.hpp"

namespace swsk::system {

struct EvalSummary {
  std::size_t rows = 0;
  std::size_t allowed = 0;
  std::size_t denied = 0;
  std::size_t errors = 0;
  std::map<std::string, std::size_t> by_class;
};

// Batch suitability. Input CSV has a header naming its columns:
//   worker, S, F, P, and either stress_level (L0..L4) or all of
//   hr_dev, gsr_dev, temp_excess (raw deviations, scored with `config`).
// Output CSV: worker,stress_level,score,risk_class,allowed,max_allowed,error
// Rows that cannot be evaluated carry a message in `error` and empty verdict
// columns. Fields are plain comma-separated values (no quoting).
/// Throws std::invalid_argument when the header lacks required columns.
EvalSummary evaluate_csv(std::istream& in, std::ostream& out, const engine::EngineConfig& config);

}  // namespace swsk::system
