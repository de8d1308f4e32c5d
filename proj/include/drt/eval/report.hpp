#pragma once

#include <filesystem>
#include <iosfwd>

#include "drt/eval/relative.hpp"
#include "drt/models/profiler.hpp"

namespace drt::eval {

// Long-form CSV, one row per (source, attack, target). Notes become
// leading "# " comment lines.
void write_report_csv(std::ostream& os, const EvalReport& report);
void write_report_json(std::ostream& os, const EvalReport& report);

// Table-shaped CSV: one row per (source, attack), one column per target
// holding the adversarial relative metric.
void write_table_csv(std::ostream& os, const EvalReport& report);

// Columns: attack,target,steps,metric,value
void write_step_curve_csv(std::ostream& os, const EvalReport& report);
// Columns: layer,std_delta,target,metric,value
void write_layer_curve_csv(std::ostream& os, const EvalReport& report);

// Columns: layer,std_before,std_after,delta
void write_profile_csv(std::ostream& os, const models::LayerProfile& profile);

EvalReport read_report_json(std::istream& is);

}  // namespace drt::eval
