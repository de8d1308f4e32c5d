#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "drt/tensor.hpp"

namespace drt::attack {

struct TraceRecord {
  int iteration = 0;
  double objective = 0.0;
  double linf = 0.0;
};

struct ImageTrace {
  std::string id;
  std::vector<TraceRecord> records;
  int best_iteration = 0;
};

struct AttackResult {
  ImageBatch adversarial;
  std::vector<ImageTrace> traces;
  // Final dispersion per image for dispersion reduction; final task loss for
  // the loss-driven baselines.
  std::vector<double> converged_objective;
};

// One JSON object per line: {"id", "iter", "objective", "linf"}.
void write_trace_jsonl(std::ostream& os, const std::vector<ImageTrace>& traces);
std::vector<ImageTrace> read_trace_jsonl(std::istream& is);

}  // namespace drt::attack
