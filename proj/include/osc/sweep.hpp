#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "osc/analysis.hpp"
#include "osc/config.hpp"

namespace osc {

struct SweepResult {
  std::string summaries_path;
  std::string aggregates_path;
  std::int64_t runs = 0;
  std::int64_t failures = 0;
  std::vector<std::string> failure_messages;
};

// Executes every resolved run of the spec and writes summaries.csv plus
// aggregates.csv (mean and standard deviation per grid point) under the
// spec's output directory. Output bytes depend only on the spec: runs are
// merged in run-id order regardless of the worker schedule. Failed runs
// leave their rows out and are reported; callers should treat failures > 0
// as a partial result.
SweepResult sweep(const ExperimentSpec& spec, int workers = 0);

// In-memory variant used by tests: returns the two CSV payloads.
struct SweepBuffers {
  std::string summaries_csv;
  std::string aggregates_csv;
  std::int64_t failures = 0;
  std::vector<std::string> failure_messages;
};

SweepBuffers sweep_to_buffers(const ExperimentSpec& spec, int workers = 0);

// Canonical numeric rendering used by every CSV writer.
std::string csv_double(double v);

}  // namespace osc
