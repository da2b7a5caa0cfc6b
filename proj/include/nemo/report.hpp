// Report rendering: aligned table for humans, json and csv for tooling.
#pragma once

#include <string>

#include "nemo/metrics.hpp"

namespace nemo {

enum class ReportFormat { Table, Json, Csv };

/// Deterministic text rendering: identical reports produce identical bytes.
std::string emit_report(const MetricsReport& report, ReportFormat format);

}  // namespace nemo
