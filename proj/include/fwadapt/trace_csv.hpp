#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string_view>
#include <vector>

#include "fwadapt/solver.hpp"

namespace fwadapt {

inline constexpr std::string_view kTraceHeader =
    "iter,f_value,fw_gap,step_size,L_k,gamma_k,inner_checks,cum_inner_checks,elapsed_seconds";

/// Communication totals appended as "# rounds=<r> grad_msgs=<g>".
struct LedgerFooter {
  long long rounds = 0;
  long long grad_msgs = 0;
};

struct TraceRow {
  int iter = 0;
  double f_value = 0.0;
  double fw_gap = 0.0;
  double step_size = 0.0;
  double L_k = 0.0;
  double gamma_k = 0.0;
  int inner_checks = 0;
  long long cum_inner_checks = 0;
  double elapsed_seconds = 0.0;
};

struct ParsedTrace {
  std::vector<TraceRow> rows;
  std::optional<LedgerFooter> footer;
};

/// One row per trace record, reals with 17 significant digits.
void WriteTrace(std::ostream& out, const SolverRun& run,
                const std::optional<LedgerFooter>& footer = std::nullopt);
/// Throws IoError if the file cannot be written.
void WriteTraceFile(const std::filesystem::path& path, const SolverRun& run,
                    const std::optional<LedgerFooter>& footer = std::nullopt);

/// Throws InputError on a header mismatch or a malformed row.
ParsedTrace ReadTrace(std::istream& in);
ParsedTrace ReadTraceFile(const std::filesystem::path& path);

}  // namespace fwadapt
