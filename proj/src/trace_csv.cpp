#include "fwadapt/trace_csv.hpp"

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "fwadapt/errors.hpp"

namespace fwadapt {
namespace {

std::vector<std::string> SplitFields(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream stream(line);
  std::string field;
  while (std::getline(stream, field, ',')) fields.push_back(field);
  return fields;
}

double ParseReal(const std::string& text, int line_number) {
  try {
    std::size_t used = 0;
    const double value = std::stod(text, &used);
    if (used == text.size()) return value;
  } catch (const std::exception&) {
    // nan and inf are written by the trace writer and accepted by stod.
  }
  throw InputError("trace line " + std::to_string(line_number) + ": bad number '" + text + "'");
}

long long ParseInteger(const std::string& text, int line_number) {
  try {
    std::size_t used = 0;
    const long long value = std::stoll(text, &used);
    if (used == text.size()) return value;
  } catch (const std::exception&) {
  }
  throw InputError("trace line " + std::to_string(line_number) + ": bad integer '" + text + "'");
}

}  // namespace

void WriteTrace(std::ostream& out, const SolverRun& run, const std::optional<LedgerFooter>& footer) {
  out << kTraceHeader << '\n';
  out << std::setprecision(17);
  for (const IterationRecord& rec : run.trace) {
    out << rec.k << ',' << rec.f_value << ',' << rec.fw_gap << ',' << rec.alpha << ',' << rec.L_k
        << ',' << rec.gamma_k << ',' << rec.inner_checks << ',' << rec.cum_inner_checks << ','
        << rec.elapsed_seconds << '\n';
  }
  if (footer) {
    out << "# rounds=" << footer->rounds << " grad_msgs=" << footer->grad_msgs << '\n';
  }
}

void WriteTraceFile(const std::filesystem::path& path, const SolverRun& run,
                    const std::optional<LedgerFooter>& footer) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  WriteTrace(out, run, footer);
  out.flush();
  if (!out) throw IoError("failed writing " + path.string());
}

ParsedTrace ReadTrace(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kTraceHeader) {
    throw InputError("trace header mismatch: expected '" + std::string(kTraceHeader) + "'");
  }
  ParsedTrace trace;
  int line_number = 1;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    if (line.front() == '#') {
      LedgerFooter footer;
      if (std::sscanf(line.c_str(), "# rounds=%lld grad_msgs=%lld", &footer.rounds,
                      &footer.grad_msgs) != 2) {
        throw InputError("trace line " + std::to_string(line_number) + ": bad footer");
      }
      trace.footer = footer;
      continue;
    }
    const std::vector<std::string> fields = SplitFields(line);
    if (fields.size() != 9) {
      throw InputError("trace line " + std::to_string(line_number) + ": expected 9 fields");
    }
    TraceRow row;
    row.iter = static_cast<int>(ParseInteger(fields[0], line_number));
    row.f_value = ParseReal(fields[1], line_number);
    row.fw_gap = ParseReal(fields[2], line_number);
    row.step_size = ParseReal(fields[3], line_number);
    row.L_k = ParseReal(fields[4], line_number);
    row.gamma_k = ParseReal(fields[5], line_number);
    row.inner_checks = static_cast<int>(ParseInteger(fields[6], line_number));
    row.cum_inner_checks = ParseInteger(fields[7], line_number);
    row.elapsed_seconds = ParseReal(fields[8], line_number);
    trace.rows.push_back(row);
  }
  return trace;
}

ParsedTrace ReadTraceFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return ReadTrace(in);
}

}  // namespace fwadapt
