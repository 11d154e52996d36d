#pragma once

// Report artifacts: CSV tables with RFC 4180 quoting, the JSON report, raw
// fields, and the aggregator that rebuilds sweep summaries from a table.

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pstruct/audit.hpp"
#include "pstruct/grid.hpp"

namespace pstruct::report {

using Json = nlohmann::ordered_json;

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

std::string csv_escape(const std::string& cell);
std::string to_csv(const CsvTable& table);
CsvTable parse_csv(const std::string& text);
CsvTable read_csv(const std::filesystem::path& path);

/// Everything a command produces before it is written out.
struct Results {
  Json report = Json::object();
  std::vector<std::pair<std::string, CsvTable>> tables;
  std::vector<std::pair<std::string, grid::VectorField>> vector_fields;
  std::vector<std::pair<std::string, grid::ScalarField>> scalar_fields;
};

struct Formats {
  bool json = true;
  bool csv = true;
  bool fields = false;
};

/// Writes report.json, tables/<name>.csv and fields/<name>.bin under dir.
/// Throws IoError.
void emit_report(const Results& results, const Formats& formats, const std::filesystem::path& dir);

void write_text(const std::filesystem::path& path, const std::string& text);

/// One row per sweep point.
CsvTable estimate_table(const std::vector<audit::EstimateCheck>& checks);

struct GroupSummary {
  std::string estimate;
  double p = 0.0;
  std::size_t points = 0;
  double min_ratio = 0.0;
  double max_ratio = 0.0;
  double spread = 0.0;  // max over (mu, seed) of max/min across amplitudes

  friend bool operator==(const GroupSummary&, const GroupSummary&) = default;
};

/// Summary per (estimate, p) in first-appearance order.
std::vector<GroupSummary> summarize(const std::vector<audit::EstimateCheck>& checks);
/// Same statistics recomputed from an estimate table.
std::vector<GroupSummary> summarize(const CsvTable& estimate_table);

Json to_json(const GroupSummary& s);
Json to_json(const audit::EstimateCheck& c);

}  // namespace pstruct::report
