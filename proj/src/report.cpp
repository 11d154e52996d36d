#include "pstruct/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "pstruct/config.hpp"
#include "pstruct/field_io.hpp"

namespace pstruct::report {

using config::format_double;

std::string csv_escape(const std::string& cell) {
  const bool quote = cell.find_first_of(",\"\r\n") != std::string::npos ||
                     (!cell.empty() && (cell.front() == ' ' || cell.back() == ' '));
  if (!quote) return cell;
  std::string out = "\"";
  for (char ch : cell) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

std::string to_csv(const CsvTable& table) {
  std::string out;
  const auto line = [&out](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out += (i ? "," : "") + csv_escape(cells[i]);
    out += "\r\n";
  };
  line(table.header);
  for (const auto& r : table.rows) line(r);
  return out;
}

CsvTable parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string cell;
  bool quoted = false, any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char ch = text[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          cell += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cell += ch;
      }
      continue;
    }
    if (ch == '"') {
      quoted = true;
      any = true;
    } else if (ch == ',') {
      record.push_back(std::move(cell));
      cell.clear();
      any = true;
    } else if (ch == '\r' || ch == '\n') {
      if (ch == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      record.push_back(std::move(cell));
      cell.clear();
      records.push_back(std::move(record));
      record.clear();
      any = false;
    } else {
      cell += ch;
      any = true;
    }
  }
  if (quoted) throw Error(ErrorCode::IoError, "unterminated quoted CSV cell");
  if (any || !cell.empty()) {
    record.push_back(std::move(cell));
    records.push_back(std::move(record));
  }
  CsvTable t;
  if (records.empty()) return t;
  t.header = std::move(records.front());
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != t.header.size()) {
      throw Error(ErrorCode::IoError, "CSV row " + std::to_string(r) + " has " +
                                          std::to_string(records[r].size()) + " cells, header has " +
                                          std::to_string(t.header.size()));
    }
    t.rows.push_back(std::move(records[r]));
  }
  return t;
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_csv(ss.str());
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

void emit_report(const Results& results, const Formats& formats, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + dir.string() + ": " + ec.message());
  if (formats.json) write_text(dir / "report.json", results.report.dump(2) + "\n");
  if (formats.csv) {
    for (const auto& [name, table] : results.tables) write_text(dir / "tables" / (name + ".csv"), to_csv(table));
  }
  if (formats.fields) {
    std::filesystem::create_directories(dir / "fields", ec);
    for (const auto& [name, f] : results.vector_fields) grid::write_field_binary(dir / "fields" / (name + ".bin"), f);
    for (const auto& [name, f] : results.scalar_fields) grid::write_field_binary(dir / "fields" / (name + ".bin"), f);
  }
}

CsvTable estimate_table(const std::vector<audit::EstimateCheck>& checks) {
  CsvTable t;
  t.header = {"estimate", "verdict", "domain", "n", "p", "structure", "q", "mu", "amplitude", "seed",
              "lhs", "rhs", "ratio", "residual", "iterations"};
  for (const auto& c : checks) {
    const auto& s = c.spec;
    for (const auto& pt : c.points) {
      t.rows.push_back({c.name, c.verdict, std::string(grid::to_string(s.kind)), std::to_string(s.n),
                        format_double(s.p),
                        s.structure == constitutive::Structure::FullGradient ? "full" : "symmetric",
                        format_double(s.q), format_double(pt.mu), format_double(pt.amplitude),
                        std::to_string(pt.seed), format_double(pt.lhs), format_double(pt.rhs),
                        format_double(pt.ratio), format_double(pt.residual), std::to_string(pt.iterations)});
    }
  }
  return t;
}

namespace {

struct Row {
  std::string estimate;
  double p, mu;
  std::string seed;
  double ratio;
};

std::vector<GroupSummary> summarize_rows(const std::vector<Row>& rows) {
  std::vector<GroupSummary> out;
  // (mu, seed) groups inside each summary, first-appearance order
  std::vector<std::vector<std::pair<std::pair<double, std::string>, std::pair<double, double>>>> groups;
  for (const auto& r : rows) {
    auto it = std::find_if(out.begin(), out.end(),
                           [&](const GroupSummary& g) { return g.estimate == r.estimate && g.p == r.p; });
    if (it == out.end()) {
      out.push_back({r.estimate, r.p, 0, r.ratio, r.ratio, 0.0});
      groups.emplace_back();
      it = out.end() - 1;
    }
    auto& g = *it;
    ++g.points;
    g.min_ratio = std::min(g.min_ratio, r.ratio);
    g.max_ratio = std::max(g.max_ratio, r.ratio);
    auto& sub = groups[static_cast<std::size_t>(it - out.begin())];
    const auto key = std::make_pair(r.mu, r.seed);
    auto jt = std::find_if(sub.begin(), sub.end(), [&](const auto& e) { return e.first == key; });
    if (jt == sub.end()) sub.push_back({key, {r.ratio, r.ratio}});
    else jt->second = {std::min(jt->second.first, r.ratio), std::max(jt->second.second, r.ratio)};
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    for (const auto& [key, mm] : groups[i]) {
      const double s = mm.first > 0.0 ? mm.second / mm.first : std::numeric_limits<double>::infinity();
      out[i].spread = std::max(out[i].spread, s);
    }
  }
  return out;
}

double cell_double(const std::string& s) {
  double x = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    throw Error(ErrorCode::IoError, "malformed number '" + s + "' in estimate table");
  }
  return x;
}

}  // namespace

std::vector<GroupSummary> summarize(const std::vector<audit::EstimateCheck>& checks) {
  std::vector<Row> rows;
  for (const auto& c : checks)
    for (const auto& pt : c.points) rows.push_back({c.name, c.spec.p, pt.mu, std::to_string(pt.seed), pt.ratio});
  return summarize_rows(rows);
}

std::vector<GroupSummary> summarize(const CsvTable& table) {
  const auto col = [&](const std::string& name) {
    const auto it = std::find(table.header.begin(), table.header.end(), name);
    if (it == table.header.end()) throw Error(ErrorCode::IoError, "estimate table lacks column '" + name + "'");
    return static_cast<std::size_t>(it - table.header.begin());
  };
  const auto ce = col("estimate"), cp = col("p"), cm = col("mu"), cs = col("seed"), cr = col("ratio");
  std::vector<Row> rows;
  for (const auto& r : table.rows)
    rows.push_back({r[ce], cell_double(r[cp]), cell_double(r[cm]), r[cs], cell_double(r[cr])});
  return summarize_rows(rows);
}

Json to_json(const GroupSummary& s) {
  Json j;
  j["estimate"] = s.estimate;
  j["p"] = s.p;
  j["points"] = s.points;
  j["min_ratio"] = s.min_ratio;
  j["max_ratio"] = s.max_ratio;
  j["spread"] = s.spread;
  return j;
}

Json to_json(const audit::EstimateCheck& c) {
  const auto& s = c.spec;
  Json j;
  j["name"] = c.name;
  j["verdict"] = c.verdict;
  j["covered"] = c.covered;
  if (!c.note.empty()) j["note"] = c.note;
  j["spread"] = c.spread;
  j["spread_limit"] = 10.0;
  if (c.has_mu_fit) {
    j["mu_slope"] = c.mu_slope;
    j["expected_slope"] = c.expected_slope;
    j["slope_tolerance"] = 0.3;
  }
  Json in;
  in["domain"] = std::string(grid::to_string(s.kind));
  in["n"] = s.n;
  in["p"] = s.p;
  in["structure"] = s.structure == constitutive::Structure::FullGradient ? "full" : "symmetric";
  in["q"] = s.q;
  in["c_hat"] = s.c_hat;
  in["mus"] = s.mus;
  in["amplitudes"] = s.amplitudes;
  in["seeds"] = s.seeds;
  j["inputs"] = in;
  Json pts = Json::array();
  for (const auto& p : c.points) {
    Json e;
    e["mu"] = p.mu;
    e["amplitude"] = p.amplitude;
    e["seed"] = p.seed;
    e["lhs"] = p.lhs;
    e["rhs"] = p.rhs;
    e["ratio"] = p.ratio;
    e["residual"] = p.residual;
    e["iterations"] = p.iterations;
    pts.push_back(e);
  }
  j["points"] = pts;
  return j;
}

}  // namespace pstruct::report
