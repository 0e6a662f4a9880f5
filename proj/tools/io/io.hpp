#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "dlharmonic/boundary_analysis.hpp"
#include "dlharmonic/dl_graph.hpp"
#include "dlharmonic/tree_geometry.hpp"
#include "dlharmonic/walk_model.hpp"

namespace dlh::io {

using nlohmann::json;

/// A parsed walk file. Exactly one of `tree` or `dl` is set; `mu_tilde` is set
/// for the switch-walk family.
///
/// Accepted shapes (probabilities are numbers or "a/b" strings):
///   {"q":2,"r":2,"family":"switch-walk","mu_tilde":{"1":0.7,"-1":0.3}}
///   {"q":2,"r":3,"quadruples":[{"k1":0,"l1":1,"k2":1,"l2":0,"per_vertex_prob":0.35}, ...]}
///   {"q":2,"tree":[{"k":0,"r":1,"mass":0.7},{"k":1,"r":0,"mass":0.3}]}
struct WalkSpec {
  int q = 2;
  std::optional<int> r;
  std::optional<TreeWalk> tree;
  std::optional<QuadrupleMeasure> dl;
  std::optional<ZWalk> mu_tilde;
  json source;

  bool is_dl() const noexcept { return dl.has_value(); }
};

/// Throws InvalidInput whose message starts with the JSON path of the bad key.
WalkSpec parse_walk_spec(const json& j);
WalkSpec load_walk_spec(const std::string& path);

/// The tree walk a tree command acts on: the walk itself, or the projection
/// of a DL walk onto the requested factor.
TreeWalk tree_walk_for(const WalkSpec& spec, Side side);

/// Reads inline JSON, or the contents of a file when the text starts with '@'.
json read_json_argument(const std::string& text, const std::string& what);

json to_json(const TreeVertex& v);
json to_json(const DLVertex& v);
json to_json(const BoundaryPoint& xi);
TreeVertex tree_vertex_from_json(const json& j, const std::string& path = "$");
DLVertex dl_vertex_from_json(const json& j, const std::string& path = "$");
BoundaryPoint boundary_from_json(const json& j, const std::string& path = "$");

/// A named pass/fail assertion embedded in a report.
struct Check {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

/// Tabular part of a report; cells are JSON scalars.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<json>> rows;
};

struct Report {
  std::string command;
  json config = json::object();   // every effective parameter
  json results = json::object();
  Table table;
  std::vector<Check> checks;
  int failure_code = 1;  // exit code when a check fails

  bool passed() const;
  void check(std::string name, double value, double tolerance, bool passed);
  /// value <= tolerance
  void check_below(std::string name, double value, double tolerance);
};

enum class Format { Json, Csv };

Format parse_format(const std::string& s);

/// JSON: one object with command, config, results, checks and table.
/// CSV: "# key=value" lines for command, config and checks, then the table.
void write_report(const Report& report, Format format, std::ostream& os);

}  // namespace dlh::io
