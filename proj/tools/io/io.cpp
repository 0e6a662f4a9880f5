#include "io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "dlharmonic/errors.hpp"

namespace dlh::io {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& msg) { throw InvalidInput(path + ": " + msg); }

const json& require(const json& j, const std::string& key, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) fail(path + "." + key, "missing");
  return *it;
}

std::int64_t get_int(const json& j, const std::string& path) {
  if (!j.is_number_integer()) fail(path, "expected an integer");
  return j.get<std::int64_t>();
}

std::int64_t parse_int_key(const std::string& key, const std::string& path) {
  std::int64_t v = 0;
  const char* end = key.data() + key.size();
  auto [p, ec] = std::from_chars(key.data(), end, v);
  if (ec != std::errc() || p != end) fail(path, "key '" + key + "' is not an integer");
  return v;
}

double get_prob(const json& j, const std::string& path) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    const auto slash = s.find('/');
    if (slash != std::string::npos) {
      const auto num = parse_int_key(s.substr(0, slash), path);
      const auto den = parse_int_key(s.substr(slash + 1), path);
      if (den <= 0) fail(path, "denominator must be positive");
      return static_cast<double>(num) / static_cast<double>(den);
    }
  }
  fail(path, "expected a number or an \"a/b\" string");
}

int get_branching(const json& j, const std::string& key) {
  const std::string path = "$." + key;
  const auto v = get_int(require(j, key, "$"), path);
  if (v < 2) fail(path, "branching must be at least 2");
  if (v > 64) fail(path, "branching above 64 is not supported");
  return static_cast<int>(v);
}

Symbol get_symbol(const json& j, const std::string& path) {
  const auto v = get_int(j, path);
  if (v < 0) fail(path, "symbol must be nonnegative");
  return static_cast<Symbol>(v);
}

// Re-raise library validation errors with the JSON path in front.
template <class F>
auto at_path(const std::string& path, F&& f) {
  try {
    return f();
  } catch (const InvalidInput& e) {
    fail(path, e.what());
  }
}

}  // namespace

WalkSpec parse_walk_spec(const json& j) {
  if (!j.is_object()) fail("$", "walk spec must be a JSON object");
  WalkSpec spec;
  spec.source = j;
  spec.q = get_branching(j, "q");
  if (j.contains("r")) spec.r = get_branching(j, "r");

  const int modes = static_cast<int>(j.contains("family")) + static_cast<int>(j.contains("quadruples")) +
                    static_cast<int>(j.contains("tree"));
  if (modes != 1) fail("$", "exactly one of 'family', 'quadruples' or 'tree' is required");

  if (j.contains("family")) {
    const auto& fam = j.at("family");
    if (!fam.is_string() || fam.get<std::string>() != "switch-walk") {
      fail("$.family", "unknown family (supported: \"switch-walk\")");
    }
    if (!spec.r) fail("$.r", "missing");
    const auto& mt = require(j, "mu_tilde", "$");
    if (!mt.is_object() || mt.empty()) fail("$.mu_tilde", "expected a nonempty object {jump: probability}");
    std::map<std::int64_t, double> mass;
    for (const auto& [key, val] : mt.items()) {
      const std::string path = "$.mu_tilde." + key;
      mass[parse_int_key(key, path)] += get_prob(val, path);
    }
    spec.mu_tilde = at_path("$.mu_tilde", [&] { return ZWalk(mass); });
    spec.dl = at_path("$.mu_tilde", [&] { return switch_walk(*spec.mu_tilde, spec.q, *spec.r); });
    return spec;
  }

  if (j.contains("quadruples")) {
    if (!spec.r) fail("$.r", "missing");
    const auto& qs = j.at("quadruples");
    if (!qs.is_array() || qs.empty()) fail("$.quadruples", "expected a nonempty array");
    std::map<UpQuadruple, double> pv;
    for (std::size_t i = 0; i < qs.size(); ++i) {
      const std::string path = "$.quadruples[" + std::to_string(i) + "]";
      const auto& e = qs[i];
      UpQuadruple c;
      c.k1 = get_int(require(e, "k1", path), path + ".k1");
      c.l1 = get_int(require(e, "l1", path), path + ".l1");
      c.k2 = get_int(require(e, "k2", path), path + ".k2");
      c.l2 = get_int(require(e, "l2", path), path + ".l2");
      const double p = get_prob(require(e, "per_vertex_prob", path), path + ".per_vertex_prob");
      if (pv.count(c)) fail(path, "duplicate quadruple");
      at_path(path, [&] {
        QuadrupleMeasure probe(spec.q, *spec.r, {{c, 1.0 / (cone_size(spec.q, c.k1, c.l1) * cone_size(*spec.r, c.k2, c.l2))}});
        (void)probe;
        return 0;
      });
      pv[c] = p;
    }
    spec.dl = at_path("$.quadruples", [&] { return QuadrupleMeasure(spec.q, *spec.r, pv); });
    return spec;
  }

  const auto& ts = j.at("tree");
  if (!ts.is_array() || ts.empty()) fail("$.tree", "expected a nonempty array");
  std::map<UpPair, double> mass;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const std::string path = "$.tree[" + std::to_string(i) + "]";
    const auto& e = ts[i];
    UpPair c{get_int(require(e, "k", path), path + ".k"), get_int(require(e, "r", path), path + ".r")};
    if (c.k < 0) fail(path + ".k", "must be nonnegative");
    if (c.r < 0) fail(path + ".r", "must be nonnegative");
    if (mass.count(c)) fail(path, "duplicate class");
    mass[c] = get_prob(require(e, "mass", path), path + ".mass");
  }
  spec.tree = at_path("$.tree", [&] { return TreeWalk(spec.q, mass); });
  return spec;
}

WalkSpec load_walk_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput(path + ": cannot open walk file");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw InvalidInput(path + ": malformed JSON: " + e.what());
  }
  return parse_walk_spec(j);
}

TreeWalk tree_walk_for(const WalkSpec& spec, Side side) {
  if (spec.tree) return *spec.tree;
  return project_to_tree(*spec.dl, side);
}

json read_json_argument(const std::string& text, const std::string& what) {
  std::string body = text;
  if (!text.empty() && text[0] == '@') {
    std::ifstream in(text.substr(1));
    if (!in) throw InvalidInput(what + ": cannot open " + text.substr(1));
    std::stringstream ss;
    ss << in.rdbuf();
    body = ss.str();
  }
  try {
    return json::parse(body);
  } catch (const json::parse_error& e) {
    throw InvalidInput(what + ": malformed JSON: " + e.what());
  }
}

json to_json(const TreeVertex& v) {
  json word = json::object();
  for (const auto& [i, s] : v.sparse_word()) word[std::to_string(i)] = s;
  return {{"hor", v.hor()}, {"word", word}};
}

json to_json(const DLVertex& v) {
  json lamps = json::object();
  for (const auto& [m, s] : v.lamps) lamps[std::to_string(m)] = s;
  return {{"pos", v.pos}, {"lamps", lamps}};
}

json to_json(const BoundaryPoint& xi) {
  return {{"anchor", to_json(xi.anchor)},
          {"continuation", xi.continuation == Continuation::Zero ? "zero" : "unknown"}};
}

TreeVertex tree_vertex_from_json(const json& j, const std::string& path) {
  const auto hor = get_int(require(j, "hor", path), path + ".hor");
  std::map<std::int64_t, Symbol> word;
  if (j.contains("word")) {
    const auto& w = j.at("word");
    if (!w.is_object()) fail(path + ".word", "expected an object {index: symbol}");
    for (const auto& [key, val] : w.items()) {
      const std::string p = path + ".word." + key;
      const auto i = parse_int_key(key, p);
      if (i < 0) fail(p, "index must be nonnegative");
      word[i] = get_symbol(val, p);
    }
  }
  return TreeVertex(hor, word);
}

DLVertex dl_vertex_from_json(const json& j, const std::string& path) {
  DLVertex x;
  x.pos = get_int(require(j, "pos", path), path + ".pos");
  if (j.contains("lamps")) {
    const auto& l = j.at("lamps");
    if (!l.is_object()) fail(path + ".lamps", "expected an object {code: state}");
    for (const auto& [key, val] : l.items()) {
      const std::string p = path + ".lamps." + key;
      x.set_lamp(parse_int_key(key, p), get_symbol(val, p));
    }
  }
  return x;
}

BoundaryPoint boundary_from_json(const json& j, const std::string& path) {
  BoundaryPoint xi;
  xi.anchor = tree_vertex_from_json(require(j, "anchor", path), path + ".anchor");
  if (j.contains("continuation")) {
    const auto& c = j.at("continuation");
    if (c == "zero") {
      xi.continuation = Continuation::Zero;
    } else if (c == "unknown") {
      xi.continuation = Continuation::Unknown;
    } else {
      fail(path + ".continuation", "expected \"zero\" or \"unknown\"");
    }
  }
  return xi;
}

// ---------------------------------------------------------------- reports

bool Report::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

void Report::check(std::string name, double value, double tolerance, bool ok) {
  checks.push_back({std::move(name), value, tolerance, ok});
}

void Report::check_below(std::string name, double value, double tolerance) {
  const bool ok = value <= tolerance;
  check(std::move(name), value, tolerance, ok);
}

Format parse_format(const std::string& s) {
  if (s == "json") return Format::Json;
  if (s == "csv") return Format::Csv;
  throw InvalidInput("--format: expected json or csv");
}

namespace {

std::string cell(const json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); }

void flatten(const json& j, const std::string& prefix, std::ostream& os) {
  if (j.is_object()) {
    for (const auto& [k, v] : j.items()) flatten(v, prefix.empty() ? k : prefix + "." + k, os);
    return;
  }
  os << "# " << prefix << "=" << cell(j) << "\n";
}

}  // namespace

void write_report(const Report& report, Format format, std::ostream& os) {
  if (format == Format::Json) {
    json checks = json::array();
    for (const auto& c : report.checks) {
      checks.push_back({{"name", c.name}, {"value", c.value}, {"tolerance", c.tolerance}, {"passed", c.passed}});
    }
    json out = {{"command", report.command},
                {"config", report.config},
                {"results", report.results},
                {"checks", checks},
                {"passed", report.passed()}};
    if (!report.table.columns.empty()) {
      out["table"] = {{"columns", report.table.columns}, {"rows", report.table.rows}};
    }
    os << out.dump(2) << "\n";
    return;
  }
  os << "# command=" << report.command << "\n";
  flatten(report.config, "config", os);
  for (const auto& c : report.checks) {
    os << "# check." << c.name << "=" << json(c.value).dump() << " tol=" << json(c.tolerance).dump() << " "
       << (c.passed ? "PASS" : "FAIL") << "\n";
  }
  for (std::size_t i = 0; i < report.table.columns.size(); ++i) {
    os << (i ? "," : "") << report.table.columns[i];
  }
  if (!report.table.columns.empty()) os << "\n";
  for (const auto& row : report.table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << cell(row[i]);
    os << "\n";
  }
}

}  // namespace dlh::io
