#include "dualext/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "dualext/expression.hpp"

namespace dualext {

namespace {

struct Entry {
  std::string value;
  int line = 0;
  int key_column = 0;
  int value_column = 0;
};

using Section = std::map<std::string, Entry>;

[[noreturn]] void fail_at(int line, int column, ErrorCode code, const std::string& msg) {
  throw Error(code, "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + msg);
}

[[noreturn]] void fail_value(const Entry& e, const std::string& msg, int offset = 0) {
  fail_at(e.line, e.value_column + offset, ErrorCode::invalid_argument, msg);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

const std::vector<std::string> kSections{"scenario", "grid", "oracle", "output", "sweep"};

std::map<std::string, Section> read_sections(const std::string& text) {
  std::map<std::string, Section> out;
  std::istringstream in(text);
  std::string raw;
  std::string current;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto cut = raw.find_first_of("#;");
    const std::string body = raw.substr(0, cut);
    const auto first = body.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const int col = static_cast<int>(first) + 1;
    if (body[first] == '[') {
      const auto close = body.find(']', first);
      if (close == std::string::npos) fail_at(line, col, ErrorCode::parse_error, "missing ']'");
      if (!trim(body.substr(close + 1)).empty())
        fail_at(line, static_cast<int>(close) + 2, ErrorCode::parse_error, "text after section header");
      current = trim(body.substr(first + 1, close - first - 1));
      if (std::find(kSections.begin(), kSections.end(), current) == kSections.end())
        fail_at(line, col + 1, ErrorCode::parse_error, "unknown section '" + current + "'");
      if (out.count(current)) fail_at(line, col, ErrorCode::parse_error, "section [" + current + "] repeated");
      out[current];
      continue;
    }
    const auto eq = body.find('=');
    if (eq == std::string::npos) fail_at(line, col, ErrorCode::parse_error, "expected key = value");
    if (current.empty()) fail_at(line, col, ErrorCode::parse_error, "key outside of any section");
    const std::string key = trim(body.substr(0, eq));
    if (key.empty()) fail_at(line, col, ErrorCode::parse_error, "empty key");
    const std::string rest = body.substr(eq + 1);
    const auto vstart = rest.find_first_not_of(" \t\r");
    const std::string value = trim(rest);
    if (value.empty()) fail_at(line, static_cast<int>(eq) + 2, ErrorCode::parse_error, "empty value for '" + key + "'");
    Section& sec = out[current];
    if (sec.count(key)) fail_at(line, col, ErrorCode::parse_error, "key '" + key + "' repeated");
    sec[key] = Entry{value, line, col, static_cast<int>(eq + 1 + vstart) + 1};
  }
  return out;
}

std::string required_keys_listing() {
  std::string s = "required: [scenario] name; then per scenario ";
  bool first = true;
  for (Scenario sc : {Scenario::halfline_laplacian, Scenario::inverse_square_interval, Scenario::first_order_interval,
                      Scenario::halfline_schrodinger}) {
    if (!first) s += "; ";
    first = false;
    s += std::string(to_string(sc)) + ":";
    for (const auto& k : scenario_keys(sc).required) s += " " + k;
  }
  return s;
}

double strict_double(const Entry& e) {
  double v = 0.0;
  const char* b = e.value.data();
  const char* end = b + e.value.size();
  const auto [ptr, ec] = std::from_chars(b, end, v);
  if (ec != std::errc() || ptr != end) fail_value(e, "expected a number");
  return v;
}

int strict_int(const std::string& s, const Entry& e, int offset) {
  int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) fail_value(e, "expected an integer", offset);
  return v;
}

Expression expression_of(const Entry& e) {
  try {
    return Expression::parse(e.value);
  } catch (const ExpressionError& err) {
    fail_at(e.line, e.value_column + err.column() - 1, ErrorCode::parse_error, err.what());
  }
}

Complex constant_of(const Entry& e) {
  const Expression ex = expression_of(e);
  if (ex.depends_on_x()) fail_value(e, "expected a constant");
  return ex.constant();
}

double real_constant_of(const Entry& e) {
  const Complex c = constant_of(e);
  if (c.imag() != 0.0) fail_value(e, "expected a real number");
  return c.real();
}

ExtendedComplex extended_of(const Entry& e) {
  if (e.value == "inf") return ExtendedComplex::infinity();
  return constant_of(e);
}

void validate_scenario(Scenario s, const Section& sec) {
  const ScenarioKeys keys = scenario_keys(s);
  for (const auto& [key, entry] : sec) {
    if (key == "name" || key == "criterion") continue;
    const bool known = std::find(keys.required.begin(), keys.required.end(), key) != keys.required.end() ||
                       std::find(keys.optional.begin(), keys.optional.end(), key) != keys.optional.end();
    if (!known)
      fail_at(entry.line, entry.key_column, ErrorCode::invalid_argument,
              "key '" + key + "' does not apply to " + to_string(s));
  }
  const Entry& name = sec.at("name");
  for (const auto& k : keys.required)
    if (!sec.count(k))
      fail_at(name.line, name.key_column, ErrorCode::invalid_argument,
              std::string("missing required key '") + k + "' for " + to_string(s));

  const auto get = [&](const char* k) -> const Entry* {
    const auto it = sec.find(k);
    return it == sec.end() ? nullptr : &it->second;
  };
  if (const Entry* g = get("gamma")) {
    const double gamma = real_constant_of(*g);
    if (s == Scenario::inverse_square_interval && !(gamma >= std::sqrt(3.0)))
      fail_value(*g, "gamma out of range: requires gamma >= sqrt(3)");
    if (s == Scenario::first_order_interval && !(gamma > 0.0 && gamma < 0.5))
      fail_value(*g, "gamma out of range: requires 0 < gamma < 1/2");
  }
  for (const char* k : {"rho", "h"})
    if (const Entry* e = get(k)) extended_of(*e);
  if (const Entry* e = get("lambda")) constant_of(*e);
  if (const Entry* e = get("alpha"))
    if (!(real_constant_of(*e) > 0.0)) fail_value(*e, "alpha must be positive");
  for (const char* k : {"phi", "W", "l", "V", "k"})
    if (const Entry* e = get(k)) expression_of(*e);
  if (const Entry* e = get("vector"))
    if (e->value != "regular" && e->value != "singular") fail_value(*e, "vector must be regular or singular");
  if (const Entry* e = get("perturbation")) {
    if (e->value == "rank_one") {
      if (!get("phi")) fail_value(*e, "rank_one needs phi");
      if (get("V") || get("k")) fail_value(*e, "V and k belong to the multiplication perturbation");
    } else if (e->value == "multiplication") {
      if (!get("V")) fail_value(*e, "multiplication needs V");
      if (get("phi") || get("alpha") || get("lambda"))
        fail_value(*e, "phi, alpha and lambda belong to the rank_one perturbation");
    } else {
      fail_value(*e, "perturbation must be rank_one or multiplication");
    }
  }
}

void check_allowed(const Section& sec, const std::vector<std::string>& allowed, const char* name) {
  for (const auto& [key, entry] : sec)
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      fail_at(entry.line, entry.key_column, ErrorCode::invalid_argument,
              "unknown key '" + key + "' in [" + name + "]");
}

std::vector<int> parse_meshes(const Entry& e) {
  std::vector<int> out;
  std::size_t pos = 0;
  while (pos <= e.value.size()) {
    const auto comma = std::min(e.value.find(',', pos), e.value.size());
    const std::string item = e.value.substr(pos, comma - pos);
    const auto lead = item.find_first_not_of(' ');
    const std::string t = trim(item);
    out.push_back(strict_int(t, e, static_cast<int>(pos + (lead == std::string::npos ? 0 : lead))));
    pos = comma + 1;
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out[i] < 32) fail_value(e, "meshes need at least 32 elements");
    if (i > 0 && out[i] <= out[i - 1]) fail_value(e, "meshes must be increasing");
  }
  return out;
}

Formula formula_param(const ScenarioConfig& c, const std::string& key) {
  return Expression::parse(c.params.at(key)).formula();
}

std::optional<Formula> optional_formula(const ScenarioConfig& c, const std::string& key) {
  if (!c.params.count(key)) return std::nullopt;
  return formula_param(c, key);
}

Complex constant_param(const ScenarioConfig& c, const std::string& key, Complex fallback = {}) {
  const auto it = c.params.find(key);
  return it == c.params.end() ? fallback : Expression::parse(it->second).constant();
}

/// Real-valued function of x; rejects a non-zero imaginary part on the grid.
std::function<double(double)> real_param(const ScenarioConfig& c, const std::string& key, const Grid& g) {
  const Expression e = Expression::parse(c.params.at(key));
  for (double x : g.nodes) {
    const Complex z = e.value(x);
    if (std::abs(z.imag()) > 1e-12 * (1.0 + std::abs(z.real())))
      throw Error(ErrorCode::invalid_argument, key + " must be real-valued");
  }
  return [e](double x) { return e.value(x).real(); };
}

}  // namespace

std::vector<double> Axis::points() const {
  if (!(step > 0.0)) throw Error(ErrorCode::invalid_argument, "axis step must be positive");
  if (!(max >= min)) throw Error(ErrorCode::invalid_argument, "axis max must not be below min");
  const long count = static_cast<long>(std::floor((max - min) / step + 1e-9)) + 1;
  std::vector<double> out(count);
  for (long k = 0; k < count; ++k) out[k] = min + k * step;
  return out;
}

ScenarioKeys scenario_keys(Scenario s) {
  switch (s) {
    case Scenario::halfline_laplacian: return {{"rho"}, {"phi", "W"}};
    case Scenario::inverse_square_interval: return {{"gamma", "rho"}, {"phi"}};
    case Scenario::first_order_interval: return {{"gamma"}, {"l", "vector"}};
    case Scenario::halfline_schrodinger: return {{"h", "perturbation"}, {"alpha", "phi", "lambda", "V", "k"}};
  }
  return {};
}

std::optional<std::string> boundary_key(Scenario s) {
  switch (s) {
    case Scenario::halfline_laplacian:
    case Scenario::inverse_square_interval: return "rho";
    case Scenario::halfline_schrodinger: return "h";
    case Scenario::first_order_interval: break;
  }
  return std::nullopt;
}

ExtendedComplex parse_extended(const std::string& text) {
  if (trim(text) == "inf") return ExtendedComplex::infinity();
  return Expression::parse(text).constant();
}

ScenarioConfig parse_config(const std::string& text) {
  const auto sections = read_sections(text);
  const auto sc = sections.find("scenario");
  if (sc == sections.end() || !sc->second.count("name"))
    fail_at(1, 1, ErrorCode::invalid_argument, "missing [scenario] name; " + required_keys_listing());

  ScenarioConfig c;
  const Section& s = sc->second;
  const Entry& name = s.at("name");
  const auto scenario = scenario_from_string(name.value);
  if (!scenario) fail_value(name, "unknown scenario '" + name.value + "'");
  c.scenario = *scenario;
  if (const auto it = s.find("criterion"); it != s.end()) {
    c.criterion = criterion_from_string(it->second.value);
    if (!c.criterion) fail_value(it->second, "unknown criterion '" + it->second.value + "'");
  }
  validate_scenario(c.scenario, s);
  for (const auto& [key, entry] : s)
    if (key != "name" && key != "criterion") c.params[key] = entry.value;

  if (const auto it = sections.find("grid"); it != sections.end()) {
    check_allowed(it->second, {"n", "R", "offset"}, "grid");
    if (const auto e = it->second.find("n"); e != it->second.end()) {
      const int n = strict_int(e->second.value, e->second, 0);
      if (n < Grid::kPanelOrder || n % Grid::kPanelOrder != 0)
        fail_value(e->second, "n must be a positive multiple of 8");
      c.grid.n = n;
    }
    if (const auto e = it->second.find("R"); e != it->second.end()) {
      c.grid.radius = strict_double(e->second);
      if (!(*c.grid.radius > 0.0)) fail_value(e->second, "R must be positive");
    }
    if (const auto e = it->second.find("offset"); e != it->second.end()) {
      c.grid.offset = strict_double(e->second);
      if (!(c.grid.offset >= 0.0)) fail_value(e->second, "offset must be non-negative");
    }
  }
  if (const auto it = sections.find("oracle"); it != sections.end()) {
    check_allowed(it->second, {"meshes", "tol", "R"}, "oracle");
    if (const auto e = it->second.find("meshes"); e != it->second.end()) c.oracle.meshes = parse_meshes(e->second);
    if (const auto e = it->second.find("tol"); e != it->second.end()) {
      c.oracle.tol = strict_double(e->second);
      if (!(c.oracle.tol > 0.0)) fail_value(e->second, "tol must be positive");
    }
    if (const auto e = it->second.find("R"); e != it->second.end()) {
      c.oracle.radius = strict_double(e->second);
      if (!(c.oracle.radius > 0.0)) fail_value(e->second, "R must be positive");
    }
  }
  if (const auto it = sections.find("output"); it != sections.end()) {
    check_allowed(it->second, {"format", "path"}, "output");
    if (const auto e = it->second.find("format"); e != it->second.end()) {
      if (e->second.value == "json") {
        c.output.format = OutputFormat::json;
      } else if (e->second.value == "csv") {
        c.output.format = OutputFormat::csv;
      } else {
        fail_value(e->second, "format must be json or csv");
      }
    }
    if (const auto e = it->second.find("path"); e != it->second.end()) c.output.path = e->second.value;
  }
  if (const auto it = sections.find("sweep"); it != sections.end()) {
    const std::vector<std::string> keys{"re_min", "re_max", "re_step", "im_min", "im_max", "im_step"};
    check_allowed(it->second, keys, "sweep");
    const Entry* any = it->second.empty() ? nullptr : &it->second.begin()->second;
    for (const auto& k : keys)
      if (!it->second.count(k))
        fail_at(any ? any->line : 1, 1, ErrorCode::invalid_argument, "[sweep] needs " + k);
    SweepConfig sw;
    const auto num = [&](const char* k) { return strict_double(it->second.at(k)); };
    sw.re = {num("re_min"), num("re_max"), num("re_step")};
    sw.im = {num("im_min"), num("im_max"), num("im_step")};
    for (const char* k : {"re_step", "im_step"})
      if (!(num(k) > 0.0)) fail_value(it->second.at(k), "axis step must be positive");
    if (!(sw.re.max >= sw.re.min)) fail_value(it->second.at("re_max"), "re_max must not be below re_min");
    if (!(sw.im.max >= sw.im.min)) fail_value(it->second.at("im_max"), "im_max must not be below im_min");
    c.sweep = sw;
  }
  return c;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io_error, "cannot open config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const ScenarioConfig& c) {
  std::ostringstream out;
  out << "[scenario]\nname = " << to_string(c.scenario) << "\n";
  if (c.criterion) out << "criterion = " << to_string(*c.criterion) << "\n";
  for (const auto& [k, v] : c.params) out << k << " = " << v << "\n";
  out << "\n[grid]\n";
  if (c.grid.n) out << "n = " << *c.grid.n << "\n";
  if (c.grid.radius) out << "R = " << format_double(*c.grid.radius) << "\n";
  out << "offset = " << format_double(c.grid.offset) << "\n";
  out << "\n[oracle]\nmeshes = ";
  for (std::size_t i = 0; i < c.oracle.meshes.size(); ++i) out << (i ? "," : "") << c.oracle.meshes[i];
  out << "\ntol = " << format_double(c.oracle.tol) << "\nR = " << format_double(c.oracle.radius) << "\n";
  out << "\n[output]\nformat = " << (c.output.format == OutputFormat::json ? "json" : "csv") << "\npath = "
      << c.output.path << "\n";
  if (c.sweep) {
    out << "\n[sweep]\n";
    out << "re_min = " << format_double(c.sweep->re.min) << "\nre_max = " << format_double(c.sweep->re.max)
        << "\nre_step = " << format_double(c.sweep->re.step) << "\n";
    out << "im_min = " << format_double(c.sweep->im.min) << "\nim_max = " << format_double(c.sweep->im.max)
        << "\nim_step = " << format_double(c.sweep->im.step) << "\n";
  }
  return out.str();
}

GridPtr make_scenario_grid(const ScenarioConfig& c) {
  const bool half = c.scenario == Scenario::halfline_laplacian || c.scenario == Scenario::halfline_schrodinger;
  if (half) return make_grid(DomainKind::halfline, c.grid.radius.value_or(40.0), c.grid.n.value_or(640), c.grid.offset);
  return make_grid(DomainKind::interval, 1.0, c.grid.n.value_or(256), c.grid.offset);
}

ExtensionProblem build_problem(const ScenarioConfig& c, std::optional<ExtendedComplex> boundary) {
  const GridPtr grid = make_scenario_grid(c);
  const auto param_or_boundary = [&](const char* key) {
    return boundary ? *boundary : parse_extended(c.params.at(key));
  };
  switch (c.scenario) {
    case Scenario::halfline_laplacian: {
      std::optional<std::function<double(double)>> w;
      if (c.params.count("W")) w = real_param(c, "W", *grid);
      return build_halfline_laplacian(grid, param_or_boundary("rho"), optional_formula(c, "phi"), w);
    }
    case Scenario::inverse_square_interval:
      return build_inverse_square_interval(grid, constant_param(c, "gamma").real(), param_or_boundary("rho"),
                                           optional_formula(c, "phi"));
    case Scenario::first_order_interval: {
      const auto it = c.params.find("vector");
      const FirstOrderVector which =
          (it != c.params.end() && it->second == "singular") ? FirstOrderVector::singular : FirstOrderVector::regular;
      return build_first_order_interval(grid, constant_param(c, "gamma").real(), optional_formula(c, "l"), which);
    }
    case Scenario::halfline_schrodinger: {
      const ExtendedComplex h = param_or_boundary("h");
      if (c.params.at("perturbation") == "rank_one") {
        RankOnePerturbation r{constant_param(c, "alpha", 1.0).real(), formula_param(c, "phi"),
                              constant_param(c, "lambda")};
        return build_halfline_schrodinger(grid, h, r);
      }
      MultiplicationPerturbation m{real_param(c, "V", *grid),
                                   c.params.count("k") ? formula_param(c, "k") : Formula::zero()};
      return build_halfline_schrodinger(grid, h, m);
    }
  }
  throw Error(ErrorCode::invalid_argument, "unknown scenario");
}

}  // namespace dualext
