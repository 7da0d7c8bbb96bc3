#include "dualext/commands.hpp"

#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <thread>

#include <json.hpp>

namespace dualext {

namespace {

using Json = nlohmann::ordered_json;

/// Finite numbers as JSON numbers; inf and nan as strings.
Json number(double x) {
  if (std::isfinite(x)) return x;
  return format_double(x);
}

std::string shortest(double x) {
  if (!std::isfinite(x)) return format_double(x);
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

Json header(const char* command, const ScenarioConfig& c) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["command"] = command;
  j["tool"] = kToolVersion;
  j["scenario"] = to_string(c.scenario);
  Json params = Json::object();
  for (const auto& [k, v] : c.params) params[k] = v;
  j["parameters"] = params;
  const GridPtr g = make_scenario_grid(c);
  j["grid"] = {{"n", g->n}, {"length", g->length}, {"offset", g->offset}};
  return j;
}

Json verdict_json(const Verdict& v) {
  Json j;
  j["criterion"] = to_string(v.criterion);
  j["lhs"] = number(v.lhs);
  j["rhs"] = number(v.rhs);
  j["margin"] = number(v.margin);
  j["dissipative"] = v.dissipative ? Json(*v.dissipative) : Json(nullptr);
  Json f = Json::array();
  for (auto x : v.failures) f.push_back(to_string(x));
  j["necessity_failures"] = f;
  return j;
}

int error_exit(ErrorCode code) { return code == ErrorCode::not_dissipative_input ? 1 : 2; }

template <class F>
CommandOutput guarded(F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    return error_output(e.code(), e.what());
  } catch (const std::exception& e) {
    CommandOutput out = error_output(ErrorCode::invalid_argument, e.what());
    return out;
  }
}

struct SweepPoint {
  double re = 0.0, im = 0.0, margin = 0.0;
  bool dissipative = false;
};

}  // namespace

void apply_overrides(ScenarioConfig& c, const Overrides& o) {
  if (o.out) c.output.path = *o.out;
  if (o.format) c.output.format = *o.format;
  if (o.meshes) c.oracle.meshes = *o.meshes;
  if (o.tol) {
    if (!(*o.tol > 0.0)) throw Error(ErrorCode::invalid_argument, "--tol must be positive");
    c.oracle.tol = *o.tol;
  }
}

std::vector<int> parse_mesh_list(const std::string& text) {
  std::vector<int> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto comma = std::min(text.find(',', pos), text.size());
    std::string item = text.substr(pos, comma - pos);
    item.erase(0, item.find_first_not_of(' '));
    item.erase(item.find_last_not_of(' ') + 1);
    int n = 0;
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), n);
    if (ec != std::errc() || ptr != item.data() + item.size() || item.empty())
      throw Error(ErrorCode::invalid_argument, "bad mesh list '" + text + "'");
    if (n < 32) throw Error(ErrorCode::invalid_argument, "meshes need at least 32 elements");
    if (!out.empty() && n <= out.back()) throw Error(ErrorCode::invalid_argument, "meshes must be increasing");
    out.push_back(n);
    pos = comma + 1;
  }
  return out;
}

CommandOutput error_output(ErrorCode code, const std::string& message) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["error"] = {{"code", to_string(code)}, {"message", message}};
  return {error_exit(code), dump(j)};
}

CommandOutput run_check(const ScenarioConfig& c) {
  return guarded([&] {
    if (c.output.format != OutputFormat::json)
      throw Error(ErrorCode::invalid_argument, "check writes json only");
    const ExtensionProblem p = build_problem(c);
    const Verdict v = evaluate(p, c.criterion);
    Json j = header("check", c);
    j["verdict"] = verdict_json(v);
    j["reference_margin"] = number(p.reference.margin);
    j["maximal"] = maximality_count(p.added_dim, p.defect_dim);
    const int code = !v.dissipative ? 2 : (*v.dissipative ? 0 : 1);
    return CommandOutput{code, dump(j)};
  });
}

CommandOutput run_sweep(const ScenarioConfig& c, unsigned threads) {
  return guarded([&] {
    const auto key = boundary_key(c.scenario);
    if (!key) throw Error(ErrorCode::invalid_argument, std::string(to_string(c.scenario)) + " has no boundary parameter to sweep");
    if (!c.sweep) throw Error(ErrorCode::invalid_argument, "config has no [sweep] section");
    const std::vector<double> re = c.sweep->re.points();
    const std::vector<double> im = c.sweep->im.points();
    if (c.scenario == Scenario::halfline_schrodinger && im.front() < 0.0)
      throw Error(ErrorCode::not_dissipative_input, "sweep over h needs im_min >= 0");

    const std::size_t total = re.size() * im.size();
    std::vector<SweepPoint> points(total);
    std::vector<std::string> errors(total);
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
      for (std::size_t k = next++; k < total; k = next++) {
        SweepPoint& pt = points[k];
        pt.re = re[k / im.size()];
        pt.im = im[k % im.size()];
        try {
          const Verdict v = evaluate(build_problem(c, Complex(pt.re, pt.im)), c.criterion);
          pt.margin = v.margin;
          pt.dissipative = v.dissipative.value_or(false);
        } catch (const std::exception& e) {
          errors[k] = e.what();
        }
      }
    };
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, total));
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    for (std::size_t k = 0; k < total; ++k)
      if (!errors[k].empty())
        throw Error(ErrorCode::invalid_argument, "at " + *key + " = " +
                                                     format_complex(Complex(points[k].re, points[k].im)) + ": " +
                                                     errors[k]);

    std::string text;
    if (c.output.format == OutputFormat::csv) {
      text = "re_" + *key + ",im_" + *key + ",margin,dissipative\n";
      for (const auto& pt : points)
        text += shortest(pt.re) + "," + shortest(pt.im) + "," + shortest(pt.margin) + "," +
                (pt.dissipative ? "true" : "false") + "\n";
    } else {
      Json j = header("sweep", c);
      j["parameter"] = *key;
      const auto axis = [](const Axis& a, std::size_t n) {
        return Json{{"min", a.min}, {"max", a.max}, {"step", a.step}, {"count", n}};
      };
      j["axes"] = {{"re", axis(c.sweep->re, re.size())}, {"im", axis(c.sweep->im, im.size())}};
      Json rows = Json::array();
      for (const auto& pt : points)
        rows.push_back({{"re", pt.re}, {"im", pt.im}, {"margin", number(pt.margin)}, {"dissipative", pt.dissipative}});
      j["points"] = rows;
      text = dump(j);
    }
    return CommandOutput{0, text};
  });
}

CommandOutput run_oracle(const ScenarioConfig& c) {
  return guarded([&] {
    if (c.output.format != OutputFormat::json)
      throw Error(ErrorCode::invalid_argument, "oracle writes json only");
    const ExtensionProblem p = build_problem(c);
    const Verdict v = evaluate(p, c.criterion);
    OracleOptions opt;
    opt.halfline_radius = c.oracle.radius;
    opt.tolerance = c.oracle.tol;
    const OracleReport r = cross_validate(p, v, c.oracle.meshes, opt);

    Json j = header("oracle", c);
    j["verdict"] = verdict_json(v);
    Json infima = Json::array();
    for (double x : r.infima) infima.push_back(number(x));
    const bool resolution_limited = v.dissipative.has_value() && !r.agrees.has_value();
    j["report"] = {{"meshes", r.meshes},
                   {"infima", infima},
                   {"extrapolated", number(r.extrapolated)},
                   {"order", r.order ? number(*r.order) : Json(nullptr)},
                   {"resolution", r.resolution},
                   {"tolerance", c.oracle.tol},
                   {"agrees", r.agrees ? Json(*r.agrees) : Json(nullptr)},
                   {"resolution_limited", resolution_limited},
                   {"tail", r.tail},
                   {"note", r.note}};
    int code = 2;
    if (r.agrees == true || resolution_limited) code = 0;
    if (r.agrees == false) code = 1;
    return CommandOutput{code, dump(j)};
  });
}

int run_command(Command cmd, const std::string& config_path, const Overrides& o, std::ostream& out) {
  CommandOutput result;
  std::string path = o.out.value_or("-");
  try {
    ScenarioConfig c = load_config(config_path);
    apply_overrides(c, o);
    path = c.output.path;
    switch (cmd) {
      case Command::check: result = run_check(c); break;
      case Command::sweep: result = run_sweep(c); break;
      case Command::oracle: result = run_oracle(c); break;
    }
  } catch (const Error& e) {
    result = error_output(e.code(), e.what());
  }
  if (path == "-") {
    out << result.text;
    return result.exit_code;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) {
    out << error_output(ErrorCode::io_error, "cannot write " + path).text;
    return 2;
  }
  file << result.text;
  return result.exit_code;
}

}  // namespace dualext
