#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include <json.hpp>

#include "dualext/commands.hpp"
#include "dualext/expression.hpp"

using namespace dualext;
using nlohmann::json;

namespace {

const char* kShirley = R"([scenario]
name = shirley
gamma = 2
rho = 0.5+0.375i
phi = x^2 - x
)";

int error_column(const std::string& text) {
  try {
    Expression::parse(text);
  } catch (const ExpressionError& e) {
    return e.column();
  }
  return 0;
}

std::string config_error(const std::string& text) {
  try {
    parse_config(text);
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

bool contains(const std::string& s, const std::string& part) { return s.find(part) != std::string::npos; }

ScenarioConfig with_sweep(std::string text, double lo, double hi, double step) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "[sweep]\nre_min = %g\nre_max = %g\nre_step = %g\nim_min = %g\nim_max = %g\nim_step = %g\n",
                lo, hi, step, lo, hi, step);
  return parse_config(text + buf);
}

}  // namespace

TEST_CASE("expressions evaluate with derivatives") {
  const Formula f = Expression::parse("x^2 - x").formula();
  CHECK(std::abs(f.value(0.3) - Complex(-0.21)) < 1e-15);
  CHECK(std::abs(f.first(0.3) - Complex(-0.4)) < 1e-15);
  CHECK(std::abs(f.second(0.3) - Complex(2.0)) < 1e-15);

  const Formula s = Expression::parse("sin(pi*x)").formula();
  const double pi = std::numbers::pi;
  CHECK(std::abs(s.second(0.25) + pi * pi * std::sin(pi * 0.25)) < 1e-12);

  const Formula e = Expression::parse("x*exp(-x)").formula();
  CHECK(std::abs(e.second(1.5) - (1.5 - 2.0) * std::exp(-1.5)) < 1e-14);

  const Formula pw = Expression::parse("x^(2.25)").formula();
  CHECK(std::abs(pw.second(0.5) - 2.25 * 1.25 * std::pow(0.5, 0.25)) < 1e-13);

  CHECK(Expression::parse("0.5+0.375i").constant() == Complex(0.5, 0.375));
  CHECK(Expression::parse("-2^2").constant() == Complex(-4.0));
  CHECK(Expression::parse("2^3^2").constant() == Complex(512.0));
  CHECK(Expression::parse("(1+i)*(1-i)").constant() == Complex(2.0));
  CHECK_FALSE(Expression::parse("3 + 0*2").depends_on_x());
  const Expression ind = Expression::parse("2*ind(0, 1)");
  CHECK(ind.value(0.0) == Complex(2.0));
  CHECK(ind.value(0.999) == Complex(2.0));
  CHECK(ind.value(1.0) == Complex(0.0));
  CHECK_THROWS_AS(Expression::parse("x + 1").constant(), Error);
}

TEST_CASE("expression errors carry the column") {
  CHECK(error_column("x^2 - * x") == 7);
  CHECK(error_column("foo(x)") == 1);
  CHECK(error_column("(x + 1") == 7);
  CHECK(error_column("x $ 2") == 3);
  CHECK(error_column("1e999") == 1);
  CHECK(error_column("ind(x, 1)") == 5);
  CHECK(error_column("ind(1, 0)") == 1);
  CHECK(error_column("") == 1);
  CHECK(error_column("exp x") == 5);
}

TEST_CASE("minimal config parses and runs") {
  const ScenarioConfig c = parse_config(kShirley);
  CHECK(c.scenario == Scenario::inverse_square_interval);
  CHECK(c.params.at("rho") == "0.5+0.375i");
  CHECK(c.oracle.meshes == kDefaultMeshes);
  CHECK(make_scenario_grid(c)->n == 256);
  const auto out = run_check(c);
  CHECK(out.exit_code == 0);
  const json j = json::parse(out.text);
  CHECK(j["schema_version"] == 1);
  CHECK(std::abs(j["verdict"]["margin"].get<double>() - 35.0 / 192.0) < 1e-10);
  CHECK(j["verdict"]["necessity_failures"].empty());
}

TEST_CASE("config round trip") {
  const std::vector<std::string> texts{
      kShirley,
      "[scenario]\nname = potsdam\nrho = inf\nphi = x*exp(-x)\nW = ind(0, 1)\n[grid]\nR = 32\nn = 512\n"
      "[oracle]\nmeshes = 32, 64\ntol = 1e-6\nR = 8\n[output]\nformat = csv\npath = out.csv\n",
      "[scenario]\nname = konzert\ncriterion = general\ngamma = 1/4\nl = 1\nvector = singular\n[grid]\noffset = 0.001\n",
      "[scenario]\nname = halfline_schrodinger\nh = 1+i\nperturbation = multiplication\nV = ind(0,1)\nk = 2*ind(0,1)\n"
      "[sweep]\nre_min = -1\nre_max = 1\nre_step = 0.1\nim_min = 0\nim_max = 1\nim_step = 0.25\n",
  };
  for (const auto& t : texts) {
    const ScenarioConfig c = parse_config(t);
    CHECK(parse_config(serialize_config(c)) == c);
  }

  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 50; ++k) {
    ScenarioConfig c = parse_config(kShirley);
    c.grid.offset = u(rng) * 1e-3;
    c.oracle.tol = u(rng) * 1e-4 + 1e-12;
    c.oracle.radius = 1.0 + 20.0 * u(rng);
    c.sweep = SweepConfig{{-u(rng), u(rng), 0.01 + u(rng)}, {-u(rng), u(rng), 0.01 + u(rng)}};
    CHECK(parse_config(serialize_config(c)) == c);
  }
}

TEST_CASE("config errors point at the offending entry") {
  const std::string empty = config_error("");
  CHECK(contains(empty, "line 1, column 1"));
  for (const char* key : {"name", "rho", "gamma", "h", "perturbation"}) CHECK(contains(empty, key));

  const std::string k = config_error("[scenario]\nname = konzert\ngamma = 0.7\n");
  CHECK(contains(k, "line 3, column 9"));
  CHECK(contains(k, "0 < gamma < 1/2"));
  CHECK(contains(config_error("[scenario]\nname = shirley\ngamma = 1.5\nrho = 1\n"), "sqrt(3)"));

  CHECK(contains(config_error("[scenario]\nname = lisbon\n"), "line 2, column 8: unknown scenario"));
  CHECK(contains(config_error("[scenario]\nname = shirley\ngamma = 2\nrho = 1\nphi = x^2 - * x\n"),
                 "line 5, column 13"));
  CHECK(contains(config_error("name = shirley\n"), "outside of any section"));
  CHECK(contains(config_error("[scenario]\nname = konzert\nname = konzert\n"), "repeated"));
  CHECK(contains(config_error("[scenery]\n"), "unknown section"));
  CHECK(contains(config_error("[scenario]\nname = konzert\ngamma = 0.25\nrho = 1\n"), "does not apply"));
  CHECK(contains(config_error("[scenario]\nname = konzert\n"), "missing required key 'gamma'"));
  CHECK(contains(config_error(std::string(kShirley) + "[grid]\nn = 100\n"), "multiple of 8"));
  CHECK(contains(config_error(std::string(kShirley) + "[grid]\nn = 12x\n"), "integer"));
  CHECK(contains(config_error(std::string(kShirley) + "[oracle]\nmeshes = 64,32\n"), "increasing"));
  CHECK(contains(config_error(std::string(kShirley) + "[output]\nformat = xml\n"), "json or csv"));
  CHECK(contains(config_error(std::string(kShirley) + "[sweep]\nre_min = 0\n"), "[sweep] needs"));
  CHECK(contains(config_error("[scenario]\nname = halfline_schrodinger\nh = i\nperturbation = rank_one\n"),
                 "rank_one needs phi"));

  const ScenarioConfig complex_w = parse_config("[scenario]\nname = potsdam\nrho = 1\nW = i*x\n");
  CHECK_THROWS_AS(build_problem(complex_w), Error);
  CHECK(run_check(complex_w).exit_code == 2);
}

TEST_CASE("check exit codes") {
  CHECK(run_check(parse_config(kShirley)).exit_code == 0);
  const auto no_phi = run_check(parse_config("[scenario]\nname = shirley\ngamma = 2\nrho = 0.5+0.375i\n"));
  CHECK(no_phi.exit_code == 1);
  CHECK(json::parse(no_phi.text)["verdict"]["dissipative"] == false);

  const auto edge = run_check(parse_config("[scenario]\nname = konzert\ngamma = 0.25\nl = 1\n"));
  CHECK(edge.exit_code == 0);
  CHECK(std::abs(json::parse(edge.text)["verdict"]["margin"].get<double>()) < 1e-10);

  const auto negative_h =
      run_check(parse_config("[scenario]\nname = halfline_schrodinger\nh = 1-i\nperturbation = multiplication\nV = 1\n"));
  CHECK(negative_h.exit_code == 1);
  CHECK(json::parse(negative_h.text)["error"]["code"] == "not_dissipative_input");

  ScenarioConfig csv = parse_config(kShirley);
  csv.output.format = OutputFormat::csv;
  CHECK(run_check(csv).exit_code == 2);
}

TEST_CASE("sweep classifies by the closed form") {
  const ScenarioConfig c = with_sweep(kShirley, -1.0, 2.0, 0.05);
  const auto out = run_sweep(c, 4);
  REQUIRE(out.exit_code == 0);
  const json j = json::parse(out.text);
  REQUIRE(j["points"].size() == 61 * 61);
  CHECK(j["points"][0]["re"] == -1.0);
  CHECK(j["points"][1]["im"].get<double>() == doctest::Approx(-0.95));
  int checked = 0;
  for (const auto& pt : j["points"]) {
    const Complex rho(pt["re"].get<double>(), pt["im"].get<double>());
    const double closed = std::norm(rho) - rho.real() - (1.0 / 12.0 - rho.imag());
    CHECK(std::abs(pt["margin"].get<double>() - closed) < 1e-10);
    if (std::abs(closed) > 1e-9) {
      CHECK(pt["dissipative"].get<bool>() == (closed > 0.0));
      ++checked;
    }
  }
  CHECK(checked > 3000);

  const ScenarioConfig zero = with_sweep("[scenario]\nname = shirley\ngamma = 2\nrho = 1\n", -1.0, 2.0, 0.05);
  for (const auto& pt : json::parse(run_sweep(zero).text)["points"]) {
    const Complex rho(pt["re"].get<double>(), pt["im"].get<double>());
    const double closed = std::abs(rho - 0.5) - 0.5;
    if (std::abs(closed) > 1e-9) CHECK(pt["dissipative"].get<bool>() == (closed > 0.0));
  }
}

TEST_CASE("sweep output is deterministic") {
  ScenarioConfig c = with_sweep(kShirley, -0.5, 0.5, 0.1);
  c.output.format = OutputFormat::csv;
  const auto a = run_sweep(c, 1);
  const auto b = run_sweep(c, 3);
  CHECK(a.text == b.text);
  CHECK(a.text == run_sweep(c, 8).text);
  CHECK(a.text.rfind("re_rho,im_rho,margin,dissipative\n", 0) == 0);
  CHECK(contains(a.text, "\n-0.5,-0.4,"));

  ScenarioConfig single = with_sweep(kShirley, 0.25, 0.25, 0.5);
  single.output.format = OutputFormat::csv;
  const auto one = run_sweep(single);
  CHECK(one.exit_code == 0);
  CHECK(std::count(one.text.begin(), one.text.end(), '\n') == 2);

  CHECK(contains(config_error(std::string(kShirley) +
                              "[sweep]\nre_min = 0\nre_max = 1\nre_step = 0\nim_min = 0\nim_max = 1\nim_step = 1\n"),
                 "step must be positive"));
  Axis zero{0.0, 1.0, 0.0};
  CHECK_THROWS_AS(zero.points(), Error);

  const ScenarioConfig konzert = with_sweep("[scenario]\nname = konzert\ngamma = 0.25\n", 0.0, 1.0, 0.5);
  CHECK(run_sweep(konzert).exit_code == 2);
  CHECK(run_sweep(parse_config(kShirley)).exit_code == 2);
}

TEST_CASE("oracle command") {
  const auto bad = run_oracle(parse_config("[scenario]\nname = konzert\ngamma = 0.25\nl = 1.2\n"));
  CHECK(bad.exit_code == 0);
  const json jb = json::parse(bad.text);
  CHECK(jb["verdict"]["dissipative"] == false);
  CHECK(jb["report"]["agrees"] == true);
  for (const auto& mu : jb["report"]["infima"]) CHECK(mu.get<double>() < 0.0);

  const auto good = run_oracle(parse_config("[scenario]\nname = shirley\ngamma = 2\nrho = 2\n"));
  CHECK(good.exit_code == 0);
  CHECK(json::parse(good.text)["report"]["agrees"] == true);

  const auto edge = run_oracle(parse_config("[scenario]\nname = konzert\ngamma = 0.25\nl = 1\n"));
  CHECK(edge.exit_code == 0);
  CHECK(json::parse(edge.text)["report"]["resolution_limited"] == true);

  ScenarioConfig coarse = parse_config("[scenario]\nname = shirley\ngamma = 2\nrho = 2\n");
  Overrides o;
  o.meshes = parse_mesh_list("32, 64");
  o.tol = 1e-4;
  apply_overrides(coarse, o);
  const json jc = json::parse(run_oracle(coarse).text);
  CHECK(jc["report"]["meshes"].size() == 2);
  CHECK(jc["report"]["tolerance"] == 1e-4);
  CHECK_THROWS_AS(parse_mesh_list("64,abc"), Error);
  CHECK_THROWS_AS(parse_mesh_list("16"), Error);
}

TEST_CASE("run_command writes to the configured destination") {
  const std::string cfg = "test_cli_io_config.ini";
  const std::string dst = "test_cli_io_out.json";
  std::ofstream(cfg) << kShirley;
  std::ostringstream sink;
  Overrides o;
  o.out = dst;
  CHECK(run_command(Command::check, cfg, o, sink) == 0);
  CHECK(sink.str().empty());
  std::ifstream in(dst);
  std::stringstream written;
  written << in.rdbuf();
  CHECK(json::parse(written.str())["command"] == "check");

  std::ostringstream err;
  CHECK(run_command(Command::check, "no_such_file.ini", {}, err) == 2);
  CHECK(json::parse(err.str())["error"]["code"] == "io_error");
  std::remove(cfg.c_str());
  std::remove(dst.c_str());
}
