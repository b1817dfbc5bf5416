// Command-line front end: run scenarios, list the catalog, check object files.
// Exit codes: 0 all checks pass, 1 some check fails, 2 usage or parse error.

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "t2m/t2m.hpp"

namespace {

constexpr int kPass = 0;
constexpr int kFail = 1;
constexpr int kUsage = 2;

/// Default tolerance, overridable through T2M_TOL.
double default_tolerance() {
  const char* env = std::getenv("T2M_TOL");
  if (env == nullptr || *env == '\0') return 1e-9;
  char* end = nullptr;
  const double v = std::strtod(env, &end);
  if (end == env || *end != '\0' || !(v >= 0.0) || !std::isfinite(v))
    throw t2m::ParseError(std::string("T2M_TOL is not a non-negative number: \"") + env + "\"");
  return v;
}

std::vector<std::string> split_suites(const std::string& arg) {
  std::vector<std::string> out;
  if (arg == "all" || arg.empty()) return t2m::suite_names();
  if (arg == "none") return out;
  std::string cur;
  for (char ch : arg + ",") {
    if (ch == ',') {
      if (cur == "all") return t2m::suite_names();
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  return out;
}

int emit(const t2m::VerificationReport& rep, const std::string& format) {
  if (format == "json")
    std::cout << rep.to_json().dump(2) << "\n";
  else
    std::cout << rep.to_text();
  return rep.all_pass() ? kPass : kFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Verification toolkit for second-order tangent bundles"};
  app.require_subcommand(1);

  std::string scenario, format = "json";
  std::optional<int> points;
  std::optional<std::uint64_t> seed;
  std::optional<double> tol;
  std::optional<std::string> suite;
  auto* run = app.add_subcommand("run", "Run the suites of a scenario (built-in name or JSON file)");
  run->add_option("--scenario", scenario, "Scenario name or path")->required();
  run->add_option("--points", points, "Sample points per check")->check(CLI::PositiveNumber);
  run->add_option("--seed", seed, "Sampling seed");
  run->add_option("--tol", tol, "Absolute tolerance")->check(CLI::NonNegativeNumber);
  run->add_option("--format", format, "Report format")->check(CLI::IsMember({"json", "text"}));
  run->add_option("--suite", suite,
                  "Suites: eq1-8, sec2, sec3, sec4, all, none, or a comma-separated list "
                  "(default: the scenario's own selection)");

  app.add_subcommand("list", "List the built-in scenarios");

  std::string input, kind, check_format = "json";
  std::optional<int> check_points;
  std::optional<std::uint64_t> check_seed;
  std::optional<double> check_tol;
  auto* check = app.add_subcommand("check", "Check one object document");
  check->add_option("--input", input, "JSON file")->required();
  check->add_option("--kind", kind, "Object kind")->required()->check(CLI::IsMember({"connection", "linear", "finsler"}));
  check->add_option("--points", check_points, "Sample points")->check(CLI::PositiveNumber);
  check->add_option("--seed", check_seed, "Sampling seed");
  check->add_option("--tol", check_tol, "Absolute tolerance")->check(CLI::NonNegativeNumber);
  check->add_option("--format", check_format, "Report format")->check(CLI::IsMember({"json", "text"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (app.got_subcommand("list")) {
      std::cout << t2m::list_scenarios();
      return kPass;
    }
    const double default_tol = default_tolerance();
    if (app.got_subcommand("run")) {
      const t2m::Scenario s = t2m::resolve_scenario(scenario);
      t2m::RunOptions opts;
      opts.points = points;
      opts.seed = seed;
      opts.tol = tol;
      opts.default_tol = default_tol;
      if (suite) opts.suites = split_suites(*suite);
      return emit(t2m::run_scenario(s, opts), format);
    }
    t2m::SamplingSpec sampling;
    if (check_points) sampling.points = *check_points;
    if (check_seed) sampling.seed = *check_seed;
    const t2m::Json doc = t2m::read_json_file(input);
    const auto rep = t2m::check_object(doc, t2m::parse_object_kind(kind), sampling, check_tol ? *check_tol : default_tol);
    return emit(rep, check_format);
  } catch (const t2m::SchemaError& e) {
    std::cerr << "schema error: " << e.what() << "\n";
    return kUsage;
  } catch (const t2m::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const t2m::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFail;
  }
}
