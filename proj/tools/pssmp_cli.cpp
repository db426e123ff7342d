#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "pssmp/experiments.hpp"

namespace {

using pssmp::cli::ConfigError;
using pssmp::cli::json;

constexpr int kOk = 0, kConfig = 2, kNumeric = 3, kCheckFailed = 4;

json read_config(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
  }
}

std::string checks_csv(const pssmp::cli::Report& r) {
  std::ostringstream os;
  os.precision(17);
  os << "name,value,op,threshold,pass\n";
  for (const auto& c : r.checks)
    os << '"' << c.name << "\"," << c.value << ',' << c.op << ',' << c.threshold << ',' << (c.pass ? 1 : 0) << '\n';
  return os.str();
}

/// Writes to a sibling temporary and renames, so readers never see partial output.
void write_atomic(const std::string& path, const std::string& body) {
  namespace fs = std::filesystem;
  fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write output '" + path + "'");
    out << body;
    if (!out.flush()) throw ConfigError("cannot write output '" + path + "'");
  }
  fs::rename(tmp, target);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Positive self-similar Markov process experiments"};
  std::string command, config_path, out_path, format = "json";
  std::uint64_t seed = 0;
  unsigned jobs = 1;
  bool check = false, timing = false;
  app.add_option("command", command, "experiment to run")->required();
  app.add_option("--config", config_path, "JSON config file");
  auto* seed_opt = app.add_option("--seed", seed, "master seed (overrides the config)");
  app.add_option("--out", out_path, "output file (default stdout)");
  app.add_option("--format", format, "output format")->check(CLI::IsMember({"csv", "json"}));
  app.add_flag("--check", check, "exit 4 when any check fails");
  app.add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
  app.add_flag("--timing", timing, "record wall-clock runtime in the report");
  app.footer("commands: lamperti-oracle round-trip limit-v dynkin-lamperti darling-kac mittag-leffler expfun lil\n"
             "          integral-test short-time frag ergodic tabulate-v path lamperti");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }

  pssmp::cli::RunOptions opt;
  if (*seed_opt) opt.seed = seed;
  opt.jobs = jobs;
  opt.timing = timing;
  try {
    json cfg = read_config(config_path);
    if (cfg.is_object()) {
      if (out_path.empty() && cfg.contains("out") && cfg["out"].is_string()) out_path = cfg["out"].get<std::string>();
      if (app.count("--format") == 0 && cfg.contains("format") && cfg["format"].is_string()) {
        format = cfg["format"].get<std::string>();
        if (format != "csv" && format != "json") throw ConfigError("format must be csv or json");
      }
    }
    auto report = pssmp::cli::run_command(command, cfg, opt);
    std::string body;
    if (format == "json") body = report.to_json().dump(2) + "\n";
    else body = report.csv.empty() ? checks_csv(report) : report.csv;
    if (out_path.empty()) std::cout << body << std::flush;
    else write_atomic(out_path, body);
    if (!report.pass()) {
      for (const auto& c : report.checks)
        if (!c.pass)
          std::cerr << "check failed: " << c.name << " (" << c.value << " " << c.op << " " << c.threshold << ")\n";
      if (check) return kCheckFailed;
    }
    return kOk;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return kNumeric;
  }
}
