#include "orthodeg/cli/config.hpp"
#include "orthodeg/cli/experiments.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>

using namespace orthodeg;
using namespace orthodeg::cli;

namespace {

struct Flags {
  std::string config;
  std::string out;
  int jobs = 1;
  long long seed = -1;
  bool dump_system = false;
};

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("cannot read " + path);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

ExperimentConfig load(const std::string& id, const Flags& fl) {
  std::string text = fl.config.empty() ? "experiment = " + id + "\n" : read_file(fl.config);
  ExperimentConfig cfg = parse_config(text);
  if (cfg.experiment != id) {
    throw ValidationError("config experiment '" + cfg.experiment + "' does not match subcommand '" + id + "'");
  }
  if (fl.seed >= 0) {
    cfg.seed = static_cast<std::uint64_t>(fl.seed);
    cfg.echo.emplace_back("seed", std::to_string(fl.seed));
  }
  return cfg;
}

std::string out_dir(const ExperimentConfig& cfg, const Flags& fl, bool nested) {
  const std::string explicit_dir = !fl.out.empty() ? fl.out : cfg.out_dir;
  if (explicit_dir.empty()) return (std::filesystem::path("out") / cfg.experiment).string();
  return nested ? (std::filesystem::path(explicit_dir) / cfg.experiment).string() : explicit_dir;
}

int summarize(const ExperimentReport& r, const std::string& dir) {
  std::cout << r.experiment << " -> " << dir << '\n';
  for (const Check& c : r.checks) {
    std::cout << "  " << to_string(c.verdict) << "  " << c.name << "  value=" << c.value << ' ' << c.relation << ' '
              << c.threshold;
    if (!c.detail.empty()) std::cout << "  (" << c.detail << ')';
    std::cout << '\n';
  }
  return r.all_pass() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weighted degenerate elliptic experiments"};
  app.require_subcommand(1);
  Flags fl;
  auto add_flags = [&](CLI::App* sub) {
    sub->add_option("--config", fl.config, "key = value configuration file");
    sub->add_option("--out", fl.out, "output directory");
    sub->add_option("--jobs", fl.jobs, "worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--seed", fl.seed, "override the configured seed")->check(CLI::NonNegativeNumber);
    sub->add_flag("--dump-system", fl.dump_system, "write the assembled system as system.txt");
  };
  for (const std::string& id : experiment_ids()) add_flags(app.add_subcommand(id, "run the " + id + " experiment"));
  CLI::App* all = app.add_subcommand("all", "run every experiment with default settings, --jobs at a time");
  add_flags(all);
  app.add_subcommand("keys", "list configuration keys");
  CLI11_PARSE(app, argc, argv);

  try {
    CLI::App* sub = app.get_subcommands().front();
    const std::string name = sub->get_name();
    if (name == "keys") {
      for (const auto& [k, help] : config_keys()) std::cout << k << "  " << help << '\n';
      return 0;
    }
    RunOptions opt{fl.jobs, fl.dump_system};
    if (name == "all") {
      if (!fl.config.empty()) throw ValidationError("'all' runs the defaults; --config is not accepted");
      std::vector<ExperimentConfig> cfgs;
      for (const std::string& id : experiment_ids()) {
        ExperimentConfig c = parse_config("experiment = " + id + "\n");
        if (fl.seed >= 0) c.seed = static_cast<std::uint64_t>(fl.seed);
        cfgs.push_back(c);
      }
      std::vector<ExperimentReport> reports(cfgs.size());
      RunOptions inner{1, fl.dump_system};
      for (std::size_t start = 0; start < cfgs.size(); start += fl.jobs) {
        std::vector<std::future<void>> jobs;
        for (std::size_t k = start; k < std::min(cfgs.size(), start + fl.jobs); ++k)
          jobs.push_back(std::async(std::launch::async, [&, k] { reports[k] = run_experiment(cfgs[k], inner); }));
        for (auto& j : jobs) j.get();
      }
      int status = 0;
      for (std::size_t k = 0; k < cfgs.size(); ++k) {
        const std::string dir = out_dir(cfgs[k], fl, true);
        write_report(reports[k], dir);
        status |= summarize(reports[k], dir);
      }
      return status;
    }
    const ExperimentConfig cfg = load(name, fl);
    const ExperimentReport rep = run_experiment(cfg, opt);
    const std::string dir = out_dir(cfg, fl, false);
    write_report(rep, dir);
    return summarize(rep, dir);
  } catch (const LineError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return 2;
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
