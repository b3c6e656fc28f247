// Command-line front end: run, attack, defend, analyze, transfer, report.

#include <filesystem>
#include <iostream>

#include "CLI11.hpp"

#include "cascade/analysis/analysis.hpp"
#include "cascade/errors.hpp"
#include "cascade/runner/atomic_file.hpp"
#include "cascade/runner/config.hpp"
#include "cascade/runner/experiment.hpp"
#include "cascade/runner/summary.hpp"
#include "cascade/runner/transfer.hpp"

namespace fs = std::filesystem;
using namespace cascade;

namespace {

constexpr int kConfigExit = 2;
constexpr int kRuntimeExit = 3;

void analyze_dir(const fs::path& dir, std::ostream& out) {
  const auto records = runner::records_from_trace_lines(runner::read_jsonl(dir / "traces.jsonl"));
  out << "== " << dir.string() << "\n" << analysis::render_decomposition(analysis::decomposition(records));
  const fs::path clean = dir.parent_path().parent_path() / "clean" / "traces.jsonl";
  if (dir.parent_path().filename() == "attacks" && fs::exists(clean)) {
    const auto base = runner::records_from_trace_lines(runner::read_jsonl(clean));
    out << "-- shift relative to clean\n" << analysis::render_gap_shift(analysis::gap_shift(base, records));
  }
  out << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-stage cascade attack and analysis toolkit"};
  app.require_subcommand(1);

  std::size_t threads = 1;
  std::string config_path, out_dir, target_dir, suffix_path, json_out;

  auto add_run_like = [&](const char* name, const char* help) {
    auto* cmd = app.add_subcommand(name, help);
    cmd->add_option("config", config_path, "experiment config (JSON)")->required();
    cmd->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
    cmd->add_option("--out", out_dir, "output directory (overrides the config)");
    return cmd;
  };
  auto* run = add_run_like("run", "clean evaluation, attacks, defenses and summary");
  auto* atk = add_run_like("attack", "clean evaluation and attacks only");
  auto* dfd = add_run_like("defend", "full run; fails without a defense section");

  auto* analyze = app.add_subcommand("analyze", "routing decomposition of a trace directory");
  analyze->add_option("trace-dir", target_dir, "directory holding traces.jsonl, or an experiment directory")
      ->required();

  auto* transfer = app.add_subcommand("transfer", "apply stored suffixes to another cascade");
  transfer->add_option("suffix-file", suffix_path, "suffixes.json")->required();
  transfer->add_option("target-config", config_path, "experiment config of the target")->required();
  transfer->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
  transfer->add_option("--json", json_out, "also write the result as JSON");

  auto* report = app.add_subcommand("report", "print the summary of an experiment directory");
  report->add_option("experiment-dir", target_dir, "experiment directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigExit;
  }

  try {
    if (run->parsed() || atk->parsed() || dfd->parsed()) {
      const auto cfg = runner::load_config(config_path);
      if (dfd->parsed() && cfg.defense.empty()) throw ConfigError("config has no defense section");
      runner::RunOptions opts;
      opts.threads = threads;
      opts.defense = !atk->parsed();
      if (!out_dir.empty()) opts.output_dir = out_dir;
      const fs::path dir = runner::run_experiment(cfg, opts);
      std::cout << runner::read_file(dir / "summary.md");
      std::cerr << "wrote " << dir.string() << "\n";
    } else if (analyze->parsed()) {
      const fs::path dir = target_dir;
      if (fs::exists(dir / "traces.jsonl")) {
        analyze_dir(dir, std::cout);
      } else if (fs::exists(dir / "clean" / "traces.jsonl")) {
        analyze_dir(dir / "clean", std::cout);
        if (fs::exists(dir / "attacks" / "index.json")) {
          for (const auto& e : runner::read_json(dir / "attacks" / "index.json")) {
            analyze_dir(dir / "attacks" / e.at("name").get<std::string>(), std::cout);
          }
        }
      } else {
        throw ConfigError("no traces.jsonl under " + dir.string());
      }
    } else if (transfer->parsed()) {
      const auto cfg = runner::load_config(config_path);
      const auto target = runner::build_experiment(cfg);
      const auto suffixes = runner::load_suffix_file(suffix_path);
      const auto r = runner::transfer_eval(suffixes, target, threads);
      std::cout << runner::render_transfer(r);
      if (r.unknown_tokens > 0) std::cerr << "warning: " << r.unknown_tokens << " unknown suffix tokens\n";
      if (!json_out.empty()) {
        runner::write_json_atomic(json_out, nlohmann::json{{"clean", metrics::report_to_json(r.clean)},
                                                           {"transfer", metrics::report_to_json(r.attacked)},
                                                           {"unknown_tokens", r.unknown_tokens},
                                                           {"unknown_surfaces", r.unknown_surfaces}});
      }
    } else if (report->parsed()) {
      std::cout << runner::render_summary(target_dir);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigExit;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntimeExit;
  }
  return 0;
}
