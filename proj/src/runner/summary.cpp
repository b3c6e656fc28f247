#include "cascade/runner/summary.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "cascade/metrics/metrics.hpp"
#include "cascade/runner/atomic_file.hpp"

namespace cascade::runner {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_delta(double attacked, double initial) {
  if (initial == 0.0) return "n/a";
  double pct = (attacked - initial) / initial * 100.0;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%+.1f%%", pct);
  std::string s = buf;
  if (s == "-0.0%") s = "+0.0%";
  return s;
}

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

std::string delta_row(const std::string& name, const metrics::MetricReport& a, const metrics::MetricReport& c) {
  std::string out = "| " + name + " | " + format_delta(a.task_metric, c.task_metric) + " | " +
                    format_delta(a.normalized_token_cost, c.normalized_token_cost) + " | " +
                    format_delta(a.simulated_time, c.simulated_time) + " |";
  for (std::size_t i = 0; i < c.pass_rates.size(); ++i) {
    out += " " + format_delta(i < a.pass_rates.size() ? a.pass_rates[i] : 0.0, c.pass_rates[i]) + " |";
  }
  return out + "\n";
}

}  // namespace

std::string render_summary(const fs::path& dir) {
  const json cfg = read_json(dir / "config.json");
  const auto clean = metrics::report_from_json(read_json(dir / "clean" / "metrics.json"));
  const json clean_dec = read_json(dir / "clean" / "decomposition.json");

  std::vector<std::pair<std::string, metrics::MetricReport>> rows{{"clean", clean}};
  std::vector<std::pair<std::string, json>> gaps;
  if (fs::exists(dir / "attacks" / "index.json")) {
    for (const auto& entry : read_json(dir / "attacks" / "index.json")) {
      const std::string name = entry.at("name").get<std::string>();
      rows.emplace_back(name, metrics::report_from_json(read_json(dir / "attacks" / name / "metrics.json")));
      gaps.emplace_back(name, read_json(dir / "attacks" / name / "gap_shift.json"));
    }
  }

  std::ostringstream out;
  out << "# Experiment summary\n\n";
  out << "- seed: " << cfg.at("seed").dump() << "\n";
  out << "- generator: " << cfg.at("cascade").at("generator").get<std::string>() << "\n";
  out << "- samples: " << clean.n << "\n";
  out << "- stages: " << clean_dec.at("stages").dump() << "\n";
  if (fs::exists(dir / "clean" / "cascade.json")) {
    const bool det = read_json(dir / "clean" / "cascade.json").value("deterministic", true);
    out << "- deterministic: " << (det ? "yes" : "no (remote stages)") << "\n";
  }
  out << "\n";

  out << "## Metrics\n\n" << metrics::render_markdown(rows) << "\n";

  if (rows.size() > 1) {
    out << "## Change relative to clean\n\n";
    out << "| Setting | Performance | Token cost | Time cost |";
    for (std::size_t i = 0; i < clean.pass_rates.size(); ++i) out << " Passrate_" << i + 1 << " |";
    out << "\n|---|---|---|---|";
    for (std::size_t i = 0; i < clean.pass_rates.size(); ++i) out << "---|";
    out << "\n";
    for (std::size_t k = 1; k < rows.size(); ++k) out << delta_row("Δ " + rows[k].first, rows[k].second, clean);
    out << "\n";
  }

  out << "## Cascade gap\n\n";
  out << "| Setting | gap | routing shift | conditional gap | cross |\n|---|---|---|---|---|\n";
  out << "| clean | " << num(clean_dec.at("gap").at("value").get<double>()) << " | - | - | - |\n";
  for (const auto& [name, g] : gaps) {
    out << "| " << name << " | " << num(g.at("delta_adv").at("value").get<double>()) << " | "
        << num(g.at("routing_total").at("value").get<double>()) << " | "
        << num(g.at("conditional_total").at("value").get<double>()) << " | "
        << num(g.at("cross_total").at("value").get<double>()) << " |\n";
  }

  if (fs::exists(dir / "defense.csv")) {
    out << "\n## Defenses\n\n";
    std::istringstream csv(read_file(dir / "defense.csv"));
    std::string line;
    bool header = true;
    while (std::getline(csv, line)) {
      if (line.empty()) continue;
      std::string row = "|";
      std::stringstream cells(line);
      std::string cell;
      std::size_t count = 0;
      while (std::getline(cells, cell, ',')) {
        row += " " + cell + " |";
        ++count;
      }
      if (!line.empty() && line.back() == ',') {
        row += "  |";
        ++count;
      }
      out << row << "\n";
      if (header) {
        out << "|";
        for (std::size_t i = 0; i < count; ++i) out << "---|";
        out << "\n";
        header = false;
      }
    }
  }
  return out.str();
}

}  // namespace cascade::runner
