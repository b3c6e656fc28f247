#include <algorithm>
#include <cstdio>
#include <map>

#include "cascade/analysis/analysis.hpp"
#include "cascade/errors.hpp"

namespace cascade::analysis {

using nlohmann::json;

namespace {

void check_record(const RoutingRecord& r, int l) {
  const std::string who = "routing record " + std::to_string(r.sample_id);
  if (r.stage_count != l) throw IntegrityError(who + " has a different stage count");
  if (r.stop_stage < 1 || r.stop_stage > l) throw IntegrityError(who + " has stop_stage out of range");
  if (r.stage_correct.size() != static_cast<std::size_t>(r.stop_stage)) {
    throw IntegrityError(who + " needs one correctness bit per evaluated stage");
  }
  if (r.stop_stage == l && r.stage_correct.back() != r.final_stage_correct) {
    throw IntegrityError(who + " disagrees with itself on f^l");
  }
}

Rational sum(const std::vector<Rational>& v) {
  Rational s;
  for (const auto& x : v) s += x;
  return s;
}

std::string fmt(double v, const char* spec = "%.4f") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::string row(const std::vector<std::string>& cells, const std::vector<std::size_t>& widths) {
  std::string out;
  for (std::size_t k = 0; k < cells.size(); ++k) {
    std::string c = cells[k];
    if (c.size() < widths[k]) c.insert(0, widths[k] - c.size(), ' ');
    out += (k ? "  " : "") + c;
  }
  return out + "\n";
}

std::string table(const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> widths(rows.front().size(), 0);
  for (const auto& r : rows) {
    for (std::size_t k = 0; k < r.size(); ++k) widths[k] = std::max(widths[k], r[k].size());
  }
  std::string out;
  for (const auto& r : rows) out += row(r, widths);
  return out;
}

}  // namespace

bool DecompositionReport::partition_holds() const {
  std::int64_t total = 0;
  for (auto c : count_S) total += c;
  return total == n && sum(pr_S) == Rational(n > 0 ? 1 : 0);
}

bool DecompositionReport::decomposition_holds() const {
  std::int64_t total = 0;
  for (auto c : count_stage_err) total += c;
  Rational weighted;
  for (int i = 0; i < stages; ++i) weighted += pr_S[static_cast<std::size_t>(i)] * cond_err_stage[static_cast<std::size_t>(i)];
  return total == cascade_err && weighted == pr_A_cas;
}

bool DecompositionReport::standalone_holds() const {
  std::int64_t total = 0;
  for (auto c : count_final_err) total += c;
  Rational weighted;
  for (int i = 0; i < stages; ++i) weighted += pr_S[static_cast<std::size_t>(i)] * cond_err_final[static_cast<std::size_t>(i)];
  return total == final_err && weighted == pr_final_err;
}

bool DecompositionReport::gap_identity_holds() const {
  return gap == pr_A_cas - pr_final_err && gap == sum(per_term);
}

DecompositionReport decomposition(std::span<const RoutingRecord> records) {
  if (records.empty()) throw IntegrityError("decomposition needs at least one record");
  const int l = records.front().stage_count;
  const auto L = static_cast<std::size_t>(l);
  DecompositionReport r;
  r.stages = l;
  r.n = static_cast<std::int64_t>(records.size());
  r.count_S.assign(L, 0);
  r.count_stage_err.assign(L, 0);
  r.count_final_err.assign(L, 0);
  for (const auto& rec : records) {
    check_record(rec, l);
    const auto i = static_cast<std::size_t>(rec.stop_stage - 1);
    const bool stage_wrong = !rec.stage_correct[i];
    ++r.count_S[i];
    if (stage_wrong) {
      ++r.count_stage_err[i];
      ++r.cascade_err;
    }
    if (!rec.final_stage_correct) {
      ++r.count_final_err[i];
      ++r.final_err;
    }
  }
  for (std::size_t i = 0; i < L; ++i) {
    r.pr_S.push_back(ratio(r.count_S[i], r.n));
    r.cond_err_stage.push_back(ratio(r.count_stage_err[i], r.count_S[i]));
    r.cond_err_final.push_back(ratio(r.count_final_err[i], r.count_S[i]));
  }
  r.pr_A_cas = ratio(r.cascade_err, r.n);
  r.pr_final_err = ratio(r.final_err, r.n);
  for (std::size_t i = 0; i + 1 < L; ++i) {
    r.per_term.push_back(r.pr_S[i] * (r.cond_err_stage[i] - r.cond_err_final[i]));
  }
  r.gap = sum(r.per_term);
  return r;
}

Rational GapShiftReport::routing_total() const { return sum(routing); }
Rational GapShiftReport::conditional_total() const { return sum(conditional); }
Rational GapShiftReport::cross_total() const { return sum(cross); }

bool GapShiftReport::attribution_holds() const {
  return routing_total() + conditional_total() + cross_total() == delta_change &&
         delta_change == delta_adv - delta_clean;
}

GapShiftReport gap_shift(std::span<const RoutingRecord> clean,
                         std::span<const RoutingRecord> adversarial) {
  std::map<int, const RoutingRecord*> by_id;
  for (const auto& r : clean) {
    if (!by_id.emplace(r.sample_id, &r).second) {
      throw IntegrityError("duplicate clean sample id " + std::to_string(r.sample_id));
    }
  }
  std::map<int, const RoutingRecord*> adv_by_id;
  for (const auto& r : adversarial) {
    if (!by_id.count(r.sample_id)) {
      throw IntegrityError("adversarial sample id " + std::to_string(r.sample_id) + " has no clean pair");
    }
    if (!adv_by_id.emplace(r.sample_id, &r).second) {
      throw IntegrityError("duplicate adversarial sample id " + std::to_string(r.sample_id));
    }
  }
  if (adv_by_id.size() != by_id.size()) {
    for (const auto& [id, _] : by_id) {
      if (!adv_by_id.count(id)) {
        throw IntegrityError("clean sample id " + std::to_string(id) + " has no adversarial pair");
      }
    }
  }

  GapShiftReport g;
  g.clean = decomposition(clean);
  g.adversarial = decomposition(adversarial);
  if (g.clean.stages != g.adversarial.stages) {
    throw IntegrityError("clean and adversarial records disagree on the stage count");
  }
  g.delta_clean = g.clean.gap;
  g.delta_adv = g.adversarial.gap;
  g.delta_change = g.delta_adv - g.delta_clean;
  for (std::size_t i = 0; i + 1 < static_cast<std::size_t>(g.clean.stages); ++i) {
    const Rational p = g.clean.pr_S[i];
    const Rational pa = g.adversarial.pr_S[i];
    const Rational d = g.clean.cond_err_stage[i] - g.clean.cond_err_final[i];
    const Rational da = g.adversarial.cond_err_stage[i] - g.adversarial.cond_err_final[i];
    g.routing.push_back((pa - p) * d);
    g.conditional.push_back(p * (da - d));
    g.cross.push_back((pa - p) * (da - d));
  }
  return g;
}

json rational_to_json(const Rational& r) {
  return json{{"value", r.to_double()}, {"exact", r.to_string()}};
}

json decomposition_to_json(const DecompositionReport& r) {
  auto list = [](const std::vector<Rational>& v) {
    json a = json::array();
    for (const auto& x : v) a.push_back(rational_to_json(x));
    return a;
  };
  return json{{"stages", r.stages},
              {"n", r.n},
              {"count_S", r.count_S},
              {"count_stage_err", r.count_stage_err},
              {"count_final_err", r.count_final_err},
              {"cascade_err", r.cascade_err},
              {"final_err", r.final_err},
              {"pr_S", list(r.pr_S)},
              {"cond_err_stage", list(r.cond_err_stage)},
              {"cond_err_final", list(r.cond_err_final)},
              {"pr_A_cas", rational_to_json(r.pr_A_cas)},
              {"pr_final_err", rational_to_json(r.pr_final_err)},
              {"gap", rational_to_json(r.gap)},
              {"per_term", list(r.per_term)},
              {"identities",
               {{"partition", r.partition_holds()},
                {"decomposition", r.decomposition_holds()},
                {"standalone", r.standalone_holds()},
                {"gap", r.gap_identity_holds()}}}};
}

json gap_shift_to_json(const GapShiftReport& r) {
  auto list = [](const std::vector<Rational>& v) {
    json a = json::array();
    for (const auto& x : v) a.push_back(rational_to_json(x));
    return a;
  };
  return json{{"delta_clean", rational_to_json(r.delta_clean)},
              {"delta_adv", rational_to_json(r.delta_adv)},
              {"delta_change", rational_to_json(r.delta_change)},
              {"routing_shift", list(r.routing)},
              {"conditional_gap", list(r.conditional)},
              {"cross", list(r.cross)},
              {"routing_total", rational_to_json(r.routing_total())},
              {"conditional_total", rational_to_json(r.conditional_total())},
              {"cross_total", rational_to_json(r.cross_total())},
              {"attribution_holds", r.attribution_holds()}};
}

json routing_record_to_json(const RoutingRecord& r) {
  return json{{"sample_id", r.sample_id},
              {"stage_count", r.stage_count},
              {"stop_stage", r.stop_stage},
              {"stage_correct", r.stage_correct},
              {"escalated", r.escalated},
              {"final_stage_correct", r.final_stage_correct}};
}

RoutingRecord routing_record_from_json(const json& j) {
  try {
    RoutingRecord r;
    r.sample_id = j.at("sample_id").get<int>();
    r.stage_count = j.at("stage_count").get<int>();
    r.stop_stage = j.at("stop_stage").get<int>();
    r.stage_correct = j.at("stage_correct").get<std::vector<bool>>();
    r.escalated = j.at("escalated").get<std::vector<bool>>();
    r.final_stage_correct = j.at("final_stage_correct").get<bool>();
    return r;
  } catch (const json::exception& e) {
    throw IntegrityError(std::string("malformed routing record: ") + e.what());
  }
}

std::string render_decomposition(const DecompositionReport& r) {
  std::vector<std::vector<std::string>> rows{
      {"stage", "count(S_i)", "Pr[S_i]", "Pr[f^i err|S_i]", "Pr[f^l err|S_i]", "term"}};
  for (std::size_t i = 0; i < static_cast<std::size_t>(r.stages); ++i) {
    rows.push_back({std::to_string(i + 1), std::to_string(r.count_S[i]), fmt(r.pr_S[i].to_double()),
                    fmt(r.cond_err_stage[i].to_double()), fmt(r.cond_err_final[i].to_double()),
                    i < r.per_term.size() ? fmt(r.per_term[i].to_double()) : "-"});
  }
  std::string out = table(rows);
  out += "Pr[A_cas] = " + fmt(r.pr_A_cas.to_double()) + "  Pr[f^l err] = " +
         fmt(r.pr_final_err.to_double()) + "  gap = " + fmt(r.gap.to_double()) + " (" +
         r.gap.to_string() + ")\n";
  return out;
}

std::string render_gap_shift(const GapShiftReport& r) {
  std::vector<std::vector<std::string>> rows{{"stage", "routing", "conditional", "cross"}};
  for (std::size_t i = 0; i < r.routing.size(); ++i) {
    rows.push_back({std::to_string(i + 1), fmt(r.routing[i].to_double()),
                    fmt(r.conditional[i].to_double()), fmt(r.cross[i].to_double())});
  }
  rows.push_back({"total", fmt(r.routing_total().to_double()), fmt(r.conditional_total().to_double()),
                  fmt(r.cross_total().to_double())});
  std::string out = table(rows);
  out += "gap clean = " + fmt(r.delta_clean.to_double()) + "  gap adv = " +
         fmt(r.delta_adv.to_double()) + "  change = " + fmt(r.delta_change.to_double()) + "\n";
  return out;
}

}  // namespace cascade::analysis
