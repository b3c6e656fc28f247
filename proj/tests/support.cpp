#include "support.hpp"

#include <cmath>

#include "cascade/rng.hpp"
#include "cascade/zoo/models.hpp"

namespace cascade::fixture {

namespace {

double uniform(Rng& r, double lo, double hi) { return lo + (hi - lo) * r.uniform01(); }

int first_max(const std::vector<double>& s) {
  int best = 0;
  for (int c = 1; c < static_cast<int>(s.size()); ++c) {
    if (s[static_cast<std::size_t>(c)] > s[static_cast<std::size_t>(best)]) best = c;
  }
  return best;
}

}  // namespace

RandomInstance random_instance(std::uint64_t seed, std::size_t inputs) {
  Rng r(stream_key({seed, 0x72616e64}));
  const int l = 1 + static_cast<int>(r.uniform_index(4));
  const std::size_t V = 6 + r.uniform_index(15);
  const int C = 2 + static_cast<int>(r.uniform_index(4));

  std::vector<StagePtr> stages;
  for (int i = 0; i < l; ++i) {
    std::vector<double> w(V * static_cast<std::size_t>(C)), b(static_cast<std::size_t>(C));
    for (auto& v : w) v = uniform(r, -1.0, 1.0);
    for (auto& v : b) v = uniform(r, -0.5, 0.5);
    // coarse weights now and then so exact score ties show up
    if (r.bernoulli(0.2)) {
      for (auto& v : w) v = std::round(v * 2.0) / 2.0;
      for (auto& v : b) v = 0.0;
    }
    CostModel cost{uniform(r, 0.0, 2.0), uniform(r, 0.0, 3.0)};
    stages.push_back(std::make_shared<zoo::LinearBagModel>(V, C, std::move(w), std::move(b), cost,
                                                           uniform(r, 0.1, 10.0),
                                                           1 + static_cast<int>(r.uniform_index(3))));
  }
  std::vector<DeciderPtr> deciders;
  for (int i = 0; i + 1 < l; ++i) {
    CostModel cost{uniform(r, 0.0, 0.5), uniform(r, 0.0, 1.0)};
    const double scale = uniform(r, 0.0, 1.0);
    if (r.bernoulli(0.5)) {
      deciders.push_back(std::make_shared<zoo::ThresholdDecider>(uniform(r, 0.0, 1.0), cost, scale));
    } else {
      std::vector<double> w(V);
      for (auto& v : w) v = uniform(r, -0.6, 0.6);
      deciders.push_back(std::make_shared<zoo::LinearDecider>(std::move(w), uniform(r, -1.0, 1.0),
                                                              uniform(r, 0.2, 0.8),
                                                              uniform(r, 0.0, 4.0), cost, scale));
    }
  }
  RandomInstance inst{CascadeSpec(std::move(stages), std::move(deciders), V), {}, {}};
  for (std::size_t k = 0; k < inputs; ++k) {
    TokenSeq x;
    const std::size_t len = 1 + r.uniform_index(12);
    for (std::size_t t = 0; t < len; ++t) x.push_back(static_cast<TokenId>(r.uniform_index(V)));
    inst.inputs.push_back(std::move(x));
    inst.labels.push_back(Label::of_class(static_cast<int>(r.uniform_index(static_cast<std::size_t>(C)))));
  }
  return inst;
}

OracleRun oracle_run(const CascadeSpec& spec, const TokenSeq& x) {
  const int l = spec.stage_count();
  OracleRun o;
  std::vector<StageOutput> outs;
  for (int i = 1; i <= l; ++i) {
    outs.push_back(spec.stage(i).predict(x));
    o.predictions.push_back(first_max(outs.back().scores));
  }
  for (int i = 1; i < l; ++i) o.escalate.push_back(spec.decider(i).decide(x, outs[static_cast<std::size_t>(i - 1)]).escalate);
  o.tau = l;
  for (int i = 1; i < l; ++i) {
    if (!o.escalate[static_cast<std::size_t>(i - 1)]) {
      o.tau = i;
      break;
    }
  }
  o.final_output = Label::of_class(o.predictions[static_cast<std::size_t>(o.tau - 1)]);
  o.cost = oracle_cost(spec, x, o.tau);
  return o;
}

double oracle_cost(const CascadeSpec& spec, const TokenSeq& x, int tau) {
  const double n = static_cast<double>(x.size());
  double f = 0.0, g = 0.0;
  for (int i = 1; i <= tau; ++i) {
    const auto& c = spec.stage(i).cost_model();
    f += c.per_token * n + c.fixed;
  }
  for (int i = 1; i <= tau && i < spec.stage_count(); ++i) {
    const auto& c = spec.decider(i).cost_model();
    g += c.per_token * n + c.fixed;
  }
  return f + g;
}

MicroInstance micro_instance(std::uint64_t seed) {
  Rng r(stream_key({seed, 0x6d6963726f}));
  const std::size_t V = 4 + r.uniform_index(5);  // 4..8
  const int C = 2 + static_cast<int>(r.uniform_index(3));
  std::vector<StagePtr> stages;
  for (int i = 0; i < 2; ++i) {
    std::vector<double> w(V * static_cast<std::size_t>(C)), b(static_cast<std::size_t>(C), 0.0);
    for (auto& v : w) v = uniform(r, -1.0, 1.0);
    stages.push_back(std::make_shared<zoo::LinearBagModel>(V, C, std::move(w), std::move(b)));
  }
  std::vector<double> dw(V);
  for (auto& v : dw) v = uniform(r, -1.0, 1.0);
  std::vector<DeciderPtr> deciders{
      std::make_shared<zoo::LinearDecider>(std::move(dw), uniform(r, -0.5, 0.5), 0.5, 2.0)};

  MicroInstance m{CascadeSpec(std::move(stages), std::move(deciders), V), {}, {}, {}, 1};
  for (std::size_t t = 0, n = 1 + r.uniform_index(4); t < n; ++t) m.x.push_back(static_cast<TokenId>(r.uniform_index(V)));
  m.y = Label::of_class(static_cast<int>(r.uniform_index(static_cast<std::size_t>(C))));
  m.segment_length = 1 + r.uniform_index(2);
  for (std::size_t t = 0; t < V; ++t) m.nb.attack_vocab.push_back(static_cast<TokenId>(t));
  m.nb.suffix_slots_per_phase = m.segment_length;
  m.nb.rounds = 1;
  m.nb.substitutions_per_iteration = m.segment_length;
  m.nb.candidate_pool_size = 1024;  // larger than V^2
  return m;
}

std::vector<TokenSeq> all_segments(const std::vector<TokenId>& alphabet, std::size_t len) {
  std::vector<TokenSeq> out{TokenSeq{}};
  for (std::size_t p = 0; p < len; ++p) {
    std::vector<TokenSeq> next;
    for (const auto& s : out) {
      for (TokenId t : alphabet) {
        TokenSeq e = s;
        e.push_back(t);
        next.push_back(std::move(e));
      }
    }
    out = std::move(next);
  }
  return out;
}

runner::ExperimentConfig attackable_config(std::uint64_t seed, bool with_defense) {
  runner::ExperimentConfig cfg;
  cfg.seed = seed;
  cfg.cascade.generator = "attackable";
  cfg.cascade.attackable.corpus_size = 120;
  runner::AttackSection a;
  a.modes = {"random_noise", "single_acc", "single_cost", "dm_flip", "joint"};
  a.iterations = 8;
  a.candidate_pool = 24;
  cfg.attack = a;
  if (with_defense) {
    cfg.defense = {{"ppl", {0.99, 0.95, 0.9, 0.8, 0.7}, 8, 1},
                   {"regex", {0.3, 0.2, 0.15, 0.1, 0.05}, 8, 1},
                   {"cpt", {8.0, 6.0, 5.0, 4.5, 4.0}, 8, 1},
                   {"smoothing", {0.0, 0.4, 0.8}, 0, 3}};
  }
  return cfg;
}

}  // namespace cascade::fixture
