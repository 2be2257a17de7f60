#include "unanimous/eval.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>

#include "unanimous/extensions.hpp"
#include "unanimous/linalg.hpp"
#include "unanimous/parallel.hpp"

namespace unanimous {

double PrecisionRecall::f1() const {
  if (precision + recall <= 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

PrecisionRecall evaluate(std::span<const Prediction> predictions,
                         std::span<const CountVector> gold) {
  if (predictions.size() != gold.size()) throw DimensionMismatch("evaluate: sizes differ");
  PrecisionRecall pr;
  pr.total = gold.size();
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (!predictions[i].answered()) continue;
    ++pr.answered;
    const auto width = std::max(predictions[i].output().size(), gold[i].size());
    if (predictions[i].output().resized(width) == gold[i].resized(width)) ++pr.correct;
  }
  if (pr.answered > 0) {
    pr.precision = static_cast<double>(pr.correct) / static_cast<double>(pr.answered);
  }
  if (pr.total > 0) pr.recall = static_cast<double>(pr.correct) / static_cast<double>(pr.total);
  return pr;
}

namespace {

std::vector<CountVector> inputs_of(std::span<const Example> test) {
  std::vector<CountVector> out;
  for (const auto& ex : test) out.push_back(ex.input);
  return out;
}

std::vector<CountVector> outputs_of(std::span<const Example> test) {
  std::vector<CountVector> out;
  for (const auto& ex : test) out.push_back(ex.output);
  return out;
}

}  // namespace

PrecisionRecall evaluate(const Decider& dec, std::span<const Example> test, Exec exec) {
  const auto preds = dec.predict_batch(inputs_of(test), exec);
  return evaluate(preds, outputs_of(test));
}

PointEstimate PointEstimate::fit(const Dataset& d) {
  PointEstimate est;
  est.M_ = least_squares(d.S(), d.T()).exact;
  return est;
}

RationalVector PointEstimate::raw(const CountVector& x) const {
  RationalVector y(M_.cols());
  const std::size_t ns = std::min(x.size(), M_.rows());
  Rational tmp;
  for (std::size_t s = 0; s < ns; ++s) {
    if (x[s] == 0) continue;
    for (std::size_t t = 0; t < M_.cols(); ++t) {
      tmp = M_(s, t) * static_cast<long>(x[s]);
      y[t] += tmp;
    }
  }
  return y;
}

Prediction PointEstimate::predict(const CountVector& x, double eps) const {
  if (!(eps >= 0.0 && eps <= 0.5)) throw DimensionMismatch("epsilon must lie in [0, 0.5]");
  const Rational e(eps);
  CountVector out(M_.cols());
  const auto y = raw(x);
  for (std::size_t t = 0; t < y.size(); ++t) {
    mpz_class z;
    if (sgn(e) == 0) {
      if (!is_integral(y[t])) return Prediction::abstain(AbstainReason::NonIntegralOutput);
      z = y[t].get_num();
    } else {
      const Rational lo = y[t] - e;
      mpz_cdiv_q(z.get_mpz_t(), lo.get_num_mpz_t(), lo.get_den_mpz_t());
      if (!(Rational(z) < y[t] + e)) {
        return Prediction::abstain(AbstainReason::NonIntegralOutput);
      }
    }
    if (sgn(z) < 0) return Prediction::abstain(AbstainReason::NonIntegralOutput);
    out.counts[t] = z.get_si();
  }
  return Prediction::answer(std::move(out));
}

PrecisionRecall evaluate(const PointEstimate& est, double eps,
                         std::span<const Example> test) {
  std::vector<Prediction> preds;
  for (const auto& ex : test) preds.push_back(est.predict(ex.input, eps));
  return evaluate(preds, outputs_of(test));
}

PartialRecovery partial_recovery_recall(std::span<const CountVector> predicted,
                                        std::span<const CountVector> gold) {
  if (predicted.size() != gold.size()) throw DimensionMismatch("partial recovery: sizes differ");
  PartialRecovery out;
  double sum = 0.0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const auto g = gold[i].total();
    if (g == 0) {
      ++out.skipped;
      continue;
    }
    std::int64_t common = 0;
    for (std::size_t t = 0; t < gold[i].size(); ++t) {
      const auto p = t < predicted[i].size() ? predicted[i][t] : 0;
      common += std::min(gold[i][t], p);
    }
    sum += 100.0 * static_cast<double>(common) / static_cast<double>(g);
    ++out.scored;
  }
  if (out.scored > 0) out.percent = sum / static_cast<double>(out.scored);
  return out;
}

const char* to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::FractionCurve: return "fraction_curve";
    case ExperimentKind::NoiseCurve: return "noise_curve";
    case ExperimentKind::Adversarial: return "adversarial";
    case ExperimentKind::ActiveVsPassive: return "active_vs_passive";
  }
  return "?";
}

std::optional<ExperimentKind> experiment_from_string(std::string_view s) {
  for (auto k : {ExperimentKind::FractionCurve, ExperimentKind::NoiseCurve,
                 ExperimentKind::Adversarial, ExperimentKind::ActiveVsPassive}) {
    if (s == to_string(k)) return k;
  }
  return std::nullopt;
}

std::string ExperimentTable::to_csv() const {
  std::string out = "series,x,precision,recall,answered,correct,total,status\n";
  char buf[256];
  for (const auto& r : rows) {
    std::string status = r.status;
    std::replace(status.begin(), status.end(), ',', ';');
    std::replace(status.begin(), status.end(), '\n', ' ');
    std::snprintf(buf, sizeof buf, "%s,%g,%.6f,%.6f,%zu,%zu,%zu,", r.series.c_str(), r.x,
                  r.metrics.precision, r.metrics.recall, r.metrics.answered,
                  r.metrics.correct, r.metrics.total);
    out += buf;
    out += status;
    out += '\n';
  }
  return out;
}

std::vector<ExperimentRow> ExperimentTable::series(const std::string& name) const {
  std::vector<ExperimentRow> out;
  for (const auto& r : rows) {
    if (r.series == name) out.push_back(r);
  }
  return out;
}

namespace {

std::size_t prefix_size(double fraction, std::size_t n) {
  return std::clamp<std::size_t>(
      static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n))), 1, n);
}

std::vector<std::size_t> seeded_order(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  return order;
}

ExperimentRow failed(std::string series, double x, const std::exception& e) {
  ExperimentRow row{std::move(series), x, {}, std::string("failed: ") + e.what()};
  return row;
}

ExperimentTable fraction_curve(const ExperimentConfig& cfg) {
  const auto data = synth_generate(cfg.synth);
  const auto order = seeded_order(data.train.size(), cfg.seed);
  const auto inputs = inputs_of(data.test);
  const auto gold = outputs_of(data.test);
  const Mode modes[] = {Mode::Ilp, Mode::Lp, Mode::Ls};
  const std::size_t nf = cfg.fractions.size();

  std::vector<std::array<ExperimentRow, 3>> cells(nf);
  std::vector<std::size_t> violations(nf, 0), checked(nf, 0);
  for_each_index(nf, cfg.exec, [&](std::size_t f) {
    const double x = cfg.fractions[f];
    const std::vector<std::size_t> rows(order.begin(),
                                        order.begin() + static_cast<std::ptrdiff_t>(
                                                            prefix_size(x, order.size())));
    const auto sub = data.train.subset(rows);
    std::array<std::optional<std::vector<Prediction>>, 3> preds;
    for (std::size_t m = 0; m < 3; ++m) {
      try {
        const auto dec = Decider::train(sub, modes[m], 0, cfg.seed);
        preds[m] = dec.predict_batch(inputs, Exec::Serial);
        cells[f][m] = {to_string(modes[m]), x, evaluate(*preds[m], gold), "ok"};
      } catch (const std::exception& e) {
        cells[f][m] = failed(to_string(modes[m]), x, e);
      }
    }
    if (!preds[0] || !preds[1] || !preds[2]) return;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      ++checked[f];
      const auto& ilp = (*preds[0])[i];
      const auto& lp = (*preds[1])[i];
      const auto& ls = (*preds[2])[i];
      const bool ls_ok = !ls.answered() || (lp.answered() && lp.output() == ls.output());
      const bool lp_ok = !lp.answered() || (ilp.answered() && ilp.output() == lp.output());
      if (!ls_ok || !lp_ok) ++violations[f];
    }
  });

  ExperimentTable table;
  for (std::size_t m = 0; m < 3; ++m) {
    for (std::size_t f = 0; f < nf; ++f) table.rows.push_back(cells[f][m]);
  }
  for (std::size_t f = 0; f < nf; ++f) {
    table.containment_violations += violations[f];
    table.containment_checked += checked[f];
  }
  return table;
}

ExperimentTable noise_curve(const ExperimentConfig& cfg) {
  auto synth = cfg.synth;
  synth.n_train = cfg.noise_train;
  const auto data = synth_generate(synth);
  std::vector<ExperimentRow> rows(cfg.budgets.size());
  for_each_index(rows.size(), cfg.exec, [&](std::size_t b) {
    const auto budget = cfg.budgets[b];
    const double x = static_cast<double>(budget);
    try {
      const auto edits = static_cast<std::int64_t>(
          std::llround(cfg.noise_ratio * static_cast<double>(budget)));
      const auto noisy = inject_noise(data.train, {edits, cfg.seed});
      const auto dec = Decider::train(noisy, Mode::Ilp, budget, cfg.seed);
      rows[b] = {"ilp-noise", x, evaluate(dec, data.test, Exec::Serial), "ok"};
    } catch (const std::exception& e) {
      rows[b] = failed("ilp-noise", x, e);
    }
  });
  return {rows};
}

ExperimentTable adversarial(const ExperimentConfig& cfg) {
  const auto data = synth_generate(cfg.synth);
  AdversarialOptions opts;
  opts.trials = cfg.trials;
  opts.objective = AdversarialObjective::MaxDiff;
  opts.seed = cfg.seed;
  opts.epsilons = cfg.epsilons;
  opts.exec = cfg.exec;
  ExperimentTable table;
  const double f = cfg.adversarial_fraction;
  try {
    const auto pick = adversarial_subsample(data.train, data.test, f, opts);
    const auto dec = Decider::train(pick.data, Mode::Ilp, 0, cfg.seed);
    table.rows.push_back({"unanimous", f, evaluate(dec, data.test, cfg.exec), "ok"});
    const auto est = PointEstimate::fit(pick.data);
    for (double eps : cfg.epsilons) {
      table.rows.push_back({"point-estimate", eps, evaluate(est, eps, data.test), "ok"});
    }
  } catch (const std::exception& e) {
    table.rows.push_back(failed("unanimous", f, e));
  }
  return table;
}

ExperimentTable active_vs_passive(const ExperimentConfig& cfg) {
  const auto data = synth_generate(cfg.synth);
  const auto stream = data.train.subset(seeded_order(data.train.size(), cfg.seed));
  std::vector<CountVector> inputs;
  for (std::size_t i = 0; i < stream.size(); ++i) inputs.push_back(stream.input(i));
  const auto sel = active_select(inputs);
  const std::size_t rank = sel.queries.size();

  std::vector<std::array<ExperimentRow, 2>> cells(rank);
  for_each_index(rank, cfg.exec, [&](std::size_t b) {
    const double x = static_cast<double>(b + 1);
    const std::span<const std::size_t> active(sel.queries.data(), b + 1);
    std::vector<std::size_t> passive(b + 1);
    std::iota(passive.begin(), passive.end(), 0);
    const std::pair<const char*, std::span<const std::size_t>> arms[] = {
        {"active", active}, {"passive", passive}};
    for (std::size_t a = 0; a < 2; ++a) {
      try {
        const auto dec = Decider::train(stream.subset(arms[a].second), Mode::Ls);
        cells[b][a] = {arms[a].first, x, evaluate(dec, data.test, Exec::Serial), "ok"};
      } catch (const std::exception& e) {
        cells[b][a] = failed(arms[a].first, x, e);
      }
    }
  });
  ExperimentTable table;
  for (std::size_t a = 0; a < 2; ++a) {
    for (std::size_t b = 0; b < rank; ++b) table.rows.push_back(cells[b][a]);
  }
  return table;
}

}  // namespace

ExperimentTable run_experiment(ExperimentKind kind, const ExperimentConfig& config) {
  switch (kind) {
    case ExperimentKind::FractionCurve: return fraction_curve(config);
    case ExperimentKind::NoiseCurve: return noise_curve(config);
    case ExperimentKind::Adversarial: return adversarial(config);
    case ExperimentKind::ActiveVsPassive: return active_vs_passive(config);
  }
  throw Error("unknown experiment");
}

}  // namespace unanimous
