#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "unanimous/core.hpp"
#include "unanimous/data.hpp"
#include "unanimous/rational.hpp"
#include "unanimous/unanimity.hpp"

namespace unanimous {

struct PrecisionRecall {
  double precision = 1.0;  // 1.0 when nothing was answered
  double recall = 0.0;
  std::size_t answered = 0;
  std::size_t correct = 0;
  std::size_t total = 0;

  double f1() const;
};

PrecisionRecall evaluate(std::span<const Prediction> predictions,
                         std::span<const CountVector> gold);
PrecisionRecall evaluate(const Decider& dec, std::span<const Example> test,
                         Exec exec = default_exec());

// Least-squares mapping S^+ T with integer snapping inside [y - eps, y + eps).
class PointEstimate {
 public:
  static PointEstimate fit(const Dataset& d);

  // eps in [0, 0.5]; eps = 0 answers only exactly integral outputs.
  Prediction predict(const CountVector& x, double eps) const;
  RationalVector raw(const CountVector& x) const;
  const RationalMatrix& mapping() const { return M_; }

 private:
  RationalMatrix M_;
};

PrecisionRecall evaluate(const PointEstimate& est, double eps,
                         std::span<const Example> test);

struct PartialRecovery {
  double percent = 0.0;  // mean over scored sentences
  std::size_t scored = 0;
  std::size_t skipped = 0;  // sentences with an empty gold bag
};

// Mean of |gold ∩ predicted| / |gold| as a percentage (multiset intersection).
PartialRecovery partial_recovery_recall(std::span<const CountVector> predicted,
                                        std::span<const CountVector> gold);

enum class ExperimentKind { FractionCurve, NoiseCurve, Adversarial, ActiveVsPassive };

const char* to_string(ExperimentKind kind);
std::optional<ExperimentKind> experiment_from_string(std::string_view s);

struct ExperimentConfig {
  SynthConfig synth;
  std::uint64_t seed = 0;
  std::vector<double> fractions = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  std::size_t noise_train = 120;
  // Edits injected at budget b: round(noise_ratio * b).
  double noise_ratio = 0.5;
  std::vector<std::int64_t> budgets = {0, 2, 4, 6, 8, 10, 12, 14, 16, 18, 20};
  double adversarial_fraction = 0.2;
  std::size_t trials = 100;
  std::vector<double> epsilons = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5};
  Exec exec = default_exec();
};

struct ExperimentRow {
  std::string series;
  double x = 0.0;
  PrecisionRecall metrics;
  std::string status = "ok";
};

struct ExperimentTable {
  std::vector<ExperimentRow> rows;
  // Fraction curve only: test inputs where an LS answer is not matched by
  // LP, or an LP answer by ILP.
  std::size_t containment_violations = 0;
  std::size_t containment_checked = 0;

  std::string to_csv() const;
  std::vector<ExperimentRow> series(const std::string& name) const;
};

ExperimentTable run_experiment(ExperimentKind kind, const ExperimentConfig& config);

}  // namespace unanimous
