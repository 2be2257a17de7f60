#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "unanimous/core.hpp"
#include "unanimous/ilp.hpp"
#include "unanimous/kernels.hpp"
#include "unanimous/lp.hpp"
#include "unanimous/rational.hpp"

namespace unanimous {

enum class Mode { Ilp, IlpExact, Lp, Ls };

const char* to_string(Mode mode);
std::optional<Mode> mode_from_string(std::string_view s);

// FNV-1a over vocabularies and matrices.
std::uint64_t dataset_fingerprint(const Dataset& d);

struct MappingPair {
  RealMatrix M1;
  RealMatrix M2;
  std::uint64_t seed = 0;
  std::uint64_t fingerprint = 0;
};

struct DeciderOptions {
  IlpOptions ilp;
  InteriorOptions interior;
  double lp_equal_tol = 1e-6;
  double lp_round_tol = 1e-4;
};

// Source atoms grouped by co-occurrence in training inputs. The consistency
// constraints never couple atoms from different groups, so every decider
// works group by group.
struct AtomComponents {
  std::vector<int> of_source;  // -1 for atoms no input uses
  std::vector<std::vector<std::size_t>> sources;
  std::vector<std::vector<std::size_t>> rows;
  std::vector<std::size_t> empty_rows;  // rows whose input is the empty bag
};

AtomComponents atom_components(const IntMatrix& S);

class Decider {
 public:
  // LP and LS modes reject n_mistakes > 0 with NoiseUnsupportedInRelaxation
  // and infeasible data with InconsistentData. ILP modes accept infeasible
  // data and abstain with InfeasibleModel.
  static Decider train(const Dataset& d, Mode mode, std::int64_t n_mistakes = 0,
                       std::uint64_t seed = 0, const DeciderOptions& options = {});

  Prediction predict(const CountVector& x) const;
  std::vector<Prediction> predict_batch(std::span<const CountVector> inputs,
                                        Exec exec = default_exec()) const;

  Mode mode() const;
  std::int64_t n_mistakes() const;
  std::uint64_t seed() const;
  const Dataset& dataset() const;
  // False when no mapping fits the data within the noise budget.
  bool feasible() const;

  // LP mode only.
  const MappingPair& mappings() const;
  // LS mode only.
  std::size_t rank() const;
  std::optional<RationalVector> coefficients(const CountVector& x) const;

  std::string to_json() const;
  static Decider from_json(const std::string& text,
                           const DeciderOptions& options = {});

  struct State;

 private:
  explicit Decider(std::shared_ptr<const State> state) : state_(std::move(state)) {}
  std::shared_ptr<const State> state_;
};

// Every integral M with 0 <= M <= U and ||SM - T||_1 <= n_mistakes.
// Throws SearchSpaceTooLarge when prod (U_st + 1) exceeds `limit`.
std::vector<IntMatrix> enumerate_consistent_bounded(const Dataset& d,
                                                    const IntMatrix& U,
                                                    std::int64_t n_mistakes = 0,
                                                    double limit = 1e8);
std::vector<IntMatrix> enumerate_consistent_bounded(const Dataset& d,
                                                    std::int64_t U,
                                                    std::int64_t n_mistakes = 0);
// Bounds from mapping_upper_bounds.
std::vector<IntMatrix> enumerate_consistent_bounded(const Dataset& d);

// Unanimity over an explicit list of mappings.
Prediction enumeration_predict(std::span<const IntMatrix> mappings,
                               const CountVector& x,
                               const std::vector<bool>& seen);

// Integral M >= 0 minimising ||SM - T||_1, with that minimum.
struct ResidualFit {
  IntMatrix mapping;
  std::int64_t residual = 0;
  std::vector<std::int64_t> row_residuals;
};
ResidualFit min_residual_mapping(const Dataset& d, const IlpOptions& options = {});

enum class CleaningRule {
  Strict,   // drop x_i when unsafe or when its prediction differs from y_i
  Literal,  // drop x_i only when unsafe
};

struct CleaningOptions {
  CleaningRule rule = CleaningRule::Strict;
  Mode mode = Mode::IlpExact;
  std::uint64_t seed = 0;
  DeciderOptions decider;
  Exec exec = default_exec();
};

struct CleanResult {
  Dataset data;
  std::vector<std::size_t> kept;  // indices into the input dataset
};

// One leave-one-out pass under the noise budget, followed by removal of any
// row the best integral fit of the survivors does not reproduce, so the
// result is always exactly consistent.
CleanResult clean_leave_one_out(const Dataset& d, std::int64_t n_mistakes,
                                const CleaningOptions& options = {});

// Repeatedly drops rows with positive residual under the real-valued
// l1 fit until SM = T is exactly solvable.
CleanResult clean_l1_residual(const Dataset& d);

}  // namespace unanimous
