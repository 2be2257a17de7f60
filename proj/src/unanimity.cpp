#include "unanimous/unanimity.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <numeric>
#include <random>
#include <set>

#include <json.hpp>

#include "unanimous/linalg.hpp"
#include "unanimous/parallel.hpp"

namespace unanimous {

const char* to_string(Mode mode) {
  switch (mode) {
    case Mode::Ilp: return "ilp";
    case Mode::IlpExact: return "ilp-exact";
    case Mode::Lp: return "lp";
    case Mode::Ls: return "ls";
  }
  return "?";
}

std::optional<Mode> mode_from_string(std::string_view s) {
  if (s == "ilp") return Mode::Ilp;
  if (s == "ilp-exact") return Mode::IlpExact;
  if (s == "lp") return Mode::Lp;
  if (s == "ls") return Mode::Ls;
  return std::nullopt;
}

namespace {

constexpr std::uint64_t kFnvOffset = 14695981039346656037ULL;
constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

void fnv(std::uint64_t& h, const void* data, std::size_t n) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= kFnvPrime;
  }
}

void fnv(std::uint64_t& h, std::uint64_t v) { fnv(h, &v, sizeof v); }

void fnv(std::uint64_t& h, const Vocabulary& vocab) {
  fnv(h, vocab.size());
  for (const auto& a : vocab.atoms()) {
    fnv(h, a.size());
    fnv(h, a.data(), a.size());
  }
}

void fnv(std::uint64_t& h, const IntMatrix& m) {
  fnv(h, m.rows());
  fnv(h, m.cols());
  for (auto v : m.data()) fnv(h, static_cast<std::uint64_t>(v));
}

std::uint64_t input_hash(const CountVector& x) {
  std::uint64_t h = kFnvOffset;
  std::size_t n = x.size();
  while (n > 0 && x[n - 1] == 0) --n;  // padding must not change the draw
  for (std::size_t i = 0; i < n; ++i) fnv(h, static_cast<std::uint64_t>(x[i]));
  return h;
}

std::int64_t rounded(double v) { return static_cast<std::int64_t>(std::llround(v)); }

}  // namespace

std::uint64_t dataset_fingerprint(const Dataset& d) {
  std::uint64_t h = kFnvOffset;
  fnv(h, d.source_vocab());
  fnv(h, d.target_vocab());
  fnv(h, d.S());
  fnv(h, d.T());
  return h;
}

AtomComponents atom_components(const IntMatrix& S) {
  const std::size_t ns = S.cols();
  std::vector<std::size_t> parent(ns);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  };
  std::vector<bool> seen(ns, false);
  for (std::size_t i = 0; i < S.rows(); ++i) {
    std::optional<std::size_t> first;
    for (std::size_t s = 0; s < ns; ++s) {
      if (S(i, s) == 0) continue;
      seen[s] = true;
      if (!first) {
        first = s;
      } else {
        parent[find(s)] = find(*first);
      }
    }
  }

  AtomComponents out;
  out.of_source.assign(ns, -1);
  std::vector<int> id_of_root(ns, -1);
  for (std::size_t s = 0; s < ns; ++s) {
    if (!seen[s]) continue;
    const auto root = find(s);
    if (id_of_root[root] < 0) {
      id_of_root[root] = static_cast<int>(out.sources.size());
      out.sources.emplace_back();
      out.rows.emplace_back();
    }
    out.of_source[s] = id_of_root[root];
    out.sources[static_cast<std::size_t>(id_of_root[root])].push_back(s);
  }
  for (std::size_t i = 0; i < S.rows(); ++i) {
    bool placed = false;
    for (std::size_t s = 0; s < ns && !placed; ++s) {
      if (S(i, s) == 0) continue;
      out.rows[static_cast<std::size_t>(out.of_source[s])].push_back(i);
      placed = true;
    }
    if (!placed) out.empty_rows.push_back(i);
  }
  return out;
}

struct Decider::State {
  Dataset data;
  Mode mode = Mode::Ilp;
  std::int64_t budget = 0;
  std::uint64_t seed = 0;
  DeciderOptions options;
  std::vector<bool> seen;
  AtomComponents comps;
  bool feasible = true;

  // ILP modes.
  IntMatrix upper;
  std::vector<std::vector<std::int64_t>> residual;  // [component][column]
  std::int64_t total_min = 0;

  // LP mode.
  MappingPair pair;

  // LS mode: rref of [S | T] pivoting only on S columns.
  RrefResult reduced;
  std::optional<RowSpace> row_space;
};

namespace {

using State = Decider::State;

void train_ilp(State& st) {
  const auto& S = st.data.S();
  const auto& T = st.data.T();
  const std::size_t nt = st.data.num_target();
  const std::int64_t B = st.budget;
  st.upper = mapping_upper_bounds(S, T, B);

  std::int64_t fixed = 0;
  for (auto i : st.comps.empty_rows) {
    for (std::size_t t = 0; t < nt; ++t) fixed += T(i, t);
  }

  const std::size_t nk = st.comps.sources.size();
  st.residual.assign(nk, std::vector<std::int64_t>(nt, 0));
  std::vector<char> block_ok(nk * nt, 1);
  for_each_index(nk * nt, Exec::Serial, [&](std::size_t b) {
    const std::size_t k = b / nt, t = b % nt;
    ColumnBlock blk{st.comps.sources[k], st.comps.rows[k], t, B, B > 0};
    auto p = build_column_block(S, T, blk, st.upper);
    for (std::size_t j = blk.sources.size(); j < p.lp.num_vars; ++j) {
      p.lp.objective[j] = -1.0;
    }
    const auto res = solve_ilp(p, st.options.ilp);
    if (res.status != LpStatus::Optimal) {
      block_ok[b] = 0;
    } else {
      st.residual[k][t] = rounded(-res.value);
    }
  });
  st.total_min = fixed;
  for (std::size_t k = 0; k < nk; ++k) {
    for (std::size_t t = 0; t < nt; ++t) st.total_min += st.residual[k][t];
  }
  st.feasible = std::all_of(block_ok.begin(), block_ok.end(),
                            [](char c) { return c != 0; }) &&
                st.total_min <= B;
}

Prediction predict_ilp(const State& st, const CountVector& x) {
  const auto& S = st.data.S();
  const auto& T = st.data.T();
  const std::size_t ns = st.data.num_source(), nt = st.data.num_target();

  std::set<int> touched;
  for (std::size_t s = 0; s < ns; ++s) {
    if (x[s] != 0) touched.insert(st.comps.of_source[s]);
  }
  if (touched.empty()) return Prediction::answer(CountVector(nt));

  std::vector<std::size_t> sources, rows;
  for (int k : touched) {
    const auto& ks = st.comps.sources[static_cast<std::size_t>(k)];
    const auto& kr = st.comps.rows[static_cast<std::size_t>(k)];
    sources.insert(sources.end(), ks.begin(), ks.end());
    rows.insert(rows.end(), kr.begin(), kr.end());
  }
  std::sort(sources.begin(), sources.end());
  std::sort(rows.begin(), rows.end());

  const std::int64_t slack = st.budget - st.total_min;
  std::vector<std::int64_t> base(nt, 0);
  for (int k : touched) {
    for (std::size_t t = 0; t < nt; ++t) base[t] += st.residual[static_cast<std::size_t>(k)][t];
  }

  // Extreme of (x M)_t when column t may spend base_t + extra residual.
  const std::size_t width = static_cast<std::size_t>(slack) + 1;
  std::vector<std::vector<std::optional<std::int64_t>>> hi(nt, std::vector<std::optional<std::int64_t>>(width));
  auto lo = hi;
  auto extreme = [&](std::size_t t, std::int64_t extra, bool maximize) {
    auto& memo = (maximize ? hi : lo)[t][static_cast<std::size_t>(extra)];
    if (memo) return *memo;
    ColumnBlock blk{sources, rows, t, base[t] + extra, false};
    auto p = build_column_block(S, T, blk, st.upper);
    const double sign = maximize ? 1.0 : -1.0;
    for (std::size_t j = 0; j < sources.size(); ++j) {
      p.lp.objective[j] = sign * static_cast<double>(x[sources[j]]);
    }
    const auto res = solve_ilp(p, st.options.ilp);
    if (res.status != LpStatus::Optimal) {
      throw Error("column block infeasible above its minimal residual");
    }
    memo = rounded(sign * res.value);
    return *memo;
  };

  CountVector y(nt);
  if (st.mode == Mode::IlpExact) {
    for (std::size_t t = 0; t < nt; ++t) {
      const auto a = extreme(t, slack, false);
      const auto b = extreme(t, slack, true);
      if (a != b) return Prediction::abstain(AbstainReason::NotUnanimous);
      y.counts[t] = b;
    }
    return Prediction::answer(std::move(y));
  }

  std::mt19937_64 rng(splitmix(st.seed ^ input_hash(x)));
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> v(nt);
  for (auto& c : v) c = gauss(rng);

  // Per-column value tables over extra budget, then a knapsack over columns.
  std::vector<double> dp_max(width, 0.0), dp_min(width, 0.0);
  for (std::size_t t = 0; t < nt; ++t) {
    std::vector<std::int64_t> F(width), G(width);
    const bool flat = slack == 0 ||
                      (extreme(t, 0, true) == extreme(t, slack, true) &&
                       extreme(t, 0, false) == extreme(t, slack, false));
    for (std::size_t e = 0; e < width; ++e) {
      const auto ee = static_cast<std::int64_t>(e);
      F[e] = flat ? extreme(t, 0, true) : extreme(t, ee, true);
      G[e] = flat ? extreme(t, 0, false) : extreme(t, ee, false);
    }
    std::vector<double> next_max(width), next_min(width);
    for (std::size_t s = 0; s < width; ++s) {
      double best_max = -kInfinity, best_min = kInfinity;
      for (std::size_t u = 0; u <= s; ++u) {
        const double up = v[t] >= 0 ? v[t] * static_cast<double>(F[u])
                                    : v[t] * static_cast<double>(G[u]);
        const double down = v[t] >= 0 ? v[t] * static_cast<double>(G[u])
                                      : v[t] * static_cast<double>(F[u]);
        best_max = std::max(best_max, dp_max[s - u] + up);
        best_min = std::min(best_min, dp_min[s - u] + down);
      }
      next_max[s] = best_max;
      next_min[s] = best_min;
    }
    dp_max = std::move(next_max);
    dp_min = std::move(next_min);
  }
  const double a = dp_min[width - 1], b = dp_max[width - 1];
  if (!projections_agree(a, b)) return Prediction::abstain(AbstainReason::NotUnanimous);
  for (std::size_t t = 0; t < nt; ++t) {
    if (extreme(t, 0, true) != extreme(t, 0, false)) {
      return Prediction::abstain(AbstainReason::NotUnanimous);
    }
    y.counts[t] = extreme(t, 0, true);
  }
  return Prediction::answer(std::move(y));
}

void train_lp(State& st) {
  const auto& S = st.data.S();
  const auto& T = st.data.T();
  const std::size_t ns = st.data.num_source(), nt = st.data.num_target();
  for (auto i : st.comps.empty_rows) {
    for (std::size_t t = 0; t < nt; ++t) {
      if (T(i, t) != 0) throw InconsistentData("empty input with non-empty output");
    }
  }

  const std::size_t nk = st.comps.sources.size();
  std::vector<InteriorPoint> blocks(nk * nt);
  for_each_index(nk * nt, default_exec(), [&](std::size_t b) {
    const std::size_t k = b / nt, t = b % nt;
    const auto& src = st.comps.sources[k];
    const auto& rows = st.comps.rows[k];
    IntMatrix Sk(rows.size(), src.size()), Tk(rows.size(), 1);
    for (std::size_t q = 0; q < rows.size(); ++q) {
      for (std::size_t j = 0; j < src.size(); ++j) Sk(q, j) = S(rows[q], src[j]);
      Tk(q, 0) = T(rows[q], t);
    }
    try {
      blocks[b] = relative_interior(build_consistency_polytope(Sk, Tk),
                                    st.options.interior);
    } catch (const InfeasiblePolytope&) {
      throw InconsistentData("no non-negative mapping fits the data");
    }
  });

  std::size_t d = 0;
  for (const auto& ip : blocks) d += ip.dimension();
  std::mt19937_64 rng(st.seed);
  const auto v = sample_unit_ball(d, rng);

  auto& pair = st.pair;
  pair.M1 = RealMatrix(ns, nt);
  pair.M2 = RealMatrix(ns, nt);
  pair.seed = st.seed;
  pair.fingerprint = dataset_fingerprint(st.data);
  std::size_t offset = 0;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const std::size_t k = b / nt, t = b % nt;
    const auto& ip = blocks[b];
    const auto& src = st.comps.sources[k];
    for (std::size_t j = 0; j < src.size(); ++j) {
      double step = 0.0;
      for (std::size_t c = 0; c < ip.dimension(); ++c) step += ip.N(j, c) * v[offset + c];
      pair.M1(src[j], t) = ip.p1[j];
      pair.M2(src[j], t) = ip.p1[j] + ip.radius * step;
    }
    offset += ip.dimension();
  }
}

Prediction predict_lp(const State& st, const CountVector& x) {
  const std::size_t ns = st.data.num_source(), nt = st.data.num_target();
  CountVector y(nt);
  for (std::size_t t = 0; t < nt; ++t) {
    double y1 = 0.0, y2 = 0.0;
    for (std::size_t s = 0; s < ns; ++s) {
      if (x[s] == 0) continue;
      y1 += static_cast<double>(x[s]) * st.pair.M1(s, t);
      y2 += static_cast<double>(x[s]) * st.pair.M2(s, t);
    }
    if (std::abs(y1 - y2) > st.options.lp_equal_tol) {
      return Prediction::abstain(AbstainReason::NotUnanimous);
    }
    const double r = std::round(y1);
    if (std::abs(r - y1) > st.options.lp_round_tol || r < 0.0) {
      return Prediction::abstain(AbstainReason::NonIntegralOutput);
    }
    y.counts[t] = static_cast<std::int64_t>(r);
  }
  return Prediction::answer(std::move(y));
}

void train_ls(State& st) {
  const auto& S = st.data.S();
  const auto& T = st.data.T();
  const std::size_t ns = S.cols(), nt = T.cols();
  RationalMatrix aug(S.rows(), ns + nt);
  for (std::size_t i = 0; i < S.rows(); ++i) {
    for (std::size_t s = 0; s < ns; ++s) aug(i, s) = static_cast<long>(S(i, s));
    for (std::size_t t = 0; t < nt; ++t) aug(i, ns + t) = static_cast<long>(T(i, t));
  }
  RrefOptions opts;
  opts.with_transform = false;
  opts.pivot_col_end = ns;
  st.reduced = rref(aug, opts);
  for (std::size_t r = st.reduced.rank; r < aug.rows(); ++r) {
    for (std::size_t c = ns; c < ns + nt; ++c) {
      if (sgn(st.reduced.rref(r, c)) != 0) {
        throw InconsistentData("SM = T has no solution");
      }
    }
  }
  st.row_space.emplace(to_rational(S));
}

Prediction predict_ls(const State& st, const CountVector& x) {
  const std::size_t ns = st.data.num_source(), nt = st.data.num_target();
  const auto& R = st.reduced.rref;
  const std::size_t rank = st.reduced.rank;
  Rational acc, tmp;
  for (std::size_t j = 0; j < ns; ++j) {
    acc = static_cast<long>(x[j]);
    for (std::size_t k = 0; k < rank; ++k) {
      const auto beta = x[st.reduced.pivot_cols[k]];
      if (beta == 0 || sgn(R(k, j)) == 0) continue;
      tmp = R(k, j) * static_cast<long>(beta);
      acc -= tmp;
    }
    if (sgn(acc) != 0) return Prediction::abstain(AbstainReason::NotUnanimous);
  }
  CountVector y(nt);
  for (std::size_t t = 0; t < nt; ++t) {
    acc = 0;
    for (std::size_t k = 0; k < rank; ++k) {
      const auto beta = x[st.reduced.pivot_cols[k]];
      if (beta == 0) continue;
      tmp = R(k, ns + t) * static_cast<long>(beta);
      acc += tmp;
    }
    if (!is_integral(acc) || sgn(acc) < 0) {
      return Prediction::abstain(AbstainReason::NonIntegralOutput);
    }
    y.counts[t] = acc.get_num().get_si();
  }
  return Prediction::answer(std::move(y));
}

}  // namespace

Decider Decider::train(const Dataset& d, Mode mode, std::int64_t n_mistakes,
                       std::uint64_t seed, const DeciderOptions& options) {
  if (n_mistakes < 0) throw DimensionMismatch("negative noise budget");
  if ((mode == Mode::Lp || mode == Mode::Ls) && n_mistakes > 0) {
    throw NoiseUnsupportedInRelaxation(
        "noise budgets are degenerate for the LP and LS relaxations");
  }
  auto st = std::make_shared<State>();
  st->data = d;
  st->mode = mode;
  st->budget = n_mistakes;
  st->seed = seed;
  st->options = options;
  st->seen = d.seen_sources();
  st->comps = atom_components(d.S());
  switch (mode) {
    case Mode::Ilp:
    case Mode::IlpExact: train_ilp(*st); break;
    case Mode::Lp: train_lp(*st); break;
    case Mode::Ls: train_ls(*st); break;
  }
  return Decider(std::move(st));
}

Prediction Decider::predict(const CountVector& x) const {
  const auto& st = *state_;
  if (has_unseen_atom(x, st.seen)) return Prediction::abstain(AbstainReason::UnseenAtom);
  if (!st.feasible) return Prediction::abstain(AbstainReason::InfeasibleModel);
  const auto xr = x.resized(st.data.num_source());
  switch (st.mode) {
    case Mode::Ilp:
    case Mode::IlpExact: return predict_ilp(st, xr);
    case Mode::Lp: return predict_lp(st, xr);
    case Mode::Ls: return predict_ls(st, xr);
  }
  return Prediction::abstain(AbstainReason::NotUnanimous);
}

std::vector<Prediction> Decider::predict_batch(std::span<const CountVector> inputs,
                                               Exec exec) const {
  std::vector<std::optional<Prediction>> slots(inputs.size());
  for_each_index(inputs.size(), exec,
                 [&](std::size_t i) { slots[i] = predict(inputs[i]); });
  std::vector<Prediction> out;
  out.reserve(inputs.size());
  for (auto& p : slots) out.push_back(std::move(*p));
  return out;
}

Mode Decider::mode() const { return state_->mode; }
std::int64_t Decider::n_mistakes() const { return state_->budget; }
std::uint64_t Decider::seed() const { return state_->seed; }
const Dataset& Decider::dataset() const { return state_->data; }
bool Decider::feasible() const { return state_->feasible; }

const MappingPair& Decider::mappings() const {
  if (state_->mode != Mode::Lp) throw Error("mapping pair exists only in LP mode");
  return state_->pair;
}

std::size_t Decider::rank() const {
  if (state_->mode != Mode::Ls) throw Error("rank is cached only in LS mode");
  return state_->reduced.rank;
}

std::optional<RationalVector> Decider::coefficients(const CountVector& x) const {
  if (state_->mode != Mode::Ls) throw Error("coefficients exist only in LS mode");
  if (has_unseen_atom(x, state_->seen)) return std::nullopt;
  const auto xq = to_rational(x.resized(state_->data.num_source()));
  return state_->row_space->coefficients(xq);
}

namespace {

using nlohmann::json;

json matrix_json(const IntMatrix& m) {
  json rows = json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto row = m.row(r);
    rows.push_back(std::vector<std::int64_t>(row.begin(), row.end()));
  }
  return rows;
}

json matrix_json(const RealMatrix& m) {
  json rows = json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto row = m.row(r);
    rows.push_back(std::vector<double>(row.begin(), row.end()));
  }
  return rows;
}

template <class T>
Matrix<T> matrix_from_json(const json& j, std::size_t cols) {
  Matrix<T> m(0, cols);
  for (const auto& row : j) {
    auto values = row.get<std::vector<T>>();
    m.append_row(values);
  }
  return m;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

constexpr int kFormatVersion = 1;

}  // namespace

std::string Decider::to_json() const {
  const auto& st = *state_;
  json j;
  j["format"] = "unanimous-decider";
  j["version"] = kFormatVersion;
  j["mode"] = to_string(st.mode);
  j["n_mistakes"] = st.budget;
  j["seed"] = st.seed;
  j["fingerprint"] = hex64(dataset_fingerprint(st.data));
  j["source_vocab"] = st.data.source_vocab().atoms();
  j["target_vocab"] = st.data.target_vocab().atoms();
  j["S"] = matrix_json(st.data.S());
  j["T"] = matrix_json(st.data.T());
  if (st.mode == Mode::Lp) {
    j["M1"] = matrix_json(st.pair.M1);
    j["M2"] = matrix_json(st.pair.M2);
  }
  return j.dump();
}

Decider Decider::from_json(const std::string& text, const DeciderOptions& options) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw FormatError(std::string("decider JSON: ") + e.what());
  }
  try {
    if (j.at("format") != "unanimous-decider") throw FormatError("not a decider document");
    if (j.at("version").get<int>() != kFormatVersion) {
      throw FormatError("unsupported decider version");
    }
    const auto mode = mode_from_string(j.at("mode").get<std::string>());
    if (!mode) throw FormatError("unknown mode");
    Vocabulary src(j.at("source_vocab").get<std::vector<std::string>>());
    Vocabulary tgt(j.at("target_vocab").get<std::vector<std::string>>());
    const auto ns = src.size(), nt = tgt.size();
    Dataset d(std::move(src), std::move(tgt), matrix_from_json<std::int64_t>(j.at("S"), ns),
              matrix_from_json<std::int64_t>(j.at("T"), nt));
    if (hex64(dataset_fingerprint(d)) != j.at("fingerprint").get<std::string>()) {
      throw FormatError("decider fingerprint does not match its data");
    }
    const auto budget = j.at("n_mistakes").get<std::int64_t>();
    const auto seed = j.at("seed").get<std::uint64_t>();
    if (*mode != Mode::Lp) return train(d, *mode, budget, seed, options);

    auto st = std::make_shared<State>();
    st->data = d;
    st->mode = Mode::Lp;
    st->seed = seed;
    st->options = options;
    st->seen = d.seen_sources();
    st->comps = atom_components(d.S());
    st->pair.M1 = matrix_from_json<double>(j.at("M1"), nt);
    st->pair.M2 = matrix_from_json<double>(j.at("M2"), nt);
    st->pair.seed = seed;
    st->pair.fingerprint = dataset_fingerprint(d);
    if (st->pair.M1.rows() != ns || st->pair.M2.rows() != ns) {
      throw FormatError("mapping shape does not match vocabulary");
    }
    return Decider(std::move(st));
  } catch (const json::exception& e) {
    throw FormatError(std::string("decider JSON: ") + e.what());
  }
}

std::vector<IntMatrix> enumerate_consistent_bounded(const Dataset& d,
                                                    const IntMatrix& U,
                                                    std::int64_t n_mistakes,
                                                    double limit) {
  const auto& S = d.S();
  const auto& T = d.T();
  const std::size_t n = d.size(), ns = d.num_source(), nt = d.num_target();
  if (U.rows() != ns || U.cols() != nt) throw DimensionMismatch("bound shape");
  double space = 1.0;
  for (auto u : U.data()) {
    if (u < 0) throw DimensionMismatch("negative bound");
    space *= static_cast<double>(u + 1);
  }
  if (space > limit) throw SearchSpaceTooLarge("enumeration box too large");

  // Candidate columns with their residuals.
  std::vector<std::vector<std::pair<std::vector<std::int64_t>, std::int64_t>>> columns(nt);
  for (std::size_t t = 0; t < nt; ++t) {
    std::vector<std::int64_t> m(ns, 0);
    for (;;) {
      std::int64_t res = 0;
      for (std::size_t i = 0; i < n && res <= n_mistakes; ++i) {
        std::int64_t y = 0;
        for (std::size_t s = 0; s < ns; ++s) y += S(i, s) * m[s];
        res += std::abs(y - T(i, t));
      }
      if (res <= n_mistakes) columns[t].emplace_back(m, res);
      std::size_t s = 0;
      while (s < ns && m[s] == U(s, t)) m[s++] = 0;
      if (s == ns) break;
      ++m[s];
    }
  }

  std::vector<IntMatrix> out;
  IntMatrix M(ns, nt);
  auto dfs = [&](auto&& self, std::size_t t, std::int64_t left) -> void {
    if (t == nt) {
      out.push_back(M);
      return;
    }
    for (const auto& [m, res] : columns[t]) {
      if (res > left) continue;
      for (std::size_t s = 0; s < ns; ++s) M(s, t) = m[s];
      self(self, t + 1, left - res);
    }
  };
  dfs(dfs, 0, n_mistakes);
  return out;
}

std::vector<IntMatrix> enumerate_consistent_bounded(const Dataset& d, std::int64_t U,
                                                    std::int64_t n_mistakes) {
  return enumerate_consistent_bounded(d, IntMatrix(d.num_source(), d.num_target(), U),
                                      n_mistakes);
}

std::vector<IntMatrix> enumerate_consistent_bounded(const Dataset& d) {
  return enumerate_consistent_bounded(d, mapping_upper_bounds(d.S(), d.T(), 0), 0);
}

Prediction enumeration_predict(std::span<const IntMatrix> mappings,
                               const CountVector& x, const std::vector<bool>& seen) {
  if (has_unseen_atom(x, seen)) return Prediction::abstain(AbstainReason::UnseenAtom);
  if (mappings.empty()) return Prediction::abstain(AbstainReason::InfeasibleModel);
  std::optional<CountVector> first;
  for (const auto& M : mappings) {
    const auto xr = x.resized(M.rows());
    CountVector y(M.cols());
    for (std::size_t s = 0; s < M.rows(); ++s) {
      if (xr[s] == 0) continue;
      for (std::size_t t = 0; t < M.cols(); ++t) y.counts[t] += xr[s] * M(s, t);
    }
    if (!first) {
      first = std::move(y);
    } else if (*first != y) {
      return Prediction::abstain(AbstainReason::NotUnanimous);
    }
  }
  return Prediction::answer(std::move(*first));
}

ResidualFit min_residual_mapping(const Dataset& d, const IlpOptions& options) {
  const auto& S = d.S();
  const auto& T = d.T();
  const std::size_t n = d.size(), ns = d.num_source(), nt = d.num_target();
  std::int64_t total = 0;
  for (auto v : T.data()) total += v;
  const auto upper = mapping_upper_bounds(S, T, total);
  const auto comps = atom_components(S);

  ResidualFit fit{IntMatrix(ns, nt), 0, std::vector<std::int64_t>(n, 0)};
  for (std::size_t k = 0; k < comps.sources.size(); ++k) {
    for (std::size_t t = 0; t < nt; ++t) {
      ColumnBlock blk{comps.sources[k], comps.rows[k], t, 0, true};
      auto p = build_column_block(S, T, blk, upper);
      for (std::size_t j = blk.sources.size(); j < p.lp.num_vars; ++j) {
        p.lp.objective[j] = -1.0;
      }
      const auto res = solve_ilp(p, options);
      if (res.status != LpStatus::Optimal) throw Error("residual fit failed");
      for (std::size_t j = 0; j < blk.sources.size(); ++j) {
        fit.mapping(blk.sources[j], t) = rounded(res.x[j]);
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t t = 0; t < nt; ++t) {
      std::int64_t y = 0;
      for (std::size_t s = 0; s < ns; ++s) y += S(i, s) * fit.mapping(s, t);
      fit.row_residuals[i] += std::abs(y - T(i, t));
    }
    fit.residual += fit.row_residuals[i];
  }
  return fit;
}

CleanResult clean_leave_one_out(const Dataset& d, std::int64_t n_mistakes,
                                const CleaningOptions& options) {
  const std::size_t n = d.size();
  std::vector<char> drop(n, 0);
  for_each_index(n, options.exec, [&](std::size_t i) {
    const auto dec = Decider::train(d.without(i), options.mode, n_mistakes,
                                    options.seed, options.decider);
    const auto p = dec.predict(d.input(i));
    drop[i] = p.abstained() ||
              (options.rule == CleaningRule::Strict && p.output() != d.output(i));
  });

  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < n; ++i) {
    if (!drop[i]) kept.push_back(i);
  }
  const auto fit = min_residual_mapping(d.subset(kept), options.decider.ilp);
  std::vector<std::size_t> exact;
  for (std::size_t q = 0; q < kept.size(); ++q) {
    if (fit.row_residuals[q] == 0) exact.push_back(kept[q]);
  }
  return {d.subset(exact), exact};
}

CleanResult clean_l1_residual(const Dataset& d) {
  std::vector<std::size_t> kept(d.size());
  std::iota(kept.begin(), kept.end(), 0);
  for (;;) {
    const auto current = d.subset(kept);
    if (linear_system_consistent(current.S(), current.T())) return {current, kept};
    const auto fit = l1_residual_fit(current.S(), current.T());
    std::vector<std::size_t> next;
    double worst = -1.0;
    std::size_t worst_at = 0;
    for (std::size_t q = 0; q < kept.size(); ++q) {
      if (fit.residuals[q] <= 1e-6) next.push_back(kept[q]);
      if (fit.residuals[q] > worst) {
        worst = fit.residuals[q];
        worst_at = q;
      }
    }
    if (next.size() == kept.size()) {
      // Residuals all under tolerance yet the exact system is unsolvable:
      // fall back to dropping the largest residual.
      next.erase(next.begin() + static_cast<std::ptrdiff_t>(worst_at));
    }
    kept = std::move(next);
  }
}

}  // namespace unanimous
