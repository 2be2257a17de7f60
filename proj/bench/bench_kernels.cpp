// Serial vs OpenMP timings for the shared kernels and the loops built on them.
// Usage: bench_kernels [repeats]

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <vector>

#include "unanimous/data.hpp"
#include "unanimous/kernels.hpp"
#include "unanimous/linalg.hpp"
#include "unanimous/unanimity.hpp"

using namespace unanimous;

namespace {

double best_of(int repeats, const std::function<void()>& body) {
  double best = 1e300;
  for (int r = 0; r < repeats; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    body();
    best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  return best;
}

void report(const char* name, double serial, double parallel) {
  std::printf("%-28s serial %9.4fs  parallel %9.4fs  speedup %5.2fx\n", name, serial, parallel,
              serial / parallel);
}

}  // namespace

int main(int argc, char** argv) {
  const int repeats = argc > 1 ? std::atoi(argv[1]) : 3;
  std::printf("threads %d\n", omp_get_max_threads());
  std::mt19937_64 rng(0);

  {
    const std::size_t rows = 600, cols = 1200;
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> base(rows * cols);
    for (auto& v : base) v = u(rng);
    base[7 * cols + 11] = 2.0;
    auto run = [&](Exec exec) {
      return best_of(repeats, [&] {
        auto t = base;
        for (int k = 0; k < 20; ++k) kernels::pivot(t, rows, cols, 7, 11, exec);
      });
    };
    report("simplex pivot 600x1200 x20", run(Exec::Serial), run(Exec::Parallel));
  }

  {
    SynthConfig cfg;
    cfg.n_source = 150;
    cfg.n_target = 40;
    cfg.n_train = 300;
    cfg.n_clusters = 5;
    cfg.len_max = 30;
    const auto data = synth_generate(cfg);
    const auto S = to_rational(data.train.S());
    auto run = [&](Exec exec) {
      RrefOptions o;
      o.exec = exec;
      return best_of(repeats, [&] { (void)rref(S, o); });
    };
    report("exact rref 300x150", run(Exec::Serial), run(Exec::Parallel));

    const auto dec = Decider::train(data.train, Mode::Lp, 0, 1);
    std::vector<CountVector> xs;
    for (const auto& ex : data.test) xs.push_back(ex.input);
    for (std::size_t i = 0; i < data.train.size(); ++i) xs.push_back(data.train.input(i));
    auto batch = [&](Exec exec) {
      return best_of(repeats, [&] { (void)dec.predict_batch(xs, exec); });
    };
    report("LP predict_batch", batch(Exec::Serial), batch(Exec::Parallel));

    const auto ilp = Decider::train(data.train, Mode::Ilp, 0, 1);
    auto ibatch = [&](Exec exec) {
      return best_of(repeats, [&] { (void)ilp.predict_batch(xs, exec); });
    };
    report("ILP predict_batch", ibatch(Exec::Serial), ibatch(Exec::Parallel));
  }
  return 0;
}
