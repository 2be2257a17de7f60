#include "unanimous/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <vector>

namespace unanimous {

namespace {

Exec initial_exec() {
  const char* env = std::getenv("UNANIMOUS_SERIAL");
  return (env != nullptr && env[0] != '\0' && env[0] != '0') ? Exec::Serial
                                                             : Exec::Parallel;
}

std::atomic<Exec>& exec_slot() {
  static std::atomic<Exec> slot{initial_exec()};
  return slot;
}

void scale_pivot_row(double* prow, std::size_t cols, std::size_t pc) {
  const double inv = 1.0 / prow[pc];
  for (std::size_t j = 0; j < cols; ++j) prow[j] *= inv;
  prow[pc] = 1.0;
}

}  // namespace

Exec default_exec() { return exec_slot().load(std::memory_order_relaxed); }
void set_default_exec(Exec exec) {
  exec_slot().store(exec, std::memory_order_relaxed);
}

namespace kernels {

void pivot_serial(std::span<double> tableau, std::size_t rows,
                  std::size_t cols, std::size_t pr, std::size_t pc) {
  double* base = tableau.data();
  double* prow = base + pr * cols;
  scale_pivot_row(prow, cols, pc);
  for (std::size_t r = 0; r < rows; ++r) {
    if (r == pr) continue;
    double* row = base + r * cols;
    const double f = row[pc];
    if (f == 0.0) continue;
    for (std::size_t j = 0; j < cols; ++j) row[j] -= f * prow[j];
    row[pc] = 0.0;
  }
}

void pivot_parallel(std::span<double> tableau, std::size_t rows,
                    std::size_t cols, std::size_t pr, std::size_t pc) {
  double* base = tableau.data();
  double* prow = base + pr * cols;
  scale_pivot_row(prow, cols, pc);
  // Only the pivot row's non-zeros can change other rows.
  std::vector<std::size_t> nz;
  nz.reserve(cols);
  for (std::size_t j = 0; j < cols; ++j) {
    if (prow[j] != 0.0) nz.push_back(j);
  }
  const std::ptrdiff_t nrows = static_cast<std::ptrdiff_t>(rows);
#pragma omp parallel for schedule(static) if (rows * nz.size() > 32768)
  for (std::ptrdiff_t ri = 0; ri < nrows; ++ri) {
    const auto r = static_cast<std::size_t>(ri);
    if (r == pr) continue;
    double* row = base + r * cols;
    const double f = row[pc];
    if (f == 0.0) continue;
    for (std::size_t j : nz) row[j] -= f * prow[j];
    row[pc] = 0.0;
  }
}

void pivot(std::span<double> tableau, std::size_t rows, std::size_t cols,
           std::size_t pr, std::size_t pc, Exec exec) {
  if (exec == Exec::Serial) {
    pivot_serial(tableau, rows, cols, pr, pc);
  } else {
    pivot_parallel(tableau, rows, cols, pr, pc);
  }
}

void eliminate_serial(RationalMatrix& m, std::size_t pr, std::size_t pc,
                      std::size_t col_begin) {
  Rational tmp;
  for (std::size_t r = 0; r < m.rows(); ++r) {
    if (r == pr || sgn(m(r, pc)) == 0) continue;
    const Rational f = m(r, pc);
    for (std::size_t j = col_begin; j < m.cols(); ++j) {
      if (sgn(m(pr, j)) == 0) continue;
      tmp = f * m(pr, j);
      m(r, j) -= tmp;
    }
  }
}

void eliminate_parallel(RationalMatrix& m, std::size_t pr, std::size_t pc,
                        std::size_t col_begin) {
  std::vector<std::size_t> nz;
  for (std::size_t j = col_begin; j < m.cols(); ++j) {
    if (sgn(m(pr, j)) != 0) nz.push_back(j);
  }
  const std::ptrdiff_t nrows = static_cast<std::ptrdiff_t>(m.rows());
#pragma omp parallel for schedule(dynamic, 4) if (m.rows() * nz.size() > 4096)
  for (std::ptrdiff_t ri = 0; ri < nrows; ++ri) {
    const auto r = static_cast<std::size_t>(ri);
    if (r == pr || sgn(m(r, pc)) == 0) continue;
    const Rational f = m(r, pc);
    Rational tmp;
    for (std::size_t j : nz) {
      tmp = f * m(pr, j);
      m(r, j) -= tmp;
    }
  }
}

void eliminate(RationalMatrix& m, std::size_t pr, std::size_t pc,
               std::size_t col_begin, Exec exec) {
  if (exec == Exec::Serial) {
    eliminate_serial(m, pr, pc, col_begin);
  } else {
    eliminate_parallel(m, pr, pc, col_begin);
  }
}

}  // namespace kernels
}  // namespace unanimous
