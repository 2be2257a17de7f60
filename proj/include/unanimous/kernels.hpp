#pragma once

// Inner loops shared by the simplex tableau and exact row reduction. Each
// kernel has a serial reference and an OpenMP version that must agree
// exactly; tests compare them and bench/ times them.

#include <cstddef>
#include <span>

#include "unanimous/rational.hpp"

namespace unanimous {

enum class Exec { Serial, Parallel };

// Process-wide default used when callers do not pass an Exec. Starts as
// Parallel; the UNANIMOUS_SERIAL environment variable flips it.
Exec default_exec();
void set_default_exec(Exec exec);

namespace kernels {

// Dense simplex pivot on a row-major rows x cols tableau: scales the pivot
// row so entry (pr, pc) becomes 1, then clears column pc from every other row.
void pivot_serial(std::span<double> tableau, std::size_t rows,
                  std::size_t cols, std::size_t pr, std::size_t pc);
void pivot_parallel(std::span<double> tableau, std::size_t rows,
                    std::size_t cols, std::size_t pr, std::size_t pc);
void pivot(std::span<double> tableau, std::size_t rows, std::size_t cols,
           std::size_t pr, std::size_t pc, Exec exec);

// Gauss-Jordan step over exact rationals. Row pr must already have a 1 at pc;
// column pc is cleared from all other rows. Columns before col_begin are
// assumed zero in row pr and skipped.
void eliminate_serial(RationalMatrix& m, std::size_t pr, std::size_t pc,
                      std::size_t col_begin);
void eliminate_parallel(RationalMatrix& m, std::size_t pr, std::size_t pc,
                        std::size_t col_begin);
void eliminate(RationalMatrix& m, std::size_t pr, std::size_t pc,
               std::size_t col_begin, Exec exec);

}  // namespace kernels
}  // namespace unanimous
