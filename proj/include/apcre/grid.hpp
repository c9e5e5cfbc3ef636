#pragma once

#include <string>
#include <vector>

namespace apcre {

enum class Factor { age, period, cohort };

const char* factor_name(Factor f);
Factor factor_from_name(const std::string& name);

struct Cell {
    int i;  // age index, 1-based
    int j;  // period index, 1-based
    int k;  // cohort index, 1-based: k = a + j - i
};

// Rectangular age-by-period table with equal interval widths. Cells are
// ordered age-major: the period index varies fastest.
struct Grid {
    int a = 0;
    int p = 0;
    int c = 0;  // diagonal count, a + p - 1
    std::vector<Cell> cells;

    int n() const { return a * p; }
    int levels(Factor f) const;
    // 1-based level of the factor for a given cell
    int level(Factor f, const Cell& cell) const;
};

// Requires a >= 2 and p >= 2.
Grid build_grid(int a, int p);

}  // namespace apcre
