#include "apcre/grid.hpp"

#include <stdexcept>

namespace apcre {

const char* factor_name(Factor f) {
    switch (f) {
        case Factor::age: return "age";
        case Factor::period: return "period";
        case Factor::cohort: return "cohort";
    }
    throw std::invalid_argument("unknown factor");
}

Factor factor_from_name(const std::string& name) {
    if (name == "age") return Factor::age;
    if (name == "period") return Factor::period;
    if (name == "cohort") return Factor::cohort;
    throw std::invalid_argument("unknown factor name: " + name);
}

int Grid::levels(Factor f) const {
    switch (f) {
        case Factor::age: return a;
        case Factor::period: return p;
        case Factor::cohort: return c;
    }
    throw std::invalid_argument("unknown factor");
}

int Grid::level(Factor f, const Cell& cell) const {
    switch (f) {
        case Factor::age: return cell.i;
        case Factor::period: return cell.j;
        case Factor::cohort: return cell.k;
    }
    throw std::invalid_argument("unknown factor");
}

Grid build_grid(int a, int p) {
    if (a < 2 || p < 2) {
        throw std::invalid_argument("build_grid requires a >= 2 and p >= 2");
    }
    Grid g;
    g.a = a;
    g.p = p;
    g.c = a + p - 1;
    g.cells.reserve(static_cast<std::size_t>(a) * p);
    for (int i = 1; i <= a; ++i) {
        for (int j = 1; j <= p; ++j) {
            g.cells.push_back(Cell{i, j, a + j - i});
        }
    }
    return g;
}

}  // namespace apcre
