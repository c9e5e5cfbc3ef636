#include "apcre/effects.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "apcre/io_util.hpp"

namespace apcre {

namespace {

void check_spec(const ModelSpec& spec) {
    if (spec.random.empty() || spec.random.size() > 2) {
        throw std::invalid_argument("model spec must name one or two random factors");
    }
    for (std::size_t i = 1; i < spec.random.size(); ++i) {
        if (!(static_cast<int>(spec.random[i - 1]) < static_cast<int>(spec.random[i]))) {
            throw std::invalid_argument("model spec factors must be distinct and ordered");
        }
    }
}

std::vector<std::string> split_any(const std::string& text, const char* seps) {
    std::vector<std::string> parts;
    std::string cur;
    for (char ch : text) {
        if (std::string(seps).find(ch) != std::string::npos) {
            if (!cur.empty()) parts.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    if (!cur.empty()) parts.push_back(cur);
    return parts;
}

}  // namespace

std::string ModelSpec::name() const {
    std::string out;
    for (Factor f : random) {
        if (!out.empty()) out += '+';
        out += factor_name(f);
    }
    return out;
}

std::vector<ModelSpec> all_re_specs() {
    return {
        ModelSpec{{Factor::age}},
        ModelSpec{{Factor::period}},
        ModelSpec{{Factor::cohort}},
        ModelSpec{{Factor::age, Factor::period}},
        ModelSpec{{Factor::age, Factor::cohort}},
        ModelSpec{{Factor::period, Factor::cohort}},
    };
}

ModelSpec parse_model_spec(const std::string& text) {
    ModelSpec spec;
    for (const std::string& part : split_any(text, ",+ ")) {
        spec.random.push_back(factor_from_name(part));
    }
    std::sort(spec.random.begin(), spec.random.end(),
              [](Factor a, Factor b) { return static_cast<int>(a) < static_cast<int>(b); });
    check_spec(spec);
    return spec;
}

CellData parse_cell_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    int line_no = 0;

    auto fail = [&](const std::string& what) -> void {
        throw IoError("cell csv line " + std::to_string(line_no) + ": " + what);
    };

    if (!std::getline(in, line)) throw IoError("cell csv: empty input");
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    bool has_weights = false;
    if (line == "age_index,period_index,value") {
        has_weights = false;
    } else if (line == "age_index,period_index,value,weight") {
        has_weights = true;
    } else {
        fail("header must be age_index,period_index,value[,weight]");
    }

    struct Row {
        int i;
        int j;
        double value;
        double weight;
    };
    std::vector<Row> rows;
    int max_i = 0;
    int max_j = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> fields = split_any(line, ",");
        if (fields.size() != static_cast<std::size_t>(has_weights ? 4 : 3)) {
            fail("expected " + std::to_string(has_weights ? 4 : 3) + " fields");
        }
        Row row{};
        try {
            std::size_t pos = 0;
            row.i = std::stoi(fields[0], &pos);
            if (pos != fields[0].size()) fail("bad age_index");
            row.j = std::stoi(fields[1], &pos);
            if (pos != fields[1].size()) fail("bad period_index");
            row.value = std::stod(fields[2], &pos);
            if (pos != fields[2].size()) fail("bad value");
            row.weight = has_weights ? std::stod(fields[3], &pos) : 1.0;
            if (has_weights && pos != fields[3].size()) fail("bad weight");
        } catch (const IoError&) {
            throw;
        } catch (const std::exception&) {
            fail("unparseable field");
        }
        if (row.i < 1 || row.j < 1) fail("indices are 1-based");
        if (!std::isfinite(row.value)) fail("value must be finite");
        if (!(row.weight > 0.0) || !std::isfinite(row.weight)) fail("weight must be positive");
        max_i = std::max(max_i, row.i);
        max_j = std::max(max_j, row.j);
        rows.push_back(row);
    }

    if (max_i < 2 || max_j < 2) throw IoError("cell csv: need at least a 2 x 2 grid");
    if (rows.size() != static_cast<std::size_t>(max_i) * static_cast<std::size_t>(max_j)) {
        throw IoError("cell csv: expected one row per cell of the " + std::to_string(max_i) + " x " +
                      std::to_string(max_j) + " grid, got " + std::to_string(rows.size()));
    }

    CellData data;
    data.grid = build_grid(max_i, max_j);
    data.y.resize(data.grid.n());
    data.weight = Eigen::VectorXd::Ones(data.grid.n());
    data.has_weights = has_weights;
    std::vector<char> seen(static_cast<std::size_t>(data.grid.n()), 0);
    for (const Row& row : rows) {
        int idx = (row.i - 1) * max_j + (row.j - 1);
        if (seen[static_cast<std::size_t>(idx)]) {
            throw IoError("cell csv: duplicate cell (" + std::to_string(row.i) + ", " +
                          std::to_string(row.j) + ")");
        }
        seen[static_cast<std::size_t>(idx)] = 1;
        data.y[idx] = row.value;
        data.weight[idx] = row.weight;
    }
    return data;
}

CellData read_cell_csv(const std::string& path) { return parse_cell_csv(read_file(path)); }

std::string cell_csv(const Grid& grid, const Eigen::VectorXd& y) {
    if (y.size() != grid.n()) throw std::invalid_argument("value vector does not match grid");
    std::string out = "age_index,period_index,value\n";
    for (int r = 0; r < grid.n(); ++r) {
        const Cell& cell = grid.cells[static_cast<std::size_t>(r)];
        out += std::to_string(cell.i);
        out += ',';
        out += std::to_string(cell.j);
        out += ',';
        out += fmt_full(y[r]);
        out += '\n';
    }
    return out;
}

FittedModel fit_spec(const CellData& data, const ModelSpec& spec, StartPolicy policy) {
    check_spec(spec);
    if (data.y.size() != data.grid.n()) throw std::invalid_argument("data does not match grid");
    DesignBundle bundle = build_model(data.grid, spec.random);
    Eigen::VectorXd y = data.y;
    if (data.has_weights) {
        Eigen::VectorXd s = data.weight.cwiseSqrt();
        bundle.W = s.asDiagonal() * bundle.W;
        for (auto& z : bundle.Z) z = s.asDiagonal() * z;
        y = s.asDiagonal() * y;
    }
    return fit_re_apc(bundle, y, policy);
}

SensitivityResult sensitivity_fits(const CellData& data, const std::vector<ModelSpec>& specs,
                                   StartPolicy policy) {
    if (specs.empty()) throw std::invalid_argument("no model specs given");
    SensitivityResult result;
    result.grid = data.grid;
    result.specs = specs;
    result.fits.reserve(specs.size());
    for (const ModelSpec& spec : specs) result.fits.push_back(fit_spec(data, spec, policy));
    return result;
}

std::string sensitivity_tsv(const SensitivityResult& result) {
    std::string out = "effect\tlevel";
    for (const ModelSpec& spec : result.specs) {
        out += "\trandom:";
        out += spec.name();
    }
    out += '\n';

    auto add_row = [&](const std::string& effect, const std::string& level, auto value_of) {
        out += effect;
        out += '\t';
        out += level;
        for (const FittedModel& fit : result.fits) {
            out += '\t';
            out += fmt_short(value_of(fit));
        }
        out += '\n';
    };

    add_row("intercept", "-",
            [](const FittedModel& fit) { return fit.effects.block("intercept").values[0]; });
    for (Factor f : {Factor::age, Factor::period, Factor::cohort}) {
        const char* name = factor_name(f);
        int levels = result.grid.levels(f);
        for (int l = 1; l <= levels; ++l) {
            add_row(name, std::to_string(l), [&](const FittedModel& fit) {
                return fit.effects.block(name).values[l - 1];
            });
        }
    }
    for (Factor f : {Factor::age, Factor::period, Factor::cohort}) {
        std::string name = factor_name(f);
        add_row(name + ":level", "-", [&](const FittedModel& fit) {
            return fit.effects.block(name).decomposition.level;
        });
        add_row(name + ":slope", "-", [&](const FittedModel& fit) {
            return fit.effects.block(name).decomposition.linear_slope;
        });
        add_row(name + ":nonlinear_norm", "-", [&](const FittedModel& fit) {
            return std::sqrt(fit.effects.block(name).decomposition.nonlinear_sq);
        });
    }
    return out;
}

}  // namespace apcre
