#pragma once
// CSV emission helpers. All numeric columns are written with >= 12 significant
// digits; undefined samples are emitted as empty cells (never inf/nan text).

#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace dynamo::csv {

inline std::string format_value(double x) {
    if (!std::isfinite(x)) return ""; // explicit undefined marker
    std::ostringstream os;
    os.precision(15);
    os << x;
    return os.str();
}

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<double>> columns; // column-major; NaN = undefined cell

    void add_column(std::string name, std::vector<double> values) {
        if (!columns.empty() && values.size() != columns.front().size())
            throw std::invalid_argument("csv::Table: column length mismatch for " + name);
        header.push_back(std::move(name));
        columns.push_back(std::move(values));
    }

    std::size_t n_rows() const { return columns.empty() ? 0 : columns.front().size(); }

    void write(std::ostream& os) const {
        for (std::size_t c = 0; c < header.size(); ++c)
            os << (c ? "," : "") << header[c];
        os << "\n";
        for (std::size_t r = 0; r < n_rows(); ++r) {
            for (std::size_t c = 0; c < columns.size(); ++c)
                os << (c ? "," : "") << format_value(columns[c][r]);
            os << "\n";
        }
    }

    void write_file(const std::string& path) const {
        std::ofstream f(path);
        if (!f) throw std::runtime_error("csv::Table: cannot open " + path);
        write(f);
        if (!f) throw std::runtime_error("csv::Table: write failed for " + path);
    }
};

} // namespace dynamo::csv
