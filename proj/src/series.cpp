#include "finaug/series.hpp"

#include <cmath>
#include <charconv>
#include <fstream>
#include <sstream>

#include "finaug/errors.hpp"

namespace finaug {
namespace {

std::vector<std::string> split_csv_row(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return {};
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

double parse_cell(const std::string& raw, std::size_t data_row) {
    const std::string text = trim(raw);
    double value = 0.0;
    const auto [ptr, ec] =
        std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size())
        throw parse_error("data row " + std::to_string(data_row) +
                              ": cannot parse numeric cell '" + text + "'",
                          data_row);
    return value;
}

}  // namespace

void price_series::validate() const {
    if (prices.size() < 2)
        throw series_too_short("price series must hold at least two prices");
    for (std::size_t i = 0; i < prices.size(); ++i) {
        if (!std::isfinite(prices[i])) throw non_finite_value("price series");
        if (prices[i] <= 0.0) throw non_positive_price(i, prices[i]);
    }
}

void return_series::validate() const {
    for (const double r : returns)
        if (!std::isfinite(r)) throw non_finite_value("return series");
}

price_series load_price_csv(const std::filesystem::path& path,
                            const std::string& column) {
    std::ifstream in(path);
    if (!in) throw parse_error("cannot open file: " + path.string());

    // Lines starting with '#' are metadata comments; the first other line is
    // the required header.
    std::string line;
    bool have_header = false;
    while (std::getline(in, line)) {
        const std::string t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        have_header = true;
        break;
    }
    if (!have_header)
        throw parse_error("empty file (header required): " + path.string());

    // Locate the requested column in the header.
    const std::vector<std::string> header = split_csv_row(line);
    std::size_t col = header.size();
    for (std::size_t i = 0; i < header.size(); ++i)
        if (trim(header[i]) == column) col = i;
    if (col == header.size()) throw missing_column(column);

    price_series series;
    series.label = path.stem().string();
    std::size_t data_row = 0;
    while (std::getline(in, line)) {
        const std::string t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        ++data_row;
        const std::vector<std::string> cells = split_csv_row(line);
        if (col >= cells.size())
            throw parse_error("data row " + std::to_string(data_row) +
                                  ": row has " + std::to_string(cells.size()) +
                                  " cells, column index " + std::to_string(col) +
                                  " missing",
                              data_row);
        const double value = parse_cell(cells[col], data_row);
        if (!std::isfinite(value))
            throw parse_error(
                "data row " + std::to_string(data_row) + ": non-finite price",
                data_row);
        if (value <= 0.0) throw non_positive_price(data_row, value);
        series.prices.push_back(value);
    }
    series.validate();
    return series;
}

void write_price_csv(const std::filesystem::path& path,
                     const price_series& series, const std::string& column,
                     std::span<const std::string> comments) {
    std::ofstream out(path);
    if (!out) throw error("cannot open file for writing: " + path.string());
    for (const std::string& c : comments) out << "# " << c << "\n";
    out << "t," << column << "\n";
    out.precision(17);
    for (std::size_t t = 0; t < series.prices.size(); ++t)
        out << t << "," << series.prices[t] << "\n";
}

return_series compute_returns(const price_series& series) {
    series.validate();
    if (series.size() < 2)
        throw series_too_short("need at least two prices to form returns");
    return_series out;
    out.returns.resize(series.size() - 1);
    for (std::size_t t = 0; t + 1 < series.size(); ++t)
        out.returns[t] = (series.prices[t + 1] - series.prices[t]) / series.prices[t];
    return out;
}

namespace {

window_dataset windows_from(std::span<const double> values,
                            window_dataset::space mode,
                            std::size_t window_len) {
    if (window_len == 0) throw invalid_parameter("window length must be positive");
    if (values.size() <= window_len)
        throw series_too_short("series of length " + std::to_string(values.size()) +
                               " cannot form windows of length " +
                               std::to_string(window_len));
    window_dataset ds;
    ds.mode = mode;
    ds.window_len = window_len;
    ds.count = values.size() - window_len;
    ds.inputs.reserve(ds.count * window_len);
    ds.targets.reserve(ds.count);
    ds.target_index.reserve(ds.count);
    for (std::size_t i = 0; i < ds.count; ++i) {
        ds.inputs.insert(ds.inputs.end(), values.begin() + i,
                         values.begin() + i + window_len);
        ds.targets.push_back(values[i + window_len]);
        ds.target_index.push_back(i + window_len);
    }
    return ds;
}

}  // namespace

window_dataset make_windows(const price_series& series, std::size_t window_len) {
    series.validate();
    return windows_from(series.prices, window_dataset::space::price, window_len);
}

window_dataset make_windows(const return_series& series, std::size_t window_len) {
    series.validate();
    return windows_from(series.returns, window_dataset::space::ret, window_len);
}

}  // namespace finaug
