#include "dcsim/report.hpp"

#include <cstdio>
#include <sstream>

#include "json.hpp"

namespace dcsim {

namespace {

std::string fmt(double v, const char* spec = "%.10g") {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

}  // namespace

std::string render_text(const ComparisonTable& table) {
    std::vector<std::vector<std::string>> grid;
    std::vector<std::string> header{"metric"};
    header.insert(header.end(), table.algorithms.begin(), table.algorithms.end());
    grid.push_back(header);
    for (std::size_t m = 0; m < table.metrics.size(); ++m) {
        std::vector<std::string> row{table.metrics[m]};
        for (std::size_t a = 0; a < table.algorithms.size(); ++a) {
            const ComparisonCell& c = table.cells[m][a];
            std::string cell = fmt(c.value);
            if (c.ci) cell += " [" + fmt(c.ci->low) + ", " + fmt(c.ci->high) + "]";
            row.push_back(cell);
        }
        grid.push_back(row);
    }

    std::vector<std::size_t> width(grid[0].size(), 0);
    for (const auto& row : grid)
        for (std::size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], row[i].size());

    std::ostringstream out;
    for (const auto& row : grid) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            out << row[i] << std::string(width[i] - row[i].size(), ' ');
            out << (i + 1 < row.size() ? "  " : "");
        }
        out << '\n';
    }
    return out.str();
}

std::string render_csv(const ComparisonTable& table) {
    std::string out = "metric,algorithm,value,ci_low,ci_high\n";
    for (std::size_t m = 0; m < table.metrics.size(); ++m) {
        for (std::size_t a = 0; a < table.algorithms.size(); ++a) {
            const ComparisonCell& c = table.cells[m][a];
            out += table.metrics[m] + "," + table.algorithms[a] + "," + fmt(c.value, "%.17g");
            if (c.ci)
                out += "," + fmt(c.ci->low, "%.17g") + "," + fmt(c.ci->high, "%.17g");
            else
                out += ",,";
            out += '\n';
        }
    }
    return out;
}

std::string render_json(const ComparisonTable& table) {
    nlohmann::json doc;
    doc["schema_version"] = 1;
    doc["repetitions"] = table.repetitions;
    doc["metrics"] = table.metrics;
    doc["algorithms"] = table.algorithms;
    nlohmann::json cells = nlohmann::json::array();
    for (std::size_t m = 0; m < table.metrics.size(); ++m) {
        for (std::size_t a = 0; a < table.algorithms.size(); ++a) {
            const ComparisonCell& c = table.cells[m][a];
            nlohmann::json cell;
            cell["metric"] = table.metrics[m];
            cell["algorithm"] = table.algorithms[a];
            cell["value"] = c.value;
            if (c.ci) {
                cell["ci"] = {{"low", c.ci->low},
                              {"high", c.ci->high},
                              {"mean", c.ci->mean},
                              {"stddev", c.ci->stddev},
                              {"n", c.ci->n}};
            } else {
                cell["ci"] = nullptr;
            }
            cell["samples"] = c.samples;
            cells.push_back(std::move(cell));
        }
    }
    doc["cells"] = std::move(cells);
    return doc.dump(2) + "\n";
}

std::string render(const ComparisonTable& table, const std::string& format) {
    if (format == "text") return render_text(table);
    if (format == "csv") return render_csv(table);
    if (format == "json") return render_json(table);
    throw InvalidSpec("unknown format '" + format + "'; known formats: text, csv, json");
}

}  // namespace dcsim
