#include "bnmc/data.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

namespace bnmc {

Dataset::Dataset(std::vector<std::string> names, std::vector<std::size_t> arities,
                 std::vector<std::vector<Category>> columns)
    : names_(std::move(names)), arities_(std::move(arities)), columns_(std::move(columns)) {
    if (names_.size() != arities_.size() || names_.size() != columns_.size())
        throw InputError("dataset names, arities and columns disagree in length");
    if (names_.size() > kMaxNodes) throw InputError("at most 64 variables are supported");
    for (std::size_t v = 0; v < columns_.size(); ++v) {
        if (columns_[v].size() != columns_.front().size()) throw InputError("dataset columns differ in length");
        if (arities_[v] < 2) throw InputError("variable '" + names_[v] + "' has arity below 2");
        for (Category c : columns_[v])
            if (c >= arities_[v])
                throw LoadError(LoadErrorKind::ArityViolation,
                                "value " + std::to_string(c) + " in '" + names_[v] + "' exceeds arity " +
                                    std::to_string(arities_[v]));
    }
}

std::optional<std::size_t> Dataset::index_of(const std::string& name) const {
    auto it = std::find(names_.begin(), names_.end(), name);
    if (it == names_.end()) return std::nullopt;
    return static_cast<std::size_t>(it - names_.begin());
}

Dataset Dataset::select_rows(std::span<const std::size_t> rows) const {
    std::vector<std::vector<Category>> cols(n_vars());
    for (std::size_t v = 0; v < n_vars(); ++v) {
        cols[v].reserve(rows.size());
        for (std::size_t r : rows) cols[v].push_back(columns_[v].at(r));
    }
    return Dataset(names_, arities_, std::move(cols));
}

Schema parse_schema(const std::string& text) {
    using json = nlohmann::json;
    Schema schema;
    try {
        const json doc = json::parse(text);
        for (const auto& [name, arity] : doc.at("arities").items()) {
            const auto value = arity.get<long long>();
            if (value < 2) throw LoadError(LoadErrorKind::BadSchema, "schema arity for '" + name + "' below 2");
            schema[name] = static_cast<std::size_t>(value);
        }
    } catch (const json::exception& e) {
        throw LoadError(LoadErrorKind::BadSchema, std::string("invalid schema JSON: ") + e.what());
    }
    return schema;
}

Schema read_schema(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw LoadError(LoadErrorKind::Io, "cannot open schema " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_schema(ss.str());
}

namespace {

std::vector<std::string> split_row(const std::string& line) {
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        std::string cell = line.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
        const auto b = cell.find_first_not_of(" \t");
        const auto e = cell.find_last_not_of(" \t\r");
        cells.push_back(b == std::string::npos ? std::string{} : cell.substr(b, e - b + 1));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return cells;
}

bool is_missing_token(const std::string& cell) {
    return cell.empty() || cell == "NA" || cell == "na" || cell == "NaN" || cell == "nan" || cell == "?" ||
           cell == "null";
}

}  // namespace

Dataset parse_csv(std::istream& in, bool header, const Schema* schema) {
    std::vector<std::string> names;
    std::vector<std::vector<Category>> columns;
    std::string line;
    std::size_t line_no = 0;
    bool saw_content = false;

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        auto cells = split_row(line);
        if (!saw_content) {
            saw_content = true;
            if (header) {
                names = std::move(cells);
                columns.resize(names.size());
                continue;
            }
            for (std::size_t i = 0; i < cells.size(); ++i) names.push_back("v" + std::to_string(i));
            columns.resize(names.size());
        }
        if (cells.size() != names.size())
            throw LoadError(LoadErrorKind::RaggedRow, "line " + std::to_string(line_no) + " has " +
                                                          std::to_string(cells.size()) + " cells, expected " +
                                                          std::to_string(names.size()));
        for (std::size_t v = 0; v < cells.size(); ++v) {
            const std::string& cell = cells[v];
            if (is_missing_token(cell))
                throw LoadError(LoadErrorKind::MissingValue,
                                "missing value in column '" + names[v] + "' at line " + std::to_string(line_no));
            Category value = 0;
            const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
            if (ec != std::errc{} || ptr != cell.data() + cell.size())
                throw LoadError(LoadErrorKind::NonInteger, "non-integer cell '" + cell + "' in column '" + names[v] +
                                                               "' at line " + std::to_string(line_no));
            columns[v].push_back(value);
        }
    }

    if (!saw_content) throw LoadError(LoadErrorKind::EmptyFile, "data file is empty");
    if (names.size() < 2) throw LoadError(LoadErrorKind::TooFewColumns, "data needs at least 2 variables");
    if (columns.front().empty()) throw LoadError(LoadErrorKind::TooFewRows, "data has no rows");

    std::vector<std::size_t> arities(names.size());
    for (std::size_t v = 0; v < names.size(); ++v) {
        const Category observed_max = *std::max_element(columns[v].begin(), columns[v].end());
        std::size_t arity = std::max<std::size_t>(2, std::size_t{observed_max} + 1);
        if (schema) {
            if (auto it = schema->find(names[v]); it != schema->end()) {
                if (std::size_t{observed_max} >= it->second)
                    throw LoadError(LoadErrorKind::ArityViolation,
                                    "column '" + names[v] + "' holds " + std::to_string(observed_max) +
                                        " but the schema declares arity " + std::to_string(it->second));
                arity = it->second;
            }
        }
        arities[v] = arity;
    }
    return Dataset(std::move(names), std::move(arities), std::move(columns));
}

Dataset load_csv(const std::filesystem::path& path, bool header, const Schema* schema) {
    std::ifstream in(path);
    if (!in) throw LoadError(LoadErrorKind::Io, "cannot open " + path.string());
    return parse_csv(in, header, schema);
}

void write_csv(std::ostream& out, const Dataset& data) {
    for (std::size_t v = 0; v < data.n_vars(); ++v) out << (v ? "," : "") << data.name(v);
    out << '\n';
    for (std::size_t r = 0; r < data.n_rows(); ++r) {
        for (std::size_t v = 0; v < data.n_vars(); ++v) out << (v ? "," : "") << data.at(r, v);
        out << '\n';
    }
}

ContingencyTable::ContingencyTable(std::size_t n_configs, std::size_t child_arity)
    : q_(n_configs), r_(child_arity), counts_(n_configs * child_arity, 0) {}

std::uint64_t ContingencyTable::config_total(std::size_t j) const {
    return std::accumulate(counts_.begin() + static_cast<std::ptrdiff_t>(j * r_),
                           counts_.begin() + static_cast<std::ptrdiff_t>((j + 1) * r_), std::uint64_t{0});
}

std::uint64_t ContingencyTable::total() const {
    return std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0});
}

std::size_t config_count(const Dataset& data, NodeSet parents, std::size_t limit) {
    std::size_t q = 1;
    for_each_member(parents, [&](std::size_t p) {
        if (p >= data.n_vars()) throw std::out_of_range("parent index out of range");
        if (q > limit / data.arity(p))
            throw ConfigurationOverflow("parent configuration space exceeds " + std::to_string(limit));
        q *= data.arity(p);
    });
    return q;
}

ContingencyTable counts(const Dataset& data, std::size_t child, NodeSet parents) {
    if (child >= data.n_vars()) throw std::out_of_range("child index out of range");
    const std::size_t r = data.arity(child);
    const std::size_t q = config_count(data, parents, kMaxDenseCells / r);
    ContingencyTable table(q, r);
    const auto parent_idx = members(parents);
    const auto child_col = data.column(child);
    for (std::size_t row = 0; row < data.n_rows(); ++row) {
        std::size_t j = 0;
        for (std::size_t p : parent_idx) j = j * data.arity(p) + data.at(row, p);
        ++table.at(j, child_col[row]);
    }
    return table;
}

}  // namespace bnmc
