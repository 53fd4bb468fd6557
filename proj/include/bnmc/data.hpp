#ifndef BNMC_DATA_HPP
#define BNMC_DATA_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bnmc/bits.hpp"
#include "bnmc/errors.hpp"

namespace bnmc {

enum class LoadErrorKind {
    Io,
    EmptyFile,
    RaggedRow,
    NonInteger,
    MissingValue,
    TooFewRows,
    TooFewColumns,
    ArityViolation,
    BadSchema,
};

class LoadError : public InputError {
public:
    LoadError(LoadErrorKind kind, const std::string& what) : InputError(what), kind_(kind) {}
    LoadErrorKind kind() const { return kind_; }

private:
    LoadErrorKind kind_;
};

// Parent configuration space too large to index.
class ConfigurationOverflow : public InputError {
public:
    using InputError::InputError;
};

using Category = std::uint32_t;

/// Discrete dataset stored column-major. Cells are 0-based category indices
/// strictly below their column's arity.
class Dataset {
public:
    Dataset() = default;
    Dataset(std::vector<std::string> names, std::vector<std::size_t> arities,
            std::vector<std::vector<Category>> columns);

    std::size_t n_vars() const { return names_.size(); }
    std::size_t n_rows() const { return columns_.empty() ? 0 : columns_.front().size(); }

    const std::vector<std::string>& names() const { return names_; }
    const std::string& name(std::size_t v) const { return names_[v]; }
    std::optional<std::size_t> index_of(const std::string& name) const;

    std::size_t arity(std::size_t v) const { return arities_[v]; }
    const std::vector<std::size_t>& arities() const { return arities_; }

    std::span<const Category> column(std::size_t v) const { return columns_[v]; }
    Category at(std::size_t row, std::size_t v) const { return columns_[v][row]; }

    // Rows in the given order; may be empty.
    Dataset select_rows(std::span<const std::size_t> rows) const;

private:
    std::vector<std::string> names_;
    std::vector<std::size_t> arities_;
    std::vector<std::vector<Category>> columns_;
};

// Declared arities keyed by variable name, from {"arities": {"a": 2, ...}}.
using Schema = std::map<std::string, std::size_t>;

Schema parse_schema(const std::string& text);
Schema read_schema(const std::filesystem::path& path);

// Comma-separated integer table. Without a header, variables are named
// v0, v1, ... Arities come from the schema when it names the column,
// otherwise max(2, largest observed value + 1).
Dataset parse_csv(std::istream& in, bool header, const Schema* schema = nullptr);
Dataset load_csv(const std::filesystem::path& path, bool header, const Schema* schema = nullptr);
void write_csv(std::ostream& out, const Dataset& data);

/// Contingency counts N_jk for one child and parent set. Parent
/// configurations j are mixed-radix over the parents in increasing index
/// order, the highest-index parent varying fastest.
class ContingencyTable {
public:
    ContingencyTable(std::size_t n_configs, std::size_t child_arity);

    std::size_t n_configs() const { return q_; }
    std::size_t child_arity() const { return r_; }
    std::uint64_t at(std::size_t j, std::size_t k) const { return counts_[j * r_ + k]; }
    std::uint64_t& at(std::size_t j, std::size_t k) { return counts_[j * r_ + k]; }
    std::uint64_t config_total(std::size_t j) const;
    std::uint64_t total() const;

private:
    std::size_t q_;
    std::size_t r_;
    std::vector<std::uint64_t> counts_;
};

// Largest q*r the dense table will allocate.
inline constexpr std::size_t kMaxDenseCells = std::size_t{1} << 20;

// Number of parent configurations, or ConfigurationOverflow past `limit`.
std::size_t config_count(const Dataset& data, NodeSet parents, std::size_t limit = kMaxDenseCells);

ContingencyTable counts(const Dataset& data, std::size_t child, NodeSet parents);

}  // namespace bnmc

#endif  // BNMC_DATA_HPP
