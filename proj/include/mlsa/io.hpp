#pragma once

#include "mlsa/problem.hpp"
#include "mlsa/td.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace mlsa {

/// Chain file: `# key=value` headers (n, optional label) followed by n rows
/// of whitespace-separated probabilities.
FiniteChain read_chain(std::istream& in);
void write_chain(std::ostream& out, const FiniteChain& chain);

/// Problem file sections: [meta] (n, d, label), [P], [A:x] and [b:x] for
/// x = 0..n-1. Numbers are written with 17 significant digits.
std::pair<FiniteChain, LsaProblem> read_problem(std::istream& in, bool normalize = false);
void write_problem(std::ostream& out, const FiniteChain& chain, const LsaProblem& problem);

/// MRP file sections: [meta] (n, gamma, label), [P], [r], optional [phi].
struct MrpFile {
    Mrp mrp;
    std::optional<FeatureMap> features;
};
MrpFile read_mrp(std::istream& in);
void write_mrp(std::ostream& out, const Mrp& mrp, const std::optional<FeatureMap>& features = {});

/// Opens `path` and dispatches to the reader; ParseError on failure.
FiniteChain load_chain(const std::string& path);
std::pair<FiniteChain, LsaProblem> load_problem(const std::string& path, bool normalize = false);
MrpFile load_mrp(const std::string& path);

/// `%.17g` rendering; round-trips through strtod.
std::string format_double(double v);

/// Comment lines (without the leading "# "), a header row and numeric rows.
struct CsvTable {
    std::vector<std::string> comments;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    std::size_t column(const std::string& name) const;  // throws InvalidParameter
    std::vector<double> values(const std::string& name) const;
};

void write_csv(std::ostream& out, const CsvTable& table);
CsvTable read_csv(std::istream& in);
void save_csv(const std::string& path, const CsvTable& table);
CsvTable load_csv(const std::string& path);

}  // namespace mlsa
