#include "mlsa/io.hpp"

#include "mlsa/error.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

namespace mlsa {

namespace {

struct Line {
    std::size_t number;
    std::string text;
};

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<Line> read_lines(std::istream& in) {
    std::vector<Line> out;
    std::string text;
    std::size_t n = 0;
    while (std::getline(in, text)) out.push_back({++n, text});
    return out;
}

// Whitespace-separated doubles of one line, with column tracking.
std::vector<double> parse_numbers(const Line& line) {
    std::vector<double> out;
    const char* s = line.text.c_str();
    const char* p = s;
    while (*p) {
        while (*p == ' ' || *p == '\t' || *p == '\r' || *p == ',') ++p;
        if (!*p) break;
        char* end = nullptr;
        errno = 0;
        const double v = std::strtod(p, &end);
        if (end == p || errno == ERANGE || !std::isfinite(v)) {
            throw ParseError(line.number, static_cast<std::size_t>(p - s) + 1, "expected a finite number");
        }
        if (*end && *end != ' ' && *end != '\t' && *end != '\r' && *end != ',') {
            throw ParseError(line.number, static_cast<std::size_t>(end - s) + 1,
                             "unexpected character after number");
        }
        out.push_back(v);
        p = end;
    }
    return out;
}

std::pair<std::string, std::string> parse_key_value(const Line& line, const std::string& body) {
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
        throw ParseError(line.number, 1, "expected key=value");
    }
    return {trim(body.substr(0, eq)), trim(body.substr(eq + 1))};
}

std::size_t parse_count(const Line& line, const std::string& value, const char* key) {
    char* end = nullptr;
    const long long v = std::strtoll(value.c_str(), &end, 10);
    if (value.empty() || *end || v <= 0) {
        throw ParseError(line.number, 1, std::string(key) + " must be a positive integer");
    }
    return static_cast<std::size_t>(v);
}

Matrix read_matrix(const std::vector<Line>& lines, std::size_t rows, std::size_t cols,
                   const Line& where) {
    if (lines.size() != rows) {
        throw ParseError(lines.empty() ? where.number : lines.back().number, 1,
                         "expected " + std::to_string(rows) + " rows, found " +
                             std::to_string(lines.size()));
    }
    Matrix M(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::size_t i = 0; i < rows; ++i) {
        const auto v = parse_numbers(lines[i]);
        if (v.size() != cols) {
            throw ParseError(lines[i].number, 1,
                             "expected " + std::to_string(cols) + " values, found " +
                                 std::to_string(v.size()));
        }
        for (std::size_t j = 0; j < cols; ++j) {
            M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v[j];
        }
    }
    return M;
}

Vector read_vector(const std::vector<Line>& lines, std::size_t size, const Line& where) {
    std::vector<double> all;
    for (const auto& l : lines) {
        const auto v = parse_numbers(l);
        all.insert(all.end(), v.begin(), v.end());
    }
    if (all.size() != size) {
        throw ParseError(lines.empty() ? where.number : lines.back().number, 1,
                         "expected " + std::to_string(size) + " values, found " +
                             std::to_string(all.size()));
    }
    return Eigen::Map<const Vector>(all.data(), static_cast<Eigen::Index>(size));
}

// Sectioned file: "[name]" headers, '#' comments, blank lines ignored.
struct Sections {
    std::map<std::string, std::vector<Line>> body;
    std::map<std::string, Line> header;
};

Sections split_sections(const std::vector<Line>& lines) {
    Sections s;
    std::string current;
    for (const auto& l : lines) {
        const std::string t = trim(l.text);
        if (t.empty() || t[0] == '#') continue;
        if (t.front() == '[') {
            if (t.back() != ']') throw ParseError(l.number, t.size(), "unterminated section header");
            current = t.substr(1, t.size() - 2);
            if (s.header.count(current)) throw ParseError(l.number, 1, "duplicate section [" + current + "]");
            s.header.emplace(current, l);
            s.body[current];
            continue;
        }
        if (current.empty()) throw ParseError(l.number, 1, "content before the first section");
        s.body[current].push_back({l.number, t});
    }
    return s;
}

std::map<std::string, std::string> meta_of(const Sections& s, const Line& fallback) {
    auto it = s.body.find("meta");
    if (it == s.body.end()) throw ParseError(fallback.number, 1, "missing [meta] section");
    std::map<std::string, std::string> out;
    for (const auto& l : it->second) out.insert(parse_key_value(l, l.text));
    return out;
}

const std::vector<Line>& section(const Sections& s, const std::string& name, const Line& fallback) {
    auto it = s.body.find(name);
    if (it == s.body.end()) throw ParseError(fallback.number, 1, "missing [" + name + "] section");
    return it->second;
}

const Line& header_or(const Sections& s, const std::string& name, const Line& fallback) {
    auto it = s.header.find(name);
    return it == s.header.end() ? fallback : it->second;
}

void write_rows(std::ostream& out, const Matrix& M) {
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
        for (Eigen::Index j = 0; j < M.cols(); ++j) {
            out << (j ? " " : "") << format_double(M(i, j));
        }
        out << '\n';
    }
}

FiniteChain chain_from(const Matrix& P, const std::string& label, const Line& where) {
    try {
        return FiniteChain::from_kernel(P, label);
    } catch (const Error& e) {
        if (e.code() == ErrorCode::InvalidParameter) throw ParseError(where.number, 1, e.what());
        throw;
    }
}

template <class F>
auto with_file(const std::string& path, F&& f) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::ParseError, "cannot open " + path);
    return f(in);
}

}  // namespace

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

FiniteChain read_chain(std::istream& in) {
    const auto lines = read_lines(in);
    std::size_t n = 0;
    std::string label;
    Line n_line{0, ""};
    std::vector<Line> rows;
    for (const auto& l : lines) {
        const std::string t = trim(l.text);
        if (t.empty()) continue;
        if (t[0] == '#') {
            const std::string body = trim(t.substr(1));
            if (body.find('=') == std::string::npos) continue;
            const auto [k, v] = parse_key_value(l, body);
            if (k == "n") {
                n = parse_count(l, v, "n");
                n_line = l;
            } else if (k == "label") {
                label = v;
            }
            continue;
        }
        rows.push_back({l.number, t});
    }
    if (n == 0) throw ParseError(lines.empty() ? 1 : lines.front().number, 1, "missing '# n=' header");
    const Matrix P = read_matrix(rows, n, n, n_line);
    return chain_from(P, label, n_line);
}

void write_chain(std::ostream& out, const FiniteChain& chain) {
    out << "# n=" << chain.size() << '\n';
    if (!chain.label().empty()) out << "# label=" << chain.label() << '\n';
    write_rows(out, chain.kernel());
}

std::pair<FiniteChain, LsaProblem> read_problem(std::istream& in, bool normalize) {
    const auto lines = read_lines(in);
    const Line first = lines.empty() ? Line{1, ""} : lines.front();
    const Sections s = split_sections(lines);
    const auto meta = meta_of(s, first);
    const Line& meta_line = header_or(s, "meta", first);
    auto need = [&](const char* key) {
        auto it = meta.find(key);
        if (it == meta.end()) throw ParseError(meta_line.number, 1, std::string("missing ") + key + "= in [meta]");
        return parse_count(meta_line, it->second, key);
    };
    const std::size_t n = need("n");
    const std::size_t d = need("d");
    const std::string label = meta.count("label") ? meta.at("label") : std::string{};
    const Line& p_line = header_or(s, "P", first);
    FiniteChain chain = chain_from(read_matrix(section(s, "P", first), n, n, p_line), label, p_line);
    std::vector<Matrix> A;
    std::vector<Vector> b;
    for (std::size_t x = 0; x < n; ++x) {
        const std::string a_name = "A:" + std::to_string(x), b_name = "b:" + std::to_string(x);
        A.push_back(read_matrix(section(s, a_name, first), d, d, header_or(s, a_name, first)));
        b.push_back(read_vector(section(s, b_name, first), d, header_or(s, b_name, first)));
    }
    for (const auto& [name, hdr] : s.header) {
        if (name == "meta" || name == "P") continue;
        const bool ok = (name.rfind("A:", 0) == 0 || name.rfind("b:", 0) == 0);
        if (!ok) throw ParseError(hdr.number, 1, "unknown section [" + name + "]");
    }
    LsaProblem problem = build_problem(chain, std::move(A), std::move(b), normalize, label);
    return {std::move(chain), std::move(problem)};
}

void write_problem(std::ostream& out, const FiniteChain& chain, const LsaProblem& problem) {
    out << "[meta]\nn=" << problem.n << "\nd=" << problem.d << '\n';
    if (!problem.label.empty()) out << "label=" << problem.label << '\n';
    out << "\n[P]\n";
    write_rows(out, chain.kernel());
    for (std::size_t x = 0; x < problem.n; ++x) {
        out << "\n[A:" << x << "]\n";
        write_rows(out, problem.A[x]);
        out << "\n[b:" << x << "]\n";
        write_rows(out, problem.b[x].transpose());
    }
}

MrpFile read_mrp(std::istream& in) {
    const auto lines = read_lines(in);
    const Line first = lines.empty() ? Line{1, ""} : lines.front();
    const Sections s = split_sections(lines);
    const auto meta = meta_of(s, first);
    const Line& meta_line = header_or(s, "meta", first);
    if (!meta.count("n")) throw ParseError(meta_line.number, 1, "missing n= in [meta]");
    if (!meta.count("gamma")) throw ParseError(meta_line.number, 1, "missing gamma= in [meta]");
    MrpFile f;
    f.mrp.nS = parse_count(meta_line, meta.at("n"), "n");
    char* end = nullptr;
    const std::string& g = meta.at("gamma");
    f.mrp.gamma = std::strtod(g.c_str(), &end);
    if (g.empty() || *end || !(f.mrp.gamma >= 0.0 && f.mrp.gamma < 1.0)) {
        throw ParseError(meta_line.number, 1, "gamma must be a number in [0,1)");
    }
    f.mrp.label = meta.count("label") ? meta.at("label") : std::string{};
    const std::size_t n = f.mrp.nS;
    f.mrp.PS = read_matrix(section(s, "P", first), n, n, header_or(s, "P", first));
    chain_from(f.mrp.PS, f.mrp.label, header_or(s, "P", first));
    f.mrp.r = read_vector(section(s, "r", first), n, header_or(s, "r", first));
    if (s.body.count("phi")) {
        const auto& rows = s.body.at("phi");
        if (rows.empty()) throw ParseError(s.header.at("phi").number, 1, "empty [phi] section");
        const std::size_t cols = parse_numbers(rows.front()).size();
        f.features = FeatureMap{read_matrix(rows, n, cols, s.header.at("phi"))};
    }
    return f;
}

void write_mrp(std::ostream& out, const Mrp& mrp, const std::optional<FeatureMap>& features) {
    out << "[meta]\nn=" << mrp.nS << "\ngamma=" << format_double(mrp.gamma) << '\n';
    if (!mrp.label.empty()) out << "label=" << mrp.label << '\n';
    out << "\n[P]\n";
    write_rows(out, mrp.PS);
    out << "\n[r]\n";
    write_rows(out, mrp.r.transpose());
    if (features) {
        out << "\n[phi]\n";
        write_rows(out, features->Phi);
    }
}

FiniteChain load_chain(const std::string& path) {
    return with_file(path, [](std::istream& in) { return read_chain(in); });
}

std::pair<FiniteChain, LsaProblem> load_problem(const std::string& path, bool normalize) {
    return with_file(path, [&](std::istream& in) { return read_problem(in, normalize); });
}

MrpFile load_mrp(const std::string& path) {
    return with_file(path, [](std::istream& in) { return read_mrp(in); });
}

std::size_t CsvTable::column(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i) {
        if (columns[i] == name) return i;
    }
    throw Error(ErrorCode::InvalidParameter, "no column named " + name);
}

std::vector<double> CsvTable::values(const std::string& name) const {
    const std::size_t c = column(name);
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(r.at(c));
    return out;
}

void write_csv(std::ostream& out, const CsvTable& table) {
    for (const auto& c : table.comments) out << "# " << c << '\n';
    for (std::size_t i = 0; i < table.columns.size(); ++i) out << (i ? "," : "") << table.columns[i];
    out << '\n';
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_double(row[i]);
        out << '\n';
    }
}

CsvTable read_csv(std::istream& in) {
    CsvTable t;
    bool have_header = false;
    for (const auto& l : read_lines(in)) {
        if (l.text.empty()) continue;
        if (l.text.rfind("# ", 0) == 0) {
            t.comments.push_back(l.text.substr(2));
            continue;
        }
        if (l.text[0] == '#') {
            t.comments.push_back(l.text.substr(1));
            continue;
        }
        if (!have_header) {
            std::stringstream ss(l.text);
            std::string col;
            while (std::getline(ss, col, ',')) t.columns.push_back(trim(col));
            have_header = true;
            continue;
        }
        std::vector<double> row;
        std::stringstream ss(l.text);
        std::string cell;
        std::size_t column = 1;
        while (std::getline(ss, cell, ',')) {
            const std::string c = trim(cell);
            char* end = nullptr;
            const double v = std::strtod(c.c_str(), &end);
            if (c.empty() || *end) throw ParseError(l.number, column, "bad CSV cell '" + c + "'");
            row.push_back(v);
            column += cell.size() + 1;
        }
        if (row.size() != t.columns.size()) {
            throw ParseError(l.number, 1, "row width differs from header");
        }
        t.rows.push_back(std::move(row));
    }
    return t;
}

void save_csv(const std::string& path, const CsvTable& table) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::InvalidParameter, "cannot write " + path);
    write_csv(out, table);
}

CsvTable load_csv(const std::string& path) {
    return with_file(path, [](std::istream& in) { return read_csv(in); });
}

}  // namespace mlsa
