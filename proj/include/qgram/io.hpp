#ifndef QGRAM_IO_HPP
#define QGRAM_IO_HPP

#include <array>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "qgram/derivation.hpp"
#include "qgram/rotation.hpp"
#include "qgram/rules.hpp"
#include "qgram/spin_graph.hpp"
#include "qgram/word.hpp"

namespace qgram {

/// All floating-point report output goes through this: 17 significant
/// digits, enough to round-trip a double exactly.
inline std::string fmt_g17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

/// FNV-1a, used to fingerprint configuration bytes in manifests.
inline std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

/// Comma-separated table with a header row. Cells are preformatted strings.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    void add_row(std::vector<std::string> row) {
        if (row.size() != header.size())
            throw std::invalid_argument("row width does not match the header");
        rows.push_back(std::move(row));
    }

    std::string to_string() const {
        std::ostringstream out;
        for (std::size_t i = 0; i < header.size(); ++i)
            out << (i ? "," : "") << header[i];
        out << "\n";
        for (const auto& row : rows) {
            for (std::size_t i = 0; i < row.size(); ++i)
                out << (i ? "," : "") << row[i];
            out << "\n";
        }
        return out.str();
    }

    void write(const std::string& path) const {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + path);
        out << to_string();
    }
};

namespace detail {

// Line-oriented tokenizer shared by the text formats: strips '#' comments,
// skips blank lines, splits on whitespace.
inline std::vector<std::vector<std::string>> tokenize_lines(std::istream& in) {
    std::vector<std::vector<std::string>> lines;
    std::string line;
    while (std::getline(in, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::vector<std::string> tokens;
        std::string tok;
        while (ls >> tok) tokens.push_back(tok);
        if (!tokens.empty()) lines.push_back(std::move(tokens));
    }
    return lines;
}

inline double parse_number(const std::string& tok, const char* what) {
    std::size_t used = 0;
    double v = 0;
    try {
        v = std::stod(tok, &used);
    } catch (const std::exception&) {
        throw std::runtime_error(std::string("expected a number for ") + what + ": " + tok);
    }
    if (used != tok.size())
        throw std::runtime_error(std::string("trailing junk in ") + what + ": " + tok);
    return v;
}

inline long parse_integer(const std::string& tok, const char* what) {
    std::size_t used = 0;
    long v = 0;
    try {
        v = std::stol(tok, &used);
    } catch (const std::exception&) {
        throw std::runtime_error(std::string("expected an integer for ") + what + ": " + tok);
    }
    if (used != tok.size())
        throw std::runtime_error(std::string("trailing junk in ") + what + ": " + tok);
    return v;
}

} // namespace detail

/**
 * Rule file: one "alphabet" line naming the symbols, then one line per rule,
 *   rule <lhs> <rhs> <re> <im>
 * with "ε" denoting the empty word. The loader reports whether the set is
 * Hermitian-closed alongside the parsed rules.
 */
struct RuleFile {
    RuleSet rules;
    bool hermitian_closed;
    std::string verdict;
};

inline RuleFile load_rules(std::istream& in) {
    auto lines = detail::tokenize_lines(in);
    std::vector<std::string> symbols;
    std::vector<SubstitutionRule> rules;
    bool saw_alphabet = false;
    for (const auto& tokens : lines) {
        if (tokens[0] == "alphabet") {
            if (saw_alphabet) throw std::runtime_error("duplicate alphabet line");
            symbols.assign(tokens.begin() + 1, tokens.end());
            saw_alphabet = true;
        } else if (tokens[0] == "rule") {
            if (!saw_alphabet) throw std::runtime_error("alphabet must precede rules");
            if (tokens.size() != 5)
                throw std::runtime_error("rule lines take: rule lhs rhs re im");
            Alphabet alphabet(symbols);
            SubstitutionRule r;
            r.lhs = alphabet.parse(tokens[1]);
            r.rhs = alphabet.parse(tokens[2]);
            r.amplitude = Complex{detail::parse_number(tokens[3], "rule amplitude"),
                                  detail::parse_number(tokens[4], "rule amplitude")};
            rules.push_back(std::move(r));
        } else {
            throw std::runtime_error("unknown directive in rule file: " + tokens[0]);
        }
    }
    if (!saw_alphabet) throw std::runtime_error("rule file is missing an alphabet line");
    RuleSet set(Alphabet(symbols), std::move(rules));
    const bool closed = set.is_hermitian_closed();
    std::string verdict = "hermitian-closed";
    if (!closed) {
        verdict = "not hermitian-closed: missing adjoints of rules";
        for (auto i : set.closure_defect()) verdict += " " + std::to_string(i);
    }
    return RuleFile{set, closed, verdict};
}

inline RuleFile load_rule_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open rule file " + path);
    return load_rules(in);
}

inline void write_rules(std::ostream& out, const RuleSet& set) {
    out << "alphabet";
    for (std::uint32_t s = 0; s < set.alphabet().size(); ++s)
        out << " " << set.alphabet().name(s);
    out << "\n";
    for (const auto& r : set.rules())
        out << "rule " << set.alphabet().format(r.lhs) << " " << set.alphabet().format(r.rhs)
            << " " << fmt_g17(r.amplitude.real()) << " " << fmt_g17(r.amplitude.imag())
            << "\n";
}

/**
 * Grammar file: the rule format plus per-symbol tags,
 *   terminals <names...> / variables <names...>
 * Every symbol must be tagged exactly once.
 */
inline DerivationGrammar load_grammar(std::istream& in) {
    auto lines = detail::tokenize_lines(in);
    std::vector<std::string> symbols, terminals, variables;
    std::vector<std::array<std::string, 4>> raw_rules;
    for (const auto& tokens : lines) {
        if (tokens[0] == "alphabet")
            symbols.assign(tokens.begin() + 1, tokens.end());
        else if (tokens[0] == "terminals")
            terminals.insert(terminals.end(), tokens.begin() + 1, tokens.end());
        else if (tokens[0] == "variables")
            variables.insert(variables.end(), tokens.begin() + 1, tokens.end());
        else if (tokens[0] == "rule") {
            if (tokens.size() != 5)
                throw std::runtime_error("rule lines take: rule lhs rhs re im");
            raw_rules.push_back({tokens[1], tokens[2], tokens[3], tokens[4]});
        } else
            throw std::runtime_error("unknown directive in grammar file: " + tokens[0]);
    }
    if (symbols.empty()) throw std::runtime_error("grammar file is missing an alphabet line");
    if (terminals.size() + variables.size() != symbols.size())
        throw std::runtime_error("every symbol needs exactly one terminal/variable tag");
    for (const auto& t : terminals)
        for (const auto& v : variables)
            if (t == v) throw std::runtime_error("symbol tagged both ways: " + t);
    Alphabet alphabet(symbols);
    std::vector<SubstitutionRule> rules;
    for (const auto& raw : raw_rules) {
        SubstitutionRule r;
        r.lhs = alphabet.parse(raw[0]);
        r.rhs = alphabet.parse(raw[1]);
        r.amplitude = Complex{detail::parse_number(raw[2], "rule amplitude"),
                              detail::parse_number(raw[3], "rule amplitude")};
        rules.push_back(std::move(r));
    }
    return DerivationGrammar(std::move(alphabet), variables, std::move(rules));
}

inline DerivationGrammar load_grammar_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open grammar file " + path);
    return load_grammar(in);
}

/**
 * Observable file: a site interval plus a dense complex matrix,
 *   interval <first> <last>
 *   dim <d>
 *   row <re> <im> ... (d rows of d (re,im) pairs)
 * Site indices may be negative (renormalization observables are centered).
 */
struct ObservableFile {
    long first;
    long last;
    Eigen::MatrixXcd mat;
};

inline ObservableFile load_observable(std::istream& in) {
    auto lines = detail::tokenize_lines(in);
    ObservableFile obs{0, 0, {}};
    bool saw_interval = false;
    long dim = 0;
    std::vector<std::vector<Complex>> rows;
    for (const auto& tokens : lines) {
        if (tokens[0] == "interval") {
            if (tokens.size() != 3) throw std::runtime_error("interval takes two sites");
            obs.first = detail::parse_integer(tokens[1], "interval");
            obs.last = detail::parse_integer(tokens[2], "interval");
            if (obs.first > obs.last) throw std::runtime_error("interval is reversed");
            saw_interval = true;
        } else if (tokens[0] == "dim") {
            dim = detail::parse_integer(tokens.at(1), "dim");
            if (dim <= 0) throw std::runtime_error("matrix dimension must be positive");
        } else if (tokens[0] == "row") {
            if (static_cast<long>(tokens.size()) != 1 + 2 * dim)
                throw std::runtime_error("row needs dim (re,im) pairs");
            std::vector<Complex> row;
            for (long k = 0; k < dim; ++k)
                row.emplace_back(detail::parse_number(tokens[1 + 2 * k], "matrix entry"),
                                 detail::parse_number(tokens[2 + 2 * k], "matrix entry"));
            rows.push_back(std::move(row));
        } else
            throw std::runtime_error("unknown directive in observable file: " + tokens[0]);
    }
    if (!saw_interval) throw std::runtime_error("observable file is missing an interval");
    if (static_cast<long>(rows.size()) != dim)
        throw std::runtime_error("observable matrix row count does not match dim");
    obs.mat.resize(dim, dim);
    for (long r = 0; r < dim; ++r)
        for (long c = 0; c < dim; ++c) obs.mat(r, c) = rows[r][c];
    return obs;
}

inline ObservableFile load_observable_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open observable file " + path);
    return load_observable(in);
}

/**
 * Spin graph file: labeled edge list,
 *   vertices <n>
 *   spins <s0> ... <s(n-1)>   (optional; all zero when absent)
 *   edge <u> <v>              (one line per edge copy)
 */
inline SpinGraph load_spin_graph(std::istream& in) {
    auto lines = detail::tokenize_lines(in);
    long n = -1;
    std::vector<std::uint32_t> spins;
    std::vector<SpinGraph::Edge> edges;
    for (const auto& tokens : lines) {
        if (tokens[0] == "vertices") {
            n = detail::parse_integer(tokens.at(1), "vertex count");
            if (n < 0) throw std::runtime_error("vertex count must be nonnegative");
            spins.assign(static_cast<std::size_t>(n), 0);
        } else if (tokens[0] == "spins") {
            if (n < 0) throw std::runtime_error("vertices must precede spins");
            if (static_cast<long>(tokens.size()) != n + 1)
                throw std::runtime_error("spins line needs one label per vertex");
            for (long v = 0; v < n; ++v)
                spins[static_cast<std::size_t>(v)] = static_cast<std::uint32_t>(
                    detail::parse_integer(tokens[static_cast<std::size_t>(v) + 1], "spin"));
        } else if (tokens[0] == "edge") {
            if (n < 0) throw std::runtime_error("vertices must precede edges");
            if (tokens.size() != 3) throw std::runtime_error("edge takes two endpoints");
            edges.emplace_back(
                static_cast<std::uint32_t>(detail::parse_integer(tokens[1], "edge endpoint")),
                static_cast<std::uint32_t>(detail::parse_integer(tokens[2], "edge endpoint")));
        } else
            throw std::runtime_error("unknown directive in graph file: " + tokens[0]);
    }
    if (n < 0) throw std::runtime_error("graph file is missing a vertices line");
    return SpinGraph(std::move(spins), std::move(edges));
}

inline void write_spin_graph(std::ostream& out, const SpinGraph& g) {
    out << "vertices " << g.n_vertices() << "\n";
    out << "spins";
    for (std::uint32_t v = 0; v < g.n_vertices(); ++v) out << " " << g.spin(v);
    out << "\n";
    for (const auto& e : g.edges()) out << "edge " << e.first << " " << e.second << "\n";
}

/**
 * Rotation graph file: the two permutations as line-lists,
 *   P <p(0)> <p(1)> ...
 *   I <i(0)> <i(1)> ...
 */
inline RotationGraph load_rotation_graph(std::istream& in) {
    auto lines = detail::tokenize_lines(in);
    std::vector<std::uint32_t> p, i;
    for (const auto& tokens : lines) {
        std::vector<std::uint32_t>* target = nullptr;
        if (tokens[0] == "P")
            target = &p;
        else if (tokens[0] == "I")
            target = &i;
        else
            throw std::runtime_error("unknown directive in rotation file: " + tokens[0]);
        if (!target->empty()) throw std::runtime_error("duplicate " + tokens[0] + " line");
        for (std::size_t k = 1; k < tokens.size(); ++k)
            target->push_back(
                static_cast<std::uint32_t>(detail::parse_integer(tokens[k], "permutation")));
    }
    return RotationGraph(std::move(p), std::move(i));
}

inline void write_rotation_graph(std::ostream& out, const RotationGraph& g) {
    out << "P";
    for (std::uint32_t x = 0; x < g.n_ends(); ++x) out << " " << g.p(x);
    out << "\nI";
    for (std::uint32_t x = 0; x < g.n_ends(); ++x) out << " " << g.i(x);
    out << "\n";
}

/**
 * Flat sectioned key/value configuration:
 *   [section]
 *   key = value
 * '#' and ';' start comments. Strict: malformed lines and duplicate keys
 * are errors, and consumers reject keys they do not understand.
 */
class ConfigFile {
public:
    static ConfigFile parse(const std::string& text) {
        ConfigFile cfg;
        cfg.raw_ = text;
        std::istringstream in(text);
        std::string line, section;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            auto cut = line.find_first_of("#;");
            if (cut != std::string::npos) line.erase(cut);
            auto trim = [](std::string s) {
                auto b = s.find_first_not_of(" \t\r");
                auto e = s.find_last_not_of(" \t\r");
                return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
            };
            line = trim(line);
            if (line.empty()) continue;
            if (line.front() == '[') {
                if (line.back() != ']')
                    throw std::runtime_error("config line " + std::to_string(lineno) +
                                             ": unterminated section header");
                section = trim(line.substr(1, line.size() - 2));
                if (section.empty())
                    throw std::runtime_error("config line " + std::to_string(lineno) +
                                             ": empty section name");
                cfg.sections_[section];
                continue;
            }
            auto eq = line.find('=');
            if (eq == std::string::npos)
                throw std::runtime_error("config line " + std::to_string(lineno) +
                                         ": expected key = value");
            std::string key = trim(line.substr(0, eq));
            std::string value = trim(line.substr(eq + 1));
            if (key.empty())
                throw std::runtime_error("config line " + std::to_string(lineno) +
                                         ": empty key");
            if (!cfg.sections_[section].emplace(key, value).second)
                throw std::runtime_error("config line " + std::to_string(lineno) +
                                         ": duplicate key " + key);
        }
        return cfg;
    }

    static ConfigFile load(const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw std::runtime_error("cannot open config " + path);
        std::ostringstream buf;
        buf << in.rdbuf();
        return parse(buf.str());
    }

    const std::string& raw_text() const { return raw_; }
    std::uint64_t hash() const { return fnv1a64(raw_); }

    bool has(const std::string& section, const std::string& key) const {
        auto s = sections_.find(section);
        return s != sections_.end() && s->second.count(key) > 0;
    }

    const std::string& get(const std::string& section, const std::string& key) const {
        auto s = sections_.find(section);
        if (s == sections_.end())
            throw std::runtime_error("config is missing section [" + section + "]");
        auto k = s->second.find(key);
        if (k == s->second.end())
            throw std::runtime_error("config is missing key " + key + " in [" + section + "]");
        return k->second;
    }

    std::string get_or(const std::string& section, const std::string& key,
                       const std::string& fallback) const {
        return has(section, key) ? get(section, key) : fallback;
    }

    double get_number(const std::string& section, const std::string& key) const {
        return detail::parse_number(get(section, key), key.c_str());
    }

    double get_number_or(const std::string& section, const std::string& key,
                         double fallback) const {
        return has(section, key) ? get_number(section, key) : fallback;
    }

    long get_integer(const std::string& section, const std::string& key) const {
        return detail::parse_integer(get(section, key), key.c_str());
    }

    long get_integer_or(const std::string& section, const std::string& key,
                        long fallback) const {
        return has(section, key) ? get_integer(section, key) : fallback;
    }

    // Space-separated number list, for grids.
    std::vector<double> get_grid(const std::string& section, const std::string& key) const {
        std::istringstream in(get(section, key));
        std::vector<double> out;
        std::string tok;
        while (in >> tok) out.push_back(detail::parse_number(tok, key.c_str()));
        if (out.empty())
            throw std::runtime_error("grid " + key + " in [" + section + "] is empty");
        return out;
    }

    const std::map<std::string, std::map<std::string, std::string>>& sections() const {
        return sections_;
    }

private:
    std::string raw_;
    std::map<std::string, std::map<std::string, std::string>> sections_;
};

} // namespace qgram

#endif
