#pragma once

// CPLEX LP text format (writer and a reader for the same dialect) and the
// "name value" solution file used to bring back external solver results.

#include <cctype>
#include <cmath>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "snnsafe/io.hpp"
#include "snnsafe/milp/model.hpp"

namespace snnsafe::milp {

namespace detail {

inline std::string lp_number(double v)
{
    if (v == kInf)
        return "+inf";
    if (v == -kInf)
        return "-inf";
    return io::format_double(v);
}

inline void write_expression(std::ostringstream& os, const MilpModel& model, const std::vector<Term>& terms)
{
    std::size_t on_line = 0;
    bool first = true;
    for (const auto& t : terms) {
        if (on_line == 8) {
            os << "\n   ";
            on_line = 0;
        }
        const double c = t.coef;
        if (first)
            os << (c < 0 ? "- " : "");
        else
            os << (c < 0 ? " - " : " + ");
        os << lp_number(std::abs(c)) << ' ' << model.variable(t.var).name;
        first = false;
        ++on_line;
    }
}

} // namespace detail

inline std::string write_lp(const MilpModel& model)
{
    std::ostringstream os;
    os << "\\ " << model.variable_count() << " variables, " << model.constraint_count()
       << " constraints\n";
    const auto& obj = model.objective();
    os << ((obj && obj->sense == Sense::Maximize) ? "Maximize\n" : "Minimize\n");
    // every variable appears in the objective, zero or not, so that a reader
    // declares them in model order
    os << " obj:";
    std::vector<double> coef(model.variable_count(), 0.0);
    if (obj)
        for (const auto& t : obj->terms)
            coef[t.var.index] += t.coef;
    std::vector<Term> obj_terms;
    for (std::size_t j = 0; j < coef.size(); ++j)
        obj_terms.push_back({VarId{j}, coef[j]});
    if (!obj_terms.empty()) {
        os << ' ';
        detail::write_expression(os, model, obj_terms);
    }
    os << "\nSubject To\n";
    for (const auto& c : model.constraints()) {
        os << ' ' << c.name << ": ";
        detail::write_expression(os, model, c.terms);
        os << ' ' << to_string(c.relation) << ' ' << detail::lp_number(c.rhs) << '\n';
    }
    os << "Bounds\n";
    for (const auto& v : model.variables()) {
        if (v.kind == VarKind::Binary)
            continue;
        if (v.lower == -kInf && v.upper == kInf)
            os << ' ' << v.name << " free\n";
        else if (v.lower == v.upper)
            os << ' ' << v.name << " = " << detail::lp_number(v.lower) << '\n';
        else
            os << ' ' << detail::lp_number(v.lower) << " <= " << v.name << " <= "
               << detail::lp_number(v.upper) << '\n';
    }
    bool header = false;
    for (const auto& v : model.variables())
        if (v.kind == VarKind::Integer) {
            if (!header)
                os << "Generals\n";
            header = true;
            os << ' ' << v.name << '\n';
        }
    header = false;
    for (const auto& v : model.variables())
        if (v.kind == VarKind::Binary) {
            if (!header)
                os << "Binaries\n";
            header = true;
            os << ' ' << v.name << '\n';
        }
    os << "End\n";
    return os.str();
}

inline void export_lp(const MilpModel& model, const std::string& path)
{
    io::write_file(path, write_lp(model));
}

namespace detail {

enum class TokKind { Name, Number, Op, Colon };

struct Token {
    TokKind kind;
    std::string text;
    double number = 0.0;
};

inline bool name_char(char c)
{
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '[' || c == ']' ||
           c == '{' || c == '}' || c == '(' || c == ')' || c == '!' || c == '#' || c == '$' || c == '%' ||
           c == '&' || c == '@' || c == '~' || c == '|' || c == '\'' || c == '?' || c == ';' || c == '"' ||
           c == '/' || c == ',' || c == '`';
}

inline std::string lower(std::string s)
{
    for (char& c : s)
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

inline std::vector<Token> tokenize(const std::string& text)
{
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < text.size()) {
        const char c = text[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        if (c == ':') {
            out.push_back({TokKind::Colon, ":"});
            ++i;
            continue;
        }
        if (c == '<' || c == '>' || c == '=') {
            std::string op(1, c);
            if (i + 1 < text.size() && (text[i + 1] == '=' || text[i + 1] == '<' || text[i + 1] == '>'))
                op += text[++i];
            ++i;
            if (op == "<" || op == "=<")
                op = "<=";
            if (op == ">" || op == "=>")
                op = ">=";
            if (op != "<=" && op != ">=" && op != "=")
                throw ParseError("bad relational operator '" + op + "'");
            out.push_back({TokKind::Op, op});
            continue;
        }
        if (c == '+' || c == '-') {
            out.push_back({TokKind::Op, std::string(1, c)});
            ++i;
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            std::size_t j = i;
            while (j < text.size() && (std::isdigit(static_cast<unsigned char>(text[j])) || text[j] == '.'))
                ++j;
            if (j < text.size() && (text[j] == 'e' || text[j] == 'E')) {
                std::size_t k = j + 1;
                if (k < text.size() && (text[k] == '+' || text[k] == '-'))
                    ++k;
                if (k < text.size() && std::isdigit(static_cast<unsigned char>(text[k]))) {
                    while (k < text.size() && std::isdigit(static_cast<unsigned char>(text[k])))
                        ++k;
                    j = k;
                }
            }
            Token t{TokKind::Number, text.substr(i, j - i)};
            t.number = io::parse_double(t.text);
            out.push_back(std::move(t));
            i = j;
            continue;
        }
        if (name_char(c)) {
            std::size_t j = i;
            while (j < text.size() && name_char(text[j]))
                ++j;
            std::string name = text.substr(i, j - i);
            const auto l = lower(name);
            if (l == "inf" || l == "infinity") {
                Token t{TokKind::Number, name};
                t.number = kInf;
                out.push_back(std::move(t));
            } else {
                out.push_back({TokKind::Name, std::move(name)});
            }
            i = j;
            continue;
        }
        throw ParseError(std::string("unexpected character '") + c + "' in LP file");
    }
    return out;
}

class LpReader {
public:
    MilpModel read(const std::string& text)
    {
        split_sections(text);
        if (!objective_text_.empty() || has_objective_) {
            auto toks = tokenize(objective_text_);
            std::size_t p = 0;
            skip_label(toks, p);
            auto terms = parse_terms(toks, p, nullptr);
            if (p != toks.size())
                throw ParseError("trailing tokens in objective");
            objective_ = std::move(terms);
        }
        parse_constraints(tokenize(constraints_text_));
        for (const auto& line : bound_lines_)
            parse_bound(tokenize(line));
        for (const auto& n : general_names_)
            var(n).kind = VarKind::Integer;
        for (const auto& n : binary_names_) {
            auto& v = var(n);
            v.kind = VarKind::Binary;
            v.lower = std::max(v.lower, 0.0);
            v.upper = std::min(v.upper, 1.0);
        }
        return build();
    }

private:
    struct PendingVar {
        std::string name;
        VarKind kind = VarKind::Continuous;
        double lower = 0.0;
        double upper = kInf;
    };
    struct PendingCons {
        std::string name;
        std::vector<std::pair<std::string, double>> terms;
        Relation rel;
        double rhs;
    };
    enum class Section { None, Objective, Constraints, Bounds, Generals, Binaries, End };

    static std::optional<Section> keyword(const std::string& line, std::string& rest, Sense& sense)
    {
        const auto l = lower(line);
        const auto starts = [&](const std::string& kw) {
            if (l.rfind(kw, 0) != 0)
                return false;
            if (l.size() > kw.size() && !std::isspace(static_cast<unsigned char>(l[kw.size()])))
                return false;
            rest = line.substr(kw.size());
            return true;
        };
        for (const char* kw : {"minimize", "minimise", "minimum", "min"})
            if (starts(kw)) {
                sense = Sense::Minimize;
                return Section::Objective;
            }
        for (const char* kw : {"maximize", "maximise", "maximum", "max"})
            if (starts(kw)) {
                sense = Sense::Maximize;
                return Section::Objective;
            }
        for (const char* kw : {"subject to", "such that", "s.t.", "st"})
            if (starts(kw))
                return Section::Constraints;
        for (const char* kw : {"bounds", "bound"})
            if (starts(kw))
                return Section::Bounds;
        for (const char* kw : {"generals", "general", "gen", "integers"})
            if (starts(kw))
                return Section::Generals;
        for (const char* kw : {"binaries", "binary", "bin"})
            if (starts(kw))
                return Section::Binaries;
        if (starts("end"))
            return Section::End;
        return std::nullopt;
    }

    void split_sections(const std::string& text)
    {
        std::istringstream in(text);
        std::string line;
        Section sec = Section::None;
        while (std::getline(in, line)) {
            if (auto pos = line.find('\\'); pos != std::string::npos)
                line.erase(pos);
            auto b = line.find_first_not_of(" \t\r");
            if (b == std::string::npos)
                continue;
            line = line.substr(b);
            while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t'))
                line.pop_back();
            std::string rest;
            if (auto kw = keyword(line, rest, sense_)) {
                sec = *kw;
                if (sec == Section::Objective)
                    has_objective_ = true;
                if (sec == Section::End)
                    break;
                line = rest;
                if (line.find_first_not_of(" \t") == std::string::npos)
                    continue;
            }
            switch (sec) {
            case Section::None: throw ParseError("content before the objective section: '" + line + "'");
            case Section::Objective: objective_text_ += line + "\n"; break;
            case Section::Constraints: constraints_text_ += line + "\n"; break;
            case Section::Bounds: bound_lines_.push_back(line); break;
            case Section::Generals:
            case Section::Binaries: {
                std::istringstream names(line);
                std::string n;
                while (names >> n)
                    (sec == Section::Generals ? general_names_ : binary_names_).push_back(n);
                break;
            }
            case Section::End: break;
            }
        }
    }

    PendingVar& var(const std::string& name)
    {
        auto it = index_.find(name);
        if (it != index_.end())
            return vars_[it->second];
        index_.emplace(name, vars_.size());
        vars_.push_back({name});
        return vars_.back();
    }

    static void skip_label(const std::vector<Token>& toks, std::size_t& p)
    {
        if (p + 1 < toks.size() && toks[p].kind == TokKind::Name && toks[p + 1].kind == TokKind::Colon)
            p += 2;
    }

    /// Parses "[+|-] [coef] name ..." up to a relational operator or the end.
    std::vector<std::pair<std::string, double>> parse_terms(const std::vector<Token>& toks, std::size_t& p,
                                                            double* constant)
    {
        std::vector<std::pair<std::string, double>> terms;
        while (p < toks.size()) {
            const auto& t = toks[p];
            if (t.kind == TokKind::Op && (t.text == "<=" || t.text == ">=" || t.text == "="))
                break;
            if (t.kind == TokKind::Colon)
                throw ParseError("unexpected ':'");
            double sign = 1.0;
            while (p < toks.size() && toks[p].kind == TokKind::Op && (toks[p].text == "+" || toks[p].text == "-")) {
                if (toks[p].text == "-")
                    sign = -sign;
                ++p;
            }
            double coef = 1.0;
            bool have_coef = false;
            if (p < toks.size() && toks[p].kind == TokKind::Number) {
                coef = toks[p].number;
                have_coef = true;
                ++p;
            }
            if (p < toks.size() && toks[p].kind == TokKind::Name) {
                // A label for the next constraint ends this expression.
                if (p + 1 < toks.size() && toks[p + 1].kind == TokKind::Colon)
                    throw ParseError("constraint '" + toks[p].text + "' has no relation");
                var(toks[p].text);
                terms.emplace_back(toks[p].text, sign * coef);
                ++p;
            } else if (have_coef) {
                if (!constant)
                    throw ParseError("constant term not allowed here");
                *constant += sign * coef;
            } else {
                throw ParseError("malformed linear expression");
            }
        }
        return terms;
    }

    void parse_constraints(const std::vector<Token>& toks)
    {
        std::size_t p = 0;
        while (p < toks.size()) {
            std::string name;
            if (p + 1 < toks.size() && toks[p].kind == TokKind::Name && toks[p + 1].kind == TokKind::Colon) {
                name = toks[p].text;
                p += 2;
            }
            double constant = 0.0;
            auto terms = parse_terms(toks, p, &constant);
            if (p >= toks.size() || toks[p].kind != TokKind::Op)
                throw ParseError("constraint '" + name + "' lacks a relation");
            const auto& op = toks[p++].text;
            const Relation rel = op == "<=" ? Relation::LessEqual : op == ">=" ? Relation::GreaterEqual : Relation::Equal;
            double sign = 1.0;
            while (p < toks.size() && toks[p].kind == TokKind::Op && (toks[p].text == "+" || toks[p].text == "-")) {
                if (toks[p].text == "-")
                    sign = -sign;
                ++p;
            }
            if (p >= toks.size() || toks[p].kind != TokKind::Number)
                throw ParseError("constraint '" + name + "' lacks a numeric right-hand side");
            const double rhs = sign * toks[p++].number - constant;
            cons_.push_back({name, std::move(terms), rel, rhs});
        }
    }

    static double signed_number(const std::vector<Token>& toks, std::size_t& p)
    {
        double sign = 1.0;
        while (p < toks.size() && toks[p].kind == TokKind::Op && (toks[p].text == "+" || toks[p].text == "-")) {
            if (toks[p].text == "-")
                sign = -sign;
            ++p;
        }
        if (p >= toks.size() || toks[p].kind != TokKind::Number)
            throw ParseError("expected a number in bounds");
        return sign * toks[p++].number;
    }

    static bool is_number_start(const std::vector<Token>& toks, std::size_t p)
    {
        while (p < toks.size() && toks[p].kind == TokKind::Op && (toks[p].text == "+" || toks[p].text == "-"))
            ++p;
        return p < toks.size() && toks[p].kind == TokKind::Number;
    }

    static void apply(PendingVar& v, const std::string& op, double value, bool var_on_left)
    {
        if (op == "=") {
            v.lower = v.upper = value;
            return;
        }
        const bool upper = (op == "<=") == var_on_left;
        if (upper)
            v.upper = value;
        else
            v.lower = value;
    }

    void parse_bound(const std::vector<Token>& toks)
    {
        std::size_t p = 0;
        if (toks.size() == 2 && toks[0].kind == TokKind::Name && toks[1].kind == TokKind::Name &&
            lower(toks[1].text) == "free") {
            auto& v = var(toks[0].text);
            v.lower = -kInf;
            v.upper = kInf;
            return;
        }
        if (is_number_start(toks, p)) {
            const double lo = signed_number(toks, p);
            if (p + 1 >= toks.size() || toks[p].kind != TokKind::Op || toks[p + 1].kind != TokKind::Name)
                throw ParseError("malformed bound");
            const std::string op = toks[p].text;
            auto& v = var(toks[p + 1].text);
            p += 2;
            apply(v, op, lo, false);
            if (p < toks.size()) {
                if (toks[p].kind != TokKind::Op)
                    throw ParseError("malformed bound");
                const std::string op2 = toks[p++].text;
                apply(v, op2, signed_number(toks, p), true);
            }
        } else {
            if (toks.size() < 3 || toks[0].kind != TokKind::Name || toks[1].kind != TokKind::Op)
                throw ParseError("malformed bound");
            auto& v = var(toks[0].text);
            p = 2;
            apply(v, toks[1].text, signed_number(toks, p), true);
        }
        if (p != toks.size())
            throw ParseError("trailing tokens in bound");
    }

    MilpModel build()
    {
        MilpModel m;
        for (const auto& v : vars_)
            m.add_variable(v.name, v.kind, v.lower, v.upper);
        for (const auto& c : cons_) {
            std::vector<Term> terms;
            for (const auto& [n, coef] : c.terms)
                terms.push_back({*m.find(n), coef});
            m.add_constraint(c.name, std::move(terms), c.rel, c.rhs);
        }
        if (objective_) {
            std::vector<Term> terms;
            for (const auto& [n, coef] : *objective_)
                if (coef != 0.0)
                    terms.push_back({*m.find(n), coef});
            if (!terms.empty())
                m.set_objective(sense_, std::move(terms));
        }
        return m;
    }

    Sense sense_ = Sense::Minimize;
    bool has_objective_ = false;
    std::string objective_text_;
    std::string constraints_text_;
    std::vector<std::string> bound_lines_;
    std::vector<std::string> general_names_;
    std::vector<std::string> binary_names_;
    std::vector<PendingVar> vars_;
    std::map<std::string, std::size_t> index_;
    std::vector<PendingCons> cons_;
    std::optional<std::vector<std::pair<std::string, double>>> objective_;
};

} // namespace detail

inline MilpModel parse_lp(const std::string& text)
{
    return detail::LpReader().read(text);
}

inline MilpModel read_lp(const std::string& path)
{
    return parse_lp(io::read_file(path));
}

/// "name value" per line, one line per variable.
inline std::string write_solution(const MilpModel& model, const SolveResult& result)
{
    std::ostringstream os;
    os << "# status " << to_string(result.status) << '\n';
    if (result.objective_value)
        os << "# objective " << io::format_double(*result.objective_value) << '\n';
    if (result.feasible())
        for (std::size_t j = 0; j < model.variable_count(); ++j)
            os << model.variables()[j].name << ' ' << io::format_double(result.assignment[j]) << '\n';
    return os.str();
}

/// Reads an assignment and validates it against `model`. Every model
/// variable needs a value; names unknown to the model are rejected.
inline SolveResult parse_solution(const MilpModel& model, const std::string& text, const Tolerances& tol = {})
{
    std::vector<double> x(model.variable_count(), 0.0);
    std::vector<bool> seen(model.variable_count(), false);
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto pos = line.find('#'); pos != std::string::npos)
            line.erase(pos);
        std::istringstream ls(line);
        std::string name, value, extra;
        if (!(ls >> name))
            continue;
        if (!(ls >> value) || (ls >> extra))
            throw ParseError("line " + std::to_string(lineno) + ": expected 'name value'");
        const auto id = model.find(name);
        if (!id)
            throw UnknownVariable("'" + name + "' is not a model variable");
        x[id->index] = io::parse_double(value);
        seen[id->index] = true;
    }
    for (std::size_t j = 0; j < seen.size(); ++j)
        if (!seen[j])
            throw UnknownVariable("no value given for '" + model.variables()[j].name + "'");

    SolveResult res;
    if (auto bad = first_violation(model, x, tol)) {
        res.status = SolveStatus::Infeasible;
        res.message = *bad;
        return res;
    }
    res.status = SolveStatus::Feasible;
    res.assignment = std::move(x);
    if (model.objective())
        res.objective_value = objective_value(*model.objective(), res.assignment);
    return res;
}

inline SolveResult import_solution(const MilpModel& model, const std::string& path, const Tolerances& tol = {})
{
    return parse_solution(model, io::read_file(path), tol);
}

} // namespace snnsafe::milp
