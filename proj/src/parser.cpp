#include "magicdl/parser.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <sstream>
#include <unordered_map>

namespace magicdl {

ParseError::ParseError(std::size_t line, std::size_t column, std::string message, std::string token)
    : std::runtime_error(std::to_string(line) + ":" + std::to_string(column) + ": " + message +
                         (token.empty() ? std::string() : " near '" + token + "'")),
      line_(line),
      column_(column),
      message_(std::move(message)),
      token_(std::move(token)) {}

namespace {

enum class Tok {
    identifier,
    variable,
    integer,
    lparen,
    rparen,
    lbrace,
    rbrace,
    comma,
    dot,
    dotdot,
    colon,
    if_,
    question,
    sum,
    cmp,
    end,
};

struct Token {
    Tok kind = Tok::end;
    std::string text;
    std::size_t line = 1;
    std::size_t column = 1;
};

class Lexer {
public:
    explicit Lexer(std::string_view text) : text_(text) {}

    Token next() {
        skip_blank();
        Token tok;
        tok.line = line_;
        tok.column = column_;
        if (pos_ >= text_.size()) return tok;

        char c = text_[pos_];
        auto single = [&](Tok kind) {
            tok.kind = kind;
            tok.text = std::string(1, c);
            advance(1);
            return tok;
        };

        if (std::islower(static_cast<unsigned char>(c))) {
            tok.kind = Tok::identifier;
            tok.text = take_while([](char ch) {
                return std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '#' || ch == '\'';
            });
            return tok;
        }
        if (std::isupper(static_cast<unsigned char>(c)) || c == '_') {
            tok.kind = Tok::variable;
            tok.text = take_while([](char ch) {
                return std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '\'';
            });
            return tok;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) ||
            (c == '-' && pos_ + 1 < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_ + 1])))) {
            tok.kind = Tok::integer;
            std::string s;
            if (c == '-') {
                s = "-";
                advance(1);
            }
            s += take_while([](char ch) { return std::isdigit(static_cast<unsigned char>(ch)) != 0; });
            tok.text = std::move(s);
            return tok;
        }
        if (c == '#') {
            auto word = take_while([first = true](char ch) mutable {
                bool ok = first ? ch == '#' : std::isalpha(static_cast<unsigned char>(ch)) != 0;
                first = false;
                return ok;
            });
            if (word != "#sum") throw ParseError(tok.line, tok.column, "unsupported aggregate", word);
            tok.kind = Tok::sum;
            tok.text = word;
            return tok;
        }
        switch (c) {
            case '(': return single(Tok::lparen);
            case ')': return single(Tok::rparen);
            case '{': return single(Tok::lbrace);
            case '}': return single(Tok::rbrace);
            case ',': return single(Tok::comma);
            case '?': return single(Tok::question);
            case '.':
                if (peek(1) == '.') {
                    tok.kind = Tok::dotdot;
                    tok.text = "..";
                    advance(2);
                    return tok;
                }
                return single(Tok::dot);
            case ':':
                if (peek(1) == '-') {
                    tok.kind = Tok::if_;
                    tok.text = ":-";
                    advance(2);
                    return tok;
                }
                return single(Tok::colon);
            case '<':
            case '>':
            case '!':
            case '=': {
                tok.kind = Tok::cmp;
                if (peek(1) == '=') {
                    tok.text = std::string{c, '='};
                    advance(2);
                } else if (c == '!') {
                    throw ParseError(tok.line, tok.column, "unexpected character", "!");
                } else {
                    tok.text = std::string(1, c);
                    advance(1);
                }
                if (tok.text == "==") tok.text = "=";
                return tok;
            }
            default: break;
        }
        throw ParseError(tok.line, tok.column, "unexpected character", std::string(1, c));
    }

private:
    char peek(std::size_t offset) const {
        return pos_ + offset < text_.size() ? text_[pos_ + offset] : '\0';
    }

    void advance(std::size_t n) {
        for (std::size_t i = 0; i < n && pos_ < text_.size(); ++i) {
            if (text_[pos_] == '\n') {
                ++line_;
                column_ = 1;
            } else {
                ++column_;
            }
            ++pos_;
        }
    }

    template <class Pred>
    std::string take_while(Pred pred) {
        std::size_t start = pos_;
        while (pos_ < text_.size() && pred(text_[pos_])) advance(1);
        return std::string(text_.substr(start, pos_ - start));
    }

    void skip_blank() {
        while (pos_ < text_.size()) {
            char c = text_[pos_];
            if (c == '%') {
                while (pos_ < text_.size() && text_[pos_] != '\n') advance(1);
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                advance(1);
            } else {
                break;
            }
        }
    }

    std::string_view text_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1;
    std::size_t column_ = 1;
};

// A term as written, before interning. Intervals only appear in facts.
struct RawTerm {
    enum Kind { symbol, integer, variable, interval } kind = symbol;
    std::string text;
    std::int64_t low = 0;
    std::int64_t high = 0;
};

struct RawAtom {
    std::string predicate;
    std::vector<RawTerm> terms;
    Token at;
};

class Parser {
public:
    Parser(std::string_view text, SymbolTable& symbols, const ParseOptions& options)
        : lexer_(text), symbols_(symbols), options_(options) {
        current_ = lexer_.next();
    }

    void parse_program(std::vector<Rule>& out) {
        while (current_.kind != Tok::end) parse_statement(out);
    }

    Atom parse_query() {
        begin_rule();
        auto raw = parse_atom();
        if (current_.kind == Tok::question || current_.kind == Tok::dot) advance();
        expect_kind(Tok::end, "expected end of query");
        reject_intervals(raw);
        return intern_atom(raw);
    }

private:
    void advance() { current_ = lexer_.next(); }

    [[noreturn]] void fail(const std::string& message) const {
        throw ParseError(current_.line, current_.column, message, current_.text);
    }

    void expect_kind(Tok kind, const std::string& message) {
        if (current_.kind != kind) fail(message);
    }

    void consume(Tok kind, const std::string& message) {
        expect_kind(kind, message);
        advance();
    }

    void begin_rule() {
        variables_.clear();
        variable_names_.clear();
        anonymous_ = 0;
    }

    void parse_statement(std::vector<Rule>& out) {
        begin_rule();
        auto head = parse_atom();
        bool has_interval = std::any_of(head.terms.begin(), head.terms.end(),
                                        [](const RawTerm& t) { return t.kind == RawTerm::interval; });
        Rule rule;
        if (!has_interval) rule.head = intern_atom(head);
        if (current_.kind == Tok::if_) {
            if (has_interval) reject_intervals(head);
            advance();
            rule.body.push_back(parse_body_element());
            while (current_.kind == Tok::comma) {
                advance();
                rule.body.push_back(parse_body_element());
            }
        }
        consume(Tok::dot, "expected '.' at end of rule");

        if (has_interval) {
            expand_intervals(head, out);
            return;
        }
        rule.variable_names = variable_names_;
        out.push_back(std::move(rule));
    }

    BodyElement parse_body_element() {
        if (current_.kind == Tok::sum) return parse_aggregate();
        if (current_.kind == Tok::identifier && current_.text == "not") {
            advance();
            auto raw = parse_atom();
            reject_intervals(raw);
            return Literal{intern_atom(raw), true};
        }
        auto raw = parse_atom();
        reject_intervals(raw);
        return Literal{intern_atom(raw), false};
    }

    Aggregate parse_aggregate() {
        advance();  // #sum
        consume(Tok::lbrace, "expected '{' after #sum");
        Aggregate aggregate;
        aggregate.head_terms.push_back(intern_term(parse_term()));
        while (current_.kind == Tok::comma) {
            advance();
            aggregate.head_terms.push_back(intern_term(parse_term()));
        }
        consume(Tok::colon, "expected ':' in aggregate");
        auto raw = parse_atom();
        reject_intervals(raw);
        aggregate.inner = intern_atom(raw);
        consume(Tok::rbrace, "expected '}' closing aggregate");
        expect_kind(Tok::cmp, "expected comparator after aggregate");
        aggregate.comparator = comparator_of(current_.text);
        advance();
        aggregate.guard = intern_term(parse_term());
        return aggregate;
    }

    static Comparator comparator_of(const std::string& text) {
        if (text == "<") return Comparator::less;
        if (text == "<=") return Comparator::less_equal;
        if (text == "=") return Comparator::equal;
        if (text == "!=") return Comparator::not_equal;
        if (text == ">=") return Comparator::greater_equal;
        return Comparator::greater;
    }

    RawAtom parse_atom() {
        expect_kind(Tok::identifier, "expected predicate name");
        if (current_.text == "not") fail("'not' is not a predicate name");
        RawAtom atom;
        atom.at = current_;
        atom.predicate = current_.text;
        advance();
        if (current_.kind == Tok::lparen) {
            advance();
            if (current_.kind != Tok::rparen) {
                atom.terms.push_back(parse_term(true));
                while (current_.kind == Tok::comma) {
                    advance();
                    atom.terms.push_back(parse_term(true));
                }
            }
            consume(Tok::rparen, "expected ')'");
        }
        return atom;
    }

    RawTerm parse_term(bool allow_interval = false) {
        RawTerm term;
        switch (current_.kind) {
            case Tok::identifier:
                if (current_.text.find('#') != std::string::npos) fail("'#' is reserved for magic predicates");
                term.kind = RawTerm::symbol;
                term.text = current_.text;
                advance();
                return term;
            case Tok::variable:
                term.kind = RawTerm::variable;
                term.text = current_.text;
                advance();
                return term;
            case Tok::integer: {
                term.kind = RawTerm::integer;
                term.text = current_.text;
                term.low = to_integer(current_.text);
                advance();
                if (current_.kind == Tok::dotdot) {
                    if (!allow_interval) fail("interval not allowed here");
                    advance();
                    expect_kind(Tok::integer, "expected integer upper bound");
                    term.kind = RawTerm::interval;
                    term.high = to_integer(current_.text);
                    if (term.high < term.low) fail("empty interval");
                    advance();
                }
                return term;
            }
            default: fail("expected term");
        }
    }

    std::int64_t to_integer(const std::string& text) const {
        std::int64_t value = 0;
        auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
        if (ec != std::errc() || ptr != text.data() + text.size()) fail("integer out of range");
        return value;
    }

    void reject_intervals(const RawAtom& atom) const {
        for (const auto& t : atom.terms)
            if (t.kind == RawTerm::interval)
                throw ParseError(atom.at.line, atom.at.column, "intervals are only allowed in facts", atom.predicate);
    }

    void expand_intervals(const RawAtom& head, std::vector<Rule>& out) {
        for (const auto& t : head.terms)
            if (t.kind == RawTerm::variable)
                throw ParseError(head.at.line, head.at.column, "interval facts must be ground", head.predicate);
        auto predicate = intern_predicate(head);
        std::vector<std::int64_t> cursor;
        std::vector<Term> fixed(head.terms.size());
        std::vector<std::size_t> slots;
        for (std::size_t i = 0; i < head.terms.size(); ++i) {
            const auto& t = head.terms[i];
            cursor.push_back(t.low);
            if (t.kind == RawTerm::interval)
                slots.push_back(i);
            else
                fixed[i] = intern_term(t);
        }
        while (true) {
            Rule fact;
            fact.head.predicate = predicate;
            fact.head.terms = fixed;
            for (std::size_t i = 0; i < head.terms.size(); ++i)
                if (head.terms[i].kind == RawTerm::interval)
                    fact.head.terms[i] = Term::constant(symbols_.intern_integer(cursor[i]));
            out.push_back(std::move(fact));

            // odometer over the interval positions, last position fastest
            bool advanced = false;
            for (std::size_t k = slots.size(); k > 0 && !advanced; --k) {
                auto i = slots[k - 1];
                if (cursor[i] < head.terms[i].high) {
                    ++cursor[i];
                    advanced = true;
                } else {
                    cursor[i] = head.terms[i].low;
                }
            }
            if (!advanced) return;
        }
    }

    PredicateId intern_predicate(const RawAtom& atom) {
        const auto& name = atom.predicate;
        if (name.find('#') == std::string::npos) return symbols_.intern_predicate(name, atom.terms.size());
        if (!options_.allow_magic_names)
            throw ParseError(atom.at.line, atom.at.column, "'#' is reserved for magic predicates", name);
        // m#<base>#<adornment>
        auto second = name.find('#', 2);
        if (name.rfind("m#", 0) != 0 || second == std::string::npos || second == 2)
            throw ParseError(atom.at.line, atom.at.column, "malformed magic predicate name", name);
        auto base = name.substr(2, second - 2);
        auto adornment = name.substr(second + 1);
        bool well_formed = std::all_of(adornment.begin(), adornment.end(), [](char c) { return c == 'b' || c == 'f'; });
        auto bound = static_cast<std::size_t>(std::count(adornment.begin(), adornment.end(), 'b'));
        if (!well_formed || base.find('#') != std::string::npos || bound != atom.terms.size())
            throw ParseError(atom.at.line, atom.at.column, "malformed magic predicate name", name);
        auto base_id = symbols_.intern_predicate(base, adornment.size());
        return symbols_.intern_magic(base_id, adornment);
    }

    Atom intern_atom(const RawAtom& raw) {
        Atom atom;
        atom.predicate = intern_predicate(raw);
        atom.terms.reserve(raw.terms.size());
        for (const auto& t : raw.terms) atom.terms.push_back(intern_term(t));
        return atom;
    }

    Term intern_term(const RawTerm& raw) {
        switch (raw.kind) {
            case RawTerm::symbol: return Term::constant(symbols_.intern_symbol(raw.text));
            case RawTerm::integer: return Term::constant(symbols_.intern_integer(raw.low));
            case RawTerm::interval: break;
            case RawTerm::variable: {
                std::string name = raw.text;
                if (name == "_") name = "_" + std::to_string(++anonymous_);
                auto [it, inserted] =
                    variables_.try_emplace(name, VariableId{static_cast<std::uint32_t>(variable_names_.size())});
                if (inserted) variable_names_.push_back(name);
                return Term::variable(it->second);
            }
        }
        fail("interval not allowed here");
    }

    Lexer lexer_;
    Token current_;
    SymbolTable& symbols_;
    ParseOptions options_;
    std::unordered_map<std::string, VariableId> variables_;
    std::vector<std::string> variable_names_;
    int anonymous_ = 0;
};

}  // namespace

Program parse_program(std::string_view text, const ParseOptions& options) {
    Program program;
    parse_into(program, text, options);
    return program;
}

void parse_into(Program& program, std::string_view text, const ParseOptions& options) {
    Parser parser(text, *program.symbols, options);
    parser.parse_program(program.rules);
}

Atom parse_query(std::string_view text, SymbolTable& symbols) {
    Parser parser(text, symbols, ParseOptions{});
    return parser.parse_query();
}

// ---------------------------------------------------------------------------
// Rendering

std::string render_term(Term term, const SymbolTable& symbols, const std::vector<std::string>& variable_names) {
    if (term.is_constant()) return symbols.constant_text(term.constant_id());
    auto id = index_of(term.variable_id());
    return id < variable_names.size() ? variable_names[id] : "V" + std::to_string(id);
}

std::string render_atom(const Atom& atom, const SymbolTable& symbols, const std::vector<std::string>& variable_names) {
    std::string out = symbols.predicate_name(atom.predicate);
    if (atom.terms.empty()) return out;
    out += '(';
    for (std::size_t i = 0; i < atom.terms.size(); ++i) {
        if (i > 0) out += ',';
        out += render_term(atom.terms[i], symbols, variable_names);
    }
    out += ')';
    return out;
}

std::string render_rule(const Rule& rule, const SymbolTable& symbols) {
    const auto& names = rule.variable_names;
    std::string out = render_atom(rule.head, symbols, names);
    for (std::size_t i = 0; i < rule.body.size(); ++i) {
        out += i == 0 ? " :- " : ", ";
        const auto& element = rule.body[i];
        if (const auto* literal = std::get_if<Literal>(&element)) {
            if (literal->negated) out += "not ";
            out += render_atom(literal->atom, symbols, names);
            continue;
        }
        const auto& aggregate = std::get<Aggregate>(element);
        out += "#sum{";
        for (std::size_t k = 0; k < aggregate.head_terms.size(); ++k) {
            if (k > 0) out += ',';
            out += render_term(aggregate.head_terms[k], symbols, names);
        }
        out += " : ";
        out += render_atom(aggregate.inner, symbols, names);
        out += "} ";
        out += to_string(aggregate.comparator);
        out += ' ';
        out += render_term(aggregate.guard, symbols, names);
    }
    out += '.';
    return out;
}

std::string render(const Program& program) {
    std::string out;
    for (const auto& rule : program.rules) {
        out += render_rule(rule, *program.symbols);
        out += '\n';
    }
    return out;
}

}  // namespace magicdl
