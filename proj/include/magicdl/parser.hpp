#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include "magicdl/core.hpp"

namespace magicdl {

class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line, std::size_t column, std::string message, std::string token);

    std::size_t line() const { return line_; }
    std::size_t column() const { return column_; }
    const std::string& message() const { return message_; }
    const std::string& token() const { return token_; }

private:
    std::size_t line_;
    std::size_t column_;
    std::string message_;
    std::string token_;
};

struct ParseOptions {
    // Accept predicate names of the form m#p#s. Only rewritten programs use them.
    bool allow_magic_names = false;
};

Program parse_program(std::string_view text, const ParseOptions& options = {});

// Appends the rules in `text` to `program`, interning into its symbol table.
void parse_into(Program& program, std::string_view text, const ParseOptions& options = {});

// A single atom, optionally terminated by '?'.
Atom parse_query(std::string_view text, SymbolTable& symbols);

std::string render_term(Term term, const SymbolTable& symbols, const std::vector<std::string>& variable_names);
std::string render_atom(const Atom& atom, const SymbolTable& symbols,
                        const std::vector<std::string>& variable_names = {});
std::string render_rule(const Rule& rule, const SymbolTable& symbols);
std::string render(const Program& program);

}  // namespace magicdl
