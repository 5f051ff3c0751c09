#pragma once

#include <cctype>
#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <string>

#include "qshje/core.hpp"

namespace qshje::expr {

// Minimal arithmetic expression evaluator for potentials given as text,
// e.g. "0.5*x^2" or "4*(exp(-2*(x-1)) - 2*exp(-(x-1)))". Grammar:
//   expr   := term (('+'|'-') term)*
//   term   := factor (('*'|'/') factor)*
//   factor := ('+'|'-') factor | power
//   power  := atom ('^' factor)?          (right associative)
//   atom   := number | 'x' | 'pi' | 'e' | func '(' expr ')' | '(' expr ')'
// Parsed once into a closure tree; evaluation is allocation-free.

using Fn = std::function<double(double)>;

namespace detail {

struct Parser {
    const std::string& s;
    std::size_t pos = 0;

    explicit Parser(const std::string& src) : s(src) {}

    void skip() {
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    }
    bool eat(char c) {
        skip();
        if (pos < s.size() && s[pos] == c) { ++pos; return true; }
        return false;
    }
    char peek() {
        skip();
        return pos < s.size() ? s[pos] : '\0';
    }

    [[noreturn]] void fail(const std::string& what) {
        throw invalid_input("expression parse error at position " + std::to_string(pos) + ": " + what);
    }

    Fn parse_expr() {
        Fn lhs = parse_term();
        while (true) {
            if (eat('+')) {
                Fn rhs = parse_term();
                lhs = [lhs, rhs](double x) { return lhs(x) + rhs(x); };
            } else if (eat('-')) {
                Fn rhs = parse_term();
                lhs = [lhs, rhs](double x) { return lhs(x) - rhs(x); };
            } else {
                return lhs;
            }
        }
    }

    Fn parse_term() {
        Fn lhs = parse_factor();
        while (true) {
            if (eat('*')) {
                Fn rhs = parse_factor();
                lhs = [lhs, rhs](double x) { return lhs(x) * rhs(x); };
            } else if (eat('/')) {
                Fn rhs = parse_factor();
                lhs = [lhs, rhs](double x) { return lhs(x) / rhs(x); };
            } else {
                return lhs;
            }
        }
    }

    Fn parse_factor() {
        if (eat('+')) return parse_factor();
        if (eat('-')) {
            Fn inner = parse_factor();
            return [inner](double x) { return -inner(x); };
        }
        return parse_power();
    }

    Fn parse_power() {
        Fn base = parse_atom();
        if (eat('^')) {
            Fn expo = parse_factor();
            return [base, expo](double x) { return std::pow(base(x), expo(x)); };
        }
        return base;
    }

    Fn parse_atom() {
        skip();
        if (pos >= s.size()) fail("unexpected end of input");
        char c = s[pos];

        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            std::size_t used = 0;
            double v = std::stod(s.substr(pos), &used);
            pos += used;
            return [v](double) { return v; };
        }

        if (c == '(') {
            ++pos;
            Fn inner = parse_expr();
            if (!eat(')')) fail("missing ')'");
            return inner;
        }

        if (std::isalpha(static_cast<unsigned char>(c))) {
            std::size_t start = pos;
            while (pos < s.size() &&
                   (std::isalnum(static_cast<unsigned char>(s[pos])) || s[pos] == '_'))
                ++pos;
            std::string name = s.substr(start, pos - start);

            if (name == "x") return [](double x) { return x; };
            if (name == "pi") return [](double) { return M_PI; };
            if (name == "e") return [](double) { return M_E; };

            static const std::map<std::string, double (*)(double)> funcs = {
                {"sin", std::sin},   {"cos", std::cos},   {"tan", std::tan},
                {"exp", std::exp},   {"log", std::log},   {"sqrt", std::sqrt},
                {"abs", std::fabs},  {"sinh", std::sinh}, {"cosh", std::cosh},
                {"tanh", std::tanh},
            };
            auto it = funcs.find(name);
            if (it == funcs.end()) fail("unknown identifier '" + name + "'");
            if (!eat('(')) fail("expected '(' after '" + name + "'");
            Fn arg = parse_expr();
            if (!eat(')')) fail("missing ')' after argument of '" + name + "'");
            auto f = it->second;
            return [f, arg](double x) { return f(arg(x)); };
        }

        fail(std::string("unexpected character '") + c + "'");
    }
};

} // namespace detail

/// Compile an expression in the single variable x. Throws invalid_input on syntax errors.
inline Fn compile(const std::string& source) {
    detail::Parser p(source);
    Fn f = p.parse_expr();
    p.skip();
    if (p.pos != source.size())
        p.fail("trailing characters");
    return f;
}

} // namespace qshje::expr
