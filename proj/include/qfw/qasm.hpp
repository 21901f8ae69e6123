// Copyright 2026 The QFw Authors.

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at

//     http://www.apache.org/licenses/LICENSE-2.0

// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <charconv>
#include <cstdio>
#include <map>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include "qfw/circuit.hpp"
#include "qfw/error.hpp"

/// OpenQASM 2.0 reader and writer for the framework's task format.
///
/// Accepted subset: the version header, `include "qelib1.inc";`, qreg/creg
/// declarations, the GateKind gate set (plus the aliases U, CX, u3, u2, u1
/// and p, which lower onto `u`/`cx`), measure, reset, barrier and
/// `if(creg==value)` on gates and resets. Register arguments broadcast as in
/// the language definition. Parameters are numeric literals, `pi`, or the
/// forms `[+-] k*pi / m`, `[+-] pi*k / m`, `[+-] pi / m`. Gate and opaque
/// definitions are rejected.
namespace qfw::qasm {

namespace detail {

enum class Tok { ident, integer, real, string, symbol, end };

struct Token {
    Tok kind = Tok::end;
    std::string text;
    SourcePos pos;
};

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) {}

    std::vector<Token> run()
    {
        std::vector<Token> out;
        for (;;) {
            skip_space();
            Token t;
            t.pos = {line_, col_};
            if (at_end()) {
                t.kind = Tok::end;
                out.push_back(std::move(t));
                return out;
            }
            const char c = peek();
            if (is_alpha(c)) {
                t.kind = Tok::ident;
                while (!at_end() && (is_alpha(peek()) || is_digit(peek()) || peek() == '_'))
                    t.text.push_back(take());
            } else if (is_digit(c) || (c == '.' && is_digit(peek(1)))) {
                lex_number(t);
            } else if (c == '"') {
                take();
                t.kind = Tok::string;
                while (!at_end() && peek() != '"' && peek() != '\n')
                    t.text.push_back(take());
                if (at_end() || peek() != '"')
                    throw Error(Errc::syntax_error, t.pos, "unterminated string literal");
                take();
            } else if (c == '-' && peek(1) == '>') {
                t.kind = Tok::symbol;
                t.text = "->";
                take();
                take();
            } else if (c == '=' && peek(1) == '=') {
                t.kind = Tok::symbol;
                t.text = "==";
                take();
                take();
            } else if (std::string_view(";,[](){}+-*/^").find(c) != std::string_view::npos) {
                t.kind = Tok::symbol;
                t.text = std::string(1, take());
            } else {
                throw Error(Errc::syntax_error, t.pos, "unexpected character");
            }
            out.push_back(std::move(t));
        }
    }

private:
    static bool is_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }
    static bool is_digit(char c) { return c >= '0' && c <= '9'; }

    bool at_end() const { return i_ >= src_.size(); }
    char peek(std::size_t ahead = 0) const { return i_ + ahead < src_.size() ? src_[i_ + ahead] : '\0'; }
    char take()
    {
        const char c = src_[i_++];
        if (c == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        return c;
    }

    void skip_space()
    {
        while (!at_end()) {
            const char c = peek();
            if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
                take();
            } else if (c == '/' && peek(1) == '/') {
                while (!at_end() && peek() != '\n')
                    take();
            } else {
                break;
            }
        }
    }

    void lex_number(Token& t)
    {
        t.kind = Tok::integer;
        while (is_digit(peek()))
            t.text.push_back(take());
        if (peek() == '.') {
            t.kind = Tok::real;
            t.text.push_back(take());
            while (is_digit(peek()))
                t.text.push_back(take());
        }
        if (peek() == 'e' || peek() == 'E') {
            const char sign = peek(1);
            if (is_digit(sign) || ((sign == '+' || sign == '-') && is_digit(peek(2)))) {
                t.kind = Tok::real;
                t.text.push_back(take());
                if (!is_digit(peek()))
                    t.text.push_back(take());
                while (is_digit(peek()))
                    t.text.push_back(take());
            }
        }
    }

    std::string_view src_;
    std::size_t i_ = 0;
    std::size_t line_ = 1;
    std::size_t col_ = 1;
};

struct QubitRegister {
    std::size_t offset = 0;
    std::size_t size = 0;
};

struct Arg {
    std::string reg;
    std::optional<std::size_t> index;
    SourcePos pos;
};

class Parser {
public:
    explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

    Circuit run()
    {
        parse_header();
        while (cur().kind != Tok::end)
            parse_statement();
        validate(circuit_);
        return std::move(circuit_);
    }

private:
    const Token& cur() const { return toks_[i_]; }
    const Token& ahead(std::size_t k) const { return toks_[std::min(i_ + k, toks_.size() - 1)]; }
    Token next() { return toks_[i_ < toks_.size() - 1 ? i_++ : i_]; }

    bool is_sym(std::string_view s) const { return cur().kind == Tok::symbol && cur().text == s; }
    bool is_word(std::string_view s) const { return cur().kind == Tok::ident && cur().text == s; }

    [[noreturn]] void syntax(const Token& at, const std::string& msg) const
    {
        throw Error(Errc::syntax_error, at.pos, msg);
    }
    [[noreturn]] void unsupported(const Token& at, const std::string& msg) const
    {
        throw Error(Errc::unsupported_feature, at.pos, msg);
    }
    [[noreturn]] void invalid(SourcePos at, const std::string& msg) const
    {
        throw Error(Errc::validation_error, at, msg);
    }

    static std::string describe(const Token& t)
    {
        if (t.kind == Tok::end)
            return "end of input";
        return "'" + t.text + "'";
    }

    void expect_sym(std::string_view s)
    {
        if (!is_sym(s))
            syntax(cur(), "expected '" + std::string(s) + "', found " + describe(cur()));
        next();
    }

    std::string expect_ident()
    {
        if (cur().kind != Tok::ident)
            syntax(cur(), "expected identifier, found " + describe(cur()));
        return next().text;
    }

    std::size_t expect_uint()
    {
        if (cur().kind != Tok::integer)
            syntax(cur(), "expected non-negative integer, found " + describe(cur()));
        const Token t = next();
        std::size_t v = 0;
        auto [p, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
        if (ec != std::errc())
            invalid(t.pos, "integer literal out of range");
        return v;
    }

    void parse_header()
    {
        if (!is_word("OPENQASM"))
            syntax(cur(), "program must begin with 'OPENQASM 2.0;'");
        next();
        if (cur().kind != Tok::real && cur().kind != Tok::integer)
            syntax(cur(), "expected version number");
        const Token v = next();
        if (v.text != "2.0" && v.text != "2")
            unsupported(v, "only OpenQASM 2.0 is supported, got " + v.text);
        expect_sym(";");
    }

    void parse_statement()
    {
        const Token& t = cur();
        if (t.kind != Tok::ident)
            syntax(t, "expected statement, found " + describe(t));
        if (t.text == "OPENQASM")
            syntax(t, "version statement must appear once, at the start");
        if (t.text == "include")
            return parse_include();
        if (t.text == "qreg" || t.text == "creg")
            return parse_register();
        if (t.text == "gate" || t.text == "opaque")
            unsupported(t, "'" + t.text + "' definitions are not supported");
        if (t.text == "if")
            return parse_if();
        parse_quantum_op(std::nullopt);
    }

    void parse_include()
    {
        next();
        if (cur().kind != Tok::string)
            syntax(cur(), "expected file name string");
        const Token f = next();
        if (f.text != "qelib1.inc")
            unsupported(f, "only \"qelib1.inc\" may be included");
        expect_sym(";");
        qelib_ = true;
    }

    void declare_name(const Token& at, const std::string& name)
    {
        if (qregs_.count(name) || circuit_.creg_index(name))
            invalid(at.pos, "duplicate register name '" + name + "'");
    }

    void parse_register()
    {
        const bool quantum = next().text == "qreg";
        const Token name_tok = cur();
        const std::string name = expect_ident();
        expect_sym("[");
        const Token size_tok = cur();
        const std::size_t size = expect_uint();
        expect_sym("]");
        expect_sym(";");
        declare_name(name_tok, name);
        if (size == 0)
            invalid(size_tok.pos, "register size must be positive");
        if (quantum) {
            qregs_[name] = {circuit_.num_qubits, size};
            circuit_.num_qubits += size;
        } else {
            if (size > max_creg_size)
                invalid(size_tok.pos, "creg size above 64 is not supported");
            circuit_.cregs.push_back({name, size});
        }
    }

    void parse_if()
    {
        next();
        expect_sym("(");
        const Token reg_tok = cur();
        const std::string reg = expect_ident();
        expect_sym("==");
        const Token val_tok = cur();
        const std::size_t value = expect_uint();
        expect_sym(")");
        const auto r = circuit_.creg_index(reg);
        if (!r)
            invalid(reg_tok.pos, "undeclared creg '" + reg + "'");
        (void)val_tok;
        if (is_word("measure") || is_word("barrier"))
            unsupported(cur(), "conditional '" + cur().text + "' is not supported");
        parse_quantum_op(Condition{reg, static_cast<std::uint64_t>(value)});
    }

    Arg parse_arg()
    {
        Arg a;
        a.pos = cur().pos;
        a.reg = expect_ident();
        if (is_sym("[")) {
            next();
            a.index = expect_uint();
            expect_sym("]");
        }
        return a;
    }

    std::vector<Arg> parse_arglist()
    {
        std::vector<Arg> args{parse_arg()};
        while (is_sym(",")) {
            next();
            args.push_back(parse_arg());
        }
        return args;
    }

    std::vector<std::size_t> resolve_qubits(const Arg& a) const
    {
        auto it = qregs_.find(a.reg);
        if (it == qregs_.end())
            invalid(a.pos, "undeclared qreg '" + a.reg + "'");
        const auto& reg = it->second;
        if (a.index) {
            if (*a.index >= reg.size)
                invalid(a.pos, "index " + std::to_string(*a.index) + " out of range for qreg '" + a.reg + "'");
            return {reg.offset + *a.index};
        }
        std::vector<std::size_t> out(reg.size);
        for (std::size_t k = 0; k < reg.size; ++k)
            out[k] = reg.offset + k;
        return out;
    }

    std::vector<ClassicalBit> resolve_bits(const Arg& a) const
    {
        const auto r = circuit_.creg_index(a.reg);
        if (!r)
            invalid(a.pos, "undeclared creg '" + a.reg + "'");
        const std::size_t size = circuit_.cregs[*r].size;
        if (a.index) {
            if (*a.index >= size)
                invalid(a.pos, "index " + std::to_string(*a.index) + " out of range for creg '" + a.reg + "'");
            return {{a.reg, *a.index}};
        }
        std::vector<ClassicalBit> out;
        for (std::size_t k = 0; k < size; ++k)
            out.push_back({a.reg, k});
        return out;
    }

    /// Broadcast register arguments: all register arguments must share a size.
    std::size_t broadcast_width(const std::vector<std::vector<std::size_t>>& expanded, const std::vector<Arg>& args) const
    {
        std::size_t width = 1;
        for (std::size_t k = 0; k < expanded.size(); ++k) {
            if (args[k].index)
                continue;
            if (width != 1 && expanded[k].size() != width)
                invalid(args[k].pos, "register arguments of different sizes");
            width = expanded[k].size();
        }
        return width;
    }

    double parse_angle()
    {
        // [+-] ( number | pi | number*pi | pi*number ) [ / number ]
        double sign = 1.0;
        if (is_sym("-") || is_sym("+")) {
            if (cur().text == "-")
                sign = -1.0;
            next();
        }
        double value = 0.0;
        auto number = [&]() -> std::optional<double> {
            if (cur().kind != Tok::integer && cur().kind != Tok::real)
                return std::nullopt;
            const Token t = next();
            double v = 0.0;
            auto [p, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
            if (ec != std::errc())
                invalid(t.pos, "numeric literal out of range");
            return v;
        };
        if (auto n = number()) {
            value = *n;
            if (is_sym("*")) {
                next();
                if (!is_word("pi"))
                    unsupported(cur(), "only k*pi products are supported in parameters");
                next();
                value = value * std::numbers::pi;
            }
        } else if (is_word("pi")) {
            next();
            value = std::numbers::pi;
            if (is_sym("*")) {
                next();
                auto k = number();
                if (!k)
                    unsupported(cur(), "only pi*k products are supported in parameters");
                value = std::numbers::pi * *k;
            }
        } else if (cur().kind == Tok::ident || is_sym("(")) {
            unsupported(cur(), "parameter expressions beyond literals and pi fractions are not supported");
        } else {
            syntax(cur(), "expected parameter, found " + describe(cur()));
        }
        if (is_sym("/")) {
            next();
            auto d = number();
            if (!d)
                unsupported(cur(), "only numeric denominators are supported in parameters");
            value = value / *d;
        }
        if (is_sym("+") || is_sym("-") || is_sym("*") || is_sym("/") || is_sym("^") || is_sym("("))
            unsupported(cur(), "parameter expressions beyond literals and pi fractions are not supported");
        return sign * value;
    }

    struct ResolvedGate {
        GateKind kind;
        std::vector<double> params;
    };

    ResolvedGate resolve_gate(const Token& name_tok, std::vector<double> params) const
    {
        const std::string& name = name_tok.text;
        auto need = [&](std::size_t n) {
            if (params.size() != n)
                invalid(name_tok.pos, "gate '" + name + "' takes " + std::to_string(n) + " parameters, got " +
                                          std::to_string(params.size()));
        };
        if (name == "U") {
            need(3);
            return {GateKind::u, std::move(params)};
        }
        if (name == "CX") {
            need(0);
            return {GateKind::cx, {}};
        }
        if (auto k = gate_from_name(name)) {
            if (!qelib_)
                invalid(name_tok.pos, "gate '" + name + "' used without include \"qelib1.inc\"");
            need(gate_param_count(*k));
            return {*k, std::move(params)};
        }
        if (name == "u3" || name == "u2" || name == "u1" || name == "p") {
            if (!qelib_)
                invalid(name_tok.pos, "gate '" + name + "' used without include \"qelib1.inc\"");
            if (name == "u3") {
                need(3);
                return {GateKind::u, std::move(params)};
            }
            if (name == "u2") {
                need(2);
                return {GateKind::u, {std::numbers::pi / 2, params[0], params[1]}};
            }
            need(1);
            return {GateKind::u, {0.0, 0.0, params[0]}};
        }
        static constexpr std::string_view other_qelib[] = {"u0", "sx", "sxdg", "cy", "ch", "ccx", "crz", "cu1",
                                                           "cu3", "cswap", "crx", "cry", "cp", "rxx", "rzz", "cu"};
        for (auto g : other_qelib)
            if (name == g)
                unsupported(name_tok, "gate '" + name + "' is outside the supported gate set");
        invalid(name_tok.pos, "undefined gate '" + name + "'");
    }

    void parse_quantum_op(std::optional<Condition> cond)
    {
        const Token head = cur();
        if (head.kind != Tok::ident)
            syntax(head, "expected quantum operation, found " + describe(head));

        if (head.text == "measure") {
            next();
            const Arg q = parse_arg();
            expect_sym("->");
            const Arg c = parse_arg();
            expect_sym(";");
            const auto qs = resolve_qubits(q);
            const auto cs = resolve_bits(c);
            if (qs.size() != cs.size())
                invalid(head.pos, "measure operands have different sizes");
            for (std::size_t k = 0; k < qs.size(); ++k)
                circuit_.instructions.emplace_back(Measure{qs[k], cs[k]});
            return;
        }
        if (head.text == "reset") {
            next();
            const Arg q = parse_arg();
            expect_sym(";");
            for (auto qubit : resolve_qubits(q))
                circuit_.instructions.emplace_back(Reset{qubit, cond});
            return;
        }
        if (head.text == "barrier") {
            next();
            const auto args = parse_arglist();
            expect_sym(";");
            Barrier b;
            for (const auto& a : args)
                for (auto qubit : resolve_qubits(a)) {
                    if (std::find(b.qubits.begin(), b.qubits.end(), qubit) != b.qubits.end())
                        invalid(a.pos, "barrier references a qubit twice");
                    b.qubits.push_back(qubit);
                }
            circuit_.instructions.emplace_back(std::move(b));
            return;
        }

        next();
        std::vector<double> params;
        if (is_sym("(")) {
            next();
            if (!is_sym(")")) {
                params.push_back(parse_angle());
                while (is_sym(",")) {
                    next();
                    params.push_back(parse_angle());
                }
            }
            expect_sym(")");
        }
        const auto args = parse_arglist();
        expect_sym(";");
        auto [kind, resolved] = resolve_gate(head, std::move(params));
        if (args.size() != gate_qubit_count(kind))
            invalid(head.pos, "gate '" + head.text + "' takes " + std::to_string(gate_qubit_count(kind)) +
                                  " qubit arguments, got " + std::to_string(args.size()));
        std::vector<std::vector<std::size_t>> expanded;
        for (const auto& a : args)
            expanded.push_back(resolve_qubits(a));
        const std::size_t width = broadcast_width(expanded, args);
        for (std::size_t k = 0; k < width; ++k) {
            Gate g{kind, resolved, {}, cond};
            for (std::size_t a = 0; a < args.size(); ++a) {
                const std::size_t qubit = args[a].index ? expanded[a][0] : expanded[a][k];
                if (std::find(g.qubits.begin(), g.qubits.end(), qubit) != g.qubits.end())
                    invalid(args[a].pos, "gate operands must be distinct qubits");
                g.qubits.push_back(qubit);
            }
            circuit_.instructions.emplace_back(std::move(g));
        }
    }

    std::vector<Token> toks_;
    std::size_t i_ = 0;
    bool qelib_ = false;
    std::map<std::string, QubitRegister> qregs_;
    Circuit circuit_;
};

} // namespace detail

inline Circuit parse_qasm(std::string_view text)
{
    detail::Lexer lexer(text);
    detail::Parser parser(lexer.run());
    return parser.run();
}

/// 17 significant digits: enough for every double to round-trip exactly.
inline std::string format_angle(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string serialize_qasm(const Circuit& c)
{
    std::string qname = "q";
    while (c.creg_index(qname))
        qname += "_";
    auto qubit = [&](std::size_t i) { return qname + "[" + std::to_string(i) + "]"; };
    auto condition = [](const std::optional<Condition>& cond) {
        return cond ? "if(" + cond->creg + "==" + std::to_string(cond->value) + ") " : std::string();
    };

    std::string out = "OPENQASM 2.0;\ninclude \"qelib1.inc\";\n";
    if (c.num_qubits > 0)
        out += "qreg " + qname + "[" + std::to_string(c.num_qubits) + "];\n";
    for (const auto& r : c.cregs)
        out += "creg " + r.name + "[" + std::to_string(r.size) + "];\n";
    for (const auto& ins : c.instructions) {
        if (const auto* g = std::get_if<Gate>(&ins)) {
            out += condition(g->condition);
            out += gate_name(g->kind);
            if (!g->params.empty()) {
                out += "(";
                for (std::size_t k = 0; k < g->params.size(); ++k)
                    out += (k ? "," : "") + format_angle(g->params[k]);
                out += ")";
            }
            for (std::size_t k = 0; k < g->qubits.size(); ++k)
                out += (k ? "," : " ") + qubit(g->qubits[k]);
        } else if (const auto* m = std::get_if<Measure>(&ins)) {
            out += "measure " + qubit(m->qubit) + " -> " + m->bit.creg + "[" + std::to_string(m->bit.index) + "]";
        } else if (const auto* r = std::get_if<Reset>(&ins)) {
            out += condition(r->condition) + "reset " + qubit(r->qubit);
        } else {
            out += "barrier";
            const auto& qs = std::get<Barrier>(ins).qubits;
            for (std::size_t k = 0; k < qs.size(); ++k)
                out += (k ? "," : " ") + qubit(qs[k]);
        }
        out += ";\n";
    }
    return out;
}

} // namespace qfw::qasm
