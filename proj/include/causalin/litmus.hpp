#pragma once

#include <algorithm>
#include <cctype>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "causalin/c11.hpp"
#include "causalin/errors.hpp"
#include "causalin/label.hpp"
#include "causalin/seqspec.hpp"

namespace causalin {

/// Instruction operand: integer literal, null, register, or the address
/// of a global base (&x).
struct Operand {
    enum class Kind { integer, null, reg, address };

    Kind kind = Kind::null;
    Value value = 0;
    std::string name;

    static Operand integer(Value v) { return {Kind::integer, v, {}}; }
    static Operand null() { return {}; }
    static Operand reg(std::string r) { return {Kind::reg, 0, std::move(r)}; }
    static Operand address(std::string base) { return {Kind::address, 0, std::move(base)}; }

    friend bool operator==(const Operand&, const Operand&) = default;
};

inline std::string to_string(const Operand& o)
{
    switch (o.kind) {
    case Operand::Kind::integer:
        return std::to_string(o.value);
    case Operand::Kind::null:
        return "null";
    case Operand::Kind::reg:
        return o.name;
    case Operand::Kind::address:
        return "&" + o.name;
    }
    return "?";
}

/// A location expression: a static path (x, S.Top) or a field path off the
/// base a register points to ([r0].nxt).
struct LocExpr {
    std::string reg{};
    Location path;

    friend bool operator==(const LocExpr&, const LocExpr&) = default;
};

inline std::string to_string(const LocExpr& l)
{
    if (l.reg.empty()) {
        return to_string(l.path);
    }
    std::string out = "[" + l.reg + "]";
    for (const auto& f : l.path.fields) {
        out += "." + f;
    }
    return out;
}

struct Instr {
    enum class Op { write, read, cas, alloc, invoke, respond, jump, beq, bne, bfail, bok, nop };

    Op op = Op::nop;
    Annotation ann = Annotation::none;
    LocExpr loc{};
    /// write: value. read: -. cas: expected. beq/bne: lhs. invoke: argument.
    /// respond: returned value.
    Operand a{};
    /// cas: new value. beq/bne: rhs.
    Operand b{};
    /// read/alloc destination.
    std::string reg{};
    ObjectId object{};
    std::string method{};
    bool has_arg = false;
    Response::Kind response = Response::Kind::bottom;
    std::string target{};

    friend bool operator==(const Instr&, const Instr&) = default;
};

struct Thread {
    ProcessId name;
    std::vector<Instr> code;
    /// Label name to instruction index (may equal code.size()).
    std::map<std::string, std::size_t> labels;

    friend bool operator==(const Thread&, const Thread&) = default;
};

struct LitmusProgram {
    std::string name;
    std::vector<std::pair<Location, Datum>> init;
    std::vector<Thread> threads;
    /// Declared stacks (used for macro expansion only).
    std::map<ObjectId, StackVariant> stacks;

    friend bool operator==(const LitmusProgram& a, const LitmusProgram& b)
    {
        return a.name == b.name && a.init == b.init && a.threads == b.threads;
    }
};

// ---------------------------------------------------------------------------
// Treiber stack code

/// Appends the code of one stack operation to a thread. Fresh registers
/// and labels are numbered from `fresh`, which is advanced.
inline void emit_stack_op(Thread& t, const ObjectId& object, StackVariant variant,
                          const std::string& method, std::optional<Operand> arg, int& fresh)
{
    auto reg = [&]() { return "r" + std::to_string(fresh++); };
    auto label = [&]() { return "_L" + std::to_string(fresh++); };
    Location top{object, {"Top"}};
    auto push = [&](Instr i) { t.code.push_back(std::move(i)); };
    auto here = [&](const std::string& l) { t.labels[l] = t.code.size(); };

    Instr inv;
    inv.op = Instr::Op::invoke;
    inv.object = object;
    inv.method = method;
    if (arg) {
        inv.has_arg = true;
        inv.a = *arg;
    }

    if (method == "push") {
        if (!arg) {
            throw MalformedInput("push needs a value");
        }
        auto n = reg();
        auto topr = reg();
        auto retry = label();
        push(inv);
        push({.op = Instr::Op::alloc, .reg = n});
        push({.op = Instr::Op::write, .loc = {n, {{}, {"val"}}}, .a = *arg});
        here(retry);
        push({.op = Instr::Op::read, .ann = Annotation::acquire, .loc = {{}, top}, .reg = topr});
        push({.op = Instr::Op::write, .loc = {n, {{}, {"nxt"}}}, .a = Operand::reg(topr)});
        push({.op = Instr::Op::cas, .ann = Annotation::release, .loc = {{}, top},
              .a = Operand::reg(topr), .b = Operand::reg(n)});
        push({.op = Instr::Op::bfail, .target = retry});
        push({.op = Instr::Op::respond, .object = object, .response = Response::Kind::bottom});
        return;
    }
    if (method != "pop") {
        throw MalformedInput("stack has no method '" + method + "'");
    }
    auto topr = reg();
    auto ntop = reg();
    auto val = reg();
    auto retry = label();
    push(inv);
    here(retry);
    push({.op = Instr::Op::read, .ann = Annotation::acquire, .loc = {{}, top}, .reg = topr});
    std::string empty_label;
    if (variant == StackVariant::blocking) {
        push({.op = Instr::Op::beq, .a = Operand::reg(topr), .b = Operand::null(), .target = retry});
    } else {
        empty_label = label();
        push({.op = Instr::Op::beq, .a = Operand::reg(topr), .b = Operand::null(),
              .target = empty_label});
    }
    push({.op = Instr::Op::read, .loc = {topr, {{}, {"nxt"}}}, .reg = ntop});
    push({.op = Instr::Op::cas, .ann = Annotation::release, .loc = {{}, top},
          .a = Operand::reg(topr), .b = Operand::reg(ntop)});
    push({.op = Instr::Op::bfail, .target = retry});
    push({.op = Instr::Op::read, .loc = {topr, {{}, {"val"}}}, .reg = val});
    push({.op = Instr::Op::respond, .a = Operand::reg(val), .object = object,
          .response = Response::Kind::value});
    if (variant == StackVariant::returns_empty) {
        auto done = label();
        push({.op = Instr::Op::jump, .target = done});
        here(empty_label);
        push({.op = Instr::Op::respond, .object = object, .response = Response::Kind::empty});
        here(done);
        push({.op = Instr::Op::nop});
    }
}

// ---------------------------------------------------------------------------
// Parser

namespace detail {

inline bool ident_start(char c)
{
    return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}

inline bool ident_char(char c)
{
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'';
}

inline bool is_ident(std::string_view s)
{
    if (s.empty() || !ident_start(s.front())) {
        return false;
    }
    return std::all_of(s.begin(), s.end(), ident_char);
}

inline bool is_register(std::string_view s)
{
    return s.size() >= 2 && s[0] == 'r' &&
           std::all_of(s.begin() + 1, s.end(),
                       [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
}

struct Token {
    std::string text;
    std::size_t column;
};

class LitmusParser {
  public:
    explicit LitmusParser(std::string_view text) : text_(text) {}

    LitmusProgram parse()
    {
        std::istringstream in{std::string(text_)};
        std::string raw;
        bool header_seen = false;
        std::vector<int> fresh;
        while (std::getline(in, raw)) {
            ++line_;
            auto cut = std::min(raw.find('#'), raw.find("//"));
            std::string content = raw.substr(0, cut);
            if (trim(content).empty()) {
                continue;
            }
            auto toks = tokens(content, 0);
            if (!header_seen) {
                const auto& kw = toks.front().text;
                if (kw == "litmus") {
                    if (toks.size() != 2) {
                        fail("expected 'litmus NAME'", toks.front().column);
                    }
                    prog_.name = toks[1].text;
                    continue;
                }
                if (kw == "init") {
                    for (std::size_t i = 1; i < toks.size(); ++i) {
                        parse_init(toks[i]);
                    }
                    continue;
                }
                if (kw == "stack") {
                    parse_stack(toks);
                    continue;
                }
                parse_header(content);
                header_seen = true;
                fresh.assign(prog_.threads.size(), 100);
                continue;
            }
            std::size_t start = 0;
            std::size_t col = 0;
            while (start <= content.size()) {
                auto bar = content.find('|', start);
                auto cell = content.substr(start, bar == std::string::npos ? std::string::npos
                                                                           : bar - start);
                if (col >= prog_.threads.size()) {
                    if (!trim(cell).empty()) {
                        fail("more cells than threads", start + 1);
                    }
                } else {
                    parse_cell(prog_.threads[col], cell, start, fresh[col]);
                }
                ++col;
                if (bar == std::string::npos) {
                    break;
                }
                start = bar + 1;
            }
        }
        if (!header_seen) {
            fail("missing thread header line", 1);
        }
        for (auto& t : prog_.threads) {
            for (const auto& ins : t.code) {
                if (!ins.target.empty() && !t.labels.contains(ins.target)) {
                    throw ParseError("undefined label '" + ins.target + "' in thread " + t.name,
                                     line_, 1);
                }
            }
        }
        return prog_;
    }

  private:
    [[noreturn]] void fail(const std::string& what, std::size_t column) const
    {
        throw ParseError(what, line_, column);
    }

    std::vector<Token> tokens(std::string_view s, std::size_t offset) const
    {
        std::vector<Token> out;
        std::size_t i = 0;
        while (i < s.size()) {
            if (std::isspace(static_cast<unsigned char>(s[i]))) {
                ++i;
                continue;
            }
            auto j = i;
            while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) {
                ++j;
            }
            out.push_back({std::string(s.substr(i, j - i)), offset + i + 1});
            i = j;
        }
        return out;
    }

    Datum parse_datum(const Token& t, std::string_view text, std::size_t column) const
    {
        if (text == "null") {
            return Datum::null();
        }
        if (!text.empty() && text.front() == '&') {
            if (!is_ident(text.substr(1))) {
                fail("bad address '" + std::string(text) + "'", column);
            }
            return Datum::pointer(std::string(text.substr(1)));
        }
        if (auto v = parse_value(text)) {
            return Datum::integer(*v);
        }
        fail("bad initial value '" + std::string(text) + "' in '" + t.text + "'", column);
    }

    void parse_init(const Token& t)
    {
        auto eq = t.text.find('=');
        if (eq == std::string::npos) {
            fail("expected LOC=VALUE", t.column);
        }
        auto loc = parse_static_location(t.text.substr(0, eq), t.column);
        auto val = parse_datum(t, std::string_view(t.text).substr(eq + 1), t.column + eq + 1);
        for (auto& [l, v] : prog_.init) {
            if (l == loc) {
                v = val;
                return;
            }
        }
        prog_.init.emplace_back(loc, val);
    }

    void parse_stack(const std::vector<Token>& toks)
    {
        if (toks.size() != 3 || !is_ident(toks[1].text)) {
            fail("expected 'stack OBJECT blocking|empty'", toks.front().column);
        }
        StackVariant v;
        if (toks[2].text == "blocking") {
            v = StackVariant::blocking;
        } else if (toks[2].text == "empty") {
            v = StackVariant::returns_empty;
        } else {
            fail("unknown stack variant '" + toks[2].text + "'", toks[2].column);
        }
        prog_.stacks[toks[1].text] = v;
        Location top{toks[1].text, {"Top"}};
        for (const auto& [l, _] : prog_.init) {
            if (l == top) {
                return;
            }
        }
        prog_.init.emplace_back(top, Datum::null());
    }

    void parse_header(std::string_view content)
    {
        std::size_t start = 0;
        while (true) {
            auto bar = content.find('|', start);
            auto name = trim(content.substr(start, bar == std::string_view::npos
                                                       ? std::string_view::npos
                                                       : bar - start));
            if (!is_ident(name)) {
                fail("bad thread name '" + std::string(name) + "'", start + 1);
            }
            prog_.threads.push_back(Thread{std::string(name), {}, {}});
            if (bar == std::string_view::npos) {
                break;
            }
            start = bar + 1;
        }
    }

    Location parse_static_location(std::string_view s, std::size_t column) const
    {
        Location l;
        std::size_t start = 0;
        bool first = true;
        while (true) {
            auto dot = s.find('.', start);
            auto part = s.substr(start, dot == std::string_view::npos ? std::string_view::npos
                                                                       : dot - start);
            if (!is_ident(part)) {
                fail("bad location '" + std::string(s) + "'", column + start);
            }
            if (first) {
                l.base = std::string(part);
                first = false;
            } else {
                l.fields.emplace_back(part);
            }
            if (dot == std::string_view::npos) {
                break;
            }
            start = dot + 1;
        }
        return l;
    }

    LocExpr parse_loc(const Token& t) const
    {
        std::string_view s = t.text;
        if (!s.empty() && s.front() == '[') {
            auto close = s.find(']');
            if (close == std::string_view::npos) {
                fail("missing ']' in location", t.column);
            }
            auto reg = s.substr(1, close - 1);
            if (!is_register(reg)) {
                fail("expected register inside []", t.column + 1);
            }
            auto rest = s.substr(close + 1);
            if (rest.empty() || rest.front() != '.') {
                fail("dereference needs a field", t.column + close + 1);
            }
            auto l = parse_static_location("x" + std::string(rest), t.column + close);
            return {std::string(reg), Location{{}, l.fields}};
        }
        return {{}, parse_static_location(s, t.column)};
    }

    Operand parse_operand(const Token& t) const
    {
        std::string_view s = t.text;
        if (s == "null") {
            return Operand::null();
        }
        if (is_register(s)) {
            return Operand::reg(std::string(s));
        }
        if (!s.empty() && s.front() == '&' && is_ident(s.substr(1))) {
            return Operand::address(std::string(s.substr(1)));
        }
        if (auto v = parse_value(s)) {
            return Operand::integer(*v);
        }
        fail("bad operand '" + t.text + "'", t.column);
    }

    std::string parse_reg(const Token& t) const
    {
        if (!is_register(t.text)) {
            fail("expected register, got '" + t.text + "'", t.column);
        }
        return t.text;
    }

    std::string parse_label_ref(const Token& t) const
    {
        if (!is_ident(t.text)) {
            fail("bad label '" + t.text + "'", t.column);
        }
        return t.text;
    }

    /// Splits "W[rel]" into mnemonic and annotation.
    std::pair<std::string, Annotation> mnemonic(const Token& t) const
    {
        auto open = t.text.find('[');
        if (open == std::string::npos) {
            return {t.text, Annotation::none};
        }
        if (t.text.back() != ']') {
            fail("bad annotation suffix", t.column + open);
        }
        auto ann = t.text.substr(open + 1, t.text.size() - open - 2);
        Annotation a;
        if (ann == "rel") {
            a = Annotation::release;
        } else if (ann == "acq") {
            a = Annotation::acquire;
        } else if (ann == "acqrel" || ann == "relacq") {
            a = Annotation::release_acquire;
        } else if (ann == "rlx") {
            a = Annotation::none;
        } else {
            fail("unknown annotation '" + ann + "'", t.column + open + 1);
        }
        return {t.text.substr(0, open), a};
    }

    void expect_args(const std::vector<Token>& toks, std::size_t n) const
    {
        if (toks.size() != n + 1) {
            fail("'" + toks.front().text + "' expects " + std::to_string(n) + " operand(s)",
                 toks.front().column);
        }
    }

    void parse_cell(Thread& t, std::string_view cell, std::size_t offset, int& fresh)
    {
        auto body = cell;
        std::size_t lead = 0;
        while (lead < body.size() && std::isspace(static_cast<unsigned char>(body[lead]))) {
            ++lead;
        }
        auto colon = body.find(':');
        if (colon != std::string_view::npos) {
            auto lab = trim(body.substr(0, colon));
            if (!is_ident(lab)) {
                fail("bad label '" + std::string(lab) + "'", offset + lead + 1);
            }
            if (t.labels.contains(std::string(lab))) {
                fail("duplicate label '" + std::string(lab) + "'", offset + lead + 1);
            }
            t.labels[std::string(lab)] = t.code.size();
            offset += colon + 1;
            body = body.substr(colon + 1);
        }
        auto toks = tokens(body, offset);
        if (toks.empty()) {
            return;
        }
        auto [m, ann] = mnemonic(toks.front());
        auto annotated = [&](bool allowed) {
            if (!allowed && ann != Annotation::none) {
                fail("'" + m + "' takes no annotation", toks.front().column);
            }
        };
        Instr ins;
        ins.ann = ann;
        if (m == "W") {
            expect_args(toks, 2);
            ins.op = Instr::Op::write;
            ins.loc = parse_loc(toks[1]);
            ins.a = parse_operand(toks[2]);
        } else if (m == "R") {
            expect_args(toks, 2);
            ins.op = Instr::Op::read;
            ins.loc = parse_loc(toks[1]);
            ins.reg = parse_reg(toks[2]);
        } else if (m == "CAS") {
            expect_args(toks, 3);
            ins.op = Instr::Op::cas;
            ins.loc = parse_loc(toks[1]);
            ins.a = parse_operand(toks[2]);
            ins.b = parse_operand(toks[3]);
        } else if (m == "alloc") {
            annotated(false);
            expect_args(toks, 1);
            ins.op = Instr::Op::alloc;
            ins.reg = parse_reg(toks[1]);
        } else if (m == "invoke") {
            annotated(false);
            if (toks.size() != 3 && toks.size() != 4) {
                fail("expected 'invoke OBJECT METHOD [VALUE]'", toks.front().column);
            }
            ins.op = Instr::Op::invoke;
            ins.object = parse_label_ref(toks[1]);
            ins.method = lower(toks[2].text);
            if (toks.size() == 4) {
                ins.has_arg = true;
                ins.a = parse_operand(toks[3]);
            }
        } else if (m == "respond") {
            annotated(false);
            expect_args(toks, 2);
            ins.op = Instr::Op::respond;
            ins.object = parse_label_ref(toks[1]);
            if (toks[2].text == "ok" || toks[2].text == "bot") {
                ins.response = Response::Kind::bottom;
            } else if (toks[2].text == "empty") {
                ins.response = Response::Kind::empty;
            } else {
                ins.response = Response::Kind::value;
                ins.a = parse_operand(toks[2]);
            }
        } else if (m == "goto" || m == "bfail" || m == "bok") {
            annotated(false);
            expect_args(toks, 1);
            ins.op = m == "goto" ? Instr::Op::jump : m == "bfail" ? Instr::Op::bfail : Instr::Op::bok;
            ins.target = parse_label_ref(toks[1]);
        } else if (m == "beq" || m == "bne") {
            annotated(false);
            expect_args(toks, 3);
            ins.op = m == "beq" ? Instr::Op::beq : Instr::Op::bne;
            ins.a = parse_operand(toks[1]);
            ins.b = parse_operand(toks[2]);
            ins.target = parse_label_ref(toks[3]);
        } else if (m == "nop") {
            annotated(false);
            expect_args(toks, 0);
            ins.op = Instr::Op::nop;
        } else if (m == "push" || m == "pop") {
            annotated(false);
            if (toks.size() < 2) {
                fail("expected '" + m + " OBJECT'", toks.front().column);
            }
            auto it = prog_.stacks.find(toks[1].text);
            if (it == prog_.stacks.end()) {
                fail("undeclared stack '" + toks[1].text + "'", toks[1].column);
            }
            std::optional<Operand> arg;
            if (m == "push") {
                expect_args(toks, 2);
                arg = parse_operand(toks[2]);
            } else {
                expect_args(toks, 1);
            }
            emit_stack_op(t, it->first, it->second, m, arg, fresh);
            return;
        } else {
            fail("unknown instruction '" + m + "'", toks.front().column);
        }
        t.code.push_back(std::move(ins));
    }

    std::string_view text_;
    std::size_t line_ = 0;
    LitmusProgram prog_;
};

}  // namespace detail

inline LitmusProgram parse_litmus(std::string_view text)
{
    return detail::LitmusParser(text).parse();
}

// ---------------------------------------------------------------------------
// Printer

inline std::string to_string(const Instr& i)
{
    auto ann = [&]() -> std::string {
        return i.ann == Annotation::none ? "" : std::string("[") + to_string(i.ann) + "]";
    };
    switch (i.op) {
    case Instr::Op::write:
        return "W" + ann() + " " + to_string(i.loc) + " " + to_string(i.a);
    case Instr::Op::read:
        return "R" + ann() + " " + to_string(i.loc) + " " + i.reg;
    case Instr::Op::cas:
        return "CAS" + ann() + " " + to_string(i.loc) + " " + to_string(i.a) + " " + to_string(i.b);
    case Instr::Op::alloc:
        return "alloc " + i.reg;
    case Instr::Op::invoke:
        return "invoke " + i.object + " " + i.method + (i.has_arg ? " " + to_string(i.a) : "");
    case Instr::Op::respond:
        switch (i.response) {
        case Response::Kind::bottom:
            return "respond " + i.object + " ok";
        case Response::Kind::empty:
            return "respond " + i.object + " empty";
        case Response::Kind::value:
            return "respond " + i.object + " " + to_string(i.a);
        }
        break;
    case Instr::Op::jump:
        return "goto " + i.target;
    case Instr::Op::beq:
        return "beq " + to_string(i.a) + " " + to_string(i.b) + " " + i.target;
    case Instr::Op::bne:
        return "bne " + to_string(i.a) + " " + to_string(i.b) + " " + i.target;
    case Instr::Op::bfail:
        return "bfail " + i.target;
    case Instr::Op::bok:
        return "bok " + i.target;
    case Instr::Op::nop:
        return "nop";
    }
    return "?";
}

/// Column-format text that parses back to an equal program.
inline std::string print_litmus(const LitmusProgram& p)
{
    std::ostringstream out;
    if (!p.name.empty()) {
        out << "litmus " << p.name << "\n";
    }
    if (!p.init.empty()) {
        out << "init";
        for (const auto& [l, v] : p.init) {
            out << " " << to_string(l) << "=" << to_string(v);
        }
        out << "\n";
    }
    std::vector<std::vector<std::string>> columns;
    std::size_t rows = 0;
    for (const auto& t : p.threads) {
        std::vector<std::string> cells;
        std::map<std::size_t, std::vector<std::string>> at;
        for (const auto& [name, idx] : t.labels) {
            at[idx].push_back(name);
        }
        for (std::size_t i = 0; i <= t.code.size(); ++i) {
            auto labels = at.find(i);
            if (labels != at.end()) {
                for (std::size_t k = 0; k + 1 < labels->second.size(); ++k) {
                    cells.push_back(labels->second[k] + ":");
                }
            }
            std::string prefix = labels != at.end() ? labels->second.back() + ": " : "";
            if (i < t.code.size()) {
                cells.push_back(prefix + to_string(t.code[i]));
            } else if (!prefix.empty()) {
                cells.push_back(prefix.substr(0, prefix.size() - 1));
            }
        }
        rows = std::max(rows, cells.size());
        columns.push_back(std::move(cells));
    }
    std::vector<std::size_t> width(p.threads.size(), 0);
    for (std::size_t c = 0; c < p.threads.size(); ++c) {
        width[c] = p.threads[c].name.size();
        for (const auto& cell : columns[c]) {
            width[c] = std::max(width[c], cell.size());
        }
    }
    auto row = [&](auto&& cell_of) {
        std::string line;
        for (std::size_t c = 0; c < p.threads.size(); ++c) {
            std::string cell = cell_of(c);
            if (c + 1 < p.threads.size()) {
                cell.resize(width[c], ' ');
                line += cell + " | ";
            } else {
                line += cell;
            }
        }
        while (!line.empty() && line.back() == ' ') {
            line.pop_back();
        }
        out << line << "\n";
    };
    row([&](std::size_t c) { return p.threads[c].name; });
    for (std::size_t r = 0; r < rows; ++r) {
        row([&](std::size_t c) { return r < columns[c].size() ? columns[c][r] : std::string(); });
    }
    return out.str();
}

/// A client program: per thread, a list of stack operations.
struct ClientOp {
    ObjectId object;
    std::string method;
    std::optional<Value> value;
};

/// Treiber stack code for the given client threads, one stack variant for
/// all objects. Threads are named P0, P1, ...
inline LitmusProgram treiber_program(const std::vector<std::vector<ClientOp>>& threads,
                                     StackVariant variant, const std::string& name = "treiber")
{
    LitmusProgram p;
    p.name = name;
    for (std::size_t t = 0; t < threads.size(); ++t) {
        Thread th{"P" + std::to_string(t), {}, {}};
        int fresh = 100;
        for (const auto& op : threads[t]) {
            if (!p.stacks.contains(op.object)) {
                p.stacks[op.object] = variant;
                p.init.emplace_back(Location{op.object, {"Top"}}, Datum::null());
            }
            std::optional<Operand> arg;
            if (op.value) {
                arg = Operand::integer(*op.value);
            }
            emit_stack_op(th, op.object, variant, op.method, arg, fresh);
        }
        p.threads.push_back(std::move(th));
    }
    return p;
}

}  // namespace causalin
