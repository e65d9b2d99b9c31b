#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "causalin/errors.hpp"

namespace causalin {

using Value = std::int64_t;
using ObjectId = std::string;
using EventTag = std::string;
using ProcessId = std::string;

/// Finite value domain used by the sequential specs (sorted, unique).
using ValueDomain = std::vector<Value>;

inline ValueDomain default_domain(int size)
{
    ValueDomain d;
    for (int v = 1; v <= size; ++v) {
        d.push_back(v);
    }
    return d;
}

inline ValueDomain merge_domains(ValueDomain a, const ValueDomain& b)
{
    a.insert(a.end(), b.begin(), b.end());
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
    return a;
}

/// An operation invocation on one object: method name (lower case) and an
/// optional argument.
struct Invocation {
    ObjectId object;
    std::string method;
    std::optional<Value> argument;

    friend auto operator<=>(const Invocation&, const Invocation&) = default;
};

struct Response {
    enum class Kind : std::uint8_t { bottom, value, empty };

    Kind kind = Kind::bottom;
    Value value = 0;

    static Response bottom() { return {Kind::bottom, 0}; }
    static Response of(Value v) { return {Kind::value, v}; }
    static Response empty() { return {Kind::empty, 0}; }

    friend auto operator<=>(const Response&, const Response&) = default;
};

/// An element of an object's alphabet: invocation paired with response.
struct Label {
    Invocation invocation;
    Response response;

    const ObjectId& object() const { return invocation.object; }

    friend auto operator<=>(const Label&, const Label&) = default;
};

using LabelSequence = std::vector<Label>;

namespace detail {

inline std::string lower(std::string_view s)
{
    std::string out(s);
    for (auto& c : out) {
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    return out;
}

inline std::string_view trim(std::string_view s)
{
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
        s.remove_prefix(1);
    }
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
        s.remove_suffix(1);
    }
    return s;
}

inline std::optional<Value> parse_value(std::string_view s)
{
    s = trim(s);
    Value v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
        return std::nullopt;
    }
    return v;
}

}  // namespace detail

inline std::string method_display(const std::string& method)
{
    std::string out = method;
    if (!out.empty()) {
        out[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(out[0])));
    }
    return out;
}

/// "Push(42)" / "Pop" -- without the object prefix.
inline std::string invocation_text(const Invocation& inv)
{
    std::string out = method_display(inv.method);
    if (inv.argument) {
        out += "(" + std::to_string(*inv.argument) + ")";
    }
    return out;
}

inline std::string to_string(const Response& r)
{
    switch (r.kind) {
    case Response::Kind::bottom:
        return "bot";
    case Response::Kind::empty:
        return "empty";
    case Response::Kind::value:
        break;
    }
    return std::to_string(r.value);
}

inline std::string to_string(const Invocation& inv)
{
    return inv.object + "." + invocation_text(inv);
}

/// Paper-style rendering, e.g. "(S.Push(42),bot)".
inline std::string to_string(const Label& l)
{
    return "(" + to_string(l.invocation) + "," + to_string(l.response) + ")";
}

/// Parses "Push(42)", "pop", "Write(3)" for the given object.
inline Invocation parse_invocation(const ObjectId& object, std::string_view text)
{
    text = detail::trim(text);
    Invocation inv{object, {}, std::nullopt};
    auto open = text.find('(');
    if (open == std::string_view::npos) {
        inv.method = detail::lower(text);
    } else {
        if (text.back() != ')') {
            throw MalformedInput("invocation '" + std::string(text) + "': missing ')'");
        }
        inv.method = detail::lower(detail::trim(text.substr(0, open)));
        auto arg = detail::parse_value(text.substr(open + 1, text.size() - open - 2));
        if (!arg) {
            throw MalformedInput("invocation '" + std::string(text) + "': bad argument");
        }
        inv.argument = arg;
    }
    if (inv.method.empty()) {
        throw MalformedInput("invocation with empty method name");
    }
    return inv;
}

/// Parses "bot" / "⊥" / "ok" / "empty" / an integer.
inline Response parse_response(std::string_view text)
{
    text = detail::trim(text);
    auto low = detail::lower(text);
    if (low == "bot" || low == "ok" || text == "⊥") {
        return Response::bottom();
    }
    if (low == "empty") {
        return Response::empty();
    }
    if (auto v = detail::parse_value(text)) {
        return Response::of(*v);
    }
    throw MalformedInput("unrecognised response '" + std::string(text) + "'");
}

}  // namespace causalin
