#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "causalin/c11.hpp"
#include "causalin/errors.hpp"
#include "causalin/exstruct.hpp"

namespace causalin {

using Json = nlohmann::ordered_json;

inline std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw MalformedInput("cannot read '" + path + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Parses JSON text; syntax errors carry line and column.
inline Json parse_json(const std::string& text)
{
    try {
        return Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        std::size_t line = 1;
        std::size_t col = 1;
        for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        std::string what = e.what();
        if (auto p = what.find("parse error"); p != std::string::npos) {
            what = what.substr(p);
        }
        throw ParseError(what, line, col);
    }
}

namespace detail {

inline const Json& field(const Json& j, const char* key, const std::string& where)
{
    if (!j.is_object() || !j.contains(key)) {
        throw MalformedInput(where + ": missing \"" + key + "\"");
    }
    return j.at(key);
}

inline std::string string_field(const Json& j, const char* key, const std::string& where)
{
    const auto& v = field(j, key, where);
    if (!v.is_string()) {
        throw MalformedInput(where + ": \"" + key + "\" must be a string");
    }
    return v.get<std::string>();
}

inline std::vector<TagPair> tag_pairs(const Json& j, const char* key)
{
    std::vector<TagPair> out;
    if (!j.contains(key)) {
        return out;
    }
    const auto& arr = j.at(key);
    if (!arr.is_array()) {
        throw MalformedInput(std::string("\"") + key + "\" must be an array of tag pairs");
    }
    for (const auto& p : arr) {
        if (!p.is_array() || p.size() != 2 || !p[0].is_string() || !p[1].is_string()) {
            throw MalformedInput(std::string("\"") + key + "\": bad pair " + p.dump());
        }
        out.emplace_back(p[0].get<std::string>(), p[1].get<std::string>());
    }
    return out;
}

inline Json pairs_json(const std::vector<TagPair>& pairs)
{
    Json arr = Json::array();
    for (const auto& [a, b] : pairs) {
        arr.push_back(Json::array({a, b}));
    }
    return arr;
}

inline Json response_json(const Response& r)
{
    if (r.kind == Response::Kind::value) {
        return r.value;
    }
    return to_string(r);
}

inline Response response_from(const Json& j)
{
    if (j.is_number_integer()) {
        return Response::of(j.get<Value>());
    }
    if (j.is_string()) {
        return parse_response(j.get<std::string>());
    }
    throw MalformedInput("bad response " + j.dump());
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Execution structures

inline Json to_json(const ExecutionStructure& s)
{
    Json events = Json::array();
    for (const auto& e : s.events()) {
        Json je;
        je["tag"] = e.tag;
        je["process"] = e.process;
        je["object"] = e.object();
        je["invocation"] = invocation_text(e.invocation);
        je["response"] = e.response ? detail::response_json(*e.response) : Json(nullptr);
        events.push_back(std::move(je));
    }
    Json j;
    j["events"] = std::move(events);
    j["hard"] = detail::pairs_json(s.hard_pairs());
    j["soft"] = detail::pairs_json(s.soft_pairs());
    return j;
}

inline ExecutionStructure structure_from_json(const Json& j)
{
    const auto& arr = detail::field(j, "events", "structure");
    if (!arr.is_array()) {
        throw MalformedInput("structure: \"events\" must be an array");
    }
    std::vector<Event> events;
    for (const auto& je : arr) {
        auto tag = detail::string_field(je, "tag", "event");
        auto where = "event '" + tag + "'";
        Event e;
        e.tag = tag;
        e.process = detail::string_field(je, "process", where);
        e.invocation = parse_invocation(detail::string_field(je, "object", where),
                                        detail::string_field(je, "invocation", where));
        if (je.contains("response") && !je.at("response").is_null()) {
            e.response = detail::response_from(je.at("response"));
        }
        events.push_back(std::move(e));
    }
    std::set<ObjectId> objects;
    if (j.contains("objects")) {
        for (const auto& o : j.at("objects")) {
            objects.insert(o.get<std::string>());
        }
    }
    return ExecutionStructure::from_tag_pairs(std::move(events), detail::tag_pairs(j, "hard"),
                                              detail::tag_pairs(j, "soft"), std::move(objects));
}

// ---------------------------------------------------------------------------
// Histories: {"actions":[{"tag","process","kind":"inv"|"res","object",
// "invocation"|"response"}], "order":[[tag,tag]]}. Without "order" the
// actions are totally ordered as listed.

inline Json to_json(const History& h)
{
    Json actions = Json::array();
    for (const auto& a : h.actions()) {
        Json ja;
        ja["tag"] = a.tag;
        ja["process"] = a.process;
        ja["object"] = a.object();
        if (a.kind == HistoryAction::Kind::invocation) {
            ja["kind"] = "inv";
            ja["invocation"] = invocation_text(a.invocation);
        } else {
            ja["kind"] = "res";
            ja["response"] = detail::response_json(a.response);
        }
        actions.push_back(std::move(ja));
    }
    std::vector<TagPair> order;
    for (const auto& [a, b] : h.order().pairs()) {
        order.emplace_back(h.action(a).tag, h.action(b).tag);
    }
    Json j;
    j["actions"] = std::move(actions);
    j["order"] = detail::pairs_json(order);
    return j;
}

inline History history_from_json(const Json& j)
{
    const auto& arr = detail::field(j, "actions", "history");
    std::vector<HistoryAction> actions;
    for (const auto& ja : arr) {
        auto tag = detail::string_field(ja, "tag", "action");
        auto where = "action '" + tag + "'";
        auto process = detail::string_field(ja, "process", where);
        auto object = detail::string_field(ja, "object", where);
        auto kind = detail::string_field(ja, "kind", where);
        if (kind == "inv") {
            actions.push_back(HistoryAction::invoke(
                tag, process, parse_invocation(object, detail::string_field(ja, "invocation", where))));
        } else if (kind == "res") {
            actions.push_back(HistoryAction::respond(
                tag, process, object, detail::response_from(detail::field(ja, "response", where))));
        } else {
            throw MalformedInput(where + ": kind must be \"inv\" or \"res\"");
        }
    }
    if (!j.contains("order")) {
        return History::from_sequence(std::move(actions));
    }
    return History::from_tag_pairs(std::move(actions), detail::tag_pairs(j, "order"));
}

// ---------------------------------------------------------------------------
// C11 executions. Data: null, an integer, or "&base" for a pointer.

inline Json to_json(const Datum& d)
{
    switch (d.kind) {
    case Datum::Kind::null:
        return nullptr;
    case Datum::Kind::integer:
        return d.value;
    case Datum::Kind::pointer:
        break;
    }
    return "&" + d.pointee;
}

inline Datum datum_from_json(const Json& j)
{
    if (j.is_null()) {
        return Datum::null();
    }
    if (j.is_number_integer()) {
        return Datum::integer(j.get<Value>());
    }
    if (j.is_string()) {
        auto s = j.get<std::string>();
        if (s == "null") {
            return Datum::null();
        }
        if (s.size() > 1 && s[0] == '&') {
            return Datum::pointer(s.substr(1));
        }
        if (auto v = detail::parse_value(s)) {
            return Datum::integer(*v);
        }
    }
    throw MalformedInput("bad value " + j.dump());
}

inline EventKind event_kind_from(const std::string& s)
{
    for (auto k : {EventKind::read, EventKind::write, EventKind::update, EventKind::invocation,
                   EventKind::response, EventKind::allocation}) {
        if (s == to_string(k)) {
            return k;
        }
    }
    throw MalformedInput("unknown event kind '" + s + "' (expected R, W, U, inv, res or alloc)");
}

inline Annotation annotation_from(const std::string& s)
{
    for (auto a : {Annotation::none, Annotation::release, Annotation::acquire,
                   Annotation::release_acquire}) {
        if (s == to_string(a)) {
            return a;
        }
    }
    throw MalformedInput("unknown annotation '" + s + "' (expected rlx, rel, acq or acqrel)");
}

inline Json to_json(const C11Execution& d)
{
    Json events = Json::array();
    for (const auto& e : d.events()) {
        Json je;
        je["tag"] = e.tag;
        je["process"] = e.process;
        je["kind"] = to_string(e.kind);
        if (!e.location.empty()) {
            je["location"] = to_string(e.location);
        }
        if (e.is_query()) {
            je["rval"] = to_json(e.rval);
        }
        if (e.is_mod()) {
            je["wval"] = to_json(e.wval);
        }
        if (e.is_memory()) {
            je["ann"] = to_string(e.annotation);
        }
        if (!e.object.empty()) {
            je["object"] = e.object;
        }
        if (e.kind == EventKind::invocation) {
            je["invocation"] = invocation_text(e.invocation);
        }
        if (e.kind == EventKind::response) {
            je["response"] = detail::response_json(e.response);
        }
        events.push_back(std::move(je));
    }
    Json j;
    j["events"] = std::move(events);
    j["sb"] = detail::pairs_json(d.tag_pairs(d.sb()));
    j["rf"] = detail::pairs_json(d.tag_pairs(d.rf()));
    j["mo"] = detail::pairs_json(d.tag_pairs(d.mo()));
    return j;
}

inline C11Execution execution_from_json(const Json& j)
{
    const auto& arr = detail::field(j, "events", "execution");
    std::vector<MemoryEvent> events;
    for (const auto& je : arr) {
        MemoryEvent e;
        e.tag = detail::string_field(je, "tag", "event");
        auto where = "event '" + e.tag + "'";
        e.process = detail::string_field(je, "process", where);
        e.kind = event_kind_from(detail::string_field(je, "kind", where));
        if (je.contains("object")) {
            e.object = detail::string_field(je, "object", where);
        }
        if (e.kind != EventKind::invocation && e.kind != EventKind::response) {
            e.location = parse_location(detail::string_field(je, "location", where));
        }
        if (e.is_query()) {
            e.rval = datum_from_json(detail::field(je, "rval", where));
        }
        if (e.is_mod()) {
            e.wval = datum_from_json(detail::field(je, "wval", where));
        }
        if (je.contains("ann")) {
            e.annotation = annotation_from(detail::string_field(je, "ann", where));
        }
        if (e.kind == EventKind::invocation) {
            e.invocation = parse_invocation(detail::string_field(je, "object", where),
                                            detail::string_field(je, "invocation", where));
        }
        if (e.kind == EventKind::response) {
            detail::string_field(je, "object", where);
            e.response = detail::response_from(detail::field(je, "response", where));
        }
        events.push_back(std::move(e));
    }
    return C11Execution::from_tag_pairs(std::move(events), detail::tag_pairs(j, "sb"),
                                        detail::tag_pairs(j, "rf"), detail::tag_pairs(j, "mo"));
}

/// True for documents shaped like a C11 execution rather than a structure.
inline bool is_execution_json(const Json& j)
{
    return j.is_object() && (j.contains("sb") || j.contains("rf") || j.contains("mo"));
}

inline bool is_history_json(const Json& j)
{
    return j.is_object() && j.contains("actions");
}

}  // namespace causalin
