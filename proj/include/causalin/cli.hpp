#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "causalin/c11.hpp"
#include "causalin/checker.hpp"
#include "causalin/enumerate.hpp"
#include "causalin/exstruct.hpp"
#include "causalin/hbsim.hpp"
#include "causalin/io.hpp"
#include "causalin/litmus.hpp"
#include "causalin/seqspec.hpp"

#ifndef CAUSALIN_DEFAULT_CORPUS
#define CAUSALIN_DEFAULT_CORPUS "corpus"
#endif

namespace causalin::cli {

inline constexpr const char* report_schema = "causalin.report/1";
inline constexpr std::uint64_t default_seed = 20240101;

enum Status { ok = 0, failed = 1, usage = 2 };

struct Config {
    std::string command;
    std::vector<std::string> inputs;
    std::string spec = "stack-blocking";
    int values = 3;
    std::string format = "text";
    std::string bounds = "retries=2,values=3";
    std::uint64_t seed = default_seed;
    bool force = false;
    bool all = false;
    bool close = false;
    bool equiv = false;
    bool fallback = false;
    bool props = false;
    bool summary = false;
    bool real_time = false;
    std::string object;
    std::string corpus_dir;
    std::string manifest;
};

/// A finished command: exit status, JSON report and its text rendering.
struct Outcome {
    int status = ok;
    Json report;
    std::string text;
};

inline Json report_header(const Config& cfg)
{
    Json j;
    j["schema"] = report_schema;
    j["command"] = cfg.command;
    j["seed"] = cfg.seed;
    return j;
}

/// Schema check used on reports read back in.
inline bool well_formed_report(const Json& j)
{
    return j.is_object() && j.value("schema", "") == report_schema && j.contains("command") &&
           j.at("command").is_string() && j.contains("verdict") && j.at("verdict").is_string();
}

namespace detail {

struct Document {
    std::string source;
    Json json;
};

/// A whole JSON document, an array of documents, or JSON lines.
inline std::vector<Document> parse_documents(const std::string& text, const std::string& source)
{
    std::vector<Document> out;
    try {
        auto j = parse_json(text);
        if (j.is_array()) {
            for (std::size_t i = 0; i < j.size(); ++i) {
                out.push_back({source + "[" + std::to_string(i) + "]", j[i]});
            }
        } else {
            out.push_back({source, std::move(j)});
        }
        return out;
    } catch (const ParseError& whole) {
        std::istringstream lines(text);
        std::string line;
        std::size_t no = 0;
        std::size_t docs = 0;
        while (std::getline(lines, line)) {
            ++no;
            if (::causalin::detail::trim(line).empty()) {
                continue;
            }
            try {
                out.push_back({source + ":" + std::to_string(no), parse_json(line)});
                ++docs;
            } catch (const ParseError& e) {
                if (docs == 0) {
                    throw whole;
                }
                throw ParseError(e.what(), no, e.column);
            }
        }
        if (out.empty()) {
            throw whole;
        }
    }
    return out;
}

inline std::vector<Document> load(const Config& cfg, std::istream& in)
{
    std::vector<Document> docs;
    auto inputs = cfg.inputs.empty() ? std::vector<std::string>{"-"} : cfg.inputs;
    for (const auto& path : inputs) {
        std::string text;
        if (path == "-") {
            std::ostringstream ss;
            ss << in.rdbuf();
            text = ss.str();
        } else {
            text = read_file(path);
        }
        try {
            auto more = parse_documents(text, path == "-" ? "<stdin>" : path);
            docs.insert(docs.end(), more.begin(), more.end());
        } catch (const ParseError& e) {
            throw ParseError(std::string(e.what()).substr(std::string(e.what()).find(": ") + 2) +
                                 " in " + (path == "-" ? "<stdin>" : path),
                             e.line, e.column);
        }
    }
    if (docs.empty()) {
        throw MalformedInput("no input documents");
    }
    if (docs.size() > 1 && !cfg.all) {
        throw MalformedInput(std::to_string(docs.size()) + " input documents; pass --all to check each");
    }
    return docs;
}

inline void require_spec(const std::string& name)
{
    const auto& names = spec_names();
    if (std::find(names.begin(), names.end(), name) == names.end()) {
        std::string valid;
        for (const auto& n : names) {
            valid += (valid.empty() ? "" : ", ") + n;
        }
        throw PreconditionFailed("unknown spec '" + name + "' (valid: " + valid + ")");
    }
}

inline StackVariant stack_variant(const std::string& spec)
{
    if (spec == "stack-blocking") {
        return StackVariant::blocking;
    }
    if (spec == "stack-empty") {
        return StackVariant::returns_empty;
    }
    throw PreconditionFailed("spec '" + spec + "' has no stack implementation to simulate");
}

inline void note_values(ValueDomain& dom, const Invocation& inv, const std::optional<Response>& r)
{
    if (inv.argument) {
        dom.push_back(*inv.argument);
    }
    if (r && r->kind == Response::Kind::value) {
        dom.push_back(r->value);
    }
}

/// The configured domain plus every value occurring in the structure.
inline ValueDomain domain_for(const ExecutionStructure& s, int size)
{
    ValueDomain extra;
    for (const auto& e : s.events()) {
        note_values(extra, e.invocation, e.response);
    }
    return merge_domains(default_domain(size), extra);
}

inline ValueDomain domain_for(const C11Execution& d, int size)
{
    ValueDomain extra;
    for (const auto& e : d.events()) {
        if (e.kind == EventKind::invocation) {
            note_values(extra, e.invocation, std::nullopt);
        } else if (e.kind == EventKind::response) {
            note_values(extra, Invocation{}, e.response);
        }
    }
    return merge_domains(default_domain(size), extra);
}

inline SequentialObject spec_for(const Config& cfg, const ExecutionStructure& s)
{
    return spec_by_name(cfg.spec, s.objects(), domain_for(s, cfg.values));
}

inline ExecutionStructure structure_of(const Json& j)
{
    if (is_execution_json(j)) {
        return exec_structure(execution_from_json(j));
    }
    if (is_history_json(j)) {
        auto closed = close(from_history(history_from_json(j)));
        if (!closed.ok()) {
            throw InvariantViolation("exec(h) failed to close: " + describe(*closed.failure));
        }
        return closed.value();
    }
    return structure_from_json(j);
}

inline Json tuple_json(const std::vector<EventTag>& tags)
{
    Json arr = Json::array();
    for (const auto& t : tags) {
        arr.push_back(t);
    }
    return arr;
}

inline std::string tuple_text(const std::vector<EventTag>& tags)
{
    std::string out = "(";
    for (std::size_t i = 0; i < tags.size(); ++i) {
        out += (i ? ", " : "") + tags[i];
    }
    return out + ")";
}

inline std::string event_text(const ExecutionStructure& s, const EventTag& tag)
{
    return tag + "=" + to_string(s.event(s.require_index(tag)));
}

inline std::string events_text(const std::vector<Event>& k)
{
    std::string out;
    for (const auto& e : k) {
        out += (out.empty() ? "" : " ; ") + e.tag + "=" + to_string(e);
    }
    return out;
}

inline Json rejections_json(const Rejections& r)
{
    Json j;
    j["illegal"] = r.illegal;
    j["hard_violated"] = r.hard_violated;
    j["soft_missing"] = r.soft_missing;
    return j;
}

inline Json sequence_json(const std::vector<Event>& k)
{
    Json arr = Json::array();
    for (const auto& e : k) {
        arr.push_back(Json{{"tag", e.tag}, {"label", to_string(e)}});
    }
    return arr;
}

inline CheckOptions check_options(const Config& cfg)
{
    CheckOptions opt;
    opt.force = cfg.force;
    return opt;
}

/// Merges per-document results: one document is reported flat, several as
/// "cases" with a summary.
inline Outcome merge(const Config& cfg, std::vector<Outcome> parts, const std::string& all_pass,
                     const std::string& some_fail)
{
    Outcome out;
    out.report = report_header(cfg);
    if (parts.size() == 1 && !cfg.all) {
        for (auto& [k, v] : parts[0].report.items()) {
            out.report[k] = v;
        }
        out.status = parts[0].status;
        out.text = parts[0].text;
        return out;
    }
    Json cases = Json::array();
    std::size_t passed = 0;
    for (auto& p : parts) {
        passed += p.status == ok;
        cases.push_back(std::move(p.report));
        out.text += p.text;
    }
    out.status = passed == parts.size() ? ok : failed;
    out.report["verdict"] = out.status == ok ? all_pass : some_fail;
    out.report["summary"] = Json{{"total", parts.size()}, {"passed", passed}};
    out.report["cases"] = std::move(cases);
    out.text += std::to_string(passed) + "/" + std::to_string(parts.size()) + " passed: " +
                (out.status == ok ? all_pass : some_fail) + "\n";
    return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Commands

inline Outcome cmd_validate(const Config& cfg, std::istream& in)
{
    std::vector<Outcome> parts;
    for (const auto& doc : detail::load(cfg, in)) {
        Outcome o;
        std::ostringstream t;
        o.report["input"] = doc.source;
        if (is_execution_json(doc.json)) {
            auto d = execution_from_json(doc.json);
            auto v = validate(d);
            auto c = consistent(d);
            Json clauses;
            for (const auto& cl : v.clauses) {
                clauses[cl.clause] = cl.violations;
                t << cl.clause << ": " << (cl.pass() ? "pass" : "FAIL") << "\n";
                for (const auto& m : cl.violations) {
                    t << "  " << m << "\n";
                }
            }
            o.report["kind"] = "execution";
            o.report["clauses"] = clauses;
            o.report["C1"] = c.c1();
            o.report["C2"] = c.c2();
            t << "C1: " << (c.c1() ? "pass" : "FAIL") << "\n";
            t << "C2: " << (c.c2() ? "pass" : "FAIL") << "\n";
            o.status = v.pass() && c.pass() ? ok : failed;
            o.report["verdict"] = o.status == ok ? "valid and consistent" : "invalid or inconsistent";
        } else if (is_history_json(doc.json)) {
            auto h = history_from_json(doc.json);
            auto ops = h.matching_pairs();
            std::size_t pending = 0;
            for (const auto& op : ops) {
                pending += !op.response;
            }
            o.report["kind"] = "history";
            o.report["operations"] = ops.size();
            o.report["pending"] = pending;
            o.report["total"] = h.total();
            o.report["verdict"] = "well-formed";
            t << "well-formed history: " << ops.size() << " operations, " << pending << " pending"
              << (h.total() ? ", totally ordered" : "") << "\n";
        } else {
            auto s = structure_from_json(doc.json);
            auto r = validate_axioms(s);
            Json axioms;
            for (std::size_t a = 0; a < 4; ++a) {
                const auto& v = r.axioms[a];
                Json viol = Json::array();
                t << axiom_name(static_cast<Axiom>(a)) << ": " << (v.pass() ? "pass" : "FAIL") << "\n";
                for (const auto& x : v.violations) {
                    viol.push_back(Json{{"rule", x.rule}, {"tuple", detail::tuple_json(x.tuple)}});
                    t << "  " << x.rule << " " << detail::tuple_text(x.tuple) << "\n";
                }
                axioms[axiom_name(static_cast<Axiom>(a))] = viol;
            }
            o.report["kind"] = "structure";
            o.report["axioms"] = axioms;
            o.status = r.pass() ? ok : failed;
            o.report["verdict"] = r.pass() ? "valid" : "invalid";
            if (cfg.close) {
                auto c = close(s);
                if (c.ok()) {
                    Json added = Json::array();
                    for (const auto& p : c.value().hard_pairs()) {
                        if (!s.has_hard(p.first, p.second)) {
                            added.push_back(Json::array({p.first, p.second}));
                            t << "closure adds hard " << p.first << " -> " << p.second << "\n";
                        }
                    }
                    o.report["closure"] = Json{{"ok", true}, {"added_hard", added},
                                               {"structure", to_json(c.value())}};
                    o.status = ok;
                    o.report["verdict"] = "closes";
                } else {
                    o.report["closure"] = Json{{"ok", false}, {"failure", describe(*c.failure)},
                                               {"saturated", to_json(c.failure->saturated)}};
                    t << "closure fails: " << describe(*c.failure) << "\n";
                    o.status = failed;
                    o.report["verdict"] = "closure fails";
                }
            }
        }
        t << o.report["verdict"].get<std::string>() << "\n";
        o.text = t.str();
        parts.push_back(std::move(o));
    }
    return detail::merge(cfg, std::move(parts), "all valid", "some invalid");
}

inline Outcome check_lin_one(const Config& cfg, const detail::Document& doc)
{
    Outcome o;
    std::ostringstream t;
    auto s = detail::structure_of(doc.json);
    if (!cfg.object.empty()) {
        if (!s.objects().contains(cfg.object)) {
            throw PreconditionFailed("no object '" + cfg.object + "' in " + doc.source);
        }
        s = restrict(s, cfg.object);
    }
    auto spec = detail::spec_for(cfg, s);
    auto opt = detail::check_options(cfg);
    o.report["input"] = doc.source;
    o.report["spec"] = cfg.spec;
    if (!cfg.object.empty()) {
        o.report["object"] = cfg.object;
    }
    o.report["events"] = s.size();
    if (!s.complete()) {
        auto v = complete_and_check(s, CompletableExtension::standard(spec), opt);
        o.report["substitutions_tried"] = v.substitutions_tried;
        o.status = v.linearizable ? ok : failed;
        o.report["verdict"] = v.linearizable ? "causally linearizable" : "not causally linearizable";
        o.report["witness"] = detail::sequence_json(v.witness.sequence);
        t << o.report["verdict"].get<std::string>() << " (after completing "
          << v.substitutions_tried << " substitution(s))\n";
        if (v.linearizable) {
            t << "witness: " << detail::events_text(v.witness.sequence) << "\n";
        }
    } else {
        auto w = cfg.real_time ? real_time_linearizable(s, spec, opt) : causally_linearizable(s, spec, opt);
        const std::string what = cfg.real_time ? "linearizable in real time" : "causally linearizable";
        o.status = w.linearizable ? ok : failed;
        o.report["verdict"] = w.linearizable ? what : "not " + what;
        o.report["witness"] = detail::sequence_json(w.sequence);
        o.report["rejections"] = detail::rejections_json(w.rejections);
        o.report["candidates"] = w.candidates;
        t << doc.source << (cfg.object.empty() ? "" : " restricted to " + cfg.object) << ": "
          << o.report["verdict"].get<std::string>() << "\n";
        if (w.linearizable) {
            t << "witness: " << detail::events_text(w.sequence) << "\n";
        } else {
            t << "rejected " << w.rejections.total() << " candidate orders: illegal "
              << w.rejections.illegal << ", hard violated " << w.rejections.hard_violated
              << ", soft missing " << w.rejections.soft_missing << "\n";
        }
    }
    o.text = t.str();
    return o;
}

inline Outcome cmd_check_lin(const Config& cfg, std::istream& in)
{
    detail::require_spec(cfg.spec);
    std::vector<Outcome> parts;
    for (const auto& doc : detail::load(cfg, in)) {
        parts.push_back(check_lin_one(cfg, doc));
    }
    return detail::merge(cfg, std::move(parts), "all causally linearizable",
                         "not all causally linearizable");
}

inline Outcome cmd_check_classic(const Config& cfg, std::istream& in)
{
    detail::require_spec(cfg.spec);
    std::vector<Outcome> parts;
    for (const auto& doc : detail::load(cfg, in)) {
        Outcome o;
        std::ostringstream t;
        auto h = history_from_json(doc.json);
        std::set<ObjectId> objects;
        ValueDomain extra;
        for (const auto& a : h.actions()) {
            objects.insert(a.object());
            if (a.kind == HistoryAction::Kind::invocation) {
                detail::note_values(extra, a.invocation, std::nullopt);
            } else {
                detail::note_values(extra, Invocation{}, a.response);
            }
        }
        auto spec = spec_by_name(cfg.spec, objects, merge_domains(default_domain(cfg.values), extra));
        auto opt = detail::check_options(cfg);
        auto v = classically_linearizable(h, spec, opt);
        o.report["input"] = doc.source;
        o.report["spec"] = cfg.spec;
        o.report["order"] = detail::tuple_json(v.order);
        o.report["candidates"] = v.candidates;
        o.status = v.linearizable ? ok : failed;
        o.report["verdict"] = v.linearizable ? "linearizable" : "not linearizable";
        t << doc.source << ": " << o.report["verdict"].get<std::string>() << "\n";
        if (v.linearizable) {
            t << "order: " << detail::tuple_text(v.order) << "\n";
        }
        if (cfg.equiv) {
            auto e = equiv_total_order(h, spec, opt);
            o.report["causal"] = e.causal;
            o.report["agree"] = e.agree();
            t << "causal verdict on exec(h): "
              << (e.causal ? "causally linearizable" : "not causally linearizable")
              << (e.agree() ? " (agrees)" : " (DISAGREES)") << "\n";
            if (!e.agree()) {
                o.status = failed;
            }
        }
        o.text = t.str();
        parts.push_back(std::move(o));
    }
    return detail::merge(cfg, std::move(parts), "all linearizable", "not all linearizable");
}

inline Outcome cmd_check_c11(const Config& cfg, std::istream& in)
{
    detail::require_spec(cfg.spec);
    std::vector<Outcome> parts;
    for (const auto& doc : detail::load(cfg, in)) {
        Outcome o;
        std::ostringstream t;
        auto d = execution_from_json(doc.json);
        auto v = validate(d);
        auto c = consistent(d);
        o.report["input"] = doc.source;
        o.report["valid"] = v.pass();
        o.report["consistent"] = c.pass();
        t << doc.source << ": " << d.size() << " events, " << (v.pass() ? "valid" : "INVALID")
          << ", " << (c.pass() ? "consistent" : "INCONSISTENT") << "\n";
        for (const auto& cl : v.clauses) {
            for (const auto& m : cl.violations) {
                t << "  " << cl.clause << ": " << m << "\n";
            }
        }
        if (!c.pass()) {
            t << "  " << (c.c1() ? "C2" : "C1") << " violated\n";
        }
        auto cas = cas_atomicity_violations(d);
        if (!cas.empty()) {
            o.report["cas_not_atomic"] = detail::tuple_json(cas);
            t << "  note: updates not mo-adjacent to their source: " << detail::tuple_text(cas) << "\n";
        }
        o.status = v.pass() && c.pass() ? ok : failed;
        o.report["verdict"] = o.status == ok ? "valid and consistent" : "invalid or inconsistent";
        bool has_methods = std::any_of(d.events().begin(), d.events().end(),
                                       [](const MemoryEvent& e) { return e.is_method(); });
        if (o.status == ok && has_methods) {
            auto s = exec_structure(d);
            auto spec = spec_by_name(cfg.spec, s.objects(), detail::domain_for(d, cfg.values));
            auto w = causally_linearizable(s, spec, detail::check_options(cfg));
            o.report["structure"] = to_json(s);
            o.report["witness"] = detail::sequence_json(w.sequence);
            o.report["rejections"] = detail::rejections_json(w.rejections);
            o.status = w.linearizable ? ok : failed;
            o.report["verdict"] = w.linearizable ? "causally linearizable" : "not causally linearizable";
            t << o.report["verdict"].get<std::string>() << "\n";
            if (w.linearizable) {
                t << "witness: " << detail::events_text(w.sequence) << "\n";
            }
        }
        o.text = t.str();
        parts.push_back(std::move(o));
    }
    return detail::merge(cfg, std::move(parts), "all pass", "some fail");
}

inline LitmusProgram load_litmus(const std::string& path, std::istream& in)
{
    if (path == "-") {
        std::ostringstream ss;
        ss << in.rdbuf();
        return parse_litmus(ss.str());
    }
    try {
        return parse_litmus(read_file(path));
    } catch (const ParseError& e) {
        throw ParseError(std::string(e.what()).substr(std::string(e.what()).find(": ") + 2) +
                             " in " + path,
                         e.line, e.column);
    }
}

/// JSON lines on `out` (one execution per line); --summary prints a count.
inline int cmd_gen(const Config& cfg, std::istream& in, std::ostream& out)
{
    if (cfg.inputs.size() != 1) {
        throw MalformedInput("gen takes exactly one litmus file");
    }
    auto p = load_litmus(cfg.inputs[0], in);
    auto b = parse_bounds(cfg.bounds);
    std::size_t count = 0;
    for_each_execution(p, b, [&](const C11Execution& d) {
        ++count;
        if (!cfg.summary) {
            out << to_json(d).dump() << "\n";
        }
    });
    if (cfg.summary) {
        auto r = report_header(cfg);
        r["input"] = cfg.inputs[0];
        r["bounds"] = to_string(b);
        r["executions"] = count;
        r["verdict"] = "enumerated";
        if (cfg.format == "json") {
            out << r.dump(2) << "\n";
        } else {
            out << p.name << ": " << count << " consistent executions (" << to_string(b) << ")\n";
            out << "seed: " << cfg.seed << "\n";
        }
    }
    return ok;
}

inline Outcome cmd_check_compose(const Config& cfg, std::istream& in)
{
    detail::require_spec(cfg.spec);
    std::vector<Outcome> parts;
    for (const auto& doc : detail::load(cfg, in)) {
        Outcome o;
        std::ostringstream t;
        auto s = detail::structure_of(doc.json);
        auto r = check_compositionality(s, detail::spec_for(cfg, s), detail::check_options(cfg));
        o.report["input"] = doc.source;
        o.report["spec"] = cfg.spec;
        o.report["whole"] = r.whole;
        Json per;
        t << doc.source << ": whole " << (r.whole ? "causally linearizable" : "not causally linearizable")
          << "\n";
        for (const auto& [x, v] : r.per_object) {
            per[x] = v;
            t << "  " << x << ": " << (v ? "causally linearizable" : "not causally linearizable") << "\n";
        }
        o.report["per_object"] = per;
        o.report["iff_holds"] = r.holds();
        t << "compositionality " << (r.holds() ? "holds" : "VIOLATED") << "\n";
        o.status = r.holds() && r.whole ? ok : failed;
        o.report["verdict"] = !r.holds() ? "compositionality violated"
                              : r.whole  ? "causally linearizable"
                                         : "not causally linearizable";
        o.text = t.str();
        parts.push_back(std::move(o));
    }
    return detail::merge(cfg, std::move(parts), "all pass", "some fail");
}

inline Outcome check_sim_one(const Config& cfg, const C11Execution& d, const std::string& source)
{
    Outcome o;
    std::ostringstream t;
    auto variant = detail::stack_variant(cfg.spec);
    auto dom = detail::domain_for(d, cfg.values);
    SimOptions opt;
    opt.fallback = cfg.fallback;
    std::set<ObjectId> objects;
    for (const auto& e : d.events()) {
        if (e.kind == EventKind::invocation) {
            objects.insert(e.invocation.object);
        }
    }
    o.report["input"] = source;
    o.status = ok;
    Json per;
    for (const auto& x : objects) {
        auto r = check_hb_simulation(d, treiber_instance(x, variant, dom), opt);
        Json jr{{"pass", r.pass()}, {"stages", r.stages}, {"steps", r.steps},
                {"max_rho_states", r.max_rho_states}, {"exhaustive", r.exhaustive}};
        t << source << " " << x << ": hb-simulation " << (r.pass() ? "holds" : "FAILS") << " ("
          << r.stages << " stages" << (r.exhaustive ? "" : ", one linear extension only") << ")\n";
        if (!r.pass()) {
            const auto& f = *r.failure;
            jr["failure"] = Json{{"stage", detail::tuple_json(f.stage)}, {"event", f.event},
                                 {"clause", f.clause}, {"detail", f.detail}};
            t << "  clause " << f.clause << " at Z=" << detail::tuple_text(f.stage) << " e=" << f.event
              << ": " << f.detail << "\n";
            o.status = failed;
        }
        if (cfg.props) {
            auto scan = scan_treiber_props(d, x, opt);
            jr["props"] = Json{{"pass", scan.pass()}, {"stages", scan.stages}, {"checks", scan.checks}};
            if (!scan.pass()) {
                const auto& [z, e, rep] = *scan.failure;
                jr["props"]["failure"] = Json{{"stage", detail::tuple_json(z)}, {"event", e},
                                              {"representation", rep.representation}, {"top_ordered", rep.top_ordered},
                                              {"top_before_update", rep.top_before_update}, {"detail", rep.detail}};
                t << "  properties fail at Z=" << detail::tuple_text(z) << ": " << rep.detail << "\n";
                o.status = failed;
            } else {
                t << "  Treiber invariants hold on " << scan.checks << " checks\n";
            }
        }
        per[x] = jr;
    }
    o.report["objects"] = per;
    o.report["verdict"] = o.status == ok ? "hb-simulation holds" : "hb-simulation fails";
    o.text = t.str();
    return o;
}

inline Outcome cmd_check_sim(Config cfg, std::istream& in)
{
    detail::stack_variant(cfg.spec);
    std::vector<Outcome> parts;
    auto is_litmus = [](const std::string& path) {
        return std::filesystem::path(path).extension() == ".litmus";
    };
    if (cfg.inputs.size() == 1 && is_litmus(cfg.inputs[0])) {
        auto p = load_litmus(cfg.inputs[0], in);
        std::size_t i = 0;
        cfg.all = true;
        for_each_execution(p, parse_bounds(cfg.bounds), [&](const C11Execution& d) {
            parts.push_back(check_sim_one(cfg, d, cfg.inputs[0] + "#" + std::to_string(i++)));
        });
        if (parts.empty()) {
            throw PreconditionFailed("program has no consistent executions within bounds");
        }
    } else {
        for (const auto& doc : detail::load(cfg, in)) {
            parts.push_back(check_sim_one(cfg, execution_from_json(doc.json), doc.source));
        }
    }
    return detail::merge(cfg, std::move(parts), "hb-simulation holds on all",
                         "hb-simulation fails on some");
}

// ---------------------------------------------------------------------------
// Corpus runner

int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err);

inline std::string corpus_dir(const Config& cfg)
{
    if (!cfg.corpus_dir.empty()) {
        return cfg.corpus_dir;
    }
    if (const char* env = std::getenv("CAUSALIN_CORPUS"); env && *env) {
        return env;
    }
    return CAUSALIN_DEFAULT_CORPUS;
}

/// Manifest: {"cases":[{"name", "args":[...], "stdin_from":[...]?,
/// "expect":status, "contains":"text"?}]}. Arguments naming files in the
/// corpus directory are resolved against it.
inline Outcome cmd_corpus(const Config& cfg)
{
    namespace fs = std::filesystem;
    const fs::path dir = corpus_dir(cfg);
    const fs::path manifest = cfg.manifest.empty() ? dir / "manifest.json" : fs::path(cfg.manifest);
    if (!fs::is_directory(dir)) {
        throw PreconditionFailed("corpus directory '" + dir.string() + "' not found");
    }
    if (!fs::exists(manifest)) {
        throw PreconditionFailed("no manifest at '" + manifest.string() + "'");
    }
    auto m = parse_json(read_file(manifest.string()));
    if (!m.contains("cases") || !m.at("cases").is_array() || m.at("cases").empty()) {
        throw PreconditionFailed("manifest '" + manifest.string() + "' lists no cases");
    }
    auto resolve = [&](std::vector<std::string> args, std::vector<std::string>& missing) {
        for (auto& a : args) {
            if (a.empty() || a[0] == '-' || a.find('=') != std::string::npos) {
                continue;
            }
            auto p = dir / a;
            if (fs::exists(p)) {
                a = p.string();
            } else if (fs::path(a).has_extension()) {
                missing.push_back(a);
            }
        }
        return args;
    };

    struct CaseResult {
        Json report;
        std::string line;
        bool match = false;
    };
    auto run_case = [&](const Json& c, std::size_t index) {
        auto name = c.value("name", "case" + std::to_string(index + 1));
        int expect = c.value("expect", 0);
        std::vector<std::string> missing;
        auto args = resolve(c.at("args").get<std::vector<std::string>>(), missing);
        std::string input;
        if (c.contains("stdin_from")) {
            auto producer = resolve(c.at("stdin_from").get<std::vector<std::string>>(), missing);
            if (missing.empty()) {
                std::istringstream none;
                std::ostringstream pout;
                std::ostringstream perr;
                run(producer, none, pout, perr);
                input = pout.str();
            }
        }
        CaseResult r;
        r.report = Json{{"name", name}, {"expect", expect}};
        int got = usage;
        if (!missing.empty()) {
            r.report["missing"] = missing;
        } else {
            std::istringstream cin(input);
            std::ostringstream cout;
            std::ostringstream cerr;
            got = run(args, cin, cout, cerr);
            r.match = got == expect;
            if (c.contains("contains")) {
                auto needle = c.at("contains").get<std::string>();
                r.match = r.match && (cout.str() + cerr.str()).find(needle) != std::string::npos;
            }
        }
        r.report["status"] = got;
        r.report["match"] = r.match;
        std::ostringstream line;
        line << (r.match ? "ok       " : "MISMATCH ") << name << "  expect " << expect << ", got " << got;
        if (!missing.empty()) {
            line << "  missing:";
            for (const auto& f : missing) {
                line << " " << f;
            }
        }
        r.line = line.str() + "\n";
        return r;
    };

    // Cases run on a small worker pool; results are merged in manifest order.
    const auto& list = m.at("cases");
    const std::size_t total = list.size();
    std::vector<CaseResult> results(total);
    std::atomic<std::size_t> next{0};
    std::mutex fail_mu;
    std::exception_ptr failure;
    auto worker = [&] {
        for (std::size_t i = next++; i < total; i = next++) {
            try {
                results[i] = run_case(list[i], i);
            } catch (...) {
                std::lock_guard lock(fail_mu);
                if (!failure) {
                    failure = std::current_exception();
                }
            }
        }
    };
    const auto width = std::clamp<std::size_t>(std::thread::hardware_concurrency(), 1, total);
    std::vector<std::thread> pool;
    for (std::size_t w = 1; w < width; ++w) {
        pool.emplace_back(worker);
    }
    worker();
    for (auto& th : pool) {
        th.join();
    }
    if (failure) {
        std::rethrow_exception(failure);
    }

    Outcome o;
    o.report = report_header(cfg);
    o.report["corpus"] = dir.string();
    Json cases = Json::array();
    std::ostringstream t;
    std::size_t matched = 0;
    for (auto& r : results) {
        matched += r.match;
        t << r.line;
        cases.push_back(std::move(r.report));
    }
    o.report["cases"] = std::move(cases);
    o.report["summary"] = Json{{"total", total}, {"matched", matched}};
    o.status = matched == total ? ok : failed;
    o.report["verdict"] = o.status == ok ? "all expectations met" : "mismatches";
    t << matched << "/" << total << " corpus cases as expected\n";
    o.text = t.str();
    return o;
}

// ---------------------------------------------------------------------------

inline void emit(const Config& cfg, const Outcome& o, std::ostream& out)
{
    if (cfg.format == "json") {
        out << o.report.dump(2) << "\n";
    } else {
        out << o.text << "seed: " << cfg.seed << "\n";
    }
}

inline int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err)
{
    Config cfg;
    CLI::App app{"Causal linearizability toolkit", "causalin"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Help for every command");

    auto common = [&](CLI::App* sub, bool inputs = true) {
        if (inputs) {
            sub->add_option("inputs", cfg.inputs, "Input files ('-' for stdin)");
        }
        sub->add_option("--format", cfg.format, "Report format")->check(CLI::IsMember({"text", "json"}));
        sub->add_option("--seed", cfg.seed, "Seed recorded in the report");
    };
    auto spec_opts = [&](CLI::App* sub) {
        sub->add_option("--spec", cfg.spec, "Sequential spec: stack-blocking, stack-empty or register");
        sub->add_option("--values", cfg.values, "Value domain {1..N}")->check(CLI::PositiveNumber);
        sub->add_flag("--force", cfg.force, "Lift the event-count guard of the brute-force checker");
        sub->add_flag("--all", cfg.all, "Check every document of a multi-document input");
    };

    auto* validate_cmd = app.add_subcommand("validate", "Check axioms of a structure, history or C11 execution");
    common(validate_cmd);
    validate_cmd->add_flag("--close", cfg.close, "Also close the structure under the axioms");
    validate_cmd->add_flag("--all", cfg.all, "Check every document");

    auto* lin_cmd = app.add_subcommand("check-lin", "Causal linearizability of a structure or execution");
    common(lin_cmd);
    spec_opts(lin_cmd);
    lin_cmd->add_option("--object", cfg.object, "Check the restriction to one object");
    lin_cmd->add_flag("--real-time", cfg.real_time, "Ignore communication: legal order extending precedence");

    auto* classic_cmd = app.add_subcommand("check-classic", "Classical linearizability of a total history");
    common(classic_cmd);
    spec_opts(classic_cmd);
    classic_cmd->add_flag("--equiv", cfg.equiv, "Compare with the causal verdict on exec(h)");

    auto* c11_cmd = app.add_subcommand("check-c11", "Validity, consistency and linearizability of C11 executions");
    common(c11_cmd);
    spec_opts(c11_cmd);

    auto* gen_cmd = app.add_subcommand("gen", "Enumerate consistent executions of a litmus program");
    common(gen_cmd);
    gen_cmd->add_option("--bounds", cfg.bounds, "retries=R,values=V,events=E");
    gen_cmd->add_flag("--summary", cfg.summary, "Print only the number of executions");

    auto* compose_cmd = app.add_subcommand("check-compose", "Whole structure versus per-object projections");
    common(compose_cmd);
    spec_opts(compose_cmd);

    auto* sim_cmd = app.add_subcommand("check-sim", "hb-simulation of the Treiber stack");
    common(sim_cmd);
    spec_opts(sim_cmd);
    sim_cmd->add_option("--bounds", cfg.bounds, "Bounds when the input is a litmus program");
    sim_cmd->add_flag("--fallback", cfg.fallback, "Beyond 18 events check one linear extension only");
    sim_cmd->add_flag("--props", cfg.props, "Also check the Treiber invariants at every stage");

    auto* corpus_cmd = app.add_subcommand("corpus", "Run the corpus with its expected verdicts");
    common(corpus_cmd, false);
    corpus_cmd->add_option("--dir", cfg.corpus_dir, "Corpus directory (default $CAUSALIN_CORPUS)");
    corpus_cmd->add_option("--manifest", cfg.manifest, "Manifest file (default <dir>/manifest.json)");

    std::vector<std::string> argv_store{"causalin"};
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& a : argv_store) {
        argv.push_back(a.data());
    }
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return usage;
    }
    cfg.command = app.get_subcommands().front()->get_name();

    try {
        Outcome o;
        if (cfg.command == "validate") {
            o = cmd_validate(cfg, in);
        } else if (cfg.command == "check-lin") {
            o = cmd_check_lin(cfg, in);
        } else if (cfg.command == "check-classic") {
            o = cmd_check_classic(cfg, in);
        } else if (cfg.command == "check-c11") {
            o = cmd_check_c11(cfg, in);
        } else if (cfg.command == "gen") {
            return cmd_gen(cfg, in, out);
        } else if (cfg.command == "check-compose") {
            o = cmd_check_compose(cfg, in);
        } else if (cfg.command == "check-sim") {
            o = cmd_check_sim(cfg, in);
        } else {
            o = cmd_corpus(cfg);
        }
        emit(cfg, o, out);
        return o.status;
    } catch (const ParseError& e) {
        err << "causalin: parse error at " << e.what() << "\n";
    } catch (const BoundExceeded& e) {
        err << "causalin: refused, bound exceeded: " << e.what() << "\n";
    } catch (const InvariantViolation& e) {
        err << "causalin: internal invariant violated: " << e.what() << "\n";
    } catch (const Error& e) {
        err << "causalin: " << e.what() << "\n";
    } catch (const nlohmann::json::exception& e) {
        err << "causalin: malformed input: " << e.what() << "\n";
    }
    return usage;
}

inline int run(int argc, char** argv, std::istream& in, std::ostream& out, std::ostream& err)
{
    return run(std::vector<std::string>(argv + 1, argv + argc), in, out, err);
}

}  // namespace causalin::cli
