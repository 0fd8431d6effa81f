#include "qshield/shield.hpp"

#include <chrono>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

#include "qshield/errors.hpp"
#include "qshield/runtime.hpp"

namespace qshield {

VarSet ShieldInterface::ambient() const {
    return inputs.united(sse_outputs).united(shield_outputs);
}

VarSet ShieldInterface::game_inputs() const { return inputs.united(sse_outputs); }

void ShieldInterface::validate() const {
    if (sse_outputs.size() != shield_outputs.size())
        throw declaration_error("sse_outputs and shield_outputs must pair up one to one");
    VarSet amb = ambient(); // united() rejects nothing, so recheck disjointness
    if (amb.size() != inputs.size() + sse_outputs.size() + shield_outputs.size())
        throw declaration_error("interface variable sets must be pairwise disjoint");
    for (const auto& n : amb.names())
        if (n == k_sse_ok_name || n == k_deviation_name)
            throw declaration_error("'" + n + "' is reserved for the indicator signals");
}

ShieldType ShieldType::v0() { return ShieldType{ShieldTypeKind::V0, 1, 0, 0, {}}; }

ShieldType ShieldType::v1(unsigned k) {
    if (k < 1) throw declaration_error("shield type V1 needs k >= 1");
    return ShieldType{ShieldTypeKind::V1, k, 0, 0, {}};
}

ShieldType ShieldType::v2(unsigned k) {
    if (k < 1) throw declaration_error("shield type V2 needs k >= 1");
    return ShieldType{ShieldTypeKind::V2, k, 0, 0, {}};
}

ShieldType ShieldType::v3(unsigned e, unsigned d) {
    return ShieldType{ShieldTypeKind::V3, 1, e, d, {}};
}

ShieldType ShieldType::custom_hdc(QddcFormula f) {
    for (const auto& v : f.free_vars())
        if (v != k_sse_ok_name && v != k_deviation_name)
            throw declaration_error("custom HDC may only use SSEOK and Deviation, found: " + v);
    ShieldType t;
    t.kind = ShieldTypeKind::Custom;
    t.custom = std::move(f);
    return t;
}

std::string ShieldType::to_string() const {
    switch (kind) {
        case ShieldTypeKind::V0: return "V0";
        case ShieldTypeKind::V1: return "V1 k=" + std::to_string(k);
        case ShieldTypeKind::V2: return "V2 k=" + std::to_string(k);
        case ShieldTypeKind::V3:
            return "V3 e=" + std::to_string(e) + " d=" + std::to_string(d);
        case ShieldTypeKind::Custom: return "custom " + custom->to_string();
    }
    throw internal_error("unreachable shield type");
}

namespace {

PropFormula sse_ok_var() { return PropFormula::var(k_sse_ok_name); }
PropFormula deviation_var() { return PropFormula::var(k_deviation_name); }

QddcFormula no_spurious_deviation() {
    // []( (<!Deviation>^[[SSEOK]]) => [[!Deviation]] )
    return QddcFormula::box(QddcFormula::implies(
        QddcFormula::chop(QddcFormula::point(PropFormula::negate(deviation_var())),
                          QddcFormula::all(sse_ok_var())),
        QddcFormula::all(PropFormula::negate(deviation_var()))));
}

} // namespace

QddcFormula hdc_formula(const ShieldType& type) {
    switch (type.kind) {
        case ShieldTypeKind::V0: return QddcFormula::truth();
        case ShieldTypeKind::V1:
            // []([[Deviation]] => slen<k)
            return QddcFormula::box(QddcFormula::implies(
                QddcFormula::all(deviation_var()), QddcFormula::slen_cmp(Cmp::Lt, type.k)));
        case ShieldTypeKind::V2:
            // []([[SSEOK && Deviation]] => slen<k) && NoSpuriousDeviation
            return QddcFormula::conj(
                QddcFormula::box(QddcFormula::implies(
                    QddcFormula::all(PropFormula::conj(sse_ok_var(), deviation_var())),
                    QddcFormula::slen_cmp(Cmp::Lt, type.k))),
                no_spurious_deviation());
        case ShieldTypeKind::V3:
            // []((scount !SSEOK <= e) => (scount Deviation <= d)) && NoSpuriousDeviation
            return QddcFormula::conj(
                QddcFormula::box(QddcFormula::implies(
                    QddcFormula::scount_cmp(PropFormula::negate(sse_ok_var()), Cmp::Le, type.e),
                    QddcFormula::scount_cmp(deviation_var(), Cmp::Le, type.d))),
                no_spurious_deviation());
        case ShieldTypeKind::Custom: return *type.custom;
    }
    throw internal_error("unreachable shield type");
}

void ShieldSpec::validate() const {
    iface.validate();
    if (!req && !req_import)
        throw declaration_error("shield spec needs a requirement (req: or req_file:)");
    if (req && req_import)
        throw declaration_error("give either req: or req_file:, not both");
    if (req) {
        VarSet game = iface.game_inputs();
        for (const auto& v : req->free_vars())
            if (!game.contains(v))
                throw declaration_error("req uses a variable outside I and O: " + v);
    }
    if (req_import && req_import->vars() != iface.game_inputs())
        throw declaration_error("imported requirement monitor must be over I then O, i.e. '" +
                                iface.game_inputs().to_string() + "'");
    if (iface.shield_outputs.empty())
        throw declaration_error("shield needs at least one output pair");
    (void)hdc_formula(type); // parameter range check
}

IoPartition ShieldSpec::game_io() const {
    return IoPartition{iface.game_inputs(), iface.shield_outputs};
}

QddcFormula req_primed(const ShieldSpec& spec) {
    if (!spec.req) throw declaration_error("req_primed needs a formula requirement");
    std::vector<std::pair<std::string, std::string>> map;
    for (std::size_t i = 0; i < spec.iface.sse_outputs.size(); ++i)
        map.emplace_back(spec.iface.sse_outputs.name(i), spec.iface.shield_outputs.name(i));
    return spec.req->rename_free(map);
}

std::vector<IndicatorDef> shield_inddef(const ShieldSpec& spec) {
    if (!spec.req) throw declaration_error("shield_inddef needs a formula requirement");
    PropFormula mismatch = PropFormula::ff();
    for (std::size_t i = 0; i < spec.iface.sse_outputs.size(); ++i) {
        PropFormula differ = PropFormula::negate(
            PropFormula::iff(PropFormula::var(spec.iface.sse_outputs.name(i)),
                             PropFormula::var(spec.iface.shield_outputs.name(i))));
        mismatch = i == 0 ? differ : PropFormula::disj(mismatch, differ);
    }
    return {
        IndicatorDef{*spec.req, k_sse_ok_name},
        IndicatorDef{QddcFormula::chop(QddcFormula::truth(), QddcFormula::point(mismatch)),
                     k_deviation_name},
    };
}

namespace {

Dfa rename_dfa_vars(const Dfa& a, const VarSet& to) {
    if (to.size() != a.vars().size())
        throw internal_error("rename_dfa_vars: arity mismatch");
    Dfa out(to, a.num_states(), a.init());
    for (State s = 0; s < a.num_states(); ++s) {
        out.set_accepting(s, a.accepting(s));
        for (LetterIndex l = 0; l < a.letter_count(); ++l)
            out.set_transition(s, l, a.next(s, l));
    }
    return out;
}

} // namespace

Dfa req_io_monitor(const ShieldSpec& spec, const CompileOptions& opts) {
    VarSet amb = spec.iface.ambient();
    if (spec.req_import) return extend_alphabet(*spec.req_import, amb);
    return extend_alphabet(compile(*spec.req, spec.iface.game_inputs(), opts), amb);
}

Dfa req_primed_monitor(const ShieldSpec& spec, const CompileOptions& opts) {
    VarSet amb = spec.iface.ambient();
    if (spec.req_import) {
        // same automaton read over I and O' instead of I and O
        VarSet primed = spec.iface.inputs.united(spec.iface.shield_outputs);
        return extend_alphabet(rename_dfa_vars(*spec.req_import, primed), amb);
    }
    return extend_alphabet(compile(req_primed(spec), amb, opts), amb);
}

Dfa build_hshield(const ShieldSpec& spec, const CompileOptions& opts) {
    spec.validate();
    VarSet amb = spec.iface.ambient();
    const std::size_t nl = amb.letter_count();

    Dfa a_req = req_primed_monitor(spec, opts); // REQ(I,O') over the ambient alphabet
    Dfa m_req = req_io_monitor(spec, opts);     // REQ(I,O) over the ambient alphabet
    VarSet hdc_vars({k_sse_ok_name, k_deviation_name});
    Dfa a_hdc = compile(hdc_formula(spec.type), hdc_vars, opts);

    // per-letter deviation bit over the ambient alphabet
    std::vector<char> dev_bit(nl, 0);
    for (LetterIndex l = 0; l < nl; ++l) {
        Letter letter(amb, l);
        bool dev = false;
        for (std::size_t i = 0; i < spec.iface.sse_outputs.size() && !dev; ++i)
            dev = letter.value(spec.iface.sse_outputs.name(i)) !=
                  letter.value(spec.iface.shield_outputs.name(i));
        dev_bit[l] = dev ? 1 : 0;
    }

    // product (REQ(I,O') monitor, REQ(I,O) monitor, HDC monitor over the
    // derived indicator letters)
    struct Key {
        State a, m, h;
        bool operator==(const Key& o) const { return a == o.a && m == o.m && h == o.h; }
    };
    struct KeyHash {
        std::size_t operator()(const Key& k) const {
            return (static_cast<std::size_t>(k.a) * 1000003u + k.m) * 1000003u + k.h;
        }
    };
    std::unordered_map<Key, State, KeyHash> ids;
    std::vector<Key> nodes;
    auto intern = [&](Key k) -> State {
        auto [it, ins] = ids.emplace(k, static_cast<State>(nodes.size()));
        if (ins) {
            nodes.push_back(k);
            if (nodes.size() > opts.max_states)
                throw capacity_error("hard requirement product exceeded the state bound");
        }
        return it->second;
    };
    intern(Key{a_req.init(), m_req.init(), a_hdc.init()});
    std::vector<State> delta;
    for (State s = 0; s < nodes.size(); ++s) {
        Key k = nodes[s];
        for (LetterIndex l = 0; l < nl; ++l) {
            State a2 = a_req.next(k.a, l);
            State m2 = m_req.next(k.m, l);
            bool sse_ok = m_req.accepting(m2);
            LetterIndex hdc_letter =
                static_cast<LetterIndex>((sse_ok ? 2 : 0) | (dev_bit[l] ? 1 : 0));
            State h2 = a_hdc.next(k.h, hdc_letter);
            delta.push_back(intern(Key{a2, m2, h2}));
        }
    }
    Dfa out(amb, nodes.size(), 0);
    for (State s = 0; s < nodes.size(); ++s) {
        out.set_accepting(s, a_req.accepting(nodes[s].a) && a_hdc.accepting(nodes[s].h));
        for (LetterIndex l = 0; l < nl; ++l) out.set_transition(s, l, delta[s * nl + l]);
    }
    return minimize(out);
}

SoftSpec hamming_soft(const ShieldInterface& iface) {
    SoftSpec soft;
    for (std::size_t i = 0; i < iface.sse_outputs.size(); ++i) {
        QddcFormula match = QddcFormula::chop(
            QddcFormula::truth(),
            QddcFormula::point(PropFormula::iff(PropFormula::var(iface.sse_outputs.name(i)),
                                                PropFormula::var(iface.shield_outputs.name(i)))));
        soft.push_back(SoftReq{match, 1});
    }
    return soft;
}

std::size_t cascade_form_state_count(const Controller& c, const ShieldSpec& spec,
                                     const CompileOptions& opts) {
    ControllerTable table = ControllerTable::from_controller(c);
    Dfa m_req = spec.req_import ? *spec.req_import
                                : compile(*spec.req, spec.iface.game_inputs(), opts);
    VarSet ext = spec.iface.ambient().with(k_sse_ok_name).with(k_deviation_name);
    const std::size_t ni = table.inputs.letter_count();
    const std::size_t out_bits = spec.iface.shield_outputs.size();
    const LetterIndex out_mask = static_cast<LetterIndex>((1u << out_bits) - 1);
    const std::size_t ms = m_req.num_states();
    const std::size_t live = table.num_states() * ms;

    Dfa dfa(ext, live + 1, static_cast<State>(table.init * ms + m_req.init()));
    const State rej = static_cast<State>(live);
    for (State cs = 0; cs < table.num_states(); ++cs) {
        for (State mi = 0; mi < ms; ++mi) {
            State s = static_cast<State>(cs * ms + mi);
            dfa.set_accepting(s, true);
            for (LetterIndex l = 0; l < ext.letter_count(); ++l) {
                LetterIndex in = static_cast<LetterIndex>(l >> (out_bits + 2));
                LetterIndex oprime = (l >> 2) & out_mask;
                bool sse_bit = (l >> 1) & 1u, dev_bit = l & 1u;
                LetterIndex chosen = table.choice[cs * ni + in];
                State mn = m_req.next(mi, in);
                bool sse_ok = m_req.accepting(mn);
                bool dev = (in & out_mask) != chosen;
                bool allowed = oprime == chosen && sse_bit == sse_ok && dev_bit == dev;
                dfa.set_transition(
                    s, l,
                    allowed ? static_cast<State>(table.next[cs * ni + in] * ms + mn) : rej);
            }
        }
    }
    for (LetterIndex l = 0; l < ext.letter_count(); ++l) dfa.set_transition(rej, l, rej);
    dfa.set_accepting(rej, false);
    return minimize(dfa).num_states();
}

std::variant<ShieldResult, Unrealizable> synthesize(const ShieldSpec& spec,
                                                    const SynthOptions& opts) {
    auto t0 = std::chrono::steady_clock::now();
    spec.validate();
    if (!spec.ord)
        throw declaration_error("synthesis needs an explicit output order (order: ...)");
    Dfa hard = build_hshield(spec, opts.compile);
    auto res = mps(hard, spec.game_io());
    if (std::holds_alternative<Unrealizable>(res)) return std::get<Unrealizable>(res);

    ShieldResult out{Controller{std::get<Supervisor>(res)}, std::get<Supervisor>(res), {}, {}};
    out.stats.hshield_states = hard.num_states();
    out.stats.mps_states = out.mps_sup.num_states();
    const Supervisor* base = &out.mps_sup;
    if (spec.dm) {
        out.mphos_sup = mphos(out.mps_sup, hamming_soft(spec.iface), spec.horizon, opts);
        out.stats.mphos_states = out.mphos_sup->num_states();
        base = &*out.mphos_sup;
    }
    out.controller = determinize(*base, *spec.ord);
    out.stats.controller_states = out.controller.sup.num_states();
    std::size_t live = 0;
    for (State s : out.controller.sup.dfa.reachable_states())
        if (s != out.controller.sup.reject) ++live;
    out.stats.controller_live_states = live;
    out.stats.cascade_states = cascade_form_state_count(out.controller, spec, opts.compile);
    out.stats.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

namespace {

std::string strip(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

VarSet parse_names(const std::string& s) {
    std::istringstream in(s);
    std::vector<std::string> names;
    for (std::string n; in >> n;) names.push_back(n);
    return VarSet(names);
}

ShieldType parse_shield_type(const std::string& value, const VarSet& hdc_vars,
                             const MacroTable& macros) {
    std::istringstream in(value);
    std::string name;
    in >> name;
    auto param = [&](const char* key) -> unsigned {
        std::string tok;
        if (!(in >> tok) || tok.rfind(std::string(key) + "=", 0) != 0)
            throw parse_error(std::string("shield_type: expected ") + key + "=N in '" + value +
                              "'");
        try {
            return static_cast<unsigned>(std::stoul(tok.substr(2)));
        } catch (const std::exception&) {
            throw parse_error("shield_type: bad number in '" + tok + "'");
        }
    };
    if (name == "V0") return ShieldType::v0();
    if (name == "V1") return ShieldType::v1(param("k"));
    if (name == "V2") return ShieldType::v2(param("k"));
    if (name == "V3") {
        unsigned e = param("e");
        unsigned d = param("d");
        return ShieldType::v3(e, d);
    }
    if (name == "custom") {
        std::string rest;
        std::getline(in, rest);
        return ShieldType::custom_hdc(parse_qddc(rest, hdc_vars, macros));
    }
    throw parse_error("unknown shield_type '" + name + "'");
}

} // namespace

ShieldSpec parse_shield_spec(const std::string& text) {
    // gather logical lines (comments stripped, backslash continuation)
    std::vector<std::string> lines;
    {
        std::istringstream in(text);
        std::string line, pending;
        while (std::getline(in, line)) {
            auto hash = line.find("//");
            if (hash != std::string::npos) line.erase(hash);
            line = strip(line);
            if (!line.empty() && line.back() == '\\') {
                pending += line.substr(0, line.size() - 1) + " ";
                continue;
            }
            if (!pending.empty()) {
                line = pending + line;
                pending.clear();
            }
            if (!line.empty()) lines.push_back(line);
        }
        if (!pending.empty()) lines.push_back(strip(pending));
    }

    std::map<std::string, std::string> fields;
    std::vector<std::pair<std::string, std::string>> macro_lines; // (header, body)
    for (const auto& line : lines) {
        if (line.rfind("macro ", 0) == 0) {
            auto eq = line.find('=');
            if (eq == std::string::npos)
                throw parse_error("macro line needs '=': '" + line + "'");
            macro_lines.emplace_back(strip(line.substr(6, eq - 6)), strip(line.substr(eq + 1)));
            continue;
        }
        auto colon = line.find(':');
        if (colon == std::string::npos)
            throw parse_error("expected 'key: value' line, got '" + line + "'");
        std::string key = strip(line.substr(0, colon));
        if (fields.count(key)) throw parse_error("duplicate section '" + key + "'");
        fields[key] = strip(line.substr(colon + 1));
    }

    static const std::set<std::string> known{"inputs",         "sse_outputs", "shield_outputs",
                                             "req",            "req_file",    "shield_type",
                                             "dm",             "horizon",     "order"};
    for (const auto& [k, v] : fields)
        if (!known.count(k)) throw parse_error("unknown section '" + k + ":'");

    ShieldSpec spec;
    auto field = [&](const char* key) -> std::optional<std::string> {
        auto it = fields.find(key);
        if (it == fields.end()) return std::nullopt;
        return it->second;
    };
    spec.iface.inputs = parse_names(field("inputs").value_or(""));
    spec.iface.sse_outputs = parse_names(field("sse_outputs").value_or(""));
    spec.iface.shield_outputs = parse_names(field("shield_outputs").value_or(""));

    spec.macros = MacroTable::with_builtins();
    for (const auto& [header, body] : macro_lines) {
        std::string name = header;
        std::vector<std::string> params;
        auto paren = header.find('(');
        if (paren != std::string::npos) {
            if (header.back() != ')')
                throw parse_error("macro parameter list needs ')': '" + header + "'");
            name = strip(header.substr(0, paren));
            std::string inner = header.substr(paren + 1, header.size() - paren - 2);
            std::istringstream ps(inner);
            for (std::string p; std::getline(ps, p, ',');) {
                p = strip(p);
                if (!p.empty()) params.push_back(p);
            }
        }
        if (name.empty()) throw parse_error("macro needs a name");
        spec.macros.define(name, std::move(params), body);
    }

    if (auto req = field("req"))
        spec.req = parse_qddc(*req, spec.iface.game_inputs(), spec.macros);
    if (auto req_file = field("req_file")) {
        // stored verbatim; load_shield_spec resolves it relative to the file
        std::ifstream in(*req_file);
        if (!in) throw parse_error("cannot open req_file '" + *req_file + "'");
        spec.req_import = import_dfa_text(in);
    }

    VarSet hdc_vars({k_sse_ok_name, k_deviation_name});
    if (auto st = field("shield_type"))
        spec.type = parse_shield_type(*st, hdc_vars, spec.macros);
    if (auto dm = field("dm")) {
        if (*dm == "on") spec.dm = true;
        else if (*dm == "off") spec.dm = false;
        else throw parse_error("dm must be 'on' or 'off', got '" + *dm + "'");
    }
    if (auto h = field("horizon")) {
        try {
            spec.horizon = static_cast<unsigned>(std::stoul(*h));
        } catch (const std::exception&) {
            throw parse_error("horizon: expected a number, got '" + *h + "'");
        }
    }
    if (auto ord = field("order"))
        spec.ord = OutputOrder::parse(*ord, spec.iface.shield_outputs);
    return spec;
}

ShieldSpec load_shield_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw parse_error("cannot open spec file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    std::string text = buf.str();
    // resolve req_file relative to the spec file's directory
    auto slash = path.find_last_of('/');
    if (slash != std::string::npos) {
        std::string dir = path.substr(0, slash + 1);
        std::string marker = "req_file:";
        auto pos = text.find(marker);
        if (pos != std::string::npos) {
            auto vstart = pos + marker.size();
            while (vstart < text.size() && (text[vstart] == ' ' || text[vstart] == '\t')) ++vstart;
            if (vstart < text.size() && text[vstart] != '/')
                text.insert(vstart, dir);
        }
    }
    return parse_shield_spec(text);
}

} // namespace qshield
