#include <map>
#include <sstream>

#include "qshield/dfa.hpp"
#include "qshield/errors.hpp"

namespace qshield {

std::string export_dfa_text(const Dfa& a) {
    std::ostringstream out;
    out << "vars: " << a.vars().to_string() << '\n';
    out << "states: " << a.num_states() << '\n';
    out << "init: " << a.init() << '\n';
    out << "accepting:";
    for (State s = 0; s < a.num_states(); ++s)
        if (a.accepting(s)) out << ' ' << s;
    out << '\n';
    for (State s = 0; s < a.num_states(); ++s)
        for (LetterIndex l = 0; l < a.letter_count(); ++l)
            out << s << ' ' << l << ' ' << a.next(s, l) << '\n';
    return out.str();
}

Dfa import_dfa_text(std::istream& in) {
    auto next_line = [&](std::string& line) -> bool {
        while (std::getline(in, line)) {
            auto hash = line.find("//");
            if (hash != std::string::npos) line.erase(hash);
            auto last = line.find_last_not_of(" \t\r");
            if (last == std::string::npos) continue;
            line.erase(last + 1);
            return true;
        }
        return false;
    };
    auto expect_header = [&](std::string& line, const char* key) -> std::string {
        if (!next_line(line)) throw parse_error(std::string("dfa file: missing '") + key + "' line");
        std::string prefix = std::string(key) + ":";
        if (line.rfind(prefix, 0) != 0)
            throw parse_error("dfa file: expected '" + prefix + " ...', got '" + line + "'");
        return line.substr(prefix.size());
    };

    std::string line;
    std::istringstream vars_in(expect_header(line, "vars"));
    std::vector<std::string> names;
    for (std::string n; vars_in >> n;) names.push_back(n);
    VarSet vars(names);

    std::size_t num_states = 0;
    {
        std::istringstream s(expect_header(line, "states"));
        if (!(s >> num_states) || num_states == 0)
            throw parse_error("dfa file: bad 'states' count");
    }
    State init = 0;
    {
        std::istringstream s(expect_header(line, "init"));
        if (!(s >> init) || init >= num_states) throw parse_error("dfa file: bad 'init' state");
    }
    Dfa a(vars, num_states, init);
    {
        std::istringstream s(expect_header(line, "accepting"));
        for (State q; s >> q;) {
            if (q >= num_states) throw parse_error("dfa file: accepting state out of range");
            a.set_accepting(q, true);
        }
    }
    while (next_line(line)) {
        std::istringstream s(line);
        State from, to;
        LetterIndex letter;
        if (!(s >> from >> letter >> to))
            throw parse_error("dfa file: bad transition line '" + line + "'");
        if (from >= num_states || to >= num_states || letter >= vars.letter_count())
            throw parse_error("dfa file: transition out of range: '" + line + "'");
        a.set_transition(from, letter, to);
    }
    try {
        a.check_total();
    } catch (const internal_error&) {
        throw parse_error("dfa file: transition table is not total");
    }
    return a;
}

Dfa import_dfa_text(const std::string& text) {
    std::istringstream in(text);
    return import_dfa_text(in);
}

namespace {

struct Cube {
    LetterIndex care = 0;  // bits the cube constrains
    LetterIndex value = 0; // their required values
};

// Greedy cube cover of a letter set: start from singleton cubes and keep
// merging pairs that differ in exactly one cared bit.
std::vector<Cube> cover(std::vector<LetterIndex> letters, std::size_t bits) {
    LetterIndex full = static_cast<LetterIndex>((1u << bits) - 1);
    std::vector<Cube> cubes;
    for (LetterIndex l : letters) cubes.push_back({full, l});
    bool merged = true;
    while (merged) {
        merged = false;
        for (std::size_t i = 0; i < cubes.size() && !merged; ++i) {
            for (std::size_t j = i + 1; j < cubes.size() && !merged; ++j) {
                if (cubes[i].care != cubes[j].care) continue;
                LetterIndex diff = (cubes[i].value ^ cubes[j].value) & cubes[i].care;
                if (diff == 0 || (diff & (diff - 1)) != 0) continue;
                cubes[i].care &= ~diff;
                cubes[i].value &= cubes[i].care;
                cubes.erase(cubes.begin() + static_cast<std::ptrdiff_t>(j));
                merged = true;
            }
        }
    }
    return cubes;
}

std::string cube_label(const std::vector<Cube>& cubes, const VarSet& vars) {
    std::string out;
    for (std::size_t c = 0; c < cubes.size(); ++c) {
        if (c) out += " | ";
        if (cubes[c].care == 0) {
            out += "true";
            continue;
        }
        bool first = true;
        for (std::size_t i = 0; i < vars.size(); ++i) {
            LetterIndex bit = LetterIndex{1} << (vars.size() - 1 - i);
            if (!(cubes[c].care & bit)) continue;
            if (!first) out += ' ';
            first = false;
            if (!(cubes[c].value & bit)) out += '!';
            out += vars.name(i);
        }
    }
    return out.empty() ? "true" : out;
}

} // namespace

std::string export_dot(const Dfa& a, const std::string& name) {
    std::ostringstream out;
    out << "digraph " << name << " {\n";
    out << "  rankdir=LR;\n";
    out << "  __init [shape=point];\n";
    for (State s : a.reachable_states())
        out << "  s" << s << " [shape=" << (a.accepting(s) ? "doublecircle" : "circle")
            << " label=\"" << s << "\"];\n";
    out << "  __init -> s" << a.init() << ";\n";
    for (State s : a.reachable_states()) {
        std::map<State, std::vector<LetterIndex>> by_target;
        for (LetterIndex l = 0; l < a.letter_count(); ++l) by_target[a.next(s, l)].push_back(l);
        for (auto& [to, letters] : by_target)
            out << "  s" << s << " -> s" << to << " [label=\""
                << cube_label(cover(std::move(letters), a.vars().size()), a.vars()) << "\"];\n";
    }
    out << "}\n";
    return out.str();
}

} // namespace qshield
